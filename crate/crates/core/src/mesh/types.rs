use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Interior,
    Dirichlet,
    Neumann,
}

/// Skeleton edge. The left cell traverses `v[0] -> v[1]` counterclockwise, so
/// `normal` points out of the left cell (and out of the domain on the boundary).
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub v: [usize; 2],
    pub left: usize,
    pub right: Option<usize>,
    pub tag: BoundaryTag,
    pub normal: Point2,
    pub length: f64,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }
}

/// Polygonal mesh with counterclockwise cells and a deduplicated skeleton.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonalMesh {
    pub vertices: Vec<Point2>,
    pub cells: Vec<Vec<usize>>,
    pub edges: Vec<Edge>,
    /// `cell_edges[c][i]` is the edge joining local vertices i and i+1 of cell c.
    pub cell_edges: Vec<Vec<usize>>,
}

impl PolygonalMesh {
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point2> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        signed_area(&self.cell_points(c))
    }

    /// True when local edge `i` of cell `c` runs in the global direction of its edge.
    pub fn same_orientation(&self, c: usize, i: usize) -> bool {
        self.edges[self.cell_edges[c][i]].v[0] == self.cells[c][i]
    }

    /// Outward unit normal of cell `c` on its local edge `i`.
    pub fn outward_normal(&self, c: usize, i: usize) -> Point2 {
        let n = self.edges[self.cell_edges[c][i]].normal;
        if self.same_orientation(c, i) {
            n
        } else {
            -n
        }
    }

    pub fn centroid(&self, c: usize) -> Point2 {
        polygon_centroid(&self.cell_points(c))
    }

    pub fn diameter(&self, c: usize) -> f64 {
        let p = self.cell_points(c);
        let mut d = 0.0f64;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                d = d.max(p[i].dist(p[j]));
            }
        }
        d
    }

    pub fn bounding_box(&self) -> (Point2, Point2) {
        bounding_box(&self.vertices)
    }
}

pub fn bounding_box(pts: &[Point2]) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

/// Shoelace area, positive for counterclockwise loops.
pub fn signed_area(p: &[Point2]) -> f64 {
    let n = p.len();
    let mut a = 0.0;
    for i in 0..n {
        a += p[i].cross(p[(i + 1) % n]);
    }
    0.5 * a
}

pub fn polygon_centroid(p: &[Point2]) -> Point2 {
    let n = p.len();
    let o = p[0];
    let mut a = 0.0;
    let mut c = Point2::default();
    for i in 0..n {
        let u = p[i] - o;
        let v = p[(i + 1) % n] - o;
        let w = u.cross(v);
        a += w;
        c = c + (u + v) * w;
    }
    o + c * (1.0 / (3.0 * a))
}
