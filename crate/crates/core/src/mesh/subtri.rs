use super::quality::chebyshev_center;
use super::types::{signed_area, Point2, PolygonalMesh};
use crate::error::{Error, Result};

/// Affine map x = b + J x̂ from the reference triangle (0,0),(1,0),(0,1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    /// Row-major Jacobian.
    pub j: [[f64; 2]; 2],
    pub b: Point2,
}

impl AffineMap {
    /// Map sending (0,0), (1,0), (0,1) to `p0`, `p1`, `p2`.
    pub fn from_triangle(p0: Point2, p1: Point2, p2: Point2) -> Self {
        let a = p1 - p0;
        let c = p2 - p0;
        Self { j: [[a.x, c.x], [a.y, c.y]], b: p0 }
    }

    pub fn det(&self) -> f64 {
        self.j[0][0] * self.j[1][1] - self.j[0][1] * self.j[1][0]
    }

    pub fn apply(&self, p: [f64; 2]) -> Point2 {
        Point2::new(
            self.b.x + self.j[0][0] * p[0] + self.j[0][1] * p[1],
            self.b.y + self.j[1][0] * p[0] + self.j[1][1] * p[1],
        )
    }

    /// J^{-1}, row-major.
    pub fn inverse_jacobian(&self) -> [[f64; 2]; 2] {
        let d = self.det();
        [[self.j[1][1] / d, -self.j[0][1] / d], [-self.j[1][0] / d, self.j[0][0] / d]]
    }
}

/// Star splitting of one cell: triangle i is (v_i, v_{i+1}, center).
#[derive(Clone, Debug)]
pub struct CellSplit {
    pub center: Point2,
    pub maps: Vec<AffineMap>,
    pub areas: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SubTriangulation {
    pub cells: Vec<CellSplit>,
}

pub fn split_cell(points: &[Point2], cell: usize) -> Result<CellSplit> {
    let (center, _, _) = chebyshev_center(points);
    let n = points.len();
    let mut maps = Vec::with_capacity(n);
    let mut areas = Vec::with_capacity(n);
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let area = signed_area(&[a, b, center]);
        if !(area > 0.0) {
            return Err(Error::NotStarShaped { cell });
        }
        maps.push(AffineMap::from_triangle(a, b, center));
        areas.push(area);
    }
    Ok(CellSplit { center, maps, areas })
}

pub fn subtriangulate(mesh: &PolygonalMesh) -> Result<SubTriangulation> {
    let cells = (0..mesh.num_cells())
        .map(|c| split_cell(&mesh.cell_points(c), c))
        .collect::<Result<Vec<_>>>()?;
    Ok(SubTriangulation { cells })
}
