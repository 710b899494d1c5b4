use std::collections::HashMap;

use super::types::{bounding_box, signed_area, BoundaryTag, Edge, Point2, PolygonalMesh};
use crate::error::{Error, Result};

pub const MAX_CELL_EDGES: usize = 64;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidMesh(msg.into())
}

impl PolygonalMesh {
    /// Builds the skeleton from vertices and counterclockwise cell loops, tagging the
    /// boundary with the default rule (Neumann on the top side, Dirichlet elsewhere).
    pub fn from_cells(vertices: Vec<Point2>, cells: Vec<Vec<usize>>) -> Result<Self> {
        Self::from_cells_with_tags(vertices, cells, &[])
    }

    /// Like [`PolygonalMesh::from_cells`], with explicit tags overriding the default on listed boundary edges.
    pub fn from_cells_with_tags(
        vertices: Vec<Point2>,
        cells: Vec<Vec<usize>>,
        tags: &[(usize, usize, BoundaryTag)],
    ) -> Result<Self> {
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(invalid(format!("vertex {i} is not finite")));
        }
        if cells.is_empty() {
            return Err(invalid("mesh has no cells"));
        }
        for (c, cell) in cells.iter().enumerate() {
            check_cell(&vertices, c, cell)?;
        }

        let mut edges: Vec<Edge> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let n = cell.len();
            let mut ce = Vec::with_capacity(n);
            for i in 0..n {
                let a = cell[i];
                let b = cell[(i + 1) % n];
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        let d = vertices[b] - vertices[a];
                        let length = d.norm();
                        edges.push(Edge {
                            v: [a, b],
                            left: c,
                            right: None,
                            tag: BoundaryTag::Dirichlet,
                            normal: Point2::new(d.y / length, -d.x / length),
                            length,
                        });
                        lookup.insert(key, edges.len() - 1);
                        ce.push(edges.len() - 1);
                    }
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.right.is_some() {
                            return Err(invalid(format!("edge ({a},{b}) is shared by more than two cells")));
                        }
                        if edge.v[0] == a {
                            return Err(invalid(format!(
                                "inconsistent orientation: edge ({a},{b}) traversed in the same direction by cells {} and {c}",
                                edge.left
                            )));
                        }
                        if edge.left == c {
                            return Err(invalid(format!("cell {c} uses edge ({a},{b}) twice")));
                        }
                        edge.right = Some(c);
                        edge.tag = BoundaryTag::Interior;
                        ce.push(e);
                    }
                }
            }
            cell_edges.push(ce);
        }

        let (lo, hi) = bounding_box(&vertices);
        let scale = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
        let tol = 1e-10 * scale;
        check_boundary_loops(&vertices, &edges, tol)?;
        for e in edges.iter_mut().filter(|e| e.right.is_none()) {
            let p = vertices[e.v[0]];
            let q = vertices[e.v[1]];
            let top = (p.y - hi.y).abs() < tol && (q.y - hi.y).abs() < tol;
            e.tag = if top { BoundaryTag::Neumann } else { BoundaryTag::Dirichlet };
        }
        for &(a, b, tag) in tags {
            let key = (a.min(b), a.max(b));
            let e = *lookup
                .get(&key)
                .ok_or_else(|| invalid(format!("tagged edge ({a},{b}) is not a mesh edge")))?;
            if edges[e].right.is_some() {
                return Err(invalid(format!("tagged edge ({a},{b}) is interior")));
            }
            if tag == BoundaryTag::Interior {
                return Err(invalid(format!("boundary edge ({a},{b}) cannot be tagged interior")));
            }
            edges[e].tag = tag;
        }

        Ok(Self { vertices, cells, edges, cell_edges })
    }

    /// Re-runs all structural checks.
    pub fn validate(&self) -> Result<()> {
        let tags: Vec<_> = self
            .edges
            .iter()
            .filter(|e| e.is_boundary())
            .map(|e| (e.v[0], e.v[1], e.tag))
            .collect();
        let rebuilt = Self::from_cells_with_tags(self.vertices.clone(), self.cells.clone(), &tags)?;
        if rebuilt.edges.len() != self.edges.len() {
            return Err(invalid("edge list is inconsistent with the cells"));
        }
        Ok(())
    }

    /// Boundary edges with their tags, in edge order.
    pub fn boundary_tags(&self) -> Vec<(usize, usize, BoundaryTag)> {
        self.edges
            .iter()
            .filter(|e| e.is_boundary())
            .map(|e| (e.v[0], e.v[1], e.tag))
            .collect()
    }

    /// Returns a copy with every boundary edge retagged by `f(midpoint)`.
    pub fn retag_boundary(&self, f: impl Fn(Point2) -> BoundaryTag) -> Self {
        let mut m = self.clone();
        for e in m.edges.iter_mut().filter(|e| e.right.is_none()) {
            let mid = (self.vertices[e.v[0]] + self.vertices[e.v[1]]) * 0.5;
            e.tag = f(mid);
        }
        m
    }
}

fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = (p2 - p1).cross(q1 - p1);
    let d2 = (p2 - p1).cross(q2 - p1);
    let d3 = (q2 - q1).cross(p1 - q1);
    let d4 = (q2 - q1).cross(p2 - q1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Point2, b: Point2, p: Point2, d: f64| {
        d == 0.0 && p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
    };
    on(p1, p2, q1, d1) || on(p1, p2, q2, d2) || on(q1, q2, p1, d3) || on(q1, q2, p2, d4)
}

/// Boundary edges must form closed loops with no vertex lying inside another boundary edge.
fn check_boundary_loops(vertices: &[Point2], edges: &[Edge], tol: f64) -> Result<()> {
    let mut balance: HashMap<usize, i64> = HashMap::new();
    let bnd: Vec<&Edge> = edges.iter().filter(|e| e.right.is_none()).collect();
    for e in &bnd {
        *balance.entry(e.v[0]).or_default() += 1;
        *balance.entry(e.v[1]).or_default() -= 1;
    }
    if let Some((v, _)) = balance.iter().filter(|(_, &b)| b != 0).min_by_key(|(v, _)| **v) {
        return Err(invalid(format!("dangling edge at vertex {v}: boundary is not a closed loop")));
    }
    let mut bverts: Vec<usize> = balance.keys().copied().collect();
    bverts.sort_unstable();
    for e in &bnd {
        let a = vertices[e.v[0]];
        let d = vertices[e.v[1]] - a;
        let l2 = d.dot(d);
        for &v in &bverts {
            check_on_edge(vertices, e, v, a, d, l2, tol)?;
        }
    }
    Ok(())
}

fn check_on_edge(vertices: &[Point2], e: &Edge, v: usize, a: Point2, d: Point2, l2: f64, tol: f64) -> Result<()> {
    if v == e.v[0] || v == e.v[1] {
        return Ok(());
    }
    let w = vertices[v] - a;
    let t = w.dot(d) / l2;
    if t > 0.0 && t < 1.0 && d.cross(w).abs() / l2.sqrt() < tol {
        return Err(invalid(format!(
            "dangling edge ({},{}): vertex {v} lies on it (hanging node)",
            e.v[0], e.v[1]
        )));
    }
    Ok(())
}

fn check_cell(vertices: &[Point2], c: usize, cell: &[usize]) -> Result<()> {
    let n = cell.len();
    if n < 3 {
        return Err(invalid(format!("cell {c} has fewer than 3 vertices")));
    }
    if n > MAX_CELL_EDGES {
        return Err(invalid(format!("cell {c} has {n} edges (limit {MAX_CELL_EDGES})")));
    }
    if let Some(&v) = cell.iter().find(|&&v| v >= vertices.len()) {
        return Err(invalid(format!("cell {c} references missing vertex {v}")));
    }
    for i in 0..n {
        for j in i + 1..n {
            if cell[i] == cell[j] {
                return Err(invalid(format!("cell {c} is not simple: vertex {} repeats", cell[i])));
            }
        }
    }
    let p: Vec<Point2> = cell.iter().map(|&v| vertices[v]).collect();
    let area = signed_area(&p);
    if area <= 0.0 {
        return Err(invalid(format!("inconsistent orientation: cell {c} is not counterclockwise (area {area:e})")));
    }
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]) {
                return Err(invalid(format!("cell {c} is not simple: edges {i} and {j} intersect")));
            }
        }
    }
    Ok(())
}
