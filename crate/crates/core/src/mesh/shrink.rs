use super::types::{PolygonalMesh, Point2};
use crate::error::{Error, Result};

/// Shrinks every interior vertical edge to `s` times its length. Edges with an endpoint
/// on the bottom or top side of the domain keep that endpoint fixed; other edges shrink
/// symmetrically about their midpoint.
pub fn shrink_vertical_edges(mesh: &PolygonalMesh, s: f64) -> Result<PolygonalMesh> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidArgument(format!("shrink factor must lie in (0, 1], got {s}")));
    }
    if s == 1.0 {
        return Ok(mesh.clone());
    }
    let (lo, hi) = mesh.bounding_box();
    let scale = (hi.x - lo.x).max(hi.y - lo.y);
    let tol = 1e-12 * scale;
    let on_horizontal = |p: Point2| (p.y - lo.y).abs() < tol || (p.y - hi.y).abs() < tol;
    let mut verts = mesh.vertices.clone();
    let mut moved = vec![false; verts.len()];
    let mut count = 0;
    for e in mesh.edges.iter().filter(|e| !e.is_boundary()) {
        let a = mesh.vertices[e.v[0]];
        let b = mesh.vertices[e.v[1]];
        if (a.x - b.x).abs() > tol * 1e-3 || e.length <= tol {
            continue;
        }
        let (lo_v, hi_v) = if a.y < b.y { (e.v[0], e.v[1]) } else { (e.v[1], e.v[0]) };
        let pl = mesh.vertices[lo_v];
        let ph = mesh.vertices[hi_v];
        let len = ph.y - pl.y;
        let (new_lo, new_hi) = match (on_horizontal(pl), on_horizontal(ph)) {
            (true, true) => continue,
            (true, false) => (pl.y, pl.y + s * len),
            (false, true) => (ph.y - s * len, ph.y),
            (false, false) => {
                let mid = 0.5 * (pl.y + ph.y);
                (mid - 0.5 * s * len, mid + 0.5 * s * len)
            }
        };
        for (v, y) in [(lo_v, new_lo), (hi_v, new_hi)] {
            if moved[v] && verts[v].y != y {
                return Err(Error::InvalidMesh(format!("vertex {v} belongs to two vertical edges")));
            }
            moved[v] = true;
            verts[v].y = y;
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidArgument("mesh has no interior vertical edges".into()));
    }
    PolygonalMesh::from_cells_with_tags(verts, mesh.cells.clone(), &mesh.boundary_tags())
}
