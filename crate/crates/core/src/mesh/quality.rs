use super::types::{Point2, PolygonalMesh};

/// Shape-regularity diagnostics of a mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshQualityReport {
    pub n_p: usize,
    pub n_e: usize,
    pub h: f64,
    pub h_min: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    /// Largest h_K / rho_K over cells without boundary edges (equals `gamma0` if every cell touches the boundary).
    pub gamma0_interior: f64,
    /// Set when some cell is nonconvex and its inscribed radius is a lower bound.
    pub approximate: bool,
}

impl MeshQualityReport {
    pub fn to_key_values(&self) -> String {
        format!(
            "N_p={}\nN_e={}\nh={:e}\nh_min={:e}\ngamma0={:e}\ngamma1={:e}\ngamma0_interior={:e}\napproximate={}\n",
            self.n_p, self.n_e, self.h, self.h_min, self.gamma0, self.gamma1, self.gamma0_interior, self.approximate
        )
    }
}

/// Largest ball inside the intersection of the inner half-planes of the polygon's
/// edges. For convex polygons this is the Chebyshev center of the polygon; for
/// star-shaped ones it is a ball inside the kernel. Returns (center, radius, convex).
pub fn chebyshev_center(p: &[Point2]) -> (Point2, f64, bool) {
    let n = p.len();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let a = p[i];
        let b = p[(i + 1) % n];
        let d = b - a;
        let l = d.norm();
        let nrm = Point2::new(d.y / l, -d.x / l);
        rows.push((nrm, nrm.dot(a)));
    }
    let convex = (0..n).all(|i| {
        let a = p[i];
        let b = p[(i + 1) % n];
        let c = p[(i + 2) % n];
        (b - a).cross(c - b) >= 0.0
    });
    let diam = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| p[i].dist(p[j])).fold(0.0, f64::max);
    let feas_tol = 1e-12 * diam;
    let mut best_r = f64::NEG_INFINITY;
    let mut cands: Vec<(Point2, f64)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let m = [rows[i], rows[j], rows[k]];
                let det3 = |c: [[f64; 3]; 3]| {
                    c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1]) - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
                        + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0])
                };
                let a = [
                    [m[0].0.x, m[0].0.y, 1.0],
                    [m[1].0.x, m[1].0.y, 1.0],
                    [m[2].0.x, m[2].0.y, 1.0],
                ];
                let d = det3(a);
                if d.abs() < 1e-12 {
                    continue;
                }
                let rhs = [m[0].1, m[1].1, m[2].1];
                let mut sol = [0.0; 3];
                for (col, s) in sol.iter_mut().enumerate() {
                    let mut b = a;
                    for r in 0..3 {
                        b[r][col] = rhs[r];
                    }
                    *s = det3(b) / d;
                }
                let c = Point2::new(sol[0], sol[1]);
                let r = sol[2];
                if rows.iter().all(|(nr, off)| nr.dot(c) + r <= off + feas_tol) {
                    if r > best_r + feas_tol {
                        best_r = r;
                        cands.clear();
                        cands.push((c, r));
                    } else if r > best_r - feas_tol {
                        best_r = best_r.max(r);
                        cands.push((c, r));
                    }
                }
            }
        }
    }
    if cands.is_empty() {
        return (super::types::polygon_centroid(p), f64::NEG_INFINITY, convex);
    }
    let k = cands.len() as f64;
    let c = cands.iter().fold(Point2::default(), |acc, (c, _)| acc + *c) * (1.0 / k);
    let r = rows.iter().map(|(nr, off)| off - nr.dot(c)).fold(f64::INFINITY, f64::min);
    (c, r, convex)
}

fn min_pair_distance(p: &[Point2]) -> f64 {
    let mut d = f64::INFINITY;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            d = d.min(p[i].dist(p[j]));
        }
    }
    d
}

pub fn quality_report(mesh: &PolygonalMesh) -> MeshQualityReport {
    let mut h = 0.0f64;
    let mut h_min = f64::INFINITY;
    let mut gamma0 = 0.0f64;
    let mut gamma1 = 0.0f64;
    let mut gamma0_interior = 0.0f64;
    let mut approximate = false;
    let mut any_interior = false;
    for c in 0..mesh.num_cells() {
        let p = mesh.cell_points(c);
        let hk = mesh.diameter(c);
        let hmin = min_pair_distance(&p);
        let (_, rho, convex) = chebyshev_center(&p);
        approximate |= !convex;
        h = h.max(hk);
        h_min = h_min.min(hmin);
        gamma0 = gamma0.max(hk / rho);
        gamma1 = gamma1.max(hk / hmin);
        if mesh.cell_edges[c].iter().all(|&e| !mesh.edges[e].is_boundary()) {
            any_interior = true;
            gamma0_interior = gamma0_interior.max(hk / rho);
        }
    }
    if !any_interior {
        gamma0_interior = gamma0;
    }
    MeshQualityReport {
        n_p: mesh.num_cells(),
        n_e: mesh.num_edges(),
        h,
        h_min,
        gamma0,
        gamma1,
        gamma0_interior,
        approximate,
    }
}
