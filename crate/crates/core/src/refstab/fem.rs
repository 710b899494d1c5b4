use crate::error::{Error, Result};
use crate::linalg::{CscMatrix, SparseCholesky};
use crate::polybasis::{gauss_unit_rule, unit_legendre};

/// Upper bound on the number of nodes of the reference mesh.
pub const MAX_REFERENCE_NODES: usize = 4_000_000;

/// Local P1 stiffness of the triangle (a, b, c).
pub fn p1_stiffness(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [[f64; 3]; 3] {
    let p = [a, b, c];
    let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let q = p[(i + 1) % 3];
        let r = p[(i + 2) % 3];
        g[i] = [(q[1] - r[1]) / area2, (r[0] - q[0]) / area2];
    }
    let area = 0.5 * area2.abs();
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    k
}

/// Gradients of the three P1 hat functions of the triangle (a, b, c).
pub fn p1_gradients(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [[f64; 2]; 3] {
    let p = [a, b, c];
    let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let q = p[(i + 1) % 3];
        let r = p[(i + 2) % 3];
        g[i] = [(q[1] - r[1]) / area2, (r[0] - q[0]) / area2];
    }
    g
}

/// Continuous P1 space on a structured mesh of the reference triangle with `m`
/// subdivisions per side, vanishing on the sides x = 0 and x + y = 1.
pub struct ReferenceTriangleFEM {
    pub delta: f64,
    pub m: usize,
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Free-unknown index of each node, `None` on constrained nodes.
    pub free: Vec<Option<usize>>,
    pub n_free: usize,
    pub stiffness_free: CscMatrix,
    chol: SparseCholesky,
}

/// Number of subdivisions per side used for target mesh size `delta`.
pub fn subdivisions(delta: f64) -> usize {
    ((1.0 / delta) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

pub fn node_index(m: usize, i: usize, j: usize) -> usize {
    j * (m + 1) - j * (j.saturating_sub(1)) / 2 + i
}

impl ReferenceTriangleFEM {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Solves the discrete Neumann lifting: grad(phi).grad(v) = int_e lambda v for all
    /// discrete v vanishing on the constrained sides. `lambda` holds coefficients in the
    /// orthonormal Legendre basis of [0, 1].
    pub fn lift_neumann(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        if lambda.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite lifting data".into()));
        }
        let loads = self.edge_loads(lambda.len().saturating_sub(1));
        let mut b = vec![0.0; self.n_free];
        for (i, row) in loads.iter().enumerate() {
            if let Some(f) = self.free[node_index(self.m, i, 0)] {
                b[f] = row.iter().zip(lambda).map(|(a, l)| a * l).sum();
            }
        }
        Ok(self.expand(&self.chol.solve(&b)))
    }

    /// Lifts every Legendre mode 0..=degree at once.
    pub fn lift_modes(&self, degree: usize) -> Vec<Vec<f64>> {
        let loads = self.edge_loads(degree);
        let cols: Vec<Vec<f64>> = (0..=degree)
            .map(|q| {
                let mut b = vec![0.0; self.n_free];
                for (i, row) in loads.iter().enumerate() {
                    if let Some(f) = self.free[node_index(self.m, i, 0)] {
                        b[f] = row[q];
                    }
                }
                b
            })
            .collect();
        self.chol.solve_columns(&cols).iter().map(|x| self.expand(x)).collect()
    }

    fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.free.iter().map(|f| f.map_or(0.0, |i| x[i])).collect()
    }

    /// `loads[i][q]` = integral over the bottom side of Legendre mode q times the hat of node (i, 0).
    pub fn edge_loads(&self, degree: usize) -> Vec<Vec<f64>> {
        let m = self.m;
        let h = 1.0 / m as f64;
        let g = gauss_unit_rule(degree / 2 + 2);
        let mut loads = vec![vec![0.0; degree + 1]; m + 1];
        for s in 0..m {
            let x0 = s as f64 * h;
            for (t, w) in g.points.iter().zip(&g.weights) {
                let x = x0 + t * h;
                let l = unit_legendre(degree, x);
                for q in 0..=degree {
                    loads[s][q] += w * h * (1.0 - t) * l[q];
                    loads[s + 1][q] += w * h * t * l[q];
                }
            }
        }
        loads
    }

    /// Energy a(u, v) on the full node set.
    pub fn energy(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut e = 0.0;
        for t in &self.triangles {
            let k = p1_stiffness(self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]);
            for a in 0..3 {
                for b in 0..3 {
                    e += u[t[a]] * k[a][b] * v[t[b]];
                }
            }
        }
        e
    }
}

pub fn build_reference_fem(delta: f64) -> Result<ReferenceTriangleFEM> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("reference mesh size must lie in (0, 1], got {delta}")));
    }
    let m = subdivisions(delta);
    let n_nodes = (m + 1) * (m + 2) / 2;
    if n_nodes > MAX_REFERENCE_NODES {
        return Err(Error::InvalidArgument(format!(
            "reference mesh for delta = {delta} needs {n_nodes} nodes (limit {MAX_REFERENCE_NODES})"
        )));
    }
    let mf = m as f64;
    let mut nodes = Vec::with_capacity(n_nodes);
    let mut free = Vec::with_capacity(n_nodes);
    let mut n_free = 0;
    for j in 0..=m {
        for i in 0..=(m - j) {
            nodes.push([i as f64 / mf, j as f64 / mf]);
            if i >= 1 && i + j < m {
                free.push(Some(n_free));
                n_free += 1;
            } else {
                free.push(None);
            }
        }
    }
    let mut triangles = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..(m - j) {
            triangles.push([node_index(m, i, j), node_index(m, i + 1, j), node_index(m, i, j + 1)]);
            if i + j + 1 < m {
                triangles.push([node_index(m, i + 1, j), node_index(m, i + 1, j + 1), node_index(m, i, j + 1)]);
            }
        }
    }
    if n_free == 0 {
        return Err(Error::InvalidArgument(format!("reference mesh for delta = {delta} has no free nodes")));
    }
    let mut trip = Vec::with_capacity(9 * triangles.len());
    for t in &triangles {
        let k = p1_stiffness(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
        for a in 0..3 {
            for b in 0..3 {
                if let (Some(fa), Some(fb)) = (free[t[a]], free[t[b]]) {
                    trip.push((fa, fb, k[a][b]));
                }
            }
        }
    }
    let stiffness_free = CscMatrix::from_triplets(n_free, n_free, &trip)?;
    let chol = stiffness_free.cholesky()?;
    Ok(ReferenceTriangleFEM { delta, m, nodes, triangles, free, n_free, stiffness_free, chol })
}
