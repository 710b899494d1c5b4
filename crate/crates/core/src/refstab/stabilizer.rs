use nalgebra::DMatrix;

use super::fem::{build_reference_fem, node_index, p1_gradients, ReferenceTriangleFEM};
use crate::error::Result;
use crate::polybasis::{triangle_rule, OrthonormalTriangleBasis};

/// Default reference mesh size for edge degree `kprime`: (k')^-2, coarsened only where
/// it would leave fewer free trace nodes than Legendre modes.
pub fn default_delta(kprime: usize) -> f64 {
    match kprime {
        0 => 0.5,
        1 => 1.0 / 3.0,
        k => 1.0 / (k * k) as f64,
    }
}

/// Reference data for the auxiliary space spanned by the discrete Neumann liftings of
/// the Legendre modes 0..=k' on the bottom side of the reference triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceStabilizer {
    pub kprime: usize,
    pub delta: f64,
    pub m: usize,
    /// Polynomial degree up to which the quadrature weights below are exact.
    pub moment_degree: usize,
    /// Nodal values of each lifting on the reference mesh.
    pub lifts: Vec<Vec<f64>>,
    /// Stiffness matrix of the liftings, row-major (k'+1)^2.
    pub s_hat: Vec<f64>,
    /// `g_hat[p*(k'+1)+q]` = integral over the bottom side of mode q times lifting p.
    pub g_hat: Vec<f64>,
    /// Gradient tensors: sum over fine triangles of |t| d_a phi_p d_b phi_q, for (a,b) = xx, xy, yy.
    pub kxx: Vec<f64>,
    pub kxy: Vec<f64>,
    pub kyy: Vec<f64>,
    /// Reference quadrature points of degree 2 * moment_degree.
    pub points: Vec<[f64; 2]>,
    /// Effective weights: sum_q w[p][q] g(x_q) equals the integral of g phi_p (value) or
    /// g d_x phi_p, g d_y phi_p (gradients) for every g of degree <= moment_degree.
    pub w_val: Vec<Vec<f64>>,
    pub w_dx: Vec<Vec<f64>>,
    pub w_dy: Vec<Vec<f64>>,
    /// Smallest and largest eigenvalues of `s_hat`.
    pub s_eig: (f64, f64),
}

impl ReferenceStabilizer {
    pub fn dim(&self) -> usize {
        self.kprime + 1
    }

    /// True when the liftings are (numerically) linearly dependent.
    pub fn is_rank_deficient(&self) -> bool {
        self.s_eig.0 <= 1e-12 * self.s_eig.1
    }

    pub fn s_hat_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_row_slice(n, n, &self.s_hat)
    }
}

pub fn build_reference_stabilizer(kprime: usize, delta: f64) -> Result<ReferenceStabilizer> {
    build_reference_stabilizer_with_degree(kprime, delta, kprime + 1)
}

pub fn build_reference_stabilizer_with_degree(
    kprime: usize,
    delta: f64,
    moment_degree: usize,
) -> Result<ReferenceStabilizer> {
    let fem = build_reference_fem(delta)?;
    Ok(stabilizer_from_fem(&fem, kprime, moment_degree))
}

pub fn stabilizer_from_fem(fem: &ReferenceTriangleFEM, kprime: usize, moment_degree: usize) -> ReferenceStabilizer {
    let n = kprime + 1;
    let lifts = fem.lift_modes(kprime);
    let loads = fem.edge_loads(kprime);

    let mut s_hat = vec![0.0; n * n];
    let mut g_hat = vec![0.0; n * n];
    let mut kxx = vec![0.0; n * n];
    let mut kxy = vec![0.0; n * n];
    let mut kyy = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..n {
            g_hat[p * n + q] = (0..=fem.m).map(|i| lifts[p][node_index(fem.m, i, 0)] * loads[i][q]).sum();
        }
    }

    let basis = OrthonormalTriangleBasis::new(moment_degree);
    let nb = basis.dim();
    let sub_rule = triangle_rule(moment_degree + 1);
    // integrals of hat_node * psi_beta, and per-triangle gradients of each lifting
    let mut node_mom = vec![0.0; fem.num_nodes() * nb];
    let mut gm_x = vec![vec![0.0; nb]; n];
    let mut gm_y = vec![vec![0.0; nb]; n];
    for t in &fem.triangles {
        let (a, b, c) = (fem.nodes[t[0]], fem.nodes[t[1]], fem.nodes[t[2]]);
        let grads = p1_gradients(a, b, c);
        let (pts, wts) = sub_rule.mapped(a, b, c);
        let mut local = vec![[0.0; 3]; nb];
        for (x, w) in pts.iter().zip(&wts) {
            let psi = basis.eval(x[0], x[1]);
            let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            let l1 = ((x[0] - a[0]) * (c[1] - a[1]) - (x[1] - a[1]) * (c[0] - a[0])) / area2;
            let l2 = ((b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0])) / area2;
            let lam = [1.0 - l1 - l2, l1, l2];
            for (bi, pv) in psi.iter().enumerate() {
                for v in 0..3 {
                    local[bi][v] += w * lam[v] * pv;
                }
            }
        }
        for bi in 0..nb {
            for v in 0..3 {
                node_mom[t[v] * nb + bi] += local[bi][v];
            }
        }
        let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
        let mut dphi = vec![[0.0; 2]; n];
        for p in 0..n {
            for v in 0..3 {
                dphi[p][0] += lifts[p][t[v]] * grads[v][0];
                dphi[p][1] += lifts[p][t[v]] * grads[v][1];
            }
        }
        for p in 0..n {
            for q in 0..n {
                kxx[p * n + q] += area * dphi[p][0] * dphi[q][0];
                kxy[p * n + q] += area * dphi[p][0] * dphi[q][1];
                kyy[p * n + q] += area * dphi[p][1] * dphi[q][1];
            }
            for bi in 0..nb {
                let tri_int = local[bi][0] + local[bi][1] + local[bi][2];
                gm_x[p][bi] += dphi[p][0] * tri_int;
                gm_y[p][bi] += dphi[p][1] * tri_int;
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            s_hat[p * n + q] = kxx[p * n + q] + kyy[p * n + q];
        }
    }
    let mut vm = vec![vec![0.0; nb]; n];
    for p in 0..n {
        for (node, val) in lifts[p].iter().enumerate() {
            if *val != 0.0 {
                for bi in 0..nb {
                    vm[p][bi] += val * node_mom[node * nb + bi];
                }
            }
        }
    }

    let rule = triangle_rule(2 * moment_degree);
    let nq = rule.points.len();
    let psi_q: Vec<Vec<f64>> = rule.points.iter().map(|x| basis.eval(x[0], x[1])).collect();
    let weights_from = |mom: &Vec<f64>| -> Vec<f64> {
        (0..nq)
            .map(|q| rule.weights[q] * mom.iter().zip(&psi_q[q]).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    };
    let w_val = vm.iter().map(weights_from).collect();
    let w_dx = gm_x.iter().map(weights_from).collect();
    let w_dy = gm_y.iter().map(weights_from).collect();

    let ev = DMatrix::from_row_slice(n, n, &s_hat).symmetric_eigen().eigenvalues;
    let s_eig = (ev.min(), ev.max());

    ReferenceStabilizer {
        kprime,
        delta: fem.delta,
        m: fem.m,
        moment_degree,
        lifts,
        s_hat,
        g_hat,
        kxx,
        kxy,
        kyy,
        points: rule.points.clone(),
        w_val,
        w_dx,
        w_dy,
        s_eig,
    }
}
