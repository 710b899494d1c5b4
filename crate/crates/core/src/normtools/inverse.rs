use nalgebra::DMatrix;

use crate::linalg::CscMatrix;
use crate::polybasis::{gauss_unit_rule, unit_legendre};

/// Number of P1 intervals used to discretize the (H¹₀(0,1))′ norm.
pub const INVERSE_PROBE_INTERVALS: usize = 4096;

/// max over p ∈ P_k of ‖p‖₀,I / ‖p‖_(H¹₀(I))′ on I = (0, 1).
///
/// With the orthonormal Legendre basis the mass matrix is the identity and the
/// dual Gram matrix is D = Bᵀ K⁻¹ B, with K the P1 stiffness and B the hat
/// moments of the basis, so the ratio is λ_min(D)^(-1/2).
pub fn negative_inverse_ratio(k: usize, intervals: usize) -> f64 {
    let n = intervals;
    let hh = 1.0 / n as f64;
    let interior = n - 1;
    let mut trip = Vec::with_capacity(3 * interior);
    for i in 0..interior {
        trip.push((i, i, 2.0 / hh));
        if i + 1 < interior {
            trip.push((i, i + 1, -1.0 / hh));
            trip.push((i + 1, i, -1.0 / hh));
        }
    }
    let stiff = CscMatrix::from_triplets(interior, interior, &trip).expect("valid tridiagonal pattern");
    let chol = stiff.cholesky().expect("P1 stiffness is positive definite");
    let rule = gauss_unit_rule(k / 2 + 2);
    let mut b = vec![vec![0.0; interior]; k + 1];
    for cell in 0..n {
        for (s, w) in rule.points.iter().zip(&rule.weights) {
            let x = (cell as f64 + s) * hh;
            let p = unit_legendre(k, x);
            for (j, pj) in p.iter().enumerate() {
                let v = pj * w * hh;
                // hats of the nodes cell and cell+1, shifted to interior numbering
                if cell >= 1 {
                    b[j][cell - 1] += v * (1.0 - s);
                }
                if cell + 1 <= interior {
                    b[j][cell] += v * s;
                }
            }
        }
    }
    let z = chol.solve_columns(&b);
    let d = DMatrix::from_fn(k + 1, k + 1, |i, j| b[i].iter().zip(&z[j]).map(|(a, c)| a * c).sum());
    let d = (&d + d.transpose()) * 0.5;
    1.0 / d.symmetric_eigen().eigenvalues.min().sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct InverseInequalityScan {
    /// (k, ratio) for k = 0..=kmax.
    pub ratios: Vec<(usize, f64)>,
    /// Least-squares slope of log ratio against log k over k = 2..=kmax.
    pub exponent: f64,
}

pub fn verify_negative_inverse(kmax: usize) -> InverseInequalityScan {
    let ratios: Vec<(usize, f64)> = (0..=kmax).map(|k| (k, negative_inverse_ratio(k, INVERSE_PROBE_INTERVALS))).collect();
    let pts: Vec<(f64, f64)> = ratios.iter().filter(|(k, _)| *k >= 2).map(|&(k, r)| ((k as f64).ln(), r.ln())).collect();
    let exponent = if pts.len() < 2 {
        f64::NAN
    } else {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    InverseInequalityScan { ratios, exponent }
}
