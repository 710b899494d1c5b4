use nalgebra::DMatrix;

use super::stabilizer::ReferenceStabilizer;
use crate::error::{Error, Result};
use crate::mesh::{AffineMap, Point2};

/// Reference data mapped onto a physical triangle T = F(T̂).
#[derive(Clone, Debug)]
pub struct PhysicalStabilizer {
    /// Stiffness matrix of the mapped liftings.
    pub s: DMatrix<f64>,
    /// Mapped quadrature points.
    pub points: Vec<Point2>,
    /// `val_weights[p][q]`: sum_q w g(x_q) integrates g phi_p over T.
    pub val_weights: Vec<Vec<f64>>,
    /// `grad_weights[p][q]`: sum_q w . G(x_q) integrates G . grad(phi_p) over T.
    pub grad_weights: Vec<Vec<Point2>>,
}

pub fn push_forward(stab: &ReferenceStabilizer, map: &AffineMap) -> Result<PhysicalStabilizer> {
    let det = map.det();
    if !(det.abs() > 0.0) || !det.is_finite() {
        return Err(Error::InvalidArgument("singular affine map".into()));
    }
    let jd = det.abs();
    let ji = map.inverse_jacobian();
    // M = J^{-1} J^{-T}
    let mxx = ji[0][0] * ji[0][0] + ji[0][1] * ji[0][1];
    let mxy = ji[0][0] * ji[1][0] + ji[0][1] * ji[1][1];
    let myy = ji[1][0] * ji[1][0] + ji[1][1] * ji[1][1];
    let n = stab.dim();
    let s = DMatrix::from_fn(n, n, |p, q| {
        let i = p * n + q;
        let t = q * n + p;
        jd * (mxx * stab.kxx[i] + mxy * (stab.kxy[i] + stab.kxy[t]) + myy * stab.kyy[i])
    });
    let points = stab.points.iter().map(|&x| map.apply(x)).collect();
    let val_weights = stab.w_val.iter().map(|w| w.iter().map(|v| jd * v).collect()).collect();
    // physical gradient = J^{-T} reference gradient
    let grad_weights = (0..n)
        .map(|p| {
            stab.w_dx[p]
                .iter()
                .zip(&stab.w_dy[p])
                .map(|(&wx, &wy)| Point2::new(jd * (ji[0][0] * wx + ji[1][0] * wy), jd * (ji[0][1] * wx + ji[1][1] * wy)))
                .collect()
        })
        .collect();
    Ok(PhysicalStabilizer { s, points, val_weights, grad_weights })
}

/// Trace coupling on the mapped edge of length `length`: entry (p, q) is the integral of
/// the q-th orthonormal Legendre function of the edge against lifting p. `reversed` is set
/// when the edge's global parametrization runs opposite to the local one.
pub fn trace_matrix(stab: &ReferenceStabilizer, length: f64, reversed: bool) -> DMatrix<f64> {
    let n = stab.dim();
    let sl = length.sqrt();
    DMatrix::from_fn(n, n, |p, q| {
        let sign = if reversed && q % 2 == 1 { -1.0 } else { 1.0 };
        sl * sign * stab.g_hat[p * n + q]
    })
}
