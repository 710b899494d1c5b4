use rayon::prelude::*;

use super::exact::ExactSolution;
use crate::assembler::cell_basis;
use crate::error::{Error, Result};
use crate::mesh::{Point2, PolygonalMesh, SubTriangulation};
use crate::polybasis::triangle_rule;
use crate::solver::DGSolution;

/// Relative errors of a discrete solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    /// Relative broken H¹ error, L² part included.
    pub e_u_1: f64,
    /// Relative L² error.
    pub e_u_0: f64,
    /// Absolute ‖u − u_h‖₀ and broken |u − u_h|₁.
    pub abs_l2: f64,
    pub abs_h1_semi: f64,
    pub dofs: usize,
    pub h: f64,
    pub k: usize,
    pub kprime: usize,
}

/// Per-cell squared norms: (‖e‖₀², |e|₁², ‖u‖₀², |u|₁²).
type CellNorms = [f64; 4];

fn refine(tri: [Point2; 3]) -> [[Point2; 3]; 4] {
    let [a, b, c] = tri;
    let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
    [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
}

fn tri_diameter(t: &[Point2; 3]) -> f64 {
    t[0].dist(t[1]).max(t[1].dist(t[2])).max(t[2].dist(t[0]))
}

/// Integrates errors with a rule of degree 2k+6 on each sub-triangle, halving the
/// sub-triangles while their diameter times the wavenumber exceeds 2.
pub fn compute_errors(
    mesh: &PolygonalMesh,
    split: &SubTriangulation,
    sol: &DGSolution,
    exact: &dyn ExactSolution,
) -> ErrorReport {
    let k = sol.params.k;
    let rule = triangle_rule(2 * k + 6);
    let w = exact.wavenumber();
    let per_cell: Vec<CellNorms> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let basis = cell_basis(mesh, c, k);
            let coef = sol.u[c].as_slice();
            let mut acc = [0.0; 4];
            let mut stack: Vec<[Point2; 3]> = split.cells[c]
                .maps
                .iter()
                .map(|m| [m.apply([0.0, 0.0]), m.apply([1.0, 0.0]), m.apply([0.0, 1.0])])
                .collect();
            while let Some(t) = stack.pop() {
                if w > 0.0 && tri_diameter(&t) * w > 2.0 {
                    stack.extend(refine(t));
                    continue;
                }
                let (pts, wts) = rule.mapped([t[0].x, t[0].y], [t[1].x, t[1].y], [t[2].x, t[2].y]);
                for (p, wt) in pts.iter().zip(&wts) {
                    let p = Point2::new(p[0], p[1]);
                    let v = basis.eval(p);
                    let g = basis.eval_grad(p);
                    let uh: f64 = v.iter().zip(coef).map(|(a, b)| a * b).sum();
                    let gx: f64 = g.iter().zip(coef).map(|(a, b)| a[0] * b).sum();
                    let gy: f64 = g.iter().zip(coef).map(|(a, b)| a[1] * b).sum();
                    let u = exact.value(p);
                    let gu = exact.gradient(p);
                    acc[0] += wt * (u - uh).powi(2);
                    acc[1] += wt * ((gu.x - gx).powi(2) + (gu.y - gy).powi(2));
                    acc[2] += wt * u * u;
                    acc[3] += wt * gu.dot(gu);
                }
            }
            acc
        })
        .collect();
    let mut t = [0.0; 4];
    for a in &per_cell {
        for i in 0..4 {
            t[i] += a[i];
        }
    }
    let h = (0..mesh.num_cells()).map(|c| mesh.diameter(c)).fold(0.0, f64::max);
    ErrorReport {
        e_u_1: ((t[0] + t[1]) / (t[2] + t[3])).sqrt(),
        e_u_0: (t[0] / t[2]).sqrt(),
        abs_l2: t[0].sqrt(),
        abs_h1_semi: t[1].sqrt(),
        dofs: sol.dofs(),
        h,
        k,
        kprime: sol.params.kprime,
    }
}

/// Rates log(e_i/e_{i+1}) / log(h_i/h_{i+1}) for a sequence of (h, error).
pub fn estimated_convergence_rate(seq: &[(f64, f64)]) -> Result<Vec<f64>> {
    if seq.len() < 2 {
        return Err(Error::InvalidArgument("at least two points are needed for a rate".into()));
    }
    if let Some(&(h, e)) = seq.iter().find(|(h, e)| !(*e > 0.0 && *h > 0.0 && e.is_finite() && h.is_finite())) {
        return Err(Error::InvalidArgument(format!("rates need positive finite data, got h={h}, e={e}")));
    }
    Ok(seq.windows(2).map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln()).collect())
}

/// Rates against the number of unknowns, with h ∝ dofs^(-1/2).
pub fn ecr_from_dofs(seq: &[(usize, f64)]) -> Result<Vec<f64>> {
    let hs: Vec<(f64, f64)> = seq.iter().map(|&(n, e)| ((n as f64).powf(-0.5), e)).collect();
    estimated_convergence_rate(&hs)
}
