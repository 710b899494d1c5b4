use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::{CellSplit, Point2, PolygonalMesh};
use crate::polybasis::ScaledMonomialBasis;
use crate::refstab::{push_forward, trace_matrix, ReferenceStabilizer};

/// Factorized SPD block, with an LU fallback for numerically singular blocks.
#[derive(Clone, Debug)]
enum BlockSolver {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::FullPivLU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

/// Data of one sub-triangle T_i of the cell.
#[derive(Clone, Debug)]
pub struct TriangleBlock {
    /// Stiffness of the mapped liftings.
    pub s: DMatrix<f64>,
    /// `e[(p, j)]` = integral over T_i of grad m_j . grad phi_p.
    pub e: DMatrix<f64>,
    /// `g[(p, q)]` = integral over e_i of mu_q phi_p.
    pub g: DMatrix<f64>,
    /// Load moments: integral over T_i of f phi_p.
    pub f: DVector<f64>,
    solver: BlockSolver,
}

impl TriangleBlock {
    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.solver {
            BlockSolver::Cholesky(c) => c.solve(b),
            BlockSolver::Lu(l) => l.solve(b).expect("factorization checked at construction"),
        }
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        match &self.solver {
            BlockSolver::Cholesky(c) => c.solve(b),
            BlockSolver::Lu(l) => l.solve(b).expect("factorization checked at construction"),
        }
    }

    pub fn used_cholesky(&self) -> bool {
        matches!(self.solver, BlockSolver::Cholesky(_))
    }
}

/// Block-diagonal stabilization data of a cell.
#[derive(Clone, Debug)]
pub struct StabilizationBlocks {
    pub blocks: Vec<TriangleBlock>,
    pub kprime: usize,
}

impl StabilizationBlocks {
    fn nq(&self) -> usize {
        self.kprime + 1
    }

    /// Residual vector blocks E u - G lambda.
    pub fn eta(&self, u: &DVector<f64>, lambda: &DVector<f64>) -> Vec<DVector<f64>> {
        let n = self.nq();
        self.blocks
            .iter()
            .enumerate()
            .map(|(i, b)| &b.e * u - &b.g * lambda.rows(i * n, n))
            .collect()
    }

    /// Test vector blocks t E v - G mu.
    pub fn zeta(&self, v: &DVector<f64>, mu: &DVector<f64>, t: f64) -> Vec<DVector<f64>> {
        let n = self.nq();
        self.blocks
            .iter()
            .enumerate()
            .map(|(i, b)| (&b.e * v) * t - &b.g * mu.rows(i * n, n))
            .collect()
    }

    pub fn load(&self) -> Vec<DVector<f64>> {
        self.blocks.iter().map(|b| b.f.clone()).collect()
    }

    /// s_K(F, G) = F^T S^{-1} G, solved block by block.
    pub fn s_k(&self, f: &[DVector<f64>], g: &[DVector<f64>]) -> f64 {
        self.blocks.iter().zip(f.iter().zip(g)).map(|(b, (fi, gi))| fi.dot(&b.solve_vec(gi))).sum()
    }
}

pub fn assemble_stabilization(
    mesh: &PolygonalMesh,
    cell: usize,
    split: &CellSplit,
    basis: &ScaledMonomialBasis,
    stab: &ReferenceStabilizer,
    f: &dyn Fn(Point2) -> f64,
) -> Result<StabilizationBlocks> {
    let n = stab.dim();
    let nu = basis.dim();
    let mut blocks = Vec::with_capacity(split.maps.len());
    for (i, map) in split.maps.iter().enumerate() {
        let ph = push_forward(stab, map)?;
        let grads: Vec<Vec<[f64; 2]>> = ph.points.iter().map(|&p| basis.eval_grad(p)).collect();
        let fv: Vec<f64> = ph.points.iter().map(|&p| f(p)).collect();
        let mut e = DMatrix::zeros(n, nu);
        let mut fl = DVector::zeros(n);
        for p in 0..n {
            for (q, g) in grads.iter().enumerate() {
                let w = ph.grad_weights[p][q];
                for j in 0..nu {
                    e[(p, j)] += w.x * g[j][0] + w.y * g[j][1];
                }
                fl[p] += ph.val_weights[p][q] * fv[q];
            }
        }
        let edge = &mesh.edges[mesh.cell_edges[cell][i]];
        let g = trace_matrix(stab, edge.length, !mesh.same_orientation(cell, i));
        let solver = match ph.s.clone().cholesky() {
            Some(c) if c.l_dirty().diagonal().iter().all(|d| *d > 0.0 && d.is_finite()) => BlockSolver::Cholesky(c),
            _ => {
                let lu = ph.s.clone().full_piv_lu();
                if !lu.is_invertible() {
                    return Err(Error::Singular { what: "stabilization block", cell });
                }
                BlockSolver::Lu(lu)
            }
        };
        blocks.push(TriangleBlock { s: ph.s, e, g, f: fl, solver });
    }
    Ok(StabilizationBlocks { blocks, kprime: stab.kprime })
}
