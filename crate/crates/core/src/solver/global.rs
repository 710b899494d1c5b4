use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;

use super::problem::Problem;
use super::skeleton::{apply_neumann, build_skeleton_space, SkeletonSpace};
use crate::assembler::{assemble_local_hybrid, static_condense, MethodParams};
use crate::error::{Error, Result};
use crate::linalg::{norm2, CscMatrix, FrontalLu};
use crate::mesh::{subtriangulate, BoundaryTag, PolygonalMesh, SubTriangulation};
use crate::refstab::{shared_stabilizer, ReferenceStabilizer};

/// Condensed flux map of one cell: lambda^K = -load + schur * phi_K.
#[derive(Clone, Debug)]
pub struct CellBlocks {
    pub schur: nalgebra::DMatrix<f64>,
    pub load: DVector<f64>,
}

/// Global trace system on the free skeleton unknowns.
#[derive(Clone, Debug)]
pub struct SkeletonSystem {
    pub matrix: CscMatrix,
    pub rhs: Vec<f64>,
    /// Relative asymmetry of the matrix, for diagnostics only.
    pub asymmetry: f64,
    /// Unknowns per free edge.
    pub block: usize,
}

impl SkeletonSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Required relative residual ‖Aφ − b‖/‖b‖.
    pub tol: f64,
    pub max_refinements: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_refinements: 6 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolveReport {
    pub dim: usize,
    pub nnz: usize,
    pub residual: f64,
    pub refinements: usize,
    /// 1-norm condition estimate, computed only when the residual contract fails
    /// or when requested.
    pub condition: Option<f64>,
    pub asymmetry: f64,
    pub seconds_assembly: f64,
    pub seconds_solve: f64,
}

/// Condenses every cell in parallel; the result is in cell order.
pub fn condense_all(
    mesh: &PolygonalMesh,
    split: &SubTriangulation,
    params: &MethodParams,
    stab: &ReferenceStabilizer,
    problem: &dyn Problem,
) -> Result<Vec<CellBlocks>> {
    (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let sys = assemble_local_hybrid(mesh, c, &split.cells[c], params, stab, &|p| problem.source(p))?;
            let ce = static_condense(&sys)?;
            Ok(CellBlocks { schur: ce.schur, load: ce.load })
        })
        .collect()
}

/// Scatter-adds the cell blocks into a block-sparse matrix over the free edges.
/// The gluing row of a Neumann edge is set equal to the projected flux data.
pub fn assemble_global(
    mesh: &PolygonalMesh,
    skeleton: &SkeletonSpace,
    neumann: &[f64],
    cells: &[CellBlocks],
) -> Result<SkeletonSystem> {
    let nq = skeleton.modes();
    let n = skeleton.num_free();
    if cells.len() != mesh.num_cells() {
        return Err(Error::InvalidArgument(format!("{} cell blocks for {} cells", cells.len(), mesh.num_cells())));
    }
    // sorted free neighbour edges of every free edge
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); skeleton.free_edges.len()];
    for (fe, &e) in skeleton.free_edges.iter().enumerate() {
        let edge = &mesh.edges[e];
        let list = &mut nbrs[fe];
        for c in std::iter::once(edge.left).chain(edge.right) {
            list.extend(mesh.cell_edges[c].iter().filter_map(|&o| skeleton.edge_dof[o]));
        }
        list.sort_unstable();
        list.dedup();
    }
    let mut col_ptr = Vec::with_capacity(n + 1);
    col_ptr.push(0usize);
    for list in &nbrs {
        for _ in 0..nq {
            col_ptr.push(col_ptr.last().unwrap() + list.len() * nq);
        }
    }
    let nnz = *col_ptr.last().unwrap();
    let mut row_idx = Vec::with_capacity(nnz);
    for list in &nbrs {
        for _ in 0..nq {
            for &d in list {
                row_idx.extend(d..d + nq);
            }
        }
    }
    let mut values = vec![0.0; nnz];
    let mut rhs = vec![0.0; n];

    for (c, blk) in cells.iter().enumerate() {
        let ce = &mesh.cell_edges[c];
        if blk.schur.nrows() != ce.len() * nq || blk.load.len() != ce.len() * nq {
            return Err(Error::InvalidArgument(format!("cell {c}: block size does not match the skeleton numbering")));
        }
        for (i, &ei) in ce.iter().enumerate() {
            let Some(ri) = skeleton.edge_dof[ei] else { continue };
            for q in 0..nq {
                rhs[ri + q] += blk.load[i * nq + q];
            }
            for (j, &ej) in ce.iter().enumerate() {
                match skeleton.edge_dof[ej] {
                    Some(cj) => {
                        let fe = cj / nq;
                        let rank = nbrs[fe].binary_search(&ri).map_err(|_| {
                            Error::InvalidArgument(format!("numbering clash between edges {ei} and {ej}"))
                        })?;
                        for qc in 0..nq {
                            let base = col_ptr[cj + qc] + rank * nq;
                            for qr in 0..nq {
                                values[base + qr] += blk.schur[(i * nq + qr, j * nq + qc)];
                            }
                        }
                    }
                    None => {
                        let g = skeleton.dirichlet(ej);
                        for qr in 0..nq {
                            let mut s = 0.0;
                            for qc in 0..nq {
                                s += blk.schur[(i * nq + qr, j * nq + qc)] * g[qc];
                            }
                            rhs[ri + qr] -= s;
                        }
                    }
                }
            }
        }
    }
    for (&e, fe) in skeleton.free_edges.iter().zip(0..) {
        if mesh.edges[e].tag == BoundaryTag::Neumann {
            for q in 0..nq {
                rhs[fe * nq + q] += neumann[e * nq + q];
            }
        }
    }
    if values.iter().chain(&rhs).any(|v| !v.is_finite()) {
        return Err(Error::Solve("non-finite entries in the assembled skeleton system".into()));
    }
    let matrix = CscMatrix::from_csc_parts(n, n, col_ptr, row_idx, values)?;
    let asymmetry = matrix.asymmetry();
    Ok(SkeletonSystem { matrix, rhs, asymmetry, block: nq })
}

/// Sparse LU with iterative refinement until the relative residual meets `tol`.
pub fn solve_global(system: &SkeletonSystem, options: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    let n = system.dim();
    let mut report = SolveReport { dim: n, nnz: system.matrix.nnz(), asymmetry: system.asymmetry, ..Default::default() };
    let bnorm = norm2(&system.rhs);
    if n == 0 || bnorm == 0.0 {
        return Ok((vec![0.0; n], report));
    }
    let lu = FrontalLu::factor(&system.matrix, system.block)?;
    let mut x = lu.solve(&system.rhs);
    let residual = |x: &[f64]| -> Vec<f64> {
        system.matrix.mul_vec(x).iter().zip(&system.rhs).map(|(ax, b)| b - ax).collect()
    };
    let mut r = residual(&x);
    report.residual = norm2(&r) / bnorm;
    while report.residual > options.tol && report.refinements < options.max_refinements {
        let dx = lu.solve(&r);
        let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let rc = residual(&cand);
        let res = norm2(&rc) / bnorm;
        report.refinements += 1;
        if !(res < report.residual) {
            break;
        }
        x = cand;
        r = rc;
        report.residual = res;
    }
    if !(report.residual <= options.tol) || x.iter().any(|v| !v.is_finite()) {
        let cond = system.matrix.norm1() * lu.inverse_norm1_estimate();
        return Err(Error::Solve(format!(
            "relative residual {:.3e} above tolerance {:.1e} after {} refinements (dimension {}, condition estimate {:.3e})",
            report.residual, options.tol, report.refinements, n, cond
        )));
    }
    Ok((x, report))
}

/// Discrete solution: cell coefficients in scaled monomials, cell fluxes in the
/// orthonormal edge bases (local edge order), and the trace on every edge.
#[derive(Clone, Debug, PartialEq)]
pub struct DGSolution {
    pub params: MethodParams,
    pub u: Vec<DVector<f64>>,
    pub lambda: Vec<DVector<f64>>,
    /// `(k'+1)` coefficients per mesh edge.
    pub phi: Vec<f64>,
}

impl DGSolution {
    /// Total number of cell unknowns, dim V_h.
    pub fn dofs(&self) -> usize {
        self.u.iter().map(|u| u.len()).sum()
    }
}

/// Re-solves every local problem with its trace data.
pub fn reconstruct(
    mesh: &PolygonalMesh,
    split: &SubTriangulation,
    params: &MethodParams,
    stab: &ReferenceStabilizer,
    problem: &dyn Problem,
    phi: Vec<f64>,
) -> Result<DGSolution> {
    let nq = params.kprime + 1;
    let parts: Vec<(DVector<f64>, DVector<f64>)> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let sys = assemble_local_hybrid(mesh, c, &split.cells[c], params, stab, &|p| problem.source(p))?;
            let (nu, nl) = (sys.spaces.n_u, sys.spaces.n_lambda);
            let mut rhs = sys.rhs.clone();
            for (i, &e) in mesh.cell_edges[c].iter().enumerate() {
                for q in 0..nq {
                    rhs[nu + i * nq + q] += phi[e * nq + q];
                }
            }
            let x = sys
                .matrix
                .clone()
                .full_piv_lu()
                .solve(&rhs)
                .ok_or(Error::Singular { what: "local hybrid matrix", cell: c })?;
            Ok((x.rows(0, nu).into_owned(), x.rows(nu, nl).into_owned()))
        })
        .collect::<Result<_>>()?;
    let (u, lambda) = parts.into_iter().unzip();
    Ok(DGSolution { params: *params, u, lambda, phi })
}

/// Largest gluing defect |Σ_K λ^K_e − N_e| over the free edge coefficients.
pub fn gluing_residual(mesh: &PolygonalMesh, skeleton: &SkeletonSpace, neumann: &[f64], sol: &DGSolution) -> f64 {
    let nq = skeleton.modes();
    let mut sum = vec![0.0; mesh.num_edges() * nq];
    for (c, lam) in sol.lambda.iter().enumerate() {
        for (i, &e) in mesh.cell_edges[c].iter().enumerate() {
            for q in 0..nq {
                sum[e * nq + q] += lam[i * nq + q];
            }
        }
    }
    let mut worst = 0.0f64;
    for &e in &skeleton.free_edges {
        for q in 0..nq {
            worst = worst.max((sum[e * nq + q] - neumann[e * nq + q]).abs());
        }
    }
    worst
}

/// All pieces of one solve.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub solution: DGSolution,
    pub skeleton: SkeletonSpace,
    pub neumann: Vec<f64>,
    pub report: SolveReport,
}

/// Subtriangulates, condenses, solves the skeleton system and reconstructs.
pub fn solve_problem(
    mesh: &PolygonalMesh,
    params: &MethodParams,
    problem: &dyn Problem,
    options: &SolverOptions,
) -> Result<SolveOutcome> {
    params.validate()?;
    let t0 = Instant::now();
    let split = subtriangulate(mesh)?;
    let stab = shared_stabilizer(params.kprime, params.delta, params.moment_degree())?;
    let skeleton = build_skeleton_space(mesh, params.kprime, &|p| problem.dirichlet(p));
    let neumann = apply_neumann(mesh, params.kprime, &|p, n| problem.neumann(p, n));
    let cells = condense_all(mesh, &split, params, &stab, problem)?;
    let system = assemble_global(mesh, &skeleton, &neumann, &cells)?;
    drop(cells);
    let t1 = Instant::now();
    let (free, mut report) = solve_global(&system, options)?;
    drop(system);
    let t2 = Instant::now();
    let phi = skeleton.expand(&free);
    let solution = reconstruct(mesh, &split, params, &stab, problem, phi)?;
    report.seconds_assembly = (t1 - t0).as_secs_f64();
    report.seconds_solve = (t2 - t1).as_secs_f64();
    Ok(SolveOutcome { solution, skeleton, neumann, report })
}
