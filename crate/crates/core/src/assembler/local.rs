use nalgebra::{DMatrix, DVector};

use super::stabilization::{assemble_stabilization, StabilizationBlocks};
use crate::error::{Error, Result};
use crate::mesh::{CellSplit, Point2, PolygonalMesh};
use crate::polybasis::{dim_pk, gauss_unit_rule, triangle_rule, EdgeLegendreBasis, ScaledMonomialBasis, TriangleRule};
use crate::refstab::{default_delta, ReferenceStabilizer};

/// Discretization parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MethodParams {
    /// Cell polynomial degree.
    pub k: usize,
    /// Edge polynomial degree of the flux and trace spaces.
    pub kprime: usize,
    pub alpha: f64,
    /// Sign of the stabilization test term, +1 or -1.
    pub t: f64,
    /// Reference mesh size of the auxiliary space.
    pub delta: f64,
}

impl MethodParams {
    /// k' = k, alpha = t = 1 and the default reference mesh size.
    pub fn new(k: usize) -> Self {
        Self { k, kprime: k, alpha: 1.0, t: 1.0, delta: default_delta(k) }
    }

    pub fn moment_degree(&self) -> usize {
        self.k + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidArgument("cell degree k must be at least 1".into()));
        }
        if self.kprime + 1 < self.k || self.kprime > self.k {
            return Err(Error::InvalidArgument(format!("edge degree must be k or k-1, got k'={} for k={}", self.kprime, self.k)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {}", self.alpha)));
        }
        if self.t != 1.0 && self.t != -1.0 {
            return Err(Error::InvalidArgument(format!("t must be +1 or -1, got {}", self.t)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidArgument(format!("delta must lie in (0, 1], got {}", self.delta)));
        }
        Ok(())
    }
}

/// Local dimensions of a cell with `n_edges` edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalSpaces {
    pub n_edges: usize,
    pub n_u: usize,
    pub n_lambda: usize,
    pub n_w: usize,
}

impl LocalSpaces {
    pub fn new(n_edges: usize, k: usize, kprime: usize) -> Self {
        Self { n_edges, n_u: dim_pk(k), n_lambda: n_edges * (kprime + 1), n_w: n_edges * (kprime + 1) }
    }
}

/// Scaled monomials centered at the cell centroid, scaled by the cell diameter.
pub fn cell_basis(mesh: &PolygonalMesh, cell: usize, k: usize) -> ScaledMonomialBasis {
    ScaledMonomialBasis::new(mesh.centroid(cell), mesh.diameter(cell), k)
}

pub fn assemble_volume_stiffness(basis: &ScaledMonomialBasis, split: &CellSplit, rule: &TriangleRule) -> DMatrix<f64> {
    let n = basis.dim();
    let mut a = DMatrix::zeros(n, n);
    for map in &split.maps {
        let jd = map.det().abs();
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let g = basis.eval_grad(map.apply(*x));
            let ww = w * jd;
            for i in 0..n {
                for j in i..n {
                    a[(i, j)] += ww * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            a[(i, j)] = a[(j, i)];
        }
    }
    a
}

/// Integrals of f against the cell basis over the sub-triangles.
fn assemble_load(basis: &ScaledMonomialBasis, split: &CellSplit, rule: &TriangleRule, f: &dyn Fn(Point2) -> f64) -> DVector<f64> {
    let mut b = DVector::zeros(basis.dim());
    for map in &split.maps {
        let jd = map.det().abs();
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let p = map.apply(*x);
            let fv = f(p) * w * jd;
            for (bi, v) in b.iter_mut().zip(basis.eval(p)) {
                *bi += fv * v;
            }
        }
    }
    b
}

/// Returns `B` with `B[(i*(k'+1)+q, j)]` = integral over edge i of mu_q m_j, and the
/// flux-trace coupling `M`, which is the identity because both spaces share the
/// orthonormal edge basis.
pub fn assemble_boundary_coupling(
    mesh: &PolygonalMesh,
    cell: usize,
    basis: &ScaledMonomialBasis,
    kprime: usize,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let ne = mesh.cells[cell].len();
    let nq = kprime + 1;
    let nu = basis.dim();
    let rule = gauss_unit_rule(basis.degree + kprime + 2);
    let mut b = DMatrix::zeros(ne * nq, nu);
    for i in 0..ne {
        let edge = &mesh.edges[mesh.cell_edges[cell][i]];
        let eb = EdgeLegendreBasis::new(mesh.vertices[edge.v[0]], mesh.vertices[edge.v[1]], kprime);
        let l = edge.length;
        for (t, w) in rule.points.iter().zip(&rule.weights) {
            let s = t * l;
            let mu = eb.eval(s);
            let m = basis.eval(eb.point_at(s));
            for q in 0..nq {
                for j in 0..nu {
                    b[(i * nq + q, j)] += w * l * mu[q] * m[j];
                }
            }
        }
    }
    (b, DMatrix::identity(ne * nq, ne * nq))
}

/// Local saddle system on (u^K, lambda^K):  L x = rhs + [0; phi].
#[derive(Clone, Debug)]
pub struct LocalSystem {
    pub cell: usize,
    pub spaces: LocalSpaces,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub stab: StabilizationBlocks,
    pub f_v: DVector<f64>,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

pub fn assemble_local_hybrid(
    mesh: &PolygonalMesh,
    cell: usize,
    split: &CellSplit,
    params: &MethodParams,
    stab: &ReferenceStabilizer,
    f: &dyn Fn(Point2) -> f64,
) -> Result<LocalSystem> {
    let basis = cell_basis(mesh, cell, params.k);
    let rule = triangle_rule(2 * params.k + 2);
    let spaces = LocalSpaces::new(mesh.cells[cell].len(), params.k, params.kprime);
    let a = assemble_volume_stiffness(&basis, split, &rule);
    let f_v = assemble_load(&basis, split, &rule, f);
    let (b, _) = assemble_boundary_coupling(mesh, cell, &basis, params.kprime);
    let stab_blocks = assemble_stabilization(mesh, cell, split, &basis, stab, f)?;

    let (nu, nl) = (spaces.n_u, spaces.n_lambda);
    let nq = params.kprime + 1;
    let (alpha, t) = (params.alpha, params.t);
    let mut ete = DMatrix::zeros(nu, nu);
    let mut etg = DMatrix::zeros(nu, nl);
    let mut gte = DMatrix::zeros(nl, nu);
    let mut gtg = DMatrix::zeros(nl, nl);
    let mut etf = DVector::zeros(nu);
    let mut gtf = DVector::zeros(nl);
    for (i, blk) in stab_blocks.blocks.iter().enumerate() {
        let sie = blk.solve(&blk.e);
        let sig = blk.solve(&blk.g);
        let sif = blk.solve_vec(&blk.f);
        ete += blk.e.transpose() * &sie;
        etg.columns_mut(i * nq, nq).copy_from(&(blk.e.transpose() * &sig));
        gte.rows_mut(i * nq, nq).copy_from(&(blk.g.transpose() * &sie));
        gtg.view_mut((i * nq, i * nq), (nq, nq)).copy_from(&(blk.g.transpose() * &sig));
        etf += blk.e.transpose() * &sif;
        gtf.rows_mut(i * nq, nq).copy_from(&(blk.g.transpose() * &sif));
    }
    let mut l = DMatrix::zeros(nu + nl, nu + nl);
    l.view_mut((0, 0), (nu, nu)).copy_from(&(&a + &ete * (alpha * t)));
    l.view_mut((0, nu), (nu, nl)).copy_from(&(-b.transpose() - &etg * (alpha * t)));
    l.view_mut((nu, 0), (nl, nu)).copy_from(&(&b - &gte * alpha));
    l.view_mut((nu, nu), (nl, nl)).copy_from(&(&gtg * alpha));
    let mut rhs = DVector::zeros(nu + nl);
    rhs.rows_mut(0, nu).copy_from(&(&f_v + &etf * (alpha * t)));
    rhs.rows_mut(nu, nl).copy_from(&(-&gtf * alpha));
    Ok(LocalSystem { cell, spaces, a, b, stab: stab_blocks, f_v, matrix: l, rhs })
}

/// Local solution as an affine function of the cell's trace coefficients:
/// x = x_r + x_phi * phi. The flux part gives lambda = -load + schur * phi.
#[derive(Clone, Debug)]
pub struct CondensedElement {
    pub cell: usize,
    pub spaces: LocalSpaces,
    pub schur: DMatrix<f64>,
    pub load: DVector<f64>,
    pub x_r: DVector<f64>,
    pub x_phi: DMatrix<f64>,
}

impl CondensedElement {
    /// Recovers (u^K, lambda^K) from the cell's trace coefficients.
    pub fn recover(&self, phi: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let x = &self.x_r + &self.x_phi * phi;
        let nu = self.spaces.n_u;
        (x.rows(0, nu).into_owned(), x.rows(nu, self.spaces.n_lambda).into_owned())
    }
}

pub fn static_condense(sys: &LocalSystem) -> Result<CondensedElement> {
    let (nu, nl) = (sys.spaces.n_u, sys.spaces.n_lambda);
    let lu = sys.matrix.clone().full_piv_lu();
    if !lu.is_invertible() {
        return Err(Error::Singular { what: "local hybrid matrix", cell: sys.cell });
    }
    let x_r = lu.solve(&sys.rhs).ok_or(Error::Singular { what: "local hybrid matrix", cell: sys.cell })?;
    let mut c = DMatrix::zeros(nu + nl, nl);
    c.view_mut((nu, 0), (nl, nl)).fill_with_identity();
    let x_phi = lu.solve(&c).ok_or(Error::Singular { what: "local hybrid matrix", cell: sys.cell })?;
    if x_r.iter().chain(x_phi.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Singular { what: "local hybrid matrix", cell: sys.cell });
    }
    let schur = x_phi.rows(nu, nl).into_owned();
    let load = -x_r.rows(nu, nl);
    Ok(CondensedElement { cell: sys.cell, spaces: sys.spaces, schur, load, x_r, x_phi })
}
