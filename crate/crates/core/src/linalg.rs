//! Thin wrappers over faer sparse matrices and direct factorizations.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, SymbolicSparseColMat, Triplet};
use faer::{Mat, Side};

use crate::error::{Error, Result};

mod frontal;
pub use frontal::FrontalLu;

/// Compressed sparse column matrix. Duplicate triplets are summed.
#[derive(Clone, Debug)]
pub struct CscMatrix {
    inner: SparseColMat<usize, f64>,
}

impl CscMatrix {
    pub fn from_triplets(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let trip: Vec<Triplet<usize, usize, f64>> =
            entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        let inner = SparseColMat::try_new_from_triplets(nrows, ncols, &trip)
            .map_err(|e| Error::Solve(format!("sparse construction failed: {e:?}")))?;
        Ok(Self { inner })
    }

    /// Builds a matrix from compressed column arrays. Row indices must be sorted and
    /// unique within each column.
    pub fn from_csc_parts(
        nrows: usize,
        ncols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if col_ptr.len() != ncols + 1 || col_ptr[0] != 0 || col_ptr[ncols] != row_idx.len() || row_idx.len() != values.len() {
            return Err(Error::Solve("inconsistent compressed column arrays".into()));
        }
        for j in 0..ncols {
            let (a, b) = (col_ptr[j], col_ptr[j + 1]);
            if a > b || row_idx[a..b].windows(2).any(|w| w[0] >= w[1]) || row_idx[a..b].iter().any(|&r| r >= nrows) {
                return Err(Error::Solve(format!("invalid row indices in column {j}")));
            }
        }
        let sym = SymbolicSparseColMat::new_checked(nrows, ncols, col_ptr, None, row_idx);
        Ok(Self { inner: SparseColMat::new(sym, values) })
    }

    pub fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn nnz(&self) -> usize {
        self.inner.as_ref().val().len()
    }

    /// Iterates over stored entries as (row, col, value), column by column.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let a = self.inner.as_ref();
        let cp = a.symbolic().col_ptr();
        let ri = a.symbolic().row_idx();
        let val = a.val();
        let mut out = Vec::with_capacity(val.len());
        for j in 0..self.ncols() {
            for p in cp[j]..cp[j + 1] {
                out.push((ri[p], j, val[p]));
            }
        }
        out
    }

    /// Dense value of entry (i, j), zero if not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let a = self.inner.as_ref();
        let cp = a.symbolic().col_ptr();
        let ri = a.symbolic().row_idx();
        let val = a.val();
        match ri[cp[j]..cp[j + 1]].binary_search(&i) {
            Ok(p) => val[cp[j] + p],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols());
        let a = self.inner.as_ref();
        let cp = a.symbolic().col_ptr();
        let ri = a.symbolic().row_idx();
        let val = a.val();
        let mut y = vec![0.0; self.nrows()];
        for j in 0..self.ncols() {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for p in cp[j]..cp[j + 1] {
                y[ri[p]] += val[p] * xj;
            }
        }
        y
    }

    pub(crate) fn parts(&self) -> (&[usize], &[usize], &[f64]) {
        let a = self.inner.as_ref();
        (a.symbolic().col_ptr(), a.symbolic().row_idx(), a.val())
    }

    /// Row-compressed copy: row pointers, column indices and values.
    pub(crate) fn transpose_parts(&self) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
        let (cp, ri, va) = self.parts();
        let mut rp = vec![0usize; self.nrows() + 1];
        for &i in ri {
            rp[i + 1] += 1;
        }
        for i in 0..self.nrows() {
            rp[i + 1] += rp[i];
        }
        let mut next = rp.clone();
        let mut ci = vec![0usize; ri.len()];
        let mut cv = vec![0.0; ri.len()];
        for j in 0..self.ncols() {
            for p in cp[j]..cp[j + 1] {
                let q = next[ri[p]];
                next[ri[p]] += 1;
                ci[q] = j;
                cv[q] = va[p];
            }
        }
        (rp, ci, cv)
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let a = self.inner.as_ref();
        let cp = a.symbolic().col_ptr();
        let val = a.val();
        (0..self.ncols()).map(|j| val[cp[j]..cp[j + 1]].iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Largest |a_ij - a_ji| relative to the largest |a_ij|.
    pub fn asymmetry(&self) -> f64 {
        let mut scale = 0.0f64;
        let mut diff = 0.0f64;
        for (i, j, v) in self.entries() {
            scale = scale.max(v.abs());
            diff = diff.max((v - self.get(j, i)).abs());
        }
        if scale == 0.0 {
            0.0
        } else {
            diff / scale
        }
    }

    pub fn lu(&self) -> Result<SparseLu> {
        if self.nrows() != self.ncols() {
            return Err(Error::Solve("LU of a non-square matrix".into()));
        }
        faer::set_global_parallelism(faer::Par::Seq);
        let lu = self
            .inner
            .sp_lu()
            .map_err(|e| Error::Solve(format!("sparse LU failed: {e:?}")))?;
        Ok(SparseLu { lu, n: self.nrows() })
    }

    /// Cholesky factorization of a symmetric positive definite matrix (lower triangle is read).
    pub fn cholesky(&self) -> Result<SparseCholesky> {
        faer::set_global_parallelism(faer::Par::Seq);
        let llt = self
            .inner
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Solve(format!("sparse Cholesky failed: {e:?}")))?;
        Ok(SparseCholesky { llt, n: self.nrows() })
    }
}

pub struct SparseLu {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    n: usize,
}

impl SparseLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        let x = self.lu.solve_transpose(&rhs);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    /// Hager-Higham estimate of the 1-norm of the inverse.
    pub fn inverse_norm1_estimate(&self) -> f64 {
        inverse_norm1_estimate(self.n, |b| self.solve(b), |b| self.solve_transpose(b))
    }
}

/// Hager-Higham estimate of the 1-norm of an inverse given its action and that of its transpose.
pub fn inverse_norm1_estimate(n: usize, solve: impl Fn(&[f64]) -> Vec<f64>, solve_t: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut x = vec![1.0 / n as f64; n];
    let mut est = 0.0;
    for _ in 0..5 {
        let y = solve(&x);
        let new_est: f64 = y.iter().map(|v| v.abs()).sum();
        if !new_est.is_finite() {
            return f64::INFINITY;
        }
        if new_est <= est {
            break;
        }
        est = new_est;
        let xi: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
        let z = solve_t(&xi);
        let (jmax, zmax) = z.iter().enumerate().fold((0, 0.0f64), |b, (j, v)| if v.abs() > b.1 { (j, v.abs()) } else { b });
        if zmax <= dot(&z, &x) {
            break;
        }
        x = vec![0.0; n];
        x[jmax] = 1.0;
    }
    est
}

pub struct SparseCholesky {
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
    n: usize,
}

impl SparseCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        let x = self.llt.solve(&rhs);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    /// Solves for several right-hand sides stored as columns.
    pub fn solve_columns(&self, cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let m = cols.len();
        let rhs = Mat::<f64>::from_fn(self.n, m, |i, j| cols[j][i]);
        let x = self.llt.solve(&rhs);
        (0..m).map(|j| (0..self.n).map(|i| x[(i, j)]).collect()).collect()
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
