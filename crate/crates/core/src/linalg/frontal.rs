//! Multifrontal LU for sparse matrices whose nonzero pattern is (block) symmetric.
//!
//! Unknowns are grouped in blocks of `block` consecutive indices. The blocks are
//! ordered by approximate minimum degree on the symmetrized block pattern, the
//! elimination tree is postordered and chains of columns with nested structure are
//! merged into supernodes. Pivoting is partial, restricted to the fully summed rows
//! of each front, so the factor keeps the symbolic structure.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::matmul::matmul;
use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
use faer::sparse::linalg::amd;
use faer::sparse::SymbolicSparseColMatRef;
use faer::{Accum, Mat, Par};

use super::CscMatrix;
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

/// Explicit zero rows accepted when merging a column into a small supernode.
const RELAX_ZEROS: usize = 2;
const RELAX_COLUMNS: usize = 16;

struct Front {
    /// First pivot in the permuted numbering; the pivots are `start..start + np`.
    start: usize,
    np: usize,
    /// Permuted indices of the remaining rows and columns, increasing.
    rest: Vec<usize>,
    /// Row `i` of the factored pivot block is row `piv[i]` of the assembled one.
    piv: Vec<usize>,
    /// Unit lower L11 below the diagonal, U11 on and above it.
    lu11: Mat<f64>,
    u12: Mat<f64>,
    l21: Mat<f64>,
}

pub struct FrontalLu {
    n: usize,
    /// `perm[new] = old` for scalar unknowns.
    perm: Vec<usize>,
    fronts: Vec<Front>,
}

/// Symmetrized block pattern without the diagonal, as sorted adjacency lists.
fn block_adjacency(a: &CscMatrix, block: usize) -> Vec<Vec<usize>> {
    let nb = a.ncols() / block;
    let (cp, ri, _) = a.parts();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for j in 0..a.ncols() {
        let bj = j / block;
        for &i in &ri[cp[j]..cp[j + 1]] {
            let bi = i / block;
            if bi != bj {
                adj[bj].push(bi);
                adj[bi].push(bj);
            }
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    adj
}

/// Approximate minimum degree order, `order[k]` is the k-th eliminated node.
fn amd_order(adj: &[Vec<usize>]) -> Result<Vec<usize>> {
    let nb = adj.len();
    let mut col_ptr = Vec::with_capacity(nb + 1);
    col_ptr.push(0);
    for l in adj {
        col_ptr.push(col_ptr[col_ptr.len() - 1] + l.len());
    }
    let row_idx: Vec<usize> = adj.iter().flatten().copied().collect();
    let nnz = row_idx.len();
    let sym = SymbolicSparseColMatRef::new_checked(nb, nb, &col_ptr, None, &row_idx);
    let mut fwd = vec![0usize; nb];
    let mut inv = vec![0usize; nb];
    let mut mem = MemBuffer::try_new(amd::order_scratch::<usize>(nb, nnz))
        .map_err(|_| Error::Solve("out of memory in fill-reducing ordering".into()))?;
    amd::order(&mut fwd, &mut inv, sym, amd::Control::default(), MemStack::new(&mut mem))
        .map_err(|e| Error::Solve(format!("fill-reducing ordering failed: {e:?}")))?;
    Ok(fwd)
}

fn relabel(adj: &[Vec<usize>], order: &[usize]) -> Vec<Vec<usize>> {
    let mut pos = vec![0usize; order.len()];
    for (k, &o) in order.iter().enumerate() {
        pos[o] = k;
    }
    order
        .iter()
        .map(|&o| {
            let mut l: Vec<usize> = adj[o].iter().map(|&i| pos[i]).collect();
            l.sort_unstable();
            l
        })
        .collect()
}

/// Elimination tree of a symmetric pattern given by sorted adjacency lists.
fn etree(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for j in 0..n {
        for &i in adj[j].iter().take_while(|&&i| i < j) {
            let mut r = i;
            loop {
                let a = ancestor[r];
                if a == j {
                    break;
                }
                ancestor[r] = j;
                if a == NONE {
                    parent[r] = j;
                    break;
                }
                r = a;
            }
        }
    }
    parent
}

fn postorder(parent: &[usize]) -> Vec<usize> {
    let n = parent.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, &p) in parent.iter().enumerate() {
        if p != NONE {
            children[p].push(j);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for r in (0..n).filter(|&j| parent[j] == NONE) {
        stack.push((r, 0));
        while let Some((v, next)) = stack.pop() {
            if next < children[v].len() {
                stack.push((v, next + 1));
                stack.push((children[v][next], 0));
            } else {
                order.push(v);
            }
        }
    }
    order
}

/// Sorted union of `a` and `b` without `skip`.
fn merge_sorted(a: &[usize], b: &[usize], skip: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let v = if j == b.len() || (i < a.len() && a[i] < b[j]) {
            i += 1;
            a[i - 1]
        } else if i == a.len() || b[j] < a[i] {
            j += 1;
            b[j - 1]
        } else {
            i += 1;
            j += 1;
            a[i - 1]
        };
        if v != skip {
            out.push(v);
        }
    }
    out
}

/// Column structures of the factor: entries below the diagonal of each column.
fn column_structures(adj: &[Vec<usize>], parent: &[usize]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, &p) in parent.iter().enumerate() {
        if p != NONE {
            children[p].push(j);
        }
    }
    let mut st: Vec<Vec<usize>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut s: Vec<usize> = adj[j].iter().copied().filter(|&i| i > j).collect();
        for &c in &children[j] {
            s = merge_sorted(&s, &st[c], j);
        }
        st.push(s);
    }
    st
}

/// Supernodes as (first column, end column, rows below), in postorder.
fn supernodes(parent: &[usize], st: Vec<Vec<usize>>) -> Vec<(usize, usize, Vec<usize>)> {
    let n = parent.len();
    let mut nchildren = vec![0usize; n];
    for &p in parent.iter().filter(|&&p| p != NONE) {
        nchildren[p] += 1;
    }
    let mut out = Vec::new();
    let mut start = 0;
    let mut st = st;
    for j in 0..n {
        let p = parent[j];
        let joins = p == j + 1 && nchildren[p] == 1 && {
            let zeros = st[p].len() + 1 - st[j].len();
            zeros == 0 || (zeros <= RELAX_ZEROS && j + 1 - start < RELAX_COLUMNS)
        };
        if !joins {
            out.push((start, j + 1, std::mem::take(&mut st[j])));
            start = j + 1;
        } else {
            st[j] = Vec::new();
        }
    }
    out
}

impl FrontalLu {
    /// Factors `a`, whose unknowns come in consecutive groups of `block`.
    pub fn factor(a: &CscMatrix, block: usize) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || block == 0 || n % block != 0 {
            return Err(Error::Solve(format!("frontal LU needs a square matrix in blocks of {block}, got {n}x{}", a.ncols())));
        }
        let adj = block_adjacency(a, block);
        let order = amd_order(&adj)?;
        let adj = relabel(&adj, &order);
        let post = postorder(&etree(&adj));
        let adj = relabel(&adj, &post);
        let block_order: Vec<usize> = post.iter().map(|&k| order[k]).collect();
        let parent = etree(&adj);
        let st = column_structures(&adj, &parent);
        drop(adj);
        let snodes = supernodes(&parent, st);

        let perm: Vec<usize> = block_order.iter().flat_map(|&b| (b * block)..(b * block + block)).collect();
        let mut inv = vec![0usize; n];
        for (k, &o) in perm.iter().enumerate() {
            inv[o] = k;
        }
        let at = a.transpose_parts();
        let (cp, ri, va) = a.parts();

        let mut fronts = Vec::with_capacity(snodes.len());
        let mut pos = vec![NONE; n];
        let mut updates: Vec<(Vec<usize>, Mat<f64>)> = Vec::new();
        let mut nchildren = vec![0usize; snodes.len()];
        let mut snode_of = vec![0usize; parent.len()];
        for (s, (c0, c1, _)) in snodes.iter().enumerate() {
            snode_of[*c0..*c1].fill(s);
        }
        for (_, c1, _) in &snodes {
            let p = parent[c1 - 1];
            if p != NONE {
                nchildren[snode_of[p]] += 1;
            }
        }

        for (s, (c0, c1, rows)) in snodes.into_iter().enumerate() {
            let start = c0 * block;
            let np = (c1 - c0) * block;
            let rest: Vec<usize> = rows.iter().flat_map(|&b| (b * block)..(b * block + block)).collect();
            let m = np + rest.len();
            for i in 0..np {
                pos[start + i] = i;
            }
            for (i, &r) in rest.iter().enumerate() {
                pos[r] = np + i;
            }
            let mut f = Mat::<f64>::zeros(m, m);
            for jl in 0..np {
                let jo = perm[start + jl];
                for p in cp[jo]..cp[jo + 1] {
                    let inew = inv[ri[p]];
                    if inew >= start {
                        f[(pos[inew], jl)] += va[p];
                    }
                }
                for p in at.0[jo]..at.0[jo + 1] {
                    let jnew = inv[at.1[p]];
                    if jnew >= start + np {
                        f[(jl, pos[jnew])] += at.2[p];
                    }
                }
            }
            for _ in 0..nchildren[s] {
                let (idx, u) = updates.pop().expect("child update present");
                let loc: Vec<usize> = idx.iter().map(|&g| pos[g]).collect();
                for (cj, &lj) in loc.iter().enumerate() {
                    let col = u.col_as_slice(cj);
                    let fcol = f.col_as_slice_mut(lj);
                    for (ci, &li) in loc.iter().enumerate() {
                        fcol[li] += col[ci];
                    }
                }
            }

            let piv = factor_panel(&mut f, np).map_err(|k| Error::Solve(format!("zero pivot at unknown {}", perm[start + k])))?;
            let (f11, f12, mut f21, mut f22) = f.split_at_mut(np, np);
            solve_lower_triangular_in_place(f11.as_ref().transpose(), f21.as_mut().transpose_mut(), Par::Seq);
            matmul(f22.as_mut(), Accum::Add, f21.as_ref(), f12.as_ref(), -1.0, Par::Seq);
            let lu11 = f11.to_owned();
            let u12 = f12.to_owned();
            let l21 = f21.to_owned();
            if !rest.is_empty() {
                updates.push((rest.clone(), f22.to_owned()));
            }
            for i in 0..np {
                pos[start + i] = NONE;
            }
            for &r in &rest {
                pos[r] = NONE;
            }
            fronts.push(Front { start, np, rest, piv, lu11, u12, l21 });
        }
        Ok(Self { n, perm, fronts })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of the factors.
    pub fn factor_entries(&self) -> usize {
        self.fronts.iter().map(|f| f.np * f.np + 2 * f.np * f.rest.len()).sum()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        let mut z = Vec::new();
        for f in &self.fronts {
            let yp = &mut y[f.start..f.start + f.np];
            z.clear();
            z.extend(f.piv.iter().map(|&i| yp[i]));
            for k in 0..f.np {
                let col = f.lu11.col_as_slice(k);
                let zk = z[k];
                for i in k + 1..f.np {
                    z[i] -= col[i] * zk;
                }
            }
            yp.copy_from_slice(&z);
            for (k, &zk) in z.iter().enumerate() {
                let col = f.l21.col_as_slice(k);
                for (r, &g) in f.rest.iter().enumerate() {
                    y[g] -= col[r] * zk;
                }
            }
        }
        for f in self.fronts.iter().rev() {
            z.clear();
            z.extend_from_slice(&y[f.start..f.start + f.np]);
            for (r, &g) in f.rest.iter().enumerate() {
                let xr = y[g];
                let col = f.u12.col_as_slice(r);
                for i in 0..f.np {
                    z[i] -= col[i] * xr;
                }
            }
            for k in (0..f.np).rev() {
                let col = f.lu11.col_as_slice(k);
                z[k] /= col[k];
                let zk = z[k];
                for i in 0..k {
                    z[i] -= col[i] * zk;
                }
            }
            y[f.start..f.start + f.np].copy_from_slice(&z);
        }
        let mut x = vec![0.0; self.n];
        for (k, &o) in self.perm.iter().enumerate() {
            x[o] = y[k];
        }
        x
    }

    /// Hager-Higham estimate of the 1-norm of the inverse.
    pub fn inverse_norm1_estimate(&self) -> f64 {
        super::inverse_norm1_estimate(self.n, |b| self.solve(b), |b| self.solve_transpose(b))
    }

    pub fn solve_transpose(&self, c: &[f64]) -> Vec<f64> {
        assert_eq!(c.len(), self.n);
        let mut y: Vec<f64> = self.perm.iter().map(|&o| c[o]).collect();
        let mut z = Vec::new();
        // U^T w = c
        for f in &self.fronts {
            z.clear();
            z.extend_from_slice(&y[f.start..f.start + f.np]);
            for k in 0..f.np {
                let col = f.lu11.col_as_slice(k);
                let s: f64 = (0..k).map(|i| col[i] * z[i]).sum();
                z[k] = (z[k] - s) / col[k];
            }
            y[f.start..f.start + f.np].copy_from_slice(&z);
            for (r, &g) in f.rest.iter().enumerate() {
                let col = f.u12.col_as_slice(r);
                y[g] -= (0..f.np).map(|i| col[i] * z[i]).sum::<f64>();
            }
        }
        // transposed elimination steps in reverse order
        for f in self.fronts.iter().rev() {
            z.clear();
            z.extend_from_slice(&y[f.start..f.start + f.np]);
            for k in 0..f.np {
                let col = f.l21.col_as_slice(k);
                z[k] -= f.rest.iter().enumerate().map(|(r, &g)| col[r] * y[g]).sum::<f64>();
            }
            for k in (0..f.np).rev() {
                let col = f.lu11.col_as_slice(k);
                z[k] -= (k + 1..f.np).map(|i| col[i] * z[i]).sum::<f64>();
            }
            let yp = &mut y[f.start..f.start + f.np];
            for (i, &p) in f.piv.iter().enumerate() {
                yp[p] = z[i];
            }
        }
        let mut x = vec![0.0; self.n];
        for (k, &o) in self.perm.iter().enumerate() {
            x[o] = y[k];
        }
        x
    }
}

/// In-place LU with row pivoting of the leading `np` columns of the front, pivots searched
/// among the first `np` rows. Returns the row order, or the failing column.
fn factor_panel(f: &mut Mat<f64>, np: usize) -> std::result::Result<Vec<usize>, usize> {
    let m = f.ncols();
    let mut piv: Vec<usize> = (0..np).collect();
    for k in 0..np {
        let col = f.col_as_slice(k);
        let (mut best, mut bi) = (0.0f64, k);
        for (i, v) in col.iter().enumerate().take(np).skip(k) {
            if v.abs() > best {
                best = v.abs();
                bi = i;
            }
        }
        if !(best > 0.0) || !best.is_finite() {
            return Err(k);
        }
        if bi != k {
            for j in 0..m {
                let c = f.col_as_slice_mut(j);
                c.swap(k, bi);
            }
            piv.swap(k, bi);
        }
        let d = f[(k, k)];
        {
            let c = f.col_as_slice_mut(k);
            for v in &mut c[k + 1..np] {
                *v /= d;
            }
        }
        let lk: Vec<f64> = f.col_as_slice(k)[k + 1..np].to_vec();
        for j in k + 1..m {
            let c = f.col_as_slice_mut(j);
            let u = c[k];
            if u != 0.0 {
                for (v, l) in c[k + 1..np].iter_mut().zip(&lk) {
                    *v -= l * u;
                }
            }
        }
    }
    Ok(piv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random nonsymmetric matrix on a 2D grid graph of blocks, diagonally weighted.
    fn grid_matrix(nx: usize, ny: usize, block: usize, seed: u64) -> CscMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let id = |x: usize, y: usize| x + nx * y;
        let mut t = Vec::new();
        for y in 0..ny {
            for x in 0..nx {
                let mut nb = vec![id(x, y)];
                if x + 1 < nx {
                    nb.push(id(x + 1, y));
                }
                if y + 1 < ny {
                    nb.push(id(x, y + 1));
                }
                if x + 1 < nx && y + 1 < ny {
                    nb.push(id(x + 1, y + 1));
                }
                let i = id(x, y);
                for &j in &nb {
                    for p in 0..block {
                        for q in 0..block {
                            let v: f64 = rng.random_range(-1.0..1.0);
                            t.push((i * block + p, j * block + q, v));
                            if j != i {
                                t.push((j * block + q, i * block + p, rng.random_range(-1.0..1.0)));
                            }
                        }
                    }
                }
                for p in 0..block {
                    t.push((i * block + p, i * block + p, 6.0 * block as f64));
                }
            }
        }
        let n = nx * ny * block;
        CscMatrix::from_triplets(n, n, &t).unwrap()
    }

    fn residual(a: &CscMatrix, x: &[f64], b: &[f64]) -> f64 {
        a.mul_vec(x).iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
    }

    fn transpose(a: &CscMatrix) -> CscMatrix {
        let t: Vec<_> = a.entries().into_iter().map(|(i, j, v)| (j, i, v)).collect();
        CscMatrix::from_triplets(a.ncols(), a.nrows(), &t).unwrap()
    }

    #[test]
    fn agrees_with_general_sparse_lu() {
        for (nx, ny, block) in [(1, 1, 1), (3, 2, 1), (7, 5, 2), (12, 9, 3), (20, 20, 4)] {
            let a = grid_matrix(nx, ny, block, (nx * ny) as u64);
            let n = a.nrows();
            let b: Vec<f64> = (0..n).map(|i| ((i * 7 % 11) as f64) - 5.0).collect();
            let lu = FrontalLu::factor(&a, block).unwrap();
            let x = lu.solve(&b);
            let x_ref = a.lu().unwrap().solve(&b);
            let scale = x_ref.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let dev = x.iter().zip(&x_ref).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(dev <= 1e-10 * scale, "{nx}x{ny}/{block}: {dev}");
            assert!(residual(&a, &x, &b) < 1e-10);
            let xt = lu.solve_transpose(&b);
            assert!(residual(&transpose(&a), &xt, &b) < 1e-10);
        }
    }

    #[test]
    fn pivoting_inside_fronts() {
        // zero diagonal forces row exchanges within the pivot block
        let a = CscMatrix::from_triplets(4, 4, &[(0, 1, 2.0), (1, 0, 3.0), (2, 3, 1.0), (3, 2, -1.0), (0, 2, 1.0), (2, 0, 1.0), (1, 1, 0.5)])
            .unwrap();
        let lu = FrontalLu::factor(&a, 2).unwrap();
        let b = [1.0, 2.0, 3.0, 4.0];
        assert!(residual(&a, &lu.solve(&b), &b) < 1e-14);
        assert!(residual(&transpose(&a), &lu.solve_transpose(&b), &b) < 1e-14);
    }

    #[test]
    fn singular_and_bad_shapes_are_errors() {
        let a = CscMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 1.0)]).unwrap();
        assert!(FrontalLu::factor(&a, 1).is_err());
        assert!(FrontalLu::factor(&a, 3).is_err());
    }

    #[test]
    fn structures_and_supernodes() {
        // path 0-1-2-3: tree is a chain, one supernode
        let adj = vec![vec![1], vec![0, 2], vec![1, 3], vec![2]];
        let parent = etree(&adj);
        assert_eq!(parent, vec![1, 2, 3, NONE]);
        let st = column_structures(&adj, &parent);
        assert_eq!(st, vec![vec![1], vec![2], vec![3], vec![]]);
        let sn = supernodes(&parent, st);
        assert_eq!(sn, vec![(0, 4, vec![])]);
        // star centered at 3
        let adj = vec![vec![3], vec![3], vec![3], vec![0, 1, 2]];
        let parent = etree(&adj);
        assert_eq!(parent, vec![3, 3, 3, NONE]);
        assert_eq!(postorder(&parent), vec![0, 1, 2, 3]);
        assert_eq!(merge_sorted(&[1, 3, 5], &[2, 3, 6], 5), vec![1, 2, 3, 6]);
    }
}
