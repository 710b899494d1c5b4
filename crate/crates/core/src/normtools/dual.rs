use nalgebra::{DMatrix, DVector};

use crate::assembler::{assemble_stabilization, cell_basis};
use crate::error::{Error, Result};
use crate::linalg::{CscMatrix, SparseCholesky};
use crate::mesh::{split_cell, Point2, PolygonalMesh};
use crate::polybasis::{gauss_unit_rule, triangle_rule, EdgeLegendreBasis};
use crate::refstab::{p1_gradients, ReferenceStabilizer};

type PointFn<'a, T> = Box<dyn Fn(Point2) -> T + 'a>;

/// Functional on H¹(K): g ↦ ∫_K a·∇g + ∫_K b g + ∫_∂K c g, where the boundary
/// density receives the local edge index.
#[derive(Default)]
pub struct Functional<'a> {
    pub grad: Option<PointFn<'a, Point2>>,
    pub volume: Option<PointFn<'a, f64>>,
    pub boundary: Option<Box<dyn Fn(usize, Point2) -> f64 + 'a>>,
}

impl<'a> Functional<'a> {
    pub fn zero() -> Self {
        Self::default()
    }

    /// g ↦ ∫_K ∇u·∇g.
    pub fn stiffness(grad_u: impl Fn(Point2) -> Point2 + 'a) -> Self {
        Self { grad: Some(Box::new(grad_u)), ..Self::default() }
    }

    /// g ↦ ∫_∂K λ g.
    pub fn boundary(lambda: impl Fn(usize, Point2) -> f64 + 'a) -> Self {
        Self { boundary: Some(Box::new(lambda)), ..Self::default() }
    }

    pub fn volume(f: impl Fn(Point2) -> f64 + 'a) -> Self {
        Self { volume: Some(Box::new(f)), ..Self::default() }
    }
}

/// P1 space on a uniformly refined sub-triangulation of one cell.
pub struct ProbeLevel {
    pub refinements: usize,
    pub nodes: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
    /// Boundary segments (node, node, local edge).
    pub segments: Vec<(usize, usize, usize)>,
    pub area: f64,
    hat_integrals: Vec<f64>,
    chol: SparseCholesky,
}

impl ProbeLevel {
    pub fn new(points: &[Point2], center: Point2, refinements: usize) -> Result<Self> {
        let n = points.len();
        let m = 1usize << refinements;
        // ray r holds the points v_r + b/m (center - v_r), b < m; the center comes last
        let mut nodes = Vec::with_capacity(n * m + 1);
        for &v in points {
            for b in 0..m {
                nodes.push(v + (center - v) * (b as f64 / m as f64));
            }
        }
        let center_id = nodes.len();
        nodes.push(center);
        let mut triangles = Vec::new();
        let mut segments = Vec::new();
        for i in 0..n {
            let (p0, p1) = (points[i], points[(i + 1) % n]);
            let mut interior = std::collections::HashMap::new();
            let mut id = |a: usize, b: usize, nodes: &mut Vec<Point2>| -> usize {
                if b == m {
                    center_id
                } else if a == 0 {
                    i * m + b
                } else if a + b == m {
                    ((i + 1) % n) * m + b
                } else {
                    *interior.entry((a, b)).or_insert_with(|| {
                        let (s, t) = (a as f64 / m as f64, b as f64 / m as f64);
                        nodes.push(p0 + (p1 - p0) * s + (center - p0) * t);
                        nodes.len() - 1
                    })
                }
            };
            for b in 0..m {
                for a in 0..m - b {
                    let n00 = id(a, b, &mut nodes);
                    let n10 = id(a + 1, b, &mut nodes);
                    let n01 = id(a, b + 1, &mut nodes);
                    triangles.push([n00, n10, n01]);
                    if a + b + 1 < m {
                        let n11 = id(a + 1, b + 1, &mut nodes);
                        triangles.push([n10, n11, n01]);
                    }
                    if b == 0 {
                        segments.push((n00, n10, i));
                    }
                }
            }
        }
        let nn = nodes.len();
        let mut hat_integrals = vec![0.0; nn];
        let mut trip = Vec::with_capacity(triangles.len() * 9);
        let mut area = 0.0;
        for t in &triangles {
            let [a, b, c] = t.map(|i| [nodes[i].x, nodes[i].y]);
            let ar = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
            if !(ar > 0.0) {
                return Err(Error::InvalidMesh("degenerate probe triangle".into()));
            }
            area += ar;
            let g = p1_gradients(a, b, c);
            for i in 0..3 {
                hat_integrals[t[i]] += ar / 3.0;
                for j in 0..3 {
                    // node 0 is pinned to remove the constants
                    if t[i] != 0 && t[j] != 0 {
                        trip.push((t[i] - 1, t[j] - 1, ar * (g[i][0] * g[j][0] + g[i][1] * g[j][1])));
                    }
                }
            }
        }
        let k = CscMatrix::from_triplets(nn - 1, nn - 1, &trip)?;
        let chol = k.cholesky()?;
        Ok(Self { refinements, nodes, triangles, segments, area, hat_integrals, chol })
    }

    /// Hat-function moments ⟨F, φ_i⟩.
    pub fn load(&self, f: &Functional) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes.len()];
        if f.grad.is_some() || f.volume.is_some() {
            let rule = triangle_rule(12);
            for t in &self.triangles {
                let [a, b, c] = t.map(|i| [self.nodes[i].x, self.nodes[i].y]);
                let g = p1_gradients(a, b, c);
                let (pts, wts) = rule.mapped(a, b, c);
                for ((p, w), r) in pts.iter().zip(&wts).zip(&rule.points) {
                    let p = Point2::new(p[0], p[1]);
                    let bary = [1.0 - r[0] - r[1], r[0], r[1]];
                    if let Some(gf) = &f.grad {
                        let v = gf(p);
                        for i in 0..3 {
                            out[t[i]] += w * (v.x * g[i][0] + v.y * g[i][1]);
                        }
                    }
                    if let Some(vf) = &f.volume {
                        let v = vf(p);
                        for i in 0..3 {
                            out[t[i]] += w * v * bary[i];
                        }
                    }
                }
            }
        }
        if let Some(bf) = &f.boundary {
            let rule = gauss_unit_rule(8);
            for &(a, b, e) in &self.segments {
                let (pa, pb) = (self.nodes[a], self.nodes[b]);
                let l = pa.dist(pb);
                for (s, w) in rule.points.iter().zip(&rule.weights) {
                    let v = bf(e, pa + (pb - pa) * *s) * w * l;
                    out[a] += v * (1.0 - s);
                    out[b] += v * s;
                }
            }
        }
        out
    }

    /// Riesz representer of the mean-free part of a load vector (node 0 pinned).
    fn riesz(&self, load: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let total: f64 = load.iter().sum();
        let shifted: Vec<f64> =
            load.iter().zip(&self.hat_integrals).map(|(l, m)| l - total * m / self.area).collect();
        let z = self.chol.solve(&shifted[1..]);
        (shifted, z)
    }

    /// Squared seminorm |F|²₋₁ on this level.
    pub fn squared_norm(&self, load: &[f64]) -> f64 {
        let (s, z) = self.riesz(load);
        s[1..].iter().zip(&z).map(|(a, b)| a * b).sum::<f64>().max(0.0)
    }

    /// Gram matrix of the dual inner products of several load vectors.
    pub fn gram(&self, loads: &[Vec<f64>]) -> DMatrix<f64> {
        let reps: Vec<(Vec<f64>, Vec<f64>)> = loads.iter().map(|l| self.riesz(l)).collect();
        let n = loads.len();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = reps[i].0[1..].iter().zip(&reps[j].1).map(|(a, b)| a * b).sum();
            }
        }
        (&g + g.transpose()) * 0.5
    }
}

/// Two nested probe levels of one cell, used for Richardson reporting.
pub struct DualNormProbe {
    pub points: Vec<Point2>,
    pub coarse: ProbeLevel,
    pub fine: ProbeLevel,
}

/// Default number of uniform refinements of the sub-triangulation.
pub const DEFAULT_PROBE_REFINEMENTS: usize = 3;

/// Refinements needed to resolve edge polynomials of degree `kprime`: at least
/// the default, and about 8(k'+1) segments per edge.
pub fn probe_refinements(kprime: usize) -> usize {
    let segs = 8 * (kprime + 1);
    ((usize::BITS - (segs - 1).leading_zeros()) as usize).max(DEFAULT_PROBE_REFINEMENTS)
}

impl DualNormProbe {
    /// Probe on the cell split from its Chebyshev center, refined `refinements`
    /// times (at least 1) with a coarse level one refinement below.
    pub fn new(points: &[Point2], refinements: usize) -> Result<Self> {
        let split = split_cell(points, 0)?;
        let r = refinements.max(1);
        let coarse = ProbeLevel::new(points, split.center, r - 1)?;
        let fine = ProbeLevel::new(points, split.center, r)?;
        Ok(Self { points: points.to_vec(), coarse, fine })
    }

    pub fn for_cell(mesh: &PolygonalMesh, cell: usize, refinements: usize) -> Result<Self> {
        Self::new(&mesh.cell_points(cell), refinements)
    }
}

/// |F|₋₁,K on two levels and the Richardson value, assuming the squared energy
/// error decays like h².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualNormEstimate {
    pub coarse: f64,
    pub fine: f64,
    pub richardson: f64,
}

fn extrapolate(coarse_sq: f64, fine_sq: f64) -> f64 {
    (fine_sq + (fine_sq - coarse_sq) / 3.0).max(fine_sq)
}

pub fn dual_seminorm(probe: &DualNormProbe, f: &Functional) -> DualNormEstimate {
    let c = probe.coarse.squared_norm(&probe.coarse.load(f));
    let fi = probe.fine.squared_norm(&probe.fine.load(f));
    DualNormEstimate { coarse: c.sqrt(), fine: fi.sqrt(), richardson: extrapolate(c, fi).sqrt() }
}

/// Extremes of s_K(γ*λ, γ*λ) / |γ*λ|²₋₁,K over flux polynomials with zero mean.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralBounds {
    pub dim: usize,
    pub rho: f64,
    pub m: f64,
    /// The same extremes against the fine probe level without extrapolation.
    pub rho_fine: f64,
    pub m_fine: f64,
}

fn generalized_extremes(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, f64)> {
    let chol = b.clone().cholesky().ok_or_else(|| Error::Solve("dual Gram matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(a.nrows(), a.nrows()))
        .ok_or_else(|| Error::Solve("singular dual Gram factor".into()))?;
    let c = &linv * a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let ev = c.symmetric_eigen().eigenvalues;
    if ev.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solve("eigenvalue computation failed".into()));
    }
    Ok((ev.min(), ev.max()))
}

pub fn stabilizer_spectral_bounds(
    mesh: &PolygonalMesh,
    cell: usize,
    stab: &ReferenceStabilizer,
    probe: &DualNormProbe,
) -> Result<SpectralBounds> {
    let kprime = stab.kprime;
    let nq = kprime + 1;
    let points = mesh.cell_points(cell);
    let split = split_cell(&points, cell)?;
    let basis = cell_basis(mesh, cell, 1);
    let blocks = assemble_stabilization(mesh, cell, &split, &basis, stab, &|_| 0.0)?;
    let ne = points.len();
    let nl = ne * nq;
    let mut a = DMatrix::zeros(nl, nl);
    for (i, blk) in blocks.blocks.iter().enumerate() {
        let sg = blk.solve(&blk.g);
        a.view_mut((i * nq, i * nq), (nq, nq)).copy_from(&(blk.g.transpose() * sg));
    }
    let edge_bases: Vec<EdgeLegendreBasis> = mesh.cell_edges[cell]
        .iter()
        .map(|&e| {
            let ed = &mesh.edges[e];
            EdgeLegendreBasis::new(mesh.vertices[ed.v[0]], mesh.vertices[ed.v[1]], kprime)
        })
        .collect();
    let loads = |level: &ProbeLevel| -> Vec<Vec<f64>> {
        (0..nl)
            .map(|idx| {
                let (ei, q) = (idx / nq, idx % nq);
                let eb = &edge_bases[ei];
                let f = Functional::boundary(|e, p| {
                    if e != ei {
                        return 0.0;
                    }
                    let s = (p - eb.a).dot(eb.b - eb.a) / eb.length();
                    eb.eval(s)[q]
                });
                level.load(&f)
            })
            .collect()
    };
    let bf = probe.fine.gram(&loads(&probe.fine));
    let bc = probe.coarse.gram(&loads(&probe.coarse));
    let binf = &bf + (&bf - &bc) / 3.0;
    // orthonormal complement of the constraint ∫_∂K λ = 0
    let mut c = DVector::zeros(nl);
    for (i, eb) in edge_bases.iter().enumerate() {
        c[i * nq] = eb.length().sqrt();
    }
    let c = c.normalize();
    let proj = DMatrix::identity(nl, nl) - &c * c.transpose();
    let eig = proj.symmetric_eigen();
    let cols: Vec<usize> = (0..nl).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let q = DMatrix::from_fn(nl, cols.len(), |r, j| eig.eigenvectors[(r, cols[j])]);
    let qt = q.transpose();
    let ar = &qt * &a * &q;
    let (rho, m) = generalized_extremes(&ar, &(&qt * &binf * &q))?;
    let (rho_fine, m_fine) = generalized_extremes(&ar, &(&qt * &bf * &q))?;
    Ok(SpectralBounds { dim: cols.len(), rho, m, rho_fine, m_fine })
}
