use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::Point2;
use crate::polybasis::ScaledMonomialBasis;

/// Exact solution of -Δu = f with its derivatives.
pub trait ExactSolution: Sync {
    fn value(&self, p: Point2) -> f64;
    fn gradient(&self, p: Point2) -> Point2;
    /// -Δu.
    fn source(&self, p: Point2) -> f64;
    /// Spatial frequency used to decide on quadrature refinement; 0 for polynomials.
    fn wavenumber(&self) -> f64 {
        0.0
    }
}

/// u = cos(8πx) cos(8πy) / (128π²), so that f = cos(8πx) cos(8πy).
#[derive(Clone, Copy, Debug, Default)]
pub struct CosineSolution;

impl ExactSolution for CosineSolution {
    fn value(&self, p: Point2) -> f64 {
        let w = 8.0 * PI;
        (w * p.x).cos() * (w * p.y).cos() / (128.0 * PI * PI)
    }

    fn gradient(&self, p: Point2) -> Point2 {
        let w = 8.0 * PI;
        let s = -1.0 / (16.0 * PI);
        Point2::new(s * (w * p.x).sin() * (w * p.y).cos(), s * (w * p.x).cos() * (w * p.y).sin())
    }

    fn source(&self, p: Point2) -> f64 {
        let w = 8.0 * PI;
        (w * p.x).cos() * (w * p.y).cos()
    }

    fn wavenumber(&self) -> f64 {
        8.0 * PI
    }
}

/// Polynomial sum of c x^a y^b.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialSolution {
    pub terms: Vec<(usize, usize, f64)>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl PolynomialSolution {
    /// Random polynomial of total degree `k` with coefficients in [-1, 1].
    pub fn random(k: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for t in 0..=k {
            for b in 0..=t {
                terms.push((t - b, b, rng.random_range(-1.0..1.0)));
            }
        }
        Self { terms }
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|&(a, b, _)| a + b).max().unwrap_or(0)
    }

    /// Coefficients in a scaled monomial basis of degree at least `self.degree()`.
    pub fn coefficients_in(&self, basis: &ScaledMonomialBasis) -> Vec<f64> {
        let mut c = vec![0.0; basis.dim()];
        let (xc, yc, h) = (basis.center.x, basis.center.y, basis.h);
        for &(a, b, coef) in &self.terms {
            for i in 0..=a {
                let fx = binomial(a, i) * xc.powi((a - i) as i32) * h.powi(i as i32);
                for j in 0..=b {
                    let fy = binomial(b, j) * yc.powi((b - j) as i32) * h.powi(j as i32);
                    c[ScaledMonomialBasis::index_of(i, j)] += coef * fx * fy;
                }
            }
        }
        c
    }
}

impl ExactSolution for PolynomialSolution {
    fn value(&self, p: Point2) -> f64 {
        self.terms.iter().map(|&(a, b, c)| c * p.x.powi(a as i32) * p.y.powi(b as i32)).sum()
    }

    fn gradient(&self, p: Point2) -> Point2 {
        let mut g = Point2::default();
        for &(a, b, c) in &self.terms {
            if a > 0 {
                g.x += c * a as f64 * p.x.powi(a as i32 - 1) * p.y.powi(b as i32);
            }
            if b > 0 {
                g.y += c * b as f64 * p.x.powi(a as i32) * p.y.powi(b as i32 - 1);
            }
        }
        g
    }

    fn source(&self, p: Point2) -> f64 {
        let mut l = 0.0;
        for &(a, b, c) in &self.terms {
            if a > 1 {
                l += c * (a * (a - 1)) as f64 * p.x.powi(a as i32 - 2) * p.y.powi(b as i32);
            }
            if b > 1 {
                l += c * (b * (b - 1)) as f64 * p.x.powi(a as i32) * p.y.powi(b as i32 - 2);
            }
        }
        -l
    }
}
