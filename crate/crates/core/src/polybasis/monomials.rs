use crate::mesh::Point2;

/// Scaled monomials ((x-x_K)/h_K)^a ((y-y_K)/h_K)^b with a+b <= k, graded lexicographic order.
#[derive(Clone, Debug)]
pub struct ScaledMonomialBasis {
    pub center: Point2,
    pub h: f64,
    pub degree: usize,
    pub exponents: Vec<(usize, usize)>,
}

pub fn monomial_exponents(k: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::with_capacity((k + 1) * (k + 2) / 2);
    for total in 0..=k {
        for b in 0..=total {
            e.push((total - b, b));
        }
    }
    e
}

pub fn dim_pk(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

impl ScaledMonomialBasis {
    pub fn new(center: Point2, h: f64, degree: usize) -> Self {
        Self { center, h, degree, exponents: monomial_exponents(degree) }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// Position of the exponent pair (a, b) in the graded lexicographic order.
    pub fn index_of(a: usize, b: usize) -> usize {
        let t = a + b;
        t * (t + 1) / 2 + b
    }

    fn powers(&self, p: Point2) -> (Vec<f64>, Vec<f64>) {
        let x = (p.x - self.center.x) / self.h;
        let y = (p.y - self.center.y) / self.h;
        let mut px = vec![1.0; self.degree + 1];
        let mut py = vec![1.0; self.degree + 1];
        for i in 1..=self.degree {
            px[i] = px[i - 1] * x;
            py[i] = py[i - 1] * y;
        }
        (px, py)
    }

    pub fn eval(&self, p: Point2) -> Vec<f64> {
        let (px, py) = self.powers(p);
        self.exponents.iter().map(|&(a, b)| px[a] * py[b]).collect()
    }

    /// Gradients with respect to physical coordinates.
    pub fn eval_grad(&self, p: Point2) -> Vec<[f64; 2]> {
        let (px, py) = self.powers(p);
        let s = 1.0 / self.h;
        self.exponents
            .iter()
            .map(|&(a, b)| {
                let gx = if a > 0 { a as f64 * px[a - 1] * py[b] * s } else { 0.0 };
                let gy = if b > 0 { b as f64 * px[a] * py[b - 1] * s } else { 0.0 };
                [gx, gy]
            })
            .collect()
    }

    /// Values and gradients at a list of points.
    pub fn eval_cell_basis(&self, points: &[Point2]) -> (Vec<Vec<f64>>, Vec<Vec<[f64; 2]>>) {
        let v = points.iter().map(|&p| self.eval(p)).collect();
        let g = points.iter().map(|&p| self.eval_grad(p)).collect();
        (v, g)
    }

    /// Laplacian of sum_j c_j m_j at a point.
    pub fn laplacian(&self, coeffs: &[f64], p: Point2) -> f64 {
        let (px, py) = self.powers(p);
        let s2 = 1.0 / (self.h * self.h);
        self.exponents
            .iter()
            .zip(coeffs)
            .map(|(&(a, b), c)| {
                let mut v = 0.0;
                if a >= 2 {
                    v += (a * (a - 1)) as f64 * px[a - 2] * py[b];
                }
                if b >= 2 {
                    v += (b * (b - 1)) as f64 * px[a] * py[b - 2];
                }
                c * v * s2
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_dimension() {
        assert_eq!(monomial_exponents(2), vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        for (i, &(a, b)) in monomial_exponents(7).iter().enumerate() {
            assert_eq!(ScaledMonomialBasis::index_of(a, b), i);
        }
        for k in 0..10 {
            assert_eq!(monomial_exponents(k).len(), dim_pk(k));
        }
    }

    #[test]
    fn constant_and_linear() {
        let c = Point2::new(0.3, 0.4);
        let b = ScaledMonomialBasis::new(c, 0.5, 3);
        let p = Point2::new(0.1, 0.9);
        assert_eq!(b.eval(p)[0], 1.0);
        assert_eq!(b.eval_grad(p)[0], [0.0, 0.0]);
        assert_eq!(b.eval(c)[1], 0.0);
        assert!((b.eval(Point2::new(0.8, 0.4))[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn x2y_against_symbolic() {
        let c = Point2::new(0.3, -0.2);
        let h = 0.7;
        let b = ScaledMonomialBasis::new(c, h, 3);
        let idx = b.exponents.iter().position(|&e| e == (2, 1)).unwrap();
        let p = Point2::new(0.81, 0.27);
        let x = (p.x - c.x) / h;
        let y = (p.y - c.y) / h;
        assert!((b.eval(p)[idx] - x * x * y).abs() < 1e-15);
        let g = b.eval_grad(p)[idx];
        assert!((g[0] - 2.0 * x * y / h).abs() < 1e-13);
        assert!((g[1] - x * x / h).abs() < 1e-13);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let c = Point2::new(0.5, 0.5);
        let h = 0.2;
        let b = ScaledMonomialBasis::new(c, h, 6);
        let p = Point2::new(0.57, 0.44);
        let step = 1e-6 * h;
        let g = b.eval_grad(p);
        let vxp = b.eval(Point2::new(p.x + step, p.y));
        let vxm = b.eval(Point2::new(p.x - step, p.y));
        let vyp = b.eval(Point2::new(p.x, p.y + step));
        let vym = b.eval(Point2::new(p.x, p.y - step));
        for j in 0..b.dim() {
            let fx = (vxp[j] - vxm[j]) / (2.0 * step);
            let fy = (vyp[j] - vym[j]) / (2.0 * step);
            let scale = g[j][0].abs().max(g[j][1].abs()).max(1.0 / h);
            assert!((fx - g[j][0]).abs() <= 1e-6 * scale);
            assert!((fy - g[j][1]).abs() <= 1e-6 * scale);
        }
    }
}
