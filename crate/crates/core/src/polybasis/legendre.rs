use crate::mesh::Point2;

/// Values of the L²(0,1)-orthonormal Legendre polynomials sqrt(2q+1) P_q(2s-1), q = 0..=degree.
pub fn unit_legendre(degree: usize, s: f64) -> Vec<f64> {
    let x = 2.0 * s - 1.0;
    let mut p = Vec::with_capacity(degree + 1);
    p.push(1.0);
    if degree >= 1 {
        p.push(x);
    }
    for k in 2..=degree {
        let kf = k as f64;
        let v = ((2.0 * kf - 1.0) * x * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
        p.push(v);
    }
    for (q, v) in p.iter_mut().enumerate() {
        *v *= (2.0 * q as f64 + 1.0).sqrt();
    }
    p
}

/// L²(e)-orthonormal Legendre basis on a straight edge, parametrized by arc length from `a`.
#[derive(Clone, Debug)]
pub struct EdgeLegendreBasis {
    pub a: Point2,
    pub b: Point2,
    pub degree: usize,
}

impl EdgeLegendreBasis {
    pub fn new(a: Point2, b: Point2, degree: usize) -> Self {
        Self { a, b, degree }
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    /// Values of all basis functions at arc length `s` measured from `a`.
    pub fn eval(&self, s: f64) -> Vec<f64> {
        let l = self.length();
        let scale = 1.0 / l.sqrt();
        let mut v = unit_legendre(self.degree, s / l);
        v.iter_mut().for_each(|x| *x *= scale);
        v
    }

    /// Row-major matrix of values, one row per parameter.
    pub fn eval_many(&self, s: &[f64]) -> Vec<Vec<f64>> {
        s.iter().map(|&t| self.eval(t)).collect()
    }

    pub fn point_at(&self, s: f64) -> Point2 {
        let t = s / self.length();
        self.a + (self.b - self.a) * t
    }
}
