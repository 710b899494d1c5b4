use super::quadrature::triangle_rule;

/// L²-orthonormal basis of P_d on the reference triangle built from collapsed coordinates.
#[derive(Clone, Debug)]
pub struct OrthonormalTriangleBasis {
    pub degree: usize,
    pub indices: Vec<(usize, usize)>,
    norms: Vec<f64>,
}

fn jacobi(n: usize, a: f64, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push((a + 1.0) + (a + 2.0) * (x - 1.0) / 2.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let c = 2.0 * kf + a;
        let num1 = (c - 1.0) * (c * (c - 2.0) * x + a * a);
        let num2 = 2.0 * (kf + a - 1.0) * (kf - 1.0) * c;
        let den = 2.0 * kf * (kf + a) * (c - 2.0);
        let v = (num1 * p[k - 1] - num2 * p[k - 2]) / den;
        p.push(v);
    }
    p
}

impl OrthonormalTriangleBasis {
    pub fn new(degree: usize) -> Self {
        let mut indices = Vec::new();
        for total in 0..=degree {
            for j in 0..=total {
                indices.push((total - j, j));
            }
        }
        let mut b = Self { degree, indices, norms: Vec::new() };
        b.norms = vec![1.0; b.indices.len()];
        let rule = triangle_rule(2 * degree);
        let mut nrm = vec![0.0; b.indices.len()];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            for (n, v) in nrm.iter_mut().zip(b.eval_raw(p[0], p[1])) {
                *n += w * v * v;
            }
        }
        b.norms = nrm.iter().map(|n| 1.0 / n.sqrt()).collect();
        b
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    fn eval_raw(&self, x: f64, y: f64) -> Vec<f64> {
        let d = self.degree;
        let s = 1.0 - y;
        let t = 2.0 * x - s;
        let mut q = Vec::with_capacity(d + 1);
        q.push(1.0);
        if d >= 1 {
            q.push(t);
        }
        for i in 1..d {
            let fi = i as f64;
            let v = ((2.0 * fi + 1.0) * t * q[i] - fi * s * s * q[i - 1]) / (fi + 1.0);
            q.push(v);
        }
        let z = 2.0 * y - 1.0;
        let jac: Vec<Vec<f64>> = (0..=d).map(|i| jacobi(d - i, 2.0 * i as f64 + 1.0, z)).collect();
        self.indices
            .iter()
            .zip(&self.norms)
            .map(|(&(i, j), n)| q[i] * jac[i][j] * n)
            .collect()
    }

    pub fn eval(&self, x: f64, y: f64) -> Vec<f64> {
        self.eval_raw(x, y)
    }
}
