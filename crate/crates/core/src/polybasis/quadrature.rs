use std::f64::consts::PI;

/// One-dimensional rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct Rule1d {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Rule on the reference triangle conv{(0,0), (1,0), (0,1)}.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Gauss-Legendre rule with `n` nodes on [-1, 1], exact through degree 2n-1.
pub fn gauss_edge_rule(n: usize) -> Rule1d {
    assert!(n >= 1, "Gauss rule needs at least one point");
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    Rule1d { points, weights, degree: 2 * n - 1 }
}

/// Gauss-Legendre rule mapped to [0, 1].
pub fn gauss_unit_rule(n: usize) -> Rule1d {
    let r = gauss_edge_rule(n);
    Rule1d {
        points: r.points.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights: r.weights.iter().map(|w| 0.5 * w).collect(),
        degree: r.degree,
    }
}

/// Collapsed (Duffy) tensor Gauss rule on the reference triangle, exact through degree `d`.
pub fn triangle_rule(d: usize) -> TriangleRule {
    let n = (d + 2).div_ceil(2).max(1);
    let g = gauss_unit_rule(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (v, wv) in g.points.iter().zip(&g.weights) {
        for (u, wu) in g.points.iter().zip(&g.weights) {
            points.push([u * (1.0 - v), *v]);
            weights.push(wu * wv * (1.0 - v));
        }
    }
    TriangleRule { points, weights, degree: d }
}

/// Legendre polynomial P_n and its derivative at x.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = if (x * x - 1.0).abs() < 1e-300 {
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * (n * (n + 1)) as f64 / 2.0
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, d)
}

impl TriangleRule {
    /// Maps the rule onto the triangle (a, b, c) with a at the reference origin.
    pub fn mapped(&self, a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> (Vec<[f64; 2]>, Vec<f64>) {
        let j = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
        let det = (j[0][0] * j[1][1] - j[0][1] * j[1][0]).abs();
        let pts = self
            .points
            .iter()
            .map(|p| [a[0] + j[0][0] * p[0] + j[0][1] * p[1], a[1] + j[1][0] * p[0] + j[1][1] * p[1]])
            .collect();
        let w = self.weights.iter().map(|w| w * det).collect();
        (pts, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|i| i as f64).product()
    }

    #[test]
    fn classical_small_rules() {
        let r = gauss_edge_rule(1);
        assert_eq!(r.points, vec![0.0]);
        assert!((r.weights[0] - 2.0).abs() < 1e-15);
        let r = gauss_edge_rule(2);
        assert!((r.points[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r.points[0] + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15 && (r.weights[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn x6_with_four_points() {
        let r = gauss_edge_rule(4);
        let s: f64 = r.points.iter().zip(&r.weights).map(|(x, w)| w * x.powi(6)).sum();
        assert!((s - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_exactness_through_declared_degree() {
        for n in 1..=30 {
            let r = gauss_edge_rule(n);
            let wsum: f64 = r.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-14, "n={n}");
            for p in 0..=r.degree {
                let s: f64 = r.points.iter().zip(&r.weights).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((s - exact).abs() < 1e-13, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn triangle_basic_moments() {
        let r = triangle_rule(2);
        let m = |a: i32, b: i32| -> f64 {
            r.points.iter().zip(&r.weights).map(|(p, w)| w * p[0].powi(a) * p[1].powi(b)).sum()
        };
        assert!((m(0, 0) - 0.5).abs() < 1e-15);
        assert!((m(1, 0) - 1.0 / 6.0).abs() < 1e-15);
        assert!((m(1, 1) - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_x5y3() {
        let r = triangle_rule(8);
        let s: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[0].powi(5) * p[1].powi(3)).sum();
        let exact = factorial(5) * factorial(3) / factorial(10);
        assert!((s - exact).abs() < 1e-15);
    }

    #[test]
    fn triangle_exactness_through_declared_degree() {
        for d in 0..=24 {
            let r = triangle_rule(d);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            for a in 0..=d {
                for b in 0..=(d - a) {
                    let s: f64 = r
                        .points
                        .iter()
                        .zip(&r.weights)
                        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                        .sum();
                    let exact = factorial(a as u32) * factorial(b as u32) / factorial((a + b + 2) as u32);
                    assert!((s - exact).abs() < 1e-14 * exact.max(1e-3), "d={d} a={a} b={b}");
                }
            }
        }
    }
}
