use crate::mesh::Point2;
use crate::normtools::ExactSolution;

/// Data of a Poisson problem -Δu = f with Dirichlet and Neumann boundary values.
pub trait Problem: Sync {
    fn source(&self, p: Point2) -> f64;
    fn dirichlet(&self, p: Point2) -> f64;
    /// Prescribed flux ∇u·n for the outward unit normal `n`.
    fn neumann(&self, p: Point2, n: Point2) -> f64;
}

impl<T: ExactSolution + ?Sized> Problem for T {
    fn source(&self, p: Point2) -> f64 {
        ExactSolution::source(self, p)
    }

    fn dirichlet(&self, p: Point2) -> f64 {
        self.value(p)
    }

    fn neumann(&self, p: Point2, n: Point2) -> f64 {
        self.gradient(p).dot(n)
    }
}

/// Problem given by three closures.
pub struct DataProblem<F, G, N> {
    pub f: F,
    pub g: G,
    pub g_n: N,
}

impl<F, G, N> Problem for DataProblem<F, G, N>
where
    F: Fn(Point2) -> f64 + Sync,
    G: Fn(Point2) -> f64 + Sync,
    N: Fn(Point2, Point2) -> f64 + Sync,
{
    fn source(&self, p: Point2) -> f64 {
        (self.f)(p)
    }

    fn dirichlet(&self, p: Point2) -> f64 {
        (self.g)(p)
    }

    fn neumann(&self, p: Point2, n: Point2) -> f64 {
        (self.g_n)(p, n)
    }
}

/// Homogeneous data: f = 0, g = 0, g_N = 0.
pub fn zero_problem() -> DataProblem<fn(Point2) -> f64, fn(Point2) -> f64, fn(Point2, Point2) -> f64> {
    DataProblem { f: |_| 0.0, g: |_| 0.0, g_n: |_, _| 0.0 }
}
