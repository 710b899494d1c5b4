use crate::mesh::{BoundaryTag, Point2, PolygonalMesh};
use crate::polybasis::{gauss_unit_rule, EdgeLegendreBasis};

/// L² projection of `f` onto the orthonormal Legendre basis of degree `kprime` on
/// the segment a -> b. A composite Gauss rule keeps oscillatory data accurate.
pub fn edge_projection(a: Point2, b: Point2, kprime: usize, f: &dyn Fn(Point2) -> f64) -> Vec<f64> {
    let eb = EdgeLegendreBasis::new(a, b, kprime);
    let l = eb.length();
    let rule = gauss_unit_rule(kprime + 12);
    let pieces = (l * 16.0).ceil().max(1.0) as usize;
    let mut out = vec![0.0; kprime + 1];
    for piece in 0..pieces {
        let s0 = l * piece as f64 / pieces as f64;
        let ds = l / pieces as f64;
        for (t, w) in rule.points.iter().zip(&rule.weights) {
            let s = s0 + t * ds;
            let v = f(eb.point_at(s)) * w * ds;
            for (o, m) in out.iter_mut().zip(eb.eval(s)) {
                *o += v * m;
            }
        }
    }
    out
}

/// Trace unknowns on the skeleton. Interior and Neumann edges carry free
/// coefficients; Dirichlet edges carry the projection of the boundary data.
#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonSpace {
    pub kprime: usize,
    /// First global free unknown of each edge, `None` on Dirichlet edges.
    pub edge_dof: Vec<Option<usize>>,
    pub free_edges: Vec<usize>,
    /// Edge coefficients, `(k'+1)` per edge, zero on free edges.
    pub dirichlet_values: Vec<f64>,
}

impl SkeletonSpace {
    pub fn modes(&self) -> usize {
        self.kprime + 1
    }

    pub fn num_free(&self) -> usize {
        self.free_edges.len() * self.modes()
    }

    pub fn dirichlet(&self, edge: usize) -> &[f64] {
        let nq = self.modes();
        &self.dirichlet_values[edge * nq..(edge + 1) * nq]
    }

    /// Full per-edge trace coefficients from the free unknowns.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        assert_eq!(free.len(), self.num_free());
        let nq = self.modes();
        let mut out = self.dirichlet_values.clone();
        for (e, d) in self.edge_dof.iter().enumerate() {
            if let Some(d) = d {
                out[e * nq..(e + 1) * nq].copy_from_slice(&free[*d..d + nq]);
            }
        }
        out
    }
}

pub fn build_skeleton_space(mesh: &PolygonalMesh, kprime: usize, g: &dyn Fn(Point2) -> f64) -> SkeletonSpace {
    let nq = kprime + 1;
    let mut edge_dof = vec![None; mesh.num_edges()];
    let mut free_edges = Vec::new();
    let mut dirichlet_values = vec![0.0; mesh.num_edges() * nq];
    for (e, edge) in mesh.edges.iter().enumerate() {
        if edge.tag == BoundaryTag::Dirichlet {
            let c = edge_projection(mesh.vertices[edge.v[0]], mesh.vertices[edge.v[1]], kprime, g);
            dirichlet_values[e * nq..(e + 1) * nq].copy_from_slice(&c);
        } else {
            edge_dof[e] = Some(free_edges.len() * nq);
            free_edges.push(e);
        }
    }
    SkeletonSpace { kprime, edge_dof, free_edges, dirichlet_values }
}

/// Projected Neumann flux coefficients per edge, zero away from Neumann edges.
/// `g_n` receives the point and the outward unit normal.
pub fn apply_neumann(mesh: &PolygonalMesh, kprime: usize, g_n: &dyn Fn(Point2, Point2) -> f64) -> Vec<f64> {
    let nq = kprime + 1;
    let mut out = vec![0.0; mesh.num_edges() * nq];
    for (e, edge) in mesh.edges.iter().enumerate() {
        if edge.tag == BoundaryTag::Neumann {
            let n = edge.normal;
            let c = edge_projection(mesh.vertices[edge.v[0]], mesh.vertices[edge.v[1]], kprime, &|p| g_n(p, n));
            out[e * nq..(e + 1) * nq].copy_from_slice(&c);
        }
    }
    out
}
