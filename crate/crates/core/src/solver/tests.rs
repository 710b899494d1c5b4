use nalgebra::{DMatrix, DVector};

use super::*;
use crate::assembler::{assemble_local_hybrid, cell_basis, static_condense, MethodParams};
use crate::mesh::{generate_hexagonal_mesh, subtriangulate, BoundaryTag, Point2, PolygonalMesh};
use crate::normtools::{CosineSolution, ExactSolution, PolynomialSolution};
use crate::polybasis::{gauss_unit_rule, EdgeLegendreBasis};
use crate::refstab::shared_stabilizer;

fn two_squares() -> PolygonalMesh {
    let v = vec![
        Point2::new(0., 0.),
        Point2::new(1., 0.),
        Point2::new(2., 0.),
        Point2::new(2., 1.),
        Point2::new(1., 1.),
        Point2::new(0., 1.),
    ];
    PolygonalMesh::from_cells(v, vec![vec![0, 1, 4, 5], vec![1, 2, 3, 4]]).unwrap()
}

fn square() -> PolygonalMesh {
    let v = vec![Point2::new(0., 0.), Point2::new(1., 0.), Point2::new(1., 1.), Point2::new(0., 1.)];
    PolygonalMesh::from_cells(v, vec![vec![0, 1, 2, 3]]).unwrap().retag_boundary(|_| BoundaryTag::Dirichlet)
}

fn fine_projection(a: Point2, b: Point2, kprime: usize, f: &dyn Fn(Point2) -> f64) -> Vec<f64> {
    let eb = EdgeLegendreBasis::new(a, b, kprime);
    let l = eb.length();
    let g = gauss_unit_rule(20);
    let pieces = 400;
    let mut out = vec![0.0; kprime + 1];
    for p in 0..pieces {
        for (t, w) in g.points.iter().zip(&g.weights) {
            let s = (p as f64 + t) * l / pieces as f64;
            let v = f(eb.point_at(s)) * w * l / pieces as f64;
            for (o, m) in out.iter_mut().zip(eb.eval(s)) {
                *o += v * m;
            }
        }
    }
    out
}

fn exact_coefficients(mesh: &PolygonalMesh, u: &PolynomialSolution, k: usize) -> Vec<DVector<f64>> {
    (0..mesh.num_cells()).map(|c| DVector::from_vec(u.coefficients_in(&cell_basis(mesh, c, k)))).collect()
}

#[test]
fn skeleton_projection_values() {
    let m = two_squares();
    let s = build_skeleton_space(&m, 2, &|_| 0.0);
    assert!(s.dirichlet_values.iter().all(|&v| v == 0.0));
    let s = build_skeleton_space(&m, 2, &|_| 1.0);
    for (e, edge) in m.edges.iter().enumerate() {
        let d = s.dirichlet(e);
        if edge.tag == BoundaryTag::Dirichlet {
            assert!((d[0] - edge.length.sqrt()).abs() < 1e-14);
            assert!(d[1].abs() < 1e-14 && d[2].abs() < 1e-14);
        } else {
            assert!(s.edge_dof[e].is_some());
        }
    }
    assert_eq!(s.num_free(), 3 * s.free_edges.len());
    let u = CosineSolution;
    let (a, b) = (Point2::new(0.13, 0.2), Point2::new(0.9, 0.71));
    let p = edge_projection(a, b, 3, &|x| u.value(x));
    let o = fine_projection(a, b, 3, &|x| u.value(x));
    for (x, y) in p.iter().zip(&o) {
        assert!((x - y).abs() < 1e-12, "{x} {y}");
    }
}

#[test]
fn neumann_projection_values() {
    let m = two_squares();
    assert!(apply_neumann(&m, 3, &|_, _| 0.0).iter().all(|&v| v == 0.0));
    let n1 = apply_neumann(&m, 3, &|_, _| 1.0);
    let top: Vec<usize> = (0..m.num_edges()).filter(|&e| m.edges[e].tag == BoundaryTag::Neumann).collect();
    assert_eq!(top.len(), 2);
    for &e in &top {
        assert!((n1[e * 4] - 1.0).abs() < 1e-14);
        assert!(m.edges[e].normal.y > 0.99);
    }
    let mesh = generate_hexagonal_mesh(6).unwrap();
    let u = CosineSolution;
    let nm = apply_neumann(&mesh, 3, &|p, n| u.gradient(p).dot(n));
    for (e, edge) in mesh.edges.iter().enumerate() {
        if edge.tag != BoundaryTag::Neumann {
            continue;
        }
        let w = 8.0 * std::f64::consts::PI;
        let sym = |p: Point2| -(w * p.x).cos() * (w * p.y).sin() / (16.0 * std::f64::consts::PI);
        let o = fine_projection(mesh.vertices[edge.v[0]], mesh.vertices[edge.v[1]], 3, &sym);
        for q in 0..4 {
            assert!((nm[e * 4 + q] - o[q]).abs() < 1e-12);
        }
    }
}

#[test]
fn one_cell_dirichlet_patch() {
    let m = square();
    let params = MethodParams::new(2);
    let u = PolynomialSolution { terms: vec![(1, 0, 1.0)] };
    let out = solve_problem(&m, &params, &u, &SolverOptions::default()).unwrap();
    assert_eq!(out.report.dim, 0);
    let ex = exact_coefficients(&m, &u, 2);
    assert!((&out.solution.u[0] - &ex[0]).amax() < 1e-10);
    let zero = solve_problem(&m, &params, &zero_problem(), &SolverOptions::default()).unwrap();
    assert_eq!(zero.solution.u[0].amax(), 0.0);
    assert_eq!(zero.solution.lambda[0].amax(), 0.0);
}

#[test]
fn two_cell_assembly_and_dense_solve() {
    let m = two_squares();
    let params = MethodParams::new(2);
    let stab = shared_stabilizer(params.kprime, params.delta, params.moment_degree()).unwrap();
    let split = subtriangulate(&m).unwrap();
    let u = CosineSolution;
    let skel = build_skeleton_space(&m, params.kprime, &|p| u.value(p));
    let neu = apply_neumann(&m, params.kprime, &|p, n| u.gradient(p).dot(n));
    let cells = condense_all(&m, &split, &params, &stab, &u).unwrap();
    let sys = assemble_global(&m, &skel, &neu, &cells).unwrap();
    // interior edge plus two Neumann edges
    assert_eq!(sys.dim(), 3 * skel.free_edges.len());
    assert_eq!(skel.free_edges.len(), 3);
    let shared = (0..m.num_edges()).find(|&e| m.edges[e].right.is_some()).unwrap();
    let d = skel.edge_dof[shared].unwrap();
    let local = |c: usize| m.cell_edges[c].iter().position(|&e| e == shared).unwrap();
    let (i0, i1) = (local(0), local(1));
    for qr in 0..3 {
        for qc in 0..3 {
            let want = cells[0].schur[(i0 * 3 + qr, i0 * 3 + qc)] + cells[1].schur[(i1 * 3 + qr, i1 * 3 + qc)];
            assert!((sys.matrix.get(d + qr, d + qc) - want).abs() < 1e-14 * want.abs().max(1.0));
        }
    }
    let dense = DMatrix::from_fn(sys.dim(), sys.dim(), |i, j| sys.matrix.get(i, j));
    let x_dense = dense.lu().solve(&DVector::from_vec(sys.rhs.clone())).unwrap();
    let (x, rep) = solve_global(&sys, &SolverOptions::default()).unwrap();
    assert!(rep.residual <= 1e-12);
    for (a, b) in x.iter().zip(x_dense.iter()) {
        assert!((a - b).abs() < 1e-11 * x_dense.amax());
    }
    let zero = SkeletonSystem { matrix: sys.matrix.clone(), rhs: vec![0.0; sys.dim()], asymmetry: 0.0, block: sys.block };
    assert!(solve_global(&zero, &SolverOptions::default()).unwrap().0.iter().all(|&v| v == 0.0));
}

#[test]
fn hexagonal_residual_and_gluing() {
    let mesh = generate_hexagonal_mesh(6).unwrap();
    let params = MethodParams::new(2);
    let out = solve_problem(&mesh, &params, &CosineSolution, &SolverOptions::default()).unwrap();
    assert!(out.report.residual <= 1e-12);
    let scale = out.solution.lambda.iter().map(|l| l.amax()).fold(0.0, f64::max);
    let glue = gluing_residual(&mesh, &out.skeleton, &out.neumann, &out.solution);
    assert!(glue <= 1e-10 * scale.max(1.0), "{glue}");
}

#[test]
fn polynomial_patch_test() {
    let mesh = generate_hexagonal_mesh(5).unwrap();
    for k in 1..=4 {
        let u = PolynomialSolution::random(k, 100 + k as u64);
        let params = MethodParams::new(k);
        let out = solve_problem(&mesh, &params, &u, &SolverOptions::default()).unwrap();
        let ex = exact_coefficients(&mesh, &u, k);
        let scale = ex.iter().map(|v| v.amax()).fold(0.0, f64::max);
        let err = out.solution.u.iter().zip(&ex).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
        assert!(err <= 1e-9 * scale, "k={k}: {err}");
    }
}

#[test]
fn solution_map_is_affine() {
    let mesh = generate_hexagonal_mesh(4).unwrap();
    let params = MethodParams::new(2);
    let opts = SolverOptions::default();
    let a = DataProblem { f: |p: Point2| p.x.sin(), g: |p: Point2| p.y * p.y, g_n: |p: Point2, _n: Point2| p.x };
    let b = DataProblem { f: |p: Point2| 1.0 + p.y, g: |p: Point2| (3.0 * p.x).cos(), g_n: |_p: Point2, n: Point2| n.y };
    let ab = DataProblem {
        f: |p: Point2| p.x.sin() + 2.0 * (1.0 + p.y),
        g: |p: Point2| p.y * p.y + 2.0 * (3.0 * p.x).cos(),
        g_n: |p: Point2, n: Point2| p.x + 2.0 * n.y,
    };
    let sa = solve_problem(&mesh, &params, &a, &opts).unwrap().solution;
    let sb = solve_problem(&mesh, &params, &b, &opts).unwrap().solution;
    let sab = solve_problem(&mesh, &params, &ab, &opts).unwrap().solution;
    for c in 0..mesh.num_cells() {
        let lin = &sa.u[c] + &sb.u[c] * 2.0;
        assert!((&sab.u[c] - lin).amax() < 1e-10 * sab.u[c].amax().max(1.0));
    }
}

#[test]
fn reconstruction_matches_condensed_recovery() {
    let mesh = generate_hexagonal_mesh(3).unwrap();
    let params = MethodParams::new(3);
    let u = CosineSolution;
    let out = solve_problem(&mesh, &params, &u, &SolverOptions::default()).unwrap();
    let stab = shared_stabilizer(params.kprime, params.delta, params.moment_degree()).unwrap();
    let split = subtriangulate(&mesh).unwrap();
    let nq = params.kprime + 1;
    for c in [0, mesh.num_cells() / 2] {
        let sys = assemble_local_hybrid(&mesh, c, &split.cells[c], &params, &stab, &|p| ExactSolution::source(&u, p)).unwrap();
        let ce = static_condense(&sys).unwrap();
        let phi = DVector::from_iterator(
            mesh.cell_edges[c].len() * nq,
            mesh.cell_edges[c].iter().flat_map(|&e| out.solution.phi[e * nq..(e + 1) * nq].to_vec()),
        );
        let (ur, lr) = ce.recover(&phi);
        assert!((&ur - &out.solution.u[c]).amax() < 1e-10 * ur.amax());
        assert!((&lr - &out.solution.lambda[c]).amax() < 1e-10 * lr.amax());
    }
}

#[test]
fn solution_csv_round_trip() {
    let mesh = generate_hexagonal_mesh(2).unwrap();
    let out = solve_problem(&mesh, &MethodParams::new(1), &CosineSolution, &SolverOptions::default()).unwrap();
    let text = solution_to_csv(&out.solution);
    let back = parse_solution_csv(&text).unwrap();
    assert_eq!(back.len(), mesh.num_cells());
    for (a, b) in back.iter().zip(&out.solution.u) {
        assert_eq!(a.as_slice(), b.as_slice());
    }
    assert!(parse_solution_csv("cell,alpha,value\n1,0,1.0\n").is_err());
}
