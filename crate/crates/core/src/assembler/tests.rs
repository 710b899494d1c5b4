use nalgebra::{DMatrix, DVector};

use super::*;
use crate::mesh::{generate_hexagonal_mesh, split_cell, Point2, PolygonalMesh};
use crate::normtools::{ExactSolution, PolynomialSolution};
use crate::polybasis::{gauss_unit_rule, triangle_rule, EdgeLegendreBasis};
use crate::refstab::{build_reference_stabilizer_with_degree, ReferenceStabilizer};

fn single_cell(points: Vec<Point2>) -> PolygonalMesh {
    let n = points.len();
    PolygonalMesh::from_cells(points, vec![(0..n).collect()]).unwrap()
}

fn unit_square() -> PolygonalMesh {
    single_cell(vec![Point2::new(0., 0.), Point2::new(1., 0.), Point2::new(1., 1.), Point2::new(0., 1.)])
}

fn irregular_hexagon() -> PolygonalMesh {
    single_cell(vec![
        Point2::new(0.10, 0.05),
        Point2::new(0.55, 0.00),
        Point2::new(0.80, 0.30),
        Point2::new(0.70, 0.75),
        Point2::new(0.30, 0.85),
        Point2::new(0.02, 0.45),
    ])
}

fn stab_for(p: &MethodParams) -> ReferenceStabilizer {
    build_reference_stabilizer_with_degree(p.kprime, p.delta, p.moment_degree()).unwrap()
}

/// Flux coefficients of grad(u).n_K on each local edge.
fn flux_coefficients(mesh: &PolygonalMesh, cell: usize, u: &dyn ExactSolution, kprime: usize) -> DVector<f64> {
    let n = mesh.cells[cell].len();
    let nq = kprime + 1;
    let g = gauss_unit_rule(kprime + 8);
    let mut out = DVector::zeros(n * nq);
    for i in 0..n {
        let e = &mesh.edges[mesh.cell_edges[cell][i]];
        let eb = EdgeLegendreBasis::new(mesh.vertices[e.v[0]], mesh.vertices[e.v[1]], kprime);
        let nrm = mesh.outward_normal(cell, i);
        for (t, w) in g.points.iter().zip(&g.weights) {
            let s = t * e.length;
            let val = u.gradient(eb.point_at(s)).dot(nrm);
            for (q, m) in eb.eval(s).iter().enumerate() {
                out[i * nq + q] += w * e.length * val * m;
            }
        }
    }
    out
}

#[test]
fn volume_stiffness_constant_kernel_and_square_values() {
    let m = unit_square();
    let split = split_cell(&m.cell_points(0), 0).unwrap();
    let basis = cell_basis(&m, 0, 1);
    let a = assemble_volume_stiffness(&basis, &split, &triangle_rule(4));
    for j in 0..3 {
        assert_eq!(a[(0, j)], 0.0);
        assert_eq!(a[(j, 0)], 0.0);
    }
    assert!((a[(1, 1)] - 0.5).abs() < 1e-14);
    assert!((a[(2, 2)] - 0.5).abs() < 1e-14);
    assert!(a[(1, 2)].abs() < 1e-14);
    let basis3 = cell_basis(&m, 0, 3);
    let a3 = assemble_volume_stiffness(&basis3, &split, &triangle_rule(8));
    let ev = a3.symmetric_eigen().eigenvalues;
    let mut sorted: Vec<f64> = ev.iter().copied().collect();
    sorted.sort_by(f64::total_cmp);
    assert!(sorted[0].abs() < 1e-12 && sorted[1] > 1e-6);
}

#[test]
fn volume_stiffness_matches_refined_quadrature() {
    let m = irregular_hexagon();
    let split = split_cell(&m.cell_points(0), 0).unwrap();
    let basis = cell_basis(&m, 0, 3);
    let a = assemble_volume_stiffness(&basis, &split, &triangle_rule(8));
    let fine = triangle_rule(14);
    let mut oracle = DMatrix::zeros(basis.dim(), basis.dim());
    for map in &split.maps {
        // split every sub-triangle into four and integrate with a higher-order rule
        let c = [map.apply([0., 0.]), map.apply([1., 0.]), map.apply([0., 1.])];
        let mid = |a: Point2, b: Point2| (a + b) * 0.5;
        let subs = [
            [c[0], mid(c[0], c[1]), mid(c[0], c[2])],
            [mid(c[0], c[1]), c[1], mid(c[1], c[2])],
            [mid(c[0], c[2]), mid(c[1], c[2]), c[2]],
            [mid(c[1], c[2]), mid(c[0], c[2]), mid(c[0], c[1])],
        ];
        for s in subs {
            let (pts, wts) = fine.mapped([s[0].x, s[0].y], [s[1].x, s[1].y], [s[2].x, s[2].y]);
            for (p, w) in pts.iter().zip(&wts) {
                let g = basis.eval_grad(Point2::new(p[0], p[1]));
                for i in 0..basis.dim() {
                    for j in 0..basis.dim() {
                        oracle[(i, j)] += w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                    }
                }
            }
        }
    }
    assert!((&a - &oracle).amax() < 1e-12);
}

#[test]
fn boundary_coupling_values() {
    let m = unit_square();
    let basis = cell_basis(&m, 0, 2);
    let (b, mphi) = assemble_boundary_coupling(&m, 0, &basis, 2);
    assert_eq!(mphi, DMatrix::identity(12, 12));
    // constant flux mode against the constant cell function: |e| / sqrt(|e|)
    for i in 0..4 {
        assert!((b[(i * 3, 0)] - 1.0).abs() < 1e-14);
    }
    let hex = irregular_hexagon();
    let basis = cell_basis(&hex, 0, 4);
    let (b, _) = assemble_boundary_coupling(&hex, 0, &basis, 3);
    let g = gauss_unit_rule(30);
    for i in 0..6 {
        let e = &hex.edges[hex.cell_edges[0][i]];
        let eb = EdgeLegendreBasis::new(hex.vertices[e.v[0]], hex.vertices[e.v[1]], 3);
        for q in 0..4 {
            for j in 0..basis.dim() {
                let o: f64 = g
                    .points
                    .iter()
                    .zip(&g.weights)
                    .map(|(t, w)| {
                        let s = t * e.length;
                        w * e.length * eb.eval(s)[q] * basis.eval(eb.point_at(s))[j]
                    })
                    .sum();
                assert!((b[(i * 4 + q, j)] - o).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn green_identity_zeroes_stabilized_residual() {
    for k in 1..=5 {
        let p = MethodParams::new(k);
        let stab = stab_for(&p);
        for m in [unit_square(), irregular_hexagon()] {
            let u = PolynomialSolution::random(k, 11 + k as u64);
            let split = split_cell(&m.cell_points(0), 0).unwrap();
            let basis = cell_basis(&m, 0, k);
            let f = |x: Point2| u.source(x);
            let st = assemble_stabilization(&m, 0, &split, &basis, &stab, &f).unwrap();
            let uc = DVector::from_vec(u.coefficients_in(&basis));
            let lam = flux_coefficients(&m, 0, &u, p.kprime);
            let eta = st.eta(&uc, &lam);
            let scale = st.blocks.iter().map(|b| b.e.amax()).fold(0.0, f64::max) * uc.amax();
            for (e, fl) in eta.iter().zip(st.load()) {
                let d = (e - &fl).amax();
                assert!(d < 1e-11 * scale.max(1.0), "k={k}: {d}");
            }
        }
    }
}

#[test]
fn stabilization_zero_and_cauchy_schwarz() {
    let p = MethodParams::new(3);
    let stab = stab_for(&p);
    let m = irregular_hexagon();
    let split = split_cell(&m.cell_points(0), 0).unwrap();
    let basis = cell_basis(&m, 0, 3);
    let st = assemble_stabilization(&m, 0, &split, &basis, &stab, &|_| 0.0).unwrap();
    let z = st.eta(&DVector::zeros(10), &DVector::zeros(24));
    assert_eq!(st.s_k(&z, &z), 0.0);
    for b in &st.blocks {
        assert!(b.used_cholesky());
        assert!(b.s.clone().symmetric_eigen().eigenvalues.min() > 0.0);
    }
    let mut seed = 1u64;
    let mut rnd = |n: usize| {
        DVector::from_fn(n, |_, _| {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    };
    for _ in 0..50 {
        let f = st.eta(&rnd(10), &rnd(24));
        let g = st.zeta(&rnd(10), &rnd(24), 1.0);
        let lhs = st.s_k(&f, &g).abs();
        let rhs = st.s_k(&f, &f).sqrt() * st.s_k(&g, &g).sqrt();
        assert!(lhs <= rhs * (1.0 + 1e-12));
    }
}

#[test]
fn local_residual_vanishes_for_exact_data() {
    let mesh = generate_hexagonal_mesh(5).unwrap();
    for k in 1..=4 {
        let p = MethodParams::new(k);
        let stab = stab_for(&p);
        let u = PolynomialSolution::random(k, 5 + k as u64);
        for c in 0..mesh.num_cells() {
            let split = split_cell(&mesh.cell_points(c), c).unwrap();
            let sys = assemble_local_hybrid(&mesh, c, &split, &p, &stab, &|x| u.source(x)).unwrap();
            let basis = cell_basis(&mesh, c, k);
            let uc = DVector::from_vec(u.coefficients_in(&basis));
            let lam = flux_coefficients(&mesh, c, &u, p.kprime);
            let phi = &sys.b * &uc;
            let mut x = DVector::zeros(uc.len() + lam.len());
            x.rows_mut(0, uc.len()).copy_from(&uc);
            x.rows_mut(uc.len(), lam.len()).copy_from(&lam);
            let mut rhs = sys.rhs.clone();
            let nu = uc.len();
            for i in 0..lam.len() {
                rhs[nu + i] += phi[i];
            }
            let res = &sys.matrix * &x - &rhs;
            let scale = (sys.matrix.amax() * x.amax()).max(rhs.amax());
            assert!(res.amax() <= 1e-10 * scale, "k={k} cell={c}: {}", res.amax() / scale);
        }
    }
}

#[test]
fn sign_pattern_for_t() {
    let m = irregular_hexagon();
    let split = split_cell(&m.cell_points(0), 0).unwrap();
    let mut p = MethodParams::new(2);
    let stab = stab_for(&p);
    let f = |x: Point2| x.x * x.y;
    let plus = assemble_local_hybrid(&m, 0, &split, &p, &stab, &f).unwrap();
    p.t = -1.0;
    let minus = assemble_local_hybrid(&m, 0, &split, &p, &stab, &f).unwrap();
    p.alpha = 0.0;
    let plain = assemble_local_hybrid(&m, 0, &split, &p, &stab, &f).unwrap();
    let nu = plus.spaces.n_u;
    let nl = plus.spaces.n_lambda;
    // top rows carry t, bottom rows do not
    let top = |s: &LocalSystem| s.matrix.rows(0, nu).into_owned();
    let bot = |s: &LocalSystem| s.matrix.rows(nu, nl).into_owned();
    let dp = top(&plus) - top(&plain);
    let dm = top(&minus) - top(&plain);
    assert!((&dp + &dm).amax() < 1e-12 * dp.amax());
    assert!((bot(&plus) - bot(&minus)).amax() == 0.0);
    // alpha = 0 reduces to the plain hybrid form
    assert!((plain.matrix.view((0, 0), (nu, nu)) - &plain.a).amax() == 0.0);
    assert!((plain.matrix.view((0, nu), (nu, nl)) + plain.b.transpose()).amax() == 0.0);
    assert!((plain.matrix.view((nu, 0), (nl, nu)) - &plain.b).amax() == 0.0);
    assert!(plain.matrix.view((nu, nu), (nl, nl)).amax() == 0.0);
}

#[test]
fn condensation_matches_dense_elimination() {
    let m = irregular_hexagon();
    let split = split_cell(&m.cell_points(0), 0).unwrap();
    let p = MethodParams::new(3);
    let stab = stab_for(&p);
    let sys = assemble_local_hybrid(&m, 0, &split, &p, &stab, &|x| x.x.sin()).unwrap();
    let ce = static_condense(&sys).unwrap();
    let inv = sys.matrix.clone().try_inverse().unwrap();
    let nu = sys.spaces.n_u;
    let nl = sys.spaces.n_lambda;
    let oracle = inv.view((nu, nu), (nl, nl)).into_owned();
    assert!((&ce.schur - &oracle).amax() < 1e-11 * oracle.amax());
    let zero = assemble_local_hybrid(&m, 0, &split, &p, &stab, &|_| 0.0).unwrap();
    let cz = static_condense(&zero).unwrap();
    assert_eq!(cz.load.amax(), 0.0);
}

#[test]
fn square_patch_reproduces_linear_function() {
    let m = unit_square();
    let split = split_cell(&m.cell_points(0), 0).unwrap();
    let p = MethodParams::new(2);
    let stab = stab_for(&p);
    let sys = assemble_local_hybrid(&m, 0, &split, &p, &stab, &|_| 0.0).unwrap();
    let ce = static_condense(&sys).unwrap();
    let u = PolynomialSolution { terms: vec![(1, 0, 1.0)] };
    let basis = cell_basis(&m, 0, 2);
    let uc = DVector::from_vec(u.coefficients_in(&basis));
    let phi = &sys.b * &uc;
    let (ur, lr) = ce.recover(&phi);
    assert!((&ur - &uc).amax() < 1e-10);
    let lam = flux_coefficients(&m, 0, &u, 2);
    assert!((&lr - &lam).amax() < 1e-10);
    // residual of the recovered local system
    let mut x = DVector::zeros(ur.len() + lr.len());
    x.rows_mut(0, ur.len()).copy_from(&ur);
    x.rows_mut(ur.len(), lr.len()).copy_from(&lr);
    let mut rhs = sys.rhs.clone();
    for i in 0..phi.len() {
        rhs[ur.len() + i] += phi[i];
    }
    assert!((&sys.matrix * &x - &rhs).amax() <= 1e-10 * rhs.amax().max(1.0));
}

#[test]
fn starting_vertex_relabel_invariance() {
    let m = irregular_hexagon();
    let pts = m.cell_points(0);
    let mut rot = pts.clone();
    rot.rotate_left(2);
    let m2 = single_cell(rot);
    let p = MethodParams::new(3);
    let stab = stab_for(&p);
    let eig = |mesh: &PolygonalMesh| {
        let split = split_cell(&mesh.cell_points(0), 0).unwrap();
        let sys = assemble_local_hybrid(mesh, 0, &split, &p, &stab, &|_| 0.0).unwrap();
        let ce = static_condense(&sys).unwrap();
        let mut ev: Vec<f64> = ce.schur.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let mut sv: Vec<f64> = ce.schur.singular_values().iter().copied().collect();
        sv.sort_by(f64::total_cmp);
        (ev, sv)
    };
    let (_, s1) = eig(&m);
    let (_, s2) = eig(&m2);
    let scale = s1.last().unwrap();
    for (a, b) in s1.iter().zip(&s2) {
        assert!((a - b).abs() < 1e-11 * scale, "{a} {b}");
    }
}
