use super::*;

#[test]
fn config_parsing() {
    let text = "# study\nexperiment = edge_shrink\nmesh = hexa\nsizes = 4, 8\nk = 2,3\nkprime = k-1\nshrink = 1, 2^-4\ndelta = const:0.125\ntol = 1e-11\ntiming = off\noutput = out\n";
    let c = ExperimentConfig::parse(text).unwrap();
    assert_eq!(c.kind, ExperimentKind::EdgeShrink);
    assert_eq!(c.sizes, vec![4, 8]);
    assert_eq!(c.ks, vec![2, 3]);
    assert_eq!(c.kprime, KPrimeRule::KMinus1);
    assert_eq!(c.shrink, vec![1.0, 0.0625]);
    assert_eq!(c.deltas, vec![DeltaRule::Const(0.125)]);
    assert!(!c.timing);
    assert!(ExperimentConfig::parse("experiment = h\nalpha = 0\n").is_err());
    assert!(ExperimentConfig::parse("experiment = h\nt = 0.5\n").is_err());
    assert!(ExperimentConfig::parse("experiment = h\nk = 0\n").is_err());
    assert!(ExperimentConfig::parse("experiment = h\nbogus = 1\n").is_err());
    assert!(ExperimentConfig::parse("mesh = hexa\n").is_err());
}

#[test]
fn delta_rules() {
    assert_eq!(DeltaRule::KSq.delta(4), 1.0 / 16.0);
    assert_eq!(DeltaRule::KInv.delta(4), 0.25);
    assert_eq!(DeltaRule::KInv.delta(1), 0.5);
    assert_eq!(DeltaRule::parse("const:2^-3").unwrap(), DeltaRule::Const(0.125));
    assert!(DeltaRule::parse("const:2").is_err());
}

#[test]
fn csv_round_trip_and_format() {
    let mut t = ResultsTable::new("k1");
    t.rows.push(ResultRow { mesh: "hexa-8".into(), dofs: 255, e_u_1: 0.1 + 0.2, ecr_1: None, e_u_0: 1e-7, ecr_0: None, seconds: None });
    t.rows.push(ResultRow {
        mesh: "hexa-16".into(),
        dofs: 942,
        e_u_1: 1.0 / 3.0,
        ecr_1: Some(-0.25),
        e_u_0: 2.5e-300,
        ecr_0: Some(1.0),
        seconds: Some(0.5),
    });
    let csv = t.to_csv();
    assert!(csv.starts_with(CSV_HEADER));
    assert!(csv.lines().nth(1).unwrap().contains(",,"));
    assert!(!csv.contains("NaN"));
    let back = ResultsTable::from_csv("k1", &csv).unwrap();
    assert_eq!(back, t);
    assert!(t.to_plot_data().lines().count() == 4);
}

#[test]
fn ratio_and_rate_helpers() {
    assert_eq!(k_ratios(&[1.0, 0.5]), vec![None, None]);
    let r = k_ratios(&[9.026205e-01, 6.283715e-01, 2.406498e-01]);
    assert!((r[2].unwrap() - 0.377344).abs() < 1e-5);
    let mut t = ResultsTable::new("x");
    for (d, e) in [(100, 1.0), (400, 0.25)] {
        t.rows.push(ResultRow { mesh: "m".into(), dofs: d, e_u_1: e, ecr_1: None, e_u_0: e, ecr_0: None, seconds: None });
    }
    fill_dof_rates(&mut t);
    assert_eq!(t.rows[0].ecr_1, None);
    assert!((t.rows[1].ecr_1.unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn small_studies_run() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::HConvergence);
    cfg.sizes = vec![4];
    cfg.ks = vec![1];
    let out = run_study(&cfg, &mut |_| {});
    assert!(out.complete());
    assert_eq!(out.tables[0].rows.len(), 1);
    assert_eq!(out.tables[0].rows[0].ecr_1, None);

    let mut cfg = ExperimentConfig::new(ExperimentKind::KRobustness);
    cfg.sizes = vec![4];
    cfg.ks = vec![1, 2];
    let out = run_study(&cfg, &mut |_| {});
    assert!(out.ratios.is_empty());

    let mut cfg = ExperimentConfig::new(ExperimentKind::EdgeShrink);
    cfg.sizes = vec![4, 6];
    cfg.ks = vec![2];
    cfg.shrink = vec![1.0, 2f64.powi(-8)];
    cfg.timing = false;
    let a = run_study(&cfg, &mut |_| {});
    let b = run_study(&cfg, &mut |_| {});
    assert_eq!(a.tables.len(), 2);
    assert_eq!(a.tables.iter().map(|t| t.to_csv()).collect::<Vec<_>>(), b.tables.iter().map(|t| t.to_csv()).collect::<Vec<_>>());
}

#[test]
fn delta_only_changes_the_stabilizer() {
    use crate::assembler::{assemble_local_hybrid, MethodParams};
    use crate::mesh::{generate_hexagonal_mesh, split_cell};
    use crate::refstab::build_reference_stabilizer_with_degree;
    let mesh = generate_hexagonal_mesh(3).unwrap();
    let split = split_cell(&mesh.cell_points(4), 4).unwrap();
    let mut p = MethodParams::new(3);
    let sys = |p: &MethodParams| {
        let st = build_reference_stabilizer_with_degree(p.kprime, p.delta, p.moment_degree()).unwrap();
        assemble_local_hybrid(&mesh, 4, &split, p, &st, &|x| x.x).unwrap()
    };
    let a = sys(&p);
    p.delta = 0.125;
    let b = sys(&p);
    assert_eq!(a.a, b.a);
    assert_eq!(a.b, b.b);
    assert_eq!(a.f_v, b.f_v);
    assert!((&a.matrix - &b.matrix).amax() > 0.0);
}
