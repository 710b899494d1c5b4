use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn polydg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polydg")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("polydg-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(text: &str, key: &str) -> Option<String> {
    text.lines().find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_string))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn mesh_generation_check_and_shrink() {
    let dir = scratch("mesh");
    let m = dir.join("hex.mesh");
    let o = polydg(&["mesh", "gen", "--family", "hexa", "--n", "6", "-o", s(&m)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = polydg(&["mesh", "check", s(&m)]);
    assert!(o.status.success());
    let report = stdout(&o);
    for key in ["N_p", "N_e", "h", "h_min", "gamma0", "gamma1"] {
        assert!(value(&report, key).is_some(), "missing {key} in {report}");
    }
    let shrunk = dir.join("shrunk.mesh");
    let o = polydg(&["mesh", "shrink", "--s", "2^-8", s(&m), "-o", s(&shrunk)]);
    assert!(o.status.success());
    let hmin = |t: &str| value(t, "h_min").unwrap().parse::<f64>().unwrap();
    assert!(hmin(&stdout(&o)) < hmin(&report));

    let v = dir.join("voro.mesh");
    let o = polydg(&["mesh", "gen", "--family", "cvt", "--n", "20", "--seed", "3", "-o", s(&v)]);
    assert!(o.status.success());
    assert_eq!(value(&stdout(&polydg(&["mesh", "check", s(&v)])), "N_p").as_deref(), Some("20"));
}

#[test]
fn solve_writes_solution_and_reports() {
    let dir = scratch("solve");
    let m = dir.join("hex.mesh");
    assert!(polydg(&["mesh", "gen", "--family", "hexa", "--n", "8", "-o", s(&m)]).status.success());
    let out = dir.join("sol.csv");
    let o = polydg(&["solve", "--mesh", s(&m), "--k", "2", "--kprime", "k-1", "--delta-rule", "const:0.125", "-o", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(value(&text, "kprime").as_deref(), Some("1"));
    assert!(value(&text, "residual").unwrap().parse::<f64>().unwrap() <= 1e-12);
    let e: f64 = value(&text, "e_u_1").unwrap().parse().unwrap();
    assert!(e > 0.0 && e < 1.0);
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.lines().any(|l| l == "cell,alpha,value"));

    let bad = polydg(&["solve", "--mesh", s(&m), "--k", "2", "--t", "0.5", "-o", s(&out)]);
    assert_eq!(bad.status.code(), Some(1));
    let missing = polydg(&["solve", "--mesh", s(&dir.join("none.mesh")), "--k", "1", "-o", s(&out)]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn diagnostics_print_key_values() {
    let o = polydg(&["diag", "infsup", "--k", "2", "--kprime", "2", "--cell", "square"]);
    assert!(o.status.success());
    let t = stdout(&o);
    let m: f64 = value(&t, "m_est").unwrap().parse().unwrap();
    let rho: f64 = value(&t, "rho_est").unwrap().parse().unwrap();
    assert!(rho > 0.0 && rho <= m && m <= 1.05);

    let o = polydg(&["diag", "inverse", "--kmax", "4"]);
    assert!(o.status.success());
    let t = stdout(&o);
    let r0: f64 = value(&t, "ratio_k0").unwrap().parse().unwrap();
    assert!((r0 - 12f64.sqrt()).abs() < 1e-6);
    assert!(value(&t, "exponent").is_some());
}

#[test]
fn study_exit_codes_and_outputs() {
    let dir = scratch("study");
    let cfg = dir.join("h.conf");
    let out = dir.join("out");
    fs::write(&cfg, format!("experiment = h\nname = small\nsizes = 4, 8\nk = 1\ntiming = off\noutput = {}\n", s(&out))).unwrap();
    let o = polydg(&["study", "h", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("small_k1.csv")).unwrap();
    assert!(csv.starts_with("mesh,dofs,e_u_1,ecr_1,e_u_0,ecr_0,seconds"));
    assert_eq!(csv.lines().count(), 3);
    assert!(out.join("small_k1.dat").exists());

    // delta = 1/2 at k = 2 leaves a singular stabilization block, k = 3 succeeds
    let partial = dir.join("delta.conf");
    fs::write(&partial, format!("experiment = delta\nname = d\nsizes = 8\nk = 2, 3\ndelta = kinv\noutput = {}\n", s(&out))).unwrap();
    let o = polydg(&["study", "delta", "--config", s(&partial)]);
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(polydg(&["study", "k", "--config", s(&cfg)]).status.code(), Some(1));
    assert_ne!(polydg(&["study", "h", "--config", s(&dir.join("missing.conf"))]).status.code(), Some(0));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(root).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "conf") {
            polydg::experiments::ExperimentConfig::load(&p).unwrap();
            seen += 1;
        }
    }
    assert_eq!(seen, 4);
}
