use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polydg::assembler::MethodParams;
use polydg::experiments::{parse_real, run_study, write_outputs, DeltaRule, ExperimentConfig, ExperimentKind, KPrimeRule, MeshFamily};
use polydg::mesh::{
    generate_hexagonal_mesh, generate_voronoi_mesh, load_mesh, quality_report, save_mesh, shrink_vertical_edges, subtriangulate,
};
use polydg::normtools::{
    compute_errors, probe_refinements, stabilizer_spectral_bounds, verify_negative_inverse, CosineSolution, DualNormProbe,
};
use polydg::refstab::build_reference_stabilizer_with_degree;
use polydg::solver::{gluing_residual, save_solution, solve_problem, SolverOptions};
use polydg::{Point2, PolygonalMesh, Result};

#[derive(Parser)]
#[command(name = "polydg", version, about = "Hybridized polygonal DG solver for the Poisson problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, inspect or deform meshes.
    #[command(subcommand)]
    Mesh(MeshCommand),
    /// Solve the manufactured cosine problem on a mesh file.
    Solve(SolveArgs),
    /// Numerical checks of the stabilizer and of inverse inequalities.
    #[command(subcommand)]
    Diag(DiagCommand),
    /// Run a study described by a config file.
    Study(StudyArgs),
}

#[derive(Subcommand)]
enum MeshCommand {
    Gen {
        #[arg(long, value_parser = parse_family)]
        family: MeshFamily,
        /// Hexagons across the square, or number of Voronoi cells.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        lloyd: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    Check {
        path: PathBuf,
    },
    Shrink {
        /// Shrink factor for vertical edges, e.g. 0.0625 or 2^-4.
        #[arg(long, value_parser = parse_real_arg)]
        s: f64,
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    k: usize,
    /// `k` or `k-1`.
    #[arg(long, default_value = "k", value_parser = parse_kprime)]
    kprime: KPrimeRule,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    t: f64,
    /// `ksq`, `kinv` or `const:<real>`.
    #[arg(long, default_value = "ksq", value_parser = parse_delta)]
    delta_rule: DeltaRule,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CellShape {
    Square,
    Hexagon,
}

#[derive(Subcommand)]
enum DiagCommand {
    /// Extreme eigenvalues of the stabilization against the dual norm.
    Infsup {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        kprime: usize,
        #[arg(long, value_enum, default_value_t = CellShape::Square)]
        cell: CellShape,
    },
    /// Growth of the L² to (H¹₀)′ norm ratio of polynomials.
    Inverse {
        #[arg(long, default_value_t = 16)]
        kmax: usize,
    },
}

#[derive(Args)]
struct StudyArgs {
    #[arg(value_parser = ExperimentKind::parse)]
    kind: ExperimentKind,
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed of the config file.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_family(s: &str) -> std::result::Result<MeshFamily, String> {
    MeshFamily::parse(s).map_err(|e| e.to_string())
}

fn parse_real_arg(s: &str) -> std::result::Result<f64, String> {
    parse_real(s).map_err(|e| e.to_string())
}

fn parse_kprime(s: &str) -> std::result::Result<KPrimeRule, String> {
    KPrimeRule::parse(s).map_err(|e| e.to_string())
}

fn parse_delta(s: &str) -> std::result::Result<DeltaRule, String> {
    DeltaRule::parse(s).map_err(|e| e.to_string())
}

fn reference_cell(shape: CellShape) -> Result<PolygonalMesh> {
    let pts: Vec<Point2> = match shape {
        CellShape::Square => vec![Point2::new(0., 0.), Point2::new(1., 0.), Point2::new(1., 1.), Point2::new(0., 1.)],
        CellShape::Hexagon => (0..6)
            .map(|i| {
                let a = std::f64::consts::PI / 3.0 * i as f64;
                Point2::new(0.5 + 0.5 * a.cos(), 0.5 + 0.5 * a.sin())
            })
            .collect(),
    };
    let n = pts.len();
    PolygonalMesh::from_cells(pts, vec![(0..n).collect()])
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Mesh(MeshCommand::Gen { family, n, seed, lloyd, output }) => {
            let mesh = match family {
                MeshFamily::Hexagonal => generate_hexagonal_mesh(n)?,
                MeshFamily::Voronoi => generate_voronoi_mesh(n, seed, 0)?,
                MeshFamily::Cvt => generate_voronoi_mesh(n, seed, lloyd)?,
            };
            save_mesh(&mesh, &output)?;
            println!("cells={}\nedges={}\npath={}", mesh.num_cells(), mesh.num_edges(), output.display());
        }
        Command::Mesh(MeshCommand::Check { path }) => {
            let mesh = load_mesh(&path)?;
            print!("{}", quality_report(&mesh).to_key_values());
        }
        Command::Mesh(MeshCommand::Shrink { s, input, output }) => {
            let mesh = shrink_vertical_edges(&load_mesh(&input)?, s)?;
            save_mesh(&mesh, &output)?;
            print!("{}", quality_report(&mesh).to_key_values());
        }
        Command::Solve(a) => {
            let mesh = load_mesh(&a.mesh)?;
            let params = MethodParams { k: a.k, kprime: a.kprime.apply(a.k), alpha: a.alpha, t: a.t, delta: a.delta_rule.delta(a.k) };
            let out = solve_problem(&mesh, &params, &CosineSolution, &SolverOptions { tol: a.tol, ..SolverOptions::default() })?;
            let e = compute_errors(&mesh, &subtriangulate(&mesh)?, &out.solution, &CosineSolution);
            save_solution(&a.output, &out.solution)?;
            let r = &out.report;
            println!("k={}\nkprime={}\ndelta={:?}\ndofs={}", params.k, params.kprime, params.delta, e.dofs);
            println!("skeleton_unknowns={}\nnnz={}\nresidual={:e}\nrefinements={}", r.dim, r.nnz, r.residual, r.refinements);
            println!("asymmetry={:e}", r.asymmetry);
            println!("gluing_residual={:e}", gluing_residual(&mesh, &out.skeleton, &out.neumann, &out.solution));
            println!("e_u_1={:e}\ne_u_0={:e}\nh={:?}", e.e_u_1, e.e_u_0, e.h);
            println!("seconds_assembly={:.3}\nseconds_solve={:.3}", r.seconds_assembly, r.seconds_solve);
        }
        Command::Diag(DiagCommand::Infsup { k, kprime, cell }) => {
            let mesh = reference_cell(cell)?;
            let params = MethodParams { kprime, ..MethodParams::new(k) };
            let stab = build_reference_stabilizer_with_degree(kprime, params.delta, params.moment_degree())?;
            let probe = DualNormProbe::for_cell(&mesh, 0, probe_refinements(kprime))?;
            let b = stabilizer_spectral_bounds(&mesh, 0, &stab, &probe)?;
            println!("k={k}\nkprime={kprime}\ndelta={:?}\nprobe_refinements={}", params.delta, probe.fine.refinements);
            println!("dim={}\nrho_est={:e}\nm_est={:e}\nrho_fine={:e}\nm_fine={:e}", b.dim, b.rho, b.m, b.rho_fine, b.m_fine);
            println!("rho_log={:e}", b.rho * ((kprime + 2) as f64).ln());
        }
        Command::Diag(DiagCommand::Inverse { kmax }) => {
            let scan = verify_negative_inverse(kmax);
            for (k, r) in &scan.ratios {
                println!("ratio_k{k}={r:e}");
            }
            println!("exponent={:?}", scan.exponent);
        }
        Command::Study(a) => {
            let mut cfg = ExperimentConfig::load(&a.config)?;
            if cfg.kind != a.kind {
                return Err(polydg::Error::Config(format!(
                    "config describes {} but the {} study was requested",
                    cfg.kind.name(),
                    a.kind.name()
                )));
            }
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            let outcome = run_study(&cfg, &mut |m| eprintln!("{m}"));
            for p in write_outputs(&cfg, &outcome)? {
                println!("wrote {}", p.display());
            }
            for (k, r) in &outcome.ratios {
                println!("ratio_k{k}={r:?}");
            }
            if !outcome.complete() {
                for f in &outcome.failures {
                    eprintln!("failed: {f}");
                }
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
