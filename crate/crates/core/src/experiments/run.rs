use std::path::PathBuf;
use std::time::Instant;

use super::config::{ExperimentConfig, ExperimentKind, MeshFamily};
use super::table::{emit_outputs, ResultRow, ResultsTable};
use crate::assembler::MethodParams;
use crate::error::{Error, Result};
use crate::mesh::{generate_hexagonal_mesh, generate_voronoi_mesh, shrink_vertical_edges, subtriangulate, PolygonalMesh};
use crate::normtools::{compute_errors, ecr_from_dofs, CosineSolution};
use crate::solver::{solve_problem, SolverOptions};

/// Tables of a study plus the rows that could not be computed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StudyOutcome {
    pub tables: Vec<ResultsTable>,
    /// k-robustness ratios log(e_{k-2}/e_{k-1}) / log(e_{k-1}/e_k), keyed by k.
    pub ratios: Vec<(usize, f64)>,
    pub failures: Vec<String>,
}

impl StudyOutcome {
    pub fn complete(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn build_mesh(family: MeshFamily, size: usize, seed: u64, lloyd: usize) -> Result<(String, PolygonalMesh)> {
    match family {
        MeshFamily::Hexagonal => Ok((format!("hexa-{size}"), generate_hexagonal_mesh(size)?)),
        MeshFamily::Voronoi => Ok((format!("voro-{size}-seed{seed}"), generate_voronoi_mesh(size, seed, 0)?)),
        MeshFamily::Cvt => Ok((format!("cvt-{size}-seed{seed}-lloyd{lloyd}"), generate_voronoi_mesh(size, seed, lloyd)?)),
    }
}

fn params_for(cfg: &ExperimentConfig, k: usize, delta_index: usize) -> MethodParams {
    MethodParams {
        k,
        kprime: cfg.kprime.apply(k),
        alpha: cfg.alpha,
        t: cfg.t,
        delta: cfg.deltas[delta_index].delta(k),
    }
}

/// Solves the manufactured problem on `mesh` and measures the errors.
pub fn solve_row(mesh_id: &str, mesh: &PolygonalMesh, params: &MethodParams, tol: f64, timing: bool) -> Result<ResultRow> {
    let t0 = Instant::now();
    let options = SolverOptions { tol, ..SolverOptions::default() };
    let out = solve_problem(mesh, params, &CosineSolution, &options)?;
    let split = subtriangulate(mesh)?;
    let e = compute_errors(mesh, &split, &out.solution, &CosineSolution);
    if !(e.e_u_1.is_finite() && e.e_u_0.is_finite()) {
        return Err(Error::Solve("non-finite error norms".into()));
    }
    Ok(ResultRow {
        mesh: mesh_id.to_string(),
        dofs: e.dofs,
        e_u_1: e.e_u_1,
        ecr_1: None,
        e_u_0: e.e_u_0,
        ecr_0: None,
        seconds: timing.then(|| t0.elapsed().as_secs_f64()),
    })
}

/// Fills the rate columns from consecutive rows, with h ∝ dofs^(-1/2).
pub fn fill_dof_rates(table: &mut ResultsTable) {
    for i in 1..table.rows.len() {
        let (a, b) = (&table.rows[i - 1], &table.rows[i]);
        let r1 = ecr_from_dofs(&[(a.dofs, a.e_u_1), (b.dofs, b.e_u_1)]).ok().map(|v| v[0]);
        let r0 = ecr_from_dofs(&[(a.dofs, a.e_u_0), (b.dofs, b.e_u_0)]).ok().map(|v| v[0]);
        table.rows[i].ecr_1 = r1.filter(|v| v.is_finite());
        table.rows[i].ecr_0 = r0.filter(|v| v.is_finite());
    }
}

/// log(e_{i-2}/e_{i-1}) / log(e_{i-1}/e_i) for i ≥ 2.
pub fn k_ratios(errors: &[f64]) -> Vec<Option<f64>> {
    (0..errors.len())
        .map(|i| {
            if i < 2 {
                return None;
            }
            let r = (errors[i - 2] / errors[i - 1]).ln() / (errors[i - 1] / errors[i]).ln();
            r.is_finite().then_some(r)
        })
        .collect()
}

type Log<'a> = &'a mut dyn FnMut(&str);

fn record(
    table: &mut ResultsTable,
    failures: &mut Vec<String>,
    log: &mut dyn FnMut(&str),
    mesh_id: &str,
    mesh: &PolygonalMesh,
    params: &MethodParams,
    cfg: &ExperimentConfig,
) -> bool {
    match solve_row(mesh_id, mesh, params, cfg.tol, cfg.timing) {
        Ok(row) => {
            log(&format!(
                "{} {} k={} dofs={} e_u_1={:.6e} e_u_0={:.6e}",
                table.series, mesh_id, params.k, row.dofs, row.e_u_1, row.e_u_0
            ));
            table.rows.push(row);
            true
        }
        Err(e) => {
            let msg = format!("{} {} k={}: {e}", table.series, mesh_id, params.k);
            log(&format!("row failed: {msg}"));
            failures.push(msg);
            false
        }
    }
}

fn meshes(cfg: &ExperimentConfig, failures: &mut Vec<String>, log: Log) -> Vec<(String, PolygonalMesh)> {
    let mut out = Vec::new();
    for &size in &cfg.sizes {
        match build_mesh(cfg.family, size, cfg.seed, cfg.lloyd) {
            Ok(m) => out.push(m),
            Err(e) => {
                let msg = format!("mesh of size {size}: {e}");
                log(&format!("mesh failed: {msg}"));
                failures.push(msg);
            }
        }
    }
    out
}

pub fn run_h_convergence(cfg: &ExperimentConfig, log: Log) -> StudyOutcome {
    let mut out = StudyOutcome::default();
    let meshes = meshes(cfg, &mut out.failures, log);
    for &k in &cfg.ks {
        let params = params_for(cfg, k, 0);
        let mut table = ResultsTable::new(format!("k{k}"));
        for (id, mesh) in &meshes {
            record(&mut table, &mut out.failures, log, id, mesh, &params, cfg);
        }
        fill_dof_rates(&mut table);
        out.tables.push(table);
    }
    out
}

pub fn run_k_robustness(cfg: &ExperimentConfig, log: Log) -> StudyOutcome {
    let mut out = StudyOutcome::default();
    let meshes = meshes(cfg, &mut out.failures, log);
    let Some((id, mesh)) = meshes.first() else { return out };
    let mut table = ResultsTable::new(format!("k_robustness-{id}"));
    let mut ks = Vec::new();
    for &k in &cfg.ks {
        if record(&mut table, &mut out.failures, log, &format!("{id}-k{k}"), mesh, &params_for(cfg, k, 0), cfg) {
            ks.push(k);
        }
    }
    let e1: Vec<f64> = table.rows.iter().map(|r| r.e_u_1).collect();
    let e0: Vec<f64> = table.rows.iter().map(|r| r.e_u_0).collect();
    for (i, (r1, r0)) in k_ratios(&e1).into_iter().zip(k_ratios(&e0)).enumerate() {
        table.rows[i].ecr_1 = r1;
        table.rows[i].ecr_0 = r0;
        if let Some(r) = r1 {
            out.ratios.push((ks[i], r));
        }
    }
    out.tables.push(table);
    out
}

pub fn run_delta_sensitivity(cfg: &ExperimentConfig, log: Log) -> StudyOutcome {
    let mut out = StudyOutcome::default();
    let meshes = meshes(cfg, &mut out.failures, log);
    let Some((id, mesh)) = meshes.first() else { return out };
    for (di, rule) in cfg.deltas.iter().enumerate() {
        let mut table = ResultsTable::new(format!("delta-{}", rule.label().replace(':', "_")));
        for &k in &cfg.ks {
            record(&mut table, &mut out.failures, log, &format!("{id}-k{k}"), mesh, &params_for(cfg, k, di), cfg);
        }
        out.tables.push(table);
    }
    out
}

pub fn run_edge_shrink(cfg: &ExperimentConfig, log: Log) -> StudyOutcome {
    let mut out = StudyOutcome::default();
    let meshes = meshes(cfg, &mut out.failures, log);
    for &k in &cfg.ks {
        let params = params_for(cfg, k, 0);
        for &s in &cfg.shrink {
            let mut table = ResultsTable::new(format!("k{k}-s{s:e}"));
            for (id, mesh) in &meshes {
                let sid = format!("{id}-s{s:e}");
                match shrink_vertical_edges(mesh, s) {
                    Ok(m) => {
                        record(&mut table, &mut out.failures, log, &sid, &m, &params, cfg);
                    }
                    Err(e) => out.failures.push(format!("{sid}: {e}")),
                }
            }
            fill_dof_rates(&mut table);
            out.tables.push(table);
        }
    }
    out
}

pub fn run_study(cfg: &ExperimentConfig, log: Log) -> StudyOutcome {
    match cfg.kind {
        ExperimentKind::HConvergence => run_h_convergence(cfg, log),
        ExperimentKind::KRobustness => run_k_robustness(cfg, log),
        ExperimentKind::DeltaSensitivity => run_delta_sensitivity(cfg, log),
        ExperimentKind::EdgeShrink => run_edge_shrink(cfg, log),
    }
}

/// Writes one CSV and one plot-data file per nonempty table; returns the CSV paths.
pub fn write_outputs(cfg: &ExperimentConfig, outcome: &StudyOutcome) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for t in outcome.tables.iter().filter(|t| !t.rows.is_empty()) {
        let stem = format!("{}_{}", cfg.name, t.series);
        emit_outputs(&cfg.output, &stem, t)?;
        paths.push(cfg.output.join(format!("{stem}.csv")));
    }
    Ok(paths)
}
