//! Declarative convergence and robustness studies with CSV and plot-data output.

pub mod config;
pub mod run;
pub mod table;

pub use config::{parse_real, DeltaRule, ExperimentConfig, ExperimentKind, KPrimeRule, MeshFamily};
pub use run::{
    build_mesh, fill_dof_rates, k_ratios, run_delta_sensitivity, run_edge_shrink, run_h_convergence, run_k_robustness,
    run_study, solve_row, write_outputs, StudyOutcome,
};
pub use table::{emit_outputs, ResultRow, ResultsTable, CSV_HEADER};

#[cfg(test)]
mod tests;
