//! Skeleton space, boundary data, global assembly and solve, and reconstruction.

pub mod global;
pub mod output;
pub mod problem;
pub mod skeleton;

pub use global::{
    assemble_global, condense_all, gluing_residual, reconstruct, solve_global, solve_problem, CellBlocks, DGSolution,
    SkeletonSystem, SolveOutcome, SolveReport, SolverOptions,
};
pub use output::{parse_solution_csv, save_solution, solution_to_csv};
pub use problem::{zero_problem, DataProblem, Problem};
pub use skeleton::{apply_neumann, build_skeleton_space, edge_projection, SkeletonSpace};

#[cfg(test)]
mod tests;
