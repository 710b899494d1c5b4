//! Per-cell assembly of the stabilized hybrid form and static condensation onto the
//! skeleton trace unknowns.

mod local;
mod stabilization;

pub use local::{
    assemble_boundary_coupling, assemble_local_hybrid, assemble_volume_stiffness, cell_basis, static_condense,
    CondensedElement, LocalSpaces, LocalSystem, MethodParams,
};
pub use stabilization::{assemble_stabilization, StabilizationBlocks, TriangleBlock};

#[cfg(test)]
mod tests;
