//! Reference-triangle auxiliary space: discrete Neumann liftings of edge Legendre
//! modes, their stiffness data, and the push-forward to physical triangles.

pub mod cache;
pub mod fem;
pub mod pushforward;
pub mod stabilizer;

pub use cache::{load_or_build, shared_stabilizer};
pub use fem::{build_reference_fem, p1_gradients, p1_stiffness, ReferenceTriangleFEM};
pub use pushforward::{push_forward, trace_matrix, PhysicalStabilizer};
pub use stabilizer::{build_reference_stabilizer, build_reference_stabilizer_with_degree, default_delta, ReferenceStabilizer};
