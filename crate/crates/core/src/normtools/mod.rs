//! Error norms, convergence rates, dual-norm probes and numerical checks of the
//! stabilizer and inverse-inequality scalings.

pub mod dual;
pub mod errors;
pub mod exact;
pub mod inverse;

pub use dual::{dual_seminorm, probe_refinements, DEFAULT_PROBE_REFINEMENTS, stabilizer_spectral_bounds, DualNormEstimate, DualNormProbe, Functional, SpectralBounds};
pub use errors::{compute_errors, ecr_from_dofs, estimated_convergence_rate, ErrorReport};
pub use exact::{CosineSolution, ExactSolution, PolynomialSolution};
pub use inverse::{verify_negative_inverse, InverseInequalityScan};
