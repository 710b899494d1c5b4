//! Cell and edge polynomial bases and quadrature rules.

pub mod dubiner;
pub mod legendre;
pub mod monomials;
pub mod quadrature;

pub use dubiner::OrthonormalTriangleBasis;
pub use legendre::{unit_legendre, EdgeLegendreBasis};
pub use monomials::{dim_pk, monomial_exponents, ScaledMonomialBasis};
pub use quadrature::{gauss_edge_rule, gauss_unit_rule, triangle_rule, Rule1d, TriangleRule};
