//! Temporal Legendre basis, spatial Lagrange shape functions and quadrature.

mod lagrange;
mod legendre;
mod quadrature;

pub use lagrange::{SpatialBasis, MAX_SPATIAL_DEGREE};
pub use legendre::{legendre_eval, legendre_values, TemporalBasis};
pub use quadrature::{
    gauss_jacobi, gauss_jacobi_singular, gauss_jacobi_unit, gauss_legendre, simplex_quadrature, ElementFamily,
    QuadratureRule, MAX_SIMPLEX_DEGREE,
};
