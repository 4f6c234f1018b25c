//! Exact sparse bivariate polynomials and planar polynomial vector fields.
//!
//! Coefficients are exact rationals unless an irrational rescaling forces
//! the float mode, which is tagged on every polynomial and field derived
//! from it (see [`CoeffMode`]).

mod affine;
mod field;
mod poly2;
mod scalar;
mod univariate;

pub use affine::AffineMap2;
pub use field::{CompiledField, Component, Monomial, PlanarField, RationalField};
pub use poly2::{Exponent, Poly2};
pub use scalar::{CoeffMode, Rational, Scalar, ScalarParseError};
pub use univariate::{Poly1, RationalFn1};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("Jacobian determinant {determinant} is not a monomial times a unit")]
    NonMonomialDenominator { determinant: String },
    #[error("component {component} is not divisible; remainder {remainder}")]
    NotDivisible { component: Component, remainder: String },
    #[error("affine map is singular")]
    SingularMap,
}
