//! Horospherical Radon transforms on the hyperboloid model of real hyperbolic space.
//!
//! The crate covers the Lorentz-group model of `H^n`, `d`-dimensional horospheres,
//! the forward `d`-horospherical transform, Riemann–Liouville fractional calculus,
//! the potential family `Q^alpha`, and two reconstruction procedures: the
//! mean-value / fractional-derivative method and inversion by polynomials of the
//! Beltrami–Laplace operator.

pub mod cli;
pub mod constants;
pub mod error;
pub mod fields;
pub mod fractional;
pub mod horosphere;
pub mod inversion;
pub mod lorentz;
pub mod quadrature;
pub mod special;
pub mod sphere;
pub mod transform;

pub use error::{HoroError, Result};
