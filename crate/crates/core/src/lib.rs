//! Asymptotics of the incomplete gamma function `Γ(-a, λa)` for large `a`.
//!
//! The crate evaluates the truncated large-`a` expansion together with
//! certified bounds for its remainder, computes the expansion coefficients
//! exactly, approximates late coefficients, and re-expands the remainder in
//! terms of terminant functions. Independent quadrature references live in
//! [`oracle`] and are used to validate every inequality.
//!
//! All floating evaluations take an explicit [`PrecisionContext`].

pub mod bounds;
pub mod coeffs;
pub mod error;
pub mod expansion;
pub mod hyper;
pub mod interval;
pub mod latecoeffs;
pub mod numerics;
pub mod oracle;
pub mod phase;
pub mod quad;
pub mod terminant;
pub mod verify;

pub use error::{Error, Result};
pub use numerics::PrecisionContext;
pub use rug::{Complex, Float, Integer, Rational};
