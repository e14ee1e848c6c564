//! Limit-periodic Jacobi matrices generated by the Julia set of `z² − λ`.
//!
//! The hull `{J_ϰ : ϰ ∈ ℤ₂}` is built from exact coefficient tables, and the
//! matrix Ruelle renormalization acting on it is implemented on the pole
//! basis `w_x^k(T(0))`. The certificate functions in [`hull`], [`ruelle`]
//! and [`suite`] check the identities and bounds of that machinery
//! numerically at finite truncation.

pub mod coeffs;
pub mod dyadic;
pub mod dynamics;
pub mod error;
pub mod hull;
pub mod numeric;
pub mod ruelle;
pub mod suite;
pub mod tridiag;

pub use coeffs::{CoeffTable, DyadicCoeff, Lambda};
pub use dyadic::{DyadicInt, RunProfile};
pub use dynamics::{CriticalOrbit, MapParams, PreimageTree, WValue};
pub use error::{Error, Result};
pub use hull::{Hull, SpectralMeasureApprox, TruncatedJacobi};
pub use ruelle::{MatrixPoleFunction, RuelleWeight};
pub use suite::{RunConfig, Tolerances, VerifyReport};
