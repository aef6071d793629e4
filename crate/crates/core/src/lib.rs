//! Integration and L2-approximation on univariate and infinite-variate
//! Hermite spaces.
//!
//! * [`hermite`] — normalized Hermite polynomials and kernel evaluation.
//! * [`weights`] — Fourier-weight schemes and derived constants.
//! * [`quad1d`] — shifted composite quadratures and their exact worst-case error.
//! * [`approx1d`] — weighted least-squares approximation from samples.
//! * [`mdm`] — Smolyak rules, anchored decomposition and the multivariate
//!   decomposition method.
//! * [`harness`] — study configuration, test functions and report emission.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx1d;
pub mod error;
pub mod harness;
pub mod hermite;
pub mod mdm;
pub mod numerics;
pub mod quad1d;
pub mod weights;

pub use error::{Error, Result};
