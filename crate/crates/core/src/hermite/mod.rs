//! Hermite polynomials, anchored points and Hermite kernels.

mod green;
mod kernel;
mod point;
mod polynomial;

pub use green::GreenPg2;
pub use kernel::{
    anchor_product, kernel_eval_1d, kernel_eval_1d_capped, kernel_eval_product, kernel_value, AnchorProduct, Kernel1D,
    KernelEvalResult, DEFAULT_TERM_CAP, FACTOR_CAP,
};
pub use point::AnchoredPoint;
pub use polynomial::{hermite_column, hermite_eval};

pub(crate) use polynomial::hermite_unchecked;
