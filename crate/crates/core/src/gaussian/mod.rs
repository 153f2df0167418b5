//! Exact finite-dimensional Wiener chaos arithmetic.
//!
//! The Hilbert space is `R^d` with the standard basis, so a realisation of
//! the isonormal process is just a vector `x = (B(e_0), ..., B(e_{d-1}))`.

pub mod chaos;
pub mod hermite;
pub mod kernel;
mod oracle;
mod multiset;
pub mod sampling;
pub mod wick;

pub use chaos::{chaos_product, malliavin_inner, malliavin_inner_pathwise, ou_inverse, ChaosVector};
pub use hermite::{hermite, hermite_table};
pub use oracle::{oracle_check, random_kernel, random_kernel_with, OracleCheckReport};
pub use kernel::{symmetrize, SymmetricKernel, Tensor};
pub use sampling::{monte_carlo, sample_gaussian, McEstimate};
pub use wick::{wick_moment, WICK_FACTOR_LIMIT};

/// A realisation `(B(e_0), ..., B(e_{d-1}))` of the isonormal process.
pub type GaussianPoint = Vec<f64>;
