//! Finite-dimensional Wiener chaos, Stein diffusions and fourth-moment
//! diagnostics.
//!
//! The chaos algebra is generic over the scalar ([`scalar::Scalar`]); use
//! [`Kernel`]/[`Chaos`] for `f64` work and [`ExactKernel`]/[`ExactChaos`] for
//! exact rational arithmetic. Quadrature and simulation run in `f64`.

pub mod diffusion;
pub mod error;
pub mod fmt;
pub mod gaussian;
pub mod io;
pub mod scalar;
pub mod stein;

pub use error::{Error, Result};

use num_rational::BigRational;

pub type Kernel = gaussian::SymmetricKernel<f64>;
pub type Chaos = gaussian::ChaosVector<f64>;
pub type Kernel32 = gaussian::SymmetricKernel<f32>;
pub type Chaos32 = gaussian::ChaosVector<f32>;
pub type ExactKernel = gaussian::SymmetricKernel<BigRational>;
pub type ExactChaos = gaussian::ChaosVector<BigRational>;
