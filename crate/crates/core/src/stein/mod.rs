//! Target laws as invariant measures of one-dimensional diffusions, their
//! Stein operators and the closed forms available for second-degree
//! coefficients.

pub mod coefficient;
pub mod custom;
pub mod mble;
pub mod moments;
pub mod named;
pub mod quadrature;
pub mod solution;
pub mod target;

pub use coefficient::coeff_from_density;
pub use custom::grid_target;
pub use mble::{mble_inner_product, mble_monte_carlo, MbleCase};
pub use moments::{check_alpha, moment_recursion, moment_sequence, poly_moments};
pub use named::{NamedTarget, TARGET_NAMES};
pub use quadrature::{integral, integrate, QuadOptions, QuadResult};
pub use solution::{
    dictionary, stein_identity_residual, stein_identity_terms, stein_solution, SteinSolution, TestFunction,
};
pub use target::{real_fn, DiffusionCoefficient, PolyCoeff, RealFn, Support, TargetMeasure};
