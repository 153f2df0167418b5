//! Euler–Maruyama simulation of the Stein diffusion `dX = b dt + √a dW` and
//! empirical checks that its samples follow the target law.

mod empirical;
mod sim;

pub use empirical::{ks_distance, ks_two_sample, stein_residual_empirical, wasserstein1_distance, EmpiricalDistribution};
pub use sim::{simulate, simulate_run, SimConfig, SimulationRun, CLAMP_FLAG_FRACTION};
