//! Randomised equivalence checks of the closed-form moment formulas and the
//! product formula against independent computations.

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::fmt::{moment3, moment4};
use crate::gaussian::sampling::substream;
use crate::gaussian::{sample_gaussian, wick_moment, ChaosVector, SymmetricKernel};

/// Random sparse kernel: order in `1..=max_order`, dimension in
/// `1..=max_dim`, one to four canonical entries with values in `[-1, 1]`.
pub fn random_kernel<R: Rng + ?Sized>(rng: &mut R, max_order: usize, max_dim: usize) -> SymmetricKernel<f64> {
    let order = rng.random_range(1..=max_order);
    let dim = rng.random_range(1..=max_dim);
    random_kernel_with(rng, dim, order)
}

pub fn random_kernel_with<R: Rng + ?Sized>(rng: &mut R, dim: usize, order: usize) -> SymmetricKernel<f64> {
    let nnz = rng.random_range(1..=4);
    let mut entries = std::collections::BTreeMap::new();
    for _ in 0..nnz {
        let mut idx: Vec<usize> = (0..order).map(|_| rng.random_range(0..dim)).collect();
        idx.sort_unstable();
        entries.insert(idx, rng.random_range(-1.0..=1.0));
    }
    SymmetricKernel::from_entries(dim, order, entries).expect("canonical by construction")
}

/// `|x - y| / max(|y|, scale)`.
fn rel_err(x: f64, y: f64, scale: f64) -> f64 {
    (x - y).abs() / y.abs().max(scale).max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheckReport {
    pub seed: u64,
    pub tolerance: f64,
    pub moment_cases: usize,
    pub moment_failures: usize,
    pub max_rel_err_moment3: f64,
    pub max_rel_err_moment4: f64,
    pub product_pairs: usize,
    pub product_points: usize,
    pub product_failures: usize,
    pub max_rel_err_product: f64,
}

impl OracleCheckReport {
    pub fn passed(&self) -> bool {
        self.moment_failures == 0 && self.product_failures == 0
    }
}

/// `moment3`/`moment4` against [`wick_moment`] on `moment_cases` random
/// kernels (`n ≤ 4`, `d ≤ 6`), and the pathwise identity
/// `(F·G)(x) = F(x) G(x)` for `product_pairs` random pairs at `points`
/// Gaussian points each.
///
/// Errors are relative to `max(|reference|, σ)` where `σ` is the natural
/// scale (`(EF²)^{p/2}` for the `p`-th moment, `‖F‖_{L²}‖G‖_{L²}` for
/// products), so vanishing references do not divide by zero.
pub fn oracle_check(seed: u64, moment_cases: usize, product_pairs: usize, points: usize, tolerance: f64) -> Result<OracleCheckReport> {
    let mut rng = substream(seed, 0);
    let mut r = OracleCheckReport {
        seed,
        tolerance,
        moment_cases,
        moment_failures: 0,
        max_rel_err_moment3: 0.0,
        max_rel_err_moment4: 0.0,
        product_pairs,
        product_points: points,
        product_failures: 0,
        max_rel_err_product: 0.0,
    };
    for _ in 0..moment_cases {
        let f = random_kernel(&mut rng, 4, 6);
        let big_f = ChaosVector::from_kernel(f.clone());
        let m2 = big_f.second_moment();
        let e3 = rel_err(moment3(&f), wick_moment(&[big_f.clone()], &[3])?, m2.powf(1.5));
        let e4 = rel_err(moment4(&f), wick_moment(&[big_f], &[4])?, m2 * m2);
        r.max_rel_err_moment3 = r.max_rel_err_moment3.max(e3);
        r.max_rel_err_moment4 = r.max_rel_err_moment4.max(e4);
        if !(e3 <= tolerance && e4 <= tolerance) {
            r.moment_failures += 1;
        }
    }
    for pair in 0..product_pairs {
        let dim = rng.random_range(1..=6);
        let (n, m) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let f = ChaosVector::from_kernel(random_kernel_with(&mut rng, dim, n));
        let g = ChaosVector::from_kernel(random_kernel_with(&mut rng, dim, m));
        let fg = f.product(&g)?;
        let scale = (f.second_moment() * g.second_moment()).sqrt();
        let mut worst: f64 = 0.0;
        for x in sample_gaussian(dim, seed.wrapping_add(1 + pair as u64), points) {
            let want = f.eval(&x)? * g.eval(&x)?;
            worst = worst.max(rel_err(fg.eval(&x)?, want, scale));
        }
        r.max_rel_err_product = r.max_rel_err_product.max(worst);
        if !(worst <= tolerance) {
            r.product_failures += 1;
        }
    }
    Ok(r)
}
