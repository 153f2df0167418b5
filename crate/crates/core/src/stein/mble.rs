//! `⟨D(-L)^{-1}(F - E F), DF⟩_H` for four functionals of finitely many
//! independent standard Gaussians, where it is a function of `F` itself.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::sampling::{substream, Accumulator};
use crate::gaussian::McEstimate;
use crate::stein::quadrature::{integrate, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum MbleCase {
    /// `F = cX`.
    Linear { c: f64 },
    /// `F = c(X² - 1)`.
    Quadratic { c: f64 },
    /// `F = e^{cX}`.
    Lognormal { c: f64 },
    /// `F = exp(c Σ_{k≤n} X_k²)`, `c < 1/2`.
    ExpChi2 { c: f64, n: usize },
}

impl MbleCase {
    /// Number of Gaussian coordinates `F` depends on.
    pub fn dim(&self) -> usize {
        match *self {
            Self::ExpChi2 { n, .. } => n,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = match *self {
            Self::Linear { c } | Self::Quadratic { c } | Self::Lognormal { c } => c,
            Self::ExpChi2 { c, n } => {
                if n == 0 {
                    return Err(Error::param("n", "need at least one coordinate"));
                }
                if !(c < 0.5) {
                    return Err(Error::param("c", format!("must be below 1/2, got {c}")));
                }
                c
            }
        };
        if !c.is_finite() {
            return Err(Error::param("c", "must be finite"));
        }
        Ok(())
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        self.validate()?;
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `F(x)`.
    pub fn functional(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.f_unchecked(x))
    }

    fn f_unchecked(&self, x: &[f64]) -> f64 {
        match *self {
            Self::Linear { c } => c * x[0],
            Self::Quadratic { c } => c * (x[0] * x[0] - 1.0),
            Self::Lognormal { c } => (c * x[0]).exp(),
            Self::ExpChi2 { c, .. } => (c * x.iter().map(|v| v * v).sum::<f64>()).exp(),
        }
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) {
        match *self {
            Self::Linear { c } => out[0] = c,
            Self::Quadratic { c } => out[0] = 2.0 * c * x[0],
            Self::Lognormal { c } => out[0] = c * (c * x[0]).exp(),
            Self::ExpChi2 { c, .. } => {
                let f = self.f_unchecked(x);
                for (o, v) in out.iter_mut().zip(x) {
                    *o = 2.0 * c * v * f;
                }
            }
        }
    }

    /// `Var F`, the expectation of the inner product.
    pub fn variance(&self) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            Self::Linear { c } => c * c,
            Self::Quadratic { c } => 2.0 * c * c,
            Self::Lognormal { c } => (2.0 * c * c).exp() - (c * c).exp(),
            Self::ExpChi2 { c, n } => {
                if !(c < 0.25) {
                    return Err(Error::param("c", "variance is infinite for c ≥ 1/4"));
                }
                let h = n as f64 / 2.0;
                (1.0 - 4.0 * c).powf(-h) - (1.0 - 2.0 * c).powf(-2.0 * h)
            }
        })
    }
}

/// Closed form of `⟨D(-L)^{-1}(F - E F), DF⟩_H` at the Gaussian point `x`,
/// written through `F(x)` only.
pub fn mble_inner_product(case: MbleCase, x: &[f64]) -> Result<f64> {
    case.check_point(x)?;
    let f = case.f_unchecked(x);
    let opts = QuadOptions::tight();
    match case {
        MbleCase::Linear { c } => Ok(c * c),
        MbleCase::Quadratic { c } => Ok(2.0 * c * f + 2.0 * c * c),
        MbleCase::Lognormal { c } => {
            let i = integrate(|v| f.powf(v) * (0.5 * c * c * (1.0 - v * v)).exp(), 0.0, 1.0, &opts)?;
            Ok(c * c * f * i.value)
        }
        MbleCase::ExpChi2 { c, n } => {
            if c == 0.0 {
                return Ok(0.0);
            }
            let lf = f.ln();
            let i = integrate(
                |v| {
                    let d = 1.0 - 2.0 * c * (1.0 - v * v);
                    v * (lf * v * v / d).exp() / d.powf(n as f64 / 2.0 + 1.0)
                },
                0.0,
                1.0,
                &opts,
            )?;
            Ok(4.0 * c * f * lf * i.value)
        }
    }
}

/// Monte Carlo evaluation of the same quantity through the Mehler-type
/// representation `∫_0^1 E'[∇f(x) · ∇f(vx + √(1-v²) x')] dv`, sampling
/// `v` uniformly and `x'` Gaussian. Independent of the closed forms.
pub fn mble_monte_carlo(case: MbleCase, x: &[f64], seed: u64, count: usize) -> Result<McEstimate> {
    case.check_point(x)?;
    let d = x.len();
    let mut gx = vec![0.0; d];
    case.grad(x, &mut gx);
    let mut rng = substream(seed, 0);
    let mut y = vec![0.0; d];
    let mut gy = vec![0.0; d];
    let mut acc = Accumulator::default();
    for _ in 0..count {
        let v: f64 = rng.random();
        let s = (1.0 - v * v).sqrt();
        for (yi, xi) in y.iter_mut().zip(x) {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            *yi = v * xi + s * z;
        }
        case.grad(&y, &mut gy);
        acc.push(gx.iter().zip(&gy).map(|(a, b)| a * b).sum());
    }
    Ok(acc.finish())
}
