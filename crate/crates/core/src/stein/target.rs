use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stein::named::NamedTarget;
use crate::stein::quadrature::{integrate, QuadOptions};

/// Shared real function `R -> R`.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Wrap a closure as a [`RealFn`].
pub fn real_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> RealFn {
    Arc::new(f)
}

/// Open interval `(lower, upper)`, endpoints possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::param(
                "support",
                format!("need lower < upper, got ({lower}, {upper})"),
            ));
        }
        Ok(Self { lower, upper })
    }

    pub fn real_line() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    /// `n` interior points, equally spaced for finite ranges and spread by
    /// `scale` along infinite directions.
    pub fn interior_grid(&self, n: usize, scale: f64, margin: f64) -> Vec<f64> {
        let (lo, hi) = match (self.lower.is_finite(), self.upper.is_finite()) {
            (true, true) => {
                let w = self.upper - self.lower;
                (self.lower + margin * w, self.upper - margin * w)
            }
            (true, false) => (self.lower + margin * scale, self.lower + 6.0 * scale),
            (false, true) => (self.upper - 6.0 * scale, self.upper - margin * scale),
            (false, false) => (-5.0 * scale, 5.0 * scale),
        };
        (0..n)
            .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
            .collect()
    }
}

/// `a(x) = αx² + βx + γ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyCoeff<T = f64> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
}

impl<T: Scalar> PolyCoeff<T> {
    pub fn new(alpha: T, beta: T, gamma: T) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn eval(&self, x: &T) -> T {
        self.alpha.clone() * x.clone() * x.clone() + self.beta.clone() * x.clone() + self.gamma.clone()
    }

    pub fn to_f64(&self) -> PolyCoeff<f64> {
        PolyCoeff {
            alpha: self.alpha.to_real(),
            beta: self.beta.to_real(),
            gamma: self.gamma.to_real(),
        }
    }

    /// Coefficients `[γ, β, α]` lowest degree first.
    pub fn as_polynomial(&self) -> [T; 3] {
        [self.gamma.clone(), self.beta.clone(), self.alpha.clone()]
    }
}

/// Quadrature-backed `a(x) = 2 ∫_l^x b(y) p(y) dy / p(x)`.
#[derive(Clone)]
pub struct NumericCoeff {
    density: RealFn,
    drift: RealFn,
    support: Support,
    split: f64,
    opts: QuadOptions,
}

impl NumericCoeff {
    pub(crate) fn new(density: RealFn, drift: RealFn, support: Support, split: f64) -> Self {
        Self {
            density,
            drift,
            support,
            split,
            opts: QuadOptions::tight(),
        }
    }

    /// `∫_l^x b p`, taken from the nearer tail since the total vanishes.
    pub fn drift_mass(&self, x: f64) -> Result<f64> {
        let p = &self.density;
        let b = &self.drift;
        let g = |y: f64| b(y) * p(y);
        if x <= self.split {
            Ok(integrate(g, self.support.lower, x, &self.opts)?.value)
        } else {
            Ok(-integrate(g, x, self.support.upper, &self.opts)?.value)
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(2.0 * self.drift_mass(x)? / (self.density)(x))
    }
}

impl fmt::Debug for NumericCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumericCoeff")
            .field("support", &self.support)
            .field("split", &self.split)
            .finish()
    }
}

/// Squared diffusion coefficient of the Stein diffusion.
#[derive(Debug, Clone)]
pub enum DiffusionCoefficient {
    Polynomial(PolyCoeff<f64>),
    Numeric(NumericCoeff),
}

impl DiffusionCoefficient {
    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            Self::Polynomial(c) => Ok(c.eval(&x)),
            Self::Numeric(n) => n.eval(x),
        }
    }

    pub fn polynomial(&self) -> Option<&PolyCoeff<f64>> {
        match self {
            Self::Polynomial(c) => Some(c),
            Self::Numeric(_) => None,
        }
    }

    /// A cheap piecewise-linear evaluator, exact for polynomial kinds and
    /// tabulated on `grid` otherwise.
    pub fn fast_evaluator(&self, grid: &[f64]) -> Result<RealFn> {
        match self {
            Self::Polynomial(c) => {
                let c = c.clone();
                Ok(real_fn(move |x| c.eval(&x)))
            }
            Self::Numeric(n) => {
                let xs = grid.to_vec();
                let ys = xs.iter().map(|&x| n.eval(x)).collect::<Result<Vec<_>>>()?;
                Ok(real_fn(move |x| linear_interp(&xs, &ys, x)))
            }
        }
    }
}

/// Zero outside the open support, so quadrature nodes that round onto an
/// endpoint never see a singular density value.
fn guard(density: RealFn, support: Support) -> RealFn {
    real_fn(move |x| if support.contains(x) { density(x) } else { 0.0 })
}

pub(crate) fn linear_interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let j = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[j - 1], xs[j]);
    let t = (x - x0) / (x1 - x0);
    ys[j - 1] * (1.0 - t) + ys[j] * t
}

/// Invariant law of `dX = b(X) dt + sqrt(a(X)) dW` on an interval.
#[derive(Clone)]
pub struct TargetMeasure {
    pub(crate) label: String,
    pub(crate) support: Support,
    pub(crate) density: RealFn,
    pub(crate) drift: RealFn,
    pub(crate) coeff: DiffusionCoefficient,
    pub(crate) cdf: Option<RealFn>,
    pub(crate) moment_bound: Option<f64>,
    pub(crate) scale: f64,
    pub(crate) named: Option<NamedTarget>,
    /// Density of `X + shift` and the shift, for integrating near a finite
    /// endpoint that sits away from the origin.
    pub(crate) uncentred: Option<(RealFn, f64)>,
}

impl fmt::Debug for TargetMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetMeasure")
            .field("label", &self.label)
            .field("support", &self.support)
            .field("coeff", &self.coeff)
            .field("moment_bound", &self.moment_bound)
            .finish()
    }
}

impl TargetMeasure {
    /// Build from a density with drift `b(x) = -x`, deriving `a` through
    /// [`crate::stein::coeff_from_density`].
    pub fn from_density(label: &str, density: RealFn, support: Support) -> Result<Self> {
        let density = guard(density, support);
        let drift = real_fn(|x| -x);
        let coeff = crate::stein::coeff_from_density(density.clone(), drift.clone(), support)?;
        let second = integrate(
            |x| x * x * density(x),
            support.lower,
            support.upper,
            &QuadOptions::default(),
        )?
        .value;
        Ok(Self {
            label: label.to_string(),
            support,
            density,
            drift,
            coeff,
            cdf: None,
            moment_bound: None,
            scale: second.sqrt().max(1e-12),
            named: None,
            uncentred: None,
        })
    }

    /// Fully general constructor; no invariants are re-derived.
    pub fn from_parts(
        label: &str,
        support: Support,
        density: RealFn,
        drift: RealFn,
        coeff: DiffusionCoefficient,
    ) -> Self {
        Self {
            label: label.to_string(),
            support,
            density: guard(density, support),
            drift,
            coeff,
            cdf: None,
            moment_bound: None,
            scale: 1.0,
            named: None,
            uncentred: None,
        }
    }

    pub fn with_cdf(mut self, cdf: RealFn) -> Self {
        self.cdf = Some(cdf);
        self
    }

    pub fn with_moment_bound(mut self, bound: Option<f64>) -> Self {
        self.moment_bound = bound;
        self
    }

    /// Supply the density of `X + shift`. Quadrature then runs in that
    /// coordinate, where mass within an ulp of a shifted endpoint (e.g.
    /// Gamma with small shape) stays resolvable.
    pub fn with_uncentred(mut self, density: RealFn, shift: f64) -> Self {
        let support = Support {
            lower: self.support.lower + shift,
            upper: self.support.upper + shift,
        };
        self.uncentred = Some((guard(density, support), shift));
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn density(&self, x: f64) -> f64 {
        (self.density)(x)
    }

    pub fn drift(&self, x: f64) -> f64 {
        (self.drift)(x)
    }

    pub fn coeff(&self) -> &DiffusionCoefficient {
        &self.coeff
    }

    pub fn a(&self, x: f64) -> Result<f64> {
        self.coeff.eval(x)
    }

    pub fn named(&self) -> Option<&NamedTarget> {
        self.named.as_ref()
    }

    /// Moments of order strictly below this bound are finite; `None` means
    /// every moment is finite.
    pub fn moment_bound(&self) -> Option<f64> {
        self.moment_bound
    }

    /// Characteristic width used for finite-difference steps and grids.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn density_fn(&self) -> RealFn {
        self.density.clone()
    }

    pub fn drift_fn(&self) -> RealFn {
        self.drift.clone()
    }

    /// `E[g(X)]` by quadrature.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G, opts: &QuadOptions) -> Result<f64> {
        if let Some((p, m)) = &self.uncentred {
            let (l, u) = (self.support.lower + m, self.support.upper + m);
            return Ok(integrate(|y| g(y - m) * p(y), l, u, opts)?.value);
        }
        let p = &self.density;
        Ok(integrate(|x| g(x) * p(x), self.support.lower, self.support.upper, opts)?.value)
    }

    /// `P(X ≤ x)`, closed form where known, quadrature otherwise.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x <= self.support.lower {
            return Ok(0.0);
        }
        if x >= self.support.upper {
            return Ok(1.0);
        }
        if let Some(c) = &self.cdf {
            return Ok(c(x));
        }
        let p = &self.density;
        let opts = QuadOptions::default();
        if x <= 0.0 {
            Ok(integrate(|y| p(y), self.support.lower, x, &opts)?.value)
        } else {
            Ok(1.0 - integrate(|y| p(y), x, self.support.upper, &opts)?.value)
        }
    }

    /// CDF at ascending points, reusing the previous value so each
    /// quadrature only covers one gap.
    pub fn cdf_sorted(&self, xs: &[f64]) -> Result<Vec<f64>> {
        if let Some(c) = &self.cdf {
            return Ok(xs
                .iter()
                .map(|&x| {
                    if x <= self.support.lower {
                        0.0
                    } else if x >= self.support.upper {
                        1.0
                    } else {
                        c(x)
                    }
                })
                .collect());
        }
        let mut out = Vec::with_capacity(xs.len());
        let mut prev_x = self.support.lower;
        let mut acc = 0.0;
        let opts = QuadOptions::default();
        let p = &self.density;
        for &x in xs {
            let x_in = x.clamp(self.support.lower, self.support.upper);
            if x_in > prev_x {
                acc += integrate(|y| p(y), prev_x, x_in, &opts)?.value;
                prev_x = x_in;
            }
            out.push(acc.min(1.0));
        }
        Ok(out)
    }
}
