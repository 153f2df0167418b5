//! The eight closed-form targets with second-degree coefficients.
//!
//! Every target is stored centred: if the textbook law has mean `m` and
//! coefficient `a₀`, the centred one has `a(x) = a₀(x + m)`.

use rand::Rng;
use rand_distr::Distribution;
use serde::Serialize;
use statrs::distribution::{Continuous, ContinuousCDF};

use crate::error::{Error, Result};
use crate::gaussian::sampling::substream;
use crate::scalar::Scalar;
use crate::stein::target::{real_fn, DiffusionCoefficient, PolyCoeff, RealFn, Support, TargetMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum NamedTarget {
    /// Centred normal with variance `gamma`.
    Normal { gamma: f64 },
    Student { nu: f64 },
    /// Lomax law with density `ν(1+y)^{-ν-1}` on `(0, ∞)`.
    Pareto { nu: f64 },
    /// Shape `a`, rate `lambda`.
    Gamma { a: f64, lambda: f64 },
    /// Shape `lambda`, scale `delta`.
    InverseGamma { delta: f64, lambda: f64 },
    /// Fisher–Snedecor with `a` and `b` degrees of freedom.
    FDist { a: f64, b: f64 },
    UniformCentered,
    Beta { a: f64, b: f64 },
}

/// Names accepted by [`NamedTarget::from_params`].
pub const TARGET_NAMES: [&str; 8] = [
    "normal",
    "student",
    "pareto",
    "gamma",
    "inverse_gamma",
    "f",
    "uniform",
    "beta",
];

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be a positive finite number, got {v}")))
    }
}

fn above(name: &str, v: f64, bound: f64) -> Result<()> {
    if v.is_finite() && v > bound {
        Ok(())
    } else {
        Err(Error::param(
            name,
            format!("must exceed {bound} for a finite variance, got {v}"),
        ))
    }
}

impl NamedTarget {
    /// Build from a name and a parameter lookup; missing parameters are
    /// reported by name.
    pub fn from_params(name: &str, get: impl Fn(&str) -> Option<f64>) -> Result<Self> {
        let need = |p: &str| get(p).ok_or_else(|| Error::param(p, format!("required for target `{name}`")));
        let t = match name {
            "normal" => Self::Normal { gamma: get("gamma").unwrap_or(1.0) },
            "student" => Self::Student { nu: need("nu")? },
            "pareto" => Self::Pareto { nu: need("nu")? },
            "gamma" => Self::Gamma {
                a: need("a")?,
                lambda: need("lambda")?,
            },
            "inverse_gamma" => Self::InverseGamma {
                delta: need("delta")?,
                lambda: need("lambda")?,
            },
            "f" => Self::FDist {
                a: need("a")?,
                b: need("b")?,
            },
            "uniform" => Self::UniformCentered,
            "beta" => Self::Beta {
                a: need("a")?,
                b: need("b")?,
            },
            other => {
                return Err(Error::param(
                    "name",
                    format!("unknown target `{other}`; expected one of {}", TARGET_NAMES.join(", ")),
                ))
            }
        };
        t.validate()?;
        Ok(t)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Normal { .. } => "normal",
            Self::Student { .. } => "student",
            Self::Pareto { .. } => "pareto",
            Self::Gamma { .. } => "gamma",
            Self::InverseGamma { .. } => "inverse_gamma",
            Self::FDist { .. } => "f",
            Self::UniformCentered => "uniform",
            Self::Beta { .. } => "beta",
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Self::Normal { gamma } => vec![("gamma", gamma)],
            Self::Student { nu } | Self::Pareto { nu } => vec![("nu", nu)],
            Self::Gamma { a, lambda } => vec![("a", a), ("lambda", lambda)],
            Self::InverseGamma { delta, lambda } => vec![("delta", delta), ("lambda", lambda)],
            Self::FDist { a, b } | Self::Beta { a, b } => vec![("a", a), ("b", b)],
            Self::UniformCentered => vec![],
        }
    }

    /// Parameter ranges giving a centred law with finite variance.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Normal { gamma } => positive("gamma", gamma),
            Self::Student { nu } | Self::Pareto { nu } => above("nu", nu, 2.0),
            Self::Gamma { a, lambda } => positive("a", a).and(positive("lambda", lambda)),
            Self::InverseGamma { delta, lambda } => positive("delta", delta).and(above("lambda", lambda, 2.0)),
            Self::FDist { a, b } => positive("a", a).and(above("b", b, 4.0)),
            Self::UniformCentered => Ok(()),
            Self::Beta { a, b } => positive("a", a).and(positive("b", b)),
        }
    }

    /// Mean of the uncentred law, i.e. the shift applied by centring.
    pub fn mean_shift(&self) -> f64 {
        match *self {
            Self::Normal { .. } | Self::Student { .. } | Self::UniformCentered => 0.0,
            Self::Pareto { nu } => 1.0 / (nu - 1.0),
            Self::Gamma { a, lambda } => a / lambda,
            Self::InverseGamma { delta, lambda } => delta / (lambda - 1.0),
            Self::FDist { b, .. } => b / (b - 2.0),
            Self::Beta { a, b } => a / (a + b),
        }
    }

    /// `(α, β, γ)` of the centred law, evaluated in `T`.
    pub fn coeffs_as<T: Scalar>(&self) -> PolyCoeff<T> {
        let c = |x: f64| T::from_real(x);
        let n = |k: u64| T::from_count(k);
        let zero = T::zero;
        match *self {
            Self::Normal { gamma } => PolyCoeff::new(zero(), zero(), n(2) * c(gamma)),
            Self::Student { nu } => {
                let nu = c(nu);
                let k = n(2) / (nu.clone() - T::one());
                PolyCoeff::new(k.clone(), zero(), k * nu)
            }
            Self::Pareto { nu } => {
                let k = n(2) / (c(nu) - T::one());
                let m = T::one() / (c(nu) - T::one());
                PolyCoeff::new(
                    k.clone(),
                    k.clone() * (T::one() + n(2) * m.clone()),
                    k * m.clone() * (T::one() + m),
                )
            }
            Self::Gamma { a, lambda } => {
                let l = c(lambda);
                PolyCoeff::new(zero(), n(2) / l.clone(), n(2) * c(a) / (l.clone() * l))
            }
            Self::InverseGamma { delta, lambda } => {
                let d = c(delta);
                let l1 = c(lambda) - T::one();
                PolyCoeff::new(
                    n(2) / l1.clone(),
                    n(4) * d.clone() / (l1.clone() * l1.clone()),
                    n(2) * d.clone() * d / (l1.clone() * l1.clone() * l1),
                )
            }
            Self::FDist { a, b } => {
                let (a, b) = (c(a), c(b));
                let b2 = b.clone() - n(2);
                let m = b.clone() / b2.clone();
                let k = n(4) / (a.clone() * b2.clone());
                PolyCoeff::new(
                    n(4) / b2,
                    k.clone() * (n(2) * a.clone() * m.clone() + b.clone()),
                    k * (a * m.clone() * m.clone() + b * m),
                )
            }
            Self::UniformCentered => PolyCoeff::new(-T::one(), zero(), T::one() / n(4)),
            Self::Beta { a, b } => {
                let (a, b) = (c(a), c(b));
                let s = a.clone() + b.clone();
                let k = n(2) / s.clone();
                PolyCoeff::new(
                    -k.clone(),
                    k.clone() * (b.clone() - a.clone()) / s.clone(),
                    k * a * b / (s.clone() * s),
                )
            }
        }
    }

    pub fn coeffs(&self) -> PolyCoeff<f64> {
        self.coeffs_as::<f64>()
    }

    pub fn support(&self) -> Support {
        let m = self.mean_shift();
        match self {
            Self::Normal { .. } | Self::Student { .. } => Support::real_line(),
            Self::Pareto { .. } | Self::Gamma { .. } | Self::InverseGamma { .. } | Self::FDist { .. } => Support {
                lower: -m,
                upper: f64::INFINITY,
            },
            Self::UniformCentered => Support { lower: -0.5, upper: 0.5 },
            Self::Beta { .. } => Support {
                lower: -m,
                upper: 1.0 - m,
            },
        }
    }

    /// Moments of order strictly below the bound are finite; `None` when all
    /// are.
    pub fn moment_bound(&self) -> Option<f64> {
        match *self {
            Self::Student { nu } | Self::Pareto { nu } => Some(nu),
            Self::InverseGamma { lambda, .. } => Some(lambda),
            Self::FDist { b, .. } => Some(b / 2.0),
            _ => None,
        }
    }

    /// Variance `γ / (2 - α)`.
    pub fn variance(&self) -> f64 {
        let c = self.coeffs();
        c.gamma / (2.0 - c.alpha)
    }

    /// Uncentred density and CDF.
    fn raw_functions(&self) -> (RealFn, RealFn) {
        fn pair<D>(d: D) -> (RealFn, RealFn)
        where
            D: Continuous<f64, f64> + ContinuousCDF<f64, f64> + Clone + Send + Sync + 'static,
        {
            let d2 = d.clone();
            // via the log density, so 0·∞ forms at the endpoints (inverse Gamma
            // near 0) underflow to 0 instead of NaN
            (real_fn(move |x| d.ln_pdf(x).exp()), real_fn(move |x| d2.cdf(x)))
        }
        use statrs::distribution as sd;
        // parameters were validated, so the constructors cannot fail
        match *self {
            Self::Normal { gamma } => pair(sd::Normal::new(0.0, gamma.sqrt()).expect("validated")),
            Self::Student { nu } => pair(sd::StudentsT::new(0.0, 1.0, nu).expect("validated")),
            Self::Pareto { nu } => (
                real_fn(move |y| if y > 0.0 { nu * (1.0 + y).powf(-nu - 1.0) } else { 0.0 }),
                real_fn(move |y| if y > 0.0 { 1.0 - (1.0 + y).powf(-nu) } else { 0.0 }),
            ),
            Self::Gamma { a, lambda } => pair(sd::Gamma::new(a, lambda).expect("validated")),
            Self::InverseGamma { delta, lambda } => {
                // statrs' log density is NaN for small y; write it out
                let c = lambda * delta.ln() - statrs::function::gamma::ln_gamma(lambda);
                let d = sd::InverseGamma::new(lambda, delta).expect("validated");
                (
                    real_fn(move |y| if y > 0.0 { (c - (lambda + 1.0) * y.ln() - delta / y).exp() } else { 0.0 }),
                    real_fn(move |y| d.cdf(y)),
                )
            }
            Self::FDist { a, b } => pair(sd::FisherSnedecor::new(a, b).expect("validated")),
            Self::UniformCentered => (
                real_fn(|y| if y.abs() < 0.5 { 1.0 } else { 0.0 }),
                real_fn(|y| (y + 0.5).clamp(0.0, 1.0)),
            ),
            Self::Beta { a, b } => pair(sd::Beta::new(a, b).expect("validated")),
        }
    }

    /// The centred [`TargetMeasure`] with its closed-form coefficient.
    pub fn target(&self) -> Result<TargetMeasure> {
        self.validate()?;
        let m = self.mean_shift();
        let (pdf, cdf) = self.raw_functions();
        let s = self.support();
        let raw_support = Support {
            lower: s.lower + m,
            upper: s.upper + m,
        };
        // x + m can round onto a pole of the raw density even for interior x
        let raw = real_fn(move |y| if raw_support.contains(y) { pdf(y) } else { 0.0 });
        let density = match *self {
            // from both end distances, each exact near its own end
            Self::Beta { a, b } => {
                let c = -statrs::function::beta::ln_beta(a, b);
                let hi = 1.0 - m;
                real_fn(move |x| {
                    let (p, q) = (m + x, hi - x);
                    if p > 0.0 && q > 0.0 {
                        ((a - 1.0) * p.ln() + (b - 1.0) * q.ln() + c).exp()
                    } else {
                        0.0
                    }
                })
            }
            _ => {
                let shifted = raw.clone();
                real_fn(move |x| shifted(x + m))
            }
        };
        let cdf = real_fn(move |x| cdf(x + m));
        let label = std::iter::once(self.name().to_string())
            .chain(self.params().iter().map(|(k, v)| format!("{k}={v}")))
            .collect::<Vec<_>>()
            .join(" ");
        let mut t = TargetMeasure::from_parts(
            &label,
            self.support(),
            density,
            real_fn(|x| -x),
            DiffusionCoefficient::Polynomial(self.coeffs()),
        )
        .with_cdf(cdf)
        .with_moment_bound(self.moment_bound())
        .with_scale(self.variance().sqrt());
        // half-line laws integrate best from their natural origin; on bounded
        // supports both ends are non-zero in either coordinate, and the
        // centred one keeps symmetric laws symmetric
        if raw_support.lower == 0.0 && raw_support.upper == f64::INFINITY {
            t = t.with_uncentred(raw, m);
        }
        t.named = Some(*self);
        Ok(t)
    }

    /// One exact draw from the centred law.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        use rand_distr as rd;
        let m = self.mean_shift();
        let y = match *self {
            Self::Normal { gamma } => rd::Normal::new(0.0, gamma.sqrt()).expect("validated").sample(rng),
            Self::Student { nu } => rd::StudentT::new(nu).expect("validated").sample(rng),
            Self::Pareto { nu } => rd::Pareto::new(1.0, nu).expect("validated").sample(rng) - 1.0,
            Self::Gamma { a, lambda } => rd::Gamma::new(a, 1.0 / lambda).expect("validated").sample(rng),
            Self::InverseGamma { delta, lambda } => {
                delta / rd::Gamma::new(lambda, 1.0).expect("validated").sample(rng)
            }
            Self::FDist { a, b } => rd::FisherF::new(a, b).expect("validated").sample(rng),
            Self::UniformCentered => rng.random::<f64>() - 0.5,
            Self::Beta { a, b } => rd::Beta::new(a, b).expect("validated").sample(rng),
        };
        y - m
    }

    /// `count` exact i.i.d. draws, deterministic in `seed`.
    pub fn exact_samples(&self, seed: u64, count: usize) -> Vec<f64> {
        let mut rng = substream(seed, 0);
        (0..count).map(|_| self.draw(&mut rng)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stein::quadrature::QuadOptions;

    fn all() -> Vec<NamedTarget> {
        vec![
            NamedTarget::Normal { gamma: 1.5 },
            NamedTarget::Student { nu: 5.0 },
            NamedTarget::Pareto { nu: 6.0 },
            NamedTarget::Gamma { a: 2.0, lambda: 1.5 },
            NamedTarget::InverseGamma { delta: 2.0, lambda: 6.0 },
            NamedTarget::FDist { a: 4.0, b: 12.0 },
            NamedTarget::UniformCentered,
            NamedTarget::Beta { a: 2.0, b: 3.0 },
        ]
    }

    #[test]
    fn densities_are_normalised_and_centred() {
        let opts = QuadOptions::default();
        for t in all() {
            let m = t.target().unwrap();
            let mass = m.expect(|_| 1.0, &opts).unwrap();
            let mean = m.expect(|x| x, &opts).unwrap();
            let var = m.expect(|x| x * x, &opts).unwrap();
            assert!((mass - 1.0).abs() < 1e-8, "{t:?} mass {mass}");
            assert!(mean.abs() < 1e-8, "{t:?} mean {mean}");
            assert!((var - t.variance()).abs() < 1e-7 * t.variance(), "{t:?} var {var}");
        }
    }

    #[test]
    fn cdf_matches_integrated_density() {
        for t in all() {
            let m = t.target().unwrap();
            let s = m.scale();
            for &x in &[-0.3 * s, 0.1 * s, 0.8 * s] {
                if !m.support().contains(x) {
                    continue;
                }
                let closed = m.cdf(x).unwrap();
                let p = m.density_fn();
                let quad = crate::stein::quadrature::integral(|y| p(y), m.support().lower, x).unwrap();
                assert!((closed - quad).abs() < 1e-7, "{t:?} at {x}: {closed} vs {quad}");
            }
        }
    }

    #[test]
    fn student_example_coefficients() {
        let c = NamedTarget::Student { nu: 5.0 }.coeffs();
        assert_eq!((c.alpha, c.beta, c.gamma), (0.5, 0.0, 2.5));
        let g = NamedTarget::Gamma { a: 2.0, lambda: 1.0 }.coeffs();
        assert_eq!((g.alpha, g.beta, g.gamma), (0.0, 2.0, 4.0));
    }

    #[test]
    fn validation_names_the_parameter() {
        let err = NamedTarget::from_params("student", |k| (k == "nu").then_some(1.5)).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { ref name, .. } if name == "nu"));
        let err = NamedTarget::from_params("gamma", |k| (k == "a").then_some(1.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { ref name, .. } if name == "lambda"));
        assert!(NamedTarget::from_params("cauchy", |_| None).is_err());
    }

    #[test]
    fn exact_draws_have_the_right_mean() {
        for t in all() {
            let xs = t.exact_samples(3, 200_000);
            let est = crate::gaussian::McEstimate::from_values(&xs);
            assert!(est.z_score(0.0) < 5.0, "{t:?}: {est:?}");
        }
    }
}
