use crate::error::{Error, Result};
use crate::stein::quadrature::{integrate, QuadOptions};
use crate::stein::target::{DiffusionCoefficient, NumericCoeff, RealFn, Support};

/// Tolerance on `∫ p = 1` and `∫ b p = 0`.
pub const HYPOTHESIS_TOL: f64 = 1e-8;

/// Point where the drift integral switches from the left to the right tail:
/// zero if it lies in the support, else the midpoint or a finite endpoint
/// offset.
pub(crate) fn split_point(support: Support) -> f64 {
    if support.contains(0.0) {
        0.0
    } else if support.is_bounded() {
        0.5 * (support.lower + support.upper)
    } else if support.lower.is_finite() {
        support.lower + 1.0
    } else {
        support.upper - 1.0
    }
}

/// Quadrature-backed coefficient `a(x) = 2 ∫_l^x b(y) p(y) dy / p(x)` that
/// makes `p` invariant for `dX = b dt + √a dW`.
///
/// Checks normalisation and centring of the drift, then positivity of `a`
/// on a 64-point interior grid.
pub fn coeff_from_density(density: RealFn, drift: RealFn, support: Support) -> Result<DiffusionCoefficient> {
    let opts = QuadOptions::default();
    let p = density.clone();
    let mass = integrate(|x| p(x), support.lower, support.upper, &opts)?.value;
    if (mass - 1.0).abs() > HYPOTHESIS_TOL {
        return Err(Error::NotNormalized(mass));
    }
    let b = drift.clone();
    let centre = integrate(|x| b(x) * p(x), support.lower, support.upper, &opts)?.value;
    if centre.abs() > HYPOTHESIS_TOL {
        return Err(Error::DriftNotCentered(centre));
    }
    let coeff = NumericCoeff::new(density, drift, support, split_point(support));
    let scale = 1.0;
    for x in support.interior_grid(64, scale, 0.02) {
        let a = coeff.eval(x)?;
        if !(a > 0.0) {
            return Err(Error::SignViolation { x, value: a });
        }
    }
    Ok(DiffusionCoefficient::Numeric(coeff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stein::named::NamedTarget;
    use crate::stein::target::real_fn;

    fn numeric(t: NamedTarget) -> DiffusionCoefficient {
        let m = t.target().unwrap();
        coeff_from_density(m.density_fn(), m.drift_fn(), m.support()).unwrap()
    }

    #[test]
    fn normal_gives_constant_coefficient() {
        let a = numeric(NamedTarget::Normal { gamma: 2.0 });
        for &x in &[-3.0, -0.5, 0.0, 1.2, 4.0] {
            assert!((a.eval(x).unwrap() - 4.0).abs() < 1e-8);
        }
    }

    #[test]
    fn uniform_gives_inverted_parabola() {
        let a = numeric(NamedTarget::UniformCentered);
        for &x in &[-0.45, -0.2, 0.0, 0.3, 0.49] {
            assert!((a.eval(x).unwrap() - (0.25 - x * x)).abs() < 1e-10);
        }
    }

    #[test]
    fn student_five_on_wide_grid() {
        let a = numeric(NamedTarget::Student { nu: 5.0 });
        for i in 0..=40 {
            let x = -10.0 + 0.5 * i as f64;
            let want = 0.5 * (x * x + 5.0);
            let got = a.eval(x).unwrap();
            assert!(((got - want) / want).abs() < 1e-6, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn rejects_bad_densities() {
        let s = Support::real_line();
        let half = real_fn(|x| 0.5 * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt());
        assert!(matches!(
            coeff_from_density(half, real_fn(|x| -x), s),
            Err(Error::NotNormalized(_))
        ));
        let shifted = real_fn(|x| (-0.5 * (x - 1.0) * (x - 1.0)).exp() / (2.0 * std::f64::consts::PI).sqrt());
        assert!(matches!(
            coeff_from_density(shifted, real_fn(|x| -x), s),
            Err(Error::DriftNotCentered(_))
        ));
    }
}
