use std::sync::Arc;

use crate::error::{Error, Result};
use crate::stein::coefficient::split_point;
use crate::stein::quadrature::{integrate, QuadOptions};
use crate::stein::target::{real_fn, RealFn, TargetMeasure};

/// A `C¹` test function with its derivative. `degree` records polynomial
/// growth so integrability against heavy-tailed targets can be checked up
/// front.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    pub f: RealFn,
    pub df: RealFn,
    pub degree: Option<u32>,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TestFunction({})", self.name)
    }
}

impl TestFunction {
    pub fn new(name: &str, f: RealFn, df: RealFn, degree: Option<u32>) -> Self {
        Self {
            name: name.to_string(),
            f,
            df,
            degree,
        }
    }

    /// `x^k`.
    pub fn monomial(k: u32) -> Self {
        let name = match k {
            0 => "1".to_string(),
            1 => "x".to_string(),
            _ => format!("x^{k}"),
        };
        let kf = k as f64;
        Self::new(
            &name,
            real_fn(move |x| x.powi(k as i32)),
            real_fn(move |x| if k == 0 { 0.0 } else { kf * x.powi(k as i32 - 1) }),
            Some(k),
        )
    }

    pub fn sin() -> Self {
        Self::new("sin x", real_fn(f64::sin), real_fn(f64::cos), Some(0))
    }

    /// `1{x > t}`; only usable as a right-hand side, its derivative is
    /// reported as zero.
    pub fn indicator_above(t: f64) -> Self {
        Self::new(
            &format!("1{{x>{t}}}"),
            real_fn(move |x| if x > t { 1.0 } else { 0.0 }),
            real_fn(|_| 0.0),
            Some(0),
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.df)(x)
    }
}

/// `{x, x², x³, sin x}`, the fixed dictionary of characterisation tests.
pub fn dictionary() -> Vec<TestFunction> {
    vec![
        TestFunction::monomial(1),
        TestFunction::monomial(2),
        TestFunction::monomial(3),
        TestFunction::sin(),
    ]
}

fn check_integrable(target: &TargetMeasure, h: &TestFunction, extra: u32) -> Result<()> {
    if let (Some(bound), Some(k)) = (target.moment_bound(), h.degree) {
        let need = (k + extra) as f64;
        if need >= bound {
            return Err(Error::NonIntegrable(format!(
                "{} needs moments of order {need}, but {} only has moments below {bound}",
                h.name,
                target.label()
            )));
        }
    }
    Ok(())
}

/// `E[½ a(X) h'(X) + b(X) h(X)]` under the target, by quadrature. Vanishes
/// for every admissible `h` exactly when the law is the target.
pub fn stein_identity_residual(target: &TargetMeasure, h: &TestFunction) -> Result<f64> {
    check_integrable(target, h, 1)?;
    let (diffusion, drift) = stein_identity_terms(target, h)?;
    Ok(diffusion + drift)
}

/// The two parts `(E[½ a h'], E[b h])` of [`stein_identity_residual`].
pub fn stein_identity_terms(target: &TargetMeasure, h: &TestFunction) -> Result<(f64, f64)> {
    check_integrable(target, h, 1)?;
    let opts = QuadOptions::tight();
    let coeff = target.coeff();
    let first = match coeff.polynomial() {
        Some(c) => target.expect(|x| 0.5 * c.eval(&x) * h.derivative(x), &opts)?,
        None => {
            // ½ a p = ∫_l^x b p, so no division by the density is needed
            let s = target.support();
            let failure = std::cell::RefCell::new(None);
            let v = integrate(
                |x| match coeff.eval(x) {
                    Ok(a) => 0.5 * a * target.density(x) * h.derivative(x),
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                },
                s.lower,
                s.upper,
                &QuadOptions::default(),
            )?;
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            v.value
        }
    };
    let second = target.expect(|x| target.drift(x) * h.eval(x), &opts)?;
    Ok((first, second))
}

/// Solution `g̃_f = 2/(a p) ∫_l^x (f - m_f) p` of `f - m_f = ½ a g' + b g`.
#[derive(Clone)]
pub struct SteinSolution {
    target: TargetMeasure,
    f: RealFn,
    mean: f64,
    split: f64,
    step: f64,
    opts: QuadOptions,
}

impl std::fmt::Debug for SteinSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SteinSolution")
            .field("target", &self.target.label())
            .field("mean", &self.mean)
            .finish()
    }
}

/// Build the Stein solution for `f` (which must be integrable under the
/// target).
pub fn stein_solution(target: &TargetMeasure, f: &TestFunction) -> Result<SteinSolution> {
    check_integrable(target, f, 0)?;
    let opts = QuadOptions::tight();
    let fun = f.f.clone();
    let mean = target.expect(|x| fun(x), &QuadOptions::default())?;
    Ok(SteinSolution {
        target: target.clone(),
        f: f.f.clone(),
        mean,
        split: split_point(target.support()),
        step: 1e-5 * target.scale(),
        opts,
    })
}

impl SteinSolution {
    /// `m_f = E[f(X)]`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    fn centred(&self) -> impl Fn(f64) -> f64 + '_ {
        let p = self.target.density_fn();
        move |y| ((self.f)(y) - self.mean) * p(y)
    }

    /// `J(x) = ∫_l^x (f - m_f) p`, from the right tail past the split point.
    pub fn primitive(&self, x: f64) -> Result<f64> {
        let s = self.target.support();
        let g = self.centred();
        if x <= self.split {
            Ok(integrate(g, s.lower, x, &self.opts)?.value)
        } else {
            Ok(-integrate(g, x, s.upper, &self.opts)?.value)
        }
    }

    fn from_primitive(&self, x: f64, j: f64) -> Result<f64> {
        let a = self.target.a(x)?;
        Ok(2.0 * j / (a * self.target.density(x)))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.from_primitive(x, self.primitive(x)?)
    }

    /// `g̃(x)` and `g̃'(x)`, the latter by a 5-point central stencil whose
    /// primitives are incremented from `J(x)` rather than recomputed.
    pub fn eval_with_derivative(&self, x: f64) -> Result<(f64, f64)> {
        let h = self.step;
        let j0 = self.primitive(x)?;
        let g = self.centred();
        let mut vals = [0.0; 4];
        for (slot, k) in [-2.0, -1.0, 1.0, 2.0].into_iter().enumerate() {
            let y = x + k * h;
            let jy = j0 + integrate(&g, x, y, &self.opts)?.value;
            vals[slot] = self.from_primitive(y, jy)?;
        }
        let d = (vals[0] - 8.0 * vals[1] + 8.0 * vals[2] - vals[3]) / (12.0 * h);
        Ok((self.from_primitive(x, j0)?, d))
    }

    /// `f(x) - m_f - ½ a(x) g̃'(x) - b(x) g̃(x)`.
    pub fn residual(&self, x: f64) -> Result<f64> {
        let (g, dg) = self.eval_with_derivative(x)?;
        let a = self.target.a(x)?;
        Ok((self.f)(x) - self.mean - 0.5 * a * dg - self.target.drift(x) * g)
    }

    /// Largest `|residual|` over `n` interior points.
    pub fn max_residual(&self, n: usize) -> Result<f64> {
        let grid = self.target.support().interior_grid(n, self.target.scale(), 0.02);
        grid.into_iter()
            .try_fold(0.0f64, |acc, x| Ok(acc.max(self.residual(x)?.abs())))
    }

    pub fn as_fn(self) -> RealFn {
        let s = Arc::new(self);
        real_fn(move |x| s.eval(x).unwrap_or(f64::NAN))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stein::named::NamedTarget;

    #[test]
    fn normal_identity_function_gives_minus_one() {
        let t = NamedTarget::Normal { gamma: 1.7 }.target().unwrap();
        let s = stein_solution(&t, &TestFunction::monomial(1)).unwrap();
        for &x in &[-4.0, -1.3, 0.0, 0.4, 2.5, 4.0] {
            assert!((s.eval(x).unwrap() + 1.0).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn constant_function_gives_zero() {
        let t = NamedTarget::Beta { a: 2.0, b: 3.0 }.target().unwrap();
        let s = stein_solution(&t, &TestFunction::monomial(0)).unwrap();
        for &x in &[-0.3, 0.0, 0.4] {
            assert!(s.eval(x).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_residual_small() {
        let t = NamedTarget::Gamma { a: 1.0, lambda: 1.0 }.target().unwrap();
        let s = stein_solution(&t, &TestFunction::monomial(1)).unwrap();
        assert!(s.max_residual(40).unwrap() < 1e-6);
    }

    #[test]
    fn identity_residual_and_integrability() {
        let t = NamedTarget::Normal { gamma: 1.0 }.target().unwrap();
        assert!(stein_identity_residual(&t, &TestFunction::monomial(1)).unwrap().abs() < 1e-12);
        let st = NamedTarget::Student { nu: 5.0 }.target().unwrap();
        assert!(matches!(
            stein_identity_residual(&st, &TestFunction::monomial(5)),
            Err(Error::NonIntegrable(_))
        ));
        assert!(stein_identity_residual(&st, &TestFunction::monomial(3)).unwrap().abs() < 1e-8);
    }
}
