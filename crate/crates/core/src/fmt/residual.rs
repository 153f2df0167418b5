//! `E[(½ a(F) - n⁻¹ ‖DF‖²)²]` and the related fourth-moment gap for
//! `F = I_n(f)` and a second-degree coefficient `a`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::sampling::{sample_gaussian, Accumulator};
use crate::gaussian::{ChaosVector, McEstimate, SymmetricKernel};
use crate::scalar::{binomial, factorial, Scalar};
use crate::stein::PolyCoeff;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelKind {
    /// Even level `k ≤ 2n-2`, where `a(F)` is matched against `‖DF‖²`.
    Matched,
    /// Odd level `k ≤ 2n-2`; only `a(F)` contributes.
    Odd,
    /// Level `k ≥ 2n-1`; only `a(F)` contributes.
    High,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelContribution<T> {
    pub level: usize,
    pub kind: LevelKind,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaosResidual<T> {
    /// Sum of the per-level contributions.
    pub value: T,
    /// `E[G²]` for `G = ½a(F) - n⁻¹‖DF‖²` built by chaos subtraction.
    pub direct: T,
    pub levels: Vec<LevelContribution<T>>,
    /// Chaos expansion of `a(F)`.
    pub a_of_f: ChaosVector<T>,
}

fn check_order<T: Scalar>(f: &SymmetricKernel<T>) -> Result<usize> {
    match f.order() {
        0 => Err(Error::InvalidKernel("order must be at least 1".into())),
        n => Ok(n),
    }
}

/// `a(F)` as a chaos vector.
pub fn a_of_chaos<T: Scalar>(f: &SymmetricKernel<T>, coeff: &PolyCoeff<T>) -> Result<ChaosVector<T>> {
    ChaosVector::from_kernel(f.clone()).polynomial(&coeff.as_polynomial())
}

/// Level-by-level evaluation. With `a(F) = Σ I_k(g_k)` the contribution of
/// an even level `k ≤ 2n-2` is
/// `k! ‖½ g_k - n (n-1-k/2)! C(n-1,k/2)² f ⊗̃_{n-k/2} f‖²`; every other
/// level contributes `¼ k! ‖g_k‖²`. The direct route forms
/// `½ a(F) - n⁻¹ ⟨DF, DF⟩` with the product formula and takes its second
/// moment, so the two are independent.
pub fn stein_residual_chaos<T: Scalar>(f: &SymmetricKernel<T>, coeff: &PolyCoeff<T>) -> Result<ChaosResidual<T>> {
    let n = check_order(f)?;
    let a = a_of_chaos(f, coeff)?;
    let half = T::one() / T::from_count(2);
    let quarter = half.clone() * half.clone();
    let top = a.max_level().unwrap_or(0).max(2 * n - 2);
    let mut levels = Vec::new();
    let mut total = T::zero();
    for k in 0..=top {
        let g = a.level(k).cloned().unwrap_or_else(|| SymmetricKernel::zero(f.dim(), k));
        let kf: T = factorial(k);
        let (kind, value) = if k % 2 == 0 && k <= 2 * n - 2 {
            let l = k / 2;
            let b: T = binomial(n - 1, l);
            let w = T::from_count(n as u64) * factorial::<T>(n - 1 - l) * b.clone() * b;
            let d = g.scale(&half).sub(&f.contract_sym(f, n - l)?.scale(&w))?;
            (LevelKind::Matched, kf * d.norm_sq())
        } else {
            let kind = if k <= 2 * n - 2 { LevelKind::Odd } else { LevelKind::High };
            (kind, quarter.clone() * kf * g.norm_sq())
        };
        total = total + value.clone();
        levels.push(LevelContribution { level: k, kind, value });
    }
    let ff = ChaosVector::from_kernel(f.clone());
    let g = a
        .scale(&half)
        .sub(&ff.malliavin_inner(&ff)?.scale(&(T::one() / T::from_count(n as u64))))?;
    Ok(ChaosResidual {
        value: total,
        direct: g.second_moment(),
        levels,
        a_of_f: a,
    })
}

/// `¼ E[a(F)²] - n⁻² E[‖DF‖⁴]` by chaos arithmetic (signed).
pub fn prop24_defect<T: Scalar>(f: &SymmetricKernel<T>, coeff: &PolyCoeff<T>) -> Result<T> {
    let n = check_order(f)?;
    let a = a_of_chaos(f, coeff)?;
    let ff = ChaosVector::from_kernel(f.clone());
    let d = ff.malliavin_inner(&ff)?;
    let nn = T::from_count((n * n) as u64);
    Ok(a.second_moment() / T::from_count(4) - d.second_moment() / nn)
}

/// `|¼ E[a(F)²] - n⁻² E[‖DF‖⁴]|`.
pub fn prop24_gap<T: Scalar>(f: &SymmetricKernel<T>, coeff: &PolyCoeff<T>) -> Result<f64> {
    Ok(prop24_defect(f, coeff)?.to_real().abs())
}

/// Pathwise evaluator of `F`, `a(F)` and `‖DF‖²` for a fixed kernel.
struct Pathwise {
    f: SymmetricKernel<f64>,
    slices: Vec<(usize, SymmetricKernel<f64>)>,
    coeff: PolyCoeff<f64>,
    n: f64,
}

impl Pathwise {
    fn new(f: &SymmetricKernel<f64>, coeff: &PolyCoeff<f64>) -> Result<Self> {
        let n = check_order(f)?;
        let slices = (0..f.dim())
            .map(|i| (i, f.slice(i)))
            .filter(|(_, s)| !s.is_zero())
            .collect();
        Ok(Self {
            f: f.clone(),
            slices,
            coeff: coeff.clone(),
            n: n as f64,
        })
    }

    /// `(a(F), ‖DF‖²)` at `x`.
    fn eval(&self, x: &[f64]) -> Result<(f64, f64)> {
        let v = self.f.eval(x)?;
        let mut dd = 0.0;
        for (_, s) in &self.slices {
            let d = self.n * s.eval(x)?;
            dd += d * d;
        }
        Ok((self.coeff.eval(&v), dd))
    }
}

/// Monte Carlo estimates over `N(0, I_dim)` draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathwiseEstimates {
    /// `E[(½a(F) - n⁻¹‖DF‖²)²]`.
    pub residual_l2: McEstimate,
    /// `E|½a(F) - n⁻¹‖DF‖²|`, the expectation term of the Stein bound.
    pub residual_l1: McEstimate,
    /// `¼ a(F)² - n⁻²‖DF‖⁴` averaged (signed).
    pub prop24: McEstimate,
}

pub fn pathwise_estimates(
    f: &SymmetricKernel<f64>,
    coeff: &PolyCoeff<f64>,
    samples: usize,
    seed: u64,
) -> Result<PathwiseEstimates> {
    let pw = Pathwise::new(f, coeff)?;
    let (mut l2, mut l1, mut p24) = (Accumulator::default(), Accumulator::default(), Accumulator::default());
    for x in sample_gaussian(f.dim(), seed, samples) {
        let (a, dd) = pw.eval(&x)?;
        let g = 0.5 * a - dd / pw.n;
        l2.push(g * g);
        l1.push(g.abs());
        p24.push(0.25 * a * a - dd * dd / (pw.n * pw.n));
    }
    Ok(PathwiseEstimates {
        residual_l2: l2.finish(),
        residual_l1: l1.finish(),
        prop24: p24.finish(),
    })
}

/// Both routes for the Stein residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteinResidualL2 {
    pub value_by_chaos: f64,
    pub levels: Vec<LevelContribution<f64>>,
    pub value_by_mc: Option<McEstimate>,
}

/// `E[(½ a(F) - n⁻¹‖DF‖²)²]` by chaos arithmetic and, if `mc_samples > 0`,
/// by Monte Carlo.
pub fn stein_residual_l2(
    f: &SymmetricKernel<f64>,
    coeff: &PolyCoeff<f64>,
    mc_samples: usize,
    seed: u64,
) -> Result<SteinResidualL2> {
    let chaos = stein_residual_chaos(f, coeff)?;
    let mc = if mc_samples > 0 {
        Some(pathwise_estimates(f, coeff, mc_samples, seed)?.residual_l2)
    } else {
        None
    };
    Ok(SteinResidualL2 {
        value_by_chaos: chaos.value,
        levels: chaos.levels,
        value_by_mc: mc,
    })
}
