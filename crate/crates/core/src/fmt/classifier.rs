//! Which laws with coefficient `αx² + βx + γ` can be limits of a sequence
//! in a fixed Wiener chaos.

use serde::Serialize;

use crate::error::Result;
use crate::fmt::moments::c_n;
use crate::scalar::Scalar;
use crate::stein::moments::check_alpha;
use crate::stein::PolyCoeff;

/// `C₀ = (3/2) α [-4γ/((2-α)(2-3α)) - 3β²/((1-α)(2-3α))]`.
pub fn c0<T: Scalar>(c: &PolyCoeff<T>) -> Result<T> {
    check_alpha(c)?;
    let (a, b, g) = (c.alpha.clone(), c.beta.clone(), c.gamma.clone());
    let n = |k: u64| T::from_count(k);
    let t = n(2) - n(3) * a.clone();
    let first = -(n(4) * g) / ((n(2) - a.clone()) * t.clone());
    let second = n(3) * b.clone() * b / ((T::one() - a.clone()) * t);
    Ok(n(3) / n(2) * a * (first - second))
}

/// The discriminant as printed for the quadratic in `c`:
/// `-144α/(2-3α) [β²/(1-α)² + 2γ/(2-α)]`.
pub fn delta<T: Scalar>(c: &PolyCoeff<T>) -> Result<T> {
    check_alpha(c)?;
    let (a, b, g) = (c.alpha.clone(), c.beta.clone(), c.gamma.clone());
    let n = |k: u64| T::from_count(k);
    let one_a = T::one() - a.clone();
    let bracket = b.clone() * b / (one_a.clone() * one_a) + n(2) * g / (n(2) - a.clone());
    Ok(-(n(144) * a.clone()) / (n(2) - n(3) * a) * bracket)
}

/// Coefficients `(A, B, C)` of `3β² c² - 12β²/(1-α) c - (8C₀ - 12β²/(1-α)) = 0`.
pub fn quadratic<T: Scalar>(c: &PolyCoeff<T>) -> Result<(T, T, T)> {
    let k = c0(c)?;
    let n = |v: u64| T::from_count(v);
    let b2 = c.beta.clone() * c.beta.clone();
    let r = n(12) * b2.clone() / (T::one() - c.alpha.clone());
    Ok((n(3) * b2, -r.clone(), -(n(8) * k - r)))
}

/// `B² - 4AC` of [`quadratic`]; equals
/// `β² · (-144α/(2-3α)) [β²/(1-α)² + 4γ/(2-α)]`.
pub fn discriminant<T: Scalar>(c: &PolyCoeff<T>) -> Result<T> {
    let (qa, qb, qc) = quadratic(c)?;
    Ok(qb.clone() * qb - T::from_count(4) * qa * qc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierVerdict {
    /// Only a centred normal law can be a limit; the target is attainable
    /// only if it is itself normal.
    GaussianOnly,
    /// Only the centred Gamma law with these parameters can be a limit.
    GammaOnly { lambda: f64, a: f64 },
    OutsideHypotheses { reason: String },
    /// The coefficient contradicts what a chaos limit must satisfy.
    Inconsistent { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CnEntry {
    pub n: usize,
    pub c_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifierReport {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub c0: Option<f64>,
    pub delta: Option<f64>,
    pub discriminant_exact: Option<f64>,
    pub roots: Option<[f64; 2]>,
    pub c_n: Vec<CnEntry>,
    /// The sign argument for `C₀ ≥ 0` uses every even moment; it only
    /// applies when all of them are finite (`α ≤ 0`).
    pub c0_sign_argument_applies: bool,
    /// Whether the target itself is the law the verdict allows.
    pub target_attainable: bool,
    pub verdict: ClassifierVerdict,
}

/// Evaluate the constants and the verdict for a coefficient.
pub fn classifier(coeff: &PolyCoeff<f64>) -> ClassifierReport {
    let PolyCoeff { alpha, beta, gamma } = *coeff;
    let c_table = [2usize, 4, 6, 8]
        .iter()
        .map(|&n| CnEntry {
            n,
            c_n: c_n::<f64>(n).expect("even"),
        })
        .collect();
    let base = |verdict, attainable| ClassifierReport {
        alpha,
        beta,
        gamma,
        c0: None,
        delta: None,
        discriminant_exact: None,
        roots: None,
        c_n: Vec::new(),
        c0_sign_argument_applies: alpha <= 0.0,
        target_attainable: attainable,
        verdict,
    };
    if check_alpha(coeff).is_err() {
        let mut r = base(
            ClassifierVerdict::OutsideHypotheses {
                reason: format!("alpha = {alpha} is one of the excluded values 1, 2, 2/3"),
            },
            false,
        );
        r.c_n = c_table;
        return r;
    }
    let k0 = c0(coeff).expect("alpha checked");
    let d = delta(coeff).expect("alpha checked");
    let disc = discriminant(coeff).expect("alpha checked");
    let roots = if beta != 0.0 && disc >= 0.0 {
        let (qa, qb, _) = quadratic(coeff).expect("alpha checked");
        let s = disc.sqrt();
        Some([(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)])
    } else {
        None
    };
    let (verdict, attainable) = if beta == 0.0 {
        (ClassifierVerdict::GaussianOnly, alpha == 0.0 && gamma > 0.0)
    } else if alpha == 0.0 {
        let lambda = 2.0 / beta;
        (
            ClassifierVerdict::GammaOnly {
                lambda,
                a: gamma * lambda * lambda / 2.0,
            },
            true,
        )
    } else if alpha > 0.0 && alpha < 2.0 / 3.0 {
        (
            ClassifierVerdict::OutsideHypotheses {
                reason: format!("beta != 0 and alpha = {alpha} lies in (0, 2/3)"),
            },
            false,
        )
    } else {
        (
            ClassifierVerdict::Inconsistent {
                reason: format!("beta != 0 forces alpha = 0 outside (0, 2/3), got alpha = {alpha}"),
            },
            false,
        )
    };
    ClassifierReport {
        c0: Some(k0),
        delta: Some(d),
        discriminant_exact: Some(disc),
        roots,
        c_n: c_table,
        ..base(verdict, attainable)
    }
}
