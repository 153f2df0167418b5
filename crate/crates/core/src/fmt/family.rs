use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt::classifier::{classifier, ClassifierReport};
use crate::fmt::lemmas::{gamma_kernel_gap, lemma_l11_gap, lemma_l2_combination};
use crate::fmt::moments::{contraction_norms_sq, moment2, moment3, moment4};
use crate::fmt::residual::{pathwise_estimates, prop24_defect, stein_residual_chaos, LevelContribution};
use crate::gaussian::{McEstimate, SymmetricKernel};
use crate::stein::{poly_moments, NamedTarget, PolyCoeff};

/// A sequence `m ↦ f_m` of kernels of a common order.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// `f_m = (2m)^{-1/2} Σ_{i<m} e_i ⊗ e_i`, whose integrals tend to `N(0, 1)`.
    GaussianClt,
    /// `f = Σ_{i<k} e_i ⊗ e_i` for every `m`; `I_2(f)` is centred `Γ(k/2, ½)`.
    GammaFixed { k: usize },
    /// User-supplied members, looked up by index `m`.
    Explicit { members: Vec<(usize, SymmetricKernel<f64>)> },
}

impl KernelFamily {
    pub fn name(&self) -> String {
        match self {
            Self::GaussianClt => "gaussian_clt".into(),
            Self::GammaFixed { k } => format!("gamma_fixed {k}"),
            Self::Explicit { .. } => "explicit".into(),
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Self::Explicit { members } => members.first().map(|(_, f)| f.order()).unwrap_or(0),
            _ => 2,
        }
    }

    /// Member `m` embedded in dimension `dim`.
    pub fn member(&self, m: usize, dim: usize) -> Result<SymmetricKernel<f64>> {
        let diag = |count: usize, scale: f64| {
            SymmetricKernel::from_entries(dim, 2, (0..count).map(|i| (vec![i, i], scale)))
        };
        match self {
            Self::GaussianClt => {
                if m == 0 || m > dim {
                    return Err(Error::param("m", format!("need 1 ≤ m ≤ {dim}, got {m}")));
                }
                diag(m, (2.0 * m as f64).powf(-0.5))
            }
            Self::GammaFixed { k } => {
                if *k == 0 || *k > dim {
                    return Err(Error::param("k", format!("need 1 ≤ k ≤ {dim}, got {k}")));
                }
                diag(*k, 1.0)
            }
            Self::Explicit { members } => members
                .iter()
                .find(|(i, _)| *i == m)
                .map(|(_, f)| f.clone())
                .ok_or_else(|| Error::param("m", format!("no member with index {m}"))),
        }
    }

    /// Common dimension for the indices `ms`.
    pub fn dim_for(&self, ms: &[usize]) -> Result<usize> {
        match self {
            Self::GaussianClt => ms.iter().copied().max().ok_or_else(|| Error::param("m", "empty list")),
            Self::GammaFixed { k } => Ok(*k),
            Self::Explicit { members } => {
                let first = members.first().ok_or_else(|| Error::param("family", "no members"))?;
                let (dim, order) = (first.1.dim(), first.1.order());
                if order == 0 {
                    return Err(Error::param("family", "kernels need order ≥ 1"));
                }
                for (m, f) in members {
                    if f.dim() != dim || f.order() != order {
                        return Err(Error::param(
                            "family",
                            format!("member {m} has (dim, order) = ({}, {}), expected ({dim}, {order})", f.dim(), f.order()),
                        ));
                    }
                }
                Ok(dim)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberRecord {
    pub m: usize,
    pub ef2: f64,
    pub ef3: f64,
    pub ef4: f64,
    /// `‖f_m ⊗̃_p f_m‖` for `p = 1, ..., n-1`.
    pub contraction_norms: Vec<f64>,
    pub stein_residual_l2: f64,
    pub stein_residual_levels: Vec<LevelContribution<f64>>,
    pub stein_residual_l2_mc: Option<McEstimate>,
    /// `E|½a(F) - n⁻¹‖DF‖²|`, reported without the unknown constant of the
    /// distance bound.
    pub stein_bound_l1_mc: Option<McEstimate>,
    /// `|¼E a(F)² - n⁻²E‖DF‖⁴|`.
    pub prop24_gap: f64,
    pub prop24_defect_mc: Option<McEstimate>,
    /// `‖β c_n f_m - f_m ⊗̃_{n/2} f_m‖` for even `n`.
    pub gamma_kernel_gap: Option<f64>,
    pub lemma_l11_gap: Option<f64>,
    pub lemma_l2_combination: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendSummary {
    pub quantity: String,
    /// `value(m_i) / value(m_{i+1})` for consecutive members.
    pub ratios: Vec<f64>,
    pub monotone_decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetMoments {
    pub ex2: f64,
    pub ex3: f64,
    pub ex4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub family: String,
    pub order: usize,
    pub dim: usize,
    pub target: NamedTarget,
    pub coeff: PolyCoeff<f64>,
    pub target_moments: TargetMoments,
    pub mc_samples: usize,
    pub seed: u64,
    pub members: Vec<MemberRecord>,
    pub trends: Vec<TrendSummary>,
    pub classifier: ClassifierReport,
}

fn trend(quantity: &str, values: &[f64]) -> TrendSummary {
    let ratios = values.windows(2).map(|w| w[0] / w[1]).collect();
    TrendSummary {
        quantity: quantity.to_string(),
        ratios,
        monotone_decreasing: values.windows(2).all(|w| w[1] <= w[0]),
    }
}

/// Exact per-member diagnostics plus optional Monte Carlo cross-checks
/// (`mc_samples = 0` skips them). Member `m_i` uses seed substream
/// `seed + i`.
pub fn run_family_diagnostics(
    family: &KernelFamily,
    ms: &[usize],
    target: &NamedTarget,
    mc_samples: usize,
    seed: u64,
) -> Result<DiagnosticsReport> {
    target.validate()?;
    if let Some(bound) = target.moment_bound() {
        if bound <= 4.0 {
            return Err(Error::InfiniteMoment { order: 4 });
        }
    }
    let coeff = target.coeffs();
    let (ex2, ex3, ex4) = poly_moments(&coeff)?;
    let dim = family.dim_for(ms)?;
    let n = family.order();
    let mut members = Vec::with_capacity(ms.len());
    for (i, &m) in ms.iter().enumerate() {
        let f = family.member(m, dim)?;
        let residual = stein_residual_chaos(&f, &coeff)?;
        let pw = if mc_samples > 0 {
            Some(pathwise_estimates(&f, &coeff, mc_samples, seed.wrapping_add(i as u64))?)
        } else {
            None
        };
        let even = n % 2 == 0;
        members.push(MemberRecord {
            m,
            ef2: moment2(&f),
            ef3: moment3(&f),
            ef4: moment4(&f),
            contraction_norms: contraction_norms_sq(&f).into_iter().map(f64::sqrt).collect(),
            stein_residual_l2: residual.value,
            stein_residual_levels: residual.levels,
            stein_residual_l2_mc: pw.map(|p| p.residual_l2),
            stein_bound_l1_mc: pw.map(|p| p.residual_l1),
            prop24_gap: prop24_defect(&f, &coeff)?.abs(),
            prop24_defect_mc: pw.map(|p| p.prop24),
            gamma_kernel_gap: if even && coeff.beta != 0.0 {
                Some(gamma_kernel_gap(&f, &(2.0 / coeff.beta))?)
            } else {
                None
            },
            lemma_l11_gap: if even { Some(lemma_l11_gap(&f, &coeff)?) } else { None },
            lemma_l2_combination: Some(lemma_l2_combination(&f, &coeff)?),
        });
    }
    let col = |g: &dyn Fn(&MemberRecord) -> f64| members.iter().map(g).collect::<Vec<_>>();
    let mut trends = vec![
        trend("ef4_minus_target", &col(&|r| (r.ef4 - ex4).abs())),
        trend("stein_residual_l2", &col(&|r| r.stein_residual_l2)),
        trend("prop24_gap", &col(&|r| r.prop24_gap)),
    ];
    for p in 1..n {
        trends.push(trend(
            &format!("contraction_norm_sq_{p}"),
            &col(&|r| r.contraction_norms[p - 1].powi(2)),
        ));
    }
    Ok(DiagnosticsReport {
        family: family.name(),
        order: n,
        dim,
        target: *target,
        coeff: coeff.clone(),
        target_moments: TargetMoments { ex2, ex3, ex4 },
        mc_samples,
        seed,
        members,
        trends,
        classifier: classifier(&coeff),
    })
}
