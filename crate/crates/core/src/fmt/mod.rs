//! Fourth-moment diagnostics for kernels and kernel families, and the
//! classifier for second-degree coefficients.

pub mod classifier;
pub mod family;
pub mod lemmas;
pub mod moments;
pub mod residual;

pub use classifier::{c0, classifier, delta, discriminant, quadratic, ClassifierReport, ClassifierVerdict};
pub use family::{run_family_diagnostics, DiagnosticsReport, KernelFamily, MemberRecord, TrendSummary};
pub use lemmas::{gamma_kernel_gap, gamma_kernel_gap_sq, lemma_l11_defect, lemma_l11_gap, lemma_l2_combination};
pub use moments::{c_n, contraction_norms_sq, moment2, moment3, moment4, moment4_weight};
pub use residual::{
    a_of_chaos, pathwise_estimates, prop24_defect, prop24_gap, stein_residual_chaos, stein_residual_l2, ChaosResidual,
    LevelContribution, LevelKind, PathwiseEstimates, SteinResidualL2,
};
