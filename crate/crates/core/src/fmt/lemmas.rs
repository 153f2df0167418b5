use crate::error::{Error, Result};
use crate::fmt::moments::{c_n, moment2, moment3, moment4};
use crate::gaussian::SymmetricKernel;
use crate::scalar::Scalar;
use crate::stein::moments::check_alpha;
use crate::stein::PolyCoeff;

/// `E[F⁴ - (3/2) a(F) F²]` for `F = I_n(f)`; vanishes along any sequence
/// converging to the target.
pub fn lemma_l2_combination<T: Scalar>(f: &SymmetricKernel<T>, coeff: &PolyCoeff<T>) -> Result<T> {
    check_alpha(coeff)?;
    let (m2, m3, m4) = (moment2(f), moment3(f), moment4(f));
    let half3 = T::from_count(3) / T::from_count(2);
    Ok(m4.clone() - half3 * (coeff.alpha.clone() * m4 + coeff.beta.clone() * m3 + coeff.gamma.clone() * m2))
}

/// `⟨f, f ⊗̃_{n/2} f⟩ - β/(1-α) c_n ‖f‖²` (signed).
pub fn lemma_l11_defect<T: Scalar>(f: &SymmetricKernel<T>, coeff: &PolyCoeff<T>) -> Result<T> {
    let n = f.order();
    if n % 2 == 1 {
        return Err(Error::OddOrder(n));
    }
    if coeff.alpha == T::one() {
        return Err(Error::ExcludedAlpha(1.0));
    }
    let c = f.contract_sym(f, n / 2)?;
    let lhs = f.inner(&c)?;
    Ok(lhs - coeff.beta.clone() / (T::one() - coeff.alpha.clone()) * c_n::<T>(n)? * f.norm_sq())
}

/// `|⟨f, f ⊗̃_{n/2} f⟩ - β/(1-α) c_n ‖f‖²|`.
pub fn lemma_l11_gap<T: Scalar>(f: &SymmetricKernel<T>, coeff: &PolyCoeff<T>) -> Result<f64> {
    Ok(lemma_l11_defect(f, coeff)?.to_real().abs())
}

/// `‖(2/λ) c_n f - f ⊗̃_{n/2} f‖²`.
pub fn gamma_kernel_gap_sq<T: Scalar>(f: &SymmetricKernel<T>, lambda: &T) -> Result<T> {
    let n = f.order();
    if n % 2 == 1 {
        return Err(Error::OddOrder(n));
    }
    if lambda.is_zero() {
        return Err(Error::param("lambda", "must be non-zero"));
    }
    let c = f.contract_sym(f, n / 2)?;
    let scaled = f.scale(&(T::from_count(2) / lambda.clone() * c_n::<T>(n)?));
    Ok(scaled.sub(&c)?.norm_sq())
}

/// `‖(2/λ) c_n f - f ⊗̃_{n/2} f‖`.
pub fn gamma_kernel_gap<T: Scalar>(f: &SymmetricKernel<T>, lambda: &T) -> Result<f64> {
    Ok(gamma_kernel_gap_sq(f, lambda)?.to_real().max(0.0).sqrt())
}
