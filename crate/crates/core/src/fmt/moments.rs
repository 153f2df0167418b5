use crate::error::{Error, Result};
use crate::gaussian::SymmetricKernel;
use crate::scalar::{binomial, factorial, Scalar};

/// `c_n = (n/2)!³ / n!²` for even `n`.
pub fn c_n<T: Scalar>(n: usize) -> Result<T> {
    if n % 2 == 1 {
        return Err(Error::OddOrder(n));
    }
    let h: T = factorial(n / 2);
    let f: T = factorial(n);
    Ok(h.clone() * h.clone() * h / (f.clone() * f))
}

/// `E[I_n(f)²] = n! ‖f‖²`.
pub fn moment2<T: Scalar>(f: &SymmetricKernel<T>) -> T {
    factorial::<T>(f.order()) * f.norm_sq()
}

/// `E[I_n(f)³]`: `n!³/(n/2)!³ ⟨f, f ⊗̃_{n/2} f⟩` for even `n`, zero for odd.
pub fn moment3<T: Scalar>(f: &SymmetricKernel<T>) -> T {
    let n = f.order();
    if n % 2 == 1 {
        return T::zero();
    }
    let c = f.contract_sym(f, n / 2).expect("self-contraction in range");
    let nf: T = factorial(n);
    let hf: T = factorial(n / 2);
    let w = nf.clone() * nf.clone() * nf / (hf.clone() * hf.clone() * hf);
    w * f.inner(&c).expect("same dimension")
}

/// Weight of `‖f ⊗̃_p f‖²` in the fourth-moment formula, including the
/// leading `3n`.
pub fn moment4_weight<T: Scalar>(n: usize, p: usize) -> T {
    let b1: T = binomial(n - 1, p - 1);
    let b2: T = binomial(n, p);
    T::from_count(3 * n as u64)
        * factorial::<T>(p - 1)
        * b1.clone()
        * b1
        * factorial::<T>(p)
        * b2.clone()
        * b2
        * factorial::<T>(2 * n - 2 * p)
}

/// `‖f ⊗̃_p f‖²` for `p = 1, ..., n-1`.
pub fn contraction_norms_sq<T: Scalar>(f: &SymmetricKernel<T>) -> Vec<T> {
    (1..f.order())
        .map(|p| f.contract_sym(f, p).expect("in range").norm_sq())
        .collect()
}

/// `E[I_n(f)⁴] = 3(E F²)² + 3n Σ_p (p-1)! C(n-1,p-1)² p! C(n,p)² (2n-2p)! ‖f ⊗̃_p f‖²`.
pub fn moment4<T: Scalar>(f: &SymmetricKernel<T>) -> T {
    let n = f.order();
    let m2 = moment2(f);
    let tail = contraction_norms_sq(f)
        .into_iter()
        .enumerate()
        .fold(T::zero(), |acc, (i, c)| acc + moment4_weight::<T>(n, i + 1) * c);
    T::from_count(3) * m2.clone() * m2 + tail
}
