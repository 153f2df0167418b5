//! Moments of a law whose Stein coefficient is `αx² + βx + γ`.
//!
//! Plugging `h(x) = x^{j-1}` into the characterising identity gives
//! `(1 - (j-1)α/2) M_j = (j-1)/2 (β M_{j-1} + γ M_{j-2})`, with `M_0 = 1`
//! and `M_1 = 0`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stein::target::PolyCoeff;

fn excluded<T: Scalar>(alpha: &T) -> bool {
    let one = T::one();
    let two = T::from_count(2);
    *alpha == one || *alpha == two || T::from_count(3) * alpha.clone() == two
}

/// Reject `α ∈ {1, 2, 2/3}`.
pub fn check_alpha<T: Scalar>(c: &PolyCoeff<T>) -> Result<()> {
    if excluded(&c.alpha) {
        Err(Error::ExcludedAlpha(c.alpha.to_real()))
    } else {
        Ok(())
    }
}

/// Closed-form `(E X², E X³, E X⁴)`.
pub fn poly_moments<T: Scalar>(c: &PolyCoeff<T>) -> Result<(T, T, T)> {
    check_alpha(c)?;
    let one = T::one();
    let two = T::from_count(2);
    let three = T::from_count(3);
    let (a, b, g) = (c.alpha.clone(), c.beta.clone(), c.gamma.clone());
    let m2 = g.clone() / (two.clone() - a.clone());
    let m3 = b.clone() * g.clone() / ((one.clone() - a.clone()) * (two.clone() - a.clone()));
    let m4 = three.clone() * g.clone() * (b.clone() * b / (one - a.clone()) + g)
        / ((two - a.clone()) * (T::from_count(2) - three * a));
    Ok((m2, m3, m4))
}

/// `M_j` from `moments = [M_0, ..., M_{j-1}]`.
pub fn moment_recursion<T: Scalar>(c: &PolyCoeff<T>, moments: &[T]) -> Result<T> {
    let j = moments.len();
    if j < 2 {
        return Ok(if j == 0 { T::one() } else { T::zero() });
    }
    let jm1 = T::from_count((j - 1) as u64);
    let two = T::from_count(2);
    let lead = T::one() - jm1.clone() * c.alpha.clone() / two.clone();
    if lead.is_zero() {
        return Err(Error::VanishingCoefficient { order: j });
    }
    if lead.is_negative() {
        return Err(Error::InfiniteMoment { order: j });
    }
    let rhs = jm1 / two * (c.beta.clone() * moments[j - 1].clone() + c.gamma.clone() * moments[j - 2].clone());
    Ok(rhs / lead)
}

/// `[M_0, ..., M_max]` by repeated recursion.
pub fn moment_sequence<T: Scalar>(c: &PolyCoeff<T>, max_order: usize) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(max_order + 1);
    for _ in 0..=max_order {
        let next = moment_recursion(c, &out)?;
        out.push(next);
    }
    Ok(out)
}
