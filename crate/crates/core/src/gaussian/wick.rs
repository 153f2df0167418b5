use crate::error::{Error, Result};
use crate::gaussian::chaos::ChaosVector;
use crate::scalar::Scalar;

/// Maximum number of chaos factors the moment oracle will multiply out.
pub const WICK_FACTOR_LIMIT: usize = 12;

/// Exact mixed moment `E[Π_i F_i^{p_i}]`.
///
/// The factors are split into two halves, each half is multiplied out with
/// the product formula, and the level-0 component of the final product is
/// read off through the isometry `E[I_k(a) I_k(b)] = k! ⟨a, b⟩`. This is the
/// ground-truth oracle the closed-form moment formulas are checked against.
pub fn wick_moment<T: Scalar>(factors: &[ChaosVector<T>], powers: &[usize]) -> Result<T> {
    if factors.len() != powers.len() {
        return Err(Error::Malformed(format!(
            "{} factors but {} powers",
            factors.len(),
            powers.len()
        )));
    }
    if powers.iter().any(|&p| p == 0) {
        return Err(Error::Malformed("powers must be positive".into()));
    }
    let total: usize = powers.iter().sum();
    if total > WICK_FACTOR_LIMIT {
        return Err(Error::GuardExceeded {
            factors: total,
            limit: WICK_FACTOR_LIMIT,
        });
    }
    let Some(first) = factors.first() else {
        return Ok(T::one());
    };
    let dim = first.dim();
    let mut flat: Vec<&ChaosVector<T>> = Vec::with_capacity(total);
    for (f, &p) in factors.iter().zip(powers) {
        if f.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: f.dim(),
            });
        }
        flat.extend(std::iter::repeat(f).take(p));
    }
    if flat.len() == 1 {
        return Ok(flat[0].expectation());
    }
    let (left, right) = flat.split_at(flat.len() / 2);
    let multiply = |part: &[&ChaosVector<T>]| -> Result<ChaosVector<T>> {
        let mut acc = part[0].clone();
        for f in &part[1..] {
            acc = acc.product(f)?;
        }
        Ok(acc)
    };
    let a = multiply(left)?;
    let b = multiply(right)?;
    a.expectation_of_product(&b)
}
