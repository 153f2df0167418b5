//! Scalar abstraction for the exact chaos algebra.
//!
//! Everything in [`crate::gaussian`] and the closed-form parts of
//! [`crate::stein`] and [`crate::fmt`] only needs field operations plus
//! integer embedding, so they are written against [`Scalar`]. That covers
//! `f64`, `f32` and exact rationals ([`num_rational::BigRational`]).

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Field-like scalar usable by the kernel and chaos arithmetic.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Embed a small non-negative integer.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("integer embedding")
    }

    /// Embed an `f64`; exact for rational backends.
    fn from_real(x: f64) -> Self {
        Self::from_f64(x).expect("real embedding")
    }

    fn to_real(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num + Signed + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// `n!` in the scalar type.
pub fn factorial<T: Scalar>(n: usize) -> T {
    (1..=n as u64).fold(T::one(), |acc, k| acc * T::from_count(k))
}

/// Binomial coefficient `C(n, k)` in the scalar type (zero when `k > n`).
pub fn binomial<T: Scalar>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_count((n - i) as u64) / T::from_count((i + 1) as u64);
    }
    acc
}

/// Integer power by repeated multiplication.
pub fn powi<T: Scalar>(x: &T, k: u32) -> T {
    (0..k).fold(T::one(), |acc, _| acc * x.clone())
}
