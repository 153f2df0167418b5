use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gaussian::kernel::SymmetricKernel;
use crate::scalar::{binomial, factorial, Scalar};

/// Finite Wiener chaos expansion `F = Σ_k I_k(f_k)`.
///
/// Level 0 holds the expectation `E[F]`. Zero levels are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosVector<T> {
    dim: usize,
    components: BTreeMap<usize, SymmetricKernel<T>>,
}

impl<T: Scalar> ChaosVector<T> {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            components: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: T) -> Self {
        Self::from_kernel(SymmetricKernel::scalar(dim, c))
    }

    /// `I_n(f)` as a single-level chaos vector.
    pub fn from_kernel(f: SymmetricKernel<T>) -> Self {
        let mut v = Self::zero(f.dim());
        v.set_level(f);
        v
    }

    /// Assemble from several kernels, summing those at the same level.
    pub fn from_kernels<I>(dim: usize, kernels: I) -> Result<Self>
    where
        I: IntoIterator<Item = SymmetricKernel<T>>,
    {
        let mut v = Self::zero(dim);
        for k in kernels {
            v.add_to_level(k)?;
        }
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self, k: usize) -> Option<&SymmetricKernel<T>> {
        self.components.get(&k)
    }

    pub fn levels(&self) -> impl Iterator<Item = (usize, &SymmetricKernel<T>)> {
        self.components.iter().map(|(k, f)| (*k, f))
    }

    pub fn max_level(&self) -> Option<usize> {
        self.components.keys().next_back().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// `E[F]`, the level-0 scalar.
    pub fn expectation(&self) -> T {
        self.components
            .get(&0)
            .map(|k| k.scalar_value())
            .unwrap_or_else(T::zero)
    }

    /// `E[F²] = Σ_k k! ‖f_k‖²`.
    pub fn second_moment(&self) -> T {
        self.components.iter().fold(T::zero(), |acc, (k, f)| {
            acc + factorial::<T>(*k) * f.norm_sq()
        })
    }

    /// `E[F G] = Σ_k k! ⟨f_k, g_k⟩`.
    pub fn expectation_of_product(&self, other: &Self) -> Result<T> {
        self.check_dim(other)?;
        let mut acc = T::zero();
        for (k, f) in &self.components {
            if let Some(g) = other.components.get(k) {
                acc = acc + factorial::<T>(*k) * f.inner(g)?;
            }
        }
        Ok(acc)
    }

    fn set_level(&mut self, f: SymmetricKernel<T>) {
        if f.is_zero() {
            self.components.remove(&f.order());
        } else {
            self.components.insert(f.order(), f);
        }
    }

    /// Add a kernel into its level.
    pub fn add_to_level(&mut self, f: SymmetricKernel<T>) -> Result<()> {
        if f.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: f.dim(),
            });
        }
        let merged = match self.components.get(&f.order()) {
            Some(cur) => cur.add(&f)?,
            None => f,
        };
        self.set_level(merged);
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for f in other.components.values() {
            out.add_to_level(f.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-T::one()))
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut out = Self::zero(self.dim);
        for f in self.components.values() {
            out.set_level(f.scale(c));
        }
        out
    }

    /// Drop the level-0 component: `F - E[F]`.
    pub fn centered(&self) -> Self {
        let mut out = self.clone();
        out.components.remove(&0);
        out
    }

    /// Pathwise value at a Gaussian realisation.
    pub fn eval(&self, x: &[T]) -> Result<T> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        self.components
            .values()
            .try_fold(T::zero(), |acc, f| Ok(acc + f.eval(x)?))
    }

    /// Chaos expansion of the pointwise product, level pair by level pair:
    /// `I_n(f) I_m(g) = Σ_r r! C(n,r) C(m,r) I_{n+m-2r}(f ⊗̃_r g)`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.dim);
        for (&n, f) in &self.components {
            for (&m, g) in &other.components {
                for r in 0..=n.min(m) {
                    let c = factorial::<T>(r) * binomial::<T>(n, r) * binomial::<T>(m, r);
                    let h = f.contract_sym(g, r)?.scale(&c);
                    out.add_to_level(h)?;
                }
            }
        }
        Ok(out)
    }

    /// `⟨DF, DG⟩_H` as a chaos vector:
    /// `Σ_{n,m} nm Σ_r r! C(n-1,r) C(m-1,r) I_{n+m-2-2r}(f ⊗̃_{r+1} g)`.
    pub fn malliavin_inner(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.dim);
        for (&n, f) in self.components.iter().filter(|(k, _)| **k > 0) {
            for (&m, g) in other.components.iter().filter(|(k, _)| **k > 0) {
                let nm = T::from_count((n * m) as u64);
                for r in 0..n.min(m) {
                    let c = nm.clone()
                        * factorial::<T>(r)
                        * binomial::<T>(n - 1, r)
                        * binomial::<T>(m - 1, r);
                    let h = f.contract_sym(g, r + 1)?.scale(&c);
                    out.add_to_level(h)?;
                }
            }
        }
        Ok(out)
    }

    /// Components `D_i F = Σ_n n I_{n-1}(f_n(·, i))` of the Malliavin
    /// derivative in the basis `e_0, ..., e_{dim-1}`.
    pub fn derivative(&self) -> Vec<Self> {
        (0..self.dim)
            .map(|i| {
                let mut d = Self::zero(self.dim);
                for (&n, f) in self.components.iter().filter(|(k, _)| **k > 0) {
                    let s = f.slice(i).scale(&T::from_count(n as u64));
                    d.set_level(s);
                }
                d
            })
            .collect()
    }

    /// Ornstein–Uhlenbeck generator `L F = -Σ k I_k(f_k)`.
    pub fn ou_generator(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for (&k, f) in &self.components {
            out.set_level(f.scale(&-T::from_count(k as u64)));
        }
        out
    }

    /// Pseudo-inverse `(-L)^{-1} F`, dividing level `k` by `k`. Requires a
    /// centred input.
    pub fn ou_inverse(&self) -> Result<Self> {
        if !self.expectation().is_zero() {
            return Err(Error::NotCentered);
        }
        let mut out = Self::zero(self.dim);
        for (&k, f) in &self.components {
            out.set_level(f.scale(&(T::one() / T::from_count(k as u64))));
        }
        Ok(out)
    }

    /// Apply a polynomial `Σ_j c_j F^j` (coefficients lowest degree first).
    pub fn polynomial(&self, coeffs: &[T]) -> Result<Self> {
        let mut out = Self::zero(self.dim);
        let mut power = Self::constant(self.dim, T::one());
        for (j, c) in coeffs.iter().enumerate() {
            if j > 0 {
                power = power.product(self)?;
            }
            if !c.is_zero() {
                out = out.add(&power.scale(c))?;
            }
        }
        Ok(out)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

/// Free-function form of [`ChaosVector::product`].
pub fn chaos_product<T: Scalar>(f: &ChaosVector<T>, g: &ChaosVector<T>) -> Result<ChaosVector<T>> {
    f.product(g)
}

/// Free-function form of [`ChaosVector::malliavin_inner`].
pub fn malliavin_inner<T: Scalar>(
    f: &ChaosVector<T>,
    g: &ChaosVector<T>,
) -> Result<ChaosVector<T>> {
    f.malliavin_inner(g)
}

/// Free-function form of [`ChaosVector::ou_inverse`].
pub fn ou_inverse<T: Scalar>(f: &ChaosVector<T>) -> Result<ChaosVector<T>> {
    f.ou_inverse()
}

/// `⟨DF, DG⟩_H` evaluated pathwise from the derivative components,
/// `Σ_i D_iF(x) D_iG(x)`. Independent of [`ChaosVector::malliavin_inner`].
pub fn malliavin_inner_pathwise<T: Scalar>(
    f: &ChaosVector<T>,
    g: &ChaosVector<T>,
    x: &[T],
) -> Result<T> {
    let df = f.derivative();
    let dg = g.derivative();
    df.iter()
        .zip(dg.iter())
        .try_fold(T::zero(), |acc, (a, b)| Ok(acc + a.eval(x)? * b.eval(x)?))
}
