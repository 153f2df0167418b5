use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gaussian::hermite::hermite_table;
use crate::gaussian::multiset::{
    is_sorted, merge, multiplicity_factorial, orbit_size, permutations, runs, splits,
};
use crate::scalar::{factorial, Scalar};

/// Symmetric tensor `f` in `H^{⊙n}` with `H = R^dim`.
///
/// One coefficient is stored per permutation orbit, keyed by the sorted
/// multi-index. The stored value is the tensor entry at every ordering of
/// that index, so `‖f‖² = Σ_orbits |orbit| · c²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricKernel<T> {
    dim: usize,
    order: usize,
    entries: BTreeMap<Vec<usize>, T>,
}

impl<T: Scalar> SymmetricKernel<T> {
    pub fn zero(dim: usize, order: usize) -> Self {
        Self {
            dim,
            order,
            entries: BTreeMap::new(),
        }
    }

    /// Order-0 kernel holding a constant.
    pub fn scalar(dim: usize, value: T) -> Self {
        let mut k = Self::zero(dim, 0);
        k.insert(Vec::new(), value);
        k
    }

    /// Build from canonical entries, rejecting unsorted, out-of-range,
    /// wrong-length or duplicated multi-indices.
    pub fn from_entries<I>(dim: usize, order: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, T)>,
    {
        if dim == 0 {
            return Err(Error::InvalidKernel("dim must be positive".into()));
        }
        let mut k = Self::zero(dim, order);
        for (idx, val) in entries {
            if idx.len() != order {
                return Err(Error::InvalidKernel(format!(
                    "multi-index {idx:?} has length {} but order is {order}",
                    idx.len()
                )));
            }
            if !is_sorted(&idx) {
                return Err(Error::InvalidKernel(format!(
                    "unsorted multi-index {idx:?}"
                )));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(Error::InvalidKernel(format!(
                    "index {bad} in {idx:?} out of range for dim {dim}"
                )));
            }
            if k.entries.contains_key(&idx) {
                return Err(Error::InvalidKernel(format!(
                    "duplicate multi-index {idx:?}"
                )));
            }
            k.insert(idx, val);
        }
        Ok(k)
    }

    /// `e_i^{⊗n}`.
    pub fn diagonal(dim: usize, i: usize, n: usize) -> Self {
        assert!(i < dim, "basis label out of range");
        let mut k = Self::zero(dim, n);
        k.insert(vec![i; n], T::one());
        k
    }

    /// `sym(e_{i_1} ⊗ ... ⊗ e_{i_n})` for an arbitrary (unsorted) label list.
    pub fn sym_basis(dim: usize, labels: &[usize]) -> Self {
        assert!(labels.iter().all(|&i| i < dim), "basis label out of range");
        let mut idx = labels.to_vec();
        idx.sort_unstable();
        let value = T::one() / orbit_size::<T>(&idx);
        let mut k = Self::zero(dim, labels.len());
        k.insert(idx, value);
        k
    }

    /// `e_i` as an order-1 kernel.
    pub fn basis(dim: usize, i: usize) -> Self {
        Self::diagonal(dim, i, 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Canonical `(sorted multi-index, coefficient)` pairs.
    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &T)> {
        self.entries.iter()
    }

    /// Tensor entry at an arbitrary ordering of the multi-index.
    pub fn get(&self, idx: &[usize]) -> T {
        let mut key = idx.to_vec();
        key.sort_unstable();
        self.entries.get(&key).cloned().unwrap_or_else(T::zero)
    }

    /// Value of an order-0 kernel (zero for any other order).
    pub fn scalar_value(&self) -> T {
        if self.order == 0 {
            self.get(&[])
        } else {
            T::zero()
        }
    }

    fn insert(&mut self, idx: Vec<usize>, val: T) {
        if !val.is_zero() {
            self.entries.insert(idx, val);
        }
    }

    fn accumulate(&mut self, idx: Vec<usize>, val: T) {
        match self.entries.get_mut(&idx) {
            Some(v) => {
                *v = v.clone() + val;
                if v.is_zero() {
                    self.entries.remove(&idx);
                }
            }
            None => self.insert(idx, val),
        }
    }

    /// `⟨f, g⟩_{H^{⊗n}}`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.check_dim(other)?;
        if self.order != other.order {
            return Ok(T::zero());
        }
        let (small, large) = if self.nnz() <= other.nnz() {
            (self, other)
        } else {
            (other, self)
        };
        Ok(small.entries.iter().fold(T::zero(), |acc, (idx, a)| {
            match large.entries.get(idx) {
                Some(b) => acc + orbit_size::<T>(idx) * a.clone() * b.clone(),
                None => acc,
            }
        }))
    }

    pub fn norm_sq(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, (idx, c)| {
            acc + orbit_size::<T>(idx) * c.clone() * c.clone()
        })
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().to_real().sqrt()
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut out = Self::zero(self.dim, self.order);
        for (idx, v) in &self.entries {
            out.insert(idx.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (idx, v) in &other.entries {
            out.accumulate(idx.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-T::one()))
    }

    /// The order-`(n-1)` kernel `f(·, i)`.
    pub fn slice(&self, i: usize) -> Self {
        assert!(self.order > 0, "cannot slice an order-0 kernel");
        let mut out = Self::zero(self.dim, self.order - 1);
        for (idx, v) in &self.entries {
            if let Ok(pos) = idx.binary_search(&i) {
                let mut rest = idx.clone();
                rest.remove(pos);
                out.insert(rest, v.clone());
            }
        }
        out
    }

    /// Pathwise value of `I_n(f)` at the Gaussian realisation `x`, using
    /// `I_n(sym(⊗_j e_j^{⊗k_j})) = Π_j k_j! H_{k_j}(x_j)`.
    pub fn eval(&self, x: &[T]) -> Result<T> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let mut tables: BTreeMap<usize, Vec<T>> = BTreeMap::new();
        let mut acc = T::zero();
        for (idx, c) in &self.entries {
            let mut term = c.clone();
            for (label, k) in runs(idx) {
                let table = tables
                    .entry(label)
                    .or_insert_with(|| hermite_table(self.order, x[label].clone()));
                term = term * table[k].clone();
            }
            acc = acc + term;
        }
        Ok(acc * factorial::<T>(self.order))
    }

    /// Symmetrised contraction `f ⊗̃_r g`.
    ///
    /// Works on canonical entries only: with `δ = (α-β)+(γ-β)` the result is
    /// `δ!/N! Σ r!(n-r)!(m-r)! c_α d_γ / (β!(α-β)!(γ-β)!)` summed over
    /// sub-multisets `β` of size `r`, `N = n+m-2r`, and `k!` read as the
    /// product of multiplicity factorials.
    pub fn contract_sym(&self, other: &Self, r: usize) -> Result<Self> {
        self.check_contraction(other, r)?;
        let (n, m) = (self.order, other.order);
        let left = split_table(self, r);
        let right = split_table(other, r);
        let mut acc: BTreeMap<Vec<usize>, T> = BTreeMap::new();
        for (beta, lhs) in &left {
            let Some(rhs) = right.get(beta) else { continue };
            let beta_weight = T::one() / multiplicity_factorial::<T>(beta);
            for (rest_f, wf) in lhs {
                let wf = wf.clone() * beta_weight.clone();
                for (rest_g, wg) in rhs {
                    let delta = merge(rest_f, rest_g);
                    let term = wf.clone() * wg.clone();
                    match acc.get_mut(&delta) {
                        Some(v) => *v = v.clone() + term,
                        None => {
                            acc.insert(delta, term);
                        }
                    }
                }
            }
        }
        let total = n + m - 2 * r;
        let prefactor = factorial::<T>(r) * factorial::<T>(n - r) * factorial::<T>(m - r)
            / factorial::<T>(total);
        let mut out = Self::zero(self.dim, total);
        for (delta, v) in acc {
            let w = prefactor.clone() * multiplicity_factorial::<T>(&delta) * v;
            out.insert(delta, w);
        }
        Ok(out)
    }

    /// Raw (non-symmetrised) contraction `f ⊗_r g`, free indices of `f`
    /// first, then those of `g`.
    pub fn contract(&self, other: &Self, r: usize) -> Result<Tensor<T>> {
        let blocks = self.contract_blocks(other, r)?;
        let mut out = Tensor::zero(self.dim, self.order + other.order - 2 * r);
        for ((s, t), v) in blocks {
            let ps = permutations(&s);
            let pt = permutations(&t);
            for a in &ps {
                for b in &pt {
                    let mut idx = a.clone();
                    idx.extend_from_slice(b);
                    out.set(idx, v.clone());
                }
            }
        }
        Ok(out)
    }

    /// `‖f ⊗_r g‖²` without materialising the raw contraction.
    pub fn contraction_norm_sq(&self, other: &Self, r: usize) -> Result<T> {
        let blocks = self.contract_blocks(other, r)?;
        Ok(blocks.into_iter().fold(T::zero(), |acc, ((s, t), v)| {
            acc + orbit_size::<T>(&s) * orbit_size::<T>(&t) * v.clone() * v
        }))
    }

    /// `f ⊗_r g` is symmetric within each free block; store it keyed by the
    /// pair of sorted blocks.
    fn contract_blocks(
        &self,
        other: &Self,
        r: usize,
    ) -> Result<BTreeMap<(Vec<usize>, Vec<usize>), T>> {
        self.check_contraction(other, r)?;
        let left = raw_split_table(self, r);
        let right = raw_split_table(other, r);
        let mut out: BTreeMap<(Vec<usize>, Vec<usize>), T> = BTreeMap::new();
        let r_fact = factorial::<T>(r);
        for (beta, lhs) in &left {
            let Some(rhs) = right.get(beta) else { continue };
            // number of orderings of the shared labels
            let w = r_fact.clone() / multiplicity_factorial::<T>(beta);
            for (s, c) in lhs {
                for (t, d) in rhs {
                    let term = w.clone() * c.clone() * d.clone();
                    let key = (s.clone(), t.clone());
                    match out.get_mut(&key) {
                        Some(v) => *v = v.clone() + term,
                        None => {
                            out.insert(key, term);
                        }
                    }
                }
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

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        self.check_dim(other)?;
        if self.order != other.order {
            return Err(Error::InvalidKernel(format!(
                "order mismatch: {} vs {}",
                self.order, other.order
            )));
        }
        Ok(())
    }

    fn check_contraction(&self, other: &Self, r: usize) -> Result<()> {
        self.check_dim(other)?;
        if r > self.order.min(other.order) {
            return Err(Error::ContractionOutOfRange {
                r,
                n: self.order,
                m: other.order,
            });
        }
        Ok(())
    }
}

type SplitTable<T> = BTreeMap<Vec<usize>, Vec<(Vec<usize>, T)>>;

/// `β ↦ [(α-β, c_α / (α-β)!)]`.
fn split_table<T: Scalar>(f: &SymmetricKernel<T>, r: usize) -> SplitTable<T> {
    let mut table: SplitTable<T> = BTreeMap::new();
    for (idx, c) in &f.entries {
        for (beta, rest) in splits(idx, r) {
            let w = c.clone() / multiplicity_factorial::<T>(&rest);
            table.entry(beta).or_default().push((rest, w));
        }
    }
    table
}

/// `β ↦ [(α-β, c_α)]`.
fn raw_split_table<T: Scalar>(f: &SymmetricKernel<T>, r: usize) -> SplitTable<T> {
    let mut table: SplitTable<T> = BTreeMap::new();
    for (idx, c) in &f.entries {
        for (beta, rest) in splits(idx, r) {
            table.entry(beta).or_default().push((rest, c.clone()));
        }
    }
    table
}

/// Sparse tensor in `H^{⊗n}` with no symmetry assumed, keyed by the full
/// (ordered) multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    dim: usize,
    order: usize,
    entries: BTreeMap<Vec<usize>, T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn zero(dim: usize, order: usize) -> Self {
        Self {
            dim,
            order,
            entries: BTreeMap::new(),
        }
    }

    /// `e_{i_1} ⊗ ... ⊗ e_{i_n}`.
    pub fn elementary(dim: usize, labels: &[usize]) -> Self {
        let mut t = Self::zero(dim, labels.len());
        t.set(labels.to_vec(), T::one());
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, idx: &[usize]) -> T {
        self.entries.get(idx).cloned().unwrap_or_else(T::zero)
    }

    pub fn set(&mut self, idx: Vec<usize>, val: T) {
        assert_eq!(idx.len(), self.order, "index length must equal order");
        assert!(idx.iter().all(|&i| i < self.dim), "index out of range");
        if val.is_zero() {
            self.entries.remove(&idx);
        } else {
            self.entries.insert(idx, val);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &T)> {
        self.entries.iter()
    }

    pub fn add_scaled(&mut self, other: &Self, c: &T) {
        assert_eq!((self.dim, self.order), (other.dim, other.order));
        for (idx, v) in &other.entries {
            let cur = self.get(idx);
            self.set(idx.clone(), cur + c.clone() * v.clone());
        }
    }

    pub fn norm_sq(&self) -> T {
        self.entries
            .values()
            .fold(T::zero(), |acc, v| acc + v.clone() * v.clone())
    }

    /// Every ordering of a symmetric kernel written out explicitly.
    pub fn from_kernel(k: &SymmetricKernel<T>) -> Self {
        let mut out = Self::zero(k.dim(), k.order());
        for (idx, v) in k.entries() {
            for p in permutations(idx) {
                out.set(p, v.clone());
            }
        }
        out
    }

    /// Orbit average `f̃(x) = (1/n!) Σ_σ f(x_σ)`.
    pub fn symmetrize(&self) -> SymmetricKernel<T> {
        let mut sums: BTreeMap<Vec<usize>, T> = BTreeMap::new();
        for (idx, v) in &self.entries {
            let mut key = idx.clone();
            key.sort_unstable();
            match sums.get_mut(&key) {
                Some(s) => *s = s.clone() + v.clone(),
                None => {
                    sums.insert(key, v.clone());
                }
            }
        }
        let mut out = SymmetricKernel::zero(self.dim, self.order);
        for (idx, s) in sums {
            let avg = s / orbit_size::<T>(&idx);
            out.insert(idx, avg);
        }
        out
    }
}

/// `sym(f)` for a raw tensor.
pub fn symmetrize<T: Scalar>(f: &Tensor<T>) -> SymmetricKernel<T> {
    f.symmetrize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type K = SymmetricKernel<f64>;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(K::from_entries(3, 2, vec![(vec![2, 1], 1.0)]).is_err());
        assert!(K::from_entries(3, 2, vec![(vec![1, 3], 1.0)]).is_err());
        assert!(K::from_entries(3, 2, vec![(vec![1], 1.0)]).is_err());
        assert!(K::from_entries(3, 2, vec![(vec![0, 1], 1.0), (vec![0, 1], 2.0)]).is_err());
        assert!(K::from_entries(0, 0, Vec::new()).is_err());
    }

    #[test]
    fn norms_use_orbit_multiplicity() {
        let k = SymmetricKernel::<BigRational>::sym_basis(2, &[0, 0, 1]);
        assert_eq!(k.norm_sq(), rat(1, 3));
        let e11 = K::diagonal(2, 0, 2);
        assert_eq!(e11.norm_sq(), 1.0);
    }

    #[test]
    fn evaluation_examples() {
        let x = [1.3, -0.6];
        let e11 = K::diagonal(2, 0, 2);
        assert!((e11.eval(&x).unwrap() - (1.3f64 * 1.3 - 1.0)).abs() < 1e-14);
        assert_eq!(K::basis(2, 0).eval(&x).unwrap(), 1.3);
        let f = K::sym_basis(2, &[0, 0, 1]);
        let expect = (1.3f64 * 1.3 - 1.0) * -0.6;
        assert!((f.eval(&x).unwrap() - expect).abs() < 1e-14);
        assert!(matches!(
            f.eval(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn raw_contraction_examples() {
        let f = K::diagonal(2, 0, 2);
        let g = K::sym_basis(2, &[0, 1]).scale(&2.0); // e1⊗e2 + e2⊗e1
        // contraction with a non-symmetric tensor built by hand
        let c = f.contract(&g, 1).unwrap();
        // (e1⊗e1) ⊗_1 (e1⊗e2 + e2⊗e1) = e1⊗e2
        assert_eq!(c.get(&[0, 1]), 1.0);
        assert_eq!(c.get(&[1, 0]), 0.0);
        let full = f.contract(&f, 2).unwrap();
        assert_eq!(full.order(), 0);
        assert_eq!(full.get(&[]), 1.0);
        assert!(f.contract(&f, 3).is_err());
    }

    #[test]
    fn half_identity_contraction() {
        let s = 0.5f64.sqrt();
        let f = K::from_entries(2, 2, vec![(vec![0, 0], s), (vec![1, 1], s)]).unwrap();
        let c = f.contract_sym(&f, 1).unwrap();
        assert!((c.get(&[0, 0]) - 0.5).abs() < 1e-15);
        assert!((c.get(&[1, 1]) - 0.5).abs() < 1e-15);
        assert!((c.norm_sq() - 0.5).abs() < 1e-15);
        assert!((f.contraction_norm_sq(&f, 1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn symmetrization_examples() {
        let t = Tensor::<BigRational>::elementary(2, &[0, 1]);
        let s = t.symmetrize();
        assert_eq!(s.get(&[0, 1]), rat(1, 2));
        assert_eq!(s.get(&[1, 0]), rat(1, 2));
        let k = SymmetricKernel::<BigRational>::sym_basis(3, &[2, 0, 2]);
        assert_eq!(Tensor::from_kernel(&k).symmetrize(), k);
        let t3 = Tensor::<BigRational>::elementary(2, &[0, 0, 1]);
        assert_eq!(t3.symmetrize().norm_sq(), rat(1, 3));
    }

    #[test]
    fn sym_contraction_matches_symmetrized_raw_exactly() {
        let f = SymmetricKernel::<BigRational>::from_entries(
            3,
            3,
            vec![
                (vec![0, 0, 1], rat(1, 2)),
                (vec![0, 1, 2], rat(-2, 3)),
                (vec![2, 2, 2], rat(3, 1)),
            ],
        )
        .unwrap();
        let g = SymmetricKernel::<BigRational>::from_entries(
            3,
            2,
            vec![(vec![0, 1], rat(5, 7)), (vec![2, 2], rat(-1, 1)), (vec![0, 0], rat(1, 4))],
        )
        .unwrap();
        for r in 0..=2 {
            let fast = f.contract_sym(&g, r).unwrap();
            let slow = f.contract(&g, r).unwrap().symmetrize();
            assert_eq!(fast, slow, "r = {r}");
            let raw = f.contract(&g, r).unwrap();
            assert_eq!(f.contraction_norm_sq(&g, r).unwrap(), raw.norm_sq());
        }
    }

    #[test]
    fn slices_and_inner_products() {
        let f = K::sym_basis(2, &[0, 0, 1]);
        let s0 = f.slice(0);
        assert!((s0.get(&[0, 1]) - 1.0 / 3.0).abs() < 1e-15);
        let s1 = f.slice(1);
        assert!((s1.get(&[0, 0]) - 1.0 / 3.0).abs() < 1e-15);
        assert!((f.inner(&f).unwrap() - f.norm_sq()).abs() < 1e-15);
        assert_eq!(f.inner(&K::diagonal(2, 0, 2)).unwrap(), 0.0);
    }
}
