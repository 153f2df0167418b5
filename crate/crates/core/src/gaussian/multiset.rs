//! Helpers for sorted multi-indices, i.e. multisets of basis labels.

use crate::scalar::{factorial, Scalar};

/// Run-length form `(label, multiplicity)` of a sorted multi-index.
pub(crate) fn runs(idx: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &i in idx {
        match out.last_mut() {
            Some((label, count)) if *label == i => *count += 1,
            _ => out.push((i, 1)),
        }
    }
    out
}

/// `prod_j k_j!` over the multiplicities of the multi-index.
pub(crate) fn multiplicity_factorial<T: Scalar>(idx: &[usize]) -> T {
    runs(idx)
        .into_iter()
        .fold(T::one(), |acc, (_, k)| acc * factorial::<T>(k))
}

/// Number of distinct orderings of the multi-index, `n! / prod_j k_j!`.
pub(crate) fn orbit_size<T: Scalar>(idx: &[usize]) -> T {
    factorial::<T>(idx.len()) / multiplicity_factorial::<T>(idx)
}

pub(crate) fn is_sorted(idx: &[usize]) -> bool {
    idx.windows(2).all(|w| w[0] <= w[1])
}

/// Merge two sorted multi-indices.
pub(crate) fn merge(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Every split of a sorted multi-index into a sub-multiset of size `r` and
/// its complement, each distinct sub-multiset listed once.
pub(crate) fn splits(idx: &[usize], r: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let rs = runs(idx);
    let mut out = Vec::new();
    let mut take = vec![0usize; rs.len()];
    fn rec(
        rs: &[(usize, usize)],
        pos: usize,
        left: usize,
        take: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, Vec<usize>)>,
    ) {
        if pos == rs.len() {
            if left == 0 {
                let mut sub = Vec::new();
                let mut rest = Vec::new();
                for (j, &(label, count)) in rs.iter().enumerate() {
                    sub.extend(std::iter::repeat(label).take(take[j]));
                    rest.extend(std::iter::repeat(label).take(count - take[j]));
                }
                out.push((sub, rest));
            }
            return;
        }
        let cap = rs[pos].1.min(left);
        for k in 0..=cap {
            take[pos] = k;
            rec(rs, pos + 1, left - k, take, out);
        }
        take[pos] = 0;
    }
    rec(&rs, 0, r, &mut take, &mut out);
    out
}

/// All distinct orderings of a sorted multi-index, in lexicographic order.
pub(crate) fn permutations(idx: &[usize]) -> Vec<Vec<usize>> {
    let mut cur = idx.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    while next_permutation(&mut cur) {
        out.push(cur.clone());
    }
    out
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
