use crate::scalar::Scalar;

/// Hermite polynomial `H_n(x)` normalised with leading coefficient `1/n!`,
/// i.e. `H_n = He_n / n!`, evaluated by the three-term recurrence
/// `(n+1) H_{n+1}(x) = x H_n(x) - H_{n-1}(x)`.
pub fn hermite<T: Scalar>(n: usize, x: T) -> T {
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = x.clone();
    for k in 1..n {
        let next = (x.clone() * cur.clone() - prev) / T::from_count((k + 1) as u64);
        prev = cur;
        cur = next;
    }
    cur
}

/// All of `H_0(x), ..., H_n(x)`.
pub fn hermite_table<T: Scalar>(n: usize, x: T) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(T::one());
    if n == 0 {
        return out;
    }
    out.push(x.clone());
    for k in 1..n {
        let next = (x.clone() * out[k].clone() - out[k - 1].clone()) / T::from_count((k + 1) as u64);
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    /// Coefficients of `exp(x^2/2) d^n/dx^n exp(-x^2/2)` as a polynomial `q_n`,
    /// from `q_{n+1} = q_n' - x q_n`, `q_0 = 1`. Independent of the recurrence
    /// used by [`hermite`].
    fn rodrigues(n: usize) -> Vec<f64> {
        let mut q = vec![1.0];
        for _ in 0..n {
            let mut next = vec![0.0; q.len() + 1];
            for (k, c) in q.iter().enumerate() {
                if k > 0 {
                    next[k - 1] += k as f64 * c;
                }
                next[k + 1] -= c;
            }
            q = next;
        }
        q
    }

    fn rodrigues_eval(n: usize, x: f64) -> f64 {
        let q = rodrigues(n);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        sign * q.iter().rev().fold(0.0, |acc, c| acc * x + c) / fact
    }

    #[test]
    fn low_orders() {
        assert_eq!(hermite(0, 3.7f64), 1.0);
        assert_eq!(hermite(2, 2.0f64), 1.5);
        assert!((hermite(4, 1.0f64) + 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn matches_rodrigues_definition() {
        for n in 0..10 {
            for &x in &[-2.3, -0.4, 0.0, 0.7, 1.9] {
                let a = hermite(n, x);
                let b = rodrigues_eval(n, x);
                assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "n={n} x={x}: {a} vs {b}");
            }
        }
        // frozen from the Rodrigues form at n = 4, x = 1: (1 - 6 + 3) / 24
        assert!((rodrigues_eval(4, 1.0) + 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn exact_rational_values() {
        let two = BigRational::from_integer(2.into());
        assert_eq!(hermite(2, two.clone()), BigRational::new(3.into(), 2.into()));
        let table = hermite_table(5, two.clone());
        for (k, v) in table.iter().enumerate() {
            assert_eq!(*v, hermite(k, two.clone()));
        }
    }
}
