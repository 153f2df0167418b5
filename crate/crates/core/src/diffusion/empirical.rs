use crate::error::{Error, Result};
use crate::gaussian::sampling::Accumulator;
use crate::gaussian::McEstimate;
use crate::stein::{DiffusionCoefficient, TargetMeasure, TestFunction};

/// Sorted sample of at least two finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::param("samples", format!("need at least 2 values, got {}", values.len())));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::param("samples", format!("non-finite value {bad}")));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Fraction of samples `≤ x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// Left-continuous quantile `inf{x : F̂(x) ≥ u}` for `u ∈ (0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.len();
        let k = ((u * n as f64).ceil() as usize).clamp(1, n);
        self.values[k - 1]
    }

    pub fn mean(&self) -> McEstimate {
        McEstimate::from_values(&self.values)
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }
}

/// `sup_x |F̂(x) - F(x)|`, attained at the sample points.
pub fn ks_distance(e: &EmpiricalDistribution, target: &TargetMeasure) -> Result<f64> {
    let xs = e.values();
    let cdf = target.cdf_sorted(xs)?;
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        // ties share one jump
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        let f = cdf[i];
        d = d.max((f - i as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    Ok(d)
}

/// Two-sample Kolmogorov distance `sup_x |F̂₁(x) - F̂₂(x)|`.
pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let (x, y) = (a.values(), b.values());
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// `∫₀¹ |Q₁(u) - Q₂(u)| du` between the empirical quantile functions.
pub fn wasserstein1_distance(e: &EmpiricalDistribution, reference: &EmpiricalDistribution) -> f64 {
    let (x, y) = (e.values(), reference.values());
    let (n, m) = (x.len(), y.len());
    if n == m {
        return x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<f64>() / n as f64;
    }
    // breakpoints i/n and j/m, compared in integers as (i+1)m vs (j+1)n
    let (mut i, mut j) = (0usize, 0usize);
    let mut u = 0.0;
    let mut total = 0.0;
    while i < n && j < m {
        let (ei, ej) = ((i + 1) * m, (j + 1) * n);
        let next = ei.min(ej) as f64 / (n * m) as f64;
        total += (next - u) * (x[i] - y[j]).abs();
        u = next;
        if ei <= ej {
            i += 1;
        }
        if ej <= ei {
            j += 1;
        }
    }
    total
}

/// Sample mean of `½a(Y)h'(Y) + b(Y)h(Y)` with its standard error; near zero
/// exactly when the samples follow `target`.
pub fn stein_residual_empirical(e: &EmpiricalDistribution, target: &TargetMeasure, h: &TestFunction) -> Result<McEstimate> {
    let mut acc = Accumulator::default();
    let poly = match target.coeff() {
        DiffusionCoefficient::Polynomial(c) => Some(c.clone()),
        DiffusionCoefficient::Numeric(_) => None,
    };
    for &y in e.values() {
        let a = match &poly {
            Some(c) => c.eval(&y),
            None => target.a(y)?,
        };
        acc.push(0.5 * a * h.derivative(y) + target.drift(y) * h.eval(y));
    }
    Ok(acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stein::{dictionary, NamedTarget};

    fn normal_samples(seed: u64, n: usize) -> EmpiricalDistribution {
        EmpiricalDistribution::new(NamedTarget::Normal { gamma: 1.0 }.exact_samples(seed, n)).unwrap()
    }

    #[test]
    fn ks_calibration() {
        let n = 10_000;
        let e = normal_samples(1, n);
        let normal = NamedTarget::Normal { gamma: 1.0 }.target().unwrap();
        assert!(ks_distance(&e, &normal).unwrap() < 1.63 / (n as f64).sqrt());
        let gamma = NamedTarget::Gamma { a: 2.0, lambda: 1.0 }.target().unwrap();
        assert!(ks_distance(&e, &gamma).unwrap() > 0.1);
        assert_eq!(ks_two_sample(&e, &e), 0.0);
    }

    #[test]
    fn ks_by_quadrature_matches_closed_form() {
        let e = normal_samples(2, 2000);
        let closed = NamedTarget::Normal { gamma: 1.0 }.target().unwrap();
        let quad = TargetMeasure::from_density(
            "normal",
            crate::stein::real_fn(|x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()),
            crate::stein::Support::real_line(),
        )
        .unwrap();
        let (a, b) = (ks_distance(&e, &closed).unwrap(), ks_distance(&e, &quad).unwrap());
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }

    #[test]
    fn wasserstein_properties() {
        let e = normal_samples(3, 10_000);
        assert_eq!(wasserstein1_distance(&e, &e), 0.0);
        assert!((wasserstein1_distance(&e, &e.shifted(0.7)) - 0.7).abs() < 1e-12);
        assert!(wasserstein1_distance(&e, &normal_samples(4, 10_000)) < 0.05);
        // unequal counts: duplicate every sample of a 3-point set
        let a = EmpiricalDistribution::new(vec![0.0, 1.0, 5.0]).unwrap();
        let b = EmpiricalDistribution::new(vec![0.0, 0.0, 1.0, 1.0, 5.0, 5.0]).unwrap();
        assert!(wasserstein1_distance(&a, &b).abs() < 1e-15);
        let c = EmpiricalDistribution::new(vec![0.5, 1.5]).unwrap();
        // Q_a - Q_c on thirds/halves: |0-.5|/3 + |1-.5|/6 + |1-1.5|/6 + |5-1.5|/3
        let want = 0.5 / 3.0 + 0.5 / 6.0 + 0.5 / 6.0 + 3.5 / 3.0;
        assert!((wasserstein1_distance(&a, &c) - want).abs() < 1e-12);
        assert!((wasserstein1_distance(&c, &a) - want).abs() < 1e-12);
    }

    #[test]
    fn empirical_stein_residual() {
        let normal = NamedTarget::Normal { gamma: 1.0 }.target().unwrap();
        let e = normal_samples(5, 20_000);
        let est = stein_residual_empirical(&e, &normal, &TestFunction::monomial(1)).unwrap();
        assert!(est.z_score(0.0) < 4.0);
        // uniform samples are rejected against the normal target
        let u = EmpiricalDistribution::new(NamedTarget::UniformCentered.exact_samples(6, 20_000)).unwrap();
        let worst = dictionary()
            .iter()
            .map(|h| stein_residual_empirical(&u, &normal, h).unwrap().z_score(0.0))
            .fold(0.0, f64::max);
        assert!(worst > 5.0);
    }

    #[test]
    fn rejects_short_or_nan() {
        assert!(EmpiricalDistribution::new(vec![1.0]).is_err());
        assert!(EmpiricalDistribution::new(vec![1.0, f64::NAN]).is_err());
        let e = EmpiricalDistribution::new(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(e.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(e.quantile(0.5), 2.0);
        assert!((e.cdf(2.0) - 2.0 / 3.0).abs() < 1e-15);
    }
}
