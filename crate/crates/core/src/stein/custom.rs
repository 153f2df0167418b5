//! Targets given as a tabulated density.
//!
//! `log p` is interpolated with a monotone cubic (Fritsch–Carlson) and
//! extended linearly beyond the table, so tails decay exponentially. The
//! result is normalised and shifted to mean zero before use.

use crate::error::{Error, Result};
use crate::stein::quadrature::{integrate, QuadOptions};
use crate::stein::target::{real_fn, Support, TargetMeasure};

/// Monotone piecewise-cubic Hermite interpolant with linear extension.
#[derive(Debug, Clone)]
pub struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl Pchip {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::Malformed("interpolation needs at least two (x, y) pairs".into()));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Malformed("grid abscissae must be strictly increasing".into()));
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ds = vec![0.0; n];
        if n == 2 {
            ds = vec![delta[0]; 2];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    ds[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            ds[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            ds[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { xs, ys, ds })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.ds[0] * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.ds[n - 1] * (x - self.xs[n - 1]);
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.ys[i]
            + (t3 - 2.0 * t2 + t) * h * self.ds[i]
            + (-2.0 * t3 + 3.0 * t2) * self.ys[i + 1]
            + (t3 - t2) * h * self.ds[i + 1]
    }

    pub fn first_slope(&self) -> f64 {
        self.ds[0]
    }

    pub fn last_slope(&self) -> f64 {
        self.ds[self.ds.len() - 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

/// Build a centred target from `(x, p(x))` pairs on `support`; `None`
/// bounds mean infinite.
pub fn grid_target(points: &[(f64, f64)], lower: Option<f64>, upper: Option<f64>) -> Result<TargetMeasure> {
    let support = Support::new(lower.unwrap_or(f64::NEG_INFINITY), upper.unwrap_or(f64::INFINITY))?;
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for &(x, p) in &pts {
        if !support.contains(x) {
            return Err(Error::param("density", format!("grid point {x} lies outside the support")));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::param("density", format!("density must be positive, got {p} at {x}")));
        }
    }
    let interp = Pchip::new(
        pts.iter().map(|p| p.0).collect(),
        pts.iter().map(|p| p.1.ln()).collect(),
    )?;
    if support.upper.is_infinite() && !(interp.last_slope() < 0.0) {
        return Err(Error::param("density", "log-density must decrease at the right end of the grid"));
    }
    if support.lower.is_infinite() && !(interp.first_slope() > 0.0) {
        return Err(Error::param("density", "log-density must increase at the left end of the grid"));
    }
    let raw = move |x: f64| interp.eval(x).exp();
    let opts = QuadOptions::tight();
    let mass = integrate(&raw, support.lower, support.upper, &opts)?.value;
    let mean = integrate(|x| x * raw(x), support.lower, support.upper, &opts)?.value / mass;
    let shifted = Support::new(support.lower - mean, support.upper - mean)?;
    let density = real_fn(move |x| raw(x + mean) / mass);
    TargetMeasure::from_density("custom", density, shifted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stein::named::NamedTarget;

    #[test]
    fn pchip_is_monotone_and_interpolating() {
        let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = vec![0.0, 0.1, 0.1, 2.0, 2.1];
        let p = Pchip::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((p.eval(*x) - y).abs() < 1e-15);
        }
        let mut prev = p.eval(0.0);
        for i in 1..=400 {
            let v = p.eval(i as f64 * 0.01);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn gridded_gaussian_recovers_constant_coefficient() {
        let xs: Vec<f64> = (0..=80).map(|i| -6.0 + 0.15 * i as f64 + 0.3).collect();
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .map(|&x| (x, (-0.5 * (x - 0.3) * (x - 0.3)).exp()))
            .collect();
        let t = grid_target(&pts, None, None).unwrap();
        for &x in &[-2.0, -0.5, 0.0, 1.0, 2.0] {
            let a = t.a(x).unwrap();
            assert!((a - 2.0).abs() < 1e-3, "x={x}: a={a}");
        }
        let want = NamedTarget::Normal { gamma: 1.0 }.target().unwrap();
        assert!((t.cdf(0.7).unwrap() - want.cdf(0.7).unwrap()).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(grid_target(&[(0.0, 1.0), (1.0, 2.0)], None, None).is_err());
        assert!(grid_target(&[(0.0, 1.0), (1.0, -2.0)], Some(-1.0), Some(2.0)).is_err());
        assert!(grid_target(&[(0.0, 1.0), (3.0, 1.0)], Some(-1.0), Some(2.0)).is_err());
    }
}
