//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Finite pieces are halved and each half is integrated in a variable that
//! crowds nodes towards its outer end (see [`clustered`]), which absorbs
//! algebraic endpoint singularities. Infinite tails beyond distance one from
//! a finite end are mapped with `x = tan(t)`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    /// Tolerances used where results are differenced afterwards.
    pub fn tight() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    piece: usize,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment {
        piece: 0,
        a,
        b,
        value,
        error,
    }
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    adaptive_pieces(&[(f as &dyn Fn(f64) -> f64, a, b)], opts)
}

/// Global adaptive bisection over several integrands on their own ranges,
/// sharing one error budget; returns the sum of the integrals.
fn adaptive_pieces(pieces: &[(&dyn Fn(f64) -> f64, f64, f64)], opts: &QuadOptions) -> Result<QuadResult> {
    adaptive_core(pieces, opts, false)
}

/// With `best_effort`, running out of intervals returns the current estimate
/// instead of an error.
fn adaptive_core(pieces: &[(&dyn Fn(f64) -> f64, f64, f64)], opts: &QuadOptions, best_effort: bool) -> Result<QuadResult> {
    let (lo, hi) = (pieces[0].1, pieces[pieces.len() - 1].2);
    let mut segments = Vec::new();
    for (i, (f, a, b)) in pieces.iter().enumerate() {
        let first = kronrod(f, *a, *b);
        if !first.value.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
        }
        segments.push(Segment { piece: i, ..first });
    }
    let mut frozen_err = 0.0;
    let mut frozen_val = 0.0;
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum::<f64>() + frozen_val;
        let err: f64 = segments.iter().map(|s| s.error).sum::<f64>() + frozen_err;
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= tol || segments.is_empty() {
            return Ok(QuadResult {
                value: total,
                error: err,
                intervals: segments.len(),
            });
        }
        if segments.len() >= opts.max_intervals {
            if best_effort {
                return Ok(QuadResult {
                    value: total,
                    error: err,
                    intervals: segments.len(),
                });
            }
            return Err(Error::Quadrature(format!(
                "{} subintervals exhausted on [{lo}, {hi}]; estimate {total} ± {err}",
                segments.len()
            )));
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b || (seg.b - seg.a).abs() < 4.0 * f64::EPSILON * mid.abs() {
            // cannot be split further in double precision
            frozen_val += seg.value;
            frozen_err += seg.error;
            if frozen_err > tol {
                return Err(Error::Quadrature(format!(
                    "interval [{}, {}] too small to resolve the integrand",
                    seg.a, seg.b
                )));
            }
            continue;
        }
        let f = pieces[seg.piece].0;
        let left = kronrod(&f, seg.a, mid);
        let right = kronrod(&f, mid, seg.b);
        if !left.value.is_finite() || !right.value.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand near {mid}")));
        }
        segments.push(Segment { piece: seg.piece, ..left });
        segments.push(Segment { piece: seg.piece, ..right });
    }
}

/// `∫_l^u f`, with either bound possibly infinite.
pub fn integrate<F: Fn(f64) -> f64>(f: F, l: f64, u: f64, opts: &QuadOptions) -> Result<QuadResult> {
    if l.is_nan() || u.is_nan() {
        return Err(Error::Quadrature("NaN integration bound".into()));
    }
    if l == u {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    if l > u {
        let r = integrate(f, u, l, opts)?;
        return Ok(QuadResult {
            value: -r.value,
            ..r
        });
    }
    match (l.is_finite(), u.is_finite()) {
        (true, true) => smoothed(&f, l, u, opts),
        (true, false) => combine(smoothed(&f, l, l + 1.0, opts)?, tangent(&f, (l + 1.0).atan(), FRAC_PI_2, opts)?),
        (false, true) => combine(tangent(&f, -FRAC_PI_2, (u - 1.0).atan(), opts)?, smoothed(&f, u - 1.0, u, opts)?),
        (false, false) => tangent(&f, -FRAC_PI_2, FRAC_PI_2, opts),
    }
}

fn combine(a: QuadResult, b: QuadResult) -> Result<QuadResult> {
    Ok(QuadResult {
        value: a.value + b.value,
        error: a.error + b.error,
        intervals: a.intervals + b.intervals,
    })
}

/// Range of the one-sided double-exponential variable; at `s = -6.5` the
/// distance to the endpoint is below `1e-300` of the width.
const DE_RANGE: f64 = 6.5;

/// Finite piece, split at the midpoint; each half is integrated with its
/// nodes clustered at the outer end, under one shared error budget.
fn smoothed<F: Fn(f64) -> f64>(f: &F, l: f64, u: f64, opts: &QuadOptions) -> Result<QuadResult> {
    let h = 0.5 * (u - l);
    let lower = clustered(f, l, h);
    let upper = clustered(f, u, -h);
    let mut r = adaptive_pieces(&[(&lower.0, lower.1, lower.2), (&upper.0, upper.1, upper.2)], opts)?;
    // the quantised end regions get a small fixed budget: their value is
    // kept, their error reported but not held to the tolerance
    let budget = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 0.0,
        max_intervals: 64,
    };
    for (g, start, _) in [&lower, &upper] {
        if *start > 0.0 {
            let e = adaptive_core(&[(g.as_ref(), 0.0, *start)], &budget, true)?;
            r.value += e.value;
            r.error += e.error;
        }
    }
    Ok(r)
}

/// Integrand and range of a variable for `∫ f` between `e` and `e + h` that
/// crowds nodes towards `e`.
///
/// At `e = 0` offsets down to the smallest normal are representable, so a
/// double-exponential map `x = h·2/(1 + e^{-π sinh s})`, `s ≤ 0`, turns any
/// integrable `|x|^{a-1}` into a doubly exponentially decaying integrand. At
/// a non-zero end `x - e` is quantised in ulps of `e` and no map can see below
/// that; there `x = e + hτ²`, `τ ∈ [0, 1]`, flattens `|x - e|^{-1/2}` while
/// with adaptive refinement only from a few ulps of `e` onwards. Either way
/// the variable is finely resolved where the nodes crowd.
type Mapped<'a> = (Box<dyn Fn(f64) -> f64 + 'a>, f64, f64);

fn clustered<'a, F: Fn(f64) -> f64>(f: &'a F, e: f64, h: f64) -> Mapped<'a> {
    let w = h.abs();
    let weighted = move |x: f64, jac: f64| {
        if jac == 0.0 {
            return 0.0;
        }
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * jac
        }
    };
    if e == 0.0 {
        let g = move |s: f64| {
            let z = (PI * s.sinh()).exp();
            let q = z / (1.0 + z);
            weighted(h * 2.0 * q, 2.0 * w * PI * s.cosh() * q * (1.0 - q))
        };
        (Box::new(g), -DE_RANGE, 0.0)
    } else {
        let g = move |t: f64| weighted(e + h * t * t, 2.0 * w * t);
        // within a few ulps of e, x is quantised and refining only chases
        // rounding noise; `smoothed` handles [0, start] separately
        let start = (16.0 * f64::EPSILON * e.abs() / w).sqrt().min(0.5);
        (Box::new(g), start, 1.0)
    }
}

fn tangent<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    let g = |t: f64| {
        let c = t.cos();
        let v = f(t.tan());
        if v == 0.0 {
            0.0
        } else {
            v / (c * c)
        }
    };
    adaptive(&g, a, b, opts)
}

/// Shorthand returning only the value with the default tolerances.
pub fn integral<F: Fn(f64) -> f64>(f: F, l: f64, u: f64) -> Result<f64> {
    integrate(f, l, u, &QuadOptions::default()).map(|r| r.value)
}
