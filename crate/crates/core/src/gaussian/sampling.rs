//! Seeded Gaussian sampling with a fixed chunking contract.
//!
//! Draws are produced in chunks of [`CHUNK_SIZE`] points. Chunk `c` uses its
//! own ChaCha8 stream keyed by `(seed, c)`, so any chunk can be regenerated
//! independently and chunks may be processed concurrently without changing
//! the result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Number of Gaussian points per substream.
pub const CHUNK_SIZE: usize = 4096;

/// RNG for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Iterator over i.i.d. standard Gaussian vectors of length `dim`.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    dim: usize,
    seed: u64,
    remaining: usize,
    chunk: u64,
    in_chunk: usize,
    rng: ChaCha8Rng,
}

impl Iterator for GaussianStream {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.remaining == 0 {
            return None;
        }
        if self.in_chunk == CHUNK_SIZE {
            self.chunk += 1;
            self.in_chunk = 0;
            self.rng = substream(self.seed, self.chunk);
        }
        let point = (0..self.dim)
            .map(|_| StandardNormal.sample(&mut self.rng))
            .collect();
        self.in_chunk += 1;
        self.remaining -= 1;
        Some(point)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for GaussianStream {}

/// `count` standard Gaussian points in `R^dim`, deterministic in
/// `(seed, dim, count)`.
pub fn sample_gaussian(dim: usize, seed: u64, count: usize) -> GaussianStream {
    GaussianStream {
        dim,
        seed,
        remaining: count,
        chunk: 0,
        in_chunk: 0,
        rng: substream(seed, 0),
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl McEstimate {
    /// Mean and standard error of a slice of observations.
    pub fn from_values(values: &[f64]) -> Self {
        let mut acc = Accumulator::default();
        values.iter().for_each(|&v| acc.push(v));
        acc.finish()
    }

    /// `|mean - target|` measured in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if self.stderr > 0.0 {
            diff / self.stderr
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Welford accumulator for a mean and its standard error.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Accumulator {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub(crate) fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    pub(crate) fn finish(&self) -> McEstimate {
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            stderr: (var / self.n.max(1) as f64).sqrt(),
            count: self.n,
        }
    }
}

/// Monte Carlo estimate of `E[g(X)]`, `X ~ N(0, I_dim)`.
pub fn monte_carlo<G>(dim: usize, seed: u64, count: usize, mut g: G) -> McEstimate
where
    G: FnMut(&[f64]) -> f64,
{
    let mut acc = Accumulator::default();
    for x in sample_gaussian(dim, seed, count) {
        acc.push(g(&x));
    }
    acc.finish()
}
