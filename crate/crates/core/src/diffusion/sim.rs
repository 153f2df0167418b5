use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::diffusion::EmpiricalDistribution;
use crate::error::{Error, Result};
use crate::gaussian::sampling::substream;
use crate::stein::{DiffusionCoefficient, TargetMeasure};

/// Clamping more often than this is flagged in run reports.
pub const CLAMP_FLAG_FRACTION: f64 = 1e-3;

/// Grid size used to tabulate a numerically computed coefficient.
const TABLE_POINTS: usize = 4001;

/// States beyond this multiple of the target scale count as divergence.
const BLOW_UP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub step: f64,
    pub burn_in: u64,
    pub samples: usize,
    pub thinning: u64,
    pub seed: u64,
    pub boundary_epsilon: f64,
    /// Independent chains, each with its own burn-in and RNG substream;
    /// samples are concatenated in chain order.
    pub chains: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            burn_in: 100_000,
            samples: 100_000,
            thinning: 10,
            seed: 0,
            boundary_epsilon: 1e-9,
            chains: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, target: &TargetMeasure) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {}", self.step)));
        }
        if self.samples < 2 {
            return Err(Error::param("samples", format!("need at least 2, got {}", self.samples)));
        }
        if self.thinning == 0 {
            return Err(Error::param("thinning", "must be at least 1"));
        }
        if self.chains == 0 || self.chains > self.samples {
            return Err(Error::param("chains", format!("need 1 ≤ chains ≤ samples, got {}", self.chains)));
        }
        if !(self.boundary_epsilon > 0.0 && self.boundary_epsilon.is_finite()) {
            return Err(Error::param("boundary_epsilon", "must be positive"));
        }
        let s = target.support();
        let width = if s.is_bounded() { s.upper - s.lower } else { target.scale() };
        if self.boundary_epsilon >= 1e-2 * width {
            return Err(Error::param(
                "boundary_epsilon",
                format!("{} is not small relative to the support width {width}", self.boundary_epsilon),
            ));
        }
        Ok(())
    }
}

/// Samples plus bookkeeping about the interior projection.
#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub config: SimConfig,
    pub samples: EmpiricalDistribution,
    /// Raw samples in generation order (chain by chain).
    pub path_samples: Vec<f64>,
    pub steps: u64,
    pub clamped: u64,
}

impl SimulationRun {
    pub fn clamp_fraction(&self) -> f64 {
        self.clamped as f64 / self.steps.max(1) as f64
    }

    pub fn clamp_flagged(&self) -> bool {
        self.clamp_fraction() > CLAMP_FLAG_FRACTION
    }
}

struct ChainOut {
    samples: Vec<f64>,
    steps: u64,
    clamped: u64,
}

fn run_chain(
    chain: usize,
    count: usize,
    cfg: &SimConfig,
    target: &TargetMeasure,
    a: &(dyn Fn(f64) -> f64 + Sync),
) -> Result<ChainOut> {
    let mut rng = substream(cfg.seed, chain as u64);
    let s = target.support();
    let (lo, hi) = (s.lower + cfg.boundary_epsilon, s.upper - cfg.boundary_epsilon);
    let limit = BLOW_UP * target.scale().max(1.0);
    let dt = cfg.step;
    let sdt = dt.sqrt();
    // the mean is zero and lies inside the support
    let mut x = 0.0f64.clamp(lo, hi);
    let mut clamped = 0u64;
    let mut step = 0u64;
    let mut advance = |x: &mut f64, step: &mut u64| -> Result<()> {
        let z: f64 = StandardNormal.sample(&mut rng);
        let mut next = *x + target.drift(*x) * dt + a(*x).max(0.0).sqrt() * sdt * z;
        *step += 1;
        if !next.is_finite() || next.abs() > limit {
            return Err(Error::SimulationOverflow { step: *step, state: next });
        }
        if next < lo || next > hi {
            next = next.clamp(lo, hi);
            clamped += 1;
        }
        *x = next;
        Ok(())
    };
    for _ in 0..cfg.burn_in {
        advance(&mut x, &mut step)?;
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..cfg.thinning {
            advance(&mut x, &mut step)?;
        }
        out.push(x);
    }
    Ok(ChainOut {
        samples: out,
        steps: step,
        clamped,
    })
}

/// Run the configured chains and keep the bookkeeping.
pub fn simulate_run(target: &TargetMeasure, cfg: &SimConfig) -> Result<SimulationRun> {
    cfg.validate(target)?;
    let a_fn = match target.coeff() {
        DiffusionCoefficient::Polynomial(_) => None,
        c @ DiffusionCoefficient::Numeric(_) => {
            let grid = target.support().interior_grid(TABLE_POINTS, target.scale(), 1e-4);
            Some(c.fast_evaluator(&grid)?)
        }
    };
    let poly = target.coeff().polynomial().cloned();
    let a = move |x: f64| match (&poly, &a_fn) {
        (Some(c), _) => c.eval(&x),
        (None, Some(f)) => f(x),
        (None, None) => unreachable!(),
    };
    let per = cfg.samples / cfg.chains;
    let extra = cfg.samples % cfg.chains;
    let counts: Vec<usize> = (0..cfg.chains).map(|c| per + usize::from(c < extra)).collect();
    let outs: Vec<Result<ChainOut>> = if cfg.chains == 1 {
        vec![run_chain(0, counts[0], cfg, target, &a)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = counts
                .iter()
                .enumerate()
                .map(|(c, &n)| {
                    let a = &a;
                    scope.spawn(move || run_chain(c, n, cfg, target, a))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("chain thread panicked")).collect()
        })
    };
    let mut path = Vec::with_capacity(cfg.samples);
    let (mut steps, mut clamped) = (0, 0);
    for out in outs {
        let out = out?;
        path.extend(out.samples);
        steps += out.steps;
        clamped += out.clamped;
    }
    Ok(SimulationRun {
        config: *cfg,
        samples: EmpiricalDistribution::new(path.clone())?,
        path_samples: path,
        steps,
        clamped,
    })
}

/// Thinned post-burn-in samples of the Stein diffusion of `target`.
pub fn simulate(target: &TargetMeasure, cfg: &SimConfig) -> Result<EmpiricalDistribution> {
    Ok(simulate_run(target, cfg)?.samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::ks_distance;
    use crate::stein::NamedTarget;

    fn cfg(seed: u64) -> SimConfig {
        SimConfig {
            samples: 4000,
            burn_in: 5000,
            thinning: 500,
            seed,
            ..SimConfig::default()
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let t = NamedTarget::Normal { gamma: 1.0 }.target().unwrap();
        let a = simulate_run(&t, &cfg(3)).unwrap();
        let b = simulate_run(&t, &cfg(3)).unwrap();
        let c = simulate_run(&t, &cfg(4)).unwrap();
        assert_eq!(a.path_samples, b.path_samples);
        assert_ne!(a.path_samples, c.path_samples);
        assert_eq!(a.steps, 5000 + 4000 * 500);
    }

    #[test]
    fn bounded_support_respected() {
        for t in [NamedTarget::UniformCentered, NamedTarget::Beta { a: 0.5, b: 0.5 }] {
            let target = t.target().unwrap();
            let run = simulate_run(&target, &cfg(1)).unwrap();
            let s = target.support();
            assert!(run.path_samples.iter().all(|&x| s.contains(x)));
        }
    }

    #[test]
    fn chains_are_independent_substreams() {
        let t = NamedTarget::UniformCentered.target().unwrap();
        let c = SimConfig { chains: 3, samples: 3001, ..cfg(2) };
        let run = simulate_run(&t, &c).unwrap();
        assert_eq!(run.path_samples.len(), 3001);
        assert!(ks_distance(&run.samples, &t).unwrap() < 0.05);
    }

    #[test]
    fn numeric_coefficient_target() {
        let t = crate::stein::TargetMeasure::from_density(
            "laplace",
            crate::stein::real_fn(|x: f64| 0.5 * (-x.abs()).exp()),
            crate::stein::Support::real_line(),
        )
        .unwrap();
        let run = simulate_run(&t, &cfg(5)).unwrap();
        assert!(ks_distance(&run.samples, &t).unwrap() < 0.05);
    }

    #[test]
    fn rejects_bad_config_and_reports_overflow() {
        let t = NamedTarget::Normal { gamma: 1.0 }.target().unwrap();
        assert!(simulate(&t, &SimConfig { step: 0.0, ..cfg(1) }).is_err());
        assert!(simulate(&t, &SimConfig { samples: 1, ..cfg(1) }).is_err());
        // explicit Euler on b = -x is unstable for dt > 2
        let r = simulate(&t, &SimConfig { step: 5.0, ..cfg(1) });
        assert!(matches!(r, Err(Error::SimulationOverflow { .. })));
    }
}
