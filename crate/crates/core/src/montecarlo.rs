//! Trajectory sampling as a statistical oracle for policy evaluation.
//!
//! Trajectories are drawn in fixed-size batches. Batch `b` uses
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `b`, so every trajectory
//! owns a fixed slice of the random sequence and parallel runs reproduce
//! serial ones bit for bit. Next states are drawn by inverting the
//! cumulative transition row in state order.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coverage::CoveragePolicy;
use crate::error::{Error, Result};
use crate::evaluate::effective_loss;
use crate::model::MdpModel;
use crate::policy::ProtectionPolicy;

/// Default truncation tolerance, relative to the value scale `max|l| / (1 - δ)`.
pub const DEFAULT_RELATIVE_TRUNCATION: f64 = 1e-6;
pub const BATCH_SIZE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub horizon: usize,
    pub samples: usize,
    pub seed: u64,
    /// Absolute bound on the neglected tail `δ^H max|l| / (1 - δ)`.
    pub truncation_tol: f64,
    pub parallel: bool,
}

impl SimulationConfig {
    /// Default truncation (relative `1e-6`) and the matching horizon.
    pub fn for_model(model: &MdpModel, samples: usize, seed: u64) -> Self {
        let tol = DEFAULT_RELATIVE_TRUNCATION * value_scale(model).max(f64::MIN_POSITIVE);
        Self::with_truncation(model, samples, seed, tol)
    }

    /// Smallest horizon whose geometric tail bound is within `truncation_tol`.
    pub fn with_truncation(model: &MdpModel, samples: usize, seed: u64, truncation_tol: f64) -> Self {
        Self {
            horizon: horizon_for(model, truncation_tol),
            samples,
            seed,
            truncation_tol,
            parallel: true,
        }
    }

    pub fn serial(self) -> Self {
        Self { parallel: false, ..self }
    }

    fn check(&self, model: &MdpModel) -> Result<()> {
        if self.samples == 0 || self.horizon == 0 {
            return Err(Error::InvalidArgument("samples and horizon must be positive".into()));
        }
        if self.truncation_tol.is_nan() || self.truncation_tol <= 0.0 {
            return Err(Error::InvalidArgument("truncation tolerance must be positive".into()));
        }
        let tail = model.discount().powi(self.horizon as i32) * value_scale(model);
        if tail > self.truncation_tol {
            return Err(Error::InvalidArgument(format!(
                "horizon {} leaves a tail of {tail:e}, above the tolerance {:e}",
                self.horizon, self.truncation_tol
            )));
        }
        Ok(())
    }
}

/// Upper bound on any stage term (loss, coverage, or effective loss), over `1 - δ`.
fn value_scale(model: &MdpModel) -> f64 {
    let max_cost = model.actions().iter().map(|a| a.cost).fold(0.0, f64::max);
    (model.max_loss() + max_cost) / (1.0 - model.discount())
}

pub fn horizon_for(model: &MdpModel, truncation_tol: f64) -> usize {
    let delta = model.discount();
    let scale = value_scale(model);
    if delta == 0.0 || scale <= truncation_tol {
        return 1;
    }
    let h = ((truncation_tol / scale).ln() / delta.ln()).ceil();
    (h as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Whether `exact` lies within `k` standard errors of the mean.
    pub fn covers(&self, exact: f64, k: f64) -> bool {
        (self.mean - exact).abs() <= k * self.stderr
    }
}

/// Sampled `E[Σ_t δ^t l(s_t, π(s_t), r)]` from the initial state.
pub fn simulate_value(
    model: &MdpModel,
    policy: &ProtectionPolicy,
    coverage: &CoveragePolicy,
    config: &SimulationConfig,
) -> Result<Estimate> {
    simulate(model, policy, config, |s, a| effective_loss(model, s, a, coverage))
}

/// Sampled expected discounted coverage `E[Σ_t δ^t r(x_t)]`.
pub fn simulate_coverage_paid(
    model: &MdpModel,
    policy: &ProtectionPolicy,
    coverage: &CoveragePolicy,
    config: &SimulationConfig,
) -> Result<Estimate> {
    simulate(model, policy, config, |s, _| coverage.apply(model.loss(s)))
}

fn simulate(
    model: &MdpModel,
    policy: &ProtectionPolicy,
    config: &SimulationConfig,
    stage: impl Fn(usize, usize) -> f64 + Sync,
) -> Result<Estimate> {
    config.check(model)?;
    if policy.len() != model.num_states() {
        return Err(Error::InvalidArgument(format!(
            "policy has {} entries for {} states",
            policy.len(),
            model.num_states()
        )));
    }
    let n = model.num_states();
    let terms: Vec<f64> = (0..n).map(|s| stage(s, policy[s])).collect();
    let rows: Vec<&[f64]> = (0..n).map(|s| model.row(s, policy[s])).collect();
    let batches = config.samples.div_ceil(BATCH_SIZE);

    let run_batch = |b: usize| -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(b as u64);
        let count = BATCH_SIZE.min(config.samples - b * BATCH_SIZE);
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..count {
            let total = trajectory(&mut rng, model.initial_state(), &rows, &terms, model.discount(), config.horizon);
            sum += total;
            sum_sq += total * total;
        }
        (sum, sum_sq)
    };
    let parts: Vec<(f64, f64)> = if config.parallel {
        (0..batches).into_par_iter().map(run_batch).collect()
    } else {
        (0..batches).map(run_batch).collect()
    };
    let (sum, sum_sq) = parts.iter().fold((0.0, 0.0), |(a, b), (s, q)| (a + s, b + q));

    let count = config.samples as f64;
    let mean = sum / count;
    let variance = if config.samples > 1 {
        ((sum_sq - count * mean * mean) / (count - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(Estimate {
        mean,
        stderr: (variance / count).sqrt(),
    })
}

fn trajectory(rng: &mut ChaCha8Rng, start: usize, rows: &[&[f64]], terms: &[f64], delta: f64, horizon: usize) -> f64 {
    let mut state = start;
    let mut weight = 1.0;
    let mut total = 0.0;
    for t in 0..horizon {
        total += weight * terms[state];
        if t + 1 == horizon {
            break;
        }
        weight *= delta;
        state = next_state(rows[state], rng.random::<f64>());
    }
    total
}

/// Inverts the cumulative distribution of `row` at `u ∈ [0, 1)`.
fn next_state(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (s, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return s;
        }
    }
    // Rounding left `u` beyond the accumulated mass: take the last reachable state.
    row.iter().rposition(|&p| p > 0.0).expect("rows carry probability mass")
}
