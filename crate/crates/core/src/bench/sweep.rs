//! Monte Carlo sweeps over `(n, beta)` grids.

use std::time::Instant;

use rayon::prelude::*;

use crate::bench::accuracy::accuracy;
use crate::bench::collapse::Curve;
use crate::bench::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::matcher::{complete_randomly, gmwm, noisy_seeds, parallel_argmax, Algorithm, MatchResult};
use crate::rng::{purpose_stream, substream_id, Purpose};
use crate::synth::{correct_seed_count, make_correlated_pair, ModelParams};
use crate::witness::count_witnesses_product;

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub n: usize,
    pub p: f64,
    pub s: f64,
    pub beta: f64,
    pub beta_index: usize,
    pub trial: usize,
    pub accuracy: f64,
    pub matched_count: usize,
    /// Set when a parallel-argmax round saw a column collision.
    pub failure: bool,
    pub witness_ms: f64,
    pub matching_ms: f64,
    pub substream: u64,
}

impl TrialResult {
    pub fn runtime_ms(&self) -> f64 {
        self.witness_ms + self.matching_ms
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointSummary {
    pub n: usize,
    pub p: f64,
    pub s: f64,
    pub beta: f64,
    pub beta_index: usize,
    pub median_accuracy: f64,
    pub median_runtime_ms: f64,
    pub trials: usize,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    /// Ordered by `(n, beta_index, trial)` as listed in the config.
    pub trials: Vec<TrialResult>,
    pub points: Vec<PointSummary>,
    /// Grid points that could not be run, with the reason.
    pub skipped: Vec<String>,
}

impl SweepResult {
    /// Median-accuracy curve per `n`, against the actual seed fraction.
    pub fn curves(&self) -> Vec<Curve> {
        self.config
            .n
            .iter()
            .map(|&n| {
                let pts: Vec<(f64, f64)> = self
                    .points
                    .iter()
                    .filter(|pt| pt.n == n)
                    .map(|pt| (pt.beta, pt.median_accuracy))
                    .collect();
                Curve::new(n, self.config.p.at(n), pts)
            })
            .collect()
    }
}

/// Textbook median: the middle value, or the mean of the two middle values.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) })
}

fn algorithm_tag(alg: Algorithm) -> u64 {
    match alg {
        Algorithm::JHop(j) => 0x100 + j as u64,
        Algorithm::NoisySeeds(r) => 0x2_0000_0000 + r as u64,
        Algorithm::ParallelArgmax(j) => 0x300 + j as u64,
    }
}

/// Substream identifying one trial. Different algorithms get different
/// instances; iteration counts do not enter, so re-seeding rounds of the same
/// algorithm share instances.
pub fn trial_substream(master: u64, algorithm: Algorithm, n: usize, beta_index: usize, trial: usize) -> u64 {
    substream_id(master, &[n as u64, beta_index as u64, trial as u64, algorithm_tag(algorithm)])
}

/// Rounds of `algorithm` with per-phase wall-clock totals in milliseconds.
pub fn run_timed(
    g1: &crate::graph::Graph,
    g2: &crate::graph::Graph,
    seeds: &crate::graph::VertexMapping,
    algorithm: Algorithm,
    iterations: usize,
) -> Result<(Vec<MatchResult>, f64, f64)> {
    algorithm.validate()?;
    let (mut witness_ms, mut matching_ms) = (0.0, 0.0);
    let mut rounds: Vec<MatchResult> = Vec::with_capacity(iterations + 1);
    for _ in 0..=iterations {
        let current = rounds.last().map_or(seeds, |r| &r.mapping);
        let result = match algorithm {
            Algorithm::JHop(j) | Algorithm::ParallelArgmax(j) => {
                let t = Instant::now();
                let w = count_witnesses_product(g1, g2, current, j)?;
                witness_ms += t.elapsed().as_secs_f64() * 1e3;
                let t = Instant::now();
                let r = if matches!(algorithm, Algorithm::JHop(_)) { gmwm(&w) } else { parallel_argmax(&w) };
                matching_ms += t.elapsed().as_secs_f64() * 1e3;
                r
            }
            Algorithm::NoisySeeds(r) => {
                let t = Instant::now();
                let out = noisy_seeds(g1, g2, current, r)?;
                matching_ms += t.elapsed().as_secs_f64() * 1e3;
                out
            }
        };
        rounds.push(result);
    }
    Ok((rounds, witness_ms, matching_ms))
}

/// One trial at grid point `(n, beta_index)`.
pub fn run_trial(config: &ExperimentConfig, n: usize, beta_index: usize, trial: usize) -> Result<TrialResult> {
    let p = config.p.at(n);
    let beta = config.beta_at(n, beta_index);
    let params = ModelParams::new(n, p, config.s, beta)?;
    let id = trial_substream(config.seed, config.algorithm, n, beta_index, trial);
    let inst = make_correlated_pair(&params, id)?;
    let (mut rounds, witness_ms, matching_ms) =
        run_timed(&inst.g1, &inst.g2, &inst.seeds, config.algorithm, config.iterations)?;
    let failure = rounds.iter().any(|r| r.failure);
    let mut result = rounds.pop().expect("at least one round");
    if config.complete_random {
        result = complete_randomly(&result, &mut purpose_stream(id, Purpose::Algorithm));
    }
    Ok(TrialResult {
        n,
        p,
        s: config.s,
        beta,
        beta_index,
        trial,
        accuracy: accuracy(&result, &inst.truth, None)?,
        matched_count: result.matched_count,
        failure,
        witness_ms,
        matching_ms,
        substream: id,
    })
}

/// Trials held in memory at once are capped so that their dense witness
/// matrices fit in this many bytes.
const BATCH_BYTES: usize = 1 << 30;

pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let mut skipped = Vec::new();
    let mut grid = Vec::new();
    for &n in &config.n {
        for bi in 0..config.beta.len() {
            let beta = config.beta_at(n, bi);
            match correct_seed_count(n, beta) {
                Ok(_) => grid.push((n, bi)),
                Err(e) => skipped.push(format!("n = {n}, beta = {beta}: {e}")),
            }
        }
    }
    if grid.is_empty() {
        return Err(Error::domain("no runnable grid point"));
    }
    let mut trials = Vec::with_capacity(grid.len() * config.trials);
    for &(n, bi) in &grid {
        let batch = (BATCH_BYTES / (4 * n * n)).max(1);
        for start in (0..config.trials).step_by(batch) {
            let end = (start + batch).min(config.trials);
            let done: Vec<TrialResult> = (start..end)
                .into_par_iter()
                .map(|t| run_trial(config, n, bi, t))
                .collect::<Result<_>>()?;
            trials.extend(done);
        }
    }
    let points = grid
        .iter()
        .map(|&(n, bi)| {
            let at: Vec<&TrialResult> = trials.iter().filter(|t| t.n == n && t.beta_index == bi).collect();
            let acc: Vec<f64> = at.iter().map(|t| t.accuracy).collect();
            let rt: Vec<f64> = at.iter().map(|t| t.runtime_ms()).collect();
            PointSummary {
                n,
                p: at[0].p,
                s: config.s,
                beta: at[0].beta,
                beta_index: bi,
                median_accuracy: median(&acc).expect("trials >= 1"),
                median_runtime_ms: median(&rt).expect("trials >= 1"),
                trials: at.len(),
            }
        })
        .collect();
    Ok(SweepResult {
        config: config.clone(),
        trials,
        points,
        skipped,
    })
}
