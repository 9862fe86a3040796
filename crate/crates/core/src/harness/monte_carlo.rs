//! Independent training runs in parallel and their per-episode statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::sim::{run_training_on, EpisodeRecord};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run: usize,
    pub seed: u64,
    pub records: Vec<EpisodeRecord>,
}

/// Order statistics of one quantity across runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        };
        Some(Summary {
            mean: v.iter().sum::<f64>() / n as f64,
            median,
            min: v[0],
            max: v[n - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub episode: usize,
    pub steps: Summary,
    /// Agent-averaged P_MB; `None` for model-free variants.
    pub pmb: Option<Summary>,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub runs: Vec<RunResult>,
    pub aggregate: Vec<AggregateRow>,
}

/// Runs `cfg.monte_carlo_runs` trainings, run `k` seeded with `cfg.seed + k`.
/// Results come back ordered by run index whatever the thread schedule.
/// Trajectories are not kept.
pub fn run_monte_carlo(cfg: &ExperimentConfig) -> Result<MonteCarloResult> {
    let map = cfg.load_map()?;
    cfg.validate(&map)?;
    let runs = (0..cfg.monte_carlo_runs)
        .into_par_iter()
        .map(|k| {
            let seed = cfg.seed.wrapping_add(k as u64);
            let run_cfg = ExperimentConfig {
                seed,
                trajectory_every: 0,
                ..cfg.clone()
            };
            let t = run_training_on(&run_cfg, map.clone(), &mut ())?;
            Ok(RunResult {
                run: k,
                seed,
                records: t.records,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let aggregate = aggregate(&runs);
    Ok(MonteCarloResult { runs, aggregate })
}

/// Per-episode statistics over runs, up to the shortest run.
pub fn aggregate(runs: &[RunResult]) -> Vec<AggregateRow> {
    let n_ep = runs.iter().map(|r| r.records.len()).min().unwrap_or(0);
    (0..n_ep)
        .map(|e| {
            let recs: Vec<&EpisodeRecord> = runs.iter().map(|r| &r.records[e]).collect();
            let steps: Vec<f64> = recs.iter().map(|r| r.steps as f64).collect();
            let pmb: Vec<f64> = recs
                .iter()
                .filter(|r| !r.mean_pmb.is_empty())
                .map(|r| r.mean_pmb.iter().sum::<f64>() / r.mean_pmb.len() as f64)
                .collect();
            let successes = recs.iter().filter(|r| r.success).count();
            AggregateRow {
                episode: e,
                steps: Summary::of(&steps).expect("at least one run"),
                pmb: Summary::of(&pmb),
                success_rate: successes as f64 / recs.len() as f64,
            }
        })
        .collect()
}
