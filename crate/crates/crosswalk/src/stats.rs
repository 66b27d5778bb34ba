//! Batch runner and aggregate statistics.
//!
//! `run_batch` fans N trials out over a rayon pool; trial i draws from an
//! independent stream derived from (master_seed, i) (see [`crate::seed`]),
//! so results are identical regardless of thread count or execution order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ValidatedConfig;
use crate::engine::{run_trial, TrialOutcome};
use crate::error::{Error, Result};
use crate::light::LightState;
use crate::seed::derive_trial_seed;

#[derive(Debug, Clone)]
pub struct BatchConfig {
    pub n_trials: u64,
    pub master_seed: u64,
    pub scenario: ValidatedConfig,
}

/// Runs every trial of the batch; output order is by trial index.
pub fn run_batch(batch: &BatchConfig) -> Result<Vec<TrialOutcome>> {
    (0..batch.n_trials)
        .into_par_iter()
        .map(|i| run_trial(derive_trial_seed(batch.master_seed, i), &batch.scenario))
        .collect()
}

/// Sample Pearson correlation. With one series binary in {0, 1} this is the
/// point-biserial coefficient, computed by the same formula.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DegenerateInput(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateInput("need at least 2 pairs".into()));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::DegenerateInput("zero variance series".into()));
    }
    Ok(cov / (var_x.sqrt() * var_y.sqrt()))
}

/// Box-plot summary: linear-interpolated quartiles, 1.5 IQR whisker rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaitStats {
    pub n: u64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub outliers: Vec<f64>,
}

/// Per-light-state container with a stable serialized order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ByLight<T> {
    pub green: T,
    pub yellow: T,
    pub red: T,
}

impl<T> ByLight<T> {
    pub fn get(&self, light: LightState) -> &T {
        match light {
            LightState::Green => &self.green,
            LightState::Yellow => &self.yellow,
            LightState::Red => &self.red,
        }
    }
    fn get_mut(&mut self, light: LightState) -> &mut T {
        match light {
            LightState::Green => &mut self.green,
            LightState::Yellow => &mut self.yellow,
            LightState::Red => &mut self.red,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SuccessCount {
    pub successes: u64,
    pub failures: u64,
}

/// Distance histogram bin edges in meters; the last bin is open-ended.
pub const DISTANCE_BIN_EDGES_M: [f64; 6] = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlations {
    pub success_vs_wait: f64,
    pub success_vs_distance: f64,
    pub wait_vs_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub n_trials: u64,
    pub timeout_count: u64,
    /// Successes over non-timeout trials.
    pub success_rate_overall: f64,
    pub success_by_light_at_crossing: ByLight<SuccessCount>,
    pub wait_stats_by_light_at_arrival: ByLight<Option<WaitStats>>,
    /// Bins [0,5), [5,10), ..., [25, inf), success/failure counts.
    pub distance_histogram: Vec<SuccessCount>,
    pub correlations: Correlations,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    // Linear interpolation between order statistics (the common box-plot
    // convention).
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn wait_stats(mut values: Vec<f64>) -> Option<WaitStats> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q1 = quantile(&values, 0.25);
    let median = quantile(&values, 0.5);
    let q3 = quantile(&values, 0.75);
    let iqr = q3 - q1;
    let lo = q1 - 1.5 * iqr;
    let hi = q3 + 1.5 * iqr;
    let outliers = values
        .iter()
        .copied()
        .filter(|&v| v < lo || v > hi)
        .collect();
    Some(WaitStats {
        n: values.len() as u64,
        min: values[0],
        q1,
        median,
        q3,
        max: *values.last().unwrap(),
        outliers,
    })
}

pub fn distance_bin(d: f64) -> usize {
    DISTANCE_BIN_EDGES_M
        .iter()
        .rposition(|&edge| d >= edge)
        .unwrap_or(0)
}

/// Aggregates a batch: success rates grouped by the light at crossing,
/// waiting times grouped by the light at arrival, the decision-distance
/// histogram, and the correlation triple. Timeout trials are counted
/// separately and excluded from rates, waits, and correlations; trials
/// with no vehicle on the road at decision time (infinite distance) are
/// excluded from the distance correlations.
pub fn aggregate(outcomes: &[TrialOutcome]) -> Result<AggregateStats> {
    if outcomes.is_empty() {
        return Err(Error::DegenerateInput("empty outcome list".into()));
    }
    let timeout_count = outcomes.iter().filter(|o| o.timeout).count() as u64;
    let mut live: Vec<&TrialOutcome> = outcomes.iter().filter(|o| !o.timeout).collect();
    if live.is_empty() {
        return Err(Error::DegenerateInput("all trials timed out".into()));
    }
    // Canonical order so the floating-point summation order (and hence every
    // output bit) is independent of input permutation.
    live.sort_by(|a, b| {
        a.seed
            .cmp(&b.seed)
            .then(a.wait_s.total_cmp(&b.wait_s))
            .then(a.success.cmp(&b.success))
            .then(
                a.nearest_vehicle_at_decision_m
                    .unwrap_or(f64::NEG_INFINITY)
                    .total_cmp(&b.nearest_vehicle_at_decision_m.unwrap_or(f64::NEG_INFINITY)),
            )
    });

    let successes = live.iter().filter(|o| o.success).count() as u64;
    let mut by_crossing = ByLight {
        green: SuccessCount::default(),
        yellow: SuccessCount::default(),
        red: SuccessCount::default(),
    };
    for o in &live {
        if let Some(light) = o.light_at_crossing {
            let c = by_crossing.get_mut(light);
            if o.success {
                c.successes += 1;
            } else {
                c.failures += 1;
            }
        }
    }

    let waits_for = |light: LightState| -> Vec<f64> {
        live.iter()
            .filter(|o| o.light_at_arrival == light)
            .map(|o| o.wait_s)
            .collect()
    };
    let wait_stats_by_light = ByLight {
        green: wait_stats(waits_for(LightState::Green)),
        yellow: wait_stats(waits_for(LightState::Yellow)),
        red: wait_stats(waits_for(LightState::Red)),
    };

    let mut histogram = vec![SuccessCount::default(); DISTANCE_BIN_EDGES_M.len()];
    for o in &live {
        if let Some(d) = o.nearest_vehicle_at_decision_m {
            let bin = &mut histogram[distance_bin(d)];
            if o.success {
                bin.successes += 1;
            } else {
                bin.failures += 1;
            }
        }
    }

    let success01: Vec<f64> = live
        .iter()
        .map(|o| f64::from(u8::from(o.success)))
        .collect();
    let waits: Vec<f64> = live.iter().map(|o| o.wait_s).collect();
    let with_distance: Vec<&&TrialOutcome> = live
        .iter()
        .filter(|o| o.nearest_vehicle_at_decision_m.is_some_and(f64::is_finite))
        .collect();
    let d_success: Vec<f64> = with_distance
        .iter()
        .map(|o| f64::from(u8::from(o.success)))
        .collect();
    let d_waits: Vec<f64> = with_distance.iter().map(|o| o.wait_s).collect();
    let dists: Vec<f64> = with_distance
        .iter()
        .map(|o| o.nearest_vehicle_at_decision_m.unwrap())
        .collect();

    let correlations = Correlations {
        success_vs_wait: pearson(&success01, &waits)?,
        success_vs_distance: pearson(&d_success, &dists)?,
        wait_vs_distance: pearson(&d_waits, &dists)?,
    };

    Ok(AggregateStats {
        n_trials: outcomes.len() as u64,
        timeout_count,
        success_rate_overall: successes as f64 / live.len() as f64,
        success_by_light_at_crossing: by_crossing,
        wait_stats_by_light_at_arrival: wait_stats_by_light,
        distance_histogram: histogram,
        correlations,
    })
}
