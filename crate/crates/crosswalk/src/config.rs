//! Scenario configuration: the single source of truth for every tunable
//! parameter, its default, and its unit. Configs are loaded from JSON;
//! missing keys take their defaults, unknown keys are an error so typos
//! cannot silently fall back to defaults.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::idm::IdmParams;
use crate::light::LightTimingConfig;
use crate::pedestrian::DecisionParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Fixed at 2: one lane per direction.
    pub lane_count: u32,
    pub lane_width_m: f64,
    /// Crosswalk extent along the travel direction.
    pub crosswalk_width_m: f64,
    /// Simulated corridor length; the crosswalk sits at its center.
    pub road_length_m: f64,
    pub vehicle_length_m: f64,
    pub vehicle_width_m: f64,
    pub pedestrian_radius_m: f64,
    pub ped_speed_mean_mps: f64,
    pub ped_speed_std_mps: f64,
    pub veh_speed_min_mps: f64,
    pub veh_speed_max_mps: f64,
    pub idm: IdmParams,
    pub decision: DecisionParams,
    pub light: LightTimingConfig,
    /// Simulation timestep.
    pub dt_s: f64,
    /// Seconds between crossing-decision evaluations while waiting.
    pub decision_interval_s: f64,
    /// Mean of the exponential headway between vehicle spawns, per lane.
    pub spawn_headway_mean_s: f64,
    pub max_trial_time_s: f64,
    /// Vehicles keep this margin before the crosswalk when yielding to a
    /// crossing pedestrian.
    pub ped_buffer_margin_m: f64,
    /// Stop line setback upstream of the crosswalk near edge.
    pub stop_line_setback_m: f64,
    /// Disable to run pedestrian-only scenarios (also skips the initial
    /// traffic placement).
    pub spawn_enabled: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            lane_count: 2,
            lane_width_m: 3.5,
            crosswalk_width_m: 3.0,
            road_length_m: 120.0,
            vehicle_length_m: 4.5,
            vehicle_width_m: 1.8,
            pedestrian_radius_m: 0.3,
            ped_speed_mean_mps: 1.4,
            ped_speed_std_mps: 0.2,
            veh_speed_min_mps: 10.0,
            veh_speed_max_mps: 15.0,
            idm: IdmParams::default(),
            decision: DecisionParams::default(),
            light: LightTimingConfig::default(),
            dt_s: 1.0 / 60.0,
            decision_interval_s: 1.0,
            spawn_headway_mean_s: 4.0,
            max_trial_time_s: 300.0,
            ped_buffer_margin_m: 1.5,
            stop_line_setback_m: 8.0,
            spawn_enabled: true,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json_str(s: &str) -> Result<ScenarioConfig> {
        Ok(serde_json::from_str(s)?)
    }
}

/// A config whose invariants have all been checked. Immutable thereafter;
/// safe to share read-only across concurrent trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValidatedConfig(ScenarioConfig);

impl std::ops::Deref for ValidatedConfig {
    type Target = ScenarioConfig;
    fn deref(&self) -> &ScenarioConfig {
        &self.0
    }
}

impl ValidatedConfig {
    pub fn as_inner(&self) -> &ScenarioConfig {
        &self.0
    }
    pub fn into_inner(self) -> ScenarioConfig {
        self.0
    }
    /// Validating an already-validated config returns it unchanged.
    pub fn revalidate(self) -> ValidatedConfig {
        self
    }
}

/// Checks every invariant and reports all violations at once.
pub fn validate_config(cfg: ScenarioConfig) -> Result<ValidatedConfig> {
    let mut v: Vec<Violation> = Vec::new();
    let mut positive = |name: &str, value: f64| {
        // NaN fails both clauses' complements, so it is rejected too.
        if value <= 0.0 || !value.is_finite() {
            v.push(Violation {
                field: name.to_string(),
                reason: format!("must be strictly positive, got {value}"),
            });
        }
    };

    positive("lane_width_m", cfg.lane_width_m);
    positive("crosswalk_width_m", cfg.crosswalk_width_m);
    positive("road_length_m", cfg.road_length_m);
    positive("vehicle_length_m", cfg.vehicle_length_m);
    positive("vehicle_width_m", cfg.vehicle_width_m);
    positive("pedestrian_radius_m", cfg.pedestrian_radius_m);
    positive("ped_speed_mean_mps", cfg.ped_speed_mean_mps);
    positive("veh_speed_min_mps", cfg.veh_speed_min_mps);
    positive("veh_speed_max_mps", cfg.veh_speed_max_mps);
    positive("dt_s", cfg.dt_s);
    positive("decision_interval_s", cfg.decision_interval_s);
    positive("spawn_headway_mean_s", cfg.spawn_headway_mean_s);
    positive("max_trial_time_s", cfg.max_trial_time_s);
    positive("idm.a_max", cfg.idm.a_max);
    positive("idm.b_comfortable", cfg.idm.b_comfortable);
    positive("idm.s0_m", cfg.idm.s0_m);
    positive("idm.T_headway_s", cfg.idm.t_headway_s);
    positive("idm.delta_exponent", cfg.idm.delta_exponent);
    positive(
        "decision.patience_divisor_green",
        cfg.decision.patience_divisor_green,
    );
    positive(
        "decision.patience_divisor_yellow",
        cfg.decision.patience_divisor_yellow,
    );
    positive(
        "decision.patience_divisor_red",
        cfg.decision.patience_divisor_red,
    );
    if cfg.lane_count != 2 {
        v.push(Violation {
            field: "lane_count".into(),
            reason: format!("fixed at 2 (one per direction), got {}", cfg.lane_count),
        });
    }
    if cfg.veh_speed_min_mps > cfg.veh_speed_max_mps {
        v.push(Violation {
            field: "veh_speed".into(),
            reason: "min > max".into(),
        });
    }
    if cfg.ped_speed_std_mps < 0.0 {
        v.push(Violation {
            field: "ped_speed_std_mps".into(),
            reason: "must be non-negative".into(),
        });
    } else if cfg.ped_speed_std_mps >= cfg.ped_speed_mean_mps {
        v.push(Violation {
            field: "ped_speed_std_mps".into(),
            reason: "must be smaller than ped_speed_mean_mps".into(),
        });
    }
    if cfg.dt_s > cfg.decision_interval_s {
        v.push(Violation {
            field: "dt_s".into(),
            reason: "exceeds decision interval".into(),
        });
    }
    for (name, cap) in [
        (
            "decision.patience_cap_green",
            cfg.decision.patience_cap_green,
        ),
        (
            "decision.patience_cap_yellow",
            cfg.decision.patience_cap_yellow,
        ),
        ("decision.patience_cap_red", cfg.decision.patience_cap_red),
    ] {
        if !(cap > 0.0 && cap <= 1.0) {
            v.push(Violation {
                field: name.into(),
                reason: format!("must be in (0, 1], got {cap}"),
            });
        }
    }
    if cfg.decision.dist_near_m >= cfg.decision.dist_far_m {
        v.push(Violation {
            field: "decision.dist_near_m".into(),
            reason: "must be smaller than dist_far_m".into(),
        });
    }
    for (name, range) in [
        ("light.green_range_s", cfg.light.green_range_s),
        ("light.yellow_range_s", cfg.light.yellow_range_s),
        ("light.red_range_s", cfg.light.red_range_s),
    ] {
        if !(range[0] > 0.0 && range[0] <= range[1]) {
            v.push(Violation {
                field: name.into(),
                reason: format!("requires 0 < min <= max, got [{}, {}]", range[0], range[1]),
            });
        }
    }
    if cfg.ped_buffer_margin_m < 0.0 {
        v.push(Violation {
            field: "ped_buffer_margin_m".into(),
            reason: "must be non-negative".into(),
        });
    }
    if cfg.stop_line_setback_m < 0.0 {
        v.push(Violation {
            field: "stop_line_setback_m".into(),
            reason: "must be non-negative".into(),
        });
    }
    if v.is_empty() {
        Ok(ValidatedConfig(cfg))
    } else {
        Err(Error::InvalidConfig(v))
    }
}

const MAX_REJECTIONS: u32 = 100;

/// Pedestrian walking speed: Normal(mean, std) truncated by re-sampling to
/// (0, mean + 4 std]. Rejection keeps the distribution a genuine truncated
/// normal; clamping would bias the mean.
pub fn sample_pedestrian_speed<R: Rng + ?Sized>(rng: &mut R, cfg: &ValidatedConfig) -> Result<f64> {
    let mean = cfg.ped_speed_mean_mps;
    let std = cfg.ped_speed_std_mps;
    if std == 0.0 {
        return Ok(mean);
    }
    let normal = Normal::new(mean, std).expect("validated parameters");
    for _ in 0..MAX_REJECTIONS {
        let x = normal.sample(rng);
        if x > 0.0 && x <= mean + 4.0 * std {
            return Ok(x);
        }
    }
    Err(Error::SamplingFailure(MAX_REJECTIONS))
}

/// Vehicle desired speed: uniform on [min, max].
pub fn sample_vehicle_speed<R: Rng + ?Sized>(rng: &mut R, cfg: &ValidatedConfig) -> f64 {
    if cfg.veh_speed_min_mps == cfg.veh_speed_max_mps {
        cfg.veh_speed_min_mps
    } else {
        rng.random_range(cfg.veh_speed_min_mps..=cfg.veh_speed_max_mps)
    }
}
