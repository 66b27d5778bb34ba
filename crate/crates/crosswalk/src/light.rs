//! Traffic light phase sampling and state lookup.
//!
//! Each trial samples one [`LightSchedule`]: a green/yellow/red duration,
//! each uniform within its configured range, plus a phase offset placing
//! t = 0 somewhere in the cycle. The cycle order is Green -> Yellow -> Red
//! with half-open phase intervals, so a query exactly on a boundary returns
//! the next phase.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LightState {
    Green,
    Yellow,
    Red,
}

impl std::fmt::Display for LightState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LightState::Green => write!(f, "green"),
            LightState::Yellow => write!(f, "yellow"),
            LightState::Red => write!(f, "red"),
        }
    }
}

/// How the phase offset for t = 0 is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum InitialPhaseMode {
    /// Offset uniform over the whole cycle; pedestrian arrival is equally
    /// likely to fall anywhere in the cycle.
    RandomUniform,
    /// t = 0 falls `elapsed_s` seconds into the given state.
    Fixed { state: LightState, elapsed_s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LightTimingConfig {
    /// [min, max] seconds for each phase duration.
    pub green_range_s: [f64; 2],
    pub yellow_range_s: [f64; 2],
    pub red_range_s: [f64; 2],
    pub initial_phase_mode: InitialPhaseMode,
}

impl Default for LightTimingConfig {
    fn default() -> Self {
        Self {
            green_range_s: [12.0, 18.0],
            yellow_range_s: [3.0, 5.0],
            red_range_s: [10.0, 16.0],
            initial_phase_mode: InitialPhaseMode::RandomUniform,
        }
    }
}

/// One trial's sampled phase durations and offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LightSchedule {
    pub green_s: f64,
    pub yellow_s: f64,
    pub red_s: f64,
    /// Where in the cycle t = 0 falls, in [0, cycle).
    pub phase_offset_s: f64,
}

impl LightSchedule {
    pub fn cycle_s(&self) -> f64 {
        self.green_s + self.yellow_s + self.red_s
    }
}

/// Draws one schedule: each duration uniform in its range, offset per the
/// configured initial phase mode.
pub fn sample_schedule<R: Rng + ?Sized>(rng: &mut R, cfg: &LightTimingConfig) -> LightSchedule {
    let green_s = sample_range(rng, cfg.green_range_s);
    let yellow_s = sample_range(rng, cfg.yellow_range_s);
    let red_s = sample_range(rng, cfg.red_range_s);
    let cycle = green_s + yellow_s + red_s;
    let phase_offset_s = match cfg.initial_phase_mode {
        InitialPhaseMode::RandomUniform => rng.random_range(0.0..cycle),
        InitialPhaseMode::Fixed { state, elapsed_s } => {
            let start = match state {
                LightState::Green => 0.0,
                LightState::Yellow => green_s,
                LightState::Red => green_s + yellow_s,
            };
            (start + elapsed_s).rem_euclid(cycle)
        }
    };
    LightSchedule {
        green_s,
        yellow_s,
        red_s,
        phase_offset_s,
    }
}

fn sample_range<R: Rng + ?Sized>(rng: &mut R, [min, max]: [f64; 2]) -> f64 {
    if min == max {
        min
    } else {
        rng.random_range(min..=max)
    }
}

/// Light state at time t. Phases are half-open [start, end), in cycle order
/// Green -> Yellow -> Red. Negative t is accepted (the engine's warm-up runs
/// before the pedestrian arrives) and wraps modularly.
pub fn light_state_at(schedule: &LightSchedule, t: f64) -> LightState {
    let u = (t + schedule.phase_offset_s).rem_euclid(schedule.cycle_s());
    if u < schedule.green_s {
        LightState::Green
    } else if u < schedule.green_s + schedule.yellow_s {
        LightState::Yellow
    } else {
        LightState::Red
    }
}
