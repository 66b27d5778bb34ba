//! Headless Monte Carlo simulator of pedestrian-vehicle interaction at a
//! signalized two-lane crosswalk.
//!
//! One trial: a pedestrian arrives at a random side of the crosswalk while
//! IDM-driven vehicles flow in both directions under a sampled signal cycle,
//! repeatedly evaluates a probabilistic crossing decision, and either
//! completes the crossing, collides, or times out. The batch layer runs N
//! independent, reproducibly seeded trials and aggregates success rates,
//! waiting-time statistics, decision-distance histograms, and correlations.
//!
//! Everything is deterministic in (master seed, config): identical inputs
//! give bit-identical outcomes, event logs, and output files, regardless of
//! thread count.

pub mod config;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod idm;
pub mod light;
pub mod output;
pub mod pedestrian;
pub mod seed;
pub mod stats;

pub use config::{validate_config, ScenarioConfig, ValidatedConfig};
pub use engine::{run_trial, run_trial_with_log, Event, TrialOutcome};
pub use error::{Error, Result};
pub use light::LightState;
pub use stats::{aggregate, pearson, run_batch, AggregateStats, BatchConfig};
