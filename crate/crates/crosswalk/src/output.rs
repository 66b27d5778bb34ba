//! Result file writers and the trials.csv reader.
//!
//! File formats (all UTF-8, comma-separated, header row, `.` decimal point):
//!
//! * `trials.csv` — one row per trial. Columns: `trial`, `seed`, `success`
//!   (0/1), `wait_s`, `light_at_arrival`, `light_at_crossing` (empty when the
//!   trial timed out), `nearest_vehicle_at_decision_m` (empty for timeouts,
//!   `inf` when the road was empty at decision time), `crossing_duration_s`
//!   (empty unless the crossing succeeded), `timeout` (0/1). Floats use the
//!   shortest representation that round-trips, so re-parsing the file
//!   reproduces every value bit-exactly.
//! * `aggregate.json` — [`AggregateStats`] under a versioned envelope.
//! * `aggregate.csv` — the same aggregate flattened to `key,value` rows.
//! * `manifest.json` — [`RunManifest`]: config snapshot, seed, trial count,
//!   artifact version, schema version, wall-clock duration, output paths.
//! * `fig3_wait_by_light.csv` — `light,n,min_s,q1_s,median_s,q3_s,max_s,n_outliers`
//!   (one row per light state with at least one arrival).
//! * `fig4_success_by_light.csv` — `light,successes,failures`.
//! * `fig5_distance_hist.csv` — `bin_lo_m,bin_hi_m,successes,failures`; bin
//!   edges 0, 5, 10, 15, 20, 25 with an open-ended last bin (`bin_hi_m` =
//!   `inf`).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::engine::TrialOutcome;
use crate::error::{Error, Result};
use crate::light::LightState;
use crate::stats::{AggregateStats, WaitStats, DISTANCE_BIN_EDGES_M};

/// Version stamp for the on-disk JSON/CSV layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub artifact_version: String,
    pub config: ScenarioConfig,
    pub master_seed: u64,
    pub n_trials: u64,
    pub wall_clock_s: f64,
    pub output_files: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AggregateEnvelope {
    schema_version: u32,
    #[serde(flatten)]
    stats: AggregateStats,
}

fn fmt_f64(v: f64) -> String {
    // `{}` on f64 is the shortest string that parses back to the same bits.
    format!("{v}")
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn light_str(l: LightState) -> &'static str {
    match l {
        LightState::Green => "green",
        LightState::Yellow => "yellow",
        LightState::Red => "red",
    }
}

pub const TRIALS_HEADER: &str = "trial,seed,success,wait_s,light_at_arrival,light_at_crossing,nearest_vehicle_at_decision_m,crossing_duration_s,timeout";

pub fn trials_csv_string(outcomes: &[TrialOutcome]) -> String {
    let mut s = String::with_capacity(64 * (outcomes.len() + 1));
    s.push_str(TRIALS_HEADER);
    s.push('\n');
    for (i, o) in outcomes.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            i,
            o.seed,
            u8::from(o.success),
            fmt_f64(o.wait_s),
            light_str(o.light_at_arrival),
            o.light_at_crossing.map(light_str).unwrap_or(""),
            fmt_opt_f64(o.nearest_vehicle_at_decision_m),
            fmt_opt_f64(o.crossing_duration_s),
            u8::from(o.timeout),
        );
    }
    s
}

fn parse_light(s: &str) -> Result<LightState> {
    match s {
        "green" => Ok(LightState::Green),
        "yellow" => Ok(LightState::Yellow),
        "red" => Ok(LightState::Red),
        other => Err(Error::DegenerateInput(format!(
            "bad light state: {other:?}"
        ))),
    }
}

fn parse_opt_f64(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|e| Error::DegenerateInput(format!("bad float {s:?}: {e}")))
}

fn parse_bit(s: &str) -> Result<bool> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::DegenerateInput(format!("bad 0/1 flag: {other:?}"))),
    }
}

/// Parses a trials.csv produced by [`trials_csv_string`]; the inverse up to
/// the `trial` index column, which is positional.
pub fn parse_trials_csv(text: &str) -> Result<Vec<TrialOutcome>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    {
        let headers = rdr.headers()?;
        let expect: Vec<&str> = TRIALS_HEADER.split(',').collect();
        if headers.iter().collect::<Vec<_>>() != expect {
            return Err(Error::DegenerateInput(format!(
                "unexpected trials.csv header: {headers:?}"
            )));
        }
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let r = record?;
        if r.len() != 9 {
            return Err(Error::DegenerateInput(format!(
                "expected 9 columns, got {}",
                r.len()
            )));
        }
        let get = |i: usize| r.get(i).unwrap();
        out.push(TrialOutcome {
            seed: get(1)
                .parse()
                .map_err(|e| Error::DegenerateInput(format!("bad seed: {e}")))?,
            success: parse_bit(get(2))?,
            wait_s: parse_opt_f64(get(3))?
                .ok_or_else(|| Error::DegenerateInput("missing wait_s".into()))?,
            light_at_arrival: parse_light(get(4))?,
            light_at_crossing: if get(5).is_empty() {
                None
            } else {
                Some(parse_light(get(5))?)
            },
            nearest_vehicle_at_decision_m: parse_opt_f64(get(6))?,
            crossing_duration_s: parse_opt_f64(get(7))?,
            timeout: parse_bit(get(8))?,
        });
    }
    Ok(out)
}

pub fn aggregate_json_string(stats: &AggregateStats) -> String {
    let env = AggregateEnvelope {
        schema_version: SCHEMA_VERSION,
        stats: stats.clone(),
    };
    let mut s = serde_json::to_string_pretty(&env).expect("aggregate stats serialize");
    s.push('\n');
    s
}

pub fn parse_aggregate_json(text: &str) -> Result<AggregateStats> {
    let env: AggregateEnvelope = serde_json::from_str(text)?;
    Ok(env.stats)
}

/// The aggregate flattened to `key,value` rows for spreadsheet use.
pub fn aggregate_csv_string(stats: &AggregateStats) -> String {
    let mut s = String::from("key,value\n");
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k},{v}");
    };
    kv("schema_version", SCHEMA_VERSION.to_string());
    kv("n_trials", stats.n_trials.to_string());
    kv("timeout_count", stats.timeout_count.to_string());
    kv("success_rate_overall", fmt_f64(stats.success_rate_overall));
    for light in [LightState::Green, LightState::Yellow, LightState::Red] {
        let c = stats.success_by_light_at_crossing.get(light);
        kv(
            &format!("crossings_{}_successes", light_str(light)),
            c.successes.to_string(),
        );
        kv(
            &format!("crossings_{}_failures", light_str(light)),
            c.failures.to_string(),
        );
    }
    for light in [LightState::Green, LightState::Yellow, LightState::Red] {
        if let Some(w) = stats.wait_stats_by_light_at_arrival.get(light) {
            let name = light_str(light);
            kv(&format!("wait_{name}_n"), w.n.to_string());
            kv(&format!("wait_{name}_min_s"), fmt_f64(w.min));
            kv(&format!("wait_{name}_q1_s"), fmt_f64(w.q1));
            kv(&format!("wait_{name}_median_s"), fmt_f64(w.median));
            kv(&format!("wait_{name}_q3_s"), fmt_f64(w.q3));
            kv(&format!("wait_{name}_max_s"), fmt_f64(w.max));
        }
    }
    for (i, bin) in stats.distance_histogram.iter().enumerate() {
        let lo = DISTANCE_BIN_EDGES_M[i];
        kv(
            &format!("dist_bin_{lo}_successes"),
            bin.successes.to_string(),
        );
        kv(&format!("dist_bin_{lo}_failures"), bin.failures.to_string());
    }
    kv(
        "corr_success_vs_wait",
        fmt_f64(stats.correlations.success_vs_wait),
    );
    kv(
        "corr_success_vs_distance",
        fmt_f64(stats.correlations.success_vs_distance),
    );
    kv(
        "corr_wait_vs_distance",
        fmt_f64(stats.correlations.wait_vs_distance),
    );
    s
}

pub fn fig3_csv_string(stats: &AggregateStats) -> String {
    let mut s = String::from("light,n,min_s,q1_s,median_s,q3_s,max_s,n_outliers\n");
    let mut row = |light: LightState, w: &WaitStats| {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            light_str(light),
            w.n,
            fmt_f64(w.min),
            fmt_f64(w.q1),
            fmt_f64(w.median),
            fmt_f64(w.q3),
            fmt_f64(w.max),
            w.outliers.len(),
        );
    };
    for light in [LightState::Green, LightState::Yellow, LightState::Red] {
        if let Some(w) = stats.wait_stats_by_light_at_arrival.get(light) {
            row(light, w);
        }
    }
    s
}

pub fn fig4_csv_string(stats: &AggregateStats) -> String {
    let mut s = String::from("light,successes,failures\n");
    for light in [LightState::Green, LightState::Yellow, LightState::Red] {
        let c = stats.success_by_light_at_crossing.get(light);
        let _ = writeln!(s, "{},{},{}", light_str(light), c.successes, c.failures);
    }
    s
}

pub fn fig5_csv_string(stats: &AggregateStats) -> String {
    let mut s = String::from("bin_lo_m,bin_hi_m,successes,failures\n");
    for (i, bin) in stats.distance_histogram.iter().enumerate() {
        let lo = DISTANCE_BIN_EDGES_M[i];
        let hi = DISTANCE_BIN_EDGES_M
            .get(i + 1)
            .map(|&v| fmt_f64(v))
            .unwrap_or_else(|| "inf".to_string());
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_f64(lo),
            hi,
            bin.successes,
            bin.failures
        );
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Writes all result files into `dir`, creating it if needed. Returns the
/// list of paths written. The per-trial table honors `format`; the aggregate
/// is always written in both forms (its JSON is the canonical artifact, its
/// CSV a convenience view).
pub fn write_outputs(
    dir: &Path,
    stats: &AggregateStats,
    outcomes: &[TrialOutcome],
    manifest: &RunManifest,
    format: OutputFormat,
    emit_plot_data: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files: Vec<(&str, String)> = Vec::new();
    match format {
        OutputFormat::Csv => files.push(("trials.csv", trials_csv_string(outcomes))),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(outcomes).expect("outcomes serialize");
            s.push('\n');
            files.push(("trials.json", s));
        }
    }
    files.push(("aggregate.json", aggregate_json_string(stats)));
    files.push(("aggregate.csv", aggregate_csv_string(stats)));
    if emit_plot_data {
        files.push(("fig3_wait_by_light.csv", fig3_csv_string(stats)));
        files.push(("fig4_success_by_light.csv", fig4_csv_string(stats)));
        files.push(("fig5_distance_hist.csv", fig5_csv_string(stats)));
    }

    let mut manifest = manifest.clone();
    manifest.output_files = files
        .iter()
        .map(|(name, _)| (*name).to_string())
        .chain(std::iter::once("manifest.json".to_string()))
        .collect();
    let mut m = serde_json::to_string_pretty(&manifest).expect("manifest serialize");
    m.push('\n');
    files.push(("manifest.json", m));

    let mut written = Vec::with_capacity(files.len());
    for (name, content) in files {
        let path = dir.join(name);
        fs::write(&path, content)?;
        written.push(path);
    }
    Ok(written)
}
