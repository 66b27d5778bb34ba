use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crosswalk::config::{validate_config, ScenarioConfig, ValidatedConfig};
use crosswalk::engine::{run_trial_with_log, Event};
use crosswalk::error::Error;
use crosswalk::output::{write_outputs, OutputFormat, RunManifest, SCHEMA_VERSION};
use crosswalk::seed::derive_trial_seed;
use crosswalk::stats::{aggregate, run_batch, BatchConfig};

#[derive(Parser)]
#[command(
    name = "crosswalk",
    version,
    about = "Monte Carlo simulator of pedestrian crossings at a signalized two-lane road"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario config JSON; defaults apply for every omitted key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; trial i uses an independent stream derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for trial-level parallelism; 0 = rayon default.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of trials and write per-trial and aggregate results.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 500)]
        trials: u64,
        /// Per-trial table format (the aggregate is always CSV + JSON).
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        /// Also write fig3/fig4/fig5 plot-series CSVs.
        #[arg(long)]
        emit_plot_data: bool,
    },
    /// Run a single trial and write its outcome plus a full event log.
    Trial {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run one batch per value of `key=[v1,v2,...]`, e.g.
    /// `sweep decision.base_threshold=[-0.4,-0.2,0.0]`.
    Sweep {
        /// Dotted config key and JSON list of values to sweep over.
        spec: String,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 500)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        emit_plot_data: bool,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<ValidatedConfig, Error> {
    let raw = match path {
        Some(p) => ScenarioConfig::from_json_str(&fs::read_to_string(p)?)?,
        None => ScenarioConfig::default(),
    };
    validate_config(raw)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 2,
        Error::Csv(e) if e.is_io_error() => 2,
        _ => 1,
    }
}

fn install_pool(jobs: usize) -> Result<(), Error> {
    if jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::DegenerateInput(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run_one_batch(
    cfg: &ValidatedConfig,
    trials: u64,
    seed: u64,
    out: &Path,
    format: FormatArg,
    emit_plot_data: bool,
) -> Result<(), Error> {
    let started = Instant::now();
    let batch = BatchConfig {
        n_trials: trials,
        master_seed: seed,
        scenario: cfg.clone(),
    };
    let outcomes = run_batch(&batch)?;
    let stats = aggregate(&outcomes)?;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.as_inner().clone(),
        master_seed: seed,
        n_trials: trials,
        wall_clock_s: started.elapsed().as_secs_f64(),
        output_files: Vec::new(),
    };
    let fmt = match format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };
    write_outputs(out, &stats, &outcomes, &manifest, fmt, emit_plot_data)?;
    println!(
        "wrote {} trials to {} (success rate {:.3}, {} timeouts)",
        trials,
        out.display(),
        stats.success_rate_overall,
        stats.timeout_count
    );
    Ok(())
}

fn run_single_trial(cfg: &ValidatedConfig, seed: u64, out: &Path) -> Result<(), Error> {
    let trial_seed = derive_trial_seed(seed, 0);
    let mut events: Vec<Event> = Vec::new();
    let outcome = run_trial_with_log(trial_seed, cfg, Some(&mut events))?;
    fs::create_dir_all(out)?;
    let mut outcome_json = serde_json::to_string_pretty(&outcome).expect("outcome serialize");
    outcome_json.push('\n');
    fs::write(out.join("trial.json"), outcome_json)?;
    let mut log = String::new();
    for e in &events {
        log.push_str(&serde_json::to_string(e).expect("event serialize"));
        log.push('\n');
    }
    fs::write(out.join("events.jsonl"), log)?;
    println!(
        "trial seed {}: success={} wait={:.2}s, {} events -> {}",
        trial_seed,
        outcome.success,
        outcome.wait_s,
        events.len(),
        out.display()
    );
    Ok(())
}

/// Parses `key=[v1,v2,...]` into the dotted key and its JSON value list.
fn parse_sweep_spec(spec: &str) -> Result<(String, Vec<serde_json::Value>), Error> {
    let (key, list) = spec.split_once('=').ok_or_else(|| {
        Error::DegenerateInput(format!(
            "sweep spec {spec:?} must look like key=[v1,v2,...]"
        ))
    })?;
    let values: Vec<serde_json::Value> = serde_json::from_str(list)?;
    if key.is_empty() || values.is_empty() {
        return Err(Error::DegenerateInput(
            "sweep spec needs a key and at least one value".into(),
        ));
    }
    Ok((key.to_string(), values))
}

/// Returns the base config with the dotted key replaced by `value`.
fn override_key(
    base: &ScenarioConfig,
    key: &str,
    value: &serde_json::Value,
) -> Result<ScenarioConfig, Error> {
    let mut tree = serde_json::to_value(base).expect("config serialize");
    let target = key.split('.').try_fold(&mut tree, |node, part| {
        node.as_object_mut()
            .ok_or_else(|| {
                Error::DegenerateInput(format!("config key {key:?}: {part:?} is not an object"))
            })?
            .get_mut(part)
            .ok_or_else(|| Error::DegenerateInput(format!("config key {key:?}: no field {part:?}")))
    })?;
    *target = value.clone();
    Ok(serde_json::from_value(tree)?)
}

fn run_sweep(
    base: &ValidatedConfig,
    spec: &str,
    trials: u64,
    seed: u64,
    out: &Path,
    format: FormatArg,
    emit_plot_data: bool,
) -> Result<(), Error> {
    let (key, values) = parse_sweep_spec(spec)?;
    for (i, value) in values.iter().enumerate() {
        let cfg = validate_config(override_key(base.as_inner(), &key, value)?)?;
        let sub = out.join(format!("sweep_{i}"));
        println!("sweep {key} = {value}:");
        run_one_batch(&cfg, trials, seed, &sub, format, emit_plot_data)?;
    }
    // A cross-batch summary: one aggregate per swept value already sits in
    // each subdirectory; record the mapping at the top level.
    let index: Vec<serde_json::Value> = values
        .iter()
        .enumerate()
        .map(|(i, v)| serde_json::json!({ "dir": format!("sweep_{i}"), "key": key, "value": v }))
        .collect();
    let mut body =
        serde_json::to_string_pretty(&serde_json::Value::Array(index)).expect("index serialize");
    body.push('\n');
    fs::write(out.join("sweep_index.json"), body)?;
    Ok(())
}

fn real_main(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            common,
            trials,
            format,
            emit_plot_data,
        } => {
            install_pool(common.jobs)?;
            let cfg = load_config(common.config.as_ref())?;
            run_one_batch(
                &cfg,
                trials,
                common.seed,
                &common.out,
                format,
                emit_plot_data,
            )
        }
        Command::Trial { common } => {
            let cfg = load_config(common.config.as_ref())?;
            run_single_trial(&cfg, common.seed, &common.out)
        }
        Command::Sweep {
            spec,
            common,
            trials,
            format,
            emit_plot_data,
        } => {
            install_pool(common.jobs)?;
            let cfg = load_config(common.config.as_ref())?;
            run_sweep(
                &cfg,
                &spec,
                trials,
                common.seed,
                &common.out,
                format,
                emit_plot_data,
            )
        }
    }
}

fn main() -> ExitCode {
    // Flag errors exit 1 with clap's usage text on stderr; --help and
    // --version print to stdout and exit 0.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
