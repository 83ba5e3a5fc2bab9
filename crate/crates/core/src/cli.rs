//! `cat-sched` command line: `gen-trace`, `simulate`, `train`, `report`.
//!
//! Set `CAT_SCHED_LOG` (e.g. `CAT_SCHED_LOG=debug`) for diagnostics.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::metric::Indicator;
use crate::predictor::{cross_validate, read_dataset_file, save_model, EvalMetrics, Learner};
use crate::report::{
    binned_correlation, default_bin_width, dmr_table, parse_transfer_log, summarize, write_binned_csv,
    write_dmr_csv, write_summary_csv, write_transfer_log,
};
use crate::sim::{sweep_with_jobs, RunReport, DEFAULT_DEADLINES};
use crate::trace::{generate_synthetic_trace, write_trace_csv, ProfileKind, TrackProfile};

pub const LOG_ENV: &str = "CAT_SCHED_LOG";

#[derive(Debug, Parser)]
#[command(name = "cat-sched", version, about = "Channel-aware transmission scheduling toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic channel trace CSV.
    GenTrace {
        #[arg(long, default_value = "suburban", value_parser = parse_profile)]
        profile: ProfileKind,
        /// Trace length in seconds.
        #[arg(long, value_parser = positive)]
        duration: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Sample period in seconds.
        #[arg(long, default_value_t = 1.0, value_parser = positive)]
        period: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the simulation sweep described by a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override evaluation.base_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override evaluation.out_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Cross-validate a rate predictor and optionally save a model trained
    /// on the whole dataset.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "model_tree", value_parser = parse_learner)]
        learner: Learner,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-aggregate transfer logs into summary artifacts.
    Report {
        #[arg(required = false)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "report")]
        name: String,
    },
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be a positive number, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_profile(s: &str) -> std::result::Result<ProfileKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_learner(s: &str) -> std::result::Result<Learner, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter(LOG_ENV)).try_init();
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return 0;
            }
            if !e.to_string().contains("Usage:") {
                eprintln!("\n{}", usage_for(&args));
            }
            return 2;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Usage line of the subcommand named in `args`, or of the whole program.
fn usage_for(args: &[OsString]) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let sub = args
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .find(|a| cmd.find_subcommand(a).is_some())
        .map(str::to_owned);
    match sub.and_then(|name| cmd.find_subcommand_mut(&name).map(|c| c.render_usage())) {
        Some(usage) => usage.to_string(),
        None => cmd.render_usage().to_string(),
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::GenTrace {
            profile,
            duration,
            seed,
            period,
            out,
        } => cmd_gen_trace(profile, duration, period, seed, &out),
        Command::Simulate { config, seed, out, jobs } => {
            let files = cmd_simulate(&config, seed, out.as_deref(), jobs)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Train {
            dataset,
            learner,
            folds,
            seed,
            out,
        } => {
            let metrics = cmd_train(&dataset, &learner, folds, seed, out.as_deref())?;
            let name = match learner {
                Learner::ModelTree(_) => "model_tree",
                Learner::Linear => "linear",
            };
            println!("{name} {folds}-fold cross validation: {metrics}");
            if let Some(out) = out {
                println!("wrote {}", out.display());
            }
            Ok(())
        }
        Command::Report { logs, out, name } => {
            for f in cmd_report(&logs, &out, &name)? {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::from(e).in_file(path))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::from(e).in_file(path))
}

pub fn cmd_gen_trace(profile: ProfileKind, duration: f64, period: f64, seed: u64, out: &Path) -> Result<()> {
    let trace = generate_synthetic_trace(&TrackProfile::from_kind(profile), duration, period, seed)?;
    let mut w = create(out)?;
    write_trace_csv(&trace, &mut w).map_err(|e| e.in_file(out))?;
    finish(w, out)
}

/// Runs the configured sweep and writes the summary, DMR table, binned
/// series and transfer log. Returns the written paths.
pub fn cmd_simulate(config_path: &Path, seed: Option<u64>, out: Option<&Path>, jobs: usize) -> Result<Vec<PathBuf>> {
    let mut config = ExperimentConfig::load(config_path)?;
    if let Some(seed) = seed {
        config.evaluation.base_seed = seed;
    }
    let base_dir = config_path.parent().unwrap_or(Path::new("."));
    let out_dir = match out {
        Some(dir) => dir.to_path_buf(),
        None => base_dir.join(&config.evaluation.out_dir),
    };
    let policies = config.build_policies(base_dir)?;
    let traces = config.build_traces(base_dir)?;
    log::info!(
        "simulating {} policies on {} traces, {} runs each",
        policies.len(),
        traces.len(),
        config.evaluation.runs_per_pair
    );
    let reports = sweep_with_jobs(
        &policies,
        &config.sensor(),
        &traces,
        config.evaluation.runs_per_pair,
        config.evaluation.base_seed,
        jobs.max(1),
    )?;
    write_artifacts(
        &reports,
        &config.evaluation.deadlines_s,
        &config.evaluation.binned_indicators,
        &out_dir,
        &config.name,
        true,
    )
}

/// Writes `<name>_summary.csv`, `<name>_dmr.csv`, one
/// `<name>_binned_<indicator>.csv` per indicator and, if `with_log`,
/// `<name>_transfers.csv`.
pub fn write_artifacts(
    reports: &[RunReport],
    deadlines: &[f64],
    indicators: &[Indicator],
    out_dir: &Path,
    name: &str,
    with_log: bool,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let path = out_dir.join(format!("{name}_summary.csv"));
    let mut w = create(&path)?;
    write_summary_csv(&summarize(reports), &mut w)?;
    finish(w, &path)?;
    written.push(path);

    let path = out_dir.join(format!("{name}_dmr.csv"));
    let mut w = create(&path)?;
    write_dmr_csv(&dmr_table(reports, deadlines)?, &mut w)?;
    finish(w, &path)?;
    written.push(path);

    let records: Vec<_> = reports.iter().flat_map(|r| &r.records).collect();
    for &indicator in indicators {
        let series = binned_correlation(records.iter().copied(), indicator, default_bin_width(indicator))?;
        let path = out_dir.join(format!("{name}_binned_{}.csv", indicator.as_str()));
        let mut w = create(&path)?;
        write_binned_csv(&series, &mut w)?;
        finish(w, &path)?;
        written.push(path);
    }

    if with_log {
        let path = out_dir.join(format!("{name}_transfers.csv"));
        let mut w = create(&path)?;
        write_transfer_log(reports, &mut w)?;
        finish(w, &path)?;
        written.push(path);
    }
    Ok(written)
}

/// Cross-validates `learner` with `k` folds; with `model_out`, also trains
/// on the full dataset and saves the model.
pub fn cmd_train(dataset: &Path, learner: &Learner, k: usize, seed: u64, model_out: Option<&Path>) -> Result<EvalMetrics> {
    let data = read_dataset_file(dataset)?;
    let metrics = cross_validate(&data, k, learner, seed)?;
    if let Some(out) = model_out {
        let model = learner.train(&data)?;
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir))?;
        }
        save_model(&model, out)?;
    }
    Ok(metrics)
}

pub fn cmd_report(logs: &[PathBuf], out_dir: &Path, name: &str) -> Result<Vec<PathBuf>> {
    if logs.is_empty() {
        return Err(Error::InvalidArgument("report needs at least one transfer log".into()));
    }
    let mut reports = Vec::new();
    for path in logs {
        let file = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
        let parsed = parse_transfer_log(std::io::BufReader::new(file)).map_err(|e| e.in_file(path))?;
        reports.extend(parsed);
    }
    let indicators = [
        Indicator::Rsrp,
        Indicator::Rsrq,
        Indicator::Snr,
        Indicator::Cqi,
        Indicator::Payload,
    ];
    write_artifacts(&reports, &DEFAULT_DEADLINES, &indicators, out_dir, name, false)
}
