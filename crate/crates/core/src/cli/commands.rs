use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analysis::{audit, InvariantReport};
use crate::error::Error;
use crate::params::DesignReport;
use crate::sim::{simulate, SimSummary, Trajectory};

use super::config::RunConfigFile;
use super::output::{self, SummaryFile, SweepRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_GEOMETRY: i32 = 2;
pub const EXIT_DELTA_BOUND: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;
pub const EXIT_BARRIER: i32 = 5;
pub const EXIT_IO: i32 = 6;

pub const THREADS_ENV: &str = "CIRCUMNAV_THREADS";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Geometry(_) => EXIT_GEOMETRY,
            Error::DeltaExceedsBound { .. } => EXIT_DELTA_BOUND,
            Error::BarrierBreach { .. } | Error::BarrierBreachAt { .. } => EXIT_BARRIER,
            _ => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn load_config(path: &Path) -> CliResult<RunConfigFile> {
    RunConfigFile::from_path(path).map_err(CliError::io)
}

/// Everything one simulate call produces. The trajectory is already rounded
/// to its on-disk precision, so auditing the file later gives the same report.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub summary: SummaryFile,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.summary.audit.passed()
    }
}

pub fn design_report(cfg: &RunConfigFile) -> Result<DesignReport, Error> {
    let params = cfg.design_params()?;
    let eta0 = cfg.initial_eta(&params)?;
    DesignReport::new(&params, eta0, Some(&cfg.drive_or_default()))
}

pub fn run(cfg: &RunConfigFile) -> Result<RunOutcome, Error> {
    let sim_cfg = cfg.sim_config()?;
    let params = sim_cfg.params;
    let (raw, summary) = simulate(&sim_cfg)?;
    let trajectory = output::quantize(&raw);
    let w0 = cfg.initial_w0(&params);
    let report = audit(&trajectory, &params, w0);
    Ok(RunOutcome {
        trajectory,
        summary: SummaryFile {
            config: *cfg,
            design: design_report(cfg).ok(),
            summary,
            audit: report,
        },
    })
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))
}

pub fn cmd_design(config: &Path, stdout: &mut dyn Write) -> CliResult<i32> {
    let cfg = load_config(config)?;
    let report = design_report(&cfg)?;
    stdout
        .write_all(to_json(&report).as_bytes())
        .map_err(|e| CliError::io(e.to_string()))?;
    Ok(EXIT_OK)
}

pub fn write_bundle(outcome: &RunOutcome, out_dir: &Path) -> CliResult<()> {
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut csv = Vec::new();
    output::write_trajectory(&outcome.trajectory.samples, &mut csv)
        .map_err(|e| CliError::io(e.to_string()))?;
    write_file(&out_dir.join("trajectory.csv"), &csv)?;
    write_file(&out_dir.join("summary.json"), outcome.summary.to_json().as_bytes())
}

fn summary_line(s: &SimSummary, audit: &InvariantReport) -> String {
    format!(
        "entries={} min_range={} converged={} audit={}\n",
        s.entry_count,
        output::format_sig(s.min_range),
        s.converged,
        if audit.passed() { "pass" } else { "fail" }
    )
}

pub fn cmd_simulate(config: &Path, out_dir: &Path, stdout: &mut dyn Write) -> CliResult<i32> {
    let cfg = load_config(config)?;
    let outcome = run(&cfg)?;
    write_bundle(&outcome, out_dir)?;
    let line = summary_line(&outcome.summary.summary, &outcome.summary.audit);
    stdout.write_all(line.as_bytes()).map_err(|e| CliError::io(e.to_string()))?;
    Ok(if outcome.passed() { EXIT_OK } else { EXIT_INVARIANT })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    Kappa,
    #[value(name = "theta0_deg")]
    Theta0Deg,
}

impl SweepParam {
    pub fn column(self) -> &'static str {
        match self {
            SweepParam::Kappa => "kappa",
            SweepParam::Theta0Deg => "theta0_deg",
        }
    }

    fn apply(self, base: &RunConfigFile, value: f64) -> RunConfigFile {
        let mut cfg = *base;
        match self {
            SweepParam::Kappa => cfg.kappa = value,
            SweepParam::Theta0Deg => cfg.initial.theta0_deg = value,
        }
        cfg
    }
}

fn sweep_row(value: f64, cfg: &RunConfigFile) -> SweepRow {
    match run(cfg) {
        Ok(o) => SweepRow {
            value,
            entry_count: Some(o.summary.summary.entry_count),
            min_range: Some(o.summary.summary.min_range),
            convergence_time: o.summary.summary.convergence_time,
            safety_violated: Some(o.summary.summary.safety_violated),
            audit_passed: Some(o.passed()),
            error: None,
        },
        Err(e) => SweepRow {
            value,
            entry_count: None,
            min_range: None,
            convergence_time: None,
            safety_violated: None,
            audit_passed: None,
            error: Some(e.to_string()),
        },
    }
}

fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Runs one simulation per value, concurrently; rows keep the input order.
pub fn sweep(base: &RunConfigFile, param: SweepParam, values: &[f64]) -> CliResult<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(CliError::usage("sweep needs at least one value"));
    }
    // surface bad base geometry once instead of on every row
    base.design_params()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        values
            .par_iter()
            .map(|&v| sweep_row(v, &param.apply(base, v)))
            .collect()
    }))
}

pub fn cmd_sweep(
    config: &Path,
    param: SweepParam,
    values: &[f64],
    out_dir: Option<&Path>,
    stdout: &mut dyn Write,
) -> CliResult<i32> {
    let cfg = load_config(config)?;
    let rows = sweep(&cfg, param, values)?;
    let mut csv = Vec::new();
    output::write_sweep(param.column(), &rows, &mut csv).map_err(|e| CliError::io(e.to_string()))?;
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
            write_file(&dir.join("sweep.csv"), &csv)?;
        }
        None => stdout.write_all(&csv).map_err(|e| CliError::io(e.to_string()))?,
    }
    Ok(EXIT_OK)
}

/// Where `verify` finds its inputs.
#[derive(Debug, Clone)]
pub struct VerifyInputs {
    pub trajectory: PathBuf,
    /// A run config or a `summary.json`; defaults to the `summary.json` next
    /// to the trajectory.
    pub config: Option<PathBuf>,
}

impl VerifyInputs {
    pub fn from_out_dir(dir: &Path) -> Self {
        Self {
            trajectory: dir.join("trajectory.csv"),
            config: Some(dir.join("summary.json")),
        }
    }
}

fn config_snapshot(path: &Path) -> CliResult<RunConfigFile> {
    let text = read_file(path)?;
    if let Ok(summary) = SummaryFile::from_json(&text) {
        return Ok(summary.config);
    }
    RunConfigFile::from_json(&text)
        .map_err(|e| CliError::io(format!("{} holds neither a summary nor a config: {e}", path.display())))
}

pub fn verify(inputs: &VerifyInputs) -> CliResult<InvariantReport> {
    let config_path = inputs.config.clone().unwrap_or_else(|| {
        inputs
            .trajectory
            .parent()
            .unwrap_or(Path::new("."))
            .join("summary.json")
    });
    let cfg = config_snapshot(&config_path)?;
    let sim_cfg = cfg.sim_config()?;
    let file = fs::File::open(&inputs.trajectory)
        .map_err(|e| CliError::io(format!("cannot open {}: {e}", inputs.trajectory.display())))?;
    let trajectory = output::read_trajectory(file, &sim_cfg)
        .map_err(|e| CliError::io(format!("{}: {e}", inputs.trajectory.display())))?;
    Ok(audit(&trajectory, &sim_cfg.params, cfg.initial_w0(&sim_cfg.params)))
}

pub fn cmd_verify(inputs: &VerifyInputs, stdout: &mut dyn Write) -> CliResult<i32> {
    let report = verify(inputs)?;
    stdout
        .write_all(to_json(&report).as_bytes())
        .map_err(|e| CliError::io(e.to_string()))?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_INVARIANT })
}
