//! Trajectory CSV, summary JSON and sweep CSV.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::analysis::InvariantReport;
use crate::params::DesignReport;
use crate::sim::{Sample, SimConfig, SimSummary, Trajectory};

use super::config::RunConfigFile;

pub const TRAJECTORY_HEADER: [&str; 10] = [
    "t", "x", "y", "psi", "r", "theta", "omega", "eta", "W", "inside_Ca",
];

pub const SIGNIFICANT_DIGITS: usize = 9;

/// `%.9g`: nine significant digits, trailing zeros dropped, scientific
/// notation outside `1e-4 <= |v| < 1e9`.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn quantize_value(v: f64) -> f64 {
    format_sig(v).parse().expect("formatted float parses")
}

/// The trajectory as it reads back from its CSV file.
pub fn quantize(trajectory: &Trajectory) -> Trajectory {
    let samples = trajectory
        .samples
        .iter()
        .map(|s| Sample {
            t: quantize_value(s.t),
            x: quantize_value(s.x),
            y: quantize_value(s.y),
            psi: quantize_value(s.psi),
            r: quantize_value(s.r),
            theta: quantize_value(s.theta),
            omega: quantize_value(s.omega),
            eta: s.eta.map(quantize_value),
            w: s.w.map(quantize_value),
            inside_ca: s.inside_ca,
        })
        .collect();
    Trajectory {
        config: trajectory.config,
        samples,
    }
}

pub fn write_trajectory<W: Write>(samples: &[Sample], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    let opt = |v: Option<f64>| v.map(format_sig).unwrap_or_default();
    for s in samples {
        w.write_record([
            format_sig(s.t),
            format_sig(s.x),
            format_sig(s.y),
            format_sig(s.psi),
            format_sig(s.r),
            format_sig(s.theta),
            format_sig(s.omega),
            opt(s.eta),
            opt(s.w),
            if s.inside_ca { "1" } else { "0" }.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum TrajectoryReadError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("unexpected header {found:?}")]
    Header { found: Vec<String> },
    #[error("line {line}: column {column}: cannot parse {value:?}")]
    Field {
        line: u64,
        column: &'static str,
        value: String,
    },
    #[error("line {line}: time {t} does not increase")]
    NonIncreasingTime { line: u64, t: f64 },
    #[error("no samples")]
    Empty,
    #[error("truncated: last sample at t = {last} but the run ends at t = {expected}")]
    Truncated { last: f64, expected: f64 },
}

fn parse_num(field: &str, line: u64, column: &'static str) -> Result<f64, TrajectoryReadError> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| TrajectoryReadError::Field {
            line,
            column,
            value: field.to_string(),
        })
}

fn parse_opt(field: &str, line: u64, column: &'static str) -> Result<Option<f64>, TrajectoryReadError> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_num(field, line, column).map(Some)
    }
}

/// Parses a trajectory file written for `config`. Rejects files whose last
/// sample stops short of `t_final`.
pub fn read_trajectory<R: Read>(input: R, config: &SimConfig) -> Result<Trajectory, TrajectoryReadError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(TRAJECTORY_HEADER.iter().copied()) {
        return Err(TrajectoryReadError::Header {
            found: header.iter().map(str::to_string).collect(),
        });
    }
    let mut samples: Vec<Sample> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let f = |i: usize| parse_num(&rec[i], line, TRAJECTORY_HEADER[i]);
        let inside_ca = match &rec[9] {
            "0" => false,
            "1" => true,
            other => {
                return Err(TrajectoryReadError::Field {
                    line,
                    column: "inside_Ca",
                    value: other.to_string(),
                })
            }
        };
        let s = Sample {
            t: f(0)?,
            x: f(1)?,
            y: f(2)?,
            psi: f(3)?,
            r: f(4)?,
            theta: f(5)?,
            omega: f(6)?,
            eta: parse_opt(&rec[7], line, "eta")?,
            w: parse_opt(&rec[8], line, "W")?,
            inside_ca,
        };
        if samples.last().is_some_and(|p| s.t <= p.t) {
            return Err(TrajectoryReadError::NonIncreasingTime { line, t: s.t });
        }
        samples.push(s);
    }
    let last = samples.last().ok_or(TrajectoryReadError::Empty)?.t;
    let expected = quantize_value(config.steps() as f64 * config.dt);
    if last != expected {
        return Err(TrajectoryReadError::Truncated { last, expected });
    }
    Ok(Trajectory {
        config: *config,
        samples,
    })
}

/// Contents of `summary.json`. `design` is absent when the start has no
/// barrier value (starts outside the admissible set).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryFile {
    pub config: RunConfigFile,
    pub design: Option<DesignReport>,
    pub summary: SimSummary,
    pub audit: InvariantReport,
}

impl SummaryFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// One sweep row; `error` is set instead of the metrics when the run failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub entry_count: Option<usize>,
    pub min_range: Option<f64>,
    pub convergence_time: Option<f64>,
    pub safety_violated: Option<bool>,
    pub audit_passed: Option<bool>,
    pub error: Option<String>,
}

pub fn write_sweep<W: Write>(param: &str, rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        param,
        "entry_count",
        "min_range",
        "convergence_time",
        "safety_violated",
        "audit_passed",
        "error",
    ])?;
    let num = |v: Option<f64>| v.map(format_sig).unwrap_or_default();
    let flag = |v: Option<bool>| v.map(|b| b.to_string()).unwrap_or_default();
    for row in rows {
        w.write_record([
            format_sig(row.value),
            row.entry_count.map(|c| c.to_string()).unwrap_or_default(),
            num(row.min_range),
            num(row.convergence_time),
            flag(row.safety_violated),
            flag(row.audit_passed),
            row.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
