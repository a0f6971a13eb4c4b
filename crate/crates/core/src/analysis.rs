//! Local stability about the orbit and post-hoc audits of recorded runs.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::controller::{eta_tight_bound, omega_bound};
use crate::params::{min_safe_bearing, DesignParams};
use crate::sim::{recorded_entries, Trajectory, ENTRY_BEARING_TOL, ETA_MONOTONE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingRegime {
    Underdamped,
    CriticalOrOverdamped,
}

/// Jacobian of `(ṙ, θ̇)` at `(r_d, π/2)` and its eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizationResult {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    /// `(−κ + √D)/(2δ²)` first, `(−κ − √D)/(2δ²)` second, with
    /// `D = κ² − 4k²V²δ⁴`.
    pub eigenvalues: [Complex64; 2],
    pub regime: DampingRegime,
}

pub fn linearize(params: &DesignParams) -> LinearizationResult {
    let (k, v, d2, kappa) = (params.k, params.speed, params.delta * params.delta, params.kappa);
    // characteristic polynomial λ² + (κ/δ²)λ + k²V² scaled by δ⁴
    let stiff = 4.0 * k * k * v * v * d2 * d2;
    let mut disc = kappa * kappa - stiff;
    // treat a rounding-level discriminant as the critical case
    if disc.abs() <= 1e-12 * (kappa * kappa + stiff) {
        disc = 0.0;
    }
    let root = Complex64::new(disc, 0.0).sqrt();
    let minus_kappa = Complex64::new(-kappa, 0.0);
    LinearizationResult {
        a11: 0.0,
        a12: v,
        a21: -k * k * v,
        a22: -kappa / d2,
        eigenvalues: [(minus_kappa + root) / (2.0 * d2), (minus_kappa - root) / (2.0 * d2)],
        regime: if disc < 0.0 {
            DampingRegime::Underdamped
        } else {
            DampingRegime::CriticalOrOverdamped
        },
    }
}

/// Slowest decay rate near the orbit: `min(−Re λ)`.
pub fn local_convergence_rate(result: &LinearizationResult) -> f64 {
    result
        .eigenvalues
        .iter()
        .map(|l| -l.re)
        .fold(f64::INFINITY, f64::min)
}

/// Absolute slack on the bound checks; covers rounding of values stored at
/// nine significant digits.
pub const AUDIT_SLACK: f64 = 1e-9;
/// Margin kept from the endpoints of `(0, π)` in the bearing check (rad).
pub const THETA_RANGE_TOL: f64 = 1e-6;
/// Allowed distance of the final turn rate from `−V/r_d` (rad/s).
pub const STEADY_OMEGA_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    /// Smallest margin observed; negative means violated.
    pub worst_margin: Option<f64>,
    pub worst_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub checks: Vec<CheckResult>,
}

impl InvariantReport {
    /// True when no check failed (not-applicable checks do not count).
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const CHECK_NAMES: [&str; 8] = [
    "barrier",
    "eta_monotone",
    "eta_tight_bound",
    "theta_range",
    "omega_bound",
    "entry_bearing",
    "safety",
    "steady_state_omega",
];

/// Tracks the minimum margin over a scan.
struct Worst {
    margin: Option<f64>,
    time: Option<f64>,
}

impl Worst {
    fn new() -> Self {
        Self { margin: None, time: None }
    }

    fn observe(&mut self, margin: f64, t: f64) {
        if self.margin.is_none_or(|m| margin < m) {
            self.margin = Some(margin);
            self.time = Some(t);
        }
    }

    fn finish(self, name: &str) -> CheckResult {
        let status = match self.margin {
            Some(m) if m < 0.0 => CheckStatus::Fail,
            _ => CheckStatus::Pass,
        };
        CheckResult {
            name: name.to_string(),
            status,
            worst_margin: self.margin,
            worst_time: self.time,
        }
    }
}

fn not_applicable(name: &str) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        status: CheckStatus::NotApplicable,
        worst_margin: None,
        worst_time: None,
    }
}

/// Evaluates every invariant over the recorded samples. `w0` is the barrier
/// value at the start; checks that need it are not applicable without it.
/// For the baseline law only the safety check applies.
pub fn audit(trajectory: &Trajectory, params: &DesignParams, w0: Option<f64>) -> InvariantReport {
    let samples = &trajectory.samples;
    let blf = trajectory.config.mode.is_blf();
    let radii = params.radii;
    let mut checks = Vec::with_capacity(CHECK_NAMES.len());

    // barrier: eta < delta
    if blf {
        let mut w = Worst::new();
        for s in samples {
            if let Some(e) = s.eta {
                w.observe(params.delta - e, s.t);
            }
        }
        let mut res = w.finish("barrier");
        if res.worst_margin == Some(0.0) {
            res.status = CheckStatus::Fail;
        }
        checks.push(res);
    } else {
        checks.push(not_applicable("barrier"));
    }

    // eta non-increasing between adjacent samples outside the auxiliary circle
    if blf {
        let mut w = Worst::new();
        for pair in samples.windows(2) {
            if let (Some(a), Some(b)) = (pair[0].eta, pair[1].eta) {
                w.observe(ETA_MONOTONE_TOL * a.abs().max(1.0) - (b - a), pair[1].t);
            }
        }
        checks.push(w.finish("eta_monotone"));
    } else {
        checks.push(not_applicable("eta_monotone"));
    }

    match (blf, w0) {
        (true, Some(w0)) => {
            let bound = eta_tight_bound(params.delta, w0);
            let mut w = Worst::new();
            for s in samples {
                if let Some(e) = s.eta {
                    w.observe(bound + AUDIT_SLACK - e, s.t);
                }
            }
            checks.push(w.finish("eta_tight_bound"));
        }
        _ => checks.push(not_applicable("eta_tight_bound")),
    }

    if blf {
        let mut w = Worst::new();
        let (lo, hi) = (THETA_RANGE_TOL, PI - THETA_RANGE_TOL);
        for s in samples {
            w.observe((s.theta - lo).min(hi - s.theta), s.t);
        }
        checks.push(w.finish("theta_range"));
    } else {
        checks.push(not_applicable("theta_range"));
    }

    match (blf, w0) {
        (true, Some(w0)) => {
            let bound = omega_bound(params, w0);
            let mut w = Worst::new();
            for s in samples {
                w.observe(bound + AUDIT_SLACK - s.omega.abs(), s.t);
            }
            checks.push(w.finish("omega_bound"));
        }
        _ => checks.push(not_applicable("omega_bound")),
    }

    if blf {
        let floor = (min_safe_bearing(&radii) - ENTRY_BEARING_TOL).sin();
        let mut w = Worst::new();
        for (t, theta) in recorded_entries(samples, radii.auxiliary()) {
            w.observe(theta.sin() - floor, t);
        }
        checks.push(w.finish("entry_bearing"));
    } else {
        checks.push(not_applicable("entry_bearing"));
    }

    {
        let mut w = Worst::new();
        for s in samples {
            w.observe(s.r - radii.safety(), s.t);
        }
        checks.push(w.finish("safety"));
    }

    match samples.last() {
        Some(last) if blf => {
            let target = -params.speed / radii.desired();
            let mut w = Worst::new();
            w.observe(STEADY_OMEGA_TOL - (last.omega - target).abs(), last.t);
            checks.push(w.finish("steady_state_omega"));
        }
        _ => checks.push(not_applicable("steady_state_omega")),
    }

    InvariantReport { checks }
}
