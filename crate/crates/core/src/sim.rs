//! Fixed-step closed-loop simulator.
//!
//! The Cartesian kinematics are the ground truth; range and bearing are
//! derived from the pose at every step and handed to the controller. The
//! turn rate is held constant across each RK4 step (zero-order hold), so the
//! switch at the auxiliary circle takes effect at step boundaries.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::controller::{self, ControllerMode, ControllerState};
use crate::dynamics::{self, polar_from_cartesian, Pose, PolarState, TargetPosition};
use crate::error::{Error, Result};
use crate::params::{min_safe_bearing, DesignParams, RadiiTriple};

/// Relative range error counted as converged.
pub const CONVERGED_RANGE_FRACTION: f64 = 0.01;
/// Bearing error counted as converged (rad).
pub const CONVERGED_BEARING_TOL: f64 = 1.0 * PI / 180.0;
/// Slack on `η` non-increase between consecutive samples, relative to `max(1, |η|)`.
pub const ETA_MONOTONE_TOL: f64 = 1e-6;
/// Slack on the entry bearing, absorbing the linear interpolation of the crossing.
pub const ENTRY_BEARING_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub x: f64,
    pub y: f64,
    /// Initial bearing relative to the line of sight (rad).
    pub theta0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub initial: InitialCondition,
    pub target: TargetPosition,
    pub params: DesignParams,
    pub mode: ControllerMode,
    pub dt: f64,
    pub t_final: f64,
    pub record_stride: usize,
    /// Permit starts outside the admissible set (baseline and failure-mode studies).
    pub allow_outside_theta: bool,
    /// Range rate reported by the estimator before it has two samples.
    pub initial_range_rate: f64,
}

impl SimConfig {
    /// 1 ms step, 120 s horizon, every 10th step recorded.
    pub fn new(initial: InitialCondition, params: DesignParams, mode: ControllerMode) -> Self {
        Self {
            initial,
            target: TargetPosition::ORIGIN,
            params,
            mode,
            dt: 1e-3,
            t_final: 120.0,
            record_stride: 10,
            allow_outside_theta: false,
            initial_range_rate: 0.0,
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn initial_pose(&self) -> Result<Pose> {
        Pose::from_bearing(
            self.initial.x,
            self.initial.y,
            self.initial.theta0,
            &self.target,
        )
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                value: self.dt,
                reason: "must be finite and positive",
            });
        }
        if !(self.t_final.is_finite() && self.t_final > self.dt) {
            return Err(Error::InvalidParameter {
                name: "t_final",
                value: self.t_final,
                reason: "must exceed dt",
            });
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter {
                name: "record_stride",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        let step_length = self.params.speed * self.dt;
        let limit = self.params.radii.auxiliary() / 100.0;
        if step_length > limit {
            return Err(Error::StepTooCoarse { step_length, limit });
        }
        if !(self.initial_range_rate.abs() <= self.params.speed) {
            return Err(Error::RangeRateExceedsSpeed {
                rdot: self.initial_range_rate,
                speed: self.params.speed,
            });
        }
        Ok(())
    }
}

/// Checks the start against the admissible set `r ≥ r_a, θ ∈ (0, π), η < δ`
/// and rejects starts inside the auxiliary circle aimed into the safety circle.
pub fn check_initial_state(polar: &PolarState, params: &DesignParams, allow_outside: bool) -> Result<()> {
    let r_a = params.radii.auxiliary();
    let r_s = params.radii.safety();
    let (r, theta) = (polar.r, polar.theta);
    if r < r_a {
        let doomed = r <= r_s || {
            let cone = (r_s / r).asin();
            theta < cone || theta > TAU - cone
        };
        if doomed {
            return Err(Error::DoomedStart { r, theta });
        }
    }
    if allow_outside {
        return Ok(());
    }
    let eta = if r >= r_a {
        controller::eta(r, theta, &params)?
    } else {
        f64::INFINITY
    };
    if !(r >= r_a && theta > 0.0 && theta < PI && eta < params.delta) {
        return Err(Error::OutsideAdmissibleSet {
            r,
            theta,
            eta,
            delta: params.delta,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub r: f64,
    pub theta: f64,
    /// Turn rate commanded from this sample and held over the next step.
    pub omega: f64,
    /// Absent inside the auxiliary circle and for the baseline law.
    pub eta: Option<f64>,
    pub w: Option<f64>,
    pub inside_ca: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub config: SimConfig,
    pub samples: Vec<Sample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    Entry,
    Exit,
}

/// Auxiliary-circle crossing inside one step; `fraction` locates it in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub kind: CrossingKind,
    pub fraction: f64,
}

/// Entry iff `prev_r ≥ r_a > next_r`, exit iff `prev_r < r_a ≤ next_r`; the
/// crossing is placed by linear interpolation of `r − r_a`.
pub fn detect_events(prev_r: f64, next_r: f64, r_a: f64) -> Option<Crossing> {
    let kind = if prev_r >= r_a && next_r < r_a {
        CrossingKind::Entry
    } else if prev_r < r_a && next_r >= r_a {
        CrossingKind::Exit
    } else {
        return None;
    };
    let fraction = ((prev_r - r_a) / (prev_r - next_r)).clamp(0.0, 1.0);
    Some(Crossing { kind, fraction })
}

/// Signed angular difference `b − a` in `(−π, π]`.
fn angle_delta(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

fn interpolate_angle(a: f64, b: f64, fraction: f64) -> f64 {
    dynamics::wrap_angle(a + fraction * angle_delta(a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryInterval {
    pub t_entry: f64,
    /// Absent if the run ends inside the auxiliary circle.
    pub t_exit: Option<f64>,
    pub entry_bearing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub entry_count: usize,
    pub entry_intervals: Vec<EntryInterval>,
    pub min_range: f64,
    pub min_range_time: f64,
    pub safety_violated: bool,
    pub converged: bool,
    /// First time after which range and bearing stay within tolerance of the orbit.
    pub convergence_time: Option<f64>,
    pub final_omega: f64,
    pub max_abs_omega: f64,
    pub eta_monotone_outside_ca: bool,
}

fn rk4_step(pose: &Pose, speed: f64, omega: f64, dt: f64) -> Pose {
    let f = |p: &Pose| dynamics::cartesian_derivatives(p, speed, omega);
    let shift = |p: &Pose, d: (f64, f64, f64), h: f64| Pose {
        x: p.x + h * d.0,
        y: p.y + h * d.1,
        psi: p.psi + h * d.2,
    };
    let k1 = f(pose);
    let k2 = f(&shift(pose, k1, 0.5 * dt));
    let k3 = f(&shift(pose, k2, 0.5 * dt));
    let k4 = f(&shift(pose, k3, dt));
    let h = dt / 6.0;
    Pose::new(
        pose.x + h * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        pose.y + h * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        pose.psi + h * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2),
    )
}

fn is_converged(polar: &PolarState, radii: &RadiiTriple) -> bool {
    (polar.r - radii.desired()).abs() < CONVERGED_RANGE_FRACTION * radii.desired()
        && (polar.theta - FRAC_PI_2).abs() < CONVERGED_BEARING_TOL
}

/// Runs the closed loop. Identical configurations give bit-identical output.
pub fn simulate(config: &SimConfig) -> Result<(Trajectory, SimSummary)> {
    config.validate()?;
    let params = config.params;
    let radii = params.radii;
    let r_a = radii.auxiliary();
    let dt = config.dt;
    let n_steps = config.steps();

    let mut pose = config.initial_pose()?;
    let mut polar = polar_from_cartesian(&pose, &config.target)?;
    check_initial_state(&polar, &params, config.allow_outside_theta)?;
    let mut ctl = ControllerState::new(config.mode, params, &polar, config.initial_range_rate);

    let mut samples = Vec::with_capacity(n_steps / config.record_stride + 2);
    let mut intervals: Vec<EntryInterval> = Vec::new();
    let mut min_range = polar.r;
    let mut min_range_time = 0.0;
    let mut max_abs_omega: f64 = 0.0;
    let mut prev_eta: Option<f64> = None;
    let mut eta_monotone = true;
    let mut last_unconverged: Option<usize> = None;
    let mut force_record = false;
    let mut final_omega = 0.0;

    for i in 0..=n_steps {
        let t = i as f64 * dt;
        let omega = ctl.command(&polar, dt).map_err(|e| match e {
            Error::BarrierBreach { eta, delta } => Error::BarrierBreachAt { t, eta, delta },
            other => other,
        })?;
        let sample = make_sample(t, &pose, &polar, omega, &params, config.mode);

        if polar.r < min_range {
            min_range = polar.r;
            min_range_time = t;
        }
        max_abs_omega = max_abs_omega.max(omega.abs());
        if !is_converged(&polar, &radii) {
            last_unconverged = Some(i);
        }
        match sample.eta {
            Some(e) => {
                if let Some(p) = prev_eta {
                    if e > p + ETA_MONOTONE_TOL * p.abs().max(1.0) {
                        eta_monotone = false;
                    }
                }
                prev_eta = Some(e);
            }
            None => prev_eta = None,
        }

        if i == n_steps {
            final_omega = omega;
            samples.push(sample);
            break;
        }

        let next_pose = rk4_step(&pose, params.speed, omega, dt);
        if !(next_pose.x.is_finite() && next_pose.y.is_finite() && next_pose.psi.is_finite()) {
            return Err(Error::NonFiniteState { t: t + dt });
        }
        let next_polar = polar_from_cartesian(&next_pose, &config.target)?;

        let crossing = detect_events(polar.r, next_polar.r, r_a);
        if i % config.record_stride == 0 || force_record || crossing.is_some() {
            samples.push(sample);
        }
        force_record = crossing.is_some();
        if let Some(c) = crossing {
            let t_cross = t + c.fraction * dt;
            match c.kind {
                CrossingKind::Entry => intervals.push(EntryInterval {
                    t_entry: t_cross,
                    t_exit: None,
                    entry_bearing: interpolate_angle(polar.theta, next_polar.theta, c.fraction),
                }),
                CrossingKind::Exit => {
                    if let Some(open) = intervals.last_mut().filter(|iv| iv.t_exit.is_none()) {
                        open.t_exit = Some(t_cross);
                    }
                }
            }
        }

        pose = next_pose;
        polar = next_polar;
    }

    let converged = last_unconverged != Some(n_steps);
    let convergence_time = converged.then(|| last_unconverged.map_or(0.0, |i| (i + 1) as f64 * dt));
    let summary = SimSummary {
        entry_count: intervals.len(),
        entry_intervals: intervals,
        min_range,
        min_range_time,
        safety_violated: min_range < radii.safety(),
        converged,
        convergence_time,
        final_omega,
        max_abs_omega,
        eta_monotone_outside_ca: eta_monotone,
    };
    Ok((
        Trajectory {
            config: *config,
            samples,
        },
        summary,
    ))
}

fn make_sample(
    t: f64,
    pose: &Pose,
    polar: &PolarState,
    omega: f64,
    params: &DesignParams,
    mode: ControllerMode,
) -> Sample {
    let inside_ca = polar.r < params.radii.auxiliary();
    let eta = if inside_ca || !mode.is_blf() {
        None
    } else {
        controller::eta(polar.r, polar.theta, params).ok()
    };
    let w = eta.and_then(|e| controller::blf_value(e, params.delta).ok());
    Sample {
        t,
        x: pose.x,
        y: pose.y,
        psi: pose.psi,
        r: polar.r,
        theta: polar.theta,
        omega,
        eta,
        w,
        inside_ca,
    }
}

/// Bearings at which the recorded trajectory crosses into the auxiliary circle.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryBearingCheck {
    pub ok: bool,
    pub bearings: Vec<f64>,
    /// `(time, bearing)` of entries below the safe bearing.
    pub violations: Vec<(f64, f64)>,
}

/// Every entry bearing must lie within `ENTRY_BEARING_TOL` of
/// `[asin(r_s/r_a), π − asin(r_s/r_a)]`; that keeps the straight chord
/// outside the safety circle.
pub fn entry_bearing_check(trajectory: &Trajectory, radii: &RadiiTriple) -> EntryBearingCheck {
    let floor = (min_safe_bearing(radii) - ENTRY_BEARING_TOL).sin();
    let entries = recorded_entries(&trajectory.samples, radii.auxiliary());
    let violations: Vec<(f64, f64)> = entries
        .iter()
        .copied()
        .filter(|(_, theta)| theta.sin() < floor)
        .collect();
    EntryBearingCheck {
        ok: violations.is_empty(),
        bearings: entries.into_iter().map(|(_, theta)| theta).collect(),
        violations,
    }
}

/// `(time, bearing)` of each recorded entry, interpolated across the
/// straddling sample pair.
pub fn recorded_entries(samples: &[Sample], r_a: f64) -> Vec<(f64, f64)> {
    samples
        .windows(2)
        .filter_map(|pair| {
            let (a, b) = (&pair[0], &pair[1]);
            detect_events(a.r, b.r, r_a)
                .filter(|c| c.kind == CrossingKind::Entry)
                .map(|c| {
                    (
                        a.t + c.fraction * (b.t - a.t),
                        interpolate_angle(a.theta, b.theta, c.fraction),
                    )
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{validate_radii, DeltaChoice};
    use approx::assert_abs_diff_eq;

    fn params(kappa: f64) -> DesignParams {
        DesignParams::new(
            validate_radii(1.0, 0.7, 0.4).unwrap(),
            0.6,
            DeltaChoice::Fixed(0.5),
            kappa,
        )
        .unwrap()
    }

    #[test]
    fn event_detection() {
        let c = detect_events(0.71, 0.69, 0.7).unwrap();
        assert_eq!(c.kind, CrossingKind::Entry);
        assert_abs_diff_eq!(c.fraction, 0.5, epsilon = 1e-12);
        assert_eq!(detect_events(0.69, 0.71, 0.7).unwrap().kind, CrossingKind::Exit);
        assert!(detect_events(0.71, 0.705, 0.7).is_none());
        assert!(detect_events(0.69, 0.695, 0.7).is_none());
        // touching r_a from above is not an entry
        assert!(detect_events(0.71, 0.7, 0.7).is_none());
    }

    #[test]
    fn angle_interpolation_across_wrap() {
        assert_abs_diff_eq!(interpolate_angle(TAU - 0.1, 0.1, 0.5), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(interpolate_angle(1.0, 1.2, 0.25), 1.05, epsilon = 1e-12);
    }

    #[test]
    fn config_validation() {
        let ic = InitialCondition { x: 1.0, y: 0.8, theta0: 38f64.to_radians() };
        let mut cfg = SimConfig::new(ic, params(0.05), ControllerMode::BlfState);
        cfg.dt = 0.02;
        assert!(matches!(simulate(&cfg), Err(Error::StepTooCoarse { .. })));
        cfg.dt = 1e-3;
        cfg.t_final = 5e-4;
        assert!(simulate(&cfg).is_err());
        cfg.t_final = 1.0;
        cfg.record_stride = 0;
        assert!(simulate(&cfg).is_err());
    }

    #[test]
    fn rejects_outside_admissible_set() {
        let ic = InitialCondition { x: 1.0, y: 0.8, theta0: 5f64.to_radians() };
        let mut cfg = SimConfig::new(ic, params(0.05), ControllerMode::BlfState);
        cfg.t_final = 1.0;
        assert!(matches!(simulate(&cfg), Err(Error::OutsideAdmissibleSet { .. })));
        // bearing in (pi, 2pi) is outside even with small eta-like geometry
        cfg.initial.theta0 = 1.5 * PI;
        assert!(matches!(simulate(&cfg), Err(Error::OutsideAdmissibleSet { .. })));
        cfg.initial.theta0 = 5f64.to_radians();
        cfg.mode = ControllerMode::Baseline;
        cfg.allow_outside_theta = true;
        assert!(simulate(&cfg).is_ok());
    }

    #[test]
    fn rejects_doomed_start() {
        // r = 0.6 inside C_a, heading straight at the target
        let ic = InitialCondition { x: 0.6, y: 0.0, theta0: 0.05 };
        let mut cfg = SimConfig::new(ic, params(0.05), ControllerMode::BlfState);
        cfg.allow_outside_theta = true;
        cfg.t_final = 1.0;
        assert!(matches!(simulate(&cfg), Err(Error::DoomedStart { .. })));
        // not doomed: coasting out of C_a is simulated under the override
        cfg.initial.theta0 = FRAC_PI_2;
        let (traj, _) = simulate(&cfg).unwrap();
        assert!(traj.samples[0].inside_ca);
        assert_eq!(traj.samples[0].omega, 0.0);
        assert!(traj.samples[0].eta.is_none());
    }

    #[test]
    fn recording_stride_and_final_sample() {
        let ic = InitialCondition { x: 1.0, y: 0.8, theta0: 38f64.to_radians() };
        let mut cfg = SimConfig::new(ic, params(0.05), ControllerMode::BlfState);
        cfg.t_final = 1.0;
        cfg.record_stride = 100;
        let (traj, _) = simulate(&cfg).unwrap();
        assert_eq!(traj.samples.len(), 11);
        assert_eq!(traj.samples.last().unwrap().t, 1.0);
        assert!(traj.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn no_entries_is_vacuously_safe() {
        let ic = InitialCondition { x: 1.0, y: 0.0, theta0: FRAC_PI_2 };
        let mut cfg = SimConfig::new(ic, params(0.05), ControllerMode::BlfState);
        cfg.t_final = 2.0;
        let (traj, summary) = simulate(&cfg).unwrap();
        assert_eq!(summary.entry_count, 0);
        let check = entry_bearing_check(&traj, &params(0.05).radii);
        assert!(check.ok && check.bearings.is_empty());
    }
}
