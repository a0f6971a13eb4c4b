//! C ABI over `circumnav`.
//!
//! Handles are opaque and owned by the caller once returned; release them with
//! the matching `*_free`. Every fallible call returns a [`CircumnavStatus`] and
//! writes results through out-pointers. On failure the message is kept per
//! thread and can be fetched with [`circumnav_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use circumnav::analysis::{audit, linearize, DampingRegime, InvariantReport};
use circumnav::controller::{self, blf_value, ControllerMode};
use circumnav::diffdrive::{self, DriveGeometry};
use circumnav::dynamics::{polar_from_cartesian, PolarState, TargetPosition};
use circumnav::params::{validate_radii, DeltaChoice, DesignParams};
use circumnav::sim::{simulate, InitialCondition, SimConfig, SimSummary, Trajectory};
use circumnav::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircumnavStatus {
    Ok = 0,
    InvalidArgument = 1,
    Geometry = 2,
    DeltaBound = 3,
    BarrierBreach = 5,
    NullPointer = 10,
    OutsideAdmissibleSet = 11,
    Panic = 99,
}

pub const CIRCUMNAV_MODE_BLF_STATE: i32 = 0;
pub const CIRCUMNAV_MODE_BLF_RANGE_ONLY: i32 = 1;
pub const CIRCUMNAV_MODE_BASELINE: i32 = 2;

/// Design constants; create with [`circumnav_design_new`].
pub struct CircumnavDesign {
    params: DesignParams,
}

/// A finished simulation; create with [`circumnav_simulate`].
pub struct CircumnavRun {
    trajectory: Trajectory,
    summary: SimSummary,
    audit: InvariantReport,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CircumnavConstants {
    pub k: f64,
    pub beta: f64,
    pub delta_bound: f64,
    pub delta: f64,
    pub kappa: f64,
    pub speed: f64,
    pub min_safe_bearing: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CircumnavLinearization {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub eig_re: [f64; 2],
    pub eig_im: [f64; 2],
    pub underdamped: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CircumnavWheelCommand {
    pub v_right: f64,
    pub v_left: f64,
    pub saturated: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CircumnavSimOptions {
    pub x: f64,
    pub y: f64,
    /// Bearing relative to the line of sight (rad).
    pub theta0: f64,
    pub target_x: f64,
    pub target_y: f64,
    /// One of the `CIRCUMNAV_MODE_*` constants.
    pub mode: i32,
    pub dt: f64,
    pub t_final: f64,
    pub record_stride: usize,
    pub allow_outside_theta: bool,
    pub initial_range_rate: f64,
}

/// Absent values (`convergence_time`, `eta`, `w`) are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CircumnavSummary {
    pub entry_count: usize,
    pub min_range: f64,
    pub min_range_time: f64,
    pub safety_violated: bool,
    pub converged: bool,
    pub convergence_time: f64,
    pub final_omega: f64,
    pub max_abs_omega: f64,
    pub audit_passed: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CircumnavSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub r: f64,
    pub theta: f64,
    pub omega: f64,
    pub eta: f64,
    pub w: f64,
    pub inside_ca: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> CircumnavStatus {
    match e {
        Error::Geometry(_) => CircumnavStatus::Geometry,
        Error::DeltaExceedsBound { .. } => CircumnavStatus::DeltaBound,
        Error::BarrierBreach { .. } | Error::BarrierBreachAt { .. } => CircumnavStatus::BarrierBreach,
        Error::OutsideAdmissibleSet { .. } | Error::DoomedStart { .. } => CircumnavStatus::OutsideAdmissibleSet,
        _ => CircumnavStatus::InvalidArgument,
    }
}

struct Failure(CircumnavStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CircumnavStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any error or panic, and returns the status.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> CircumnavStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CircumnavStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal panic: {msg}"));
            CircumnavStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

fn mode_of(mode: i32) -> Result<ControllerMode, Failure> {
    match mode {
        CIRCUMNAV_MODE_BLF_STATE => Ok(ControllerMode::BlfState),
        CIRCUMNAV_MODE_BLF_RANGE_ONLY => Ok(ControllerMode::BlfRangeOnly),
        CIRCUMNAV_MODE_BASELINE => Ok(ControllerMode::Baseline),
        other => Err(Failure(CircumnavStatus::InvalidArgument, format!("unknown mode {other}"))),
    }
}

/// Validates the radii and builds the design. A non-positive `delta` selects
/// 0.9 of its admissible bound.
///
/// # Safety
/// `out` must be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn circumnav_design_new(
    r_d: f64,
    r_a: f64,
    r_s: f64,
    speed: f64,
    delta: f64,
    kappa: f64,
    out: *mut *mut CircumnavDesign,
) -> CircumnavStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let radii = validate_radii(r_d, r_a, r_s).map_err(Error::from)?;
        let choice = if delta > 0.0 { DeltaChoice::Fixed(delta) } else { DeltaChoice::Auto };
        let params = DesignParams::new(radii, speed, choice, kappa)?;
        out.write(Box::into_raw(Box::new(CircumnavDesign { params })));
        Ok(())
    })
}

/// # Safety
/// `design` must be null or a handle from [`circumnav_design_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn circumnav_design_free(design: *mut CircumnavDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}

/// # Safety
/// `design` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn circumnav_design_constants(
    design: *const CircumnavDesign,
    out: *mut CircumnavConstants,
) -> CircumnavStatus {
    guard(|| {
        let p = &deref(design, "design")?.params;
        let c = CircumnavConstants {
            k: p.k,
            beta: p.beta,
            delta_bound: p.delta_bound,
            delta: p.delta,
            kappa: p.kappa,
            speed: p.speed,
            min_safe_bearing: circumnav::params::min_safe_bearing(&p.radii),
        };
        write(out, c, "out")
    })
}

/// `η(r, θ)` for `r ≥ r_a`.
///
/// # Safety
/// `design` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn circumnav_eta(
    design: *const CircumnavDesign,
    r: f64,
    theta: f64,
    out: *mut f64,
) -> CircumnavStatus {
    guard(|| {
        let p = &deref(design, "design")?.params;
        write(out, controller::eta(r, theta, p)?, "out")
    })
}

/// `W(η)`; fails with `BARRIER_BREACH` when `|η| ≥ δ`.
///
/// # Safety
/// `design` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn circumnav_blf_value(
    design: *const CircumnavDesign,
    eta: f64,
    out: *mut f64,
) -> CircumnavStatus {
    guard(|| {
        let p = &deref(design, "design")?.params;
        write(out, blf_value(eta, p.delta)?, "out")
    })
}

/// Turn rate from range and bearing.
///
/// # Safety
/// `design` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn circumnav_omega(
    design: *const CircumnavDesign,
    r: f64,
    theta: f64,
    out: *mut f64,
) -> CircumnavStatus {
    guard(|| {
        let p = &deref(design, "design")?.params;
        let w = controller::omega(&PolarState { r, theta, gamma: 0.0 }, p)?;
        write(out, w, "out")
    })
}

/// Turn rate from range and range rate.
///
/// # Safety
/// `design` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn circumnav_omega_from_range(
    design: *const CircumnavDesign,
    r: f64,
    rdot: f64,
    out: *mut f64,
) -> CircumnavStatus {
    guard(|| {
        let p = &deref(design, "design")?.params;
        write(out, controller::omega_from_range(r, rdot, p)?, "out")
    })
}

/// # Safety
/// `design` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn circumnav_linearize(
    design: *const CircumnavDesign,
    out: *mut CircumnavLinearization,
) -> CircumnavStatus {
    guard(|| {
        let lin = linearize(&deref(design, "design")?.params);
        let l = CircumnavLinearization {
            a11: lin.a11,
            a12: lin.a12,
            a21: lin.a21,
            a22: lin.a22,
            eig_re: [lin.eigenvalues[0].re, lin.eigenvalues[1].re],
            eig_im: [lin.eigenvalues[0].im, lin.eigenvalues[1].im],
            underdamped: lin.regime == DampingRegime::Underdamped,
        };
        write(out, l, "out")
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn circumnav_wheel_speeds(
    speed: f64,
    omega: f64,
    d_w: f64,
    v_wheel_max: f64,
    out: *mut CircumnavWheelCommand,
) -> CircumnavStatus {
    guard(|| {
        if !(d_w > 0.0 && v_wheel_max > 0.0) {
            return Err(Failure(
                CircumnavStatus::InvalidArgument,
                "wheel separation and speed limit must be positive".to_string(),
            ));
        }
        let c = diffdrive::wheel_speeds(speed, omega, &DriveGeometry { d_w, v_wheel_max });
        write(
            out,
            CircumnavWheelCommand {
                v_right: c.v_right,
                v_left: c.v_left,
                saturated: c.saturated,
            },
            "out",
        )
    })
}

/// Defaults: reference start (1, 0.8) at 38°, target at the origin, full
/// barrier controller, 1 ms step, 120 s, every 10th step recorded.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn circumnav_sim_options_default(out: *mut CircumnavSimOptions) -> CircumnavStatus {
    guard(|| {
        let o = CircumnavSimOptions {
            x: 1.0,
            y: 0.8,
            theta0: 38f64.to_radians(),
            target_x: 0.0,
            target_y: 0.0,
            mode: CIRCUMNAV_MODE_BLF_STATE,
            dt: 1e-3,
            t_final: 120.0,
            record_stride: 10,
            allow_outside_theta: false,
            initial_range_rate: 0.0,
        };
        write(out, o, "out")
    })
}

/// Simulates and audits one run.
///
/// # Safety
/// `design` must be a live handle, `options` readable, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn circumnav_simulate(
    design: *const CircumnavDesign,
    options: *const CircumnavSimOptions,
    out: *mut *mut CircumnavRun,
) -> CircumnavStatus {
    guard(|| {
        let params = deref(design, "design")?.params;
        let o = *deref(options, "options")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = SimConfig {
            initial: InitialCondition { x: o.x, y: o.y, theta0: o.theta0 },
            target: TargetPosition { x: o.target_x, y: o.target_y },
            params,
            mode: mode_of(o.mode)?,
            dt: o.dt,
            t_final: o.t_final,
            record_stride: o.record_stride,
            allow_outside_theta: o.allow_outside_theta,
            initial_range_rate: o.initial_range_rate,
        };
        let (trajectory, summary) = simulate(&cfg)?;
        let polar = polar_from_cartesian(&cfg.initial_pose()?, &cfg.target)?;
        let w0 = controller::eta(polar.r, polar.theta, &params)
            .and_then(|e| blf_value(e, params.delta))
            .ok();
        let report = audit(&trajectory, &params, w0);
        out.write(Box::into_raw(Box::new(CircumnavRun {
            trajectory,
            summary,
            audit: report,
        })));
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a handle from [`circumnav_simulate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn circumnav_run_free(run: *mut CircumnavRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// `run` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn circumnav_run_summary(
    run: *const CircumnavRun,
    out: *mut CircumnavSummary,
) -> CircumnavStatus {
    guard(|| {
        let run = deref(run, "run")?;
        let s = &run.summary;
        write(
            out,
            CircumnavSummary {
                entry_count: s.entry_count,
                min_range: s.min_range,
                min_range_time: s.min_range_time,
                safety_violated: s.safety_violated,
                converged: s.converged,
                convergence_time: s.convergence_time.unwrap_or(f64::NAN),
                final_omega: s.final_omega,
                max_abs_omega: s.max_abs_omega,
                audit_passed: run.audit.passed(),
            },
            "out",
        )
    })
}

/// Number of recorded samples; 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn circumnav_run_sample_count(run: *const CircumnavRun) -> usize {
    run.as_ref().map_or(0, |r| r.trajectory.samples.len())
}

/// Copies up to `capacity` samples into `out` and stores the count in `written`.
///
/// # Safety
/// `run` must be a live handle, `out` valid for `capacity` elements, and
/// `written` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn circumnav_run_samples(
    run: *const CircumnavRun,
    out: *mut CircumnavSample,
    capacity: usize,
    written: *mut usize,
) -> CircumnavStatus {
    guard(|| {
        let run = deref(run, "run")?;
        if written.is_null() {
            return Err(null("written"));
        }
        let n = capacity.min(run.trajectory.samples.len());
        if n > 0 && out.is_null() {
            return Err(null("out"));
        }
        for (i, s) in run.trajectory.samples.iter().take(n).enumerate() {
            out.add(i).write(CircumnavSample {
                t: s.t,
                x: s.x,
                y: s.y,
                psi: s.psi,
                r: s.r,
                theta: s.theta,
                omega: s.omega,
                eta: s.eta.unwrap_or(f64::NAN),
                w: s.w.unwrap_or(f64::NAN),
                inside_ca: s.inside_ca,
            });
        }
        written.write(n);
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. Release with
/// [`circumnav_string_free`].
#[no_mangle]
pub extern "C" fn circumnav_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match e.borrow().as_deref() {
        Some(msg) => CString::new(msg.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn circumnav_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
