//! Barrier-Lyapunov turn-rate law.
//!
//! Outside the auxiliary circle the turn rate is
//!
//! ```text
//! Ω = (V/r)(1 − sin θ) − kV·√(r² − r_a²)/r + κ·cos θ / (δ² − η²)
//! ```
//!
//! with `η = 1 − sin θ + φ(r)`; inside it the robot coasts straight.
//! Along closed-loop trajectories `η̇ = −κ cos²θ / (δ² − η²) ≤ 0`, so the
//! barrier `W = ½ ln(δ² / (δ² − η²))` never grows and `η` stays below `δ`.

use serde::{Deserialize, Serialize};

use crate::dynamics::PolarState;
use crate::error::{Error, Result};
use crate::params::DesignParams;

/// `√(r² − r_a²) / r`, i.e. `cos(asin(r_a / r))`, for `r ≥ r_a`.
fn tangent_cosine(r: f64, r_a: f64) -> f64 {
    (r * r - r_a * r_a).max(0.0).sqrt() / r
}

/// Closed form of `∫_{r_d}^{r} (k √(σ² − r_a²)/σ − 1/σ) dσ`.
///
/// Non-negative on `[r_a, ∞)` with its only zero at `r_d`.
pub fn phi(r: f64, params: &DesignParams) -> Result<f64> {
    let r_a = params.radii.auxiliary();
    let r_d = params.radii.desired();
    if !(r >= r_a) {
        return Err(Error::RangeBelowAuxiliary { r, r_a });
    }
    let k = params.k;
    let s = (r * r - r_a * r_a).sqrt();
    let s_d = (r_d * r_d - r_a * r_a).sqrt();
    Ok(k * (s - s_d) - k * r_a * ((s / r_a).atan() - (s_d / r_a).atan()) + (r_d / r).ln())
}

/// `η = 1 − sin θ + φ(r)`; zero only at `(r_d, π/2)`.
pub fn eta(r: f64, theta: f64, params: &DesignParams) -> Result<f64> {
    Ok(1.0 - theta.sin() + phi(r, params)?)
}

/// Logarithmic barrier `½ ln(δ² / (δ² − η²))`, defined for `0 ≤ η < δ`.
pub fn blf_value(eta_val: f64, delta: f64) -> Result<f64> {
    let d2 = delta * delta;
    let gap = d2 - eta_val * eta_val;
    if !(eta_val.abs() < delta) || gap <= 0.0 {
        return Err(Error::BarrierBreach {
            eta: eta_val,
            delta,
        });
    }
    Ok(0.5 * (d2 / gap).ln())
}

fn barrier_gain(eta_val: f64, params: &DesignParams) -> Result<f64> {
    let gap = params.delta * params.delta - eta_val * eta_val;
    if !(gap > 0.0) {
        return Err(Error::BarrierBreach {
            eta: eta_val,
            delta: params.delta,
        });
    }
    Ok(params.kappa / gap)
}

/// Turn rate from the full state `(r, θ)`.
pub fn omega(polar: &PolarState, params: &DesignParams) -> Result<f64> {
    let r = polar.r;
    let r_a = params.radii.auxiliary();
    if r < r_a {
        return Ok(0.0);
    }
    let v = params.speed;
    let (sin_t, cos_t) = polar.theta.sin_cos();
    let eta_val = 1.0 - sin_t + phi(r, params)?;
    let gain = barrier_gain(eta_val, params)?;
    Ok(v / r * (1.0 - sin_t) - params.k * v * tangent_cosine(r, r_a) + gain * cos_t)
}

/// The same law written with range and range rate only. `sin θ` is recovered
/// as `+√(V² − ṙ²)/V`, which matches [`omega`] for bearings in `(0, π)`.
pub fn omega_from_range(r: f64, rdot: f64, params: &DesignParams) -> Result<f64> {
    let v = params.speed;
    if !(rdot.abs() <= v) {
        return Err(Error::RangeRateExceedsSpeed { rdot, speed: v });
    }
    let r_a = params.radii.auxiliary();
    if r < r_a {
        return Ok(0.0);
    }
    let sin_t = (v * v - rdot * rdot).sqrt() / v;
    let eta_val = 1.0 - sin_t + phi(r, params)?;
    let gain = barrier_gain(eta_val, params)?;
    Ok(v / r * (1.0 - sin_t) - params.k * v * tangent_cosine(r, r_a) - gain * rdot / v)
}

/// Comparison law without the safety barrier:
/// `k(−V √(r² − r_a²)/r − ṙ)` outside the auxiliary circle, zero inside.
pub fn omega_baseline(r: f64, rdot: f64, k: f64, speed: f64, r_a: f64) -> Result<f64> {
    if !(rdot.abs() <= speed) {
        return Err(Error::RangeRateExceedsSpeed { rdot, speed });
    }
    if r < r_a {
        return Ok(0.0);
    }
    Ok(k * (-speed * tangent_cosine(r, r_a) - rdot))
}

/// Backward difference `(r_now − r_prev)/T`, clamped to `[−V, V]`.
pub fn estimate_range_rate(r_now: f64, r_prev: f64, period: f64, speed: f64) -> Result<f64> {
    if !(period > 0.0) {
        return Err(Error::InvalidParameter {
            name: "period",
            value: period,
            reason: "sampling period must be positive",
        });
    }
    Ok(((r_now - r_prev) / period).clamp(-speed, speed))
}

/// `δ √(1 − e^(−2 W0))`: the largest `η` reachable from an initial barrier value `W0`.
pub fn eta_tight_bound(delta: f64, w0: f64) -> f64 {
    delta * (-(-2.0 * w0).exp_m1()).sqrt()
}

/// Uniform bound on `|Ω|`: `V (k + 1/r_a) + κ e^(2 W0) / δ²`.
pub fn omega_bound(params: &DesignParams, w0: f64) -> f64 {
    params.speed * (params.k + 1.0 / params.radii.auxiliary())
        + params.kappa * (2.0 * w0).exp() / (params.delta * params.delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerMode {
    /// Barrier law evaluated on the true `(r, θ)`.
    BlfState,
    /// Barrier law fed by the measured range and a finite-difference range rate.
    BlfRangeOnly,
    /// Comparison law without the barrier (exact range rate).
    Baseline,
}

impl ControllerMode {
    pub fn is_blf(self) -> bool {
        !matches!(self, ControllerMode::Baseline)
    }
}

/// One-sample memory for the finite-difference range rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeRateEstimator {
    pub initial_rdot: f64,
    pub last_range: Option<f64>,
    pub last_rdot: f64,
}

impl RangeRateEstimator {
    pub fn new(initial_rdot: f64) -> Self {
        Self {
            initial_rdot,
            last_range: None,
            last_rdot: initial_rdot,
        }
    }

    /// Feeds one range sample; the first call yields the configured initial rate.
    pub fn update(&mut self, r_now: f64, period: f64, speed: f64) -> Result<f64> {
        let rdot = match self.last_range {
            None => {
                if !(period > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "period",
                        value: period,
                        reason: "sampling period must be positive",
                    });
                }
                self.initial_rdot.clamp(-speed, speed)
            }
            Some(prev) => estimate_range_rate(r_now, prev, period, speed)?,
        };
        self.last_range = Some(r_now);
        self.last_rdot = rdot;
        Ok(rdot)
    }
}

/// Per-run controller: mode, constants, estimator memory and the initial
/// barrier level. Owned by a single simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub mode: ControllerMode,
    pub params: DesignParams,
    pub estimator: RangeRateEstimator,
    /// `η` at `t = 0`; absent when the start is inside the auxiliary circle.
    pub eta0: Option<f64>,
    /// `W(η(0))`; absent when `η(0) ≥ δ` or undefined.
    pub w0: Option<f64>,
}

impl ControllerState {
    pub fn new(
        mode: ControllerMode,
        params: DesignParams,
        initial: &PolarState,
        initial_rdot: f64,
    ) -> Self {
        let eta0 = eta(initial.r, initial.theta, &params).ok();
        let w0 = eta0.and_then(|e| blf_value(e, params.delta).ok());
        Self {
            mode,
            params,
            estimator: RangeRateEstimator::new(initial_rdot),
            eta0,
            w0,
        }
    }

    /// Turn-rate command for the current sample. `period` is the time since
    /// the previous call (used only by the range-only estimator).
    pub fn command(&mut self, polar: &PolarState, period: f64) -> Result<f64> {
        let p = &self.params;
        match self.mode {
            ControllerMode::BlfState => omega(polar, p),
            ControllerMode::BlfRangeOnly => {
                let rdot = self.estimator.update(polar.r, period, p.speed)?;
                omega_from_range(polar.r, rdot, p)
            }
            ControllerMode::Baseline => {
                let rdot = -p.speed * polar.theta.cos();
                omega_baseline(polar.r, rdot, p.k, p.speed, p.radii.auxiliary())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{validate_radii, DeltaChoice};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn reference(kappa: f64) -> DesignParams {
        DesignParams::new(
            validate_radii(1.0, 0.7, 0.4).unwrap(),
            0.6,
            DeltaChoice::Fixed(0.5),
            kappa,
        )
        .unwrap()
    }

    fn polar(r: f64, theta: f64) -> PolarState {
        PolarState { r, theta, gamma: 0.0 }
    }

    #[test]
    fn phi_reference_values() {
        let p = reference(0.05);
        assert_eq!(phi(1.0, &p).unwrap(), 0.0);
        // mpmath quadrature of the integrand
        assert_abs_diff_eq!(phi(1.64f64.sqrt(), &p).unwrap(), 0.06109899019508823, epsilon = 1e-12);
        assert_abs_diff_eq!(phi(0.7, &p).unwrap(), 0.13632174247495565, epsilon = 1e-12);
        assert_eq!(
            phi(0.69, &p),
            Err(Error::RangeBelowAuxiliary { r: 0.69, r_a: 0.7 })
        );
    }

    #[test]
    fn eta_reference_values() {
        let p = reference(0.05);
        assert_eq!(eta(1.0, FRAC_PI_2, &p).unwrap(), 0.0);
        let e0 = eta(1.64f64.sqrt(), 38f64.to_radians(), &p).unwrap();
        assert_abs_diff_eq!(e0, 0.4454, epsilon = 5e-5);
        assert_abs_diff_eq!(e0, 0.44543751486942995, epsilon = 1e-12);
        for theta_a in [0.1, 0.4, 0.9, 1.3] {
            let a = eta(0.7, theta_a, &p).unwrap();
            let b = eta(0.7, std::f64::consts::PI - theta_a, &p).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        assert!(eta(0.5, 1.0, &p).is_err());
    }

    #[test]
    fn blf_values() {
        assert_eq!(blf_value(0.0, 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(
            blf_value(0.44543751486942995, 0.5).unwrap(),
            0.7891109183578347,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            blf_value(0.5 / 2f64.sqrt(), 0.5).unwrap(),
            0.5 * 2f64.ln(),
            epsilon = 1e-15
        );
        assert!(matches!(blf_value(0.5, 0.5), Err(Error::BarrierBreach { .. })));
        assert!(blf_value(0.49999, 0.5).unwrap() > blf_value(0.4999, 0.5).unwrap());
    }

    #[test]
    fn omega_reference_values() {
        for kappa in [0.015, 0.05, 3.0] {
            let w = omega(&polar(1.0, FRAC_PI_2), &reference(kappa)).unwrap();
            assert_abs_diff_eq!(w, -0.6, epsilon = 1e-12);
        }
        assert_eq!(omega(&polar(0.5, 0.3), &reference(0.05)).unwrap(), 0.0);
        let w = omega(&polar(1.64f64.sqrt(), 38f64.to_radians()), &reference(0.05)).unwrap();
        assert_abs_diff_eq!(w, 0.24031583225297976, epsilon = 1e-12);
    }

    #[test]
    fn omega_rejects_barrier_breach() {
        // eta = 1 - sin(0.1) + phi(1.28) > 0.5
        let res = omega(&polar(1.64f64.sqrt(), 0.1), &reference(0.05));
        assert!(matches!(res, Err(Error::BarrierBreach { .. })));
    }

    #[test]
    fn range_form_matches_state_form() {
        let p = reference(0.05);
        assert_abs_diff_eq!(omega_from_range(1.0, 0.0, &p).unwrap(), -0.6, epsilon = 1e-12);
        let theta = 38f64.to_radians();
        let r = 1.64f64.sqrt();
        let rdot = -0.6 * theta.cos();
        assert_abs_diff_eq!(rdot, -0.4728, epsilon = 5e-5);
        assert_abs_diff_eq!(
            omega_from_range(r, rdot, &p).unwrap(),
            omega(&polar(r, theta), &p).unwrap(),
            epsilon = 1e-12
        );
        assert_eq!(omega_from_range(0.6, 0.1, &p).unwrap(), 0.0);
        assert!(matches!(
            omega_from_range(1.0, 0.61, &p),
            Err(Error::RangeRateExceedsSpeed { .. })
        ));
    }

    #[test]
    fn baseline_values() {
        let k = 1.4002800840280099;
        assert_abs_diff_eq!(omega_baseline(1.0, 0.0, k, 0.6, 0.7).unwrap(), -0.6, epsilon = 1e-12);
        assert_eq!(omega_baseline(0.6, -0.3, k, 0.6, 0.7).unwrap(), 0.0);
        assert_abs_diff_eq!(
            omega_baseline(1.64f64.sqrt(), -0.4728, k, 0.6, 0.7).unwrap(),
            -0.04149464590979849,
            epsilon = 1e-12
        );
        assert!(omega_baseline(1.0, -0.7, k, 0.6, 0.7).is_err());
    }

    #[test]
    fn range_rate_estimator() {
        assert_eq!(estimate_range_rate(1.0, 1.0, 0.01, 0.6).unwrap(), 0.0);
        assert_eq!(estimate_range_rate(0.99, 1.0, 0.01, 0.6).unwrap(), -0.6);
        assert!(estimate_range_rate(0.99, 1.0, 0.0, 0.6).is_err());

        let mut est = RangeRateEstimator::new(0.0);
        assert_eq!(est.update(1.5, 0.001, 0.6).unwrap(), 0.0);
        assert_abs_diff_eq!(est.update(1.4998, 0.001, 0.6).unwrap(), -0.2, epsilon = 1e-9);
        assert_eq!(est.last_range, Some(1.4998));
    }

    #[test]
    fn tight_bound_values() {
        assert_eq!(eta_tight_bound(0.5, 0.0), 0.0);
        assert_abs_diff_eq!(
            eta_tight_bound(0.5, 0.7891109183578347),
            0.44543751486942995,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(eta_tight_bound(0.5, 400.0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn omega_bound_values() {
        let p = reference(0.05);
        assert_abs_diff_eq!(omega_bound(&p, 0.7891109183578347), 2.6665770231348903, epsilon = 1e-12);
        let v_term = 0.6 * (p.k + 1.0 / 0.7);
        assert_abs_diff_eq!(omega_bound(&p, 0.0) - 0.05 / 0.25, v_term, epsilon = 1e-12);
    }

    #[test]
    fn controller_state_modes() {
        let p = reference(0.05);
        let s = polar(1.64f64.sqrt(), 38f64.to_radians());
        let mut ctl = ControllerState::new(ControllerMode::BlfState, p, &s, 0.0);
        assert_abs_diff_eq!(ctl.w0.unwrap(), 0.7891109183578347, epsilon = 1e-12);
        assert_abs_diff_eq!(ctl.command(&s, 0.001).unwrap(), omega(&s, &p).unwrap());

        let mut ro = ControllerState::new(ControllerMode::BlfRangeOnly, p, &s, 0.0);
        // first sample uses rdot(0) = 0
        assert_abs_diff_eq!(
            ro.command(&s, 0.001).unwrap(),
            omega_from_range(s.r, 0.0, &p).unwrap()
        );

        let mut base = ControllerState::new(ControllerMode::Baseline, p, &s, 0.0);
        let expected = omega_baseline(s.r, -0.6 * s.theta.cos(), p.k, 0.6, 0.7).unwrap();
        assert_eq!(base.command(&s, 0.001).unwrap(), expected);

        let inside = ControllerState::new(ControllerMode::BlfState, p, &polar(0.6, 1.0), 0.0);
        assert_eq!((inside.eta0, inside.w0), (None, None));
    }
}
