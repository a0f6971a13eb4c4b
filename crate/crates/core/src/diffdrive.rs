//! Unicycle `(V, Ω)` to differential-drive wheel speeds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveGeometry {
    /// Wheel separation (m).
    pub d_w: f64,
    /// Per-wheel speed limit (m/s).
    pub v_wheel_max: f64,
}

impl Default for DriveGeometry {
    fn default() -> Self {
        Self {
            d_w: 0.1054,
            v_wheel_max: 0.814,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WheelCommand {
    pub v_right: f64,
    pub v_left: f64,
    pub saturated: bool,
}

/// Wheel speeds are reported unclipped; `saturated` flags a command the
/// hardware could not execute.
pub fn wheel_speeds(speed: f64, omega: f64, geom: &DriveGeometry) -> WheelCommand {
    let half = 0.5 * omega * geom.d_w;
    let v_right = speed + half;
    let v_left = speed - half;
    WheelCommand {
        v_right,
        v_left,
        saturated: v_right.abs() > geom.v_wheel_max || v_left.abs() > geom.v_wheel_max,
    }
}

/// Largest `|Ω|` executable at forward speed `speed` without saturating a wheel.
pub fn max_feasible_omega(speed: f64, geom: &DriveGeometry) -> Result<f64> {
    if !(speed < geom.v_wheel_max) {
        return Err(Error::NoTurningAuthority {
            speed,
            limit: geom.v_wheel_max,
        });
    }
    Ok(2.0 * (geom.v_wheel_max - speed) / geom.d_w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn reference_commands() {
        let g = DriveGeometry::default();
        let straight = wheel_speeds(0.6, 0.0, &g);
        assert_eq!((straight.v_right, straight.v_left, straight.saturated), (0.6, 0.6, false));

        let orbit = wheel_speeds(0.6, -0.6, &g);
        assert_abs_diff_eq!(orbit.v_right, 0.56838, epsilon = 1e-12);
        assert_abs_diff_eq!(orbit.v_left, 0.63162, epsilon = 1e-12);
        assert!(!orbit.saturated);

        let hard = wheel_speeds(0.6, 4.5, &g);
        assert_abs_diff_eq!(hard.v_right, 0.83715, epsilon = 1e-12);
        assert!(hard.saturated);
    }

    #[test]
    fn feasible_turn_rate() {
        let g = DriveGeometry::default();
        assert_abs_diff_eq!(max_feasible_omega(0.6, &g).unwrap(), 4.060721062618596, epsilon = 1e-12);
        assert!(matches!(
            max_feasible_omega(0.814, &g),
            Err(Error::NoTurningAuthority { .. })
        ));
        let at_limit = wheel_speeds(0.6, max_feasible_omega(0.6, &g).unwrap(), &g);
        assert!(!at_limit.saturated);
    }

    proptest! {
        #[test]
        fn round_trip_recovers_inputs(v in 0.0..2.0f64, w in -20.0..20.0f64, d in 0.01..1.0f64) {
            let g = DriveGeometry { d_w: d, v_wheel_max: 1.0 };
            let c = wheel_speeds(v, w, &g);
            prop_assert!(((c.v_right + c.v_left) / 2.0 - v).abs() <= 1e-12);
            prop_assert!(((c.v_right - c.v_left) / d - w).abs() <= 1e-12);
        }

        #[test]
        fn linear_in_commands(v1 in 0.0..1.0f64, w1 in -5.0..5.0f64, v2 in 0.0..1.0f64, w2 in -5.0..5.0f64) {
            let g = DriveGeometry::default();
            let a = wheel_speeds(v1, w1, &g);
            let b = wheel_speeds(v2, w2, &g);
            let s = wheel_speeds(v1 + v2, w1 + w2, &g);
            prop_assert!((s.v_right - a.v_right - b.v_right).abs() < 1e-12);
            prop_assert!((s.v_left - a.v_left - b.v_left).abs() < 1e-12);
        }
    }
}
