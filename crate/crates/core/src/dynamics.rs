//! Unicycle kinematics in world (Cartesian) and engagement (polar)
//! coordinates.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// World-frame pose; `psi` is the heading from the +X axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        Self {
            x,
            y,
            psi: wrap_angle(psi),
        }
    }

    /// Pose at `(x, y)` whose bearing relative to the line of sight is `theta`.
    pub fn from_bearing(x: f64, y: f64, theta: f64, target: &TargetPosition) -> Result<Self> {
        let (dx, dy) = (target.x - x, target.y - y);
        if dx == 0.0 && dy == 0.0 {
            return Err(Error::SingularRange);
        }
        Ok(Self::new(x, y, theta + dy.atan2(dx)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetPosition {
    pub x: f64,
    pub y: f64,
}

impl TargetPosition {
    pub const ORIGIN: TargetPosition = TargetPosition { x: 0.0, y: 0.0 };
}

/// Range, bearing and line-of-sight angle. `theta + gamma = psi (mod 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarState {
    pub r: f64,
    pub theta: f64,
    pub gamma: f64,
}

/// `(V cos psi, V sin psi, omega)`.
pub fn cartesian_derivatives(pose: &Pose, speed: f64, omega: f64) -> (f64, f64, f64) {
    (speed * pose.psi.cos(), speed * pose.psi.sin(), omega)
}

/// `(dr, dtheta) = (-V cos theta, omega + V sin theta / r)`.
pub fn polar_derivatives(state: &PolarState, speed: f64, omega: f64) -> Result<(f64, f64)> {
    if state.r <= 0.0 {
        return Err(Error::SingularRange);
    }
    Ok((
        -speed * state.theta.cos(),
        omega + speed * state.theta.sin() / state.r,
    ))
}

pub fn polar_from_cartesian(pose: &Pose, target: &TargetPosition) -> Result<PolarState> {
    let dx = target.x - pose.x;
    let dy = target.y - pose.y;
    let r = dx.hypot(dy);
    if r == 0.0 {
        return Err(Error::SingularRange);
    }
    let gamma = wrap_angle(dy.atan2(dx));
    Ok(PolarState {
        r,
        theta: wrap_angle(pose.psi - gamma),
        gamma,
    })
}
