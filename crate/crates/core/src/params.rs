//! Radii geometry and the derived design constants of the controller.
//!
//! Three concentric circles sit around the target: the desired orbit
//! (`r_d`), the auxiliary circle inside which the turn rate is zeroed
//! (`r_a`), and the safety circle that must never be entered (`r_s`).
//! Everything the controller needs (`k`, `beta`, the admissible `delta`
//! interval, the single-entry `kappa` threshold) follows from these radii.

use serde::{Deserialize, Serialize};

use crate::analysis::{self, DampingRegime};
use crate::controller;
use crate::diffdrive::{self, DriveGeometry};
use crate::error::{Error, GeometryError, Result};
use num_complex::Complex64;

/// Desired, auxiliary and safety radii, validated so that
/// `r_d > r_a > r_s > 0`, `r_d < r_s + r_a` and `r_a^2 > r_d * r_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiiTriple {
    r_d: f64,
    r_a: f64,
    r_s: f64,
}

impl RadiiTriple {
    pub fn new(r_d: f64, r_a: f64, r_s: f64) -> std::result::Result<Self, GeometryError> {
        validate_radii(r_d, r_a, r_s)
    }

    pub fn desired(&self) -> f64 {
        self.r_d
    }

    pub fn auxiliary(&self) -> f64 {
        self.r_a
    }

    pub fn safety(&self) -> f64 {
        self.r_s
    }
}

/// Checks the three radii inequalities strictly; equality is rejected.
pub fn validate_radii(r_d: f64, r_a: f64, r_s: f64) -> std::result::Result<RadiiTriple, GeometryError> {
    for (name, value) in [("r_d", r_d), ("r_a", r_a), ("r_s", r_s)] {
        if !value.is_finite() || value <= 0.0 {
            return Err(GeometryError::NonPositive { name, value });
        }
    }
    if !(r_d > r_a && r_a > r_s) {
        return Err(GeometryError::Ordering { r_d, r_a, r_s });
    }
    let r_a_sq = r_a * r_a;
    let product = r_d * r_s;
    if !(r_a_sq > product) {
        return Err(GeometryError::GeometricMean { r_a_sq, product });
    }
    let sum = r_s + r_a;
    if !(r_d < sum) {
        return Err(GeometryError::Triangle { r_d, sum });
    }
    Ok(RadiiTriple { r_d, r_a, r_s })
}

/// Curvature gain `k = 1 / sqrt(r_d^2 - r_a^2)`: the gain for which the
/// equilibrium turn rate equals `-V / r_d`.
pub fn compute_gain_k(radii: &RadiiTriple) -> f64 {
    1.0 / (radii.r_d * radii.r_d - radii.r_a * radii.r_a).sqrt()
}

/// `beta = sqrt(r_d^2 - r_a^2) / r_a`.
pub fn compute_beta(radii: &RadiiTriple) -> f64 {
    (radii.r_d * radii.r_d - radii.r_a * radii.r_a).sqrt() / radii.r_a
}

/// Upper bound on the barrier half-width `delta`:
/// `atan(beta)/beta + ln(r_d/r_a) - r_s/r_a`, always in `(0, 1)`.
pub fn compute_delta_bound(radii: &RadiiTriple) -> f64 {
    let beta = compute_beta(radii);
    beta.atan() / beta + (radii.r_d / radii.r_a).ln() - radii.r_s / radii.r_a
}

/// Smallest bearing at which the robot may cross into the auxiliary circle
/// without its straight chord reaching the safety circle.
pub fn min_safe_bearing(radii: &RadiiTriple) -> f64 {
    (radii.r_s / radii.r_a).asin()
}

/// `k V delta^2 exp(-2 W0)`. A gain `kappa` at or above this value admits at
/// most one pass through the auxiliary circle.
pub fn kappa_threshold(k: f64, speed: f64, delta: f64, w0: f64) -> f64 {
    k * speed * delta * delta * (-2.0 * w0).exp()
}

/// How `delta` is picked inside `(0, Delta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaChoice {
    Fixed(f64),
    /// `0.9 * Delta`.
    Auto,
}

pub const AUTO_DELTA_FRACTION: f64 = 0.9;

/// Constants consumed by the controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    pub radii: RadiiTriple,
    pub speed: f64,
    pub k: f64,
    pub beta: f64,
    pub delta_bound: f64,
    pub delta: f64,
    pub kappa: f64,
}

impl DesignParams {
    pub fn new(radii: RadiiTriple, speed: f64, delta: DeltaChoice, kappa: f64) -> Result<Self> {
        if !speed.is_finite() || speed <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "speed",
                value: speed,
                reason: "must be finite and positive",
            });
        }
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: kappa,
                reason: "must be finite and positive",
            });
        }
        let delta_bound = compute_delta_bound(&radii);
        let delta = match delta {
            DeltaChoice::Auto => AUTO_DELTA_FRACTION * delta_bound,
            DeltaChoice::Fixed(d) => {
                if !d.is_finite() || d <= 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "delta",
                        value: d,
                        reason: "must be finite and positive",
                    });
                }
                // delta == Delta is accepted; the entry-bearing guarantee is
                // then tight only in exact arithmetic.
                if d > delta_bound {
                    return Err(Error::DeltaExceedsBound {
                        delta: d,
                        bound: delta_bound,
                    });
                }
                d
            }
        };
        Ok(Self {
            radii,
            speed,
            k: compute_gain_k(&radii),
            beta: compute_beta(&radii),
            delta_bound,
            delta,
            kappa,
        })
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Self::new(self.radii, self.speed, DeltaChoice::Fixed(self.delta), kappa)
    }
}

/// Drive feasibility part of a [`DesignReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveCheck {
    pub d_w: f64,
    pub v_wheel_max: f64,
    pub max_feasible_omega: Option<f64>,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub k: f64,
    pub beta: f64,
    pub delta_bound: f64,
    pub delta: f64,
    pub kappa: f64,
    pub speed: f64,
    pub min_safe_bearing: f64,
    pub min_safe_bearing_deg: f64,
    pub eta0: f64,
    pub w0: f64,
    pub kappa_threshold: f64,
    pub single_entry_guaranteed: bool,
    pub omega_bound: f64,
    pub eigenvalues: [Complex64; 2],
    pub damping: DampingRegime,
    pub convergence_rate: f64,
    pub drive: Option<DriveCheck>,
}

impl DesignReport {
    /// `eta0` is the equilibrium-characterizing function at the initial state;
    /// the threshold and turn-rate bound depend on it through `W0`.
    pub fn new(params: &DesignParams, eta0: f64, drive: Option<&DriveGeometry>) -> Result<Self> {
        let w0 = controller::blf_value(eta0, params.delta)?;
        let threshold = kappa_threshold(params.k, params.speed, params.delta, w0);
        let omega_bound = controller::omega_bound(params, w0);
        let lin = analysis::linearize(params);
        let bearing = min_safe_bearing(&params.radii);
        let drive = drive.map(|geom| {
            let max = diffdrive::max_feasible_omega(params.speed, geom).ok();
            DriveCheck {
                d_w: geom.d_w,
                v_wheel_max: geom.v_wheel_max,
                max_feasible_omega: max,
                feasible: max.is_some_and(|m| omega_bound <= m),
            }
        });
        Ok(Self {
            k: params.k,
            beta: params.beta,
            delta_bound: params.delta_bound,
            delta: params.delta,
            kappa: params.kappa,
            speed: params.speed,
            min_safe_bearing: bearing,
            min_safe_bearing_deg: bearing.to_degrees(),
            eta0,
            w0,
            kappa_threshold: threshold,
            single_entry_guaranteed: params.kappa >= threshold,
            omega_bound,
            eigenvalues: lin.eigenvalues,
            damping: lin.regime,
            convergence_rate: analysis::local_convergence_rate(&lin),
            drive,
        })
    }
}
