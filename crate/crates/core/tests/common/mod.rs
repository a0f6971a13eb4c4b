#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use circumnav::controller::{self, ControllerMode};
use circumnav::params::{validate_radii, DeltaChoice, DesignParams, RadiiTriple};
use circumnav::sim::{InitialCondition, SimConfig};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn reference_radii() -> RadiiTriple {
    validate_radii(1.0, 0.7, 0.4).unwrap()
}

pub fn reference_params(kappa: f64) -> DesignParams {
    DesignParams::new(reference_radii(), 0.6, DeltaChoice::Fixed(0.5), kappa).unwrap()
}

pub fn reference_start() -> InitialCondition {
    InitialCondition {
        x: 1.0,
        y: 0.8,
        theta0: 38f64.to_radians(),
    }
}

pub fn reference_config(kappa: f64, mode: ControllerMode) -> SimConfig {
    SimConfig::new(reference_start(), reference_params(kappa), mode)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random triple satisfying all three radii inequalities.
pub fn random_radii(rng: &mut ChaCha8Rng) -> RadiiTriple {
    loop {
        let r_d = rng.random_range(0.2..5.0);
        let r_a = r_d * rng.random_range(0.05..0.999);
        let r_s = r_a * rng.random_range(0.001..0.999);
        if let Ok(r) = validate_radii(r_d, r_a, r_s) {
            return r;
        }
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = simpson(f, a, m);
    let right = simpson(f, m, b);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    adaptive(f, a, m, left, 0.5 * tol, depth - 1) + adaptive(f, m, b, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    adaptive(f, a, b, simpson(f, a, b), tol, 60)
}

/// `φ(r)` by quadrature of its derivative `(k √(σ² − r_a²) − 1)/σ` from `r_d`.
/// The substitution `σ² = r_a² + u²` removes the square-root cusp at `r_a`.
pub fn phi_quadrature(r: f64, radii: &RadiiTriple) -> f64 {
    let (r_d, r_a) = (radii.desired(), radii.auxiliary());
    let k = 1.0 / (r_d * r_d - r_a * r_a).sqrt();
    // dσ = u/σ du, so the integrand becomes (k u − 1) u / σ²
    let g = |u: f64| {
        let s2 = r_a * r_a + u * u;
        (k * u - 1.0) * u / s2
    };
    let u_d = (r_d * r_d - r_a * r_a).sqrt();
    let u = (r * r - r_a * r_a).max(0.0).sqrt();
    integrate(&g, u_d, u, 1e-13)
}

/// Random starts inside the admissible set for the reference radii with
/// `κ` drawn from `[0.01, 0.5]`.
pub fn admissible_battery(seed: u64, count: usize, t_final: f64) -> Vec<SimConfig> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let kappa = rng.random_range(0.01..0.5);
        let params = reference_params(kappa);
        let r = rng.random_range(0.7..2.0);
        let bearing_from_target = rng.random_range(0.0..TAU);
        let theta = rng.random_range(0.01..PI - 0.01);
        let Ok(eta) = controller::eta(r, theta, &params) else {
            continue;
        };
        if eta >= 0.98 * params.delta {
            continue;
        }
        let initial = InitialCondition {
            x: r * bearing_from_target.cos(),
            y: r * bearing_from_target.sin(),
            theta0: theta,
        };
        let mut cfg = SimConfig::new(initial, params, ControllerMode::BlfState);
        cfg.t_final = t_final;
        out.push(cfg);
    }
    out
}
