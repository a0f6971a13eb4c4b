mod common;

use std::f64::consts::FRAC_PI_2;

use approx::assert_abs_diff_eq;
use circumnav::controller::{blf_value, eta, ControllerMode};
use circumnav::params::kappa_threshold;
use circumnav::sim::{simulate, InitialCondition, SimConfig};

#[test]
fn equilibrium_start_stays_put() {
    let ic = InitialCondition { x: 1.0, y: 0.0, theta0: FRAC_PI_2 };
    let mut cfg = SimConfig::new(ic, common::reference_params(0.05), ControllerMode::BlfState);
    cfg.t_final = 20.0;
    let (traj, summary) = simulate(&cfg).unwrap();
    assert_eq!(summary.entry_count, 0);
    for s in &traj.samples {
        assert!((s.r - 1.0).abs() < 1e-9, "r = {} at {}", s.r, s.t);
        assert!((s.theta - FRAC_PI_2).abs() < 1e-9);
        assert!((s.omega + 0.6).abs() < 1e-9);
    }
    assert_eq!(summary.convergence_time, Some(0.0));
}

#[test]
fn coasts_straight_inside_auxiliary_circle() {
    let ic = InitialCondition { x: 0.0, y: 0.6, theta0: FRAC_PI_2 };
    let mut cfg = SimConfig::new(ic, common::reference_params(0.05), ControllerMode::BlfState);
    cfg.allow_outside_theta = true;
    cfg.record_stride = 1;
    cfg.t_final = 2.0;
    let (traj, _) = simulate(&cfg).unwrap();
    let inside: Vec<_> = traj.samples.iter().take_while(|s| s.inside_ca).collect();
    assert!(inside.len() > 100);
    for pair in inside.windows(2) {
        assert_eq!(pair[1].omega, 0.0);
        assert_eq!(pair[1].psi, pair[0].psi);
        assert!(pair[1].eta.is_none() && pair[1].w.is_none());
    }
    // straight line through (0, 0.6) perpendicular to the line of sight
    for s in &inside {
        assert_abs_diff_eq!(s.y, 0.6, epsilon = 1e-12);
    }
}

fn reference_run(kappa: f64) -> (circumnav::sim::Trajectory, circumnav::sim::SimSummary) {
    let mut cfg = common::reference_config(kappa, ControllerMode::BlfState);
    cfg.record_stride = 1;
    simulate(&cfg).unwrap()
}

#[test]
fn chord_geometry_inside_auxiliary_circle() {
    let cfg = common::reference_config(0.05, ControllerMode::BlfState);
    let (dt, v, r_a) = (cfg.dt, cfg.params.speed, cfg.params.radii.auxiliary());
    for kappa in [0.05, 0.015] {
        let (traj, summary) = reference_run(kappa);
        assert!(summary.entry_count >= 1);
        for iv in &summary.entry_intervals {
            let t_exit = iv.t_exit.expect("run leaves the auxiliary circle");
            let r_min = traj
                .samples
                .iter()
                .filter(|s| s.t >= iv.t_entry && s.t <= t_exit)
                .map(|s| s.r)
                .fold(f64::INFINITY, f64::min);
            let predicted = r_a * iv.entry_bearing.sin();
            assert!((r_min - predicted).abs() <= 2.0 * dt * v, "{r_min} vs {predicted}");

            let transit = t_exit - iv.t_entry;
            assert!(transit <= 2.0 * r_a / v + dt);
            let chord = 2.0 * r_a * iv.entry_bearing.cos().abs() / v;
            assert!((transit - chord).abs() <= 2.0 * dt, "{transit} vs {chord}");
        }
    }
}

#[test]
fn settles_clockwise_on_desired_circle() {
    let (traj, summary) = reference_run(0.05);
    assert!(summary.converged);
    assert_abs_diff_eq!(summary.final_omega, -0.6, epsilon = 0.01);
    // the line-of-sight angle winds clockwise: robot position angle decreases
    let late: Vec<_> = traj.samples.iter().filter(|s| s.t > 100.0).collect();
    let mut unwrapped = 0.0;
    for pair in late.windows(2) {
        let a0 = pair[0].y.atan2(pair[0].x);
        let a1 = pair[1].y.atan2(pair[1].x);
        let mut d = a1 - a0;
        if d > std::f64::consts::PI {
            d -= std::f64::consts::TAU;
        } else if d < -std::f64::consts::PI {
            d += std::f64::consts::TAU;
        }
        assert!(d < 0.0);
        unwrapped += d;
    }
    let elapsed = late.last().unwrap().t - late[0].t;
    assert_abs_diff_eq!(unwrapped / elapsed, -0.6, epsilon = 0.01);
}

#[test]
fn decay_matches_linearization() {
    // envelope of |r - r_d| decays at κ/(2δ²) in the underdamped regime
    for (kappa, window) in [(0.05, (30.0, 90.0)), (0.015, (40.0, 120.0))] {
        let (traj, _) = reference_run(kappa);
        let peaks: Vec<(f64, f64)> = traj
            .samples
            .windows(3)
            .filter(|w| {
                let e = |i: usize| (w[i].r - 1.0).abs();
                e(1) > e(0) && e(1) >= e(2) && w[1].t > window.0 && w[1].t < window.1
            })
            .map(|w| (w[1].t, (w[1].r - 1.0).abs().ln()))
            .collect();
        assert!(peaks.len() >= 4);
        let n = peaks.len() as f64;
        let mt = peaks.iter().map(|p| p.0).sum::<f64>() / n;
        let ml = peaks.iter().map(|p| p.1).sum::<f64>() / n;
        let slope = peaks.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum::<f64>()
            / peaks.iter().map(|p| (p.0 - mt).powi(2)).sum::<f64>();
        let predicted = kappa / (2.0 * 0.25);
        assert!((-slope - predicted).abs() < 0.1 * predicted, "κ = {kappa}: {slope} vs {predicted}");
    }
}

#[test]
fn threshold_limits_entries_on_random_starts() {
    let battery = common::admissible_battery(11, 24, 60.0);
    let mut above = 0;
    for cfg in battery {
        let p = cfg.params;
        let pose = cfg.initial_pose().unwrap();
        let polar = circumnav::dynamics::polar_from_cartesian(&pose, &cfg.target).unwrap();
        let w0 = blf_value(eta(polar.r, polar.theta, &p).unwrap(), p.delta).unwrap();
        let threshold = kappa_threshold(p.k, p.speed, p.delta, w0);
        let (_, summary) = simulate(&cfg).unwrap();
        assert!(!summary.safety_violated);
        if p.kappa >= threshold {
            above += 1;
            assert!(summary.entry_count <= 1, "κ = {} ≥ {threshold}: {} entries", p.kappa, summary.entry_count);
        }
    }
    assert!(above >= 10);
}

#[test]
fn deterministic_repeat() {
    let cfg = common::reference_config(0.015, ControllerMode::BlfRangeOnly);
    let a = simulate(&cfg).unwrap();
    let b = simulate(&cfg).unwrap();
    assert_eq!(a, b);
}
