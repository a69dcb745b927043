use std::f64::consts::PI;

use proptest::prelude::*;
use rydberg_core::dynamics::{
    energy, integrate, integrate_with, kepler_period, scaling_deviation, IntegrateOptions, PhasePoint, ScalingPair,
    StepRecord,
};
use rydberg_core::ensemble::orbit_point;
use rydberg_core::fields::DrivePulse;

fn field_free() -> DrivePulse {
    DrivePulse::static_field(0.0, 1e-6)
}

fn bound_point() -> impl Strategy<Value = (f64, PhasePoint)> {
    (1.0f64..30.0, 0.01f64..(2.0 * PI - 0.01)).prop_map(|(n0, m)| (n0, orbit_point(n0, m)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn energy_is_conserved_over_a_hundred_periods((n0, start) in bound_point()) {
        let tol = 1e-10;
        let e0 = energy(&start).unwrap();
        let r = integrate(&start, &field_free(), 100.0 * kepler_period(n0), tol).unwrap();
        prop_assert!((r.energy_final - e0).abs() <= 10.0 * tol * e0.abs(),
            "n0 {n0}: E0 {e0}, E {}", r.energy_final);
        prop_assert!(!r.ionised);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn flipping_momentum_retraces_the_orbit((n0, start) in bound_point(), fraction in 0.1f64..3.0) {
        let tol = 1e-10;
        let span = fraction * kepler_period(n0);
        let out = integrate(&start, &field_free(), span, tol).unwrap().final_point;
        let back = integrate(&PhasePoint::new(out.x, -out.p), &field_free(), span, tol).unwrap().final_point;
        let x_scale = 2.0 * n0 * n0;
        let p_scale = start.p.abs().max(1.0 / n0);
        prop_assert!((back.x - start.x).abs() <= 100.0 * tol * x_scale, "x {} vs {}", back.x, start.x);
        prop_assert!((-back.p - start.p).abs() <= 100.0 * tol * p_scale, "p {} vs {}", -back.p, start.p);
    }

    #[test]
    fn driven_motion_depends_only_on_scaled_quantities(
        s0 in 0.3f64..3.0,
        fs in 0.0f64..0.15,
        n0_a in 5.0f64..60.0,
        n0_b in 5.0f64..60.0,
        mean_anomaly in 0.05f64..(2.0 * PI - 0.05),
        phi in 0.0f64..(2.0 * PI),
    ) {
        let pair = ScalingPair {
            s0,
            fs_a: fs,
            fs_b: fs,
            n0_a,
            n0_b,
            phi,
            initial_a: orbit_point(n0_a, mean_anomaly),
            periods: 10.0,
        };
        let dev = scaling_deviation(&pair, 1e-11).unwrap();
        prop_assert!(dev <= 1e-6, "deviation {dev} for {pair:?}");
    }
}

#[test]
fn mismatched_scaled_field_breaks_scaling() {
    let pair = ScalingPair {
        s0: 1.0,
        fs_a: 0.1,
        fs_b: 0.1 * 1.01,
        n0_a: 10.0,
        n0_b: 20.0,
        phi: 0.3,
        initial_a: orbit_point(10.0, 1.0),
        periods: 10.0,
    };
    assert!(scaling_deviation(&pair, 1e-11).unwrap() > 1e-4);
}

#[test]
fn unperturbed_orbit_returns_after_one_period() {
    for n0 in [1.0, 3.0, 10.0] {
        let start = PhasePoint::new(2.0 * n0 * n0, 0.0);
        let r = integrate(&start, &field_free(), kepler_period(n0), 1e-12).unwrap();
        assert!((r.final_point.x - start.x).abs() <= 1e-8 * start.x, "n0 {n0}: x {}", r.final_point.x);
        assert!(r.final_point.p.abs() <= 1e-8 / n0, "n0 {n0}: p {}", r.final_point.p);
    }
}

#[test]
fn short_half_cycle_pulse_acts_as_a_kick() {
    let n0 = 10.0;
    let tau = kepler_period(n0) / 100.0;
    let aphelion = PhasePoint::new(2.0 * n0 * n0, 0.0);
    for delta_p in [0.05, 0.08, 0.15] {
        let amplitude = delta_p * PI / (2.0 * tau);
        let pulse = DrivePulse::half_cycle(amplitude, tau);
        // The field pushes towards the nucleus, so the kick is -Δp; the energy depends on Δp².
        let predicted = energy(&PhasePoint::new(aphelion.x, delta_p)).unwrap();
        let r = integrate(&aphelion, &pulse, tau + kepler_period(n0), 1e-10).unwrap();
        // Measured against the orbital energy scale, since the kick energy may sit near zero.
        let scale = predicted.abs().max(0.5 / (n0 * n0));
        assert!(
            (r.energy_final - predicted).abs() <= 0.02 * scale,
            "Δp {delta_p}: integrated {} vs kick {predicted}",
            r.energy_final
        );
    }
}

#[test]
fn regularised_motion_survives_a_thousand_collisions() {
    let start = PhasePoint::new(2.0, 0.0);
    let mut min_x = f64::INFINITY;
    let mut records = 0u64;
    let mut observe = |rec: &StepRecord| {
        min_x = min_x.min(rec.x);
        records += 1;
        assert!(rec.t.is_finite() && rec.p.is_finite() && rec.energy.is_finite());
    };
    let opts = IntegrateOptions::with_tol(1e-10);
    let r = integrate_with(&start, &field_free(), 1000.5 * kepler_period(1.0), &opts, Some(&mut observe)).unwrap();
    assert!(min_x > 0.0);
    assert!(r.final_point.x > 0.0);
    assert!(r.steps < 1_000_000, "steps {}", r.steps);
    assert!(records >= r.steps);
    assert!((r.energy_final + 0.5).abs() < 1e-8);
}
