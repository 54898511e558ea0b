use std::f64::consts::PI;

use approx::assert_relative_eq;
use gbq::evolution::{
    classify_outcome, energy, evolve, functionals_ij, line_energy, momentum, rhs, rk4_step, solitary_initial_velocity,
    FieldPair, Outcome, OutcomeClass, SpectralPair, Stepper, TimeIntegratorConfig, CUBIC_WELL_DEPTH,
};
use gbq::model::{EquationParams, HbqParams};
use gbq::petviashvili::{petviashvili_solve, SolitarySolveConfig};
use gbq::scalar::sech;
use gbq::spectral::{GridSpec, RealField, Spectral};
use gbq::Error;
use proptest::prelude::*;

fn spectral(l: f64, n: usize) -> Spectral<f64> {
    Spectral::new(GridSpec::new(l, n).unwrap())
}

fn hbq_state(s: &Spectral<f64>, hbq: &HbqParams<f64>, t: f64) -> FieldPair<f64> {
    FieldPair::new(
        s.grid().sample(|x| hbq.exact(x, t, 0.0, 1.0)),
        s.grid().sample(|x| hbq.velocity(x, t, 0.0, 1.0)),
    )
    .unwrap()
}

fn amp1(s: &Spectral<f64>, a: f64) -> FieldPair<f64> {
    let u = s.grid().sample(|x| -2f64.sqrt() * a * sech(x) * x.tanh());
    FieldPair::new(u, RealField::zeros(s.n())).unwrap()
}

#[test]
fn zero_state_is_fixed() {
    let s = spectral(10.0, 64);
    let p = EquationParams::cubic_focusing();
    let zero = FieldPair::zeros(64);
    let next = rk4_step(&zero, 0.1, &s, &p).unwrap();
    assert_eq!(next.u.max_abs(), 0.0);
    assert_eq!(next.v.max_abs(), 0.0);
    let y = SpectralPair::from_physical(&zero, &s).unwrap();
    let d = rhs(&y, &s, &p).unwrap();
    assert!(d.u.iter().chain(&d.v).all(|c| c.norm() == 0.0));
}

#[test]
fn linear_dispersion_of_single_mode() {
    let l = 10.0;
    let s = spectral(l, 64);
    let p = EquationParams::new(2.0, 0.5, 1.0, 1).unwrap();
    let eps = 1e-8;
    let state = FieldPair::new(s.grid().sample(|x| eps * (PI * x / l).cos()), RealField::zeros(64)).unwrap();
    let y = SpectralPair::from_physical(&state, &s).unwrap();
    let d = rhs(&y, &s, &p).unwrap();
    let k = PI / l;
    let omega2 = k * k * (1.0 + p.alpha * k * k) / (1.0 + k * k + p.kappa * k.powi(4));
    let expected = -omega2 * y.u[1];
    assert!((d.v[1] - expected).norm() <= 1e-12 * expected.norm());
    assert_eq!(d.v[0].norm(), 0.0);
}

#[test]
fn linear_mode_converges_at_fourth_order() {
    // β = 0 makes the system linear; each mode is an exact harmonic oscillator
    let l = 5.0;
    let s = spectral(l, 32);
    let p = EquationParams::new(1.0, 1.0, 0.0, 1).unwrap();
    let k = 3.0 * PI / l;
    let omega = (k * k * (1.0 + k * k) / (1.0 + k * k + k.powi(4))).sqrt();
    let period = 2.0 * PI / omega;
    let state = FieldPair::new(s.grid().sample(|x| (k * x).cos()), RealField::zeros(32)).unwrap();
    let t = 0.3 * period;
    let exact_u = s.grid().sample(|x| (omega * t).cos() * (k * x).cos());
    let exact_v = s.grid().sample(|x| -omega * (omega * t).sin() * (k * x).cos());
    let err = |m: usize| {
        let cfg = TimeIntegratorConfig::new(t, m);
        let traj = evolve(&state, &s, &p, &cfg).unwrap();
        let fin = traj.final_state;
        fin.u.max_abs_diff(&exact_u).max(fin.v.max_abs_diff(&exact_v))
    };
    let (e1, e2) = (err(40), err(80));
    let ratio = e1 / e2;
    assert!((13.0..19.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn hbq_single_step_matches_translation() {
    let s = spectral(100.0, 2048);
    let hbq = HbqParams::benchmark();
    let p = hbq.gbq_params().unwrap();
    let next = rk4_step(&hbq_state(&s, &hbq, 0.0), 0.005, &s, &p).unwrap();
    let exact = hbq_state(&s, &hbq, 0.005);
    assert!(next.u.max_abs_diff(&exact.u) <= 1e-10);
}

#[test]
fn hbq_run_accuracy_and_conservation() {
    let s = spectral(100.0, 2048);
    let hbq = HbqParams::benchmark();
    let p = hbq.gbq_params().unwrap();
    let cfg = TimeIntegratorConfig::new(5.0, 1000);
    let traj = evolve(&hbq_state(&s, &hbq, 0.0), &s, &p, &cfg).unwrap();
    assert_eq!(traj.series.outcome, Outcome::Completed);
    assert_eq!(*traj.series.times.last().unwrap(), 5.0);
    let exact = s.grid().sample(|x| hbq.exact(x, 5.0, 0.0, 1.0));
    let err = traj.final_state.u.max_abs_diff(&exact);
    assert!(err <= 1e-12, "{err:e}");
    assert!(traj.series.relative_energy_drift() <= 1e-8);
    assert!(traj.series.momentum_drift() <= 1e-8);
    assert!(traj.series.times.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn mean_of_v_is_invariant() {
    let s = spectral(20.0, 256);
    let p = EquationParams::cubic_focusing();
    let state = FieldPair::new(s.grid().sample(sech), s.grid().sample(|x| 0.3 * (-x * x).exp() * x)).unwrap();
    let mut y = SpectralPair::from_physical(&state, &s).unwrap();
    let v0 = y.v[0];
    let mut stepper = Stepper::new(&s, &p).unwrap();
    stepper.advance(&mut y, 0.01, 200);
    assert!((y.v[0] - v0).norm() <= 1e-14);
}

#[test]
fn reversibility_probe() {
    let s = spectral(100.0, 1024);
    let hbq = HbqParams::benchmark();
    let p = hbq.gbq_params().unwrap();
    let state = hbq_state(&s, &hbq, 0.0);
    let mut y = SpectralPair::from_physical(&state, &s).unwrap();
    let mut stepper = Stepper::new(&s, &p).unwrap();
    stepper.advance(&mut y, 0.005, 400);
    stepper.advance(&mut y, -0.005, 400);
    let back = y.to_physical(&s);
    assert!(back.u.max_abs_diff(&state.u) <= 1e-9);
    assert!(back.v.max_abs_diff(&state.v) <= 1e-9);
}

#[test]
fn solitary_velocity_matches_closed_form() {
    let s = spectral(100.0, 2048);
    let hbq = HbqParams::benchmark();
    let q = s.grid().sample(|x| hbq.exact(x, 0.0, 0.0, 1.0));
    let v = solitary_initial_velocity(&q, hbq.speed(), &s).unwrap();
    let exact = s.grid().sample(|x| hbq.initial_velocity(x));
    assert!(v.max_abs_diff(&exact) <= 1e-10);
    // even profile, odd velocity
    let n = s.n();
    for j in 1..n / 2 {
        assert!((v[j] + v[n - j]).abs() <= 1e-12);
    }
    assert_eq!(solitary_initial_velocity(&q, 0.0, &s).unwrap().max_abs(), 0.0);
}

#[test]
fn energy_matches_closed_forms() {
    let s = spectral(100.0, 8192);
    let p = EquationParams::cubic_focusing();
    assert_eq!(energy(&FieldPair::zeros(8192), &s, &p).unwrap(), 0.0);
    for a in [0.5, 1.0, 2.0, 3.0] {
        let a2: f64 = a * a;
        let e = energy(&amp1(&s, a), &s, &p).unwrap();
        let closed = 4.0 * a2 * (14.0 - a2) / 35.0;
        assert!((e - closed).abs() <= 1e-6 * closed.abs(), "{a}: {e} vs {closed}");

        let u = amp1(&s, a).u;
        let state = FieldPair::new(u.clone(), u).unwrap();
        let e = line_energy(&state, &s, &p).unwrap();
        let closed = a2 * (78.0 / 15.0 - 4.0 * a2 / 35.0);
        assert!((e - closed).abs() <= 1e-6 * closed.abs(), "{a}: {e} vs {closed}");
        // the torus value misses the ξ = 0 node: ½ (√2 A π)² / (2L)
        let torus = energy(&state, &s, &p).unwrap();
        let node = (2f64.sqrt() * a * PI).powi(2) / 400.0;
        assert_relative_eq!(e - torus, node, max_relative = 1e-9);
    }
}

#[test]
fn energy_rejects_mean_mode() {
    let s = spectral(10.0, 64);
    let p = EquationParams::cubic_focusing();
    let state = FieldPair::new(RealField::zeros(64), s.grid().sample(|_| 1.0)).unwrap();
    assert!(matches!(energy(&state, &s, &p), Err(Error::MeanMode { .. })));
    assert!(matches!(momentum(&state, &s, &p), Err(Error::MeanMode { .. })));
    let cfg = TimeIntegratorConfig::new(1.0, 10);
    assert!(evolve(&state, &s, &p, &cfg).is_err());
}

#[test]
fn momentum_vanishes_without_velocity() {
    let s = spectral(20.0, 256);
    let p = EquationParams::cubic_focusing();
    let state = FieldPair::new(s.grid().sample(sech), RealField::zeros(256)).unwrap();
    assert_eq!(momentum(&state, &s, &p).unwrap(), 0.0);
}

#[test]
fn momentum_matches_physical_quadrature() {
    let s = spectral(30.0, 512);
    let p = EquationParams::new(1.5, 0.7, 1.0, 1).unwrap();
    let u = s.grid().sample(|x| sech(x - 1.0).powi(2));
    let v = s.grid().sample(|x| x * (-x * x / 4.0).exp());
    let state = FieldPair::new(u.clone(), v.clone()).unwrap();
    let q = momentum(&state, &s, &p).unwrap();
    let hv = s.neg_laplacian_inv_sqrt(&v).unwrap();
    let ux = s.spectral_derivative(&u, 1).unwrap();
    let uxx = s.spectral_derivative(&u, 2).unwrap();
    let vx = s.spectral_derivative(&v, 1).unwrap();
    let quad: f64 = (0..512)
        .map(|j| u[j] * hv[j] + ux[j] * v[j] + p.kappa * uxx[j] * vx[j])
        .sum::<f64>()
        * s.grid().dx();
    assert_relative_eq!(q, quad, max_relative = 1e-12);
}

#[test]
fn well_depth_and_nehari_functional() {
    let s = spectral(100.0, 8192);
    let p = EquationParams::cubic_focusing();
    let (i, j) = functionals_ij(&RealField::zeros(8192), &s, &p).unwrap();
    assert_eq!((i, j), (0.0, 0.0));
    let g = s.grid().sample(|x| 2f64.sqrt() * sech(x));
    let (_, d) = functionals_ij(&g, &s, &p).unwrap();
    assert!((d - CUBIC_WELL_DEPTH).abs() <= 1e-10);
    for a in [0.5, 1.0, 2.0, 7f64.sqrt(), 3.0] {
        let a2 = a * a;
        let (i, _) = functionals_ij(&amp1(&s, a).u, &s, &p).unwrap();
        let closed = 16.0 * a2 * (7.0 - a2) / 35.0;
        assert!(
            (i - closed).abs() <= 1e-6 * (1.0 + closed.abs()),
            "{a}: {i} vs {closed}"
        );
    }
}

#[test]
fn zero_data_is_a_global_candidate() {
    let s = spectral(10.0, 64);
    let p = EquationParams::cubic_focusing();
    let cfg = TimeIntegratorConfig::new(1.0, 50);
    let traj = evolve(&FieldPair::zeros(64), &s, &p, &cfg).unwrap();
    assert_eq!(classify_outcome(&traj.series), OutcomeClass::GlobalCandidate);
    assert!(traj.series.h1_norm.iter().all(|&h| h == 0.0));
    assert!(traj.series.energy.iter().all(|&h| h == 0.0));
    assert_eq!(traj.series.len(), 51);
}

#[test]
fn small_and_large_amplitude_outcomes() {
    let s = spectral(100.0, 8192);
    let p = EquationParams::cubic_focusing();
    let mut cfg = TimeIntegratorConfig::with_max_dt(20.0, 1e-3);
    cfg.diagnostics_stride = 100;

    let traj = evolve(&amp1(&s, 0.8), &s, &p, &cfg).unwrap();
    assert_eq!(classify_outcome(&traj.series), OutcomeClass::GlobalCandidate);

    let traj = evolve(&amp1(&s, 3.7), &s, &p, &cfg).unwrap();
    assert_eq!(classify_outcome(&traj.series), OutcomeClass::Blowup);
    let h = &traj.series.h1_norm;
    let rising = h.windows(2).filter(|w| w[1] > w[0]).count();
    assert!(rising * 10 >= 9 * (h.len() - 1), "H1 not increasing: {h:?}");
}

#[test]
fn petviashvili_profile_translates_without_shape_change() {
    let s = spectral(100.0, 1024);
    let p = EquationParams::new(2.0, 1.0, 1.0, 1).unwrap();
    let c = 1.3;
    let sol = petviashvili_solve(&s, &p, &SolitarySolveConfig::new(c, 1)).unwrap();
    assert!(sol.converged);
    let v0 = solitary_initial_velocity(&sol.profile, c, &s).unwrap();
    let state = FieldPair::new(sol.profile.clone(), v0).unwrap();
    let mut cfg = TimeIntegratorConfig::with_max_dt(20.0, 1e-3);
    cfg.diagnostics_stride = 1000;
    let traj = evolve(&state, &s, &p, &cfg).unwrap();
    let shifted = s.translate(&sol.profile, c * 20.0).unwrap();
    let dev = traj.final_state.u.max_abs_diff(&shifted);
    assert!(dev <= 1e-6, "{dev:e}");
}

#[test]
fn config_validation_names_keys() {
    let mut cfg = TimeIntegratorConfig::<f64>::new(1.0, 10);
    cfg.n_steps = 0;
    assert!(matches!(
        cfg.validate(),
        Err(Error::InvalidParameter { name: "n_steps", .. })
    ));
    let cfg = TimeIntegratorConfig::<f64>::new(-1.0, 10);
    assert!(matches!(
        cfg.validate(),
        Err(Error::InvalidParameter { name: "t_final", .. })
    ));
    let s = spectral(10.0, 64);
    let bad = FieldPair::new(RealField::zeros(32), RealField::zeros(32)).unwrap();
    let p = EquationParams::cubic_focusing();
    assert!(evolve(&bad, &s, &p, &TimeIntegratorConfig::new(1.0, 10)).is_err());
}

#[test]
fn f32_evolution_runs() {
    let s = Spectral::new(GridSpec::new(20.0f32, 128).unwrap());
    let p = EquationParams::<f32>::cubic_focusing();
    let state = FieldPair::new(s.grid().sample(|x| 0.1 * sech(x)), RealField::zeros(128)).unwrap();
    let traj = evolve(&state, &s, &p, &TimeIntegratorConfig::new(1.0f32, 100)).unwrap();
    assert_eq!(traj.series.outcome, Outcome::Completed);
    assert!(traj.series.relative_energy_drift() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mean_mode_is_invariant_for_arbitrary_data(
        a in -1.0f64..1.0,
        b in -1.0f64..1.0,
        shift in -3.0f64..3.0,
        alpha in 0.0f64..3.0,
        kappa in 0.01f64..2.0,
        p in 1u32..4,
    ) {
        let s = spectral(15.0, 64);
        let params = EquationParams::new(alpha, kappa, 1.0, p).unwrap();
        let state = FieldPair::new(
            s.grid().sample(|x| a * sech(x - shift)),
            s.grid().sample(|x| b * (-(x - shift).powi(2)).exp() * (x - shift)),
        )
        .unwrap();
        let mut y = SpectralPair::from_physical(&state, &s).unwrap();
        let (u0, v0) = (y.u[0], y.v[0]);
        let mut stepper = Stepper::new(&s, &params).unwrap();
        stepper.advance(&mut y, 0.01, 50);
        prop_assert!((y.v[0] - v0).norm() <= 1e-14);
        // u_t = v with a zero mean v keeps the mean of u fixed
        prop_assert!((y.u[0] - u0).norm() <= 1e-13);
    }

    #[test]
    fn small_amplitude_energy_is_conserved(a in 0.05f64..0.5, kappa in 0.1f64..1.5) {
        let s = spectral(20.0, 128);
        let params = EquationParams::new(1.0, kappa, 1.0, 1).unwrap();
        let state = FieldPair::new(
            s.grid().sample(|x| a * (-x * x).exp()),
            s.grid().sample(|x| a * x * (-x * x).exp()),
        )
        .unwrap();
        let e0 = energy(&state, &s, &params).unwrap();
        let traj = evolve(&state, &s, &params, &TimeIntegratorConfig::new(1.0, 200)).unwrap();
        let e1 = energy(&traj.final_state, &s, &params).unwrap();
        prop_assert!((e1 - e0).abs() <= 1e-8 * e0.abs().max(1e-12));
    }
}
