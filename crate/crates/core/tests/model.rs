use approx::assert_relative_eq;
use gbq::model::*;
use gbq::spectral::{GridSpec, Spectral};
use proptest::prelude::*;

#[test]
fn nonlinearity_and_potential() {
    let quad = EquationParams::new(0.0, 1.0, 1.0, 1).unwrap();
    assert_eq!(quad.nonlinearity(2.0), 4.0);
    assert_relative_eq!(quad.potential(2.0), 8.0 / 3.0);
    let cubic = EquationParams::<f64>::cubic_focusing();
    assert_relative_eq!(cubic.nonlinearity(1.5), -(1.5f64.powi(3)));
    assert_relative_eq!(cubic.potential(1.5), -(1.5f64.powi(4)) / 4.0);
    assert_eq!(quad.potential(0.0), 0.0);
    assert_eq!(cubic.potential(0.0), 0.0);
}

#[test]
fn params_validation_names_key() {
    let err = EquationParams::new(-1.0, 1.0, 1.0, 1).unwrap_err();
    assert!(err.to_string().contains("alpha"));
    let err = EquationParams::new(0.0, -1.0, 1.0, 1).unwrap_err();
    assert!(err.to_string().contains("kappa"));
    assert!(EquationParams::new(0.0, 1.0, 1.0, 0).is_err());
}

#[test]
fn stationary_wave_values() {
    let cubic = EquationParams::<f64>::cubic_focusing();
    assert_relative_eq!(stationary_q0(0.0, &cubic).unwrap(), 2f64.sqrt(), max_relative = 1e-15);
    assert!(stationary_q0(1e3, &cubic).unwrap() < 1e-200);
    assert!(stationary_q0(-1e3, &cubic).unwrap() < 1e-200);
    let x = 0.7;
    assert_relative_eq!(
        stationary_q0(x, &cubic).unwrap(),
        2f64.sqrt() / x.cosh(),
        max_relative = 1e-14
    );

    let bad = EquationParams::new(1.0, 1.0, 1.0, 2).unwrap();
    assert!(stationary_q0(0.0, &bad).is_err());
    let bad = EquationParams::new(0.0, 1.0, -1.0, 2).unwrap();
    assert!(stationary_q0(0.0, &bad).is_err());
}

#[test]
fn hbq_benchmark_constants() {
    let h = HbqParams::<f64>::benchmark();
    assert_relative_eq!(h.speed_squared(), 169.0 / 133.0, max_relative = 1e-15);
    assert!((h.speed() - 1.1272).abs() < 5e-5);
    assert_relative_eq!(h.amplitude(), 15.0 / 38.0, max_relative = 1e-14);
    assert_relative_eq!(h.inverse_width(), 1.0 / (2.0 * 13f64.sqrt()), max_relative = 1e-15);
    assert_relative_eq!(h.exact(3.0, 0.0, 3.0, 1.0), h.amplitude());
    let x: f64 = 4.2;
    let expect = 15.0 / 38.0 * (1.0 / (x / (2.0 * 13f64.sqrt())).cosh()).powi(4);
    assert_relative_eq!(hbq_exact(x, 0.0, &h, 0.0, 1.0), expect, max_relative = 1e-14);
    let p = h.gbq_params().unwrap();
    assert_eq!((p.alpha, p.kappa, p.beta, p.p_exp), (0.0, 1.0, 1.0, 1));
}

#[test]
fn hbq_rejects_nonpositive_bracket() {
    assert!(HbqParams::new(3.0, 1.0, 2).is_err());
    assert!(HbqParams::new(1.0, 1.0, 1).is_err());
    assert!(HbqParams::new(0.0, 1.0, 2).is_err());
}

#[test]
fn hbq_velocity_closed_form() {
    let h = HbqParams::<f64>::benchmark();
    assert_eq!(hbq_initial_velocity(0.0, &h), 0.0);
    let coeff = 15.0 * 13f64.sqrt() / (19.0 * 133f64.sqrt());
    for x in [-7.0, -1.0, 0.5, 3.0, 12.0] {
        let y = x / (2.0 * 13f64.sqrt());
        let expect = coeff * (1.0 / y.cosh()).powi(4) * y.tanh();
        assert_relative_eq!(hbq_initial_velocity(x, &h), expect, max_relative = 1e-13);
    }
}

#[test]
fn hbq_velocity_peak_by_brute_force() {
    let h = HbqParams::<f64>::benchmark();
    // sech⁴ y tanh y peaks where tanh y = 1/√5
    let closed = 15.0 * 13f64.sqrt() / (19.0 * 133f64.sqrt()) * (16.0 / 25.0) / 5f64.sqrt();
    let brute = (0..=400_000)
        .map(|i| hbq_initial_velocity(i as f64 * 1e-4, &h))
        .fold(f64::MIN, f64::max);
    assert_relative_eq!(brute, closed, max_relative = 1e-8);
}

#[test]
fn hbq_velocity_integrates_to_zero() {
    let h = HbqParams::<f64>::benchmark();
    let dx = 0.01;
    let s: f64 = (-10_000..10_000)
        .map(|j| hbq_initial_velocity(j as f64 * dx, &h) * dx)
        .sum();
    assert!(s.abs() < 1e-12);
}

#[test]
fn regime_paper_discriminants() {
    let p = EquationParams::new(2.0, 1.0, 1.0, 1).unwrap();
    let r = regime_classify(&p, 3f64.sqrt());
    assert_relative_eq!(r.discriminant, -23.0, max_relative = 1e-14);
    assert_eq!(r.profile_class, ProfileClass::OscillatoryDecay);
    let r = regime_classify(&p, 1.3);
    assert!((r.discriminant - (-4.5683)).abs() < 1e-3);
    assert_eq!(r.profile_class, ProfileClass::OscillatoryDecay);
    assert!(r.petviashvili_denominator_ok);

    let p = EquationParams::new(0.5, 0.1, 1.0, 1).unwrap();
    let r = regime_classify(&p, 2.1f64.sqrt());
    assert_eq!(r.profile_class, ProfileClass::MonotoneDecay);
    assert!(r.roots.unwrap().iter().all(|z| z.im == 0.0));
}

#[test]
fn regime_degenerate_and_nondecaying() {
    let p = EquationParams::new(2.0, 1.0, 1.0, 1).unwrap();
    let r = regime_classify(&p, 0.0);
    assert_eq!(r.profile_class, ProfileClass::Degenerate);
    assert!(r.roots.is_none());
    assert!(!r.petviashvili_denominator_ok);

    let r = regime_classify(&p, 1.0);
    assert_eq!(r.profile_class, ProfileClass::Degenerate);

    // α ≤ c² < 1
    let p = EquationParams::new(0.25, 1.0, 1.0, 1).unwrap();
    let r = regime_classify(&p, 0.8);
    assert!(r.nonexistence.subsonic_window);
    assert_eq!(r.profile_class, ProfileClass::NonDecaying);

    // α > c² > 1 with small κ: purely imaginary roots
    let p = EquationParams::new(4.0, 0.01, 1.0, 1).unwrap();
    let r = regime_classify(&p, 1.2);
    assert!(r.nonexistence.imaginary_roots);
    assert_eq!(r.profile_class, ProfileClass::NonDecaying);
}

#[test]
fn theorem_flags() {
    let p = EquationParams::new(1.0, 1.0, -1.0, 2).unwrap();
    assert!(regime_classify(&p, 1.5).nonexistence.high_speed_defocusing);
    let p = EquationParams::new(1.0, 1.0, 1.0, 2).unwrap();
    assert!(regime_classify(&p, 0.5).nonexistence.low_speed_focusing);
    assert!(!regime_classify(&p, 1.5).nonexistence.low_speed_focusing);

    let p = EquationParams::new(2.0, 1.0, 1.0, 2).unwrap();
    let r = regime_classify(&p, 3f64.sqrt());
    assert!(r.existence_hypothesis);
    // the existence theorem needs p > 1
    let p = EquationParams::new(2.0, 1.0, 1.0, 1).unwrap();
    assert!(!regime_classify(&p, 3f64.sqrt()).existence_hypothesis);
}

#[test]
fn interpolation_bound_flag() {
    // κ(1-c²)c²/(c²-α)² with α=0.1, c²=0.5, κ=1: 0.25/0.16 = 1.5625 > 25/44
    let p = EquationParams::new(0.1, 1.0, 1.0, 1).unwrap();
    assert!(regime_classify(&p, 0.5f64.sqrt()).nonexistence.interpolation_bound);
    let p = EquationParams::new(0.1, 0.01, 1.0, 1).unwrap();
    assert!(!regime_classify(&p, 0.5f64.sqrt()).nonexistence.interpolation_bound);
}

proptest! {
    #[test]
    fn roots_satisfy_characteristic_equation(
        alpha in 0.0f64..5.0, kappa in 0.01f64..5.0, c in 0.05f64..3.0,
    ) {
        let p = EquationParams::new(alpha, kappa, 1.0, 1).unwrap();
        let r = regime_classify(&p, c);
        let c2 = c * c;
        let (a, b, c0) = (kappa * c2, alpha - c2, c2 - 1.0);
        let scale = 1f64.max(a.abs()).max(b.abs()).max(c0.abs());
        if let Some(roots) = r.roots {
            for l in roots {
                let l2 = l * l;
                let v = l2 * l2 * a + l2 * b + c0;
                prop_assert!(v.norm() <= 1e-9 * scale, "residual {} at {:?}", v.norm(), l);
            }
        }
    }

    #[test]
    fn subsonic_window_excludes_existence(
        alpha in 0.0f64..3.0, kappa in 0.0f64..3.0, c in -3.0f64..3.0,
        beta in -2.0f64..2.0, p in 1u32..5,
    ) {
        let params = EquationParams::new(alpha, kappa, beta, p).unwrap();
        let r = regime_classify(&params, c);
        prop_assert!(!(r.nonexistence.subsonic_window && r.existence_hypothesis));
    }

    #[test]
    fn class_matches_root_structure(
        alpha in 0.0f64..5.0, kappa in 0.01f64..5.0, c in 0.05f64..3.0,
    ) {
        let p = EquationParams::new(alpha, kappa, 1.0, 1).unwrap();
        let r = regime_classify(&p, c);
        if let Some(roots) = r.roots {
            let tol = 1e-9;
            let has_imag = roots.iter().any(|z| z.norm() > 0.0 && z.re.abs() <= tol * z.norm());
            let all_real = roots.iter().all(|z| z.im.abs() <= tol * z.norm());
            match r.profile_class {
                ProfileClass::NonDecaying => prop_assert!(has_imag),
                ProfileClass::MonotoneDecay => prop_assert!(all_real && !has_imag),
                ProfileClass::OscillatoryDecay => prop_assert!(!all_real && !has_imag),
                ProfileClass::Degenerate => {}
            }
        }
    }
}

#[test]
fn kernel_branches_and_symmetry() {
    assert_eq!(KernelSpec::new(0.1).unwrap().branch, KernelBranch::Sub);
    assert_eq!(KernelSpec::new(0.25).unwrap().branch, KernelBranch::Critical);
    assert_eq!(KernelSpec::new(1.0).unwrap().branch, KernelBranch::Super);
    assert!(KernelSpec::new(0.0).is_err());
    assert!(KernelSpec::new(-1.0).is_err());
    for kappa in [0.1, 0.25, 1.0] {
        let k = KernelSpec::new(kappa).unwrap();
        for x in [0.1, 0.7, 2.0, 5.5] {
            assert_eq!(kernel_k(x, &k), kernel_k(-x, &k));
        }
        assert!((k.value(1e-9_f64) - k.value(0.0)).abs() < 1e-8);
        assert_relative_eq!(
            k.normalization,
            1.0 / (2.0 * std::f64::consts::PI * kappa * kappa),
            max_relative = 1e-12
        );
    }
}

#[test]
fn kernel_integrates_to_one() {
    for kappa in [0.05, 0.1, 0.2, 0.25, 0.5, 1.0, 3.0] {
        let k = KernelSpec::new(kappa).unwrap();
        let h = 1e-3;
        let s: f64 = (-40_000..=40_000).map(|j| k.value(j as f64 * h) * h).sum();
        assert!((s - 1.0).abs() < 1e-6, "kappa={kappa}: {s}");
    }
}

#[test]
fn kernel_convolution_inverts_operator() {
    let grid = GridSpec::new(20.0f64, 1024).unwrap();
    let spectral = Spectral::new(grid.clone());
    let f = grid.sample(|x| (-x * x).exp());
    for kappa in [0.1, 0.25, 1.0] {
        let k = KernelSpec::new(kappa).unwrap();
        let direct = kernel_convolve(&f, &grid, &k).unwrap();
        let spectral_inv = spectral.helmholtz_inverse(&f, kappa).unwrap();
        let err = direct.max_abs_diff(&spectral_inv);
        assert!(err <= 1e-6, "kappa={kappa}: {err:e}");
    }
}

#[test]
fn kernel_tail_decay_rate() {
    for kappa in [0.1, 0.25, 1.0] {
        let k = KernelSpec::new(kappa).unwrap();
        let rate = k.decay_rate();
        let slope = match k.branch {
            // oscillatory tail: fit through successive local maxima of |K|
            KernelBranch::Super => {
                let xs: Vec<f64> = (0..=35_000).map(|i| 5.0 + i as f64 * 1e-3).collect();
                let a: Vec<f64> = xs.iter().map(|&x| k.value(x).abs()).collect();
                let peaks: Vec<(f64, f64)> = (1..a.len() - 1)
                    .filter(|&i| a[i] > a[i - 1] && a[i] >= a[i + 1] && a[i] > 1e-300)
                    .map(|i| (xs[i], a[i].ln()))
                    .collect();
                fit_slope(&peaks)
            }
            _ => {
                let pts: Vec<(f64, f64)> = (0..=70)
                    .map(|i| 5.0 + i as f64 * 0.5)
                    .map(|x| (x, k.value(x).abs().ln()))
                    .collect();
                fit_slope(&pts)
            }
        };
        assert!(
            (-slope - rate).abs() <= 0.05 * rate,
            "kappa={kappa}: slope {slope}, rate {rate}"
        );
    }
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
