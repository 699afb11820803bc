use exceptional::ep_finder::{find_oscillator_ep, NewtonOptions};
use exceptional::linalg::{right_null_vector, spectrum, vec_norm};
use exceptional::oscillator::{
    amplitude_ratio_forms, build_m, build_m0_m1, ep_amplitude_ratio, frequency_sweep, normalized_secular_residuals,
    physical_from_raw, raw_from_physical, response_at, secular_det, secular_det_derivative, secular_polynomial,
    stationary_response, DriveSpec, FrequencyConvention, OscillatorError, OscillatorParams,
};
use exceptional::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn reference_oscillators() -> OscillatorParams {
    OscillatorParams::new(10.0, 10.0, 0.2, 0.1, 1.005, 0.00075)
}

/// Reference parameters moved onto the converged EP, with its physical frequency.
fn oscillators_at_ep() -> (OscillatorParams, Complex64) {
    let base = reference_oscillators().with_coupling(0.0, 0.0);
    let ep = find_oscillator_ep(&base, 1.0, 0.001, &NewtonOptions::default()).unwrap();
    (
        base.with_coupling(ep.params[0].re, ep.params[1].re),
        physical_from_raw(ep.frequency),
    )
}

#[test]
fn m_blocks_and_decomposition() {
    let p = OscillatorParams::new(2.0, 7.0, 0.0, 0.0, 0.0, 0.0);
    let ev = spectrum(&build_m(&p));
    for target in [c(0.0, 2.0), c(0.0, -2.0), c(0.0, 7.0), c(0.0, -7.0)] {
        assert!(ev.iter().any(|e| (e - target).norm() < 1e-12), "{ev:?}");
    }

    let p = reference_oscillators();
    let (m0, m1) = build_m0_m1(&p);
    let rebuilt = &m0 + &m1.scale(c(p.f, 0.0));
    assert_eq!(rebuilt, build_m(&p));
    for i in 0..4 {
        assert_eq!(m1.row(i).iter().sum::<Complex64>(), c(0.0, 0.0));
    }
    assert_ne!(m1, m1.transpose());
    // g only enters M0
    let (m0_other, m1_other) = build_m0_m1(&p.with_coupling(3.0, p.g));
    assert_eq!(m0, m0_other);
    assert_eq!(m1, m1_other);
}

#[test]
fn secular_roots_include_the_ep() {
    let (p, w) = oscillators_at_ep();
    assert!((w.re - 10.05).abs() < 0.01 && (w.im + 0.15).abs() < 0.01, "{w}");
    let roots = secular_polynomial(&p).roots().unwrap();
    let raw = raw_from_physical(w);
    let near = roots.iter().filter(|r| (*r - raw).norm() < 1e-4).count();
    assert_eq!(near, 2, "{roots:?}");
}

#[test]
fn uncoupled_secular_roots_are_damped_frequencies() {
    let p = OscillatorParams::new(3.0, 5.0, 0.3, 0.2, 0.0, 0.0);
    let roots = secular_polynomial(&p).roots().unwrap();
    for (w, k) in [(3.0f64, 0.3f64), (5.0, 0.2)] {
        let s = (w * w - k * k).sqrt();
        for target in [c(s, k), c(-s, k)] {
            assert!(roots.iter().any(|r| (r - target).norm() < 1e-12), "{roots:?}");
            assert!(secular_det_derivative(&p, target).norm() > 1e-3);
        }
    }
}

#[test]
fn direct_determinant_matches_polynomial() {
    let p = reference_oscillators();
    let poly = secular_polynomial(&p);
    for w in [c(0.0, 0.0), c(9.7, -0.4), c(-3.0, 2.5), c(10.05, -0.15)] {
        let direct = secular_det(&p, w);
        assert!((direct - poly.eval(w)).norm() <= 1e-12 * poly.magnitude_at(w), "{w}");
    }
}

#[test]
fn derivative_matches_central_difference() {
    let p = reference_oscillators();
    for w in [c(9.7, -0.4), c(1.0, 1.0), c(-12.0, 0.3)] {
        let h = 1e-6;
        let fd = (secular_det(&p, w + h) - secular_det(&p, w - h)) / (2.0 * h);
        let exact = secular_det_derivative(&p, w);
        assert!((fd - exact).norm() <= 1e-5 * exact.norm(), "{fd} vs {exact}");
    }
}

#[test]
fn both_conditions_hold_at_the_ep() {
    let (p, w) = oscillators_at_ep();
    let (a, b) = normalized_secular_residuals(&p, raw_from_physical(w));
    assert!(a <= 1e-8 && b <= 1e-8, "{a:e} {b:e}");
}

#[test]
fn amplitude_ratio_at_the_ep() {
    let (p, w) = oscillators_at_ep();
    let r = ep_amplitude_ratio(&p, w).unwrap();
    assert!((r.re - 0.0049).abs() < 0.005 && (r.im - 1.0).abs() < 0.005, "{r}");
    let (first, second) = amplitude_ratio_forms(&p, w);
    assert!((first - second).norm() <= 1e-6 * first.norm());
    let v = right_null_vector(&build_m(&p), I * raw_from_physical(w));
    assert!((v[2] / v[3] - r).norm() <= 1e-6 * r.norm());
    assert!((v[0] / v[1] - r).norm() <= 1e-6 * r.norm());
}

#[test]
fn amplitude_ratio_rejects_points_off_the_ep() {
    let (p, w) = oscillators_at_ep();
    assert!(matches!(
        ep_amplitude_ratio(&p, w + 0.01),
        Err(OscillatorError::NotAnEp { .. })
    ));
}

#[test]
fn ratio_near_the_ep_ignores_the_drive() {
    let (p, w) = oscillators_at_ep();
    let target = ep_amplitude_ratio(&p, w).unwrap();
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..3 {
        let c1 = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let c2 = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let probe = w + Complex64::from_polar(1e-4, rng.gen_range(0.0..std::f64::consts::TAU));
        let r = response_at(&p, c1, c2, raw_from_physical(probe)).unwrap();
        assert!((r.q1 / r.q2 - target).norm() <= 1e-2, "{}", r.q1 / r.q2);
    }
}

#[test]
fn uncoupled_undamped_response_closed_form() {
    let p = OscillatorParams::new(3.0, 5.0, 0.0, 0.0, 0.0, 0.0);
    let drive = DriveSpec {
        c1: c(0.5, -1.0),
        c2: c(2.0, 0.0),
        omega: 1.2,
    };
    let r = stationary_response(&p, &drive, FrequencyConvention::Physical).unwrap();
    assert!((r.q1 - drive.c1 / (9.0 - 1.44)).norm() < 1e-13);
    assert!((r.q2 - drive.c2 / (25.0 - 1.44)).norm() < 1e-13);
}

#[test]
fn zero_drive_and_pole_are_errors() {
    let p = OscillatorParams::new(3.0, 5.0, 0.0, 0.0, 0.0, 0.0);
    let zero = DriveSpec {
        c1: c(0.0, 0.0),
        c2: c(0.0, 0.0),
        omega: 1.0,
    };
    assert_eq!(
        stationary_response(&p, &zero, FrequencyConvention::Physical),
        Err(OscillatorError::ZeroDrive)
    );
    let pole = DriveSpec {
        c1: c(1.0, 0.0),
        c2: c(0.0, 0.0),
        omega: 3.0,
    };
    assert!(matches!(
        stationary_response(&p, &pole, FrequencyConvention::Physical),
        Err(OscillatorError::NearSingular { .. })
    ));
}

#[test]
fn drive_i_1_keeps_q1_over_q2_near_i() {
    let (p, _) = oscillators_at_ep();
    let sweep = frequency_sweep(&p, I, c(1.0, 0.0), (9.5, 10.6), 1101, FrequencyConvention::Physical).unwrap();
    for s in &sweep {
        assert!((s.abs_q1 / s.abs_q2 - 1.0).abs() < 0.05, "{s:?}");
    }
    // for this drive the ratio is close to +i through the resonance
    let peak = sweep.iter().max_by(|a, b| a.abs_q1.total_cmp(&b.abs_q1)).unwrap();
    assert!((peak.phase_diff.to_degrees() - 90.0).abs() < 5.0, "{peak:?}");
}

#[test]
fn drive_minus_i_1_moduli_differ() {
    let (p, _) = oscillators_at_ep();
    let sweep = frequency_sweep(&p, -I, c(1.0, 0.0), (9.5, 10.6), 1101, FrequencyConvention::Physical).unwrap();
    let dev = sweep
        .iter()
        .map(|s| (s.abs_q1 / s.abs_q2 - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(dev > 0.2, "{dev}");
}

#[test]
fn sweep_points_solve_the_system() {
    let (p, _) = oscillators_at_ep();
    let (c1, c2) = (c(0.2, 0.9), c(-0.4, 0.1));
    for k in 0..=110 {
        let omega = 9.5 + 0.01 * k as f64;
        let r = stationary_response(&p, &DriveSpec { c1, c2, omega }, FrequencyConvention::Physical).unwrap();
        assert!(r.residual <= 1e-10 * vec_norm(&[c1, c2]));
        let iw = I * r.raw_omega;
        assert!((r.p1 - iw * r.q1).norm() <= 1e-10 * r.p1.norm());
        assert!((r.p2 - iw * r.q2).norm() <= 1e-10 * r.p2.norm());
    }
}

#[test]
fn one_sided_drive_reaches_the_other_oscillator() {
    let p = reference_oscillators();
    let r = stationary_response(
        &p,
        &DriveSpec {
            c1: c(1.0, 0.0),
            c2: c(0.0, 0.0),
            omega: 10.0,
        },
        FrequencyConvention::Physical,
    )
    .unwrap();
    assert!(r.q2.norm() > 1e-3);
}

#[test]
fn sweep_phases_are_continuous() {
    let (p, _) = oscillators_at_ep();
    let sweep = frequency_sweep(&p, -I, c(1.0, 0.0), (9.5, 10.6), 1101, FrequencyConvention::Physical).unwrap();
    for w in sweep.windows(2) {
        assert!((w[1].arg_q1 - w[0].arg_q1).abs() < 1.0);
        assert!((w[1].arg_q2 - w[0].arg_q2).abs() < 1.0);
        assert!((w[1].phase_diff - w[0].phase_diff).abs() < 1.0);
    }
}

#[test]
fn mirror_frequency_is_an_ep_for_real_coupling() {
    // a real matrix has a conjugate-symmetric spectrum, so the EP reappears
    // at -conj(w) with the same f
    let (p, w) = oscillators_at_ep();
    let (a, b) = normalized_secular_residuals(&p, raw_from_physical(-w.conj()));
    assert!(a <= 1e-8 && b <= 1e-8, "{a:e} {b:e}");
}

#[test]
fn real_part_splitting_is_a_square_root_cusp() {
    let (p, w) = oscillators_at_ep();
    // physical frequencies of the pair nearest the EP
    let split = |g: f64| {
        let mut ws: Vec<Complex64> = spectrum(&build_m(&p.with_coupling(p.f, g)))
            .iter()
            .map(|x| I * x)
            .collect();
        ws.sort_by(|a, b| (a - w).norm().total_cmp(&(b - w).norm()));
        (ws[0].re - ws[1].re).abs()
    };
    let mut fitted = false;
    for side in [-1.0, 1.0] {
        let pts: Vec<(f64, f64)> = (0..7)
            .map(|k| {
                let d = p.g * 10f64.powf(-2.0 - 0.5 * k as f64);
                (d.ln(), split(p.g + side * d))
            })
            .collect();
        if pts.iter().any(|(_, s)| *s < 1e-9) {
            continue;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope - 0.5).abs() <= 0.02, "side {side}: slope {slope}");
        fitted = true;
    }
    assert!(fitted);
}
