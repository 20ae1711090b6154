//! Switching function, its transform, and Z from the p0 integral.

use std::f64::consts::PI;

use causal_shift::observables::{
    gamma_exact, gamma_leading, hydrogen_1s2p_preset, solve_normalization_with, AtomParams,
    ExtractionOptions, PhysicalConstants, ResonanceWeight,
};
use causal_shift::selfenergy::NormalizationConstants;
use causal_shift::wavepacket::{
    bump_g, g_fourier, test_function_for_periods, z_numerical, z_numerical_for_packet,
    TestFunction, Wavepacket, WavepacketError,
};

const C: f64 = 299_792_458.0;

fn h() -> AtomParams {
    hydrogen_1s2p_preset(&PhysicalConstants::CODATA_2018)
}

fn synthetic(du: f64) -> AtomParams {
    h().with_delta_u(du).unwrap()
}

fn unity_constants(atom: &AtomParams) -> NormalizationConstants {
    solve_normalization_with(atom, ResonanceWeight::Unity, &ExtractionOptions::default())
        .unwrap()
        .constants
}

/// Composite Simpson rule over [lo, hi] with n (even) panels.
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        s += f(lo + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn support(g: &TestFunction) -> (f64, f64) {
    (-g.ramp_length(), g.plateau() + g.ramp_length())
}

#[test]
fn bump_shape() {
    let g = bump_g(1e-9, 1e-10, C).unwrap();
    assert_eq!(g.evaluate(0.5 * g.plateau()), 1.0);
    assert_eq!(g.evaluate(0.0), 1.0);
    assert_eq!(g.evaluate(g.plateau()), 1.0);
    assert_eq!(g.evaluate(-2.0 * g.ramp_length()), 0.0);
    assert_eq!(g.evaluate(g.plateau() + 1.5 * g.ramp_length()), 0.0);
    let (lo, hi) = support(&g);
    for i in 0..200 {
        let x = lo + (hi - lo) * i as f64 / 199.0;
        let v = g.evaluate(x);
        assert!((0.0..=1.0).contains(&v));
    }
    for (name, args) in [("t_g", (0.0, 1.0)), ("ramp", (1.0, -1.0))] {
        match bump_g(args.0, args.1, C) {
            Err(WavepacketError::NonPositive { name: n, .. }) => assert_eq!(n, name),
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn square_integral_bounds_and_quadrature() {
    for (t_g, ramp) in [(1e-9, 1e-10), (2e-12, 5e-13), (1.0, 0.3)] {
        let g = bump_g(t_g, ramp, C).unwrap();
        let closed = g.square_integral().unwrap();
        assert!(closed >= C * t_g && closed <= C * (t_g + 2.0 * ramp));
        let (lo, hi) = support(&g);
        let num = simpson(|x| g.evaluate(x).powi(2), lo, hi, 20_000);
        assert!((num / closed - 1.0).abs() < 1e-8, "{num} vs {closed}");
        assert!((g.effective_duration().unwrap() - closed / C).abs() <= 1e-15 * closed / C);
    }
}

#[test]
fn fourier_transform_properties() {
    let g = bump_g(1e-12, 1e-13, C).unwrap();
    let (lo, hi) = support(&g);
    let area = simpson(|x| g.evaluate(x), lo, hi, 20_000);
    let g0 = g_fourier(&g, 0.0);
    assert!((g0.re - area / (2.0 * PI).sqrt()).abs() < 1e-9 * g0.re);
    assert!(g0.im.abs() < 1e-15 * g0.re);
    assert!((g0.re / (C * 1.1e-12 / (2.0 * PI).sqrt()) - 1.0).abs() < 1e-12);

    for q in [1e2, 3.3e3, 1e4, 5e4] {
        let re = simpson(|x| g.evaluate(x) * (q * x).cos(), lo, hi, 40_000) / (2.0 * PI).sqrt();
        let im = -simpson(|x| g.evaluate(x) * (q * x).sin(), lo, hi, 40_000) / (2.0 * PI).sqrt();
        let v = g_fourier(&g, q);
        let scale = g0.re;
        assert!((v.re - re).abs() < 1e-8 * scale, "q = {q}");
        assert!((v.im - im).abs() < 1e-8 * scale, "q = {q}");
        assert_eq!(g_fourier(&g, -q), v.conj());
    }

    // faster than any power: each doubling of q gains much more than the
    // 1/q of a jump discontinuity
    let at = |m: f64| g_fourier(&g, m / g.ramp_length()).norm() / g0.norm();
    assert!(at(100.0) < 1e-9, "{}", at(100.0));
    assert!(at(200.0) < 1e-10, "{}", at(200.0));
    assert!(at(200.0) / at(100.0) < 0.1);
}

#[test]
fn wavepacket_is_normalized_and_checked() {
    let a = h();
    let le = a.lambda_bar_e();
    let sigma = 1e-5 / le;
    let p = Wavepacket::gaussian(0.0, sigma).unwrap();
    // radial integral of |phi|^2 over k in [0, 12 sigma]
    let total = simpson(
        |k| 4.0 * PI * k * k * p.evaluate([0.0, 0.0, k]).norm_sqr(),
        0.0,
        12.0 * sigma,
        4000,
    );
    assert!((total - 1.0).abs() < 1e-10, "{total}");
    assert!(p.check_premise(&a).is_ok());
    let broad = Wavepacket::gaussian(0.0, 2e-3 / le).unwrap();
    assert!(matches!(
        broad.check_premise(&a),
        Err(WavepacketError::PacketTooBroad(_))
    ));
    let fast = Wavepacket::gaussian(5e-3 / le, sigma).unwrap();
    assert!(matches!(
        fast.check_premise(&a),
        Err(WavepacketError::PacketTooFast(_))
    ));
    assert!(Wavepacket::gaussian(0.0, 0.0).is_err());
}

#[test]
fn result_does_not_depend_on_packet_width() {
    let a = synthetic(1e-2);
    let c = unity_constants(&a);
    let g = test_function_for_periods(&a, 100.0).unwrap();
    let le = a.lambda_bar_e();
    let z1 =
        z_numerical_for_packet(&a, &c, &g, &Wavepacket::gaussian(0.0, 1e-6 / le).unwrap()).unwrap();
    let z2 =
        z_numerical_for_packet(&a, &c, &g, &Wavepacket::gaussian(0.0, 5e-4 / le).unwrap()).unwrap();
    assert_eq!(z1, z2);
    assert!(
        z_numerical_for_packet(&a, &c, &g, &Wavepacket::gaussian(0.0, 1e-2 / le).unwrap()).is_err()
    );
}

#[test]
fn convergence_over_three_decades() {
    let a = synthetic(1e-2);
    let c = unity_constants(&a);
    let errs: Vec<f64> = [10.0, 100.0, 1000.0, 10_000.0]
        .iter()
        .map(|&n| {
            let g = test_function_for_periods(&a, n).unwrap();
            z_numerical(&a, &c, &g).unwrap().rel_error
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    // second order in the inverse plateau length
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log10();
        assert!((order - 2.0).abs() < 0.1, "{errs:?}");
    }
    assert!(errs[3] <= 1e-2);
}

#[test]
fn long_plateau_meets_tolerance() {
    let a = synthetic(1e-2);
    let c = unity_constants(&a);
    let g = test_function_for_periods(&a, 1e6).unwrap();
    let z = z_numerical(&a, &c, &g).unwrap();
    assert!(z.rel_error <= 1e-2, "{}", z.rel_error);
    assert!(z.regime_ok, "{}", z.regime_ratio);
}

#[test]
fn imaginary_part_reproduces_decay_rate() {
    let a = synthetic(1e-3);
    let c = unity_constants(&a);
    let g = test_function_for_periods(&a, 1e4).unwrap();
    let z = z_numerical(&a, &c, &g).unwrap();
    let rate = z.z_numerical.im / z.effective_duration;
    let lead = gamma_leading(&a);
    assert!((rate / lead - 1.0).abs() < 0.02, "{rate} vs {lead}");
    let exact = gamma_exact(&a, ResonanceWeight::Unity);
    assert!((rate / exact - 1.0).abs() < 1e-4, "{rate} vs {exact}");
}

#[test]
fn z_scales_with_dipole_squared() {
    let a = synthetic(1e-2);
    let c = unity_constants(&a);
    let g = test_function_for_periods(&a, 100.0).unwrap();
    let z1 = z_numerical(&a, &c, &g).unwrap().z_numerical;
    let b = a.with_dipole(2.0 * a.d_eg_abs).unwrap();
    let z2 = z_numerical(&b, &c, &g).unwrap().z_numerical;
    assert!((z2.re / z1.re - 4.0).abs() < 1e-12);
    assert!((z2.im / z1.im - 4.0).abs() < 1e-12);
}

#[test]
fn comparison_fields_are_consistent() {
    let a = synthetic(1e-2);
    let c = unity_constants(&a);
    let g = test_function_for_periods(&a, 1000.0).unwrap();
    let z = z_numerical(&a, &c, &g).unwrap();
    let rel = (z.z_numerical - z.z_closed).norm() / z.z_closed.norm();
    assert!((rel - z.rel_error).abs() <= 1e-15 * rel.max(1e-300) + 1e-300);
    assert!(z.effective_duration > g.t_g && z.effective_duration < g.t_g + 2.0 * g.ramp);
    // the alternative w_p convention differs at O(du)
    let alt = (z.z_numerical_dispersion - z.z_numerical).norm() / z.z_numerical.norm();
    assert!(alt < 10.0 * a.delta_u(), "{alt}");
}
