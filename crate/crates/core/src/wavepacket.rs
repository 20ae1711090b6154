//! Numerical check of the reduction of the second-order operator acting on
//! a slow excited atom to the scalar factor Z.
//!
//! With the switching function g real, g~(q) g~(-q) = |g~(q)|^2 and
//!
//! Z = (2 pi)^2 Int dp0 [T(p0) + T(-p0)] |g~(p0 - 1/lambda_bar_e)|^2
//!   = 4 pi Int du T_s(u) lambda_bar_g G(u - u_e)^2,
//!
//! where G is the cosine transform of g about its center in units of
//! lambda_bar_g. All internal lengths are in units of lambda_bar_g.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{
    integrate_adaptive_points, integrate_real, Interval, NumericsError, QuadOptions,
};
use crate::observables::{z_factor_with_duration, AtomParams, ObservableError, ResonanceWeight};
use crate::selfenergy::{
    t2_bracket, t2_real_at_threshold, t2_real_offset_above_threshold, DimensionlessEnergy,
    NormalizationConstants, SelfEnergyError,
};

/// Largest accepted |T'| width / |T| before the narrow-width reduction is
/// flagged.
pub const REGIME_LIMIT: f64 = 0.1;

/// Largest accepted sigma_k lambda_bar_e (and center_k lambda_bar_e).
pub const PACKET_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WavepacketError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("wavepacket too broad: sigma_k lambda_bar_e = {0:e} (limit {PACKET_LIMIT:e})")]
    PacketTooBroad(f64),
    #[error("wavepacket too fast: center_k lambda_bar_e = {0:e} (limit {PACKET_LIMIT:e})")]
    PacketTooFast(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    SelfEnergy(#[from] SelfEnergyError),
}

#[inline]
fn psi_exponent(t: f64) -> f64 {
    if t <= 0.0 {
        f64::NEG_INFINITY
    } else {
        -1.0 / t
    }
}

/// Smooth step: 0 for t <= 0, 1 for t >= 1, C-infinity in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let (a, b) = (psi_exponent(t), psi_exponent(1.0 - t));
    1.0 / (1.0 + (b - a).exp())
}

/// Derivative of `smooth_step`; a bump on (0, 1) with unit integral.
pub fn smooth_step_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let (a, b) = (psi_exponent(t), psi_exponent(1.0 - t));
    let m = a.max(b);
    let ea = (a - m).exp();
    let eb = (b - m).exp();
    let s = 1.0 - t;
    (a + b - 2.0 * m).exp() * (1.0 / (t * t) + 1.0 / (s * s)) / ((ea + eb) * (ea + eb))
}

/// Ramp frequency beyond which the ramp transform is treated as zero.
pub const RAMP_CUTOFF: f64 = 800.0;

fn tight() -> QuadOptions {
    QuadOptions::with_tols(1e-13, 1e-300)
}

/// Int_0^1 S(t)^2 dt
fn step_square_integral() -> Result<f64, NumericsError> {
    Ok(integrate_real(
        |t| smooth_step(t).powi(2),
        Interval::new(0.0, 1.0)?,
        &tight(),
    )?
    .value
    .re)
}

/// Int_0^1 S'(t)^2 dt
fn step_derivative_square_integral() -> Result<f64, NumericsError> {
    Ok(integrate_real(
        |t| smooth_step_derivative(t).powi(2),
        Interval::new(0.0, 1.0)?,
        &tight(),
    )?
    .value
    .re)
}

/// Cosine transform of the ramp bump about its center:
/// 2 Int_0^{1/2} S'(1/2 + tau) cos(omega tau) dtau.
pub fn ramp_transform(omega: f64) -> f64 {
    let omega = omega.abs();
    if omega > RAMP_CUTOFF {
        return 0.0;
    }
    // trapezoid rule: every derivative of S' vanishes at both ends, so the
    // error decays faster than any power of the node spacing
    let table = ramp_table();
    let h = 0.5 / RAMP_NODES as f64;
    let mut sum = 0.5 * table[0];
    for (j, v) in table.iter().enumerate().skip(1) {
        sum += v * (omega * h * j as f64).cos();
    }
    2.0 * h * sum
}

const RAMP_NODES: usize = 2048;

fn ramp_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let h = 0.5 / RAMP_NODES as f64;
        (0..=RAMP_NODES)
            .map(|j| smooth_step_derivative(0.5 + h * j as f64))
            .collect()
    })
}

/// Switching function: 1 on [0, c t_g], smooth ramps of width c ramp on
/// both sides, 0 outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub t_g: f64,
    pub ramp: f64,
    pub c: f64,
}

impl TestFunction {
    /// Plateau length in metres.
    pub fn plateau(&self) -> f64 {
        self.c * self.t_g
    }

    /// Ramp width in metres.
    pub fn ramp_length(&self) -> f64 {
        self.c * self.ramp
    }

    /// g(x0), x0 in metres.
    pub fn evaluate(&self, x0: f64) -> f64 {
        let (l, a) = (self.plateau(), self.ramp_length());
        if x0 < 0.0 {
            smooth_step((x0 + a) / a)
        } else if x0 > l {
            smooth_step((l + a - x0) / a)
        } else {
            1.0
        }
    }

    /// Int g^2 dx0 in metres.
    pub fn square_integral(&self) -> Result<f64, NumericsError> {
        Ok(self.plateau() + 2.0 * self.ramp_length() * step_square_integral()?)
    }

    /// Effective duration Int g^2 dx0 / c.
    pub fn effective_duration(&self) -> Result<f64, NumericsError> {
        Ok(self.square_integral()? / self.c)
    }

    /// G(q) = Int g(x_c + y) cos(q y) dy with x_c the midpoint, q in 1/m.
    pub fn cosine_transform(&self, q: f64) -> f64 {
        cosine_transform_scaled(self.plateau(), self.ramp_length(), q)
    }

    /// sqrt(Int g'^2 / Int g^2): spectral width of g~ in 1/m.
    pub fn spectral_width(&self) -> Result<f64, NumericsError> {
        let a = self.ramp_length();
        let d2 = 2.0 / a * step_derivative_square_integral()?;
        Ok((d2 / self.square_integral()?).sqrt())
    }
}

/// G for plateau `l` and ramp `a` in any common length unit.
fn cosine_transform_scaled(l: f64, a: f64, q: f64) -> f64 {
    if q == 0.0 {
        return l + a;
    }
    2.0 / q * ramp_transform(q * a) * (0.5 * q * (l + a)).sin()
}

pub fn bump_g(t_g: f64, ramp: f64, c: f64) -> Result<TestFunction, WavepacketError> {
    for (name, value) in [("t_g", t_g), ("ramp", ramp), ("c", c)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(WavepacketError::NonPositive { name, value });
        }
    }
    Ok(TestFunction { t_g, ramp, c })
}

/// (1/sqrt(2 pi)) Int g(x) e^{-i q x} dx, q in 1/m.
pub fn g_fourier(g: &TestFunction, q: f64) -> Complex64 {
    let xc = 0.5 * g.plateau();
    Complex64::from_polar(1.0, -q * xc) * (g.cosine_transform(q) / (2.0 * PI).sqrt())
}

/// Isotropic Gaussian momentum wavepacket, normalized in three dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavepacket {
    pub center_k: f64,
    pub sigma_k: f64,
}

impl Wavepacket {
    pub fn gaussian(center_k: f64, sigma_k: f64) -> Result<Self, WavepacketError> {
        if !(sigma_k > 0.0 && sigma_k.is_finite()) {
            return Err(WavepacketError::NonPositive {
                name: "sigma_k",
                value: sigma_k,
            });
        }
        if !center_k.is_finite() {
            return Err(WavepacketError::NonPositive {
                name: "center_k",
                value: center_k,
            });
        }
        Ok(Self { center_k, sigma_k })
    }

    /// Amplitude at k; the packet is centred at (0, 0, center_k).
    pub fn evaluate(&self, k: [f64; 3]) -> Complex64 {
        let s2 = self.sigma_k * self.sigma_k;
        let d2 = k[0] * k[0] + k[1] * k[1] + (k[2] - self.center_k).powi(2);
        Complex64::new((2.0 * PI * s2).powf(-0.75) * (-d2 / (4.0 * s2)).exp(), 0.0)
    }

    /// Checks the narrow-packet premises of the reduction.
    pub fn check_premise(&self, atom: &AtomParams) -> Result<(), WavepacketError> {
        let le = atom.lambda_bar_e();
        if self.sigma_k * le >= PACKET_LIMIT {
            return Err(WavepacketError::PacketTooBroad(self.sigma_k * le));
        }
        if self.center_k.abs() * le >= PACKET_LIMIT {
            return Err(WavepacketError::PacketTooFast(self.center_k.abs() * le));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZComparison {
    pub z_numerical: Complex64,
    /// closed form at the effective duration Int g^2 / c
    pub z_closed: Complex64,
    pub rel_error: f64,
    pub effective_duration: f64,
    /// closed form at the plateau duration t_g
    pub z_closed_plateau: Complex64,
    pub rel_error_plateau: f64,
    /// closed form with the inverse-u resonance weight, effective duration
    pub z_closed_inverse_u: Complex64,
    /// integral with the factor lambda_bar_e^-1 / |p0| kept inside
    pub z_numerical_dispersion: Complex64,
    /// |T'| width / |T| at resonance
    pub regime_ratio: f64,
    pub regime_ok: bool,
}

fn energy_at(
    u: f64,
    delta_from_threshold: Option<f64>,
) -> Result<DimensionlessEnergy, SelfEnergyError> {
    match delta_from_threshold {
        Some(d) if d > 0.0 => DimensionlessEnergy::near_threshold(d, false),
        _ => DimensionlessEnergy::new(u),
    }
}

fn t2_at(
    u: f64,
    delta_from_threshold: Option<f64>,
    c: &NormalizationConstants,
) -> Result<Complex64, SelfEnergyError> {
    Ok(t2_bracket(energy_at(u, delta_from_threshold)?, c)?.bracket())
}

/// Log and step part of the symmetrized bracket.
fn t2_nonanalytic(
    u: f64,
    delta_from_threshold: Option<f64>,
    c: &NormalizationConstants,
) -> Result<Complex64, SelfEnergyError> {
    let b = t2_bracket(energy_at(u, delta_from_threshold)?, c)?;
    Ok(b.log_term + b.step_term)
}

/// f(u+v) + f(u-v) - 2 f(u) for f = 1/u.
fn second_difference_inv1(u: f64, v: f64) -> f64 {
    2.0 * v * v / (u * (u * u - v * v))
}

/// f(u+v) + f(u-v) - 2 f(u) for f = 1/u^2.
fn second_difference_inv2(u: f64, v: f64) -> f64 {
    let (u2, v2) = (u * u, v * v);
    2.0 * v2 * (3.0 * u2 - v2) / (u2 * (u2 - v2).powi(2))
}

/// f(u+v) + f(u-v) - 2 f(u) for f = 1/u^3.
fn second_difference_inv3(u: f64, v: f64) -> f64 {
    let (u2, v2) = (u * u, v * v);
    (12.0 * u2 * u2 * v2 - 6.0 * u2 * v2 * v2 + 2.0 * v2 * v2 * v2) / (u2 * u * (u2 - v2).powi(3))
}

/// Z from the one-dimensional p0 integral, compared with the closed form.
pub fn z_numerical(
    atom: &AtomParams,
    c: &NormalizationConstants,
    g: &TestFunction,
) -> Result<ZComparison, WavepacketError> {
    let lb = atom.lambda_bar_g();
    let du = atom.delta_u();
    let ue = 1.0 + du;
    let l = g.plateau() / lb;
    let a = g.ramp_length() / lb;

    // bracket of T_s at u_e + v, carrying the offset from threshold exactly
    let t_plus = |v: f64| t2_at(ue + v, Some(du + v), c);
    let t_minus = |v: f64| {
        let off = du - v;
        if off > 0.0 {
            t2_at(ue - v, Some(off), c)
        } else {
            t2_at(ue - v, None, c)
        }
    };
    // resonance value with the real part taken as threshold value plus
    // offset, as in the closed form
    let t0 = {
        let raw = t_plus(0.0)?;
        Complex64::new(
            t2_real_at_threshold(c) + t2_real_offset_above_threshold(du, c),
            raw.im,
        )
    };

    let gsq = |v: f64| cosine_transform_scaled(l, a, v).powi(2);

    // breakpoints: threshold, origin and the negative branch point of u_e - v,
    // plus chunks over the oscillatory core of G^2
    let v_core = 400.0 / a;
    let period = 2.0 * PI / (l + a);
    let chunk = 40.0 * period;
    let mut pts = vec![0.0];
    let n_chunks = ((v_core / chunk).ceil() as usize).clamp(1, 4000);
    let core_end = v_core.min(du);
    for i in 1..=n_chunks {
        let p = core_end * i as f64 / n_chunks as f64;
        pts.push(p);
    }
    for b in [du, ue, ue + 1.0] {
        if b > *pts.last().unwrap() {
            pts.push(b);
        }
    }
    pts.push(f64::INFINITY);

    let scale = t0.norm().max(1e-300);
    let l_eff = g.square_integral()? / lb;
    let z_scale = 2.0 * PI * l_eff * scale;
    let opts = QuadOptions::with_tols(1e-10, 1e-13 * z_scale);

    let n0 = t2_nonanalytic(ue, Some(du), c)?;
    let quad = 11.0 / 6.0 + c.c2;
    let fold = |v: f64, weighted: bool| -> Complex64 {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        let (up, um) = (ue + v, ue - v);
        let off = du - v;
        let minus_delta = if off > 0.0 { Some(off) } else { None };
        let diff = if v < 0.5 * ue {
            // analytic parts differenced in closed form, free of cancellation
            let (np, nm) = match (
                t2_nonanalytic(up, Some(du + v), c),
                t2_nonanalytic(um, minus_delta, c),
            ) {
                (Ok(p), Ok(m)) => (p, m),
                _ => return nan,
            };
            if weighted {
                let nonan = np * (ue / up) + nm * (ue / um) - n0 * 2.0;
                let analytic = ue
                    * ((c.c0 - 2.5) * second_difference_inv1(ue, v)
                        + second_difference_inv3(ue, v));
                nonan + analytic
            } else {
                np + nm - n0 * 2.0 + second_difference_inv2(ue, v) + 2.0 * quad * v * v
            }
        } else {
            let (tp, tm) = match (t_plus(v), t_minus(v)) {
                (Ok(p), Ok(m)) => (p, m),
                _ => return nan,
            };
            if weighted {
                tp * (ue / up) + tm * (ue / um.abs()) - t0 * 2.0
            } else {
                tp + tm - t0 * 2.0
            }
        };
        diff * gsq(v)
    };

    let dev = integrate_adaptive_points(|v| fold(v, false), &pts, &opts)?.value;
    let dev_disp = integrate_adaptive_points(|v| fold(v, true), &pts, &opts)?.value;

    // Int G^2 dv over the real line equals 2 pi l_eff, so the resonance
    // term integrates in closed form and only the deviation is numerical
    let bracket_num = t0 * (2.0 * PI * l_eff) + dev;
    let bracket_disp = t0 * (2.0 * PI * l_eff) + dev_disp;
    let pref = atom.spectral_prefactor() / (2.0 * PI) * lb;
    let z_num = bracket_num * (4.0 * PI * pref);
    let z_disp = bracket_disp * (4.0 * PI * pref);

    let t_eff = g.effective_duration()?;
    let z_closed = z_factor_with_duration(atom, c, ResonanceWeight::Unity, t_eff)?;
    let z_closed_plateau = z_factor_with_duration(atom, c, ResonanceWeight::Unity, g.t_g)?;
    let z_closed_inverse_u = z_factor_with_duration(atom, c, ResonanceWeight::InverseU, t_eff)?;

    // regime: |T'| width / |T|, width in u units
    let h = 1e-3 * du;
    let deriv = (t_plus(h)? - t_minus(h)?) / (2.0 * h);
    let width = g.spectral_width()? * lb;
    let regime_ratio = deriv.norm() * width / scale;

    Ok(ZComparison {
        z_numerical: z_num,
        z_closed,
        rel_error: (z_num - z_closed).norm() / z_closed.norm(),
        effective_duration: t_eff,
        z_closed_plateau,
        rel_error_plateau: (z_num - z_closed_plateau).norm() / z_closed_plateau.norm(),
        z_closed_inverse_u,
        z_numerical_dispersion: z_disp,
        regime_ratio,
        regime_ok: regime_ratio < REGIME_LIMIT,
    })
}

/// As `z_numerical`, after checking the narrow-packet premises.
pub fn z_numerical_for_packet(
    atom: &AtomParams,
    c: &NormalizationConstants,
    g: &TestFunction,
    packet: &Wavepacket,
) -> Result<ZComparison, WavepacketError> {
    packet.check_premise(atom)?;
    z_numerical(atom, c, g)
}

/// Plateau of `periods` optical periods with ramps of one tenth of it.
pub fn test_function_for_periods(
    atom: &AtomParams,
    periods: f64,
) -> Result<TestFunction, WavepacketError> {
    let t_g = periods * 2.0 * PI / atom.omega_eg;
    bump_g(t_g, t_g / 10.0, atom.constants.c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{hydrogen_1s2p_preset, PhysicalConstants};

    #[test]
    fn smooth_step_shape() {
        assert_eq!(smooth_step(-0.1), 0.0);
        assert_eq!(smooth_step(1.2), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        for t in [0.1, 0.3, 0.77] {
            assert!((smooth_step(t) + smooth_step(1.0 - t) - 1.0).abs() < 1e-15);
            let h = 1e-6;
            let fd = (smooth_step(t + h) - smooth_step(t - h)) / (2.0 * h);
            assert!((fd - smooth_step_derivative(t)).abs() < 1e-7);
        }
        let total = integrate_real(
            smooth_step_derivative,
            Interval::new(0.0, 1.0).unwrap(),
            &tight(),
        )
        .unwrap();
        assert!((total.value.re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn bump_values() {
        let g = bump_g(2.0, 0.2, 1.0).unwrap();
        assert_eq!(g.evaluate(1.0), 1.0);
        assert_eq!(g.evaluate(-5.0), 0.0);
        assert_eq!(g.evaluate(10.0), 0.0);
        let direct = integrate_real(
            |x| g.evaluate(x).powi(2),
            Interval::new(-0.2, 2.2).unwrap(),
            &tight(),
        )
        .unwrap();
        let s = g.square_integral().unwrap();
        assert!((direct.value.re - s).abs() < 1e-11);
        assert!((2.0..=2.4).contains(&s));
        assert!(bump_g(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn fourier_zero_and_symmetry() {
        let g = bump_g(2.0, 0.2, 1.0).unwrap();
        let g0 = g_fourier(&g, 0.0);
        assert!((g0.re - 2.2 / (2.0 * PI).sqrt()).abs() < 1e-14);
        for q in [0.7, 3.0, 25.0] {
            let a = g_fourier(&g, q);
            let b = g_fourier(&g, -q);
            assert!((a - b.conj()).norm() < 1e-14);
            // against direct quadrature of the definition
            let pts: Vec<f64> = (0..=40).map(|i| -0.2 + 2.4 * i as f64 / 40.0).collect();
            let direct = integrate_adaptive_points(
                |x| Complex64::from_polar(g.evaluate(x), -q * x),
                &pts,
                &QuadOptions::with_tols(1e-12, 1e-15),
            )
            .unwrap()
            .value
                / (2.0 * PI).sqrt();
            assert!((a - direct).norm() < 1e-11, "{q}: {a} {direct}");
        }
    }

    #[test]
    fn parseval() {
        let (l, a) = (50.0, 5.0);
        let g = bump_g(l, a, 1.0).unwrap();
        let opts = QuadOptions::with_tols(1e-10, 1e-12);
        let mut pts: Vec<f64> = (0..=400).map(|i| 120.0 / a * i as f64 / 400.0).collect();
        pts.push(f64::INFINITY);
        let int = integrate_adaptive_points(
            |v| Complex64::new(cosine_transform_scaled(l, a, v).powi(2), 0.0),
            &pts,
            &opts,
        )
        .unwrap();
        let want = PI * g.square_integral().unwrap();
        assert!(
            (int.value.re / want - 1.0).abs() < 1e-8,
            "{} {}",
            int.value.re,
            want
        );
    }

    #[test]
    fn ramp_transform_decay() {
        let mut prev = ramp_transform(0.0);
        assert!((prev - 1.0).abs() < 1e-14);
        for w in [10.0, 50.0, 200.0] {
            let c = ramp_transform(w);
            assert!(c.abs() < prev.abs());
            prev = c;
        }
        assert!(ramp_transform(0.99 * RAMP_CUTOFF).abs() < 1e-13);
        assert_eq!(ramp_transform(1.01 * RAMP_CUTOFF), 0.0);
    }

    #[test]
    fn ramp_transform_matches_adaptive() {
        for w in [0.0, 1.0, 7.5, 40.0, 150.0, 400.0] {
            let r = integrate_real(
                |t| smooth_step_derivative(t) * (w * (t - 0.5)).cos(),
                Interval::new(0.0, 1.0).unwrap(),
                &QuadOptions::with_tols(1e-12, 1e-14),
            )
            .unwrap();
            assert!((ramp_transform(w) - r.value.re).abs() < 1e-13, "{w}");
        }
    }

    #[test]
    fn closed_second_differences() {
        let (u, v) = (1.3, 0.2);
        let d = |f: &dyn Fn(f64) -> f64| f(u + v) + f(u - v) - 2.0 * f(u);
        assert!((second_difference_inv1(u, v) - d(&|x| 1.0 / x)).abs() < 1e-14);
        assert!((second_difference_inv2(u, v) - d(&|x| x.powi(-2))).abs() < 1e-14);
        assert!((second_difference_inv3(u, v) - d(&|x| x.powi(-3))).abs() < 1e-14);
    }

    #[test]
    fn packet_premise() {
        let atom = hydrogen_1s2p_preset(&PhysicalConstants::CODATA_2018);
        let le = atom.lambda_bar_e();
        let p = Wavepacket::gaussian(0.0, 1e-5 / le).unwrap();
        assert!(p.check_premise(&atom).is_ok());
        let broad = Wavepacket::gaussian(0.0, 1e-2 / le).unwrap();
        assert!(matches!(
            broad.check_premise(&atom),
            Err(WavepacketError::PacketTooBroad(_))
        ));
        let fast = Wavepacket::gaussian(0.5 / le, 1e-5 / le).unwrap();
        assert!(matches!(
            fast.check_premise(&atom),
            Err(WavepacketError::PacketTooFast(_))
        ));
    }

    #[test]
    fn packet_normalized() {
        let p = Wavepacket::gaussian(0.3, 0.5).unwrap();
        // radial integral about the centre
        let r = integrate_real(
            |k| 4.0 * PI * k * k * p.evaluate([0.0, 0.0, 0.3 + k]).norm_sqr(),
            Interval::new(0.0, f64::INFINITY).unwrap(),
            &QuadOptions::with_tols(1e-12, 1e-15),
        )
        .unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-10);
    }
}
