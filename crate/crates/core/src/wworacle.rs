//! Weisskopf-Wigner oracle: an excited two-level atom coupled to a finite
//! grid of field modes, integrated in the rotating frame of the transition.
//!
//! Internally time is measured in units of 1/gamma and frequencies in units
//! of gamma, with gamma the golden-rule target rate; SI units are restored
//! at the boundary.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{linear_regression, NumericsError};
use crate::observables::{gamma_leading, AtomParams};

/// Smallest accepted bandwidth in units of gamma.
pub const MIN_BANDWIDTH: f64 = 40.0;
/// Smallest accepted mode count for `build_grid`.
pub const MIN_MODES: usize = 1000;
/// Largest accepted mode spacing in units of gamma.
pub const MAX_SPACING: f64 = 0.1;
/// Largest accepted dt times half the largest |detuning|.
pub const MAX_PHASE_STEP: f64 = 0.1;
/// Largest accepted norm drift.
pub const NORM_TOLERANCE: f64 = 1e-6;
/// Largest accepted rms residual of the log-amplitude fit.
pub const FIT_RESIDUAL_LIMIT: f64 = 1e-2;

pub const DEFAULT_BANDWIDTH: f64 = 200.0;
pub const DEFAULT_MODES: usize = 4000;
pub const DEFAULT_DT: f64 = 5e-4;
pub const DEFAULT_T_END: f64 = 6.0;
/// Default sampling interval of stored states.
pub const DEFAULT_SAMPLE_INTERVAL: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WwError {
    #[error("bandwidth {bandwidth_gamma} gamma below the minimum {MIN_BANDWIDTH} gamma")]
    BandwidthTooSmall { bandwidth_gamma: f64 },
    #[error("{n_modes} modes below the minimum {MIN_MODES}")]
    TooFewModes { n_modes: usize },
    #[error("mode spacing {spacing_gamma} gamma exceeds {MAX_SPACING} gamma")]
    UnderResolved { spacing_gamma: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(
        "time step {dt} s too coarse: dt * max|detuning| / 2 = {phase} (limit {MAX_PHASE_STEP})"
    )]
    StepTooCoarse { dt: f64, phase: f64 },
    #[error("invalid time parameters: t_end = {t_end}, dt = {dt}")]
    InvalidTime { t_end: f64, dt: f64 },
    #[error("norm drift {drift:e} exceeds {NORM_TOLERANCE:e}")]
    NormDrift { drift: f64 },
    #[error("trace does not cover three decay times (min |c_e|^2 = {min_population})")]
    TraceTooShort { min_population: f64 },
    #[error("decay fit residual {residual:e} exceeds {limit:e}")]
    FitResidual { residual: f64, limit: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Field modes seen by the atom.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    /// mode frequencies, rad/s, strictly increasing
    pub frequencies: Vec<f64>,
    /// single-mode couplings g_k, rad/s
    pub couplings: Vec<f64>,
    /// modes per rad/s
    pub density: f64,
    /// target rate used for calibration and internal units, 1/s
    pub gamma: f64,
}

impl ModeGrid {
    /// Grid from explicit parts; validates ordering and finiteness only.
    pub fn from_parts(
        frequencies: Vec<f64>,
        couplings: Vec<f64>,
        density: f64,
        gamma: f64,
    ) -> Result<Self, WwError> {
        if frequencies.is_empty() || frequencies.len() != couplings.len() {
            return Err(WwError::InvalidGrid(format!(
                "{} frequencies, {} couplings",
                frequencies.len(),
                couplings.len()
            )));
        }
        if frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(WwError::InvalidGrid(
                "frequencies not strictly increasing".into(),
            ));
        }
        if frequencies.iter().chain(&couplings).any(|v| !v.is_finite()) {
            return Err(WwError::InvalidGrid("non-finite entry".into()));
        }
        if !(density > 0.0 && density.is_finite() && gamma > 0.0 && gamma.is_finite()) {
            return Err(WwError::InvalidGrid(format!(
                "density {density}, gamma {gamma}"
            )));
        }
        Ok(Self {
            frequencies,
            couplings,
            density,
            gamma,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.frequencies.len()
    }

    /// Mean spacing in rad/s; infinite for a single mode.
    pub fn spacing(&self) -> f64 {
        let n = self.n_modes();
        if n < 2 {
            return f64::INFINITY;
        }
        (self.frequencies[n - 1] - self.frequencies[0]) / (n - 1) as f64
    }

    /// Recurrence time 2 pi / spacing, s.
    pub fn revival_time(&self) -> f64 {
        2.0 * PI / self.spacing()
    }

    /// Golden-rule rate 2 pi density g^2 from the coupling nearest `omega`.
    pub fn golden_rule_rate(&self, omega: f64) -> f64 {
        let i = self
            .frequencies
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - omega).abs().total_cmp(&(b.1 - omega).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        2.0 * PI * self.density * self.couplings[i].powi(2)
    }
}

/// Uniform grid of `n_modes` centred on the transition, flat couplings
/// calibrated to the leading decay rate.
pub fn build_grid(atom: &AtomParams, bandwidth: f64, n_modes: usize) -> Result<ModeGrid, WwError> {
    let gamma = gamma_leading(atom);
    let bw = bandwidth / gamma;
    if !(bw >= MIN_BANDWIDTH) {
        return Err(WwError::BandwidthTooSmall {
            bandwidth_gamma: bw,
        });
    }
    if n_modes < MIN_MODES {
        return Err(WwError::TooFewModes { n_modes });
    }
    let spacing = bandwidth / (n_modes - 1) as f64;
    if spacing / gamma > MAX_SPACING {
        return Err(WwError::UnderResolved {
            spacing_gamma: spacing / gamma,
        });
    }
    let lo = atom.omega_eg - 0.5 * bandwidth;
    let frequencies = (0..n_modes).map(|i| lo + spacing * i as f64).collect();
    let density = n_modes as f64 / bandwidth;
    let g = (gamma / (2.0 * PI * density)).sqrt();
    ModeGrid::from_parts(frequencies, vec![g; n_modes], density, gamma)
}

/// Grid spanning detunings [delta_min, delta_max] (rad/s) with the given
/// spacing; couplings calibrated to the leading decay rate.
pub fn build_grid_asymmetric(
    atom: &AtomParams,
    delta_min: f64,
    delta_max: f64,
    spacing: f64,
) -> Result<ModeGrid, WwError> {
    let gamma = gamma_leading(atom);
    if !(delta_min < 0.0 && delta_max > 0.0 && spacing > 0.0) {
        return Err(WwError::InvalidGrid(format!(
            "detunings [{delta_min}, {delta_max}], spacing {spacing}"
        )));
    }
    if spacing / gamma > MAX_SPACING {
        return Err(WwError::UnderResolved {
            spacing_gamma: spacing / gamma,
        });
    }
    let n_lo = (-delta_min / spacing).round() as i64;
    let n_hi = (delta_max / spacing).round() as i64;
    let frequencies: Vec<f64> = (-n_lo..=n_hi)
        .map(|i| atom.omega_eg + spacing * i as f64)
        .collect();
    let density = 1.0 / spacing;
    let g = (gamma / (2.0 * PI * density)).sqrt();
    let n = frequencies.len();
    ModeGrid::from_parts(frequencies, vec![g; n], density, gamma)
}

/// Amplitudes in the interaction picture.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    pub c_e: Complex64,
    pub c_k: Vec<Complex64>,
    /// s
    pub t: f64,
}

impl AmplitudeState {
    pub fn norm_sqr(&self) -> f64 {
        self.c_e.norm_sqr() + self.c_k.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}

/// Excited-state amplitude samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayTrace {
    /// s
    pub t: Vec<f64>,
    pub c_e: Vec<Complex64>,
    pub max_norm_drift: f64,
}

impl DecayTrace {
    pub fn from_states(states: &[AmplitudeState]) -> Self {
        let max_norm_drift = states
            .iter()
            .map(|s| (s.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max);
        Self {
            t: states.iter().map(|s| s.t).collect(),
            c_e: states.iter().map(|s| s.c_e).collect(),
            max_norm_drift,
        }
    }

    pub fn population(&self) -> Vec<f64> {
        self.c_e.iter().map(|c| c.norm_sqr()).collect()
    }
}

fn check_time(grid: &ModeGrid, atom: &AtomParams, t_end: f64, dt: f64) -> Result<(), WwError> {
    if !(t_end > 0.0 && dt > 0.0 && t_end.is_finite() && dt.is_finite() && dt <= t_end) {
        return Err(WwError::InvalidTime { t_end, dt });
    }
    let max_det = grid
        .frequencies
        .iter()
        .map(|w| (w - atom.omega_eg).abs())
        .fold(0.0, f64::max);
    let phase = dt * max_det / 2.0;
    if phase >= MAX_PHASE_STEP {
        return Err(WwError::StepTooCoarse { dt, phase });
    }
    Ok(())
}

/// Split-step propagator: exact detuning phases for half steps around an
/// exact rotation between the excited state and the bright mode
/// sum_k g_k |k> / Omega. Every factor is unitary.
struct Propagator {
    half_phase: Vec<Complex64>,
    /// g_k / Omega
    bright: Vec<f64>,
    cos: f64,
    sin: f64,
}

impl Propagator {
    fn new(detunings: &[f64], couplings: &[f64], dt: f64) -> Self {
        let omega = couplings.iter().map(|g| g * g).sum::<f64>().sqrt();
        let half_phase = detunings
            .iter()
            .map(|d| Complex64::from_polar(1.0, -d * dt / 2.0))
            .collect();
        let bright = if omega > 0.0 {
            couplings.iter().map(|g| g / omega).collect()
        } else {
            vec![0.0; couplings.len()]
        };
        Self {
            half_phase,
            bright,
            cos: (omega * dt).cos(),
            sin: (omega * dt).sin(),
        }
    }

    fn step(&self, c_e: &mut Complex64, a: &mut [Complex64]) {
        for (x, p) in a.iter_mut().zip(&self.half_phase) {
            *x *= p;
        }
        let b: Complex64 = a.iter().zip(&self.bright).map(|(x, w)| x * w).sum();
        let i = Complex64::i();
        let e_new = *c_e * self.cos - i * self.sin * b;
        let b_new = b * self.cos - i * self.sin * *c_e;
        let db = b_new - b;
        for (x, w) in a.iter_mut().zip(&self.bright) {
            *x += db * w;
        }
        *c_e = e_new;
        for (x, p) in a.iter_mut().zip(&self.half_phase) {
            *x *= p;
        }
    }
}

/// Integrates from c_e = 1 to `t_end` (s) with step `dt` (s), storing states
/// every `DEFAULT_SAMPLE_INTERVAL / gamma`.
pub fn evolve(
    grid: &ModeGrid,
    atom: &AtomParams,
    t_end: f64,
    dt: f64,
) -> Result<Vec<AmplitudeState>, WwError> {
    let stride = ((DEFAULT_SAMPLE_INTERVAL / grid.gamma / dt).round() as usize).max(1);
    evolve_with_stride(grid, atom, t_end, dt, stride)
}

/// As `evolve`, storing every `stride` steps.
pub fn evolve_with_stride(
    grid: &ModeGrid,
    atom: &AtomParams,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Vec<AmplitudeState>, WwError> {
    check_time(grid, atom, t_end, dt)?;
    let stride = stride.max(1);
    let gamma = grid.gamma;
    let detunings: Vec<f64> = grid
        .frequencies
        .iter()
        .map(|w| (w - atom.omega_eg) / gamma)
        .collect();
    let couplings: Vec<f64> = grid.couplings.iter().map(|g| g / gamma).collect();
    let dt_s = dt * gamma;
    let steps = (t_end / dt).round() as usize;
    let prop = Propagator::new(&detunings, &couplings, dt_s);

    let mut c_e = Complex64::new(1.0, 0.0);
    let mut a = vec![Complex64::new(0.0, 0.0); detunings.len()];
    let snapshot = |c_e: Complex64, a: &[Complex64], n: usize| {
        let tau = n as f64 * dt_s;
        // Schroedinger-frame mode amplitudes to the interaction picture
        let c_k = a
            .iter()
            .zip(&detunings)
            .map(|(x, d)| x * Complex64::from_polar(1.0, d * tau))
            .collect();
        AmplitudeState {
            c_e,
            c_k,
            t: tau / gamma,
        }
    };
    let mut states = vec![snapshot(c_e, &a, 0)];
    for n in 1..=steps {
        prop.step(&mut c_e, &mut a);
        if n % stride == 0 || n == steps {
            let s = snapshot(c_e, &a, n);
            let drift = (s.norm_sqr() - 1.0).abs();
            if drift > NORM_TOLERANCE {
                return Err(WwError::NormDrift { drift });
            }
            states.push(s);
        }
    }
    Ok(states)
}

/// Excited-amplitude trace only, without storing mode amplitudes.
pub fn evolve_trace(
    grid: &ModeGrid,
    atom: &AtomParams,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<DecayTrace, WwError> {
    check_time(grid, atom, t_end, dt)?;
    let stride = stride.max(1);
    let gamma = grid.gamma;
    let detunings: Vec<f64> = grid
        .frequencies
        .iter()
        .map(|w| (w - atom.omega_eg) / gamma)
        .collect();
    let couplings: Vec<f64> = grid.couplings.iter().map(|g| g / gamma).collect();
    let dt_s = dt * gamma;
    let steps = (t_end / dt).round() as usize;
    let prop = Propagator::new(&detunings, &couplings, dt_s);
    let mut c_e = Complex64::new(1.0, 0.0);
    let mut a = vec![Complex64::new(0.0, 0.0); detunings.len()];
    let mut trace = DecayTrace {
        t: vec![0.0],
        c_e: vec![c_e],
        max_norm_drift: 0.0,
    };
    for n in 1..=steps {
        prop.step(&mut c_e, &mut a);
        if n % stride == 0 || n == steps {
            let norm = c_e.norm_sqr() + a.iter().map(|x| x.norm_sqr()).sum::<f64>();
            let drift = (norm - 1.0).abs();
            if drift > NORM_TOLERANCE {
                return Err(WwError::NormDrift { drift });
            }
            trace.max_norm_drift = trace.max_norm_drift.max(drift);
            trace.t.push(n as f64 * dt_s / gamma);
            trace.c_e.push(c_e);
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// 1/s
    pub rate: f64,
    /// rad/s; c_e ~ exp(-i shift t - rate t / 2)
    pub shift: f64,
    /// rms residual of the log-population fit
    pub residual: f64,
    /// fit window, s
    pub t_lo: f64,
    pub t_hi: f64,
}

/// Fits ln|c_e|^2 and arg c_e over the window where |c_e|^2 falls from
/// e^-1 to e^-5 (or to the end of the trace, which must reach e^-3).
pub fn fit_decay(trace: &DecayTrace) -> Result<DecayFit, WwError> {
    let pop = trace.population();
    let min_pop = pop.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min_pop <= (-3.0f64).exp()) {
        return Err(WwError::TraceTooShort {
            min_population: min_pop,
        });
    }
    let start = pop.iter().position(|&p| p <= (-1.0f64).exp()).unwrap_or(0);
    let end = pop
        .iter()
        .position(|&p| p <= (-5.0f64).exp())
        .unwrap_or(pop.len() - 1);
    fit_decay_window(trace, trace.t[start], trace.t[end])
}

/// Fits over an explicit window [t_lo, t_hi] in seconds.
pub fn fit_decay_window(trace: &DecayTrace, t_lo: f64, t_hi: f64) -> Result<DecayFit, WwError> {
    let idx: Vec<usize> = (0..trace.t.len())
        .filter(|&i| trace.t[i] >= t_lo && trace.t[i] <= t_hi)
        .collect();
    if idx.len() < 3 {
        return Err(NumericsError::TooFewSamples {
            needed: 3,
            got: idx.len(),
        }
        .into());
    }
    let t: Vec<f64> = idx.iter().map(|&i| trace.t[i]).collect();
    let lp: Vec<f64> = idx.iter().map(|&i| trace.c_e[i].norm_sqr().ln()).collect();
    // unwrapped phase
    let mut phase = Vec::with_capacity(idx.len());
    let mut prev = trace.c_e[idx[0]].arg();
    let mut offset = 0.0;
    for &i in &idx {
        let a = trace.c_e[i].arg();
        let mut d = a - prev;
        while d > PI {
            d -= 2.0 * PI;
            offset -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
            offset += 2.0 * PI;
        }
        phase.push(a + offset);
        prev = a;
    }
    let decay = linear_regression(&t, &lp)?;
    let rot = linear_regression(&t, &phase)?;
    if decay.rms_residual > FIT_RESIDUAL_LIMIT {
        return Err(WwError::FitResidual {
            residual: decay.rms_residual,
            limit: FIT_RESIDUAL_LIMIT,
        });
    }
    Ok(DecayFit {
        rate: -decay.slope,
        shift: -rot.slope,
        residual: decay.rms_residual,
        t_lo,
        t_hi,
    })
}

/// Simulates the default grid and fits the decay.
pub fn simulate_default(atom: &AtomParams) -> Result<(DecayTrace, DecayFit), WwError> {
    let gamma = gamma_leading(atom);
    let grid = build_grid(atom, DEFAULT_BANDWIDTH * gamma, DEFAULT_MODES)?;
    let dt = DEFAULT_DT / gamma;
    let stride = (DEFAULT_SAMPLE_INTERVAL / DEFAULT_DT).round() as usize;
    let trace = evolve_trace(&grid, atom, DEFAULT_T_END / gamma, dt, stride)?;
    let fit = fit_decay(&trace)?;
    Ok((trace, fit))
}

/// One point of the cutoff study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPoint {
    /// upper detuning cutoff, rad/s
    pub delta_max: f64,
    pub fit: DecayFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffStudy {
    pub points: Vec<CutoffPoint>,
    /// d shift / d ln(delta_max), rad/s
    pub slope: f64,
    pub r_squared: f64,
}

/// Shift against the upper cutoff at fixed lower cutoff `delta_min`; the
/// cutoffs are log-spaced over [delta_max_lo, delta_max_hi]. All in rad/s.
pub fn cutoff_study(
    atom: &AtomParams,
    delta_min: f64,
    delta_max_lo: f64,
    delta_max_hi: f64,
    points: usize,
    spacing: f64,
) -> Result<CutoffStudy, WwError> {
    if points < 3 || !(delta_max_lo > 0.0 && delta_max_hi > delta_max_lo) {
        return Err(WwError::InvalidGrid(format!(
            "cutoff range [{delta_max_lo}, {delta_max_hi}], {points} points"
        )));
    }
    let gamma = gamma_leading(atom);
    let dt = DEFAULT_DT / gamma;
    let stride = (DEFAULT_SAMPLE_INTERVAL / DEFAULT_DT).round() as usize;
    let mut out = Vec::with_capacity(points);
    for i in 0..points {
        let f = i as f64 / (points - 1) as f64;
        let dmax = delta_max_lo * (delta_max_hi / delta_max_lo).powf(f);
        let grid = build_grid_asymmetric(atom, delta_min, dmax, spacing)?;
        let dt_i = dt.min(0.5 * MAX_PHASE_STEP / dmax.max(-delta_min));
        let stride_i = ((stride as f64 * dt / dt_i).round() as usize).max(1);
        let trace = evolve_trace(&grid, atom, DEFAULT_T_END / gamma, dt_i, stride_i)?;
        out.push(CutoffPoint {
            delta_max: dmax,
            fit: fit_decay(&trace)?,
        });
    }
    let x: Vec<f64> = out.iter().map(|p| p.delta_max.ln()).collect();
    let y: Vec<f64> = out.iter().map(|p| p.fit.shift).collect();
    let line = linear_regression(&x, &y)?;
    Ok(CutoffStudy {
        points: out,
        slope: line.slope,
        r_squared: line.r_squared,
    })
}
