//! Constants, atom presets, decay rate, line shift and the hydrogen ratio.

mod atom;
mod constants;
mod series;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use atom::{
    hydrogen_1s2p_preset, AtomError, AtomParams, AtomPreset, HYDROGEN_T_G, MAX_DELTA_U,
};
pub use constants::{PhysicalConstants, CONSTANTS_VERSION};
pub use series::{
    extract_series_numerically, extract_series_with, lineshift_series, series_scale,
    solve_normalization, solve_normalization_with, ExtractionOptions, LineShiftSeries,
    NormalizationSolution, SeriesExtraction, BRACKET_SCALE,
};

use crate::numerics::NumericsError;
use crate::selfenergy::{
    t2_real_at_threshold, t2_real_offset_above_threshold, t2_sym, DimensionlessEnergy,
    NormalizationConstants, SelfEnergyError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservableError {
    #[error(transparent)]
    Atom(#[from] AtomError),
    #[error(transparent)]
    SelfEnergy(#[from] SelfEnergyError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("series fit residual {residual:e} exceeds {limit:e}")]
    FitResidual { residual: f64, limit: f64 },
    #[error("reference shift is zero")]
    ZeroReference,
    #[error("normalization constants must be finite")]
    NonFiniteConstants,
}

/// Kinematic weight applied to the symmetrized amplitude at resonance.
///
/// `InverseU` includes lambda_bar_e/lambda_bar_g = 1/u from the energy
/// normalization of the excited state; it yields the (1+du)^5 rate
/// denominator and the line-shift coefficients 8-6C0+6C2, 3(2C0+7),
/// -3(2C0+15). `Unity` substitutes u = 1+du directly, giving (1+du)^4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResonanceWeight {
    #[default]
    InverseU,
    Unity,
}

impl ResonanceWeight {
    pub fn factor(self, u: f64) -> f64 {
        match self {
            ResonanceWeight::InverseU => 1.0 / u,
            ResonanceWeight::Unity => 1.0,
        }
    }

    pub fn denominator_power(self) -> i32 {
        match self {
            ResonanceWeight::InverseU => 5,
            ResonanceWeight::Unity => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ResonanceWeight::InverseU => "inverse-u",
            ResonanceWeight::Unity => "unity",
        }
    }
}

/// du^3 (2+du)^3 |d|^2 / (24 pi (1+du)^n eps0 hbar lambda_bar_g^3)
pub fn gamma_exact(atom: &AtomParams, weight: ResonanceWeight) -> f64 {
    let k = &atom.constants;
    let du = atom.delta_u();
    let lb = atom.lambda_bar_g();
    let w = du * (2.0 + du);
    w * w * w * atom.d_eg_abs * atom.d_eg_abs
        / (24.0 * PI * (1.0 + du).powi(weight.denominator_power()) * k.eps0 * k.hbar * lb * lb * lb)
}

/// |d|^2 omega^3 / (3 pi eps0 hbar c^3)
pub fn gamma_leading(atom: &AtomParams) -> f64 {
    let k = &atom.constants;
    atom.d_eg_abs * atom.d_eg_abs * atom.omega_eg.powi(3)
        / (3.0 * PI * k.eps0 * k.hbar * k.c.powi(3))
}

/// Golden-rule rate of a two-level atom written in terms of the
/// oscillator quantities: omega^3 |d|^2 / (3 pi eps0 hbar c^3) expressed
/// through the Einstein A coefficient 4 alpha omega^3 |d/e|^2 / (3 c^2).
pub fn einstein_a(atom: &AtomParams) -> f64 {
    let k = &atom.constants;
    let r = atom.d_eg_abs / k.e_charge;
    4.0 * k.alpha_from_charge() * atom.omega_eg.powi(3) * r * r / (3.0 * k.c * k.c)
}

/// 1 + 2 ln(2 du)
pub fn delta_final_bracket(delta_u: f64) -> f64 {
    1.0 + 2.0 * (2.0 * delta_u).ln()
}

/// -(gamma/2pi) [1 + 2 ln(2 du)] with the leading-order rate.
pub fn delta_final(atom: &AtomParams) -> f64 {
    -gamma_leading(atom) / (2.0 * PI) * delta_final_bracket(atom.delta_u())
}

/// Bracket of the reference shift: -25.25 + (4/3) ln(alpha^-2).
pub fn lamb_bracket(k: &PhysicalConstants) -> f64 {
    -25.25 + 4.0 / 3.0 * (k.alpha.powi(-2)).ln()
}

/// (m_e c^2 alpha^5 / (pi hbar)) (-25.25 + (4/3) ln alpha^-2), in 1/s.
pub fn lamb_reference(k: &PhysicalConstants) -> f64 {
    k.m_electron * k.c * k.c * k.alpha.powi(5) / (PI * k.hbar) * lamb_bracket(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftRatio {
    pub signed: f64,
    pub magnitude: f64,
    pub delta_final: f64,
    pub lamb_reference: f64,
    /// Closed logarithmic form (-0.029 ln a - 0.015 ln(me/mg) - 0.0031)/(ln a + 9.47),
    /// evaluated for comparison of magnitude and sign.
    pub log_form: f64,
}

pub fn shift_ratio(
    atom: &AtomParams,
    k: &PhysicalConstants,
) -> Result<ShiftRatio, ObservableError> {
    let lamb = lamb_reference(k);
    if lamb == 0.0 || !lamb.is_finite() {
        return Err(ObservableError::ZeroReference);
    }
    let d = delta_final(atom);
    let signed = d / lamb;
    let la = k.alpha.ln();
    let log_form = (-0.029 * la - 0.015 * (k.m_electron / atom.m_g).ln() - 0.0031) / (la + 9.47);
    Ok(ShiftRatio {
        signed,
        magnitude: signed.abs(),
        delta_final: d,
        lamb_reference: lamb,
        log_form,
    })
}

/// Z = 2 (2 pi)^2 c t_g T2(u_res) times the resonance weight.
pub fn z_factor(
    atom: &AtomParams,
    c: &NormalizationConstants,
    weight: ResonanceWeight,
) -> Result<Complex64, ObservableError> {
    z_factor_with_duration(atom, c, weight, atom.t_g)
}

/// As `z_factor` with an explicit interaction duration.
pub fn z_factor_with_duration(
    atom: &AtomParams,
    c: &NormalizationConstants,
    weight: ResonanceWeight,
    t: f64,
) -> Result<Complex64, ObservableError> {
    if !c.is_finite() {
        return Err(ObservableError::NonFiniteConstants);
    }
    let du = atom.delta_u();
    let e = DimensionlessEnergy::near_threshold(du, false)?;
    let t2 = t2_sym(e, atom, c)?;
    // real part as threshold value plus offset, free of O(1) cancellation
    let re = t2.prefactor * (t2_real_at_threshold(c) + t2_real_offset_above_threshold(du, c));
    let value = Complex64::new(re, t2.total.im);
    Ok(value * (2.0 * (2.0 * PI).powi(2) * atom.constants.c * t * weight.factor(e.u())))
}

/// All headline observables for one atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayObservables {
    pub gamma_exact: f64,
    pub gamma_leading: f64,
    pub delta_shift: f64,
    pub lamb_reference: f64,
    pub ratio: f64,
    pub z_factor: Complex64,
}

pub fn decay_observables(
    atom: &AtomParams,
    c: &NormalizationConstants,
    weight: ResonanceWeight,
) -> Result<DecayObservables, ObservableError> {
    let r = shift_ratio(atom, &atom.constants)?;
    Ok(DecayObservables {
        gamma_exact: gamma_exact(atom, weight),
        gamma_leading: gamma_leading(atom),
        delta_shift: r.delta_final,
        lamb_reference: r.lamb_reference,
        ratio: r.signed,
        z_factor: z_factor(atom, c, weight)?,
    })
}
