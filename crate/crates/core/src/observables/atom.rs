use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::constants::PhysicalConstants;

/// Largest accepted transition-to-rest-energy ratio.
pub const MAX_DELTA_U: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AtomError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("delta_u = {0} is outside (0, {MAX_DELTA_U})")]
    DeltaUOutOfRange(f64),
    #[error("physical constants failed the consistency check")]
    InconsistentConstants,
    #[error("preset parse error: {0}")]
    Parse(String),
}

/// Serialized atom description; unknown keys are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomPreset {
    pub m_g_kg: f64,
    pub omega_eg_rad_s: f64,
    #[serde(rename = "d_eg_Cm")]
    pub d_eg_cm: f64,
    pub t_g_s: f64,
}

impl AtomPreset {
    pub fn from_json(text: &str) -> Result<Self, AtomError> {
        serde_json::from_str(text).map_err(|e| AtomError::Parse(e.to_string()))
    }
}

/// Two-level atom: ground mass, transition frequency, dipole element and
/// interaction duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomParams {
    pub m_g: f64,
    pub omega_eg: f64,
    pub d_eg_abs: f64,
    pub t_g: f64,
    pub constants: PhysicalConstants,
}

fn positive(name: &'static str, value: f64) -> Result<(), AtomError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(AtomError::NonPositive { name, value })
    }
}

impl AtomParams {
    pub fn new(
        m_g: f64,
        omega_eg: f64,
        d_eg_abs: f64,
        t_g: f64,
        constants: PhysicalConstants,
    ) -> Result<Self, AtomError> {
        positive("m_g", m_g)?;
        positive("omega_eg", omega_eg)?;
        positive("t_g", t_g)?;
        if !(d_eg_abs >= 0.0 && d_eg_abs.is_finite()) {
            return Err(AtomError::NonPositive {
                name: "d_eg_abs",
                value: d_eg_abs,
            });
        }
        if !constants.is_consistent() {
            return Err(AtomError::InconsistentConstants);
        }
        let atom = Self {
            m_g,
            omega_eg,
            d_eg_abs,
            t_g,
            constants,
        };
        let du = atom.delta_u();
        if !(du > 0.0 && du < MAX_DELTA_U) {
            return Err(AtomError::DeltaUOutOfRange(du));
        }
        Ok(atom)
    }

    pub fn from_preset(p: &AtomPreset, constants: PhysicalConstants) -> Result<Self, AtomError> {
        Self::new(p.m_g_kg, p.omega_eg_rad_s, p.d_eg_cm, p.t_g_s, constants)
    }

    pub fn to_preset(&self) -> AtomPreset {
        AtomPreset {
            m_g_kg: self.m_g,
            omega_eg_rad_s: self.omega_eg,
            d_eg_cm: self.d_eg_abs,
            t_g_s: self.t_g,
        }
    }

    /// Atom with a prescribed delta_u, keeping the transition frequency.
    pub fn with_delta_u(&self, delta_u: f64) -> Result<Self, AtomError> {
        let k = &self.constants;
        let m_g = k.hbar * self.omega_eg / (delta_u * k.c * k.c);
        Self::new(m_g, self.omega_eg, self.d_eg_abs, self.t_g, self.constants)
    }

    pub fn with_dipole(&self, d_eg_abs: f64) -> Result<Self, AtomError> {
        Self::new(self.m_g, self.omega_eg, d_eg_abs, self.t_g, self.constants)
    }

    pub fn with_duration(&self, t_g: f64) -> Result<Self, AtomError> {
        Self::new(self.m_g, self.omega_eg, self.d_eg_abs, t_g, self.constants)
    }

    pub fn lambda_bar_g(&self) -> f64 {
        self.constants.hbar / (self.m_g * self.constants.c)
    }

    /// 1/lambda_bar_e = 1/lambda_bar_g + omega_eg/c
    pub fn lambda_bar_e(&self) -> f64 {
        1.0 / (1.0 / self.lambda_bar_g() + self.omega_eg / self.constants.c)
    }

    pub fn delta_u(&self) -> f64 {
        let k = &self.constants;
        k.hbar * self.omega_eg / (self.m_g * k.c * k.c)
    }

    pub fn u_res(&self) -> f64 {
        1.0 + self.delta_u()
    }

    /// |d|^2 / (12 eps0 hbar c (2 pi)^3 lambda_bar_g^3), in 1/m.
    pub fn spectral_prefactor(&self) -> f64 {
        let k = &self.constants;
        let lb = self.lambda_bar_g();
        self.d_eg_abs * self.d_eg_abs
            / (12.0 * k.eps0 * k.hbar * k.c * (2.0 * PI).powi(3) * lb * lb * lb)
    }
}

/// Hydrogen 1s -> 2p: 10.2 eV transition, |d| = 128 sqrt(2)/243 e a0,
/// ground mass m_p + m_e. The interaction duration is 1 ns.
pub fn hydrogen_1s2p_preset(k: &PhysicalConstants) -> AtomParams {
    let omega = 0.75 * 13.6 * k.e_charge / k.hbar;
    let d = 128.0 * SQRT_2 / 243.0 * k.e_charge * k.a0;
    AtomParams::new(k.m_proton + k.m_electron, omega, d, HYDROGEN_T_G, *k)
        .expect("hydrogen preset is valid")
}

pub const HYDROGEN_T_G: f64 = 1e-9;
