//! Closed forms for the momentum-space self-energy distributions of a
//! resting two-level atom, u = p0 * lambda_bar_g.
//!
//! Every bracket is evaluated in dimensionless form; the SI prefactor is
//! applied last.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::observables::AtomParams;
use crate::splitting::{CausalDistribution1D, Parity};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelfEnergyError {
    #[error("u = {0} is a branch point (u^2 = 1)")]
    BranchPoint(f64),
    #[error("u = {0} is a singular point of the closed form")]
    SingularPoint(f64),
    #[error("non-finite input")]
    NonFinite,
}

/// Dimensionless energy u with u^2 - 1 carried separately, so that points
/// a tiny distance above threshold keep full relative precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessEnergy {
    u: f64,
    u2m1: f64,
}

impl DimensionlessEnergy {
    pub fn new(u: f64) -> Result<Self, SelfEnergyError> {
        if !u.is_finite() {
            return Err(SelfEnergyError::NonFinite);
        }
        Ok(Self {
            u,
            u2m1: (u - 1.0) * (u + 1.0),
        })
    }

    /// u = sign * (1 + delta), with u^2 - 1 = delta (2 + delta) exactly.
    pub fn near_threshold(delta: f64, negative: bool) -> Result<Self, SelfEnergyError> {
        if !delta.is_finite() {
            return Err(SelfEnergyError::NonFinite);
        }
        let u = if negative {
            -(1.0 + delta)
        } else {
            1.0 + delta
        };
        Ok(Self {
            u,
            u2m1: delta * (2.0 + delta),
        })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn u_sq_minus_one(&self) -> f64 {
        self.u2m1
    }

    pub fn negated(&self) -> Self {
        Self {
            u: -self.u,
            u2m1: self.u2m1,
        }
    }

    fn check_branch(&self) -> Result<(), SelfEnergyError> {
        if self.u2m1 == 0.0 {
            Err(SelfEnergyError::BranchPoint(self.u))
        } else {
            Ok(())
        }
    }

    fn check_closed(&self) -> Result<(), SelfEnergyError> {
        self.check_branch()?;
        if self.u == 0.0 {
            return Err(SelfEnergyError::SingularPoint(self.u));
        }
        Ok(())
    }

    /// (u^2 - 1)^3 sgn(u) theta(u^2 - 1) / u^4
    pub fn core(&self) -> f64 {
        if self.u2m1 <= 0.0 {
            0.0
        } else {
            let w = self.u2m1;
            self.u.signum() * w * w * w / self.u.powi(4)
        }
    }
}

/// C0 + C1 u + C2 u^2
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NormalizationConstants {
    #[serde(rename = "C0")]
    pub c0: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
}

impl NormalizationConstants {
    pub const ZERO: NormalizationConstants = NormalizationConstants {
        c0: 0.0,
        c1: 0.0,
        c2: 0.0,
    };

    pub fn new(c0: f64, c1: f64, c2: f64) -> Self {
        Self { c0, c1, c2 }
    }

    pub fn sum(&self) -> f64 {
        self.c0 + self.c1 + self.c2
    }

    pub fn is_finite(&self) -> bool {
        self.c0.is_finite() && self.c1.is_finite() && self.c2.is_finite()
    }

    pub fn polynomial(&self, u: f64) -> f64 {
        self.c0 + self.c1 * u + self.c2 * u * u
    }
}

/// Bracket decomposition; `total = prefactor * (log + pole + step + polynomial)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfEnergyValue {
    pub total: Complex64,
    pub log_term: Complex64,
    pub pole_terms: Complex64,
    pub step_term: Complex64,
    pub polynomial_term: Complex64,
    pub prefactor: f64,
}

impl SelfEnergyValue {
    fn assemble(
        log_term: f64,
        pole_terms: f64,
        step_term: f64,
        polynomial_term: f64,
        prefactor: f64,
    ) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        let step = Complex64::new(0.0, step_term);
        let bracket = c(log_term) + c(pole_terms) + step + c(polynomial_term);
        Self {
            total: bracket * prefactor,
            log_term: c(log_term),
            pole_terms: c(pole_terms),
            step_term: step,
            polynomial_term: c(polynomial_term),
            prefactor,
        }
    }

    pub fn bracket(&self) -> Complex64 {
        self.log_term + self.pole_terms + self.step_term + self.polynomial_term
    }
}

/// Normalization of the jump term in the retarded closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RetardedForm {
    /// (u^2-1)^3/(4u^4) on the log/step factor: the central splitting of
    /// D2; its imaginary part is half the jump.
    #[default]
    HalfJump,
    /// (u^2-1)^3/(2u^4): the coefficient as commonly printed, whose
    /// imaginary part equals the full jump.
    FullJump,
}

impl RetardedForm {
    pub fn as_str(&self) -> &'static str {
        match self {
            RetardedForm::HalfJump => "half-jump",
            RetardedForm::FullJump => "full-jump",
        }
    }
}

/// i (u^2-1)^3 sgn(u) theta(u^2-1) / u^4 in units of the spectral prefactor.
pub fn d2_bracket(e: DimensionlessEnergy) -> Result<Complex64, SelfEnergyError> {
    e.check_branch()?;
    Ok(Complex64::new(0.0, e.core()))
}

pub fn d2_tilde(e: DimensionlessEnergy, atom: &AtomParams) -> Result<Complex64, SelfEnergyError> {
    Ok(d2_bracket(e)? * atom.spectral_prefactor())
}

/// Full D2(p) for a moving argument: p0 and pvec in 1/m, dvec in C m.
pub fn d2_tilde_general(
    p0: f64,
    pvec: [f64; 3],
    dvec: [Complex64; 3],
    atom: &AtomParams,
) -> Result<Complex64, SelfEnergyError> {
    let k = &atom.constants;
    let lb = atom.lambda_bar_g();
    let pp = p0 * p0 - (pvec[0] * pvec[0] + pvec[1] * pvec[1] + pvec[2] * pvec[2]);
    let x = pp * lb * lb - 1.0;
    if !x.is_finite() {
        return Err(SelfEnergyError::NonFinite);
    }
    if x == 0.0 {
        return Err(SelfEnergyError::BranchPoint(p0 * lb));
    }
    if x < 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let d2: f64 = dvec.iter().map(|c| c.norm_sqr()).sum();
    let pd: Complex64 = (0..3).map(|i| dvec[i] * pvec[i]).sum();
    let dipole = d2 * (2.0 * p0 * p0 - pp) - 2.0 * pd.norm_sqr();
    let lb7 = lb.powi(7);
    let denom = 12.0 * k.eps0 * k.hbar * k.c * (2.0 * PI * pp).powi(3) * lb7;
    Ok(Complex64::new(
        0.0,
        x * x * x / denom * p0.signum() * dipole,
    ))
}

/// -i (u^2-1)^3 theta(-u) theta(u^2-1)/u^4 in units of the spectral prefactor.
pub fn r2prime_bracket(e: DimensionlessEnergy) -> Result<Complex64, SelfEnergyError> {
    e.check_branch()?;
    if e.u >= 0.0 || e.u2m1 <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let w = e.u2m1;
    Ok(Complex64::new(0.0, -w * w * w / e.u.powi(4)))
}

pub fn r2prime_tilde(
    e: DimensionlessEnergy,
    atom: &AtomParams,
) -> Result<Complex64, SelfEnergyError> {
    Ok(r2prime_bracket(e)? * atom.spectral_prefactor())
}

/// 2 ln|u^2 - 1| (u^2-1)^3/u^4, the shared log piece.
fn log_piece(e: DimensionlessEnergy) -> f64 {
    let w = e.u2m1;
    w * w * w / e.u.powi(4) * 2.0 * w.abs().ln()
}

fn step_piece(e: DimensionlessEnergy, signed: bool) -> f64 {
    if e.u2m1 <= 0.0 {
        return 0.0;
    }
    let w = e.u2m1;
    let s = if signed { e.u.signum() } else { 1.0 };
    2.0 * PI * s * w * w * w / e.u.powi(4)
}

/// Retarded-part bracket with unit prefactor (multiply by P/pi, P the
/// spectral prefactor).
pub fn r2_bracket(
    e: DimensionlessEnergy,
    form: RetardedForm,
) -> Result<SelfEnergyValue, SelfEnergyError> {
    e.check_closed()?;
    let f = match form {
        RetardedForm::HalfJump => 0.25,
        RetardedForm::FullJump => 0.5,
    };
    let u2 = e.u * e.u;
    Ok(SelfEnergyValue::assemble(
        -f * log_piece(e),
        0.5 / u2,
        f * step_piece(e, true),
        -1.25 + 11.0 / 12.0 * u2,
        1.0,
    ))
}

pub fn r2_prefactor(atom: &AtomParams) -> f64 {
    atom.spectral_prefactor() / PI
}

pub fn r2_tilde_closed(
    e: DimensionlessEnergy,
    atom: &AtomParams,
    form: RetardedForm,
) -> Result<SelfEnergyValue, SelfEnergyError> {
    let b = r2_bracket(e, form)?;
    Ok(rescale(b, r2_prefactor(atom)))
}

fn rescale(b: SelfEnergyValue, prefactor: f64) -> SelfEnergyValue {
    SelfEnergyValue {
        total: b.bracket() * prefactor,
        prefactor,
        ..b
    }
}

/// Symmetrized bracket with unit prefactor (multiply by P/(2 pi)).
pub fn t2_bracket(
    e: DimensionlessEnergy,
    c: &NormalizationConstants,
) -> Result<SelfEnergyValue, SelfEnergyError> {
    e.check_closed()?;
    let u2 = e.u * e.u;
    Ok(SelfEnergyValue::assemble(
        -0.5 * log_piece(e),
        1.0 / u2,
        0.5 * step_piece(e, false),
        -2.5 + 11.0 / 6.0 * u2 + c.polynomial(e.u),
        1.0,
    ))
}

pub fn t2_prefactor(atom: &AtomParams) -> f64 {
    atom.spectral_prefactor() / (2.0 * PI)
}

pub fn t2_sym(
    e: DimensionlessEnergy,
    atom: &AtomParams,
    c: &NormalizationConstants,
) -> Result<SelfEnergyValue, SelfEnergyError> {
    Ok(rescale(t2_bracket(e, c)?, t2_prefactor(atom)))
}

/// B(u) - B(1) for the real part of the symmetrized bracket at u = 1 + x,
/// x > 0, written without cancellation.
pub fn t2_real_offset_above_threshold(x: f64, c: &NormalizationConstants) -> f64 {
    let u = 1.0 + x;
    let w = x * (2.0 + x);
    let u2 = u * u;
    // 1/u^2 - 1 = -w/u^2, 11(u^2-1)/6, C1 x + C2 w
    -w * w * w * w.ln() / (u2 * u2) - w / u2 + 11.0 * w / 6.0 + c.c1 * x + c.c2 * w
}

/// Real part of the symmetrized bracket at u = 1.
pub fn t2_real_at_threshold(c: &NormalizationConstants) -> f64 {
    1.0 - 2.5 + 11.0 / 6.0 + c.sum()
}

/// D2 in units of the spectral prefactor, as a splittable distribution.
pub fn as_causal_distribution_dimensionless() -> CausalDistribution1D {
    CausalDistribution1D::new(
        |k| {
            let w = (k - 1.0) * (k + 1.0);
            if w <= 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k.signum() * w * w * w / k.powi(4))
            }
        },
        2,
        1.0,
        Parity::Odd,
        2,
    )
    .expect("valid descriptors")
}

/// D2 in SI units, argument u.
pub fn as_causal_distribution(atom: &AtomParams) -> CausalDistribution1D {
    let p = atom.spectral_prefactor();
    let base = as_causal_distribution_dimensionless();
    CausalDistribution1D::new(move |k| base.evaluate(k) * p, 2, 1.0, Parity::Odd, 2)
        .expect("valid descriptors")
}
