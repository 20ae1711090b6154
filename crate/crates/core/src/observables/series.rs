//! Threshold expansion of Re(Z/t_g) in du = u - 1.
//!
//! In bracket units (prefactor |d|^2/(144 pi^2 eps0 hbar lambda_bar_g^3)),
//! Re(Z/t_g) = c0 + c1 du + c2 du^2 + c3 du^3 + c_log3 du^3 ln(2 du) + O(du^4).

use std::f64::consts::{LN_2, PI};

use serde::Serialize;
use twofloat::TwoFloat;

use super::{AtomParams, ObservableError, ResonanceWeight};
use crate::numerics::fit::log_grid;
use crate::numerics::{fit_series_refined, solve_linear, BasisTerm};
use crate::selfenergy::{t2_real_at_threshold, NormalizationConstants};

/// Magnitude of the C-independent log coefficient, used as the scale for
/// relative comparisons of coefficients that may vanish.
pub const BRACKET_SCALE: f64 = 48.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineShiftSeries {
    pub c_log3: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub prefactor: f64,
}

impl LineShiftSeries {
    pub fn coefficients(&self) -> [f64; 5] {
        [self.c0, self.c1, self.c2, self.c3, self.c_log3]
    }

    /// Bracket value at du, truncated after the cubic terms.
    pub fn bracket(&self, du: f64) -> f64 {
        self.c0
            + du * (self.c1 + du * (self.c2 + du * self.c3))
            + self.c_log3 * du.powi(3) * (2.0 * du).ln()
    }
}

/// max(|x|, 48): scale for relative coefficient errors.
pub fn series_scale(x: f64) -> f64 {
    x.abs().max(BRACKET_SCALE)
}

fn bracket_prefactor(atom: &AtomParams) -> f64 {
    let k = &atom.constants;
    let lb = atom.lambda_bar_g();
    atom.d_eg_abs * atom.d_eg_abs / (144.0 * PI * PI * k.eps0 * k.hbar * lb * lb * lb)
}

/// Analytic coefficients.
pub fn lineshift_series(
    atom: &AtomParams,
    c: &NormalizationConstants,
    weight: ResonanceWeight,
) -> LineShiftSeries {
    let prefactor = bracket_prefactor(atom);
    let (c0, c1, c2, c3) = match weight {
        ResonanceWeight::InverseU => (
            2.0 + 6.0 * c.sum(),
            8.0 - 6.0 * c.c0 + 6.0 * c.c2,
            3.0 * (2.0 * c.c0 + 7.0),
            -3.0 * (2.0 * c.c0 + 15.0),
        ),
        ResonanceWeight::Unity => (
            2.0 + 6.0 * c.sum(),
            10.0 + 6.0 * c.c1 + 12.0 * c.c2,
            29.0 + 6.0 * c.c2,
            -24.0,
        ),
    };
    LineShiftSeries {
        c_log3: -48.0,
        c0,
        c1,
        c2,
        c3,
        prefactor,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionOptions {
    pub du_min: f64,
    pub du_max: f64,
    pub points: usize,
    /// highest power of the x^k, x^k ln x nuisance columns (k >= 4)
    pub nuisance_max_power: u32,
}

impl Default for ExtractionOptions {
    fn default() -> Self {
        Self {
            du_min: 1e-5,
            du_max: 1e-2,
            points: 40,
            nuisance_max_power: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesExtraction {
    pub series: LineShiftSeries,
    /// coefficient of du^3 ln du before separating ln 2
    pub raw_cubic: f64,
    pub residual_norm: f64,
    pub condition: f64,
    pub nuisance: Vec<(String, f64)>,
}

/// 6 (B(1+x) w(1+x) - B(1)) with the threshold value removed, for x > 0,
/// in double-double. The rational part carries the O(x) terms whose
/// rounding would otherwise swamp the x^3 signal; the log piece is
/// O(x^3) and taken in double precision.
fn sample_remainder(x: f64, c: &NormalizationConstants, weight: ResonanceWeight) -> TwoFloat {
    let xd = TwoFloat::from(x);
    let u = xd + 1.0;
    let w = xd * (xd + 2.0);
    let u2 = u * u;
    let wf = f64::from(w);
    let log_piece = TwoFloat::from(wf * wf * wf * wf.ln() / f64::from(u2 * u2));
    let eleven_sixths = TwoFloat::from(11.0) / 6.0;
    match weight {
        ResonanceWeight::Unity => {
            (-log_piece - w / u2 + w * eleven_sixths + xd * c.c1 + w * c.c2) * 6.0
        }
        ResonanceWeight::InverseU => {
            // (B1 + dB)/u - B1 = (dB - B1 x)/u, expanded so that the C terms
            // and the x-linear pieces combine without cancellation
            let third = TwoFloat::from(1.0) / 3.0;
            let core = -log_piece + xd * (-(xd + 2.0) / u2 + (xd + 2.0) * eleven_sixths - third);
            (core - xd * c.c0 + xd * u * c.c2) * 6.0 / u
        }
    }
}

/// Fits the bracket expansion from closed-form samples above threshold.
///
/// The constant term is the exact threshold value 6 B(1); the remainder is
/// fitted with relative weights 1/du on {du, du^2, du^3, du^3 ln du} plus
/// higher-order nuisance columns.
pub fn extract_series_with(
    atom: &AtomParams,
    c: &NormalizationConstants,
    weight: ResonanceWeight,
    opts: &ExtractionOptions,
) -> Result<SeriesExtraction, ObservableError> {
    if !c.is_finite() {
        return Err(ObservableError::NonFiniteConstants);
    }
    let c0 = 6.0 * t2_real_at_threshold(c);
    let grid = log_grid(opts.du_min, opts.du_max, opts.points);
    let samples: Vec<(f64, TwoFloat)> = grid
        .iter()
        .map(|&x| (x, sample_remainder(x, c, weight)))
        .collect();
    let weights: Vec<f64> = grid.iter().map(|&x| 1.0 / x).collect();

    let mut basis = vec![
        BasisTerm::Power(1),
        BasisTerm::Power(2),
        BasisTerm::Power(3),
        BasisTerm::PowerLog(3),
    ];
    for k in 4..=opts.nuisance_max_power {
        basis.push(BasisTerm::Power(k));
        basis.push(BasisTerm::PowerLog(k));
    }
    let fit = fit_series_refined(&samples, &weights, &basis)?;
    let get = |t| fit.coefficient(t).unwrap_or(0.0);
    let c_log3 = get(BasisTerm::PowerLog(3));
    let raw_cubic = get(BasisTerm::Power(3));
    let rms = fit.residual_norm / (samples.len() as f64).sqrt();
    let limit = 1e-6 * series_scale(c0);
    if !(rms <= limit) {
        return Err(ObservableError::FitResidual {
            residual: rms,
            limit,
        });
    }
    let nuisance = basis[4..].iter().map(|t| (t.label(), get(*t))).collect();
    Ok(SeriesExtraction {
        series: LineShiftSeries {
            c_log3,
            c0,
            c1: get(BasisTerm::Power(1)),
            c2: get(BasisTerm::Power(2)),
            // c3 x^3 + cL x^3 ln(2x) = (c3 + cL ln 2) x^3 + cL x^3 ln x
            c3: raw_cubic - c_log3 * LN_2,
            prefactor: bracket_prefactor(atom),
        },
        raw_cubic,
        residual_norm: fit.residual_norm,
        condition: fit.condition,
        nuisance,
    })
}

pub fn extract_series_numerically(
    atom: &AtomParams,
    c: &NormalizationConstants,
    weight: ResonanceWeight,
) -> Result<SeriesExtraction, ObservableError> {
    extract_series_with(atom, c, weight, &ExtractionOptions::default())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizationSolution {
    pub constants: NormalizationConstants,
    /// rows: c0, c1, c2; columns: C0, C1, C2
    pub matrix: [[f64; 3]; 3],
    pub rhs: [f64; 3],
    pub analytic: LineShiftSeries,
    pub numeric: LineShiftSeries,
    /// -3(2 C0 + 15) at the solved C0 (inverse-u weight) or -24 (unity)
    pub residual_cubic: f64,
}

pub fn solve_normalization(atom: &AtomParams) -> Result<NormalizationSolution, ObservableError> {
    solve_normalization_with(
        atom,
        ResonanceWeight::default(),
        &ExtractionOptions::default(),
    )
}

/// Chooses C so that the du^0, du^1, du^2 terms of the numerically
/// extracted series vanish. The extraction is linear in C, so the system
/// is assembled from unit perturbations.
pub fn solve_normalization_with(
    atom: &AtomParams,
    weight: ResonanceWeight,
    opts: &ExtractionOptions,
) -> Result<NormalizationSolution, ObservableError> {
    let low = |s: &LineShiftSeries| [s.c0, s.c1, s.c2];
    let base = low(&extract_series_with(atom, &NormalizationConstants::ZERO, weight, opts)?.series);
    let units = [
        NormalizationConstants::new(1.0, 0.0, 0.0),
        NormalizationConstants::new(0.0, 1.0, 0.0),
        NormalizationConstants::new(0.0, 0.0, 1.0),
    ];
    let mut matrix = [[0.0; 3]; 3];
    for (j, e) in units.iter().enumerate() {
        let col = low(&extract_series_with(atom, e, weight, opts)?.series);
        for i in 0..3 {
            matrix[i][j] = col[i] - base[i];
        }
    }
    let rhs = [-base[0], -base[1], -base[2]];
    let x = solve_linear(matrix, rhs)?;
    let constants = NormalizationConstants::new(x[0], x[1], x[2]);
    let analytic = lineshift_series(atom, &constants, weight);
    let numeric = extract_series_with(atom, &constants, weight, opts)?.series;
    Ok(NormalizationSolution {
        constants,
        matrix,
        rhs,
        analytic,
        numeric,
        residual_cubic: analytic.c3,
    })
}
