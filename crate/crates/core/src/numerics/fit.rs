use std::fmt;

use nalgebra::{DMatrix, DVector};
use twofloat::TwoFloat;

use super::linalg::lstsq;
use super::NumericsError;

/// Designs whose equilibrated condition number exceeds this are refused.
pub const CONDITION_LIMIT: f64 = 1e10;

/// x^n or x^n ln x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisTerm {
    Power(u32),
    PowerLog(u32),
}

impl BasisTerm {
    /// The five-term basis {1, x, x^2, x^3, x^3 ln x}.
    pub const STANDARD: [BasisTerm; 5] = [
        BasisTerm::Power(0),
        BasisTerm::Power(1),
        BasisTerm::Power(2),
        BasisTerm::Power(3),
        BasisTerm::PowerLog(3),
    ];

    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            BasisTerm::Power(n) => x.powi(n as i32),
            BasisTerm::PowerLog(n) => x.powi(n as i32) * x.ln(),
        }
    }

    /// Double-double value; the logarithm factor is taken in double
    /// precision, which is exact enough for n >= 1 at x << 1.
    pub fn eval_dd(self, x: f64) -> TwoFloat {
        let p = TwoFloat::from(x).powi(self.power() as i32);
        match self {
            BasisTerm::Power(_) => p,
            BasisTerm::PowerLog(_) => p * x.ln(),
        }
    }

    fn power(self) -> u32 {
        match self {
            BasisTerm::Power(n) | BasisTerm::PowerLog(n) => n,
        }
    }

    pub fn label(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BasisTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BasisTerm::Power(0) => write!(f, "1"),
            BasisTerm::Power(1) => write!(f, "x"),
            BasisTerm::Power(n) => write!(f, "x^{n}"),
            BasisTerm::PowerLog(0) => write!(f, "ln x"),
            BasisTerm::PowerLog(1) => write!(f, "x ln x"),
            BasisTerm::PowerLog(n) => write!(f, "x^{n} ln x"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFit {
    pub terms: Vec<(BasisTerm, f64)>,
    pub residual_norm: f64,
    pub condition: f64,
}

impl SeriesFit {
    pub fn coefficient(&self, term: BasisTerm) -> Option<f64> {
        self.terms.iter().find(|(t, _)| *t == term).map(|&(_, c)| c)
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(t, c)| c * t.eval(x)).sum()
    }
}

pub fn fit_series(samples: &[(f64, f64)], basis: &[BasisTerm]) -> Result<SeriesFit, NumericsError> {
    let w = vec![1.0; samples.len()];
    fit_series_weighted(samples, &w, basis)
}

/// Weighted least squares: minimizes sum (w_i (y_i - fit(x_i)))^2.
pub fn fit_series_weighted(
    samples: &[(f64, f64)],
    weights: &[f64],
    basis: &[BasisTerm],
) -> Result<SeriesFit, NumericsError> {
    if basis.is_empty() {
        return Err(NumericsError::Dimension("empty basis".into()));
    }
    if weights.len() != samples.len() {
        return Err(NumericsError::Dimension(format!(
            "{} weights for {} samples",
            weights.len(),
            samples.len()
        )));
    }
    for (i, a) in basis.iter().enumerate() {
        if basis[..i].contains(a) {
            return Err(NumericsError::IllConditioned {
                condition: f64::INFINITY,
                first: a.label(),
                second: a.label(),
            });
        }
    }
    let needed = 2 * basis.len();
    if samples.len() < needed {
        return Err(NumericsError::TooFewSamples {
            needed,
            got: samples.len(),
        });
    }
    let (mut xmin, mut xmax) = (f64::INFINITY, 0.0f64);
    for &(x, y) in samples {
        if !(x > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(NumericsError::InsufficientSpan);
        }
        xmin = xmin.min(x);
        xmax = xmax.max(x);
    }
    if xmax < 10.0 * xmin * (1.0 - 1e-12) {
        return Err(NumericsError::InsufficientSpan);
    }

    let n = samples.len();
    let design = DMatrix::from_fn(n, basis.len(), |i, j| {
        weights[i] * basis[j].eval(samples[i].0)
    });
    let y = DVector::from_iterator(n, samples.iter().zip(weights).map(|(&(_, y), &w)| w * y));
    let out = lstsq(&design, &y)?;
    if !(out.condition <= CONDITION_LIMIT) {
        let (a, b) = most_collinear_pair(&out.scaled_design);
        return Err(NumericsError::IllConditioned {
            condition: out.condition,
            first: basis[a].label(),
            second: basis[b].label(),
        });
    }
    let coef = DVector::from_vec(out.coefficients.clone());
    let residual_norm = (&design * coef - &y).norm();
    Ok(SeriesFit {
        terms: basis.iter().copied().zip(out.coefficients).collect(),
        residual_norm,
        condition: out.condition,
    })
}

/// Refinement passes of `fit_series_refined`.
pub const REFINEMENT_STEPS: usize = 4;

/// As `fit_series_weighted` for double-double samples: the double-precision
/// solution is corrected by iterative refinement with residuals formed in
/// double-double, which removes the rounding floor of samples dominated by
/// low-order terms.
pub fn fit_series_refined(
    samples: &[(f64, TwoFloat)],
    weights: &[f64],
    basis: &[BasisTerm],
) -> Result<SeriesFit, NumericsError> {
    let rounded: Vec<(f64, f64)> = samples.iter().map(|&(x, y)| (x, f64::from(y))).collect();
    let mut fit = fit_series_weighted(&rounded, weights, basis)?;
    let n = samples.len();
    let design = DMatrix::from_fn(n, basis.len(), |i, j| {
        weights[i] * basis[j].eval(samples[i].0)
    });
    let residual = |terms: &[(BasisTerm, f64)]| {
        DVector::from_iterator(
            n,
            samples.iter().zip(weights).map(|(&(x, y), &w)| {
                let model = terms
                    .iter()
                    .fold(TwoFloat::from(0.0), |acc, &(t, c)| acc + t.eval_dd(x) * c);
                f64::from((y - model) * w)
            }),
        )
    };
    let mut r = residual(&fit.terms);
    for _ in 0..REFINEMENT_STEPS {
        let step = lstsq(&design, &r)?;
        let mut changed = false;
        for ((_, c), d) in fit.terms.iter_mut().zip(&step.coefficients) {
            let next = *c + d;
            changed |= next != *c;
            *c = next;
        }
        r = residual(&fit.terms);
        if !changed {
            break;
        }
    }
    fit.residual_norm = r.norm();
    Ok(fit)
}

fn most_collinear_pair(scaled: &DMatrix<f64>) -> (usize, usize) {
    let cols = scaled.ncols();
    let mut best = (0, cols.min(2) - 1);
    let mut best_cos = -1.0;
    for i in 0..cols {
        for j in (i + 1)..cols {
            let c = scaled.column(i).dot(&scaled.column(j)).abs();
            if c > best_cos {
                best_cos = c;
                best = (i, j);
            }
        }
    }
    best
}

/// `n` log-spaced points on [lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}
