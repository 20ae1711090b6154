//! Retarded/advanced splitting of one-dimensional causal distributions by
//! the subtracted dispersion integral.
//!
//! For a distribution d(k) with singular order w that vanishes on |k| < k_min,
//!
//! r(p) = (i/2pi) (p-q)^(w+1) Int dk d(k) / [(k-q-i0)^(w+1) (p-k+i0)],
//!
//! with the subtraction point q in the gap. The i0 of the second factor is
//! resolved as PV - i pi delta, so the pole contributes exactly d(p)/2.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{
    integrate_adaptive_points, integrate_pv_complex, least_squares_complex, Interval,
    NumericsError, QuadOptions,
};

/// Grid points closer than this to the support edge are refused.
pub const BRANCH_EXCLUSION: f64 = 1e-6;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("p0 = {p0} lies on the support edge |k| = {k_min} (branch point)")]
    BranchPoint { p0: f64, k_min: f64 },
    #[error("subtraction point q = {q} must lie strictly inside the gap |k| < {k_min}")]
    SubtractionOnSupport { q: f64, k_min: f64 },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("need at least {needed} grid points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("grid point {p} is within {BRANCH_EXCLUSION} of the support edge")]
    GridNearBranch { p: f64 },
    #[error("retarded parts come from different distributions")]
    MismatchedSources,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

type Kernel = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Momentum-space distribution d(k) with a support gap |k| < k_min.
#[derive(Clone)]
pub struct CausalDistribution1D {
    kernel: Kernel,
    singular_order: i32,
    k_min: f64,
    parity: Parity,
    large_k_growth: i32,
    id: u64,
}

impl fmt::Debug for CausalDistribution1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CausalDistribution1D")
            .field("singular_order", &self.singular_order)
            .field("k_min", &self.k_min)
            .field("parity", &self.parity)
            .field("large_k_growth", &self.large_k_growth)
            .finish()
    }
}

fn next_id() -> u64 {
    use std::sync::atomic::{AtomicU64, Ordering};
    static NEXT: AtomicU64 = AtomicU64::new(1);
    NEXT.fetch_add(1, Ordering::Relaxed)
}

impl CausalDistribution1D {
    pub fn new<F>(
        kernel: F,
        singular_order: i32,
        k_min: f64,
        parity: Parity,
        large_k_growth: i32,
    ) -> Result<Self, SplitError>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        if singular_order < -1 {
            return Err(SplitError::InvalidDistribution(format!(
                "singular order {singular_order} < -1"
            )));
        }
        if large_k_growth > singular_order {
            return Err(SplitError::InvalidDistribution(format!(
                "growth exponent {large_k_growth} exceeds singular order {singular_order}"
            )));
        }
        if !(k_min >= 0.0) || !k_min.is_finite() {
            return Err(SplitError::InvalidDistribution(format!("k_min = {k_min}")));
        }
        Ok(Self {
            kernel: Arc::new(kernel),
            singular_order,
            k_min,
            parity,
            large_k_growth,
            id: next_id(),
        })
    }

    /// The zero distribution with the given descriptors.
    pub fn zero(singular_order: i32, k_min: f64) -> Self {
        Self::new(
            |_| Complex64::new(0.0, 0.0),
            singular_order,
            k_min,
            Parity::Even,
            singular_order.clamp(-1, 0),
        )
        .expect("valid zero distribution")
    }

    /// a*d1 + b*d2; descriptors must agree.
    pub fn linear_combination(
        a: Complex64,
        d1: &Self,
        b: Complex64,
        d2: &Self,
    ) -> Result<Self, SplitError> {
        if d1.singular_order != d2.singular_order || d1.k_min != d2.k_min {
            return Err(SplitError::InvalidDistribution("descriptors differ".into()));
        }
        let parity = if d1.parity == d2.parity {
            d1.parity
        } else {
            Parity::None
        };
        let (k1, k2) = (d1.kernel.clone(), d2.kernel.clone());
        Self::new(
            move |k| a * k1(k) + b * k2(k),
            d1.singular_order,
            d1.k_min,
            parity,
            d1.large_k_growth.max(d2.large_k_growth),
        )
    }

    /// d(k); exactly zero in the gap.
    #[inline]
    pub fn evaluate(&self, k: f64) -> Complex64 {
        if k.abs() < self.k_min {
            Complex64::new(0.0, 0.0)
        } else {
            (self.kernel)(k)
        }
    }

    pub fn singular_order(&self) -> i32 {
        self.singular_order
    }

    pub fn k_min(&self) -> f64 {
        self.k_min
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn large_k_growth(&self) -> i32 {
        self.large_k_growth
    }

    /// |d(-k) -/+ d(k)| for the declared parity (0 for `Parity::None`).
    pub fn parity_defect(&self, k: f64) -> f64 {
        let (a, b) = (self.evaluate(k), self.evaluate(-k));
        match self.parity {
            Parity::Even => (b - a).norm(),
            Parity::Odd => (b + a).norm(),
            Parity::None => 0.0,
        }
    }
}

fn quad_opts(tol: f64) -> QuadOptions {
    QuadOptions {
        rel_tol: tol,
        ..QuadOptions::default()
    }
}

/// (i/2pi)(p-q)^(w+1) times the principal-value dispersion integral,
/// i.e. the retarded part without its pole term.
fn dispersion_pv(
    d: &CausalDistribution1D,
    p0: f64,
    q: f64,
    tol: f64,
) -> Result<Complex64, SplitError> {
    let k_min = d.k_min;
    if !(k_min > 0.0) {
        return Err(SplitError::InvalidDistribution(
            "support must have a gap around the subtraction point".into(),
        ));
    }
    if !(q.abs() < k_min) {
        return Err(SplitError::SubtractionOnSupport { q, k_min });
    }
    if !(tol > 0.0) {
        return Err(NumericsError::InvalidTolerance { rel: tol, abs: 0.0 }.into());
    }
    if ((p0.abs() - k_min).abs()) <= tol {
        return Err(SplitError::BranchPoint { p0, k_min });
    }
    if p0 == q {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let n = d.singular_order + 1;
    let opts = quad_opts(tol);
    // numerator of 1/(k - p0)
    let num = |k: f64| d.evaluate(k) / (k - q).powi(n);
    let plain = |k: f64| num(k) / (k - p0);

    let mut integral = Complex64::new(0.0, 0.0);
    for side in [-1.0f64, 1.0] {
        let iv = if side > 0.0 {
            Interval::new(k_min, f64::INFINITY)?
        } else {
            Interval::new(f64::NEG_INFINITY, -k_min)?
        };
        let pole_here = iv.contains_open(p0);
        let part = if pole_here {
            integrate_pv_complex(num, p0, iv, &opts)?
        } else {
            integrate_adaptive_points(plain, &[iv.lo, iv.hi], &opts)?
        };
        integral += part.value;
    }
    // 1/(p0 - k) = -1/(k - p0)
    Ok(I / (2.0 * PI) * (p0 - q).powi(n) * (-integral))
}

fn pole_half(d: &CausalDistribution1D, p0: f64) -> Complex64 {
    d.evaluate(p0) * 0.5
}

/// Central retarded part (subtraction at the origin).
pub fn retarded_part_central(
    d: &CausalDistribution1D,
    p0: f64,
    tol: f64,
) -> Result<Complex64, SplitError> {
    retarded_part_shifted(d, p0, 0.0, tol)
}

/// Retarded part with Taylor subtraction about k = q.
pub fn retarded_part_shifted(
    d: &CausalDistribution1D,
    p0: f64,
    q: f64,
    tol: f64,
) -> Result<Complex64, SplitError> {
    Ok(dispersion_pv(d, p0, q, tol)? + pole_half(d, p0))
}

/// Advanced part as r - d.
pub fn advanced_part(d: &CausalDistribution1D, p0: f64, tol: f64) -> Result<Complex64, SplitError> {
    Ok(retarded_part_central(d, p0, tol)? - d.evaluate(p0))
}

/// Advanced part from the mirrored prescription 1/(p0 - k - i0), whose pole
/// term enters with the opposite sign.
pub fn advanced_part_mirrored(
    d: &CausalDistribution1D,
    p0: f64,
    tol: f64,
) -> Result<Complex64, SplitError> {
    Ok(dispersion_pv(d, p0, 0.0, tol)? - pole_half(d, p0))
}

/// A retarded part evaluated on demand, optionally plus a fixed polynomial.
#[derive(Debug, Clone)]
pub struct RetardedPart {
    pub source: CausalDistribution1D,
    pub subtraction_point: f64,
    pub tol: f64,
    /// ascending coefficients added to every evaluation
    pub offset: Vec<Complex64>,
}

impl RetardedPart {
    pub fn central(source: CausalDistribution1D, tol: f64) -> Self {
        Self {
            source,
            subtraction_point: 0.0,
            tol,
            offset: Vec::new(),
        }
    }

    pub fn shifted(source: CausalDistribution1D, q: f64, tol: f64) -> Result<Self, SplitError> {
        if !(q.abs() < source.k_min) {
            return Err(SplitError::SubtractionOnSupport {
                q,
                k_min: source.k_min,
            });
        }
        Ok(Self {
            source,
            subtraction_point: q,
            tol,
            offset: Vec::new(),
        })
    }

    pub fn with_offset(mut self, coeffs: Vec<Complex64>) -> Self {
        self.offset = coeffs;
        self
    }

    pub fn evaluate(&self, p0: f64) -> Result<Complex64, SplitError> {
        let base = retarded_part_shifted(&self.source, p0, self.subtraction_point, self.tol)?;
        let poly = self
            .offset
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * p0 + c);
        Ok(base + poly)
    }
}

/// Least-squares polynomial of degree <= w fitted to rA - rB.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialResidual {
    /// ascending: c0 + c1 p + ... + c_w p^w
    pub coefficients: Vec<Complex64>,
    pub max_abs_deviation: f64,
}

/// Fits the difference of two retarded parts of the same distribution by a
/// polynomial of degree at most the singular order.
pub fn polynomial_residual(
    ra: &RetardedPart,
    rb: &RetardedPart,
    grid: &[f64],
) -> Result<PolynomialResidual, SplitError> {
    if ra.source.id != rb.source.id {
        return Err(SplitError::MismatchedSources);
    }
    let degree = ra.source.singular_order.max(0) as usize;
    let needed = degree + 2;
    if grid.len() < needed {
        return Err(SplitError::TooFewPoints {
            needed,
            got: grid.len(),
        });
    }
    let k_min = ra.source.k_min;
    for &p in grid {
        if (p.abs() - k_min).abs() < BRANCH_EXCLUSION {
            return Err(SplitError::GridNearBranch { p });
        }
    }
    let diffs: Vec<Complex64> = grid
        .iter()
        .map(|&p| Ok(ra.evaluate(p)? - rb.evaluate(p)?))
        .collect::<Result<_, SplitError>>()?;
    let design = DMatrix::from_fn(grid.len(), degree + 1, |i, j| grid[i].powi(j as i32));
    let (coefficients, max_abs_deviation) = least_squares_complex(&design, &diffs)?;
    Ok(PolynomialResidual {
        coefficients,
        max_abs_deviation,
    })
}
