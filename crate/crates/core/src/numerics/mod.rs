//! Quadrature, least-squares series fitting and small dense solves.

pub mod fit;
pub mod linalg;
pub mod quadrature;

pub use fit::{fit_series, fit_series_refined, fit_series_weighted, BasisTerm, SeriesFit};
pub use linalg::{least_squares_complex, linear_regression, solve_linear, LineFit};
pub use quadrature::{
    integrate_adaptive, integrate_adaptive_points, integrate_adaptive_with, integrate_pv,
    integrate_pv_complex, integrate_real, Interval, QuadOptions, QuadratureResult,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("tolerances must be positive and finite (rel {rel}, abs {abs})")]
    InvalidTolerance { rel: f64, abs: f64 },
    #[error("quadrature did not converge: estimate {} +- {} after {} evaluations", partial.value, partial.abs_error_estimate, partial.evaluations)]
    NotConverged { partial: QuadratureResult },
    #[error("integrand produced a non-finite value")]
    NonFinite,
    #[error("pole {pole} is not strictly inside [{lo}, {hi}]")]
    PoleAtEndpoint { pole: f64, lo: f64, hi: f64 },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample abscissae must be positive and span at least one decade")]
    InsufficientSpan,
    #[error("ill-conditioned design (condition {condition:.3e}); most collinear basis pair: {first} / {second}")]
    IllConditioned {
        condition: f64,
        first: String,
        second: String,
    },
    #[error("singular matrix (determinant {det:e})")]
    Singular { det: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
