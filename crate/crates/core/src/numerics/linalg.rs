use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;

use super::NumericsError;

/// Solves the 3x3 system `a x = b` by LU with one refinement step.
pub fn solve_linear(a: [[f64; 3]; 3], b: [f64; 3]) -> Result<[f64; 3], NumericsError> {
    let m = Matrix3::from_fn(|i, j| a[i][j]);
    let rhs = Vector3::from_row_slice(&b);
    let det = m.determinant();
    let scale: f64 = (0..3).map(|i| m.row(i).norm()).product();
    if !det.is_finite() || det.abs() <= 1e-14 * scale {
        return Err(NumericsError::Singular { det });
    }
    let lu = m.lu();
    let mut x = lu.solve(&rhs).ok_or(NumericsError::Singular { det })?;
    let r = rhs - m * x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    Ok([x[0], x[1], x[2]])
}

pub(crate) struct LstsqOutput {
    pub coefficients: Vec<f64>,
    pub condition: f64,
    pub scaled_design: DMatrix<f64>,
}

/// Least squares with unit-norm column equilibration, solved by SVD.
pub(crate) fn lstsq(design: &DMatrix<f64>, y: &DVector<f64>) -> Result<LstsqOutput, NumericsError> {
    let (rows, cols) = design.shape();
    if rows != y.len() {
        return Err(NumericsError::Dimension(format!(
            "{rows} rows vs {} samples",
            y.len()
        )));
    }
    if rows < cols {
        return Err(NumericsError::TooFewSamples {
            needed: cols,
            got: rows,
        });
    }
    let mut scaled = design.clone();
    let mut norms = vec![1.0; cols];
    for (j, norm) in norms.iter_mut().enumerate() {
        let n = scaled.column(j).norm();
        if n > 0.0 {
            scaled.column_mut(j).scale_mut(1.0 / n);
            *norm = n;
        }
    }
    let svd = scaled.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    let sol = svd
        .solve(y, 0.0)
        .map_err(|e| NumericsError::Dimension(e.to_string()))?;
    let coefficients = (0..cols).map(|j| sol[j] / norms[j]).collect();
    Ok(LstsqOutput {
        coefficients,
        condition,
        scaled_design: scaled,
    })
}

/// Real design, complex data: the real and imaginary parts share the design.
/// Returns the coefficients and the largest absolute residual.
pub fn least_squares_complex(
    design: &DMatrix<f64>,
    y: &[Complex64],
) -> Result<(Vec<Complex64>, f64), NumericsError> {
    let re = DVector::from_iterator(y.len(), y.iter().map(|z| z.re));
    let im = DVector::from_iterator(y.len(), y.iter().map(|z| z.im));
    let a = lstsq(design, &re)?;
    let b = lstsq(design, &im)?;
    let coeffs: Vec<Complex64> = a
        .coefficients
        .iter()
        .zip(&b.coefficients)
        .map(|(&r, &i)| Complex64::new(r, i))
        .collect();
    let mut max_dev: f64 = 0.0;
    for (row, &target) in y.iter().enumerate() {
        let mut fit = Complex64::new(0.0, 0.0);
        for (j, c) in coeffs.iter().enumerate() {
            fit += c * design[(row, j)];
        }
        max_dev = max_dev.max((fit - target).norm());
    }
    Ok((coeffs, max_dev))
}

/// Straight-line least-squares fit y = slope x + intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// coefficient of determination
    pub r_squared: f64,
    /// root-mean-square residual
    pub rms_residual: f64,
}

pub fn linear_regression(x: &[f64], y: &[f64]) -> Result<LineFit, NumericsError> {
    if x.len() != y.len() {
        return Err(NumericsError::Dimension(format!(
            "{} abscissae, {} ordinates",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(NumericsError::TooFewSamples {
            needed: 3,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    let design = DMatrix::from_fn(x.len(), 2, |i, j| if j == 0 { x[i] } else { 1.0 });
    let out = lstsq(&design, &DVector::from_column_slice(y))?;
    let (slope, intercept) = (out.coefficients[0], out.coefficients[1]);
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|b| (b - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        rms_residual: (ss_res / n).sqrt(),
    })
}
