//! Least-squares fits used for tail-slope and constant extraction.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares `y ~ slope x + intercept`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Dimension {
            expected: n,
            actual: y.len(),
        });
    }
    let window = |problem: &str| Error::FitWindow {
        start: x.first().copied().unwrap_or(f64::NAN),
        end: x.last().copied().unwrap_or(f64::NAN),
        problem: problem.to_string(),
    };
    if n < 3 {
        return Err(window("holds fewer than 3 points"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(window("contains non-finite values"));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(window("has no spread in x"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisFit {
    pub coefficients: Vec<f64>,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

/// Least squares `y ~ sum_j c_j f_j(x)` by SVD.
pub fn basis_least_squares(
    x: &[f64],
    y: &[f64],
    basis: &[&dyn Fn(f64) -> f64],
) -> Result<BasisFit> {
    let (n, m) = (x.len(), basis.len());
    if n != y.len() {
        return Err(Error::Dimension {
            expected: n,
            actual: y.len(),
        });
    }
    if n < m || m == 0 {
        return Err(Error::FitWindow {
            start: x.first().copied().unwrap_or(f64::NAN),
            end: x.last().copied().unwrap_or(f64::NAN),
            problem: format!("holds {n} points for {m} basis functions"),
        });
    }
    let a = DMatrix::from_fn(n, m, |i, j| basis[j](x[i]));
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-14).map_err(|e| Error::FitWindow {
        start: x[0],
        end: x[n - 1],
        problem: e.to_string(),
    })?;
    let r = &a * &c - &b;
    Ok(BasisFit {
        coefficients: c.iter().copied().collect(),
        rms_residual: (r.norm_squared() / n as f64).sqrt(),
    })
}
