//! Finite-difference differential geometry for an arbitrary metric field.
//!
//! Derivatives are second-order central differences with the per-coordinate
//! step `h * max(1, |theta_k|)`. Curvature differentiates the numerically
//! obtained connection a second time, so nothing here uses the closed forms
//! of [`crate::models`].

use crate::error::{Error, Result};
use crate::models::Model;
use crate::tensor::{
    ChristoffelGradient, ChristoffelSymbols, Curvature, MetricTensor, RicciTensor, RiemannTensor,
    MAX_DIM,
};

/// Default relative finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;

/// A metric tensor field `theta -> g(theta)` of fixed dimension.
pub trait MetricField {
    fn dim(&self) -> usize;
    fn evaluate(&self, theta: &[f64]) -> Result<MetricTensor>;
}

impl MetricField for Model {
    fn dim(&self) -> usize {
        Model::dim(*self)
    }

    fn evaluate(&self, theta: &[f64]) -> Result<MetricTensor> {
        self.metric(theta)
    }
}

/// Adapts a closure into a [`MetricField`].
pub struct FnMetricField<F> {
    dim: usize,
    f: F,
}

impl<F> FnMetricField<F>
where
    F: Fn(&[f64]) -> Result<MetricTensor>,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> MetricField for FnMetricField<F>
where
    F: Fn(&[f64]) -> Result<MetricTensor>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, theta: &[f64]) -> Result<MetricTensor> {
        let g = (self.f)(theta)?;
        if g.dim() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: g.dim(),
            });
        }
        Ok(g)
    }
}

fn check_input(field: &dyn MetricField, theta: &[f64], h: f64) -> Result<()> {
    if theta.len() != field.dim() {
        return Err(Error::Dimension {
            expected: field.dim(),
            actual: theta.len(),
        });
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Domain {
            name: "h",
            requirement: "finite and > 0",
            value: h,
        });
    }
    Ok(())
}

fn step_for(theta_k: f64, h: f64) -> f64 {
    h * theta_k.abs().max(1.0)
}

/// Evaluates `f` at `theta +/- step e_k`. A domain failure on either side is
/// reported as [`Error::StepLeavesDomain`].
fn shifted_pair<T>(
    theta: &[f64],
    k: usize,
    step: f64,
    f: impl Fn(&[f64]) -> Result<T>,
) -> Result<(T, T)> {
    let mut t = [0.0; MAX_DIM];
    let n = theta.len();
    t[..n].copy_from_slice(theta);
    let leaves = |_| Error::StepLeavesDomain {
        coordinate: k,
        value: theta[k],
        step,
    };
    t[k] = theta[k] + step;
    let plus = f(&t[..n]).map_err(leaves)?;
    t[k] = theta[k] - step;
    let minus = f(&t[..n]).map_err(leaves)?;
    Ok((plus, minus))
}

/// `Gamma^k_ij = 1/2 g^km (d_i g_mj + d_j g_im - d_m g_ij)` with numerically
/// differentiated `g`.
pub fn christoffel_numeric(
    field: &dyn MetricField,
    theta: &[f64],
    h: f64,
) -> Result<ChristoffelSymbols> {
    check_input(field, theta, h)?;
    let n = field.dim();
    let g = field.evaluate(theta)?;
    // dg[l][i][j] = d_l g_ij
    let mut dg = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
    for (l, dgl) in dg.iter_mut().enumerate().take(n) {
        let step = step_for(theta[l], h);
        let (gp, gm) = shifted_pair(theta, l, step, |t| field.evaluate(t))?;
        for i in 0..n {
            for j in 0..n {
                dgl[i][j] = (gp.get(i, j) - gm.get(i, j)) / (2.0 * step);
            }
        }
    }
    let mut out = ChristoffelSymbols::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for m in 0..n {
                    s += g.inverse(k, m) * (dg[i][m][j] + dg[j][i][m] - dg[m][i][j]);
                }
                out.set(k, i, j, 0.5 * s);
            }
        }
    }
    Ok(out)
}

/// Numerical `d_l Gamma^k_ij` by central differences of [`christoffel_numeric`].
pub fn christoffel_gradient_numeric(
    field: &dyn MetricField,
    theta: &[f64],
    h: f64,
) -> Result<ChristoffelGradient> {
    check_input(field, theta, h)?;
    let n = field.dim();
    let mut out = ChristoffelGradient::zeros(n);
    for l in 0..n {
        let step = step_for(theta[l], h);
        let (cp, cm) = shifted_pair(theta, l, step, |t| christoffel_numeric(field, t, h))?;
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let d = (cp.get(k, i, j) - cm.get(k, i, j)) / (2.0 * step);
                    out.set_sym(k, i, j, l, d);
                }
            }
        }
    }
    Ok(out)
}

/// Riemann tensor `R^a_{mnr}` from the numerical connection and its gradient.
pub fn riemann_numeric(field: &dyn MetricField, theta: &[f64], h: f64) -> Result<RiemannTensor> {
    let gamma = christoffel_numeric(field, theta, h)?;
    let grad = christoffel_gradient_numeric(field, theta, h)?;
    Ok(RiemannTensor::from_connection(&gamma, &grad))
}

pub fn ricci_numeric(field: &dyn MetricField, theta: &[f64], h: f64) -> Result<RicciTensor> {
    Ok(riemann_numeric(field, theta, h)?.ricci())
}

pub fn scalar_numeric(field: &dyn MetricField, theta: &[f64], h: f64) -> Result<f64> {
    Ok(curvature_numeric(field, theta, h)?.scalar)
}

pub fn curvature_numeric(field: &dyn MetricField, theta: &[f64], h: f64) -> Result<Curvature> {
    let riemann = riemann_numeric(field, theta, h)?;
    let g = field.evaluate(theta)?;
    Ok(Curvature::from_riemann(riemann, &g))
}
