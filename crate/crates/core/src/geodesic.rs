//! Geodesics of the Gaussian models: closed-form paths, the geodesic
//! equations, and their adaptive numerical integration.
//!
//! The `(mu_x, sigma)` block of both models is a hyperbolic half-plane, and
//! its geodesics through a point with `d sigma / d tau = 0` are
//!
//! ```text
//! sigma(tau) = c1 sech(u),   mu_x(tau) = c4 - kappa c1 + kappa c1 tanh(u),
//! u = c1 sqrt(c2) (tau + c3),   kappa = A1 / sqrt(c2),
//! ```
//!
//! with the first integral `d mu_x / d tau = A1 sigma^2`. The 3D model has
//! `c2 = A1^2 / 2` (so `kappa = sqrt 2`) and the 2D model has `c2 = A1^2 / 4`
//! (so `kappa = 2`). `sigma_y` decays as `sigma0' exp(-lambda_f tau)`.

use std::f64::consts::SQRT_2;

use crate::error::{require_finite, require_positive, Error, Result};
use crate::models::Model;
use crate::ode::{dopri5, OdeOptions, OdeOutcome, StopReason};

/// Integration aborts once any `sigma` component drops to this value.
pub const SIGMA_FLOOR: f64 = 1e-300;
pub const MIN_TOL: f64 = 1e-13;
pub const MAX_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicSpec3D {
    mu0: f64,
    sigma0: f64,
    sigma0_prime: f64,
    lambda_plus_prime: f64,
    lambda_f: f64,
    horizon: Option<(f64, f64)>,
}

impl GeodesicSpec3D {
    pub fn new(
        mu0: f64,
        sigma0: f64,
        sigma0_prime: f64,
        lambda_plus_prime: f64,
        lambda_f: f64,
    ) -> Result<Self> {
        Ok(Self {
            mu0: require_finite("mu0", mu0)?,
            sigma0: require_positive("sigma0", sigma0)?,
            sigma0_prime: require_positive("sigma0_prime", sigma0_prime)?,
            lambda_plus_prime: require_positive("lambda_plus_prime", lambda_plus_prime)?,
            lambda_f: require_positive("lambda_f", lambda_f)?,
            horizon: None,
        })
    }

    /// Sets `lambda_f = ln(sigma0' / epsilon) / tau_f`, so that
    /// `sigma_y(tau_f) = epsilon`.
    pub fn from_horizon(
        mu0: f64,
        sigma0: f64,
        sigma0_prime: f64,
        lambda_plus_prime: f64,
        tau_f: f64,
        epsilon: f64,
    ) -> Result<Self> {
        let lambda_f = Self::horizon_rate(sigma0_prime, tau_f, epsilon)?;
        let mut spec = Self::new(mu0, sigma0, sigma0_prime, lambda_plus_prime, lambda_f)?;
        spec.horizon = Some((tau_f, epsilon));
        Ok(spec)
    }

    /// Attaches `(tau_f, epsilon)` to a spec whose `lambda_f` is already set,
    /// requiring agreement to `1e-12` relative.
    pub fn with_horizon(mut self, tau_f: f64, epsilon: f64) -> Result<Self> {
        let implied = Self::horizon_rate(self.sigma0_prime, tau_f, epsilon)?;
        if ((implied - self.lambda_f) / self.lambda_f).abs() > 1e-12 {
            return Err(Error::Domain {
                name: "lambda_f",
                requirement: "equal to ln(sigma0_prime / epsilon) / tau_f",
                value: self.lambda_f,
            });
        }
        self.horizon = Some((tau_f, epsilon));
        Ok(self)
    }

    fn horizon_rate(sigma0_prime: f64, tau_f: f64, epsilon: f64) -> Result<f64> {
        let tau_f = require_positive("tau_f", tau_f)?;
        let epsilon = require_positive("epsilon", epsilon)?;
        if epsilon >= sigma0_prime {
            return Err(Error::Domain {
                name: "epsilon",
                requirement: "below sigma0_prime",
                value: epsilon,
            });
        }
        Ok((sigma0_prime / epsilon).ln() / tau_f)
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }
    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }
    pub fn sigma0_prime(&self) -> f64 {
        self.sigma0_prime
    }
    pub fn lambda_plus_prime(&self) -> f64 {
        self.lambda_plus_prime
    }
    pub fn lambda_f(&self) -> f64 {
        self.lambda_f
    }
    pub fn horizon(&self) -> Option<(f64, f64)> {
        self.horizon
    }

    pub fn constants(&self) -> DerivedConstants {
        DerivedConstants::for_model(Model::ThreeD, self.mu0, self.sigma0, self.lambda_plus_prime)
    }

    /// Rate `sigma0 lambda_+'` of the hyperbolic block.
    pub fn growth_rate(&self) -> f64 {
        self.sigma0 * self.lambda_plus_prime
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicSpec2D {
    mu0: f64,
    sigma0: f64,
    lambda_plus: f64,
}

impl GeodesicSpec2D {
    pub fn new(mu0: f64, sigma0: f64, lambda_plus: f64) -> Result<Self> {
        Ok(Self {
            mu0: require_finite("mu0", mu0)?,
            sigma0: require_positive("sigma0", sigma0)?,
            lambda_plus: require_positive("lambda_plus", lambda_plus)?,
        })
    }

    /// The constrained counterpart of a 3D spec: same `mu0`, `sigma0` and
    /// `lambda_+ = lambda_+' / sqrt 2`.
    pub fn coupled_from(spec: &GeodesicSpec3D) -> Self {
        Self {
            mu0: spec.mu0,
            sigma0: spec.sigma0,
            lambda_plus: spec.lambda_plus_prime / SQRT_2,
        }
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }
    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }
    pub fn lambda_plus(&self) -> f64 {
        self.lambda_plus
    }

    pub fn constants(&self) -> DerivedConstants {
        DerivedConstants::for_model(Model::TwoD, self.mu0, self.sigma0, self.lambda_plus)
    }

    pub fn growth_rate(&self) -> f64 {
        self.sigma0 * self.lambda_plus
    }
}

/// Integration constants of the `(mu_x, sigma)` geodesic family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub a: f64,
    pub a1: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl DerivedConstants {
    /// Constants with `c3 = 0`, `sigma(0) = sigma0`, `mu_x(0) = mu0` and
    /// `sqrt(a) = lambda`.
    pub fn for_model(model: Model, mu0: f64, sigma0: f64, lambda: f64) -> Self {
        let a = lambda * lambda;
        let a1 = match model {
            Model::ThreeD => (2.0 * a).sqrt(),
            Model::TwoD => (4.0 * a).sqrt(),
        };
        let kappa = a1 / a.sqrt();
        Self {
            a,
            a1,
            c1: sigma0,
            c2: a,
            c3: 0.0,
            c4: mu0 + kappa * sigma0,
        }
    }

    /// `A1 / sqrt(c2)`: the `mu_x` excursion in units of `c1`.
    pub fn mu_amplitude(&self) -> f64 {
        self.a1 / self.c2.sqrt()
    }

    /// `sqrt(a) = lambda`.
    pub fn lambda(&self) -> f64 {
        self.a.sqrt()
    }

    fn phase(&self, tau: f64) -> f64 {
        self.c1 * self.c2.sqrt() * (tau + self.c3)
    }

    /// `(mu_x, sigma, d mu_x/d tau, d sigma/d tau)` of the family member.
    pub fn evaluate(&self, tau: f64) -> [f64; 4] {
        let u = self.phase(tau);
        let kappa = self.mu_amplitude();
        let sigma = self.c1 * sech(u);
        let t = u.tanh();
        let mu = self.c4 - kappa * self.c1 + kappa * self.c1 * t;
        let dmu = self.a1 * sigma * sigma;
        let dsigma = -self.c1 * self.c2.sqrt() * sigma * t;
        [mu, sigma, dmu, dsigma]
    }

    /// `ln sigma(tau)`, accurate where `sigma` itself underflows.
    pub fn ln_sigma(&self, tau: f64) -> f64 {
        let u = self.phase(tau).abs();
        self.c1.ln() + std::f64::consts::LN_2 - u - (-2.0 * u).exp().ln_1p()
    }
}

fn sech(u: f64) -> f64 {
    let e = (-u.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Coordinates and velocities at one parameter value. Entries past `dim`
/// are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicState {
    pub dim: usize,
    pub theta: [f64; 3],
    pub velocity: [f64; 3],
}

impl GeodesicState {
    pub fn theta(&self) -> &[f64] {
        &self.theta[..self.dim]
    }
    pub fn velocity(&self) -> &[f64] {
        &self.velocity[..self.dim]
    }

    pub(crate) fn from_flat(dim: usize, y: &[f64]) -> Self {
        let mut s = Self {
            dim,
            theta: [0.0; 3],
            velocity: [0.0; 3],
        };
        s.theta[..dim].copy_from_slice(&y[..dim]);
        s.velocity[..dim].copy_from_slice(&y[dim..2 * dim]);
        s
    }

    pub(crate) fn to_flat(self) -> Vec<f64> {
        let mut v = self.theta().to_vec();
        v.extend_from_slice(self.velocity());
        v
    }
}

/// The 3D geodesic `(mu_x, sigma_x, sigma_y)` with `sigma_x'(0) = 0`:
/// `mu_x = mu0 + sqrt(2) sigma0 tanh(sigma0 lambda_+' tau)`,
/// `sigma_x = sigma0 sech(sigma0 lambda_+' tau)`,
/// `sigma_y = sigma0' exp(-lambda_f tau)`.
pub fn closed_form_3d(spec: &GeodesicSpec3D, tau: f64) -> GeodesicState {
    let [mu, sx, dmu, dsx] = spec.constants().evaluate(tau);
    let sy = spec.sigma0_prime * (-spec.lambda_f * tau).exp();
    GeodesicState {
        dim: 3,
        theta: [mu, sx, sy],
        velocity: [dmu, dsx, -spec.lambda_f * sy],
    }
}

/// The `(mu_x, sigma_x, sigma_y)` curve whose `mu_x` excursion is
/// `2 sigma0` instead of `sqrt(2) sigma0`:
/// `mu_x = ((mu0 + 2 sigma0)(1 + e^{2u}) - 4 sigma0) / (1 + e^{2u})` with
/// `u = sigma0 lambda_+' tau`, and `sigma_x`, `sigma_y` as in
/// [`closed_form_3d`].
///
/// This curve does not solve the 3D geodesic equations: the `sigma_x`
/// equation leaves the residual `lambda_+'^2 sigma_x^3`. It is kept because
/// [`crate::entropy::closed_form_volume_3d`] is the temporal average of the box
/// volume along this curve.
pub fn closed_form_3d_amplitude_two(spec: &GeodesicSpec3D, tau: f64) -> GeodesicState {
    let mut s = closed_form_3d(spec, tau);
    let u = spec.growth_rate() * tau;
    let sx = s.theta[1];
    s.theta[0] = spec.mu0 + 2.0 * spec.sigma0 * u.tanh();
    s.velocity[0] = 2.0 * spec.lambda_plus_prime * sx * sx;
    s
}

/// `mu_x = mu0 + 2 sigma0 tanh(sigma0 lambda_+ tau)`,
/// `sigma = sigma0 sech(sigma0 lambda_+ tau)`.
pub fn closed_form_2d(spec: &GeodesicSpec2D, tau: f64) -> GeodesicState {
    let [mu, s, dmu, ds] = spec.constants().evaluate(tau);
    GeodesicState {
        dim: 2,
        theta: [mu, s, 0.0],
        velocity: [dmu, ds, 0.0],
    }
}

/// Either model's spec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeodesicSpec {
    ThreeD(GeodesicSpec3D),
    TwoD(GeodesicSpec2D),
}

impl GeodesicSpec {
    pub fn model(&self) -> Model {
        match self {
            GeodesicSpec::ThreeD(_) => Model::ThreeD,
            GeodesicSpec::TwoD(_) => Model::TwoD,
        }
    }

    pub fn closed_form(&self, tau: f64) -> GeodesicState {
        match self {
            GeodesicSpec::ThreeD(s) => closed_form_3d(s, tau),
            GeodesicSpec::TwoD(s) => closed_form_2d(s, tau),
        }
    }

    pub fn constants(&self) -> DerivedConstants {
        match self {
            GeodesicSpec::ThreeD(s) => s.constants(),
            GeodesicSpec::TwoD(s) => s.constants(),
        }
    }

    /// `sigma0 lambda` of the hyperbolic block.
    pub fn growth_rate(&self) -> f64 {
        match self {
            GeodesicSpec::ThreeD(s) => s.growth_rate(),
            GeodesicSpec::TwoD(s) => s.growth_rate(),
        }
    }

    pub fn sigma0(&self) -> f64 {
        match self {
            GeodesicSpec::ThreeD(s) => s.sigma0,
            GeodesicSpec::TwoD(s) => s.sigma0,
        }
    }

    pub fn mu0(&self) -> f64 {
        match self {
            GeodesicSpec::ThreeD(s) => s.mu0,
            GeodesicSpec::TwoD(s) => s.mu0,
        }
    }
}

impl From<GeodesicSpec3D> for GeodesicSpec {
    fn from(s: GeodesicSpec3D) -> Self {
        GeodesicSpec::ThreeD(s)
    }
}

impl From<GeodesicSpec2D> for GeodesicSpec {
    fn from(s: GeodesicSpec2D) -> Self {
        GeodesicSpec::TwoD(s)
    }
}

/// A curve on one of the model manifolds, sampled by parameter value.
pub trait GeodesicPath {
    fn model(&self) -> Model;
    fn state(&self, tau: f64) -> Option<GeodesicState>;
}

impl GeodesicPath for GeodesicSpec {
    fn model(&self) -> Model {
        GeodesicSpec::model(self)
    }
    fn state(&self, tau: f64) -> Option<GeodesicState> {
        Some(self.closed_form(tau))
    }
}

/// Adapts a closure `tau -> state` into a [`GeodesicPath`].
pub struct FnPath<F> {
    pub model: Model,
    pub f: F,
}

impl<F: Fn(f64) -> GeodesicState> GeodesicPath for FnPath<F> {
    fn model(&self) -> Model {
        self.model
    }
    fn state(&self, tau: f64) -> Option<GeodesicState> {
        Some((self.f)(tau))
    }
}

/// `d^2 theta^k / d tau^2 = -Gamma^k_lm v^l v^m` with the analytic connection.
pub fn geodesic_rhs(model: Model, theta: &[f64], velocity: &[f64]) -> Result<[f64; 3]> {
    let n = model.dim();
    if velocity.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: velocity.len(),
        });
    }
    let gamma = model.christoffel(theta)?;
    let mut acc = [0.0; 3];
    for (k, a) in acc.iter_mut().enumerate().take(n) {
        let mut s = 0.0;
        for l in 0..n {
            for m in 0..n {
                s += gamma.get(k, l, m) * velocity[l] * velocity[m];
            }
        }
        *a = -s;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverMeta {
    pub tol: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
}

/// A numerically integrated geodesic with dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    model: Model,
    outcome: OdeOutcome,
    pub meta: SolverMeta,
}

impl Trajectory {
    pub fn model(&self) -> Model {
        self.model
    }

    /// Solver step times.
    pub fn taus(&self) -> &[f64] {
        &self.outcome.ts
    }

    /// State at each solver step.
    pub fn samples(&self) -> Vec<GeodesicState> {
        let n = self.model.dim();
        self.outcome
            .ys
            .iter()
            .map(|y| GeodesicState::from_flat(n, y))
            .collect()
    }

    pub fn tau_end(&self) -> f64 {
        self.outcome.t_last()
    }

    pub fn stop_reason(&self) -> &StopReason {
        &self.outcome.stop
    }

    pub fn is_complete(&self) -> bool {
        self.outcome.stop.is_completed()
    }

    /// Converts an early stop into [`Error::IntegrationAborted`].
    pub fn require_complete(&self) -> Result<&Self> {
        match &self.outcome.stop {
            StopReason::Completed => Ok(self),
            other => Err(Error::IntegrationAborted {
                tau: self.tau_end(),
                reason: format!("{other:?}"),
            }),
        }
    }

    /// Dense-output state at `tau`.
    pub fn at(&self, tau: f64) -> Option<GeodesicState> {
        self.outcome
            .eval(tau)
            .map(|y| GeodesicState::from_flat(self.model.dim(), &y))
    }

    /// Dense-output states on `grid`; stops at the first point outside the
    /// integrated range.
    pub fn resample(&self, grid: &[f64]) -> Vec<(f64, GeodesicState)> {
        grid.iter()
            .map_while(|&t| self.at(t).map(|s| (t, s)))
            .collect()
    }
}

impl GeodesicPath for Trajectory {
    fn model(&self) -> Model {
        self.model
    }
    fn state(&self, tau: f64) -> Option<GeodesicState> {
        self.at(tau)
    }
}

/// `g_lm v^l v^m` at a state.
pub fn fisher_speed_sq(model: Model, state: &GeodesicState) -> Result<f64> {
    Ok(model.metric(state.theta())?.norm_sq(state.velocity()))
}

pub(crate) fn check_tol(tol: f64) -> Result<f64> {
    if (MIN_TOL..=MAX_TOL).contains(&tol) {
        Ok(tol)
    } else {
        Err(Error::Domain {
            name: "tol",
            requirement: "within [1e-13, 1e-6]",
            value: tol,
        })
    }
}

pub(crate) fn sigma_guard(model: Model, theta: &[f64]) -> std::result::Result<(), String> {
    for &i in model.sigma_indices() {
        let s = theta[i];
        if !(s > SIGMA_FLOOR) {
            return Err(format!(
                "coordinate {i} reached {s:e}, at or below the floor {SIGMA_FLOOR:e}"
            ));
        }
    }
    Ok(())
}

/// Integrates the geodesic equations from the closed-form initial data of
/// `spec` over `[0, tau_max]` with relative tolerance `tol`.
///
/// Early stops (sigma floor, step underflow) return the partial trajectory;
/// see [`Trajectory::stop_reason`].
pub fn integrate_geodesic(spec: &GeodesicSpec, tau_max: f64, tol: f64) -> Result<Trajectory> {
    let tol = check_tol(tol)?;
    let tau_max = require_positive("tau_max", tau_max)?;
    let model = spec.model();
    let n = model.dim();
    let y0 = spec.closed_form(0.0).to_flat();
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        sigma_guard(model, &y[..n])?;
        let acc = geodesic_rhs(model, &y[..n], &y[n..]).map_err(|e| e.to_string())?;
        dy[..n].copy_from_slice(&y[n..]);
        dy[n..].copy_from_slice(&acc[..n]);
        Ok(())
    };
    let check = |_t: f64, y: &[f64]| sigma_guard(model, &y[..n]);
    let outcome = dopri5(rhs, 0.0, &y0, tau_max, &OdeOptions::relative(tol), check);
    if !outcome.stop.is_completed() {
        log::warn!("geodesic integration stopped early: {:?}", outcome.stop);
    }
    Ok(Trajectory {
        model,
        meta: SolverMeta {
            tol,
            accepted_steps: outcome.accepted,
            rejected_steps: outcome.rejected,
            rhs_evaluations: outcome.rhs_evaluations,
        },
        outcome,
    })
}

/// Largest deviation `max_k |theta^k_a - theta^k_b|` (coordinates and
/// velocities) between two paths over `grid`.
pub fn sup_deviation(a: &dyn GeodesicPath, b: &dyn GeodesicPath, grid: &[f64]) -> Option<f64> {
    let mut worst = 0.0_f64;
    for &t in grid {
        let (sa, sb) = (a.state(t)?, b.state(t)?);
        for k in 0..sa.dim {
            worst = worst
                .max((sa.theta[k] - sb.theta[k]).abs())
                .max((sa.velocity[k] - sb.velocity[k]).abs());
        }
    }
    Some(worst)
}

/// Per-equation residuals of the geodesic equations along a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub per_equation: [f64; 3],
    pub max: f64,
}

/// Plugs analytic velocities and central-difference accelerations of `path`
/// into the geodesic equations on `grid` and reports the largest residual of
/// each equation.
pub fn residual_check(path: &dyn GeodesicPath, grid: &[f64]) -> Result<ResidualReport> {
    let model = path.model();
    let n = model.dim();
    let mut per_equation = [0.0_f64; 3];
    for &t in grid {
        let h = 1e-4 * t.abs().max(1.0);
        let missing = || Error::Domain {
            name: "tau",
            requirement: "inside the path's range",
            value: t,
        };
        let s = path.state(t).ok_or_else(missing)?;
        let (sp, sm) = (
            path.state(t + h).ok_or_else(missing)?,
            path.state(t - h).ok_or_else(missing)?,
        );
        let rhs = geodesic_rhs(model, s.theta(), s.velocity())?;
        for k in 0..n {
            let acc = (sp.velocity[k] - sm.velocity[k]) / (2.0 * h);
            per_equation[k] = per_equation[k].max((acc - rhs[k]).abs());
        }
    }
    let max = per_equation.iter().copied().fold(0.0, f64::max);
    Ok(ResidualReport { per_equation, max })
}

/// Residual of `sigma_y sigma_y'' - sigma_y'^2 = 0` along a 3D path, using
/// central differences for `sigma_y''`.
pub fn sigma_y_residual(path: &dyn GeodesicPath, grid: &[f64]) -> Option<f64> {
    let mut worst = 0.0_f64;
    for &t in grid {
        let h = 1e-4 * t.abs().max(1.0);
        let (s, sp, sm) = (path.state(t)?, path.state(t + h)?, path.state(t - h)?);
        let acc = (sp.velocity[2] - sm.velocity[2]) / (2.0 * h);
        worst = worst.max((s.theta[2] * acc - s.velocity[2].powi(2)).abs());
    }
    Some(worst)
}

/// `n + 1` equally spaced points on `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn unit3() -> GeodesicSpec3D {
        GeodesicSpec3D::new(0.0, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let a = geodesic_rhs(Model::ThreeD, &[0.0, 1.0, 1.0], &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(a, [0.0, -0.5, 0.0]);
        let a = geodesic_rhs(Model::ThreeD, &[3.0, 0.2, 5.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(a, [0.0; 3]);
        let a = geodesic_rhs(Model::TwoD, &[0.0, 1.0], &[2.0, 0.0]).unwrap();
        assert_eq!(a[1], -1.0);
        assert!(geodesic_rhs(Model::TwoD, &[0.0, -1.0], &[2.0, 0.0]).is_err());
    }

    #[test]
    fn closed_form_initial_data() {
        let spec = GeodesicSpec3D::new(0.7, 1.3, 0.4, 0.9, 2.0).unwrap();
        let s = closed_form_3d(&spec, 0.0);
        assert_abs_diff_eq!(s.theta[0], 0.7, epsilon = 1e-15);
        assert_eq!(&s.theta[1..], &[1.3, 0.4]);
        assert_abs_diff_eq!(s.velocity[0], SQRT_2 * 0.9 * 1.3 * 1.3, epsilon = 1e-15);
        assert_eq!(s.velocity[1], 0.0);
        assert_abs_diff_eq!(s.velocity[2], -0.8, epsilon = 1e-15);

        let s2 = closed_form_2d(&GeodesicSpec2D::new(0.7, 1.3, 0.9).unwrap(), 0.0);
        assert_abs_diff_eq!(s2.theta[0], 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(s2.velocity[0], 2.0 * 0.9 * 1.3 * 1.3, epsilon = 1e-15);
    }

    #[test]
    fn sigma_at_unit_phase() {
        let s = closed_form_3d(&unit3(), 1.0);
        assert_abs_diff_eq!(s.theta[1], 2.0 * E / (1.0 + E * E), epsilon = 1e-15);
        assert_abs_diff_eq!(s.theta[1], 0.648054, epsilon = 1e-6);
        assert_abs_diff_eq!(s.theta[0], SQRT_2 * 1f64.tanh(), epsilon = 1e-15);
        let s2 = closed_form_2d(
            &GeodesicSpec2D::new(0.0, 1.0, 1.0 / SQRT_2).unwrap(),
            SQRT_2,
        );
        assert_abs_diff_eq!(s2.theta[1], 2.0 * E / (1.0 + E * E), epsilon = 1e-15);
    }

    #[test]
    fn amplitude_two_curve_values() {
        let s = closed_form_3d_amplitude_two(&unit3(), 1.0);
        let e2 = E * E;
        assert_abs_diff_eq!(
            s.theta[0],
            (2.0 * (1.0 + e2) - 4.0) / (1.0 + e2),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(s.theta[0], 1.523188, epsilon = 1e-6);
    }

    #[test]
    fn amplitude_two_curve_is_not_a_3d_geodesic() {
        let spec = unit3();
        let path = FnPath {
            model: Model::ThreeD,
            f: |t| closed_form_3d_amplitude_two(&spec, t),
        };
        let r = residual_check(&path, &[0.5]).unwrap();
        let sx = closed_form_3d(&spec, 0.5).theta[1];
        assert_abs_diff_eq!(r.per_equation[1], sx.powi(3), epsilon = 1e-7);
        assert!(r.per_equation[0] < 1e-7);
    }

    #[test]
    fn limits() {
        let spec = GeodesicSpec3D::new(1.0, 2.0, 3.0, 1.0, 0.5).unwrap();
        let s = closed_form_3d(&spec, 400.0);
        assert_abs_diff_eq!(s.theta[0], 1.0 + SQRT_2 * 2.0, epsilon = 1e-12);
        assert!(s.theta[1] < 1e-300 && s.theta[2] < 1e-80);
        let c = spec.constants();
        assert_abs_diff_eq!(
            c.ln_sigma(400.0),
            2.0 * (2.0f64).ln() - 800.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn coupled_2d_matches_3d_block_with_rescaled_rate() {
        let s3 = GeodesicSpec3D::new(0.5, 1.5, 1.0, 1.2, 1.0).unwrap();
        let s2 = GeodesicSpec2D::coupled_from(&s3);
        assert_abs_diff_eq!(s2.lambda_plus(), 1.2 / SQRT_2, epsilon = 1e-15);
        // Same sigma functional form once the rate is substituted.
        let s3_at_2d_rate = GeodesicSpec3D::new(0.5, 1.5, 1.0, s2.lambda_plus(), 1.0).unwrap();
        for t in [0.1, 1.0, 3.0] {
            assert_abs_diff_eq!(
                closed_form_2d(&s2, t).theta[1],
                closed_form_3d(&s3_at_2d_rate, t).theta[1],
                epsilon = 1e-15
            );
        }
        assert!(s2.growth_rate() < s3.growth_rate());
    }

    #[test]
    fn horizon_rate() {
        let s = GeodesicSpec3D::from_horizon(0.0, 1.0, 2.0, 1.0, 10.0, 0.02).unwrap();
        assert_abs_diff_eq!(s.lambda_f(), (100.0f64).ln() / 10.0, epsilon = 1e-15);
        let sy = closed_form_3d(&s, 10.0).theta[2];
        assert_abs_diff_eq!(sy, 0.02, epsilon = 1e-15);
        assert!(GeodesicSpec3D::from_horizon(0.0, 1.0, 2.0, 1.0, 10.0, 3.0).is_err());
        let plain = GeodesicSpec3D::new(0.0, 1.0, 2.0, 1.0, s.lambda_f()).unwrap();
        assert!(plain.with_horizon(10.0, 0.02).is_ok());
        assert!(plain.with_horizon(10.0, 0.03).is_err());
    }

    #[test]
    fn closed_forms_solve_the_equations() {
        let grid = uniform_grid(0.0, 10.0, 99);
        let spec: GeodesicSpec = unit3().into();
        assert!(residual_check(&spec, &grid).unwrap().max < 1e-6);
        assert!(sigma_y_residual(&spec, &grid).unwrap() < 1e-8);
        let spec2: GeodesicSpec = GeodesicSpec2D::new(0.0, 1.0, 1.0).unwrap().into();
        assert!(residual_check(&spec2, &grid).unwrap().max < 1e-6);
    }

    #[test]
    fn numeric_matches_closed_form() {
        let grid = uniform_grid(0.0, 10.0, 1000);
        for spec in [
            GeodesicSpec::from(unit3()),
            GeodesicSpec::from(GeodesicSpec2D::coupled_from(&unit3())),
        ] {
            let traj = integrate_geodesic(&spec, 10.0, 1e-10).unwrap();
            assert!(traj.is_complete());
            let dev = sup_deviation(&traj, &spec, &grid).unwrap();
            assert!(dev < 1e-8, "{:?}: {dev}", spec.model());
            let v0 = fisher_speed_sq(spec.model(), &traj.at(0.0).unwrap()).unwrap();
            let v1 = fisher_speed_sq(spec.model(), &traj.at(10.0).unwrap()).unwrap();
            assert!(((v1 - v0) / v0).abs() < 1e-6);
        }
    }

    #[test]
    fn tighter_tolerance_tracks_closer() {
        let spec = GeodesicSpec::from(unit3());
        let grid = uniform_grid(0.0, 10.0, 200);
        let dev = |tol| {
            let t = integrate_geodesic(&spec, 10.0, tol).unwrap();
            sup_deviation(&t, &spec, &grid).unwrap()
        };
        assert!(dev(1e-10) < dev(1e-8));
    }

    #[test]
    fn tolerance_bounds() {
        let spec = GeodesicSpec::from(unit3());
        assert!(integrate_geodesic(&spec, 1.0, 1e-14).is_err());
        assert!(integrate_geodesic(&spec, 1.0, 1e-5).is_err());
    }

    #[test]
    fn sigma_floor_stops_integration() {
        let spec = GeodesicSpec::from(GeodesicSpec3D::new(0.0, 1.0, 1.0, 1.0, 10.0).unwrap());
        let traj = integrate_geodesic(&spec, 100.0, 1e-8).unwrap();
        assert!(!traj.is_complete());
        assert!(traj.require_complete().is_err());
        assert!(traj.tau_end() < 100.0);
        for s in traj.samples() {
            assert!(s.theta[2] > SIGMA_FLOOR);
        }
    }

    proptest! {
        #[test]
        fn first_integral_and_monotone_sigma(
            mu0 in -5.0f64..5.0, s0 in 0.2f64..3.0, lam in 0.2f64..3.0, t in 0.0f64..20.0,
        ) {
            let spec = GeodesicSpec3D::new(mu0, s0, 1.0, lam, 1.0).unwrap();
            let c = spec.constants();
            let s = closed_form_3d(&spec, t);
            prop_assert!((s.velocity[0] - c.a1 * s.theta[1].powi(2)).abs() <= 1e-10);
            prop_assert!(s.velocity[1] <= 0.0);
            prop_assert!((c.a - c.a1 * c.a1 / 2.0).abs() < 1e-12 * c.a);
            prop_assert!((c.lambda() - lam).abs() < 1e-12 * lam);
            let s2 = GeodesicSpec2D::new(mu0, s0, lam).unwrap();
            let c2 = s2.constants();
            let st = closed_form_2d(&s2, t);
            prop_assert!((st.velocity[0] - c2.a1 * st.theta[1].powi(2)).abs() <= 1e-10);
            prop_assert!((c2.a - c2.a1 * c2.a1 / 4.0).abs() < 1e-12 * c2.a);
            let later = closed_form_3d(&spec, t + 0.1);
            prop_assert!(later.theta[1] < s.theta[1]);
        }
    }
}
