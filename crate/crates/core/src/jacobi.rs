//! Geodesic deviation along the model geodesics.
//!
//! The deviation equation `D^2 J^k / D tau^2 + R^k_{n a l} v^n J^a v^l = 0`
//! is expanded into `J'' + D J' + K J = 0` with
//!
//! ```text
//! D^k_a = 2 Gamma^k_ab v^b
//! K^k_a = Gamma^k_ab theta''^b + d_n Gamma^k_ab v^n v^b
//!       + Gamma^k_cd Gamma^c_ab v^b v^d + R^k_{n a l} v^n v^l
//! ```
//!
//! using the analytic connection, its coordinate derivatives and the analytic
//! Riemann tensor. The large-`tau` equations with constant coefficients are
//! only used as a comparison target.

use std::cell::Cell;

use crate::error::{require_positive, Error, Result};
use crate::fit::{basis_least_squares, ols, LinearFit};
use crate::geodesic::{
    check_tol, geodesic_rhs, sigma_guard, GeodesicSpec, GeodesicSpec2D, GeodesicSpec3D,
    GeodesicState, SolverMeta,
};
use crate::models::Model;
use crate::ode::{dopri5, OdeOptions, OdeOutcome, PairedScale, StopReason};

/// Components above this magnitude end the integration.
pub const OVERFLOW_LIMIT: f64 = 1e300;

/// Default fit window in units of `sigma0 lambda tau`.
pub const DEFAULT_WINDOW: (f64, f64) = (20.0, 50.0);

type Mat = [[f64; 3]; 3];

/// Jacobi field components and their `tau` derivatives. Entries past `dim`
/// are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiState {
    pub dim: usize,
    pub j: [f64; 3],
    pub dj: [f64; 3],
}

impl JacobiState {
    pub fn new(j: &[f64], dj: &[f64]) -> Result<Self> {
        if j.len() != dj.len() {
            return Err(Error::Dimension {
                expected: j.len(),
                actual: dj.len(),
            });
        }
        if !(2..=3).contains(&j.len()) {
            return Err(Error::Dimension {
                expected: 3,
                actual: j.len(),
            });
        }
        if j.iter().chain(dj).any(|v| !v.is_finite()) {
            return Err(Error::Domain {
                name: "jacobi state",
                requirement: "finite",
                value: f64::NAN,
            });
        }
        let mut s = Self::zero(j.len());
        s.j[..j.len()].copy_from_slice(j);
        s.dj[..j.len()].copy_from_slice(dj);
        Ok(s)
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            j: [0.0; 3],
            dj: [0.0; 3],
        }
    }

    /// `J(0) = (1, ..., 1) / sqrt(n)`, `J'(0) = 0`.
    pub fn default_initial(model: Model) -> Self {
        let n = model.dim();
        let mut s = Self::zero(n);
        for v in &mut s.j[..n] {
            *v = 1.0 / (n as f64).sqrt();
        }
        s
    }

    pub fn j(&self) -> &[f64] {
        &self.j[..self.dim]
    }

    pub fn dj(&self) -> &[f64] {
        &self.dj[..self.dim]
    }

    /// `alpha self + beta other`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        let mut s = Self::zero(self.dim);
        for k in 0..self.dim {
            s.j[k] = alpha * self.j[k] + beta * other.j[k];
            s.dj[k] = alpha * self.dj[k] + beta * other.dj[k];
        }
        s
    }

    /// Keeps the `(mu_x, sigma)` block of a 3D state.
    pub fn project_2d(&self) -> Self {
        let mut s = *self;
        s.dim = 2;
        s.j[2] = 0.0;
        s.dj[2] = 0.0;
        s
    }
}

/// Coefficients of `J'' + damping J' + stiffness J = 0` at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JlcCoefficients {
    pub dim: usize,
    pub damping: Mat,
    pub stiffness: Mat,
}

pub fn jlc_coefficients(model: Model, state: &GeodesicState) -> Result<JlcCoefficients> {
    let n = model.dim();
    if state.dim != n {
        return Err(Error::Dimension {
            expected: n,
            actual: state.dim,
        });
    }
    let (theta, v) = (state.theta(), state.velocity());
    let gamma = model.christoffel(theta)?;
    let grad = model.christoffel_gradient(theta)?;
    let riemann = model.curvature(theta)?.riemann;
    let acc = geodesic_rhs(model, theta, v)?;

    let mut damping = [[0.0; 3]; 3];
    let mut stiffness = [[0.0; 3]; 3];
    for k in 0..n {
        for a in 0..n {
            let mut d = 0.0;
            let mut s = 0.0;
            for b in 0..n {
                d += 2.0 * gamma.get(k, a, b) * v[b];
                s += gamma.get(k, a, b) * acc[b];
                for m in 0..n {
                    s += grad.get(k, a, b, m) * v[m] * v[b];
                    s += riemann.get(k, b, a, m) * v[b] * v[m];
                    for c in 0..n {
                        s += gamma.get(k, c, m) * gamma.get(c, a, b) * v[b] * v[m];
                    }
                }
            }
            damping[k][a] = d;
            stiffness[k][a] = s;
        }
    }
    Ok(JlcCoefficients {
        dim: n,
        damping,
        stiffness,
    })
}

/// `d^2 J / d tau^2` at one geodesic and Jacobi state.
pub fn jlc_rhs_full(model: Model, state: &GeodesicState, jacobi: &JacobiState) -> Result<[f64; 3]> {
    if jacobi.dim != model.dim() {
        return Err(Error::Dimension {
            expected: model.dim(),
            actual: jacobi.dim,
        });
    }
    let c = jlc_coefficients(model, state)?;
    Ok(apply(&c, &jacobi.j, &jacobi.dj))
}

fn apply(c: &JlcCoefficients, j: &[f64], dj: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for k in 0..c.dim {
        for a in 0..c.dim {
            out[k] -= c.damping[k][a] * dj[a] + c.stiffness[k][a] * j[a];
        }
    }
    out
}

/// `sqrt(g_lm J^l J^m)` with the diagonal model metrics written out.
pub fn intensity(model: Model, state: &GeodesicState, jacobi: &JacobiState) -> f64 {
    let [_, s, sy] = state.theta;
    let [j1, j2, j3] = jacobi.j;
    match model {
        Model::ThreeD => ((j1 * j1 + 2.0 * j2 * j2) / (s * s) + 2.0 * j3 * j3 / (sy * sy)).sqrt(),
        Model::TwoD => ((j1 * j1 + 4.0 * j2 * j2) / (s * s)).sqrt(),
    }
}

/// A co-integrated geodesic and Jacobi field.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiTrajectory {
    spec: GeodesicSpec,
    outcome: OdeOutcome,
    /// Set when a component exceeded [`OVERFLOW_LIMIT`].
    pub truncated: bool,
    pub meta: SolverMeta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiSample {
    pub tau: f64,
    pub geodesic: GeodesicState,
    pub jacobi: JacobiState,
    pub intensity: f64,
}

impl JacobiTrajectory {
    pub fn model(&self) -> Model {
        self.spec.model()
    }

    pub fn spec(&self) -> &GeodesicSpec {
        &self.spec
    }

    /// `Lambda = sigma0 lambda` of the underlying geodesic.
    pub fn rate(&self) -> f64 {
        self.spec.growth_rate()
    }

    pub fn tau_end(&self) -> f64 {
        self.outcome.t_last()
    }

    pub fn stop_reason(&self) -> &StopReason {
        &self.outcome.stop
    }

    pub fn at(&self, tau: f64) -> Option<JacobiSample> {
        let y = self.outcome.eval(tau)?;
        let n = self.model().dim();
        let geodesic = GeodesicState::from_flat(n, &y[..2 * n]);
        let mut jacobi = JacobiState::zero(n);
        jacobi.j[..n].copy_from_slice(&y[2 * n..3 * n]);
        jacobi.dj[..n].copy_from_slice(&y[3 * n..]);
        Some(JacobiSample {
            tau,
            geodesic,
            jacobi,
            intensity: intensity(self.model(), &geodesic, &jacobi),
        })
    }

    /// Samples on `grid`, stopping at the first point past the integrated range.
    pub fn sample(&self, grid: &[f64]) -> Vec<JacobiSample> {
        grid.iter().map_while(|&t| self.at(t)).collect()
    }
}

/// Integrates the geodesic of `spec` together with the Jacobi field started
/// from `initial` over `[0, tau_max]`.
pub fn integrate_jlc(
    spec: &GeodesicSpec,
    initial: &JacobiState,
    tau_max: f64,
    tol: f64,
) -> Result<JacobiTrajectory> {
    let tol = check_tol(tol)?;
    let tau_max = require_positive("tau_max", tau_max)?;
    let model = spec.model();
    let n = model.dim();
    if initial.dim != n {
        return Err(Error::Dimension {
            expected: n,
            actual: initial.dim,
        });
    }
    let mut y0 = spec.closed_form(0.0).to_flat();
    y0.extend_from_slice(initial.j());
    y0.extend_from_slice(initial.dj());

    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        sigma_guard(model, &y[..n])?;
        let state = GeodesicState::from_flat(n, &y[..2 * n]);
        let acc = geodesic_rhs(model, &y[..n], &y[n..2 * n]).map_err(|e| e.to_string())?;
        let c = jlc_coefficients(model, &state).map_err(|e| e.to_string())?;
        let jdd = apply(&c, &y[2 * n..3 * n], &y[3 * n..]);
        dy[..n].copy_from_slice(&y[n..2 * n]);
        dy[n..2 * n].copy_from_slice(&acc[..n]);
        dy[2 * n..3 * n].copy_from_slice(&y[3 * n..]);
        dy[3 * n..].copy_from_slice(&jdd[..n]);
        Ok(())
    };
    let overflowed = Cell::new(false);
    let check = |_t: f64, y: &[f64]| {
        sigma_guard(model, &y[..n])?;
        if y[2 * n..].iter().any(|v| v.abs() > OVERFLOW_LIMIT) {
            overflowed.set(true);
            return Err(format!("Jacobi field exceeded {OVERFLOW_LIMIT:e}"));
        }
        Ok(())
    };
    // J' components are measured against Lambda |J| so that a derivative
    // decaying into rounding noise does not stall the step size.
    let opts = OdeOptions {
        paired_scale: Some(PairedScale {
            positions: 2 * n,
            velocities: 3 * n,
            len: n,
            rate: spec.growth_rate(),
        }),
        ..OdeOptions::relative(tol)
    };
    let outcome = dopri5(rhs, 0.0, &y0, tau_max, &opts, check);
    if !outcome.stop.is_completed() {
        log::warn!("Jacobi integration stopped early: {:?}", outcome.stop);
    }
    Ok(JacobiTrajectory {
        spec: *spec,
        truncated: overflowed.get(),
        meta: SolverMeta {
            tol,
            accepted_steps: outcome.accepted,
            rejected_steps: outcome.rejected,
            rhs_evaluations: outcome.rhs_evaluations,
        },
        outcome,
    })
}

/// Integration constants of the large-`tau` solutions
///
/// ```text
/// J^1 = C^1_1 + C^1_2 exp(-2 Lambda tau)
/// J^2 = (C^2_1 + C^2_2 tau) exp(-Lambda tau)
/// J^3 = (C^3_1 + C^3_2 tau) exp(-lambda_f tau)     (3D only)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiConstants {
    pub model: Model,
    /// `Lambda = sigma0 lambda`.
    pub rate: f64,
    /// `lambda_f`; unused for the 2D model.
    pub lambda_f: f64,
    pub c: [[f64; 2]; 3],
}

impl JacobiConstants {
    pub fn new(spec: &GeodesicSpec, c: [[f64; 2]; 3]) -> Self {
        let lambda_f = match spec {
            GeodesicSpec::ThreeD(s) => s.lambda_f(),
            GeodesicSpec::TwoD(_) => 0.0,
        };
        Self {
            model: spec.model(),
            rate: spec.growth_rate(),
            lambda_f,
            c,
        }
    }

    /// `(Lambda_3D, Lambda_2D)` for a 3D spec and its coupled 2D spec.
    pub fn coupled_rates(spec: &GeodesicSpec3D) -> (f64, f64) {
        (
            spec.growth_rate(),
            GeodesicSpec2D::coupled_from(spec).growth_rate(),
        )
    }

    /// Decay rate of component `k` in the critically damped rows.
    fn decay(&self, k: usize) -> f64 {
        if k == 1 {
            self.rate
        } else {
            self.lambda_f
        }
    }
}

/// Evaluates the large-`tau` solutions and their derivatives.
pub fn asymptotic_jlc_solutions(constants: &JacobiConstants, tau: f64) -> JacobiState {
    let n = constants.model.dim();
    let mut s = JacobiState::zero(n);
    let [c1, c2] = constants.c[0];
    let e = (-2.0 * constants.rate * tau).exp();
    s.j[0] = c1 + c2 * e;
    s.dj[0] = -2.0 * constants.rate * c2 * e;
    for k in 1..n {
        let [a, b] = constants.c[k];
        let l = constants.decay(k);
        let e = (-l * tau).exp();
        s.j[k] = (a + b * tau) * e;
        s.dj[k] = (b - l * (a + b * tau)) * e;
    }
    s
}

/// Largest residual of the asymptotic solutions in
/// `J1'' + 2 Lambda J1' = 0`, `J'' + 2 l J' + l^2 J = 0`, with second
/// derivatives by central differences of the first.
pub fn asymptotic_residual(constants: &JacobiConstants, grid: &[f64]) -> f64 {
    let n = constants.model.dim();
    let mut worst = 0.0_f64;
    for &t in grid {
        let h = 1e-5 * t.abs().max(1.0);
        let s = asymptotic_jlc_solutions(constants, t);
        let p = asymptotic_jlc_solutions(constants, t + h);
        let m = asymptotic_jlc_solutions(constants, t - h);
        let jdd = |k: usize| (p.dj[k] - m.dj[k]) / (2.0 * h);
        worst = worst.max((jdd(0) + 2.0 * constants.rate * s.dj[0]).abs());
        for k in 1..n {
            let l = constants.decay(k);
            worst = worst.max((jdd(k) + 2.0 * l * s.dj[k] + l * l * s.j[k]).abs());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub exponent: f64,
    pub r_squared: f64,
    /// Window in `tau`.
    pub window: (f64, f64),
    pub fit: LinearFit,
}

fn tau_window(traj: &JacobiTrajectory, window: (f64, f64)) -> Result<(f64, f64)> {
    let rate = traj.rate();
    let (a, b) = (window.0 / rate, window.1 / rate);
    if !(0.0 <= a && a < b) || b > traj.tau_end() * (1.0 + 1e-12) {
        return Err(Error::FitWindow {
            start: a,
            end: b,
            problem: format!("must lie inside [0, {}]", traj.tau_end()),
        });
    }
    Ok((a, b.min(traj.tau_end())))
}

fn window_samples(
    traj: &JacobiTrajectory,
    window: (f64, f64),
    points: usize,
) -> Result<Vec<JacobiSample>> {
    let (a, b) = tau_window(traj, window)?;
    let grid: Vec<f64> = (0..points)
        .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
        .collect();
    Ok(traj.sample(&grid))
}

/// Least-squares slope of `ln J_M` against `tau` on `window`, given in units
/// of `sigma0 lambda tau`.
pub fn exponent_fit(traj: &JacobiTrajectory, window: (f64, f64)) -> Result<ExponentFit> {
    let samples = window_samples(traj, window, 301)?;
    let (a, b) = tau_window(traj, window)?;
    if let Some(bad) = samples.iter().find(|s| !(s.intensity > 0.0)) {
        return Err(Error::FitWindow {
            start: a,
            end: b,
            problem: format!("intensity {} at tau = {}", bad.intensity, bad.tau),
        });
    }
    let x: Vec<f64> = samples.iter().map(|s| s.tau).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.intensity.ln()).collect();
    let fit = ols(&x, &y)?;
    Ok(ExponentFit {
        exponent: fit.slope,
        r_squared: fit.r_squared,
        window: (a, b),
        fit,
    })
}

/// Constants fitted to a numeric tail with the mismatch per component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticMatch {
    pub constants: JacobiConstants,
    /// `max |J^1 - asymptotic| / |C^1_1|` over the window.
    pub plateau_deviation: f64,
    /// For `k >= 2`: `max |J^k e^{l tau} - (C_1 + C_2 tau)| / max |C_1 + C_2 tau|`.
    pub envelope_deviation: [f64; 2],
}

/// Fits the asymptotic constants to the numeric solution on `window` (units
/// of `sigma0 lambda tau`) against the bases `{1, e^{-2 Lambda tau}}` and
/// `{1, tau}` after removing the exponential envelope.
pub fn extract_constants(traj: &JacobiTrajectory, window: (f64, f64)) -> Result<AsymptoticMatch> {
    let samples = window_samples(traj, window, 301)?;
    let n = traj.model().dim();
    let mut constants = JacobiConstants::new(traj.spec(), [[0.0; 2]; 3]);
    let x: Vec<f64> = samples.iter().map(|s| s.tau).collect();

    let rate = constants.rate;
    let one = |_: f64| 1.0;
    let decay = move |t: f64| (-2.0 * rate * t).exp();
    let y1: Vec<f64> = samples.iter().map(|s| s.jacobi.j[0]).collect();
    let f1 = basis_least_squares(&x, &y1, &[&one, &decay])?;
    constants.c[0] = [f1.coefficients[0], f1.coefficients[1]];

    let lin = |t: f64| t;
    for k in 1..n {
        let l = constants.decay(k);
        let yk: Vec<f64> = samples
            .iter()
            .map(|s| s.jacobi.j[k] * (l * s.tau).exp())
            .collect();
        let fk = basis_least_squares(&x, &yk, &[&one, &lin])?;
        constants.c[k] = [fk.coefficients[0], fk.coefficients[1]];
    }

    let mut plateau_deviation = 0.0_f64;
    let mut envelope_deviation = [0.0_f64; 2];
    let mut scale = [0.0_f64; 2];
    for s in &samples {
        let a = asymptotic_jlc_solutions(&constants, s.tau);
        plateau_deviation = plateau_deviation.max((s.jacobi.j[0] - a.j[0]).abs());
        for k in 1..n {
            let w = (constants.decay(k) * s.tau).exp();
            envelope_deviation[k - 1] =
                envelope_deviation[k - 1].max((s.jacobi.j[k] - a.j[k]).abs() * w);
            scale[k - 1] = scale[k - 1].max((a.j[k] * w).abs());
        }
    }
    plateau_deviation /= constants.c[0][0].abs();
    for k in 0..n - 1 {
        envelope_deviation[k] /= scale[k];
    }
    Ok(AsymptoticMatch {
        constants,
        plateau_deviation,
        envelope_deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SofteningGap {
    pub three_d: ExponentFit,
    pub two_d: ExponentFit,
    /// Fitted 3D exponent minus fitted 2D exponent.
    pub gap: f64,
}

/// Fits the intensity exponents of the 3D geodesic and its coupled 2D
/// geodesic. The 2D run starts from the `(J^1, J^2)` block of `initial`.
pub fn softening_gap(
    spec: &GeodesicSpec3D,
    initial: &JacobiState,
    window: (f64, f64),
    tol: f64,
) -> Result<SofteningGap> {
    let s3 = GeodesicSpec::ThreeD(*spec);
    let s2 = GeodesicSpec::TwoD(GeodesicSpec2D::coupled_from(spec));
    let run = |s: &GeodesicSpec, init: &JacobiState| -> Result<ExponentFit> {
        let traj = integrate_jlc(s, init, window.1 / s.growth_rate(), tol)?;
        if !traj.stop_reason().is_completed() {
            return Err(Error::IntegrationAborted {
                tau: traj.tau_end(),
                reason: format!("{:?}", traj.stop_reason()),
            });
        }
        exponent_fit(&traj, window)
    };
    let three_d = run(&s3, initial)?;
    let two_d = run(&s2, &initial.project_2d())?;
    Ok(SofteningGap {
        three_d,
        two_d,
        gap: three_d.exponent - two_d.exponent,
    })
}
