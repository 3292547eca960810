//! Information geometric entropy: the logarithm of the temporal average of
//! the Fisher-density volume of the coordinate box swept by a geodesic.
//!
//! Volumes grow like `exp(sigma0 lambda tau)` and the `sigma` coordinates
//! decay like its inverse, so everything below is carried in logarithms.

use std::f64::consts::LN_2;

use crate::error::{require_positive, Error, Result};
use crate::fit::{ols, LinearFit};
use crate::geodesic::{
    GeodesicPath, GeodesicSpec, GeodesicSpec2D, GeodesicSpec3D, Trajectory, SIGMA_FLOOR,
};
use crate::models::Model;
use crate::quadrature::{legendre_rule, pairwise_sum};

/// `mu_x` and the logarithms of the `sigma` coordinates at one point.
/// `ln_sigma[1]` is unused for the 2D model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxPoint {
    pub mu: f64,
    pub ln_sigma: [f64; 2],
}

/// A path that can report box corners in log form.
pub trait BoxPath {
    fn model(&self) -> Model;
    fn box_point(&self, tau: f64) -> Option<BoxPoint>;
}

impl BoxPath for GeodesicSpec {
    fn model(&self) -> Model {
        GeodesicSpec::model(self)
    }

    fn box_point(&self, tau: f64) -> Option<BoxPoint> {
        let c = self.constants();
        let mu = c.evaluate(tau)[0];
        let ln_sy = match self {
            GeodesicSpec::ThreeD(s) => s.sigma0_prime().ln() - s.lambda_f() * tau,
            GeodesicSpec::TwoD(_) => 0.0,
        };
        Some(BoxPoint {
            mu,
            ln_sigma: [c.ln_sigma(tau), ln_sy],
        })
    }
}

/// The 3D curve of [`crate::geodesic::closed_form_3d_amplitude_two`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeTwoPath(pub GeodesicSpec3D);

impl BoxPath for AmplitudeTwoPath {
    fn model(&self) -> Model {
        Model::ThreeD
    }

    fn box_point(&self, tau: f64) -> Option<BoxPoint> {
        let s = &self.0;
        let u = s.growth_rate() * tau;
        Some(BoxPoint {
            mu: s.mu0() + 2.0 * s.sigma0() * u.tanh(),
            ln_sigma: [
                s.constants().ln_sigma(tau),
                s.sigma0_prime().ln() - s.lambda_f() * tau,
            ],
        })
    }
}

impl BoxPath for Trajectory {
    fn model(&self) -> Model {
        GeodesicPath::model(self)
    }

    fn box_point(&self, tau: f64) -> Option<BoxPoint> {
        let s = self.at(tau)?;
        let mut ln_sigma = [0.0; 2];
        for (slot, &i) in ln_sigma.iter_mut().zip(self.model().sigma_indices()) {
            *slot = clamped_ln(s.theta[i]);
        }
        Some(BoxPoint {
            mu: s.theta[0],
            ln_sigma,
        })
    }
}

fn clamped_ln(sigma: f64) -> f64 {
    if sigma < SIGMA_FLOOR {
        log::warn!("sigma = {sigma:e} clamped to the floor {SIGMA_FLOOR:e}");
        SIGMA_FLOOR.ln()
    } else {
        sigma.ln()
    }
}

/// Coordinate box `[min, max]` per coordinate between two path points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicBox {
    model: Model,
    mu: (f64, f64),
    ln_sigma: [(f64, f64); 2],
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl GeodesicBox {
    pub fn new(model: Model, start: &BoxPoint, end: &BoxPoint) -> Self {
        Self {
            model,
            mu: ordered(start.mu, end.mu),
            ln_sigma: [
                ordered(start.ln_sigma[0], end.ln_sigma[0]),
                ordered(start.ln_sigma[1], end.ln_sigma[1]),
            ],
        }
    }

    pub fn along(path: &dyn BoxPath, tau: f64) -> Option<Self> {
        Some(Self::new(
            path.model(),
            &path.box_point(0.0)?,
            &path.box_point(tau)?,
        ))
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// `[lo, hi]` of coordinate `k` in the model's own coordinates.
    pub fn interval(&self, k: usize) -> (f64, f64) {
        match k {
            0 => self.mu,
            _ => {
                let (a, b) = self.ln_sigma[k - 1];
                (a.exp(), b.exp())
            }
        }
    }

    /// `ln` of the Fisher-density volume; `-inf` for a degenerate box.
    ///
    /// 3D: `2 |d mu| (1/sx_lo - 1/sx_hi) ln(sy_hi / sy_lo)`;
    /// 2D: `2 |d mu| (1/s_lo - 1/s_hi)`.
    pub fn ln_volume(&self) -> f64 {
        let width = self.mu.1 - self.mu.0;
        let (lo, hi) = self.ln_sigma[0];
        // ln(1/lo - 1/hi) = -ln lo + ln(1 - lo/hi)
        let ln_sigma_x = -lo + (-(lo - hi).exp_m1()).ln();
        let mut v = LN_2 + width.ln() + ln_sigma_x;
        if self.model == Model::ThreeD {
            let (a, b) = self.ln_sigma[1];
            v += (b - a).ln();
        }
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }

    pub fn volume(&self) -> f64 {
        self.ln_volume().exp()
    }
}

/// Box volume after parameter value `tau_prime`.
pub fn box_volume(path: &dyn BoxPath, tau_prime: f64) -> Result<f64> {
    Ok(ln_box_volume(path, tau_prime)?.exp())
}

pub fn ln_box_volume(path: &dyn BoxPath, tau_prime: f64) -> Result<f64> {
    let tau_prime = require_positive("tau_prime", tau_prime)?;
    GeodesicBox::along(path, tau_prime)
        .map(|b| b.ln_volume())
        .ok_or(Error::Domain {
            name: "tau_prime",
            requirement: "inside the path's range",
            value: tau_prime,
        })
}

/// Fisher-density volume of `b` by a product Gauss-Legendre rule on
/// `panels` panels per axis, in `mu` and the logarithms of the `sigma`
/// coordinates. The integrand is the model's Fisher density.
pub fn box_volume_quadrature(b: &GeodesicBox, panels: usize) -> Result<f64> {
    const ORDER: usize = 8;
    let axis = |lo: f64, hi: f64| -> Vec<(f64, f64)> {
        let w = (hi - lo) / panels as f64;
        (0..panels)
            .flat_map(|p| {
                let a = lo + w * p as f64;
                legendre_rule(ORDER, a, a + w)
            })
            .collect()
    };
    let mu = axis(b.mu.0, b.mu.1);
    let sx = axis(b.ln_sigma[0].0, b.ln_sigma[0].1);
    let mut terms = Vec::new();
    match b.model {
        Model::TwoD => {
            for &(m, wm) in &mu {
                for &(s, ws) in &sx {
                    let sigma = s.exp();
                    terms.push(wm * ws * sigma * Model::TwoD.fisher_density(&[m, sigma])?);
                }
            }
        }
        Model::ThreeD => {
            let sy = axis(b.ln_sigma[1].0, b.ln_sigma[1].1);
            for &(m, wm) in &mu {
                for &(s, ws) in &sx {
                    for &(t, wt) in &sy {
                        let (a, c) = (s.exp(), t.exp());
                        let rho = Model::ThreeD.fisher_density(&[m, a, c])?;
                        terms.push(wm * ws * wt * a * c * rho);
                    }
                }
            }
        }
    }
    Ok(pairwise_sum(&terms))
}

/// `ln(sum_i exp(x_i))`, `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    let s: Vec<f64> = xs.iter().map(|x| (x - m).exp()).collect();
    m + pairwise_sum(&s).ln()
}

/// `ln((1/tau) int_0^tau exp(f))` by composite Simpson on `n` intervals.
fn ln_simpson_mean(f: &dyn Fn(f64) -> f64, tau: f64, n: usize) -> f64 {
    let h = tau / n as f64;
    let terms: Vec<f64> = (0..=n)
        .map(|i| {
            let w: f64 = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w.ln() + f(h * i as f64)
        })
        .collect();
    (h / 3.0).ln() + log_sum_exp(&terms) - tau.ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedVolume {
    pub value: f64,
    pub ln_value: f64,
    /// `|avg(2n) / avg(n) - 1|` for the doubled grid.
    pub refinement_delta: f64,
}

/// `(1/tau) int_0^tau vol(tau') d tau'` by composite Simpson on `n_grid`
/// intervals, with the result on `2 n_grid` intervals as a convergence check.
pub fn averaged_volume(path: &dyn BoxPath, tau: f64, n_grid: usize) -> Result<AveragedVolume> {
    let tau = require_positive("tau", tau)?;
    if n_grid < 64 || n_grid % 2 == 1 {
        return Err(Error::Domain {
            name: "n_grid",
            requirement: "even and >= 64",
            value: n_grid as f64,
        });
    }
    let f = |t: f64| {
        if t == 0.0 {
            f64::NEG_INFINITY
        } else {
            GeodesicBox::along(path, t).map_or(f64::NAN, |b| b.ln_volume())
        }
    };
    let coarse = ln_simpson_mean(&f, tau, n_grid);
    let fine = ln_simpson_mean(&f, tau, 2 * n_grid);
    if !coarse.is_finite() || !fine.is_finite() {
        return Err(Error::Domain {
            name: "tau",
            requirement: "inside the path's range with a non-degenerate average",
            value: tau,
        });
    }
    Ok(AveragedVolume {
        value: coarse.exp(),
        ln_value: coarse,
        refinement_delta: (fine - coarse).exp_m1().abs(),
    })
}

/// Mean of a scalar function over `[0, tau]` by the same Simpson rule.
pub fn temporal_average(f: &dyn Fn(f64) -> f64, tau: f64, n_grid: usize) -> f64 {
    let h = tau / n_grid as f64;
    let terms: Vec<f64> = (0..=n_grid)
        .map(|i| {
            let w = if i == 0 || i == n_grid {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * f(h * i as f64)
        })
        .collect();
    h / 3.0 * pairwise_sum(&terms) / tau
}

/// `ln` of the closed-form 3D volume
/// `e^{u}/(sigma0^3 lambda'^2 tau) [ (2 sigma0 + mu0) sigma0 lambda_f lambda' tau
///   + (2 sigma0 - mu0) sigma0 lambda_f lambda' tau e^{-2u}
///   - (lambda_f + lambda' sigma0 ln sigma0') (2 sigma0 + mu0)
///   - (sigma0 lambda' ln sigma0' - lambda_f) (2 sigma0 - mu0) e^{-2u} ]`,
/// `u = sigma0 lambda' tau`. `NaN` where the bracket is not positive.
pub fn ln_closed_form_volume_3d(spec: &GeodesicSpec3D, tau: f64) -> f64 {
    let (m, s, lp, lf) = (
        spec.mu0(),
        spec.sigma0(),
        spec.lambda_plus_prime(),
        spec.lambda_f(),
    );
    let ln_s0p = spec.sigma0_prime().ln();
    let u = s * lp * tau;
    let e = (-2.0 * u).exp();
    let bracket = (2.0 * s + m) * s * lf * lp * tau + (2.0 * s - m) * s * lf * lp * tau * e
        - (lf + lp * s * ln_s0p) * (2.0 * s + m)
        - (s * lp * ln_s0p - lf) * (2.0 * s - m) * e;
    if bracket <= 0.0 {
        return f64::NAN;
    }
    u - tau.ln() - 3.0 * s.ln() - 2.0 * lp.ln() + bracket.ln()
}

pub fn closed_form_volume_3d(spec: &GeodesicSpec3D, tau: f64) -> f64 {
    ln_closed_form_volume_3d(spec, tau).exp()
}

/// `ln` of `[(mu0 + 2 sigma0) + (2 sigma0 - mu0) e^{-2u}] / (lambda sigma0^2 tau e^{-u})`.
pub fn ln_closed_form_volume_2d(spec: &GeodesicSpec2D, tau: f64) -> f64 {
    let (m, s, l) = (spec.mu0(), spec.sigma0(), spec.lambda_plus());
    let u = s * l * tau;
    let num = (m + 2.0 * s) + (2.0 * s - m) * (-2.0 * u).exp();
    if num <= 0.0 {
        return f64::NAN;
    }
    num.ln() - l.ln() - 2.0 * s.ln() - tau.ln() + u
}

pub fn closed_form_volume_2d(spec: &GeodesicSpec2D, tau: f64) -> f64 {
    ln_closed_form_volume_2d(spec, tau).exp()
}

/// Leading asymptotic forms of the closed-form volumes.
pub fn closed_form_volume_3d_asymptotic(spec: &GeodesicSpec3D, tau: f64) -> f64 {
    spec.lambda_f() / spec.lambda_plus_prime() * (spec.mu0() + 2.0 * spec.sigma0())
        / spec.sigma0().powi(2)
        * (spec.growth_rate() * tau).exp()
}

pub fn closed_form_volume_2d_asymptotic(spec: &GeodesicSpec2D, tau: f64) -> f64 {
    (spec.mu0() + 2.0 * spec.sigma0()) / (spec.sigma0().powi(2) * spec.lambda_plus())
        * (spec.growth_rate() * tau).exp()
        / tau
}

pub fn ln_closed_form_volume(spec: &GeodesicSpec, tau: f64) -> f64 {
    match spec {
        GeodesicSpec::ThreeD(s) => ln_closed_form_volume_3d(s, tau),
        GeodesicSpec::TwoD(s) => ln_closed_form_volume_2d(s, tau),
    }
}

/// Fit window and grid density for [`ige`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IgeConfig {
    /// Window in units of `sigma0 lambda tau`; the horizon is its end.
    pub window: (f64, f64),
    /// Grid nodes per unit of `sigma0 lambda tau`; even.
    pub resolution: usize,
}

impl IgeConfig {
    pub const DEFAULT_WINDOW: (f64, f64) = (200.0, 500.0);

    pub fn new(window: (f64, f64), resolution: usize) -> Result<Self> {
        let (a, b) = window;
        if !(a.is_finite() && b.is_finite() && 0.0 < a && a < b) {
            return Err(Error::FitWindow {
                start: a,
                end: b,
                problem: "must satisfy 0 < start < end".into(),
            });
        }
        if resolution < 4 || resolution % 2 == 1 {
            return Err(Error::Domain {
                name: "resolution",
                requirement: "even and >= 4",
                value: resolution as f64,
            });
        }
        Ok(Self { window, resolution })
    }
}

impl Default for IgeConfig {
    fn default() -> Self {
        Self {
            window: Self::DEFAULT_WINDOW,
            resolution: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IgeResult {
    pub tau: Vec<f64>,
    /// `ln vol(tau)`.
    pub ln_vol: Vec<f64>,
    /// `S(tau) = ln avg_vol(tau)`.
    pub s: Vec<f64>,
    /// `ln` of the closed-form volume; `NaN` where undefined.
    pub s_closed_form: Vec<f64>,
    pub fit: LinearFit,
    /// Fit window in `tau`.
    pub window: (f64, f64),
    /// Largest `|S|` change in the window when the grid spacing is doubled.
    pub convergence_delta: f64,
}

impl IgeResult {
    pub fn slope(&self) -> f64 {
        self.fit.slope
    }

    pub fn vol(&self) -> Vec<f64> {
        self.ln_vol.iter().map(|v| v.exp()).collect()
    }

    pub fn avg_vol(&self) -> Vec<f64> {
        self.s.iter().map(|v| v.exp()).collect()
    }

    /// Indices of samples inside the fit window.
    pub fn window_indices(&self) -> impl Iterator<Item = usize> + '_ {
        let (a, b) = self.window;
        (0..self.tau.len()).filter(move |&i| self.tau[i] >= a && self.tau[i] <= b)
    }
}

/// Running `ln int_0^{tau_2m} exp(f)` on a uniform grid of spacing `h`,
/// returned at the even nodes `2m`.
fn cumulative_ln_simpson(ln_f: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(ln_f.len() / 2 + 1);
    out.push(f64::NEG_INFINITY);
    let ln_h3 = (h / 3.0).ln();
    let ln4 = 4f64.ln();
    let mut acc = f64::NEG_INFINITY;
    for m in 0..(ln_f.len() - 1) / 2 {
        let panel = ln_h3 + log_sum_exp(&[ln_f[2 * m], ln4 + ln_f[2 * m + 1], ln_f[2 * m + 2]]);
        acc = log_sum_exp(&[acc, panel]);
        out.push(acc);
    }
    out
}

fn entropy_series(
    path: &dyn BoxPath,
    rate: f64,
    horizon: f64,
    per_unit: usize,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let h = 1.0 / (rate * per_unit as f64);
    let n = (horizon / h).ceil() as usize;
    let n = n + n % 2;
    let taus: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let start = path.box_point(0.0).ok_or(Error::Domain {
        name: "tau",
        requirement: "inside the path's range",
        value: 0.0,
    })?;
    let model = path.model();
    let mut ln_vol = Vec::with_capacity(taus.len());
    for &t in &taus {
        let end = path.box_point(t).ok_or(Error::Domain {
            name: "tau",
            requirement: "inside the path's range",
            value: t,
        })?;
        ln_vol.push(if t == 0.0 {
            f64::NEG_INFINITY
        } else {
            GeodesicBox::new(model, &start, &end).ln_volume()
        });
    }
    let cum = cumulative_ln_simpson(&ln_vol, h);
    let even_tau: Vec<f64> = taus.iter().step_by(2).copied().collect();
    let even_vol: Vec<f64> = ln_vol.iter().step_by(2).copied().collect();
    let s = cum
        .iter()
        .zip(&even_tau)
        .map(|(c, t)| {
            if *t == 0.0 {
                f64::NEG_INFINITY
            } else {
                c - t.ln()
            }
        })
        .collect();
    Ok((even_tau, even_vol, s))
}

/// IGE along `path`, whose hyperbolic block has rate `rate = sigma0 lambda`.
/// `ln_closed_form` supplies the comparison column.
pub fn ige_along(
    path: &dyn BoxPath,
    rate: f64,
    ln_closed_form: &dyn Fn(f64) -> f64,
    cfg: &IgeConfig,
) -> Result<IgeResult> {
    let rate = require_positive("rate", rate)?;
    let window = (cfg.window.0 / rate, cfg.window.1 / rate);
    let (tau, ln_vol, s) = entropy_series(path, rate, window.1, cfg.resolution)?;
    let (tc, _, sc) = entropy_series(path, rate, window.1, cfg.resolution / 2)?;

    let mut convergence_delta = 0.0_f64;
    for (t, v) in tc.iter().zip(&sc) {
        if *t >= window.0 && *t <= window.1 {
            // coarse node t sits at fine even index 2k
            let k = (t * rate * cfg.resolution as f64 / 2.0).round() as usize;
            if let Some(f) = s.get(k) {
                convergence_delta = convergence_delta.max((f - v).abs());
            }
        }
    }

    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (t, v) in tau.iter().zip(&s) {
        if *t >= window.0 && *t <= window.1 {
            xs.push(*t);
            ys.push(*v);
        }
    }
    let fit = ols(&xs, &ys).map_err(|e| match e {
        Error::FitWindow { problem, .. } => Error::FitWindow {
            start: window.0,
            end: window.1,
            problem,
        },
        other => other,
    })?;
    let s_closed_form = tau
        .iter()
        .map(|&t| {
            if t == 0.0 {
                f64::NAN
            } else {
                ln_closed_form(t)
            }
        })
        .collect();
    Ok(IgeResult {
        tau,
        ln_vol,
        s,
        s_closed_form,
        fit,
        window,
        convergence_delta,
    })
}

/// IGE along the closed-form geodesic of `spec`.
pub fn ige(spec: &GeodesicSpec, cfg: &IgeConfig) -> Result<IgeResult> {
    let cf = |t: f64| ln_closed_form_volume(spec, t);
    ige_along(spec, spec.growth_rate(), &cf, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IgeSoftening {
    pub three_d: IgeResult,
    pub two_d: IgeResult,
    /// Fitted 2D slope over fitted 3D slope.
    pub ratio: f64,
}

/// Slope ratio of the constrained model's IGE to the 3D model's IGE, with
/// the 2D spec built by [`GeodesicSpec2D::coupled_from`].
pub fn softening_ratio_ige(spec3d: &GeodesicSpec3D, cfg: &IgeConfig) -> Result<IgeSoftening> {
    let three_d = ige(&GeodesicSpec::ThreeD(*spec3d), cfg)?;
    let two_d = ige(
        &GeodesicSpec::TwoD(GeodesicSpec2D::coupled_from(spec3d)),
        cfg,
    )?;
    let ratio = two_d.slope() / three_d.slope();
    Ok(IgeSoftening {
        three_d,
        two_d,
        ratio,
    })
}
