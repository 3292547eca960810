//! The experiment pipelines behind each subcommand.
//!
//! Every run is a pure function of the configuration: it returns its report
//! and its CSV tables as bytes, and the caller decides what to write.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io;

use rayon::prelude::*;
use thiserror::Error;

use infogeo::entropy::{
    averaged_volume, ige, ln_closed_form_volume, softening_ratio_ige, IgeResult,
};
use infogeo::export::{write_ige_csv, write_jacobi_csv, write_table_csv, write_trajectory_csv};
use infogeo::fisher::{fisher_numeric_2d, fisher_numeric_3d, QuadratureSpec};
use infogeo::geodesic::{
    closed_form_3d_amplitude_two, fisher_speed_sq, integrate_geodesic, residual_check,
    sigma_y_residual, sup_deviation, uniform_grid, FnPath, GeodesicSpec, GeodesicSpec3D,
};
use infogeo::geometry::{christoffel_numeric, curvature_numeric, DEFAULT_STEP};
use infogeo::jacobi::{exponent_fit, extract_constants, integrate_jlc, softening_gap};
use infogeo::models::{Model, Model2DConfig, ParameterPoint2D, ParameterPoint3D};

use crate::config::{ConfigError, ExperimentConfig, ModelSelection};
use crate::report::{Check, Comparison, RunReport};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical abort: {0}")]
    Numerical(#[from] infogeo::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io { .. } => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

/// A report and the CSV tables produced alongside it, keyed by file name.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: RunReport,
    pub tables: Vec<(String, Vec<u8>)>,
}

impl RunOutput {
    fn new(report: RunReport) -> Self {
        Self {
            report,
            tables: Vec::new(),
        }
    }

    fn table<F>(&mut self, name: impl Into<String>, write: F)
    where
        F: FnOnce(&mut Vec<u8>) -> io::Result<()>,
    {
        let mut buf = Vec::new();
        write(&mut buf).expect("writing to memory");
        self.tables.push((name.into(), buf));
    }
}

// Thresholds of the verification checks.
pub const CURVATURE_ANALYTIC_TOL: f64 = 1e-12;
pub const CURVATURE_NUMERIC_TOL: f64 = 1e-4;
pub const CHRISTOFFEL_NUMERIC_TOL: f64 = 1e-6;
pub const FISHER_TOL: f64 = 1e-8;
pub const IDENTITY_TOL: f64 = 1e-6;
pub const GEODESIC_DEVIATION_TOL: f64 = 1e-8;
pub const SPEED_DRIFT_TOL: f64 = 1e-6;
pub const RESIDUAL_TOL: f64 = 1e-6;
pub const SIGMA_Y_RESIDUAL_TOL: f64 = 1e-8;
pub const IGE_SLOPE_TOL: f64 = 0.02;
pub const IGE_CONVERGENCE_TOL: f64 = 1e-5;
pub const VOLUME_CROSS_CHECK_TOL: f64 = 0.05;
pub const VOLUME_CROSS_CHECK_WINDOW: (f64, f64) = (20.0, 50.0);
pub const RATIO_TOL: f64 = 0.01;
pub const EXPONENT_TOL: f64 = 0.02;
pub const LOG_LINEARITY_R2: f64 = 0.999;
pub const GAP_TOL: f64 = 0.03;
pub const J3_ANALYTIC_TOL: f64 = 1e-8;
pub const PLATEAU_TOL: f64 = 1e-6;
pub const ENVELOPE_TOL: f64 = 1e-4;

fn halton(mut i: usize, base: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Deterministic low-discrepancy points with `mu_x` in `[-2, 2]` and the
/// `sigma` coordinates in `[0.5, 2.5]`.
pub fn verification_points(n: usize) -> Vec<[f64; 3]> {
    (1..=n)
        .map(|i| {
            [
                -2.0 + 4.0 * halton(i, 2),
                0.5 + 2.0 * halton(i, 3),
                0.5 + 2.0 * halton(i, 5),
            ]
        })
        .collect()
}

fn farthest(values: impl IntoIterator<Item = f64>, target: f64) -> f64 {
    values.into_iter().fold(target, |w, v| {
        if (v - target).abs() > (w - target).abs() || v.is_nan() {
            v
        } else {
            w
        }
    })
}

/// Analytic against numeric geometry and Fisher quadrature on a point set.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mut out = RunOutput::new(RunReport::new("verify-geometry"));
    let q = QuadratureSpec::gauss_hermite(cfg.quadrature_nodes)?;
    let model2 = cfg.model2d_config();
    let alt2 = Model2DConfig::new(cfg.capital_sigma_sq * 3.7)?;
    let points = verification_points(cfg.verify_points);

    let mut rows = Vec::new();
    let (mut r3a, mut r2a, mut r3n, mut r2n) = (vec![], vec![], vec![], vec![]);
    let (mut gamma_err, mut fisher3, mut fisher2, mut sigma_sq_dep) =
        (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let (mut asym, mut antisym, mut bianchi, mut min_det) =
        (0.0_f64, 0.0_f64, 0.0_f64, f64::INFINITY);
    for p in &points {
        let th2 = [p[0], p[1]];
        for (model, theta, analytic, numeric) in [
            (Model::ThreeD, &p[..], &mut r3a, &mut r3n),
            (Model::TwoD, &th2[..], &mut r2a, &mut r2n),
        ] {
            analytic.push(model.curvature(theta)?.scalar);
            let c = curvature_numeric(&model, theta, DEFAULT_STEP)?;
            numeric.push(c.scalar);
            antisym = antisym.max(c.riemann.max_antisymmetry_violation());
            bianchi = bianchi.max(c.riemann.max_bianchi_violation());
            let g = christoffel_numeric(&model, theta, DEFAULT_STEP)?;
            gamma_err = gamma_err.max(g.max_abs_diff(&model.christoffel(theta)?));
            asym = asym.max(g.max_lower_asymmetry());
        }
        let f3 = fisher_numeric_3d(&ParameterPoint3D::from_slice(p)?, &q)?;
        let e3 = f3.metric.max_abs_diff(&Model::ThreeD.metric(p)?);
        let pt2 = ParameterPoint2D::from_slice(&th2)?;
        let f2 = fisher_numeric_2d(&pt2, &model2, &q)?;
        let e2 = f2.metric.max_abs_diff(&Model::TwoD.metric(&th2)?);
        let f2b = fisher_numeric_2d(&pt2, &alt2, &q)?;
        sigma_sq_dep = sigma_sq_dep.max(f2.metric.max_abs_diff(&f2b.metric));
        fisher3 = fisher3.max(e3);
        fisher2 = fisher2.max(e2);
        min_det = min_det.min(f3.metric.det()).min(f2.metric.det());
        rows.push(vec![
            p[0],
            p[1],
            p[2],
            *r3n.last().unwrap(),
            *r2n.last().unwrap(),
            e3,
            e2,
        ]);
    }

    let r = &mut out.report;
    let (s3, s2) = (
        Model::ThreeD.scalar_curvature(),
        Model::TwoD.scalar_curvature(),
    );
    r.record("scalar_curvature_3d", s3);
    r.record("scalar_curvature_2d", s2);
    r.record("points", points.len() as f64);
    r.check(Check::absolute(
        "scalar_curvature_3d.analytic",
        farthest(r3a, s3),
        -1.0,
        CURVATURE_ANALYTIC_TOL,
    ));
    r.check(Check::absolute(
        "scalar_curvature_2d.analytic",
        farthest(r2a, s2),
        -0.5,
        CURVATURE_ANALYTIC_TOL,
    ));
    r.check(Check::absolute(
        "scalar_curvature_3d.numeric",
        farthest(r3n, s3),
        -1.0,
        CURVATURE_NUMERIC_TOL,
    ));
    r.check(Check::absolute(
        "scalar_curvature_2d.numeric",
        farthest(r2n, s2),
        -0.5,
        CURVATURE_NUMERIC_TOL,
    ));
    r.check(Check::at_most(
        "christoffel.numeric_max_error",
        gamma_err,
        CHRISTOFFEL_NUMERIC_TOL,
    ));
    r.check(Check::at_most(
        "christoffel.lower_index_asymmetry",
        asym,
        IDENTITY_TOL,
    ));
    r.check(Check::at_most(
        "riemann.antisymmetry",
        antisym,
        IDENTITY_TOL,
    ));
    r.check(Check::at_most(
        "riemann.first_bianchi",
        bianchi,
        IDENTITY_TOL,
    ));
    r.check(Check::at_most("fisher_3d.max_error", fisher3, FISHER_TOL));
    r.check(Check::at_most("fisher_2d.max_error", fisher2, FISHER_TOL));
    r.check(Check::at_most(
        "fisher_2d.sigma_sq_dependence",
        sigma_sq_dep,
        FISHER_TOL,
    ));
    r.check(Check::at_least(
        "metric.min_determinant",
        min_det,
        f64::MIN_POSITIVE,
    ));

    out.table("verify.csv", |w| {
        write_table_csv(
            w,
            "verify",
            &[
                "mu_x",
                "sigma_x",
                "sigma_y",
                "scalar_3d_numeric",
                "scalar_2d_numeric",
                "fisher_3d_error",
                "fisher_2d_error",
            ],
            &rows,
        )
    });
    Ok(out)
}

/// Numeric geodesics against the closed forms.
pub fn run_geodesics(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mut out = RunOutput::new(RunReport::new("geodesics"));
    let grid = uniform_grid(0.0, cfg.tau_max, 1000);
    for spec in cfg.specs() {
        let name = spec.model().name();
        let traj = integrate_geodesic(&spec, cfg.tau_max, cfg.tol)?;
        traj.require_complete()?;
        let dev = sup_deviation(&traj, &spec, &grid).unwrap_or(f64::NAN);
        let samples = traj.resample(&grid);
        let v0 = fisher_speed_sq(spec.model(), &samples[0].1)?.sqrt();
        let mut drift = 0.0_f64;
        for (_, s) in &samples {
            drift = drift.max((fisher_speed_sq(spec.model(), s)?.sqrt() / v0 - 1.0).abs());
        }
        let res_grid = uniform_grid(cfg.tau_max / 100.0, cfg.tau_max, 99);
        let residual = residual_check(&spec, &res_grid)?;

        let r = &mut out.report;
        r.record(
            format!("{name}.accepted_steps"),
            traj.meta.accepted_steps as f64,
        );
        r.record(
            format!("{name}.rhs_evaluations"),
            traj.meta.rhs_evaluations as f64,
        );
        r.check(Check::at_most(
            &format!("{name}.closed_form_deviation"),
            dev,
            GEODESIC_DEVIATION_TOL,
        ));
        r.check(Check::at_most(
            &format!("{name}.speed_drift"),
            drift,
            SPEED_DRIFT_TOL,
        ));
        r.check(Check::at_most(
            &format!("{name}.closed_form_residual"),
            residual.max,
            RESIDUAL_TOL,
        ));
        if let GeodesicSpec::ThreeD(s3) = spec {
            let sy = sigma_y_residual(&spec, &res_grid).unwrap_or(f64::NAN);
            r.check(Check::at_most(
                "3d.sigma_y_residual",
                sy,
                SIGMA_Y_RESIDUAL_TOL,
            ));
            let amplitude_two = FnPath {
                model: Model::ThreeD,
                f: |t: f64| closed_form_3d_amplitude_two(&s3, t),
            };
            let pr = residual_check(&amplitude_two, &res_grid)?;
            r.record("3d.amplitude_two_residual", pr.max);
        }
        out.table(format!("geodesic_{name}.csv"), |w| {
            write_trajectory_csv(w, spec.model(), &samples)
        });
    }
    Ok(out)
}

/// Largest `|avg_vol / V_closed_form - 1|` over `window` (units of
/// `sigma0 lambda tau`) along the closed-form geodesic of `spec`.
pub fn volume_cross_check(
    spec: &GeodesicSpec,
    window: (f64, f64),
    points: usize,
) -> Result<f64, RunError> {
    let rate = spec.growth_rate();
    let mut worst = 0.0_f64;
    for t in uniform_grid(window.0 / rate, window.1 / rate, points) {
        let n = 2 * ((16.0 * rate * t).ceil() as usize).max(32);
        let avg = averaged_volume(spec, t, n)?;
        let dev = (avg.ln_value - ln_closed_form_volume(spec, t))
            .exp_m1()
            .abs();
        worst = if dev.is_nan() {
            f64::NAN
        } else {
            worst.max(dev)
        };
    }
    Ok(worst)
}

fn ige_checks(r: &mut RunReport, name: &str, spec: &GeodesicSpec, res: &IgeResult) {
    r.record(format!("{name}.slope"), res.slope());
    r.record(format!("{name}.r_squared"), res.fit.r_squared);
    r.record(format!("{name}.window_start"), res.window.0);
    r.record(format!("{name}.window_end"), res.window.1);
    r.check(Check::relative(
        &format!("{name}.slope"),
        res.slope(),
        spec.growth_rate(),
        IGE_SLOPE_TOL,
    ));
    r.check(Check::at_most(
        &format!("{name}.grid_convergence"),
        res.convergence_delta,
        IGE_CONVERGENCE_TOL,
    ));
}

/// Entropy series, tail slopes and the closed-form volume cross-check.
pub fn run_ige(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mut out = RunOutput::new(RunReport::new("ige"));
    let icfg = cfg.ige_config();
    let mut slopes = Vec::new();
    for spec in cfg.specs() {
        let name = spec.model().name();
        let res = ige(&spec, &icfg)?;
        ige_checks(&mut out.report, name, &spec, &res);
        let dev = volume_cross_check(&spec, VOLUME_CROSS_CHECK_WINDOW, 30)?;
        out.report.check(Check::at_most(
            &format!("{name}.volume_vs_closed_form"),
            dev,
            VOLUME_CROSS_CHECK_TOL,
        ));
        if let GeodesicSpec::ThreeD(s3) = spec {
            let path = infogeo::entropy::AmplitudeTwoPath(s3);
            let rate = spec.growth_rate();
            let mut worst = 0.0_f64;
            for t in uniform_grid(20.0 / rate, 50.0 / rate, 30) {
                let n = 2 * ((16.0 * rate * t).ceil() as usize).max(32);
                let avg = averaged_volume(&path, t, n)?;
                worst = worst.max(
                    (avg.ln_value - ln_closed_form_volume(&spec, t))
                        .exp_m1()
                        .abs(),
                );
            }
            out.report
                .record("3d.volume_vs_closed_form_on_amplitude_two_curve", worst);
        }
        slopes.push(res.slope());
        out.table(format!("ige_{name}.csv"), |w| write_ige_csv(w, &res));
    }
    if cfg.models == ModelSelection::Coupled {
        let ratio = slopes[1] / slopes[0];
        out.report.record("ratio", ratio);
        out.report
            .check(Check::relative("ratio", ratio, FRAC_1_SQRT_2, RATIO_TOL));
        out.report
            .check(Check::at_most("ratio_below_one", ratio, 1.0 - f64::EPSILON));
    }
    Ok(out)
}

/// Jacobi fields along each selected geodesic.
pub fn run_jacobi(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mut out = RunOutput::new(RunReport::new("jacobi"));
    let window = cfg.jacobi_window;
    let mut exponents = Vec::new();
    for spec in cfg.specs() {
        let model = spec.model();
        let name = model.name();
        let init = cfg.jacobi_initial(model);
        let rate = spec.growth_rate();
        let traj = integrate_jlc(&spec, &init, window.1 / rate, cfg.tol)?;
        if !traj.stop_reason().is_completed() {
            return Err(infogeo::Error::IntegrationAborted {
                tau: traj.tau_end(),
                reason: format!("{:?}", traj.stop_reason()),
            }
            .into());
        }
        let fit = exponent_fit(&traj, window)?;
        let m = extract_constants(&traj, window)?;
        let r = &mut out.report;
        r.record(format!("{name}.exponent"), fit.exponent);
        r.record(format!("{name}.r_squared"), fit.r_squared);
        r.record(format!("{name}.lambda"), rate);
        r.record(format!("{name}.c1_1"), m.constants.c[0][0]);
        r.check(Check::relative(
            &format!("{name}.exponent"),
            fit.exponent,
            rate,
            EXPONENT_TOL,
        ));
        r.check(Check::at_least(
            &format!("{name}.log_linearity_r2"),
            fit.r_squared,
            LOG_LINEARITY_R2,
        ));
        r.check(Check::at_most(
            &format!("{name}.j1_plateau"),
            m.plateau_deviation,
            PLATEAU_TOL,
        ));
        r.check(Check::at_most(
            &format!("{name}.j2_envelope"),
            m.envelope_deviation[0],
            ENVELOPE_TOL,
        ));

        let grid = uniform_grid(0.0, traj.tau_end(), 500);
        let samples = traj.sample(&grid);
        if let GeodesicSpec::ThreeD(s3) = spec {
            let lf = s3.lambda_f();
            let (a, b) = (init.j[2], init.dj[2]);
            let worst = samples
                .iter()
                .map(|s| (s.jacobi.j[2] - (a + (b + lf * a) * s.tau) * (-lf * s.tau).exp()).abs())
                .fold(0.0, f64::max);
            r.check(Check::at_most(
                "3d.j3_critically_damped",
                worst,
                J3_ANALYTIC_TOL,
            ));
            r.check(Check::at_most(
                "3d.j3_envelope",
                m.envelope_deviation[1],
                ENVELOPE_TOL,
            ));
        }
        exponents.push(fit.exponent);
        out.table(format!("jacobi_{name}.csv"), |w| {
            write_jacobi_csv(w, model, &samples)
        });
    }
    if cfg.models == ModelSelection::Coupled {
        let gap = exponents[0] - exponents[1];
        let want = cfg.sigma0 * cfg.lambda_plus_prime * (1.0 - FRAC_1_SQRT_2);
        out.report.record("gap", gap);
        out.report.check(Check::relative("gap", gap, want, GAP_TOL));
        out.report
            .check(Check::at_least("gap_positive", gap, f64::MIN_POSITIVE));
    }
    Ok(out)
}

struct SweepRow {
    sigma0: f64,
    mu0: f64,
    result: Result<([f64; 3], [f64; 3]), infogeo::Error>,
}

fn sweep_point(
    cfg: &ExperimentConfig,
    spec: &GeodesicSpec3D,
) -> Result<([f64; 3], [f64; 3]), infogeo::Error> {
    let s = softening_ratio_ige(spec, &cfg.ige_config())?;
    let g = softening_gap(
        spec,
        &cfg.jacobi_initial(Model::ThreeD),
        cfg.jacobi_window,
        cfg.tol,
    )?;
    Ok((
        [s.three_d.slope(), s.two_d.slope(), s.ratio],
        [g.three_d.exponent, g.two_d.exponent, g.gap],
    ))
}

/// Entropy ratio and Jacobi gap over the `(sigma0, mu0)` sweep, with the
/// series of the base configuration. Sweep points run on the current rayon
/// pool and are reported in sweep order.
pub fn run_softening(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    if cfg.models != ModelSelection::Coupled {
        return Err(ConfigError::Invalid {
            section: "model",
            key: "kind",
            value: format!("{:?}", cfg.models),
            reason: "softening needs kind = coupled".into(),
        }
        .into());
    }
    let mut out = RunOutput::new(RunReport::new("softening"));

    // Base configuration: series and headline numbers.
    let base = cfg.spec3d();
    let s = softening_ratio_ige(&base, &cfg.ige_config())?;
    let g = softening_gap(
        &base,
        &cfg.jacobi_initial(Model::ThreeD),
        cfg.jacobi_window,
        cfg.tol,
    )?;
    let want_gap = base.growth_rate() * (1.0 - FRAC_1_SQRT_2);
    let r = &mut out.report;
    r.record("ratio", s.ratio);
    r.record("gap", g.gap);
    r.record("gap_expected", want_gap);
    r.check(Check::absolute(
        "headline.ratio",
        s.ratio,
        FRAC_1_SQRT_2,
        RATIO_TOL * FRAC_1_SQRT_2,
    ));
    r.check(Check::relative("headline.gap", g.gap, want_gap, GAP_TOL));
    r.check(Check::at_least(
        "headline.exponent_3d_r2",
        g.three_d.r_squared,
        LOG_LINEARITY_R2,
    ));
    r.check(Check::at_least(
        "headline.exponent_2d_r2",
        g.two_d.r_squared,
        LOG_LINEARITY_R2,
    ));
    out.table("softening_ige_3d.csv", |w| write_ige_csv(w, &s.three_d));
    out.table("softening_ige_2d.csv", |w| write_ige_csv(w, &s.two_d));
    for spec in cfg.specs() {
        let model = spec.model();
        let traj = integrate_jlc(
            &spec,
            &cfg.jacobi_initial(model),
            cfg.jacobi_window.1 / spec.growth_rate(),
            cfg.tol,
        )?;
        let samples = traj.sample(&uniform_grid(0.0, traj.tau_end(), 500));
        out.table(format!("softening_jacobi_{}.csv", model.name()), |w| {
            write_jacobi_csv(w, model, &samples)
        });
    }

    let grid: Vec<(f64, f64)> = cfg
        .sweep_sigma0
        .iter()
        .flat_map(|&s0| cfg.sweep_mu0.iter().map(move |&m0| (s0, m0)))
        .collect();
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&(sigma0, mu0)| SweepRow {
            sigma0,
            mu0,
            result: sweep_point(cfg, &cfg.spec3d_at(mu0, sigma0)),
        })
        .collect();

    let mut table = Vec::new();
    let mut ratios = Vec::new();
    for row in rows {
        let tag = format!("sweep[sigma0={},mu0={}]", row.sigma0, row.mu0);
        let want_gap = row.sigma0 * cfg.lambda_plus_prime * (1.0 - FRAC_1_SQRT_2);
        match row.result {
            Ok((ige, jac)) => {
                let r = &mut out.report;
                r.check(Check::relative(
                    &format!("{tag}.ratio"),
                    ige[2],
                    FRAC_1_SQRT_2,
                    RATIO_TOL,
                ));
                r.check(Check::relative(
                    &format!("{tag}.gap"),
                    jac[2],
                    want_gap,
                    GAP_TOL,
                ));
                r.check(Check::at_least(
                    &format!("{tag}.gap_positive"),
                    jac[2],
                    f64::MIN_POSITIVE,
                ));
                ratios.push(ige[2]);
                table.push(vec![
                    row.sigma0, row.mu0, ige[0], ige[1], ige[2], jac[0], jac[1], jac[2], want_gap,
                ]);
            }
            Err(e) => {
                out.report.note(format!("{tag}: {e}"));
                out.report.check(Check::failed(
                    &format!("{tag}.ratio"),
                    Comparison::Relative,
                    Some(FRAC_1_SQRT_2),
                    RATIO_TOL,
                ));
                out.report.check(Check::failed(
                    &format!("{tag}.gap"),
                    Comparison::Relative,
                    Some(want_gap),
                    GAP_TOL,
                ));
            }
        }
    }
    if let (Some(lo), Some(hi)) = (
        ratios.iter().copied().reduce(f64::min),
        ratios.iter().copied().reduce(f64::max),
    ) {
        out.report.check(Check::at_most(
            "sweep.ratio_spread",
            hi / lo - 1.0,
            RATIO_TOL,
        ));
    }
    out.table("softening.csv", |w| {
        write_table_csv(
            w,
            "softening",
            &[
                "sigma0",
                "mu0",
                "ige_slope_3d",
                "ige_slope_2d",
                "ige_ratio",
                "exponent_3d",
                "exponent_2d",
                "gap",
                "gap_expected",
            ],
            &table,
        )
    });
    Ok(out)
}

/// Every pipeline in order; softening only for paired configurations.
pub fn run_all(cfg: &ExperimentConfig) -> Result<Vec<RunOutput>, RunError> {
    let mut outs = vec![
        run_verify(cfg)?,
        run_geodesics(cfg)?,
        run_ige(cfg)?,
        run_jacobi(cfg)?,
    ];
    if cfg.models == ModelSelection::Coupled {
        outs.push(run_softening(cfg)?);
    }
    let mut all = RunReport::new("all");
    for o in &outs {
        all.merge(&o.report.command, o.report.clone());
    }
    outs.push(RunOutput::new(all));
    Ok(outs)
}
