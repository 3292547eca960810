//! Acceptance suite: one PASS/FAIL line per criterion, exit status nonzero if
//! any criterion fails.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use infogeo::entropy::softening_ratio_ige;
use infogeo::fisher::{fisher_numeric_2d, fisher_numeric_3d, QuadratureSpec};
use infogeo::geometry::{christoffel_numeric, curvature_numeric, DEFAULT_STEP};
use infogeo::jacobi::{integrate_jlc, softening_gap, JacobiState};
use infogeo::models::{Model, Model2DConfig, ParameterPoint2D, ParameterPoint3D};
use infogeo_cli::runs::{self, volume_cross_check};
use infogeo_cli::ExperimentConfig;

type Criterion = fn() -> Outcome;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn from_checks(checks: &[infogeo_cli::Check]) -> Self {
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
        let detail = if failed.is_empty() {
            format!("{} checks", checks.len())
        } else {
            failed
                .iter()
                .map(|c| format!("{}={:?}", c.name, c.measured))
                .collect::<Vec<_>>()
                .join(", ")
        };
        Self {
            passed: failed.is_empty(),
            detail,
        }
    }
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(20_261_016)
}

fn random_point(r: &mut ChaCha8Rng) -> [f64; 3] {
    [
        r.gen_range(-3.0..3.0),
        r.gen_range(0.2..3.0),
        r.gen_range(0.2..3.0),
    ]
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}

fn scalar_curvature() -> Outcome {
    use infogeo_cli::Check;
    let mut r = rng();
    let pts: Vec<_> = (0..50).map(|_| random_point(&mut r)).collect();
    let mut checks = vec![
        Check::absolute("3d.exact", Model::ThreeD.scalar_curvature(), -1.0, 0.0),
        Check::absolute("2d.exact", Model::TwoD.scalar_curvature(), -0.5, 0.0),
    ];
    let mut e3 = Vec::new();
    let mut e2 = Vec::new();
    let mut t3 = Vec::new();
    let mut t2 = Vec::new();
    for p in &pts {
        let th2 = [p[0], p[1]];
        e3.push(
            (curvature_numeric(&Model::ThreeD, p, DEFAULT_STEP)
                .unwrap()
                .scalar
                + 1.0)
                .abs(),
        );
        e2.push(
            (curvature_numeric(&Model::TwoD, &th2, DEFAULT_STEP)
                .unwrap()
                .scalar
                + 0.5)
                .abs(),
        );
        t3.push((Model::ThreeD.curvature(p).unwrap().scalar + 1.0).abs());
        t2.push((Model::TwoD.curvature(&th2).unwrap().scalar + 0.5).abs());
    }
    checks.push(Check::at_most(
        "3d.analytic_tensor",
        worst(t3),
        runs::CURVATURE_ANALYTIC_TOL,
    ));
    checks.push(Check::at_most(
        "2d.analytic_tensor",
        worst(t2),
        runs::CURVATURE_ANALYTIC_TOL,
    ));
    checks.push(Check::at_most("3d.finite_difference", worst(e3), 1e-4));
    checks.push(Check::at_most("2d.finite_difference", worst(e2), 1e-4));
    Outcome::from_checks(&checks)
}

fn fisher_quadrature() -> Outcome {
    use infogeo_cli::Check;
    let q = QuadratureSpec::gauss_hermite(32).unwrap();
    let cfgs = [1.0, 0.3, 4.0].map(|s| Model2DConfig::new(s).unwrap());
    let mut r = rng();
    let (mut d3, mut d2, mut dep) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..20 {
        let p = random_point(&mut r);
        let f3 = fisher_numeric_3d(&ParameterPoint3D::from_slice(&p).unwrap(), &q).unwrap();
        let (s2, sy2) = (p[1] * p[1], p[2] * p[2]);
        let want3 =
            infogeo::tensor::MetricTensor::diagonal(&[1.0 / s2, 2.0 / s2, 2.0 / sy2]).unwrap();
        d3.push(f3.metric.max_abs_diff(&want3));
        let th2 = ParameterPoint2D::new(p[0], p[1]).unwrap();
        let want2 = infogeo::tensor::MetricTensor::diagonal(&[1.0 / s2, 4.0 / s2]).unwrap();
        let ests: Vec<_> = cfgs
            .iter()
            .map(|c| fisher_numeric_2d(&th2, c, &q).unwrap())
            .collect();
        d2.push(ests[0].metric.max_abs_diff(&want2));
        for e in &ests[1..] {
            dep.push(e.metric.max_abs_diff(&ests[0].metric));
        }
    }
    Outcome::from_checks(&[
        Check::at_most("3d", worst(d3), runs::FISHER_TOL),
        Check::at_most("2d", worst(d2), runs::FISHER_TOL),
        Check::at_most("2d.sigma_sq_independence", worst(dep), runs::FISHER_TOL),
    ])
}

fn base_config() -> ExperimentConfig {
    let cfg = ExperimentConfig::default();
    assert_eq!(
        (cfg.tol, cfg.tau_max, cfg.sigma0, cfg.lambda_plus_prime),
        (1e-10, 10.0, 1.0, 1.0)
    );
    cfg
}

fn geodesic_fidelity() -> Outcome {
    match runs::run_geodesics(&base_config()) {
        Ok(out) => Outcome::from_checks(&out.report.checks),
        Err(e) => Outcome {
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn volume_cross_check_criterion() -> Outcome {
    use infogeo_cli::Check;
    let cfg = base_config();
    let checks: Vec<_> = cfg
        .specs()
        .iter()
        .map(|spec| {
            let dev = volume_cross_check(spec, (20.0, 50.0), 30).unwrap_or(f64::NAN);
            Check::at_most(spec.model().name(), dev, 0.05)
        })
        .collect();
    Outcome::from_checks(&checks)
}

fn headline_ratio() -> Outcome {
    use infogeo_cli::Check;
    let cfg = base_config();
    let mut checks = Vec::new();
    let mut ratios = Vec::new();
    for &s0 in &[0.5, 1.0, 2.0] {
        for &m0 in &[0.0, 1.0, 5.0] {
            let ratio = softening_ratio_ige(&cfg.spec3d_at(m0, s0), &cfg.ige_config())
                .map_or(f64::NAN, |s| s.ratio);
            checks.push(Check::relative(
                &format!("sigma0={s0},mu0={m0}"),
                ratio,
                FRAC_1_SQRT_2,
                0.01,
            ));
            ratios.push(ratio);
        }
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::at_most("spread", hi / lo - 1.0, 0.01));
    Outcome::from_checks(&checks)
}

fn jacobi_exponents() -> Outcome {
    use infogeo_cli::Check;
    let cfg = base_config();
    let spec = cfg.spec3d();
    let g = match softening_gap(
        &spec,
        &JacobiState::default_initial(Model::ThreeD),
        cfg.jacobi_window,
        1e-10,
    ) {
        Ok(g) => g,
        Err(e) => {
            return Outcome {
                passed: false,
                detail: e.to_string(),
            }
        }
    };
    let (l3, l2) = (spec.growth_rate(), spec.growth_rate() * FRAC_1_SQRT_2);
    Outcome::from_checks(&[
        Check::relative("3d.exponent", g.three_d.exponent, l3, 0.02),
        Check::relative("2d.exponent", g.two_d.exponent, l2, 0.02),
        Check::relative(
            "gap",
            g.gap,
            cfg.sigma0 * cfg.lambda_plus_prime * (1.0 - FRAC_1_SQRT_2),
            0.03,
        ),
        Check::at_least("gap_positive", g.gap, f64::MIN_POSITIVE),
        Check::at_least(
            "3d.r_squared",
            g.three_d.r_squared,
            runs::LOG_LINEARITY_R2 + f64::EPSILON,
        ),
        Check::at_least(
            "2d.r_squared",
            g.two_d.r_squared,
            runs::LOG_LINEARITY_R2 + f64::EPSILON,
        ),
    ])
}

fn asymptotic_consistency() -> Outcome {
    match runs::run_jacobi(&base_config()) {
        Ok(out) => {
            let checks: Vec<_> = out
                .report
                .checks
                .into_iter()
                .filter(|c| {
                    ["j1_plateau", "j2_envelope", "j3_"]
                        .iter()
                        .any(|k| c.name.contains(k))
                })
                .collect();
            Outcome::from_checks(&checks)
        }
        Err(e) => Outcome {
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn run_cli(dir: &Path, jobs: &str) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_infogeo"))
        .args(["all", "--format", "both", "--jobs", jobs, "--out"])
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn directory_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

fn property_suites() -> Outcome {
    use infogeo_cli::Check;
    let mut r = rng();
    let (mut min_form, mut asym, mut antisym, mut bianchi) =
        (f64::INFINITY, Vec::new(), Vec::new(), Vec::new());
    for _ in 0..50 {
        let p = random_point(&mut r);
        for (model, theta) in [(Model::ThreeD, &p[..]), (Model::TwoD, &p[..2])] {
            let g = model.metric(theta).unwrap();
            for _ in 0..8 {
                let v: Vec<f64> = (0..model.dim()).map(|_| r.gen_range(-1.0..1.0)).collect();
                let n: f64 = v.iter().map(|x| x * x).sum();
                min_form = min_form.min(g.norm_sq(&v) / n);
            }
            asym.push(
                christoffel_numeric(&model, theta, DEFAULT_STEP)
                    .unwrap()
                    .max_lower_asymmetry(),
            );
            let c = curvature_numeric(&model, theta, DEFAULT_STEP).unwrap();
            antisym.push(c.riemann.max_antisymmetry_violation());
            bianchi.push(c.riemann.max_bianchi_violation());
        }
    }

    let cfg = base_config();
    let mut linearity = Vec::new();
    for spec in cfg.specs() {
        let dim = spec.model().dim();
        let a = JacobiState::new(&[0.3, -1.0, 0.7][..dim], &[1.0, 0.2, -0.4][..dim]).unwrap();
        let b = JacobiState::new(&[-0.5, 0.4, 1.1][..dim], &[0.0, -0.9, 0.3][..dim]).unwrap();
        let (alpha, beta) = (1.7, -0.6);
        let tau = 20.0 / spec.growth_rate();
        let run = |s: &JacobiState| integrate_jlc(&spec, s, tau, 1e-12).unwrap();
        let (ta, tb, tc) = (run(&a), run(&b), run(&a.combine(alpha, &b, beta)));
        for t in infogeo::geodesic::uniform_grid(0.0, tau, 200) {
            let (sa, sb, sc) = (ta.at(t).unwrap(), tb.at(t).unwrap(), tc.at(t).unwrap());
            let want = sa.jacobi.combine(alpha, &sb.jacobi, beta);
            let scale = 1.0 + want.j().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            for k in 0..dim {
                linearity.push((sc.jacobi.j()[k] - want.j()[k]).abs() / scale);
            }
        }
    }

    let tmp = tempfile::tempdir().unwrap();
    let (d1, d2) = (tmp.path().join("a"), tmp.path().join("b"));
    let (o1, o2) = (run_cli(&d1, "1"), run_cli(&d2, "4"));
    let same = directory_bytes(&d1) == directory_bytes(&d2) && o1.stdout == o2.stdout;
    let files = directory_bytes(&d1).len();

    Outcome::from_checks(&[
        Check::at_least(
            "metric_spd.min_rayleigh_quotient",
            min_form,
            f64::MIN_POSITIVE,
        ),
        Check::at_most("christoffel.lower_index_symmetry", worst(asym), 1e-6),
        Check::at_most("riemann.antisymmetry", worst(antisym), 1e-6),
        Check::at_most("riemann.first_bianchi", worst(bianchi), 1e-6),
        Check::at_most("jlc.linearity", worst(linearity), 1e-8),
        Check::at_least("cli.files_written", files as f64, 1.0),
        Check::at_least(
            "cli.byte_identical_reruns",
            if same { 1.0 } else { 0.0 },
            1.0,
        ),
    ])
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 8] = [
        ("1 scalar curvature", scalar_curvature),
        ("2 fisher quadrature", fisher_quadrature),
        ("3 geodesic fidelity", geodesic_fidelity),
        (
            "4 volume closed-form cross-check",
            volume_cross_check_criterion,
        ),
        ("5 entropy slope ratio", headline_ratio),
        ("6 jacobi exponents and gap", jacobi_exponents),
        ("7 asymptotic jacobi structure", asymptotic_consistency),
        ("8 property suites", property_suites),
    ];
    let mut all = true;
    for (name, f) in criteria {
        let o = f();
        all &= o.passed;
        println!(
            "{} criterion {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
