use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use infogeo_cli::runs::{self, RunError, RunOutput};
use infogeo_cli::ExperimentConfig;

#[derive(Parser)]
#[command(
    version,
    about = "Curvature, entropy and Jacobi field experiments on Gaussian statistical manifolds"
)]
struct Cli {
    /// INI configuration file; defaults apply when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,
    /// Worker threads for sweeps
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Solver tolerance, overrides [solver] tol
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Geodesic horizon, overrides [solver] tau_max
    #[arg(long, global = true)]
    tau_max: Option<f64>,
    /// Accepted for compatibility; no run uses random numbers
    #[arg(long, global = true)]
    seedless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Analytic against numeric metric, connection and curvature
    VerifyGeometry,
    /// Numeric geodesics against the closed forms
    Geodesics,
    /// Entropy series and tail slopes
    Ige,
    /// Jacobi field integration and growth exponents
    Jacobi,
    /// Entropy ratio and Jacobi gap over the sweep
    Softening,
    /// Everything above
    All,
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), RunError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit(dir: &Path, format: Format, out: &RunOutput) -> Result<(), RunError> {
    if format != Format::Json {
        for (name, bytes) in &out.tables {
            write(dir, name, bytes)?;
        }
    }
    if format != Format::Csv {
        write(
            dir,
            &format!("{}.json", out.report.command),
            out.report.to_json().as_bytes(),
        )?;
    }
    for line in out.report.lines() {
        println!("[{}] {line}", out.report.command);
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, RunError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(tol) = cli.tol {
        cfg.tol = tol;
    }
    if let Some(t) = cli.tau_max {
        cfg.tau_max = t;
    }
    cfg.validate()?;
    if cli.jobs == 0 {
        return Err(infogeo_cli::ConfigError::Syntax("--jobs must be >= 1".into()).into());
    }
    fs::create_dir_all(&cli.out).map_err(|source| RunError::Io {
        path: cli.out.display().to_string(),
        source,
    })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .expect("thread pool");
    let outputs = pool.install(|| -> Result<Vec<RunOutput>, RunError> {
        Ok(match cli.command {
            Command::VerifyGeometry => vec![runs::run_verify(&cfg)?],
            Command::Geodesics => vec![runs::run_geodesics(&cfg)?],
            Command::Ige => vec![runs::run_ige(&cfg)?],
            Command::Jacobi => vec![runs::run_jacobi(&cfg)?],
            Command::Softening => vec![runs::run_softening(&cfg)?],
            Command::All => runs::run_all(&cfg)?,
        })
    })?;
    let mut passed = true;
    for out in &outputs {
        if out.report.command == "all" {
            if cli.format != Format::Csv {
                write(&cli.out, "all.json", out.report.to_json().as_bytes())?;
            }
        } else {
            emit(&cli.out, cli.format, out)?;
        }
        passed &= out.report.passed;
    }
    Ok(passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
