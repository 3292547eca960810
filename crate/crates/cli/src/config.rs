//! Experiment configuration read from INI-style files.
//!
//! ```ini
//! [model]
//! kind = coupled        ; 3d | 2d | coupled
//! sigma_sq = 1.0
//!
//! [geodesic]
//! mu0 = 0
//! sigma0 = 1
//! sigma0_prime = 1
//! lambda_plus_prime = 1
//! lambda_f = 1          ; or tau_f and epsilon
//!
//! [solver]
//! tol = 1e-10
//! tau_max = 10
//! ```
//!
//! See [`ExperimentConfig::KEYS`] for every accepted key.

use std::f64::consts::SQRT_2;
use std::path::Path;

use ini::Ini;
use serde::Serialize;
use thiserror::Error;

use infogeo::entropy::IgeConfig;
use infogeo::geodesic::{GeodesicSpec, GeodesicSpec2D, GeodesicSpec3D, MAX_TOL, MIN_TOL};
use infogeo::jacobi::{JacobiState, DEFAULT_WINDOW};
use infogeo::models::{Model, Model2DConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("unknown key [{section}] {key}")]
    UnknownKey { section: String, key: String },
    #[error("[{section}] {key} = {value:?}: {reason}")]
    Invalid {
        section: &'static str,
        key: &'static str,
        value: String,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelSelection {
    #[serde(rename = "3d")]
    ThreeD,
    #[serde(rename = "2d")]
    TwoD,
    Coupled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub models: ModelSelection,
    pub capital_sigma_sq: f64,
    pub mu0: f64,
    pub sigma0: f64,
    pub sigma0_prime: f64,
    pub lambda_plus_prime: f64,
    pub lambda_f: f64,
    /// `(tau_f, epsilon)` when `lambda_f` was derived from a horizon.
    pub horizon: Option<(f64, f64)>,
    /// 2D rate; `lambda_plus_prime / sqrt(2)` unless given for `kind = 2d`.
    pub lambda_plus: f64,
    pub tol: f64,
    pub tau_max: f64,
    pub quadrature_nodes: usize,
    pub verify_points: usize,
    pub ige_window: (f64, f64),
    pub ige_resolution: usize,
    pub jacobi_window: (f64, f64),
    /// `(J(0), J'(0))` for the 3D run; the 2D run keeps the first two entries.
    pub jacobi_initial: Option<(Vec<f64>, Vec<f64>)>,
    pub sweep_sigma0: Vec<f64>,
    pub sweep_mu0: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            models: ModelSelection::Coupled,
            capital_sigma_sq: 1.0,
            mu0: 0.0,
            sigma0: 1.0,
            sigma0_prime: 1.0,
            lambda_plus_prime: 1.0,
            lambda_f: 1.0,
            horizon: None,
            lambda_plus: 1.0 / SQRT_2,
            tol: 1e-10,
            tau_max: 10.0,
            quadrature_nodes: 32,
            verify_points: 50,
            ige_window: IgeConfig::DEFAULT_WINDOW,
            ige_resolution: 16,
            jacobi_window: DEFAULT_WINDOW,
            jacobi_initial: None,
            sweep_sigma0: vec![0.5, 1.0, 2.0],
            sweep_mu0: vec![0.0, 1.0, 5.0],
        }
    }
}

fn invalid(section: &'static str, key: &'static str, value: &str, reason: &str) -> ConfigError {
    ConfigError::Invalid {
        section,
        key,
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

struct Reader<'a> {
    ini: &'a Ini,
}

impl Reader<'_> {
    fn raw(&self, section: &'static str, key: &'static str) -> Option<&str> {
        self.ini.section(Some(section)).and_then(|p| p.get(key))
    }

    fn f64(&self, section: &'static str, key: &'static str) -> Result<Option<f64>, ConfigError> {
        self.raw(section, key)
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| invalid(section, key, v, &e.to_string()))
            })
            .transpose()
    }

    fn usize(
        &self,
        section: &'static str,
        key: &'static str,
    ) -> Result<Option<usize>, ConfigError> {
        self.raw(section, key)
            .map(|v| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|e| invalid(section, key, v, &e.to_string()))
            })
            .transpose()
    }

    fn list(
        &self,
        section: &'static str,
        key: &'static str,
    ) -> Result<Option<Vec<f64>>, ConfigError> {
        self.raw(section, key)
            .map(|v| {
                v.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|e| invalid(section, key, v, &e.to_string()))
                    })
                    .collect()
            })
            .transpose()
    }
}

impl ExperimentConfig {
    /// Every accepted `(section, key)` pair.
    pub const KEYS: &'static [(&'static str, &'static str)] = &[
        ("model", "kind"),
        ("model", "sigma_sq"),
        ("geodesic", "mu0"),
        ("geodesic", "sigma0"),
        ("geodesic", "sigma0_prime"),
        ("geodesic", "lambda_plus_prime"),
        ("geodesic", "lambda_f"),
        ("geodesic", "tau_f"),
        ("geodesic", "epsilon"),
        ("geodesic", "lambda_plus"),
        ("solver", "tol"),
        ("solver", "tau_max"),
        ("fisher", "nodes"),
        ("verify", "points"),
        ("ige", "window_start"),
        ("ige", "window_end"),
        ("ige", "resolution"),
        ("jacobi", "window_start"),
        ("jacobi", "window_end"),
        ("jacobi", "j0"),
        ("jacobi", "dj0"),
        ("sweep", "sigma0"),
        ("sweep", "mu0"),
    ];

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_ini_str(&text)
    }

    pub fn from_ini_str(text: &str) -> Result<Self, ConfigError> {
        let ini = Ini::load_from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        for (section, props) in ini.iter() {
            let section = section.unwrap_or("");
            for (key, _) in props.iter() {
                if !Self::KEYS.contains(&(section, key)) {
                    return Err(ConfigError::UnknownKey {
                        section: section.to_string(),
                        key: key.to_string(),
                    });
                }
            }
        }
        let r = Reader { ini: &ini };
        let mut c = Self::default();

        if let Some(kind) = r.raw("model", "kind") {
            c.models = match kind.trim().to_ascii_lowercase().as_str() {
                "3d" => ModelSelection::ThreeD,
                "2d" => ModelSelection::TwoD,
                "coupled" => ModelSelection::Coupled,
                _ => return Err(invalid("model", "kind", kind, "expected 3d, 2d or coupled")),
            };
        }
        macro_rules! set {
            ($field:expr, $getter:ident, $s:literal, $k:literal) => {
                if let Some(v) = r.$getter($s, $k)? {
                    $field = v;
                }
            };
        }
        set!(c.capital_sigma_sq, f64, "model", "sigma_sq");
        set!(c.mu0, f64, "geodesic", "mu0");
        set!(c.sigma0, f64, "geodesic", "sigma0");
        set!(c.sigma0_prime, f64, "geodesic", "sigma0_prime");
        set!(c.lambda_plus_prime, f64, "geodesic", "lambda_plus_prime");
        set!(c.tol, f64, "solver", "tol");
        set!(c.tau_max, f64, "solver", "tau_max");
        set!(c.quadrature_nodes, usize, "fisher", "nodes");
        set!(c.verify_points, usize, "verify", "points");
        set!(c.ige_window.0, f64, "ige", "window_start");
        set!(c.ige_window.1, f64, "ige", "window_end");
        set!(c.ige_resolution, usize, "ige", "resolution");
        set!(c.jacobi_window.0, f64, "jacobi", "window_start");
        set!(c.jacobi_window.1, f64, "jacobi", "window_end");
        set!(c.sweep_sigma0, list, "sweep", "sigma0");
        set!(c.sweep_mu0, list, "sweep", "mu0");

        let lambda_f = r.f64("geodesic", "lambda_f")?;
        let tau_f = r.f64("geodesic", "tau_f")?;
        let epsilon = r.f64("geodesic", "epsilon")?;
        match (lambda_f, tau_f, epsilon) {
            (Some(l), None, None) => c.lambda_f = l,
            (None, Some(t), Some(e)) => c.horizon = Some((t, e)),
            (Some(l), Some(t), Some(e)) => {
                let derived = (c.sigma0_prime / e).ln() / t;
                if (l - derived).abs() > 1e-12 * derived.abs() {
                    return Err(invalid(
                        "geodesic",
                        "lambda_f",
                        &l.to_string(),
                        &format!("inconsistent with tau_f and epsilon, which give {derived}"),
                    ));
                }
                c.horizon = Some((t, e));
            }
            (None, None, None) => {}
            _ => {
                return Err(invalid(
                    "geodesic",
                    "tau_f",
                    r.raw("geodesic", "tau_f").unwrap_or(""),
                    "tau_f and epsilon must be given together",
                ))
            }
        }

        c.lambda_plus = c.lambda_plus_prime / SQRT_2;
        if let Some(lp) = r.f64("geodesic", "lambda_plus")? {
            if c.models != ModelSelection::TwoD {
                return Err(invalid(
                    "geodesic",
                    "lambda_plus",
                    &lp.to_string(),
                    "only settable for kind = 2d; paired runs use lambda_plus_prime / sqrt(2)",
                ));
            }
            c.lambda_plus = lp;
        }

        match (r.list("jacobi", "j0")?, r.list("jacobi", "dj0")?) {
            (None, None) => {}
            (Some(j), dj) => {
                let dj = dj.unwrap_or_else(|| vec![0.0; j.len()]);
                c.jacobi_initial = Some((j, dj));
            }
            (None, Some(_)) => {
                return Err(invalid("jacobi", "dj0", "", "needs j0"));
            }
        }

        c.validate()?;
        Ok(c)
    }

    pub fn validate(&mut self) -> Result<(), ConfigError> {
        let positive = |s: &'static str, k: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(s, k, &v.to_string(), "must be finite and > 0"))
            }
        };
        if !self.mu0.is_finite() {
            return Err(invalid(
                "geodesic",
                "mu0",
                &self.mu0.to_string(),
                "must be finite",
            ));
        }
        positive("model", "sigma_sq", self.capital_sigma_sq)?;
        positive("geodesic", "sigma0", self.sigma0)?;
        positive("geodesic", "sigma0_prime", self.sigma0_prime)?;
        positive("geodesic", "lambda_plus_prime", self.lambda_plus_prime)?;
        positive("geodesic", "lambda_plus", self.lambda_plus)?;
        positive("solver", "tau_max", self.tau_max)?;
        if let Some((tau_f, eps)) = self.horizon {
            positive("geodesic", "tau_f", tau_f)?;
            positive("geodesic", "epsilon", eps)?;
            if eps >= self.sigma0_prime {
                return Err(invalid(
                    "geodesic",
                    "epsilon",
                    &eps.to_string(),
                    "must lie below sigma0_prime",
                ));
            }
            self.lambda_f = (self.sigma0_prime / eps).ln() / tau_f;
        }
        positive("geodesic", "lambda_f", self.lambda_f)?;
        if !(MIN_TOL..=MAX_TOL).contains(&self.tol) {
            return Err(invalid(
                "solver",
                "tol",
                &self.tol.to_string(),
                "must lie in [1e-13, 1e-6]",
            ));
        }
        if self.quadrature_nodes < 8 {
            return Err(invalid(
                "fisher",
                "nodes",
                &self.quadrature_nodes.to_string(),
                "must be >= 8",
            ));
        }
        if self.verify_points == 0 {
            return Err(invalid("verify", "points", "0", "must be >= 1"));
        }
        IgeConfig::new(self.ige_window, self.ige_resolution).map_err(|e| {
            invalid(
                "ige",
                "window_start",
                &format!("{:?}", self.ige_window),
                &e.to_string(),
            )
        })?;
        let (a, b) = self.jacobi_window;
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b) {
            return Err(invalid(
                "jacobi",
                "window_start",
                &format!("{a}, {b}"),
                "must satisfy 0 <= start < end",
            ));
        }
        if let Some((j, dj)) = &self.jacobi_initial {
            let want = match self.models {
                ModelSelection::TwoD => 2,
                _ => 3,
            };
            if j.len() != want || dj.len() != want {
                return Err(invalid(
                    "jacobi",
                    "j0",
                    &format!("{j:?}"),
                    &format!("needs {want} entries in j0 and dj0"),
                ));
            }
            JacobiState::new(j, dj)
                .map_err(|e| invalid("jacobi", "j0", &format!("{j:?}"), &e.to_string()))?;
        }
        if self.sweep_sigma0.is_empty()
            || self
                .sweep_sigma0
                .iter()
                .any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err(invalid(
                "sweep",
                "sigma0",
                &format!("{:?}", self.sweep_sigma0),
                "needs at least one finite value > 0",
            ));
        }
        if self.sweep_mu0.is_empty() || self.sweep_mu0.iter().any(|v| !v.is_finite()) {
            return Err(invalid(
                "sweep",
                "mu0",
                &format!("{:?}", self.sweep_mu0),
                "needs at least one finite value",
            ));
        }
        Ok(())
    }

    pub fn model2d_config(&self) -> Model2DConfig {
        Model2DConfig::new(self.capital_sigma_sq).expect("validated")
    }

    pub fn spec3d(&self) -> GeodesicSpec3D {
        self.spec3d_at(self.mu0, self.sigma0)
    }

    pub fn spec3d_at(&self, mu0: f64, sigma0: f64) -> GeodesicSpec3D {
        let s = GeodesicSpec3D::new(
            mu0,
            sigma0,
            self.sigma0_prime,
            self.lambda_plus_prime,
            self.lambda_f,
        )
        .expect("validated");
        match self.horizon {
            Some((t, e)) => s.with_horizon(t, e).expect("validated"),
            None => s,
        }
    }

    pub fn spec2d(&self) -> GeodesicSpec2D {
        match self.models {
            ModelSelection::TwoD => {
                GeodesicSpec2D::new(self.mu0, self.sigma0, self.lambda_plus).expect("validated")
            }
            _ => GeodesicSpec2D::coupled_from(&self.spec3d()),
        }
    }

    /// Specs selected by `kind`, 3D first.
    pub fn specs(&self) -> Vec<GeodesicSpec> {
        match self.models {
            ModelSelection::ThreeD => vec![self.spec3d().into()],
            ModelSelection::TwoD => vec![self.spec2d().into()],
            ModelSelection::Coupled => vec![self.spec3d().into(), self.spec2d().into()],
        }
    }

    pub fn ige_config(&self) -> IgeConfig {
        IgeConfig::new(self.ige_window, self.ige_resolution).expect("validated")
    }

    pub fn jacobi_initial(&self, model: Model) -> JacobiState {
        match (&self.jacobi_initial, model) {
            (None, m) => JacobiState::default_initial(m),
            (Some((j, dj)), Model::TwoD) => JacobiState::new(&j[..2], &dj[..2]).expect("validated"),
            (Some((j, dj)), Model::ThreeD) => JacobiState::new(j, dj).expect("validated"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(
            ExperimentConfig::from_ini_str("").unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn reads_sections() {
        let c = ExperimentConfig::from_ini_str(
            "[model]\nkind = 3d\n[geodesic]\nsigma0 = 2\nmu0 = -1\n[sweep]\nsigma0 = 1, 3\n",
        )
        .unwrap();
        assert_eq!(c.models, ModelSelection::ThreeD);
        assert_eq!(c.sigma0, 2.0);
        assert_eq!(c.mu0, -1.0);
        assert_eq!(c.sweep_sigma0, vec![1.0, 3.0]);
        assert_eq!(c.specs().len(), 1);
    }

    #[test]
    fn horizon_sets_lambda_f() {
        let c = ExperimentConfig::from_ini_str(
            "[geodesic]\nsigma0_prime = 2\ntau_f = 10\nepsilon = 0.5\n",
        )
        .unwrap();
        assert!((c.lambda_f - 4f64.ln() / 10.0).abs() < 1e-15);
        assert!(ExperimentConfig::from_ini_str("[geodesic]\ntau_f = 10\n").is_err());
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "[geodesic]\nsigma0 = 0\n",
            "[geodesic]\nsigma0 = -1\n",
            "[geodesic]\nsigma0 = x\n",
            "[model]\nkind = 4d\n",
            "[solver]\ntol = 1e-3\n",
            "[geodesic]\nlambda_plus = 0.5\n",
            "[geodesic]\nsigmazero = 1\n",
            "[jacobi]\nj0 = 1, 0\n",
        ] {
            assert!(ExperimentConfig::from_ini_str(text).is_err(), "{text}");
        }
    }

    #[test]
    fn coupled_pair_uses_the_scaled_rate() {
        let c = ExperimentConfig::from_ini_str("[geodesic]\nlambda_plus_prime = 2\n").unwrap();
        assert!((c.spec2d().lambda_plus() - SQRT_2).abs() < 1e-15);
        let d = ExperimentConfig::from_ini_str("[model]\nkind = 2d\n[geodesic]\nlambda_plus = 3\n")
            .unwrap();
        assert_eq!(d.spec2d().lambda_plus(), 3.0);
    }
}
