//! The 3D Gaussian model `theta = (mu_x, sigma_x, sigma_y)` and the 2D model
//! `theta = (mu_x, sigma)` obtained from it under `sigma_x sigma_y = Sigma^2`.

use std::f64::consts::PI;

use crate::error::{require_finite, require_positive, Error, Result};
use crate::tensor::{
    ChristoffelGradient, ChristoffelSymbols, Curvature, MetricTensor, RiemannTensor,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroSample {
    pub x: f64,
    pub y: f64,
}

impl MicroSample {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        Ok(Self {
            x: require_finite("x", x)?,
            y: require_finite("y", y)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterPoint3D {
    mu_x: f64,
    sigma_x: f64,
    sigma_y: f64,
}

impl ParameterPoint3D {
    pub fn new(mu_x: f64, sigma_x: f64, sigma_y: f64) -> Result<Self> {
        Ok(Self {
            mu_x: require_finite("mu_x", mu_x)?,
            sigma_x: require_positive("sigma_x", sigma_x)?,
            sigma_y: require_positive("sigma_y", sigma_y)?,
        })
    }

    pub fn from_slice(theta: &[f64]) -> Result<Self> {
        match theta {
            [m, sx, sy] => Self::new(*m, *sx, *sy),
            _ => Err(Error::Dimension {
                expected: 3,
                actual: theta.len(),
            }),
        }
    }

    pub fn mu_x(&self) -> f64 {
        self.mu_x
    }
    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }
    pub fn sigma_y(&self) -> f64 {
        self.sigma_y
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.mu_x, self.sigma_x, self.sigma_y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterPoint2D {
    mu_x: f64,
    sigma: f64,
}

impl ParameterPoint2D {
    pub fn new(mu_x: f64, sigma: f64) -> Result<Self> {
        Ok(Self {
            mu_x: require_finite("mu_x", mu_x)?,
            sigma: require_positive("sigma", sigma)?,
        })
    }

    pub fn from_slice(theta: &[f64]) -> Result<Self> {
        match theta {
            [m, s] => Self::new(*m, *s),
            _ => Err(Error::Dimension {
                expected: 2,
                actual: theta.len(),
            }),
        }
    }

    pub fn mu_x(&self) -> f64 {
        self.mu_x
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn to_array(&self) -> [f64; 2] {
        [self.mu_x, self.sigma]
    }

    /// The equivalent 3D point `(mu_x, sigma, Sigma^2 / sigma)`.
    pub fn lift(&self, cfg: &Model2DConfig) -> ParameterPoint3D {
        ParameterPoint3D {
            mu_x: self.mu_x,
            sigma_x: self.sigma,
            sigma_y: cfg.capital_sigma_sq / self.sigma,
        }
    }
}

/// The constant `Sigma^2` in `sigma_x sigma_y = Sigma^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model2DConfig {
    capital_sigma_sq: f64,
}

impl Model2DConfig {
    pub fn new(capital_sigma_sq: f64) -> Result<Self> {
        Ok(Self {
            capital_sigma_sq: require_positive("capital_sigma_sq", capital_sigma_sq)?,
        })
    }

    pub fn capital_sigma_sq(&self) -> f64 {
        self.capital_sigma_sq
    }
}

impl Default for Model2DConfig {
    fn default() -> Self {
        Self {
            capital_sigma_sq: 1.0,
        }
    }
}

pub fn pdf3d(theta: &ParameterPoint3D, s: &MicroSample) -> f64 {
    let (sx, sy) = (theta.sigma_x, theta.sigma_y);
    let dx = s.x - theta.mu_x;
    (-(dx * dx) / (2.0 * sx * sx) - (s.y * s.y) / (2.0 * sy * sy)).exp() / (2.0 * PI * sx * sy)
}

pub fn pdf2d(theta: &ParameterPoint2D, cfg: &Model2DConfig, s: &MicroSample) -> f64 {
    let s2 = cfg.capital_sigma_sq;
    let sigma = theta.sigma;
    let dx = s.x - theta.mu_x;
    (-(dx * dx) / (2.0 * sigma * sigma) - sigma * sigma * s.y * s.y / (2.0 * s2 * s2)).exp()
        / (2.0 * PI * s2)
}

fn diag_metric(entries: &[f64]) -> MetricTensor {
    MetricTensor::diagonal(entries).expect("validated sigma gives a positive diagonal")
}

/// `diag(1/sigma_x^2, 2/sigma_x^2, 2/sigma_y^2)`.
pub fn metric3d(theta: &ParameterPoint3D) -> MetricTensor {
    let (sx2, sy2) = (theta.sigma_x.powi(2), theta.sigma_y.powi(2));
    diag_metric(&[1.0 / sx2, 2.0 / sx2, 2.0 / sy2])
}

/// `diag(1/sigma^2, 4/sigma^2)`.
pub fn metric2d(theta: &ParameterPoint2D) -> MetricTensor {
    let s2 = theta.sigma.powi(2);
    diag_metric(&[1.0 / s2, 4.0 / s2])
}

pub fn christoffel3d(theta: &ParameterPoint3D) -> ChristoffelSymbols {
    let (sx, sy) = (theta.sigma_x, theta.sigma_y);
    let mut c = ChristoffelSymbols::zeros(3);
    c.set_sym(0, 0, 1, -1.0 / sx);
    c.set(1, 0, 0, 1.0 / (2.0 * sx));
    c.set(1, 1, 1, -1.0 / sx);
    c.set(2, 2, 2, -1.0 / sy);
    c
}

pub fn christoffel2d(theta: &ParameterPoint2D) -> ChristoffelSymbols {
    let s = theta.sigma;
    let mut c = ChristoffelSymbols::zeros(2);
    c.set_sym(0, 0, 1, -1.0 / s);
    c.set(1, 0, 0, 1.0 / (4.0 * s));
    c.set(1, 1, 1, -1.0 / s);
    c
}

/// `d_l Gamma^k_ij` for the 3D model.
pub fn christoffel_gradient3d(theta: &ParameterPoint3D) -> ChristoffelGradient {
    let (sx2, sy2) = (theta.sigma_x.powi(2), theta.sigma_y.powi(2));
    let mut d = ChristoffelGradient::zeros(3);
    d.set_sym(0, 0, 1, 1, 1.0 / sx2);
    d.set_sym(1, 0, 0, 1, -1.0 / (2.0 * sx2));
    d.set_sym(1, 1, 1, 1, 1.0 / sx2);
    d.set_sym(2, 2, 2, 2, 1.0 / sy2);
    d
}

/// `d_l Gamma^k_ij` for the 2D model.
pub fn christoffel_gradient2d(theta: &ParameterPoint2D) -> ChristoffelGradient {
    let s2 = theta.sigma.powi(2);
    let mut d = ChristoffelGradient::zeros(2);
    d.set_sym(0, 0, 1, 1, 1.0 / s2);
    d.set_sym(1, 0, 0, 1, -1.0 / (4.0 * s2));
    d.set_sym(1, 1, 1, 1, 1.0 / s2);
    d
}

/// Closed-form curvature of the 3D model. The nonzero mixed Riemann
/// components are `R^0_{101} = -1/sigma_x^2` and `R^1_{010} = -1/(2 sigma_x^2)`
/// together with their antisymmetric partners.
pub fn curvature3d(theta: &ParameterPoint3D) -> Curvature {
    let sx2 = theta.sigma_x.powi(2);
    let mut r = RiemannTensor::zeros(3);
    r.set_antisym(0, 1, 0, 1, -1.0 / sx2);
    r.set_antisym(1, 0, 1, 0, -1.0 / (2.0 * sx2));
    Curvature::from_riemann(r, &metric3d(theta))
}

/// Closed-form curvature of the 2D model: `R^0_{101} = -1/sigma^2`,
/// `R^1_{010} = -1/(4 sigma^2)`.
pub fn curvature2d(theta: &ParameterPoint2D) -> Curvature {
    let s2 = theta.sigma.powi(2);
    let mut r = RiemannTensor::zeros(2);
    r.set_antisym(0, 1, 0, 1, -1.0 / s2);
    r.set_antisym(1, 0, 1, 0, -1.0 / (4.0 * s2));
    Curvature::from_riemann(r, &metric2d(theta))
}

pub const SCALAR_CURVATURE_3D: f64 = -1.0;
pub const SCALAR_CURVATURE_2D: f64 = -0.5;

/// `sqrt(det g) = 2 / (sigma_x^2 sigma_y)`.
pub fn fisher_density3d(theta: &ParameterPoint3D) -> f64 {
    2.0 / (theta.sigma_x.powi(2) * theta.sigma_y)
}

/// `sqrt(det g) = 2 / sigma^2`.
pub fn fisher_density2d(theta: &ParameterPoint2D) -> f64 {
    2.0 / theta.sigma.powi(2)
}

/// Model selector for code that works on plain coordinate slices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    ThreeD,
    TwoD,
}

impl Model {
    pub fn dim(self) -> usize {
        match self {
            Model::ThreeD => 3,
            Model::TwoD => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::ThreeD => "3d",
            Model::TwoD => "2d",
        }
    }

    /// Indices of the coordinates that must stay positive.
    pub fn sigma_indices(self) -> &'static [usize] {
        match self {
            Model::ThreeD => &[1, 2],
            Model::TwoD => &[1],
        }
    }

    pub fn check(self, theta: &[f64]) -> Result<()> {
        match self {
            Model::ThreeD => ParameterPoint3D::from_slice(theta).map(|_| ()),
            Model::TwoD => ParameterPoint2D::from_slice(theta).map(|_| ()),
        }
    }

    pub fn metric(self, theta: &[f64]) -> Result<MetricTensor> {
        Ok(match self {
            Model::ThreeD => metric3d(&ParameterPoint3D::from_slice(theta)?),
            Model::TwoD => metric2d(&ParameterPoint2D::from_slice(theta)?),
        })
    }

    pub fn christoffel(self, theta: &[f64]) -> Result<ChristoffelSymbols> {
        Ok(match self {
            Model::ThreeD => christoffel3d(&ParameterPoint3D::from_slice(theta)?),
            Model::TwoD => christoffel2d(&ParameterPoint2D::from_slice(theta)?),
        })
    }

    pub fn christoffel_gradient(self, theta: &[f64]) -> Result<ChristoffelGradient> {
        Ok(match self {
            Model::ThreeD => christoffel_gradient3d(&ParameterPoint3D::from_slice(theta)?),
            Model::TwoD => christoffel_gradient2d(&ParameterPoint2D::from_slice(theta)?),
        })
    }

    pub fn curvature(self, theta: &[f64]) -> Result<Curvature> {
        Ok(match self {
            Model::ThreeD => curvature3d(&ParameterPoint3D::from_slice(theta)?),
            Model::TwoD => curvature2d(&ParameterPoint2D::from_slice(theta)?),
        })
    }

    pub fn fisher_density(self, theta: &[f64]) -> Result<f64> {
        Ok(match self {
            Model::ThreeD => fisher_density3d(&ParameterPoint3D::from_slice(theta)?),
            Model::TwoD => fisher_density2d(&ParameterPoint2D::from_slice(theta)?),
        })
    }

    pub fn scalar_curvature(self) -> f64 {
        match self {
            Model::ThreeD => SCALAR_CURVATURE_3D,
            Model::TwoD => SCALAR_CURVATURE_2D,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p3(m: f64, sx: f64, sy: f64) -> ParameterPoint3D {
        ParameterPoint3D::new(m, sx, sy).unwrap()
    }

    #[test]
    fn rejects_nonpositive_sigma() {
        assert!(ParameterPoint3D::new(0.0, 0.0, 1.0).is_err());
        assert!(ParameterPoint3D::new(0.0, 1.0, -1.0).is_err());
        assert!(ParameterPoint3D::new(f64::NAN, 1.0, 1.0).is_err());
        assert!(ParameterPoint2D::new(0.0, -2.0).is_err());
        assert!(Model2DConfig::new(0.0).is_err());
        assert!(MicroSample::new(f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn density_values_at_the_mode() {
        let s0 = MicroSample::new(0.0, 0.0).unwrap();
        assert_relative_eq!(
            pdf3d(&p3(0.0, 1.0, 1.0), &s0),
            1.0 / (2.0 * PI),
            epsilon = 1e-15
        );
        let s = MicroSample::new(2.0, 0.0).unwrap();
        assert_relative_eq!(
            pdf3d(&p3(2.0, 3.0, 0.5), &s),
            1.0 / (2.0 * PI * 1.5),
            epsilon = 1e-15
        );
        let t2 = ParameterPoint2D::new(0.0, 1.0).unwrap();
        assert_relative_eq!(
            pdf2d(&t2, &Model2DConfig::default(), &s0),
            1.0 / (2.0 * PI),
            epsilon = 1e-15
        );
    }

    #[test]
    fn metric_examples() {
        let g = metric3d(&p3(7.0, 1.0, 1.0));
        for (i, e) in [1.0, 2.0, 2.0].into_iter().enumerate() {
            assert_eq!(g.get(i, i), e);
        }
        let g = metric3d(&p3(-3.0, 2.0, 1.0));
        for (i, e) in [0.25, 0.5, 2.0].into_iter().enumerate() {
            assert_eq!(g.get(i, i), e);
        }
        let g = metric2d(&ParameterPoint2D::new(0.0, 1.0).unwrap());
        assert_eq!((g.get(0, 0), g.get(1, 1)), (1.0, 4.0));
        let g = metric2d(&ParameterPoint2D::new(0.0, 2.0).unwrap());
        assert_eq!((g.get(0, 0), g.get(1, 1)), (0.25, 1.0));
        assert_relative_eq!(g.det(), 4.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn christoffel_examples() {
        let c = christoffel3d(&p3(0.0, 1.0, 1.0));
        assert_eq!(c.get(0, 0, 1), -1.0);
        assert_eq!(c.get(0, 1, 0), -1.0);
        assert_eq!(c.get(1, 0, 0), 0.5);
        assert_eq!(c.get(1, 1, 1), -1.0);
        assert_eq!(c.get(2, 2, 2), -1.0);
        let mut nonzero = 0;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    if c.get(k, i, j) != 0.0 {
                        nonzero += 1;
                    }
                }
            }
        }
        assert_eq!(nonzero, 5);

        let c = christoffel2d(&ParameterPoint2D::new(0.0, 1.0).unwrap());
        assert_eq!(c.get(0, 0, 1), -1.0);
        assert_eq!(c.get(1, 0, 0), 0.25);
        assert_eq!(c.get(1, 1, 1), -1.0);
    }

    #[test]
    fn curvature_examples() {
        let k = curvature3d(&p3(0.0, 2.0, 0.3));
        assert_relative_eq!(k.ricci.get(0, 0), -1.0 / 8.0, epsilon = 1e-15);
        assert_relative_eq!(k.ricci.get(1, 1), -0.25, epsilon = 1e-15);
        assert_eq!(k.ricci.get(2, 2), 0.0);
        assert_eq!(k.scalar, -1.0);
        assert_eq!(k.riemann.get(0, 1, 0, 1), -0.25);
        let k2 = curvature2d(&ParameterPoint2D::new(1.0, 3.0).unwrap());
        assert_eq!(k2.scalar, -0.5);
    }

    #[test]
    fn analytic_riemann_matches_connection_assembly() {
        let t = p3(0.4, 1.7, 0.6);
        let assembled =
            RiemannTensor::from_connection(&christoffel3d(&t), &christoffel_gradient3d(&t));
        assert!(assembled.max_abs_diff(&curvature3d(&t).riemann) < 1e-15);
        let t2 = ParameterPoint2D::new(-1.0, 0.8).unwrap();
        let assembled =
            RiemannTensor::from_connection(&christoffel2d(&t2), &christoffel_gradient2d(&t2));
        assert!(assembled.max_abs_diff(&curvature2d(&t2).riemann) < 1e-15);
    }

    #[test]
    fn model_slice_interface() {
        assert_eq!(Model::ThreeD.dim(), 3);
        assert!(Model::TwoD.metric(&[0.0, 1.0, 1.0]).is_err());
        assert!(Model::TwoD.metric(&[0.0, 0.0]).is_err());
        assert_eq!(Model::ThreeD.fisher_density(&[0.0, 1.0, 2.0]).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn scalar_curvature_is_constant(
            m in -10.0f64..10.0, sx in 1e-3f64..1e3, sy in 1e-3f64..1e3,
        ) {
            let k3 = curvature3d(&p3(m, sx, sy));
            prop_assert!((k3.scalar + 1.0).abs() <= 1e-12);
            let k2 = curvature2d(&ParameterPoint2D::new(m, sx).unwrap());
            prop_assert!((k2.scalar + 0.5).abs() <= 1e-12);
            prop_assert!(k3.scalar.abs() > k2.scalar.abs());
        }

        #[test]
        fn stated_riemann_contraction_gives_scalar(
            m in -10.0f64..10.0, sx in 1e-2f64..1e2, sy in 1e-2f64..1e2,
        ) {
            let t = p3(m, sx, sy);
            let (k, g) = (curvature3d(&t), metric3d(&t));
            let c = (k.riemann.lowered(&g, 0, 1, 0, 1) + k.riemann.lowered(&g, 1, 0, 1, 0))
                * g.inverse(0, 0) * g.inverse(1, 1);
            prop_assert!((c + 1.0).abs() < 1e-12);

            let t2 = ParameterPoint2D::new(m, sx).unwrap();
            let (k, g) = (curvature2d(&t2), metric2d(&t2));
            let c = (k.riemann.lowered(&g, 0, 1, 0, 1) + k.riemann.lowered(&g, 1, 0, 1, 0))
                * g.inverse(0, 0) * g.inverse(1, 1);
            prop_assert!((c + 0.5).abs() < 1e-12);
        }

        #[test]
        fn metrics_are_spd(m in -10.0f64..10.0, sx in 1e-3f64..1e3, sy in 1e-3f64..1e3) {
            let g = metric3d(&p3(m, sx, sy));
            prop_assert!(g.det() > 0.0);
            prop_assert!(g.inverse_residual() < 1e-12);
            let d = 4.0 / (sx.powi(4) * sy * sy);
            prop_assert!(((g.det() - d) / d).abs() < 1e-12);
            let g2 = metric2d(&ParameterPoint2D::new(m, sx).unwrap());
            prop_assert!(((g2.det() - 4.0 / sx.powi(4)) * sx.powi(4) / 4.0).abs() < 1e-12);
        }

        #[test]
        fn fisher_density_is_root_det(m in -10.0f64..10.0, sx in 1e-2f64..1e2, sy in 1e-2f64..1e2) {
            let t = p3(m, sx, sy);
            let r = metric3d(&t).det().sqrt();
            prop_assert!(((fisher_density3d(&t) - r) / r).abs() < 1e-12);
            let t2 = ParameterPoint2D::new(m, sx).unwrap();
            let r2 = metric2d(&t2).det().sqrt();
            prop_assert!(((fisher_density2d(&t2) - r2) / r2).abs() < 1e-12);
        }

        #[test]
        fn constrained_density_is_substituted_3d_density(
            m in -5.0f64..5.0, s in 0.1f64..5.0, big in 0.1f64..5.0,
            x in -10.0f64..10.0, y in -10.0f64..10.0,
        ) {
            let cfg = Model2DConfig::new(big).unwrap();
            let t2 = ParameterPoint2D::new(m, s).unwrap();
            let smp = MicroSample::new(x, y).unwrap();
            let a = pdf2d(&t2, &cfg, &smp);
            let b = pdf3d(&t2.lift(&cfg), &smp);
            prop_assert!((a - b).abs() <= 1e-12 * a.max(b));
        }
    }
}
