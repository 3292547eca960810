//! The Fisher-Rao metric `g_lm = E[d_l log p  d_m log p]` evaluated by
//! quadrature over the microspace `(x, y)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::models::{MicroSample, Model2DConfig, ParameterPoint2D, ParameterPoint3D};
use crate::quadrature::{pairwise_sum, standard_normal_rule};
use crate::tensor::{MetricTensor, MAX_DIM};

/// Relative change allowed when the node count is doubled.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureScheme {
    /// Tensor product of Gauss-Hermite rules after `x = mu + sqrt(2) sigma u`.
    GaussHermiteProduct,
    /// Uniform trapezoid grid on `[-R, R]` standard deviations per axis.
    TruncatedGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    scheme: QuadratureScheme,
    nodes_per_axis: usize,
    truncation_radius: f64,
}

impl QuadratureSpec {
    pub fn gauss_hermite(nodes_per_axis: usize) -> Result<Self> {
        Self::new(QuadratureScheme::GaussHermiteProduct, nodes_per_axis, 8.0)
    }

    pub fn truncated_grid(nodes_per_axis: usize, truncation_radius: f64) -> Result<Self> {
        Self::new(
            QuadratureScheme::TruncatedGrid,
            nodes_per_axis,
            truncation_radius,
        )
    }

    pub fn new(
        scheme: QuadratureScheme,
        nodes_per_axis: usize,
        truncation_radius: f64,
    ) -> Result<Self> {
        if nodes_per_axis < 8 {
            return Err(Error::Domain {
                name: "nodes_per_axis",
                requirement: ">= 8",
                value: nodes_per_axis as f64,
            });
        }
        if scheme == QuadratureScheme::TruncatedGrid
            && !(truncation_radius.is_finite() && truncation_radius >= 6.0)
        {
            return Err(Error::Domain {
                name: "truncation_radius",
                requirement: "finite and >= 6",
                value: truncation_radius,
            });
        }
        Ok(Self {
            scheme,
            nodes_per_axis,
            truncation_radius,
        })
    }

    pub fn scheme(&self) -> QuadratureScheme {
        self.scheme
    }
    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }
    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    fn doubled(&self) -> Self {
        Self {
            nodes_per_axis: 2 * self.nodes_per_axis,
            ..*self
        }
    }

    /// One-axis rule for a standard normal variable.
    fn axis_rule(&self) -> Vec<(f64, f64)> {
        match self.scheme {
            QuadratureScheme::GaussHermiteProduct => standard_normal_rule(self.nodes_per_axis),
            QuadratureScheme::TruncatedGrid => {
                let n = self.nodes_per_axis;
                let r = self.truncation_radius;
                let dz = 2.0 * r / (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        let z = -r + dz * i as f64;
                        let end = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                        (z, end * dz * (-0.5 * z * z).exp() / (2.0 * PI).sqrt())
                    })
                    .collect()
            }
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            scheme: QuadratureScheme::GaussHermiteProduct,
            nodes_per_axis: 32,
            truncation_radius: 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherEstimate {
    pub metric: MetricTensor,
    /// Largest entry change between `n` and `2n` nodes per axis, relative to
    /// the largest entry.
    pub convergence_delta: f64,
    /// `E[d_l log p]` for each coordinate; zero in exact arithmetic.
    pub score_means: [f64; MAX_DIM],
}

/// Scores `d log p / d(mu_x, sigma_x, sigma_y)` of the 3D model.
pub fn score3d(theta: &ParameterPoint3D, s: &MicroSample) -> [f64; 3] {
    let (sx, sy) = (theta.sigma_x(), theta.sigma_y());
    let dx = s.x - theta.mu_x();
    [
        dx / (sx * sx),
        -1.0 / sx + dx * dx / (sx * sx * sx),
        -1.0 / sy + s.y * s.y / (sy * sy * sy),
    ]
}

/// Scores `d log p / d(mu_x, sigma)` of the 2D model.
pub fn score2d(theta: &ParameterPoint2D, cfg: &Model2DConfig, s: &MicroSample) -> [f64; 2] {
    let sigma = theta.sigma();
    let s4 = cfg.capital_sigma_sq().powi(2);
    let dx = s.x - theta.mu_x();
    [
        dx / (sigma * sigma),
        dx * dx / (sigma * sigma * sigma) - sigma * s.y * s.y / s4,
    ]
}

/// Accumulates `E[s_l s_m]` and `E[s_l]` for a density that factorizes into
/// `N(mu, sx^2)` in `x` and `N(0, sy^2)` in `y`.
fn moments<const N: usize>(
    q: &QuadratureSpec,
    mu: f64,
    sx: f64,
    sy: f64,
    score: impl Fn(&MicroSample) -> [f64; N],
) -> ([[f64; N]; N], [f64; N]) {
    let rule = q.axis_rule();
    let cap = rule.len() * rule.len();
    let mut outer: Vec<Vec<f64>> = vec![Vec::with_capacity(cap); N * N];
    let mut first: Vec<Vec<f64>> = vec![Vec::with_capacity(cap); N];
    for &(zx, wx) in &rule {
        for &(zy, wy) in &rule {
            let smp = MicroSample {
                x: mu + sx * zx,
                y: sy * zy,
            };
            let s = score(&smp);
            let w = wx * wy;
            for l in 0..N {
                first[l].push(w * s[l]);
                for m in 0..N {
                    outer[l * N + m].push(w * s[l] * s[m]);
                }
            }
        }
    }
    let mut g = [[0.0; N]; N];
    let mut mean = [0.0; N];
    for l in 0..N {
        mean[l] = pairwise_sum(&first[l]);
        for m in 0..N {
            g[l][m] = pairwise_sum(&outer[l * N + m]);
        }
    }
    // explicit symmetrization
    for l in 0..N {
        for m in (l + 1)..N {
            let avg = 0.5 * (g[l][m] + g[m][l]);
            g[l][m] = avg;
            g[m][l] = avg;
        }
    }
    (g, mean)
}

fn pad<const N: usize>(g: &[[f64; N]; N]) -> [[f64; MAX_DIM]; MAX_DIM] {
    let mut rows = [[0.0; MAX_DIM]; MAX_DIM];
    for i in 0..N {
        rows[i][..N].copy_from_slice(&g[i]);
    }
    rows
}

fn relative_change<const N: usize>(a: &[[f64; N]; N], b: &[[f64; N]; N]) -> f64 {
    let scale = a.iter().flatten().fold(0.0_f64, |s, v| s.max(v.abs()));
    let diff = a
        .iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0_f64, |s, (x, y)| s.max((x - y).abs()));
    diff / scale
}

fn finish<const N: usize>(
    coarse: ([[f64; N]; N], [f64; N]),
    fine: [[f64; N]; N],
) -> Result<FisherEstimate> {
    let (g, mean) = coarse;
    let delta = relative_change(&g, &fine);
    if !(delta <= CONVERGENCE_TOLERANCE) {
        return Err(Error::QuadratureNonconvergence {
            delta,
            tolerance: CONVERGENCE_TOLERANCE,
        });
    }
    let mut score_means = [0.0; MAX_DIM];
    score_means[..N].copy_from_slice(&mean);
    Ok(FisherEstimate {
        metric: MetricTensor::from_rows(N, pad(&g))?,
        convergence_delta: delta,
        score_means,
    })
}

pub fn fisher_numeric_3d(theta: &ParameterPoint3D, q: &QuadratureSpec) -> Result<FisherEstimate> {
    let score = |s: &MicroSample| score3d(theta, s);
    let (mu, sx, sy) = (theta.mu_x(), theta.sigma_x(), theta.sigma_y());
    let coarse = moments(q, mu, sx, sy, score);
    let (fine, _) = moments(&q.doubled(), mu, sx, sy, score);
    finish(coarse, fine)
}

pub fn fisher_numeric_2d(
    theta: &ParameterPoint2D,
    cfg: &Model2DConfig,
    q: &QuadratureSpec,
) -> Result<FisherEstimate> {
    let score = |s: &MicroSample| score2d(theta, cfg, s);
    let (mu, sx) = (theta.mu_x(), theta.sigma());
    let sy = cfg.capital_sigma_sq() / sx;
    let coarse = moments(q, mu, sx, sy, score);
    let (fine, _) = moments(&q.doubled(), mu, sx, sy, score);
    finish(coarse, fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{metric2d, metric3d, pdf2d, pdf3d};

    fn p3(m: f64, sx: f64, sy: f64) -> ParameterPoint3D {
        ParameterPoint3D::new(m, sx, sy).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::gauss_hermite(7).is_err());
        assert!(QuadratureSpec::truncated_grid(64, 5.0).is_err());
        assert!(QuadratureSpec::truncated_grid(64, 6.0).is_ok());
        assert_eq!(QuadratureSpec::default().nodes_per_axis(), 32);
    }

    #[test]
    fn unit_point_3d() {
        let est = fisher_numeric_3d(&p3(0.0, 1.0, 1.0), &QuadratureSpec::default()).unwrap();
        let expect = metric3d(&p3(0.0, 1.0, 1.0));
        assert!(est.metric.max_abs_diff(&expect) < 1e-8);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(est.metric.get(i, j).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn shifted_point_3d() {
        let t = p3(5.0, 2.0, 0.5);
        let est = fisher_numeric_3d(&t, &QuadratureSpec::default()).unwrap();
        assert!(est.metric.max_abs_diff(&metric3d(&t)) < 1e-8);
        assert!((est.metric.get(2, 2) - 8.0).abs() < 1e-8);
    }

    #[test]
    fn two_d_is_independent_of_capital_sigma() {
        let q = QuadratureSpec::default();
        for (m, s) in [(0.0, 1.0), (2.0, 2.0)] {
            let t = ParameterPoint2D::new(m, s).unwrap();
            let expect = metric2d(&t);
            for big in [0.5, 1.0, 3.0] {
                let cfg = Model2DConfig::new(big).unwrap();
                let est = fisher_numeric_2d(&t, &cfg, &q).unwrap();
                assert!(est.metric.max_abs_diff(&expect) < 1e-8, "Sigma^2 = {big}");
            }
        }
    }

    #[test]
    fn scores_have_zero_mean() {
        let q = QuadratureSpec::default();
        let est = fisher_numeric_3d(&p3(-1.0, 0.3, 4.0), &q).unwrap();
        assert!(est.score_means.iter().all(|m| m.abs() < 1e-9));
        let t = ParameterPoint2D::new(1.0, 0.7).unwrap();
        let est = fisher_numeric_2d(&t, &Model2DConfig::new(2.0).unwrap(), &q).unwrap();
        assert!(est.score_means.iter().all(|m| m.abs() < 1e-9));
    }

    #[test]
    fn grid_and_hermite_agree() {
        let grid = QuadratureSpec::truncated_grid(64, 8.0).unwrap();
        let gh = QuadratureSpec::default();
        let t = p3(0.5, 1.5, 0.8);
        let a = fisher_numeric_3d(&t, &grid).unwrap();
        let b = fisher_numeric_3d(&t, &gh).unwrap();
        assert!(a.metric.max_abs_diff(&b.metric) < 1e-6);
        let t2 = ParameterPoint2D::new(0.5, 1.5).unwrap();
        let cfg = Model2DConfig::new(3.0).unwrap();
        let a = fisher_numeric_2d(&t2, &cfg, &grid).unwrap();
        let b = fisher_numeric_2d(&t2, &cfg, &gh).unwrap();
        assert!(a.metric.max_abs_diff(&b.metric) < 1e-6);
    }

    #[test]
    fn mu_entry_scales_with_inverse_square_sigma() {
        let q = QuadratureSpec::default();
        let g1 = fisher_numeric_3d(&p3(0.0, 1.0, 1.0), &q)
            .unwrap()
            .metric
            .get(0, 0);
        for sx in [0.25, 0.5, 3.0, 10.0] {
            let g = fisher_numeric_3d(&p3(0.0, sx, 1.0), &q)
                .unwrap()
                .metric
                .get(0, 0);
            assert!((g - g1 / (sx * sx)).abs() < 1e-8 / (sx * sx));
        }
    }

    #[test]
    fn densities_are_normalized() {
        let rule = crate::quadrature::legendre_rule(200, -12.0, 12.0);
        let t = p3(0.0, 1.0, 1.0);
        let mut total = 0.0;
        for &(x, wx) in &rule {
            for &(y, wy) in &rule {
                total += wx * wy * pdf3d(&t, &MicroSample { x, y });
            }
        }
        assert!((total - 1.0).abs() < 1e-10);

        let t2 = ParameterPoint2D::new(0.5, 1.3).unwrap();
        let cfg = Model2DConfig::new(1.7).unwrap();
        let mut total = 0.0;
        for &(x, wx) in &rule {
            for &(y, wy) in &rule {
                total += wx * wy * pdf2d(&t2, &cfg, &MicroSample { x, y });
            }
        }
        assert!((total - 1.0).abs() < 1e-10);
    }
}
