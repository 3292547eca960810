//! Dense tensors for manifolds of dimension at most three.
//!
//! Every tensor carries its dimension and stores all components, zeros
//! included, in fixed `3 x ... x 3` arrays. Entries with an index `>= dim`
//! are always zero. Coordinate indices are 0-based: for the Gaussian models
//! index 0 is `mu_x`, index 1 is `sigma_x` (or `sigma`) and index 2 is
//! `sigma_y`.

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

type Mat = [[f64; MAX_DIM]; MAX_DIM];

fn check_dim(dim: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::Dimension {
            expected: MAX_DIM,
            actual: dim,
        })
    }
}

/// A symmetric positive definite metric `g_lm` together with its inverse
/// `g^lm` and determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTensor {
    dim: usize,
    g: Mat,
    inv: Mat,
    det: f64,
}

impl MetricTensor {
    /// Builds a metric from the leading `dim x dim` block of `rows`.
    ///
    /// Rejects asymmetric input (relative tolerance 1e-12) and input whose
    /// leading principal minors are not all strictly positive.
    pub fn from_rows(dim: usize, rows: Mat) -> Result<Self> {
        check_dim(dim)?;
        let mut g = [[0.0; MAX_DIM]; MAX_DIM];
        let mut scale = 0.0_f64;
        for i in 0..dim {
            for j in 0..dim {
                let v = rows[i][j];
                if !v.is_finite() {
                    return Err(Error::Domain {
                        name: "metric component",
                        requirement: "finite",
                        value: v,
                    });
                }
                g[i][j] = v;
                scale = scale.max(v.abs());
            }
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let asymmetry = (g[i][j] - g[j][i]).abs();
                if asymmetry > 1e-12 * scale {
                    return Err(Error::NotSymmetric { i, j, asymmetry });
                }
            }
        }
        for order in 1..=dim {
            let minor = leading_minor(&g, order);
            if minor.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::NotPositiveDefinite { order, minor });
            }
        }
        let det = leading_minor(&g, dim);
        let inv = adjugate_inverse(&g, dim, det);
        Ok(Self { dim, g, inv, det })
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        check_dim(entries.len())?;
        let mut rows = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, &e) in entries.iter().enumerate() {
            rows[i][i] = e;
        }
        Self::from_rows(entries.len(), rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Lower-index component `g_ij`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.g[i][j]
    }

    /// Upper-index component `g^ij`.
    pub fn inverse(&self, i: usize, j: usize) -> f64 {
        self.inv[i][j]
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn components(&self) -> &Mat {
        &self.g
    }

    /// `g_lm v^l v^m`.
    pub fn norm_sq(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.dim);
        let mut s = 0.0;
        for l in 0..self.dim {
            for m in 0..self.dim {
                s += self.g[l][m] * v[l] * v[m];
            }
        }
        s
    }

    pub fn max_abs_diff(&self, other: &MetricTensor) -> f64 {
        let mut d = 0.0_f64;
        for i in 0..MAX_DIM {
            for j in 0..MAX_DIM {
                d = d.max((self.g[i][j] - other.g[i][j]).abs());
            }
        }
        d
    }

    /// `max |g^lm g_mk - delta^l_k|`.
    pub fn inverse_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for l in 0..self.dim {
            for k in 0..self.dim {
                let s: f64 = (0..self.dim).map(|m| self.inv[l][m] * self.g[m][k]).sum();
                let delta = if l == k { 1.0 } else { 0.0 };
                worst = worst.max((s - delta).abs());
            }
        }
        worst
    }
}

fn leading_minor(g: &Mat, order: usize) -> f64 {
    match order {
        1 => g[0][0],
        2 => g[0][0] * g[1][1] - g[0][1] * g[1][0],
        3 => {
            g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
                - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
        }
        _ => unreachable!("dimension checked at construction"),
    }
}

fn adjugate_inverse(g: &Mat, dim: usize, det: f64) -> Mat {
    let mut inv = [[0.0; MAX_DIM]; MAX_DIM];
    match dim {
        1 => inv[0][0] = 1.0 / g[0][0],
        2 => {
            inv[0][0] = g[1][1] / det;
            inv[1][1] = g[0][0] / det;
            inv[0][1] = -g[0][1] / det;
            inv[1][0] = -g[1][0] / det;
        }
        3 => {
            for i in 0..3 {
                for j in 0..3 {
                    // cofactor of (j, i)
                    let (r0, r1) = others(j);
                    let (c0, c1) = others(i);
                    let minor = g[r0][c0] * g[r1][c1] - g[r0][c1] * g[r1][c0];
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    inv[i][j] = sign * minor / det;
                }
            }
        }
        _ => unreachable!("dimension checked at construction"),
    }
    inv
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Connection coefficients `Gamma^k_ij`, stored as `[k][i][j]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChristoffelSymbols {
    dim: usize,
    c: [Mat; MAX_DIM],
}

impl ChristoffelSymbols {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self {
            dim,
            c: [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[k][i][j]
    }

    pub fn set(&mut self, k: usize, i: usize, j: usize, value: f64) {
        assert!(k < self.dim && i < self.dim && j < self.dim);
        self.c[k][i][j] = value;
    }

    /// Sets `Gamma^k_ij` and `Gamma^k_ji`.
    pub fn set_sym(&mut self, k: usize, i: usize, j: usize, value: f64) {
        self.set(k, i, j, value);
        self.set(k, j, i, value);
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d = 0.0_f64;
        for k in 0..MAX_DIM {
            for i in 0..MAX_DIM {
                for j in 0..MAX_DIM {
                    d = d.max((self.c[k][i][j] - other.c[k][i][j]).abs());
                }
            }
        }
        d
    }

    /// `max |Gamma^k_ij - Gamma^k_ji|`.
    pub fn max_lower_asymmetry(&self) -> f64 {
        let mut d = 0.0_f64;
        for k in 0..self.dim {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    d = d.max((self.c[k][i][j] - self.c[k][j][i]).abs());
                }
            }
        }
        d
    }
}

/// Partial derivatives `d_l Gamma^k_ij`, stored as `[k][i][j][l]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChristoffelGradient {
    dim: usize,
    d: [[Mat; MAX_DIM]; MAX_DIM],
}

impl ChristoffelGradient {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self {
            dim,
            d: [[[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, i: usize, j: usize, l: usize) -> f64 {
        self.d[k][i][j][l]
    }

    pub fn set_sym(&mut self, k: usize, i: usize, j: usize, l: usize, value: f64) {
        assert!(k < self.dim && i < self.dim && j < self.dim && l < self.dim);
        self.d[k][i][j][l] = value;
        self.d[k][j][i][l] = value;
    }
}

/// Riemann tensor with the first index raised, `R^a_{mnr}`, stored as
/// `[a][m][n][r]`, under the convention
/// `R^a_{mnr} = d_n Gamma^a_mr - d_r Gamma^a_mn + Gamma^a_bn Gamma^b_mr - Gamma^a_br Gamma^b_mn`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannTensor {
    dim: usize,
    r: [[Mat; MAX_DIM]; MAX_DIM],
}

impl RiemannTensor {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self {
            dim,
            r: [[[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM]; MAX_DIM],
        }
    }

    /// Assembles `R^a_{mnr}` from connection coefficients and their gradient.
    pub fn from_connection(gamma: &ChristoffelSymbols, grad: &ChristoffelGradient) -> Self {
        let n = gamma.dim();
        let mut out = Self::zeros(n);
        for a in 0..n {
            for m in 0..n {
                for nu in 0..n {
                    for rho in 0..n {
                        let mut v = grad.get(a, m, rho, nu) - grad.get(a, m, nu, rho);
                        for b in 0..n {
                            v += gamma.get(a, b, nu) * gamma.get(b, m, rho)
                                - gamma.get(a, b, rho) * gamma.get(b, m, nu);
                        }
                        out.r[a][m][nu][rho] = v;
                    }
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, m: usize, n: usize, r: usize) -> f64 {
        self.r[a][m][n][r]
    }

    /// Sets `R^a_{mnr}` and, by antisymmetry in the last pair, `R^a_{mrn}`.
    pub fn set_antisym(&mut self, a: usize, m: usize, n: usize, r: usize, value: f64) {
        assert!(a < self.dim && m < self.dim && n < self.dim && r < self.dim);
        self.r[a][m][n][r] = value;
        self.r[a][m][r][n] = -value;
    }

    /// All-lower component `R_{amnr} = g_ab R^b_{mnr}`.
    pub fn lowered(&self, metric: &MetricTensor, a: usize, m: usize, n: usize, r: usize) -> f64 {
        (0..self.dim)
            .map(|b| metric.get(a, b) * self.r[b][m][n][r])
            .sum()
    }

    /// Contraction `R_mr = R^a_{mar}`.
    pub fn ricci(&self) -> RicciTensor {
        let mut out = RicciTensor::zeros(self.dim);
        for m in 0..self.dim {
            for r in 0..self.dim {
                out.r[m][r] = (0..self.dim).map(|a| self.r[a][m][a][r]).sum();
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d = 0.0_f64;
        for a in 0..MAX_DIM {
            for m in 0..MAX_DIM {
                for n in 0..MAX_DIM {
                    for r in 0..MAX_DIM {
                        d = d.max((self.r[a][m][n][r] - other.r[a][m][n][r]).abs());
                    }
                }
            }
        }
        d
    }

    /// `max |R^a_{mnr} + R^a_{mrn}|`.
    pub fn max_antisymmetry_violation(&self) -> f64 {
        let mut d = 0.0_f64;
        self.for_each_index(|a, m, n, r| {
            d = d.max((self.r[a][m][n][r] + self.r[a][m][r][n]).abs());
        });
        d
    }

    /// First Bianchi identity, `max |R^a_{mnr} + R^a_{nrm} + R^a_{rmn}|`.
    pub fn max_bianchi_violation(&self) -> f64 {
        let mut d = 0.0_f64;
        self.for_each_index(|a, m, n, r| {
            let cyc = self.r[a][m][n][r] + self.r[a][n][r][m] + self.r[a][r][m][n];
            d = d.max(cyc.abs());
        });
        d
    }

    fn for_each_index(&self, mut f: impl FnMut(usize, usize, usize, usize)) {
        for a in 0..self.dim {
            for m in 0..self.dim {
                for n in 0..self.dim {
                    for r in 0..self.dim {
                        f(a, m, n, r);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicciTensor {
    dim: usize,
    r: Mat,
}

impl RicciTensor {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self {
            dim,
            r: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.r[i][j]
    }

    /// Scalar curvature `g^ij R_ij`.
    pub fn scalar(&self, metric: &MetricTensor) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += metric.inverse(i, j) * self.r[i][j];
            }
        }
        s
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d = 0.0_f64;
        for i in 0..MAX_DIM {
            for j in 0..MAX_DIM {
                d = d.max((self.r[i][j] - other.r[i][j]).abs());
            }
        }
        d
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut d = 0.0_f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                d = d.max((self.r[i][j] - self.r[j][i]).abs());
            }
        }
        d
    }
}

/// Riemann tensor, its Ricci contraction and the scalar curvature at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvature {
    pub riemann: RiemannTensor,
    pub ricci: RicciTensor,
    pub scalar: f64,
}

impl Curvature {
    pub fn from_riemann(riemann: RiemannTensor, metric: &MetricTensor) -> Self {
        let ricci = riemann.ricci();
        let scalar = ricci.scalar(metric);
        Self {
            riemann,
            ricci,
            scalar,
        }
    }
}
