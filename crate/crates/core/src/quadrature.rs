//! Quadrature rules and reproducible summation.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::{GaussHermite, GaussLegendre};

/// Nodes and weights with `sum_i w_i f(z_i) ~ E[f(Z)]`, `Z ~ N(0, 1)`.
pub fn standard_normal_rule(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n).expect("rule needs at least one node");
    let norm = PI.sqrt().recip();
    GaussHermite::new(n)
        .as_node_weight_pairs()
        .iter()
        .map(|&(u, w)| (std::f64::consts::SQRT_2 * u, w * norm))
        .collect()
}

/// Gauss-Legendre nodes and weights mapped onto `[a, b]`.
pub fn legendre_rule(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n).expect("rule needs at least one node");
    let (half, mid) = (0.5 * (b - a), 0.5 * (a + b));
    GaussLegendre::new(n)
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Composite Gauss-Legendre on `panels` equal subintervals of `[a, b]`.
pub fn composite_legendre<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
) -> f64 {
    let base = legendre_rule(order, -1.0, 1.0);
    let width = (b - a) / panels as f64;
    let mut terms = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + width * p as f64;
        let mid = lo + 0.5 * width;
        for &(x, w) in &base {
            terms.push(0.5 * width * w * f(mid + 0.5 * width * x));
        }
    }
    pairwise_sum(&terms)
}

/// Pairwise (cascade) summation. The result depends only on the order of
/// `values`, never on scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}
