//! Composite Gauss–Legendre quadrature on the unit interval.
//!
//! A [`QuadratureRule`] stores nodes and weights on `[0, 1]`; [`integrate`]
//! maps it affinely onto `[a, b]`, so the mapped weights sum to `b − a`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // Panel edges on [0, 1]; kept so the rule can be refined by doubling.
    edges: Vec<f64>,
    order: usize,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

impl QuadratureRule {
    fn from_edges(order: usize, edges: Vec<f64>) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order * (edges.len() - 1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        for pair in edges.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
        Self {
            nodes,
            weights,
            edges,
            order,
        }
    }

    /// Single-panel Gauss–Legendre rule with `order` points.
    pub fn gauss_legendre(order: usize) -> Self {
        Self::composite(order, 1)
    }

    /// `panels` equal-width panels with an `order`-point rule on each.
    pub fn composite(order: usize, panels: usize) -> Self {
        assert!(order >= 1 && panels >= 1);
        let edges = (0..=panels).map(|i| i as f64 / panels as f64).collect();
        Self::from_edges(order, edges)
    }

    /// Panels shrink geometrically (ratio 2) toward both endpoints, down to a
    /// first panel of relative width `finest`. Suited to integrands with
    /// steep boundary layers such as beta densities with shapes below 1.
    pub fn graded(order: usize, finest: f64) -> Self {
        assert!(finest > 0.0 && finest < 0.5);
        let mut left = vec![0.0];
        let mut w = finest;
        while left.last().copied().unwrap_or(0.0) + w < 0.5 {
            let next = left.last().unwrap() + w;
            left.push(next);
            w *= 2.0;
        }
        left.push(0.5);
        let mut edges = left.clone();
        for &e in left.iter().rev().skip(1) {
            edges.push(1.0 - e);
        }
        Self::from_edges(order, edges)
    }

    /// The same rule with every panel split in two.
    pub fn doubled(&self) -> Self {
        let mut edges = Vec::with_capacity(2 * self.edges.len());
        for pair in self.edges.windows(2) {
            edges.push(pair[0]);
            edges.push(0.5 * (pair[0] + pair[1]));
        }
        edges.push(*self.edges.last().unwrap());
        Self::from_edges(self.order, edges)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Integrate `f` over `[a, b]` with `rule`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rule: &QuadratureRule) -> Result<f64> {
    if a > b || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!("integration bounds must satisfy a <= b, got [{a}, {b}]")));
    }
    let width = b - a;
    let mut acc = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * f(a + width * x);
    }
    Ok(acc * width)
}
