//! Gauss-Legendre quadrature on the open unit interval.
//!
//! Quantile functions are singular at p = 0 and p = 1 (logarithmically for
//! the families used here), which a single high-order Gauss-Legendre rule
//! resolves only at an algebraic rate. The rule used throughout the crate
//! is therefore composite: fixed-order Gauss-Legendre panels whose widths
//! shrink geometrically toward both endpoints. No node ever sits on an
//! endpoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes per panel of the composite rule.
pub const PANEL_ORDER: usize = 8;
/// Minimum total node count accepted by [`QuadratureConfig`].
pub const MIN_NODES: usize = 64;
/// Innermost panel edge; `1 - p` stays representable to ~1e-4 relative here.
const INNERMOST_EDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Total number of integrand evaluations.
    pub nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { nodes: 512 }
    }
}

impl QuadratureConfig {
    pub fn with_nodes(nodes: usize) -> Self {
        Self { nodes }
    }

    pub fn rule(&self) -> Result<UnitIntervalRule> {
        UnitIntervalRule::new(*self)
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the `order`-point rule by Newton iteration on the Legendre
    /// three-term recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess for the i-th root counted from +1.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

/// Composite graded Gauss-Legendre rule on (0, 1).
#[derive(Debug, Clone)]
pub struct UnitIntervalRule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl UnitIntervalRule {
    pub fn new(config: QuadratureConfig) -> Result<Self> {
        if config.nodes < MIN_NODES {
            return Err(Error::Quadrature(format!(
                "node count {} below minimum {MIN_NODES}",
                config.nodes
            )));
        }
        let panels_per_side = (config.nodes / (2 * PANEL_ORDER)).max(2);
        // Edges on (0, 1/2]: 0, e, e*r, ..., 1/2 with e*r^(P-1) = 1/2.
        let ratio = (0.5 / INNERMOST_EDGE).powf(1.0 / (panels_per_side - 1) as f64);
        let mut edges = Vec::with_capacity(panels_per_side + 1);
        edges.push(0.0);
        for k in (0..panels_per_side).rev() {
            edges.push(0.5 / ratio.powi(k as i32));
        }

        let base = GaussLegendre::new(PANEL_ORDER);
        let mut lower_p = Vec::with_capacity(panels_per_side * PANEL_ORDER);
        let mut lower_w = Vec::with_capacity(panels_per_side * PANEL_ORDER);
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            for (x, w) in base.nodes.iter().zip(&base.weights) {
                lower_p.push(a + half * (x + 1.0));
                lower_w.push(w * half);
            }
        }

        let mut points = lower_p.clone();
        let mut weights = lower_w.clone();
        for (p, w) in lower_p.iter().rev().zip(lower_w.iter().rev()) {
            points.push(1.0 - p);
            weights.push(*w);
        }
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over (0, 1). Fails on the first non-finite value.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let mut sum = 0.0;
        for (&p, &w) in self.points.iter().zip(&self.weights) {
            let v = f(p);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { p });
            }
            sum += w * v;
        }
        Ok(sum)
    }
}
