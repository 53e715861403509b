//! Gauss–Legendre rules and panel layouts.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point rule on [-1, 1], by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// A reusable rule that lays panels over intervals.
#[derive(Debug, Clone)]
pub struct PanelRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Append nodes/weights for `[lo, hi]` split into equal panels no wider than `max_width`.
    pub fn lay(&self, lo: f64, hi: f64, max_width: f64, xs: &mut Vec<f64>, ws: &mut Vec<f64>) {
        if !(hi > lo) {
            return;
        }
        let panels = ((hi - lo) / max_width).ceil().max(1.0) as usize;
        let width = (hi - lo) / panels as f64;
        for p in 0..panels {
            let start = lo + p as f64 * width;
            let half = 0.5 * width;
            let mid = start + half;
            for (z, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + half * z);
                ws.push(half * w);
            }
        }
    }
}
