use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// How the nodes of a grid are placed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    UniformMidpoint,
    GaussLegendreComposite,
}

/// Symmetric quadrature grid on [−X, X] that never contains 0.
///
/// Weights are plain Lebesgue quadrature weights; measure densities are applied separately.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    truncation: f64,
    kind: GridKind,
    panels_per_side: usize,
    bary: Vec<f64>,
    ref_nodes: Vec<f64>,
    hash: u64,
}

/// Builds a grid with one Gauss–Legendre panel per half-line, or the midpoint rule.
pub fn make_grid(half_width: f64, n: usize, kind: GridKind) -> Result<QuadratureGrid> {
    make_grid_with_panels(half_width, n, kind, 1)
}

/// As [`make_grid`], with `panels_per_side` Gauss–Legendre panels on each half-line.
pub fn make_grid_with_panels(half_width: f64, n: usize, kind: GridKind, panels_per_side: usize) -> Result<QuadratureGrid> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::Config(format!("grid size must be even and positive, got {n}")));
    }
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(Error::Config(format!("grid half-width must be positive, got {half_width}")));
    }
    match kind {
        GridKind::UniformMidpoint => {
            let h = 2.0 * half_width / n as f64;
            let nodes = (0..n).map(|i| -half_width + (i as f64 + 0.5) * h).collect();
            QuadratureGrid::from_parts(nodes, vec![h; n], half_width, kind)
        }
        GridKind::GaussLegendreComposite => {
            let panels = 2 * panels_per_side;
            if panels_per_side == 0 || n % panels != 0 {
                return Err(Error::Config(format!("{n} nodes cannot be split into {panels} equal panels")));
            }
            let m = n / panels;
            let (t, w) = gauss_legendre::<f64>(m);
            let width = half_width / panels_per_side as f64;
            let mut nodes = Vec::with_capacity(n);
            let mut weights = Vec::with_capacity(n);
            for k in 0..panels {
                let lo = -half_width + k as f64 * width;
                let mid = lo + 0.5 * width;
                for j in 0..m {
                    nodes.push(mid + 0.5 * width * t[j]);
                    weights.push(0.5 * width * w[j]);
                }
            }
            let mut g = QuadratureGrid::from_parts(nodes, weights, half_width, kind)?;
            g.panels_per_side = panels_per_side;
            g.bary = (0..m).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } * ((1.0 - t[j] * t[j]) * w[j]).sqrt()).collect();
            g.ref_nodes = t;
            g.hash = g.compute_hash();
            Ok(g)
        }
    }
}

impl QuadratureGrid {
    /// Validates and wraps explicit nodes and weights. Gauss–Legendre grids built this way are
    /// treated as a single panel per half-line.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, truncation: f64, kind: GridKind) -> Result<Self> {
        let n = nodes.len();
        if n == 0 || n % 2 == 1 || weights.len() != n {
            return Err(Error::Grid(format!("need an even number of nodes with matching weights, got {n}/{}", weights.len())));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("nodes must be strictly increasing".into()));
        }
        let tol = 1e-12 * truncation.max(1.0);
        if (0..n / 2).any(|i| (nodes[i] + nodes[n - 1 - i]).abs() > tol) {
            return Err(Error::Grid("nodes must be symmetric about 0".into()));
        }
        if nodes.iter().any(|&x| x == 0.0 || x.abs() > truncation) {
            return Err(Error::Grid("nodes must be nonzero and inside the truncation interval".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Grid("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 2.0 * truncation).abs() > 1e-12 * 2.0 * truncation.max(1.0) {
            return Err(Error::Grid(format!("weights sum to {total}, expected {}", 2.0 * truncation)));
        }
        let mut g = Self { nodes, weights, truncation, kind, panels_per_side: 1, bary: Vec::new(), ref_nodes: Vec::new(), hash: 0 };
        if kind == GridKind::GaussLegendreComposite {
            let m = n / 2;
            let (t, w) = gauss_legendre::<f64>(m);
            g.bary = (0..m).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } * ((1.0 - t[j] * t[j]) * w[j]).sqrt()).collect();
            g.ref_nodes = t;
        }
        g.hash = g.compute_hash();
        Ok(g)
    }

    fn compute_hash(&self) -> u64 {
        let mut h = Sha256::new();
        h.update([self.kind as u8]);
        h.update((self.panels_per_side as u64).to_le_bytes());
        h.update(self.truncation.to_le_bytes());
        for v in self.nodes.iter().chain(self.weights.iter()) {
            h.update(v.to_le_bytes());
        }
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().unwrap())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Stable 64-bit content hash used in cache headers.
    pub fn hash(&self) -> u64 {
        self.hash
    }

    /// Index of the node −x_i.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        self.nodes.len() - 1 - i
    }

    /// Index of the node nearest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let k = self.nodes.partition_point(|&v| v < x);
        if k == 0 {
            0
        } else if k == self.nodes.len() || (x - self.nodes[k - 1]) <= (self.nodes[k] - x) {
            k - 1
        } else {
            k
        }
    }

    /// Adds `scale·L_k(t)` to `out[k]`, where L_k are the interpolation cardinal functions of
    /// the grid: barycentric Lagrange on each Gauss–Legendre panel, local cubic Lagrange on a
    /// midpoint grid. Points outside [−X, X] contribute nothing; returns whether `t` was inside.
    pub fn accumulate_interpolant(&self, t: f64, scale: f64, out: &mut [f64]) -> bool {
        let x = self.truncation;
        if !(t.abs() <= x) {
            return false;
        }
        match self.kind {
            GridKind::UniformMidpoint => {
                let n = self.nodes.len();
                let h = self.weights[0];
                let pos = (t - self.nodes[0]) / h;
                let start = (pos.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
                for j in 0..4 {
                    let xj = self.nodes[start + j];
                    let mut l = 1.0;
                    for m in 0..4 {
                        if m != j {
                            let xm = self.nodes[start + m];
                            l *= (t - xm) / (xj - xm);
                        }
                    }
                    out[start + j] += scale * l;
                }
            }
            GridKind::GaussLegendreComposite => {
                let m = self.ref_nodes.len();
                let panels = 2 * self.panels_per_side;
                let width = x / self.panels_per_side as f64;
                let k = (((t + x) / width).floor() as usize).min(panels - 1);
                let lo = -x + k as f64 * width;
                let s = (2.0 * (t - lo) / width) - 1.0;
                let base = k * m;
                if let Some(j) = self.ref_nodes.iter().position(|&r| r == s) {
                    out[base + j] += scale;
                    return true;
                }
                let mut denom = 0.0;
                for j in 0..m {
                    denom += self.bary[j] / (s - self.ref_nodes[j]);
                }
                let f = scale / denom;
                for j in 0..m {
                    out[base + j] += f * self.bary[j] / (s - self.ref_nodes[j]);
                }
            }
        }
        true
    }
}
