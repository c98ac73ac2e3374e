//! Kernel tensors on quadrature grids, generalized translation and convolution.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::kernel::KernelQuadrature;
use crate::cache::{write_atomic, Reader};
use crate::error::{Error, Result};
use crate::measure_grid::{lp_norm, measure_weights, weight_a, Measure, QuadratureGrid, SampledFunction};
use crate::params::Params;
use crate::quadrature::GaussJacobi;

const TENSOR_MAGIC: &[u8; 5] = b"OCKT1";

/// Product-integration rules in z over the two support intervals of K(x, y, ·).
///
/// K(x, y, z)A(z) behaves like (z − e)^{α−1/2} at an interior edge e of the support and like
/// z^{2α} at e = 0 (when |x| = |y|), so each interval gets a Gauss–Jacobi rule with the matching
/// endpoint exponents. A cut at the grid truncation is a regular endpoint.
#[derive(Clone, Debug)]
struct SupportRules {
    n: usize,
    edge: f64,
    zero_edge: f64,
    rules: Vec<((u8, u8), GaussJacobi<f64>)>,
}

impl SupportRules {
    fn new(p: &Params, n: usize) -> Result<Self> {
        let edge = p.alpha() - 0.5;
        let zero_edge = 2.0 * p.alpha();
        let exps = [0.0, edge, zero_edge];
        let mut rules = Vec::new();
        for r in 0..2u8 {
            for l in 0..3u8 {
                rules.push(((r, l), GaussJacobi::new(n, exps[r as usize], exps[l as usize])?));
            }
        }
        Ok(Self { n, edge, zero_edge, rules })
    }

    fn rule(&self, right: u8, left: u8) -> &GaussJacobi<f64> {
        &self.rules.iter().find(|(k, _)| *k == (right, left)).unwrap().1
    }

    /// Nodes z > 0 and weights ω with ∫ h(z)K(x,y,z)A(z)dz over (lo, hi) ≈ Σ ω·h(z) for smooth h.
    fn positive_interval(&self, kq: &KernelQuadrature, p: &Params, x: f64, y: f64, sign: f64, cap: f64, out: &mut Vec<(f64, f64)>) {
        let lo = (x.abs() - y.abs()).abs();
        let hi_true = x.abs() + y.abs();
        let (hi, right) = if hi_true > cap { (cap, 0u8) } else { (hi_true, 1u8) };
        if !(hi > lo) {
            return;
        }
        let left = if lo == 0.0 { 2u8 } else { 1u8 };
        let (ea, eb) = ([0.0, self.edge][right as usize], [0.0, self.edge, self.zero_edge][left as usize]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let rule = self.rule(right, left);
        let scale = half;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let az = mid + half * t;
            let z = sign * az;
            let k = kq.eval(x, y, z);
            if k == 0.0 {
                continue;
            }
            // Divide out the endpoint factors the rule already carries.
            let d_hi = (hi - az) / half;
            let d_lo = (az - lo) / half;
            let weight_fix = d_hi.powf(-ea) * d_lo.powf(-eb);
            out.push((z, scale * w * weight_fix * k * weight_a(z, p)));
        }
    }

    fn nodes(&self, kq: &KernelQuadrature, p: &Params, x: f64, y: f64, cap: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(2 * self.n);
        self.positive_interval(kq, p, x, y, -1.0, cap, &mut out);
        self.positive_interval(kq, p, x, y, 1.0, cap, &mut out);
        out
    }
}

/// ∫ K(x, y, z) A(z) dz over the full support, by the same z-rules the tensors use.
pub fn kernel_mass(x: f64, y: f64, p: &Params, n_chi: usize, n_z: usize) -> Result<f64> {
    let kq = KernelQuadrature::new(p, n_chi)?;
    let rules = SupportRules::new(p, n_z)?;
    Ok(rules.nodes(&kq, p, x, y, f64::INFINITY).iter().map(|&(_, w)| w).sum())
}

/// Discretized kernel K(x_i, y_j, z_k) for x on `x_grid` and y, z on `grid`.
///
/// Entries are product-integration weights divided by A(z_k)w_k: for f sampled on `grid`,
/// Σ_k f(z_k)·K[i][j][k]·A(z_k)·w_k integrates the grid interpolant of f against
/// K(x_i, y_j, z)A(z)dz exactly up to the z-rule error. Constants are reproduced, so the
/// z-mass of every (i, j) slice is the mass of the continuous kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTensor {
    params: Params,
    x_grid: Arc<QuadratureGrid>,
    grid: Arc<QuadratureGrid>,
    n_chi: usize,
    values: Vec<f64>,
}

fn tensor_hash(x_grid: &QuadratureGrid, grid: &QuadratureGrid) -> u64 {
    if x_grid.hash() == grid.hash() {
        grid.hash()
    } else {
        x_grid.hash() ^ grid.hash().rotate_left(17)
    }
}

/// Square tensor on one grid; K(x, y, z) = K(y, x, z) holds exactly since each unordered pair
/// is integrated once.
pub fn build_kernel_tensor(grid: Arc<QuadratureGrid>, p: &Params, n_chi: usize) -> Result<KernelTensor> {
    build_kernel_tensor_rect(grid.clone(), grid, p, n_chi)
}

/// Tensor with the first slot on `x_grid` (for instance a coarse ξ grid) and y, z on `grid`.
pub fn build_kernel_tensor_rect(x_grid: Arc<QuadratureGrid>, grid: Arc<QuadratureGrid>, p: &Params, n_chi: usize) -> Result<KernelTensor> {
    let kq = KernelQuadrature::new(p, n_chi)?;
    let n = grid.len();
    let n_z = n_chi.max(n / 2);
    let rules = SupportRules::new(p, n_z)?;
    let aw = measure_weights(&grid, Measure::A, p)?;
    let square = x_grid.hash() == grid.hash();
    let pairs: Vec<(usize, usize)> =
        (0..x_grid.len()).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| !square || i <= j).collect();
    let cap = grid.truncation();
    let rows: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut row = vec![0.0; n];
            for (z, w) in rules.nodes(&kq, p, x_grid.nodes()[i], grid.nodes()[j], cap) {
                grid.accumulate_interpolant(z, w, &mut row);
            }
            for (r, a) in row.iter_mut().zip(&aw) {
                *r /= a;
            }
            row
        })
        .collect();
    let nx = x_grid.len();
    let mut values = vec![0.0; nx * n * n];
    for (&(i, j), row) in pairs.iter().zip(&rows) {
        values[(i * n + j) * n..(i * n + j + 1) * n].copy_from_slice(row);
        if square && i != j {
            values[(j * n + i) * n..(j * n + i + 1) * n].copy_from_slice(row);
        }
    }
    Ok(KernelTensor { params: *p, x_grid, grid, n_chi, values })
}

impl KernelTensor {
    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Grid of the first (translation) slot.
    pub fn x_grid(&self) -> &Arc<QuadratureGrid> {
        &self.x_grid
    }

    /// Grid of the y and z slots.
    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn n_chi(&self) -> usize {
        self.n_chi
    }

    pub fn hash(&self) -> u64 {
        tensor_hash(&self.x_grid, &self.grid)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.grid.len();
        self.values[(i * n + j) * n + k]
    }

    /// The z-slice at (x_i, y_j).
    pub fn slice(&self, i: usize, j: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[(i * n + j) * n..(i * n + j + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Node index nearest to x in the translation slot and the snap distance; `None` for x = 0,
    /// which is the identity translation.
    pub fn snap(&self, x: f64) -> (Option<usize>, f64) {
        if x == 0.0 {
            return (None, 0.0);
        }
        let i = self.x_grid.nearest(x);
        (Some(i), (x - self.x_grid.nodes()[i]).abs())
    }

    /// Writes the OCKT1 layout: magic, (α, β, ρ) as f64, grid hash and n_chi as u64, then the
    /// row-major tensor as f64.
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(45 + 8 * self.values.len());
        bytes.extend_from_slice(TENSOR_MAGIC);
        bytes.extend_from_slice(&self.params.to_le_bytes());
        bytes.extend_from_slice(&self.hash().to_le_bytes());
        bytes.extend_from_slice(&(self.n_chi as u64).to_le_bytes());
        for v in &self.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        write_atomic(path, &bytes)
    }

    pub fn load_cache(path: &Path, x_grid: Arc<QuadratureGrid>, grid: Arc<QuadratureGrid>, p: &Params, n_chi: usize) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let mut r = Reader::new(&bytes);
        r.header(TENSOR_MAGIC, &p.to_le_bytes())?;
        if r.u64()? != tensor_hash(&x_grid, &grid) {
            return Err(Error::Cache("grid hash differs from the requested grids".into()));
        }
        if r.u64()? != n_chi as u64 {
            return Err(Error::Cache("n_chi differs from the requested value".into()));
        }
        let len = x_grid.len() * grid.len() * grid.len();
        if r.remaining() != 8 * len {
            return Err(Error::Cache("tensor size does not match the grids".into()));
        }
        let values = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        Ok(Self { params: *p, x_grid, grid, n_chi, values })
    }

    /// Loads a matching cache file or builds and stores the tensor; the flag reports a hit.
    pub fn load_or_build(path: &Path, x_grid: Arc<QuadratureGrid>, grid: Arc<QuadratureGrid>, p: &Params, n_chi: usize) -> Result<(Self, bool)> {
        if path.exists() {
            if let Ok(t) = Self::load_cache(path, x_grid.clone(), grid.clone(), p, n_chi) {
                return Ok((t, true));
            }
        }
        let t = build_kernel_tensor_rect(x_grid, grid, p, n_chi)?;
        t.save_cache(path)?;
        Ok((t, false))
    }

    /// Σ_k f_k K[i][j][k] A(z_k) w_k for every j.
    fn apply_row(&self, i: usize, f: &[Complex64], aw: &[f64]) -> Vec<Complex64> {
        let n = self.grid.len();
        (0..n)
            .map(|j| self.slice(i, j).iter().zip(f).zip(aw).map(|((k, v), a)| v * (k * a)).sum())
            .collect()
    }
}

fn check_tensor_grid(f: &SampledFunction, tensor: &KernelTensor) -> Result<()> {
    if f.grid().hash() != tensor.grid.hash() {
        return Err(Error::GridMismatch("function is not sampled on the tensor grid".into()));
    }
    Ok(())
}

/// τ_x f on the tensor grid, with x snapped to the nearest node of the translation slot.
/// x = 0 returns f unchanged.
pub fn translate(f: &SampledFunction, x: f64, tensor: &KernelTensor) -> Result<SampledFunction> {
    check_tensor_grid(f, tensor)?;
    match tensor.snap(x).0 {
        None => Ok(f.clone()),
        Some(i) => translate_at(f, i, tensor),
    }
}

/// τ_{x_i} f for a node index of the translation slot.
pub fn translate_at(f: &SampledFunction, i: usize, tensor: &KernelTensor) -> Result<SampledFunction> {
    check_tensor_grid(f, tensor)?;
    let aw = measure_weights(&tensor.grid, Measure::A, &tensor.params)?;
    f.with_values(tensor.apply_row(i, f.values(), &aw))
}

/// (f ∗ g)(x_i) = Σ_j τ_{x_i} f(−y_j) g(y_j) A(y_j) w_j on a square tensor.
pub fn convolve(f: &SampledFunction, g: &SampledFunction, tensor: &KernelTensor) -> Result<SampledFunction> {
    check_tensor_grid(f, tensor)?;
    f.check_same(g)?;
    if tensor.x_grid.hash() != tensor.grid.hash() {
        return Err(Error::GridMismatch("convolution needs a square kernel tensor".into()));
    }
    let grid = &tensor.grid;
    let aw = measure_weights(grid, Measure::A, &tensor.params)?;
    let out: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let tf = tensor.apply_row(i, f.values(), &aw);
            (0..grid.len()).map(|j| tf[grid.mirror(j)] * g.values()[j] * aw[j]).sum()
        })
        .collect();
    f.with_values(out)
}

/// max over x nodes and the given functions of ‖τ_x f‖_p/‖f‖_p in L^p(A).
pub fn translation_norm_survey(tensor: &KernelTensor, pexp: f64, family: &[SampledFunction]) -> Result<f64> {
    let p = tensor.params;
    let mut worst: f64 = 0.0;
    for f in family {
        let base = lp_norm(f, pexp, Measure::A, &p)?;
        if base == 0.0 {
            continue;
        }
        for i in 0..tensor.x_grid.len() {
            let r = lp_norm(&translate_at(f, i, tensor)?, pexp, Measure::A, &p)? / base;
            worst = worst.max(r);
        }
    }
    Ok(worst)
}
