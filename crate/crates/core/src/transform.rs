//! Discretized forward and inverse Opdam–Cherednik transforms.
//!
//! ℋf(λ) = ∫ f(x) G_λ(−x) A(x) dx and ℋ⁻¹F(x) = ∫ F(λ) G_λ(x) dσ(λ), both as dense
//! quadrature matrices over a symmetric time grid and a symmetric spectral grid.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cache::{write_atomic, Reader};
use crate::error::{Error, Result};
use crate::measure_grid::{density_weights, measure_weights, Measure, QuadratureGrid, SampledFunction, Side};
use crate::params::Params;
use crate::special_fn::opdam_g_pair;
use crate::Cplx;

const PLAN_MAGIC: &[u8; 5] = b"OCTF1";

/// Transform matrices together with the eigenfunction table they were built from.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformPlan {
    params: Params,
    time_grid: Arc<QuadratureGrid>,
    spectral_grid: Arc<QuadratureGrid>,
    /// G_{λ_k}(x_j), row-major [N_λ × N_x].
    table: Vec<Cplx>,
    /// G_{λ_k}(−x_j)·A(x_j)·w_j, row-major [N_λ × N_x].
    forward: Vec<Cplx>,
    /// G_{λ_k}(x_j)·density(λ_k)·v_k, row-major [N_x × N_λ].
    inverse: Vec<Cplx>,
    time_weights: Vec<f64>,
    density: Vec<Cplx>,
    abs_density: Vec<f64>,
}

/// Both sides of the Plancherel identity for one function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlancherelReport {
    pub lhs: f64,
    pub rhs: Cplx,
    pub rel_err: f64,
    pub imag_leak: f64,
}

/// Eigenfunction table G_{λ_k}(x_j), parallel over spectral rows.
fn eigen_table(time_grid: &QuadratureGrid, spectral_grid: &QuadratureGrid, p: &Params) -> Result<Vec<Cplx>> {
    let nx = time_grid.len();
    let half = nx / 2;
    let rows: Vec<Result<Vec<Cplx>>> = spectral_grid
        .nodes()
        .par_iter()
        .map(|&lam| {
            let mut row = vec![Complex64::new(0.0, 0.0); nx];
            for j in half..nx {
                let (gp, gm) = opdam_g_pair(Complex64::new(lam, 0.0), time_grid.nodes()[j], p)?;
                row[j] = gp;
                row[time_grid.mirror(j)] = gm;
            }
            Ok(row)
        })
        .collect();
    let mut table = Vec::with_capacity(nx * spectral_grid.len());
    for r in rows {
        table.extend(r?);
    }
    Ok(table)
}

/// Assembles the transform matrices; rows are computed in parallel.
pub fn build_plan(time_grid: Arc<QuadratureGrid>, spectral_grid: Arc<QuadratureGrid>, p: &Params) -> Result<TransformPlan> {
    let table = eigen_table(&time_grid, &spectral_grid, p)?;
    TransformPlan::from_table(time_grid, spectral_grid, *p, table)
}

impl TransformPlan {
    fn from_table(time_grid: Arc<QuadratureGrid>, spectral_grid: Arc<QuadratureGrid>, params: Params, table: Vec<Cplx>) -> Result<Self> {
        let (nx, nl) = (time_grid.len(), spectral_grid.len());
        if table.len() != nx * nl {
            return Err(Error::Cache(format!("eigenfunction table has {} entries, expected {}", table.len(), nx * nl)));
        }
        let time_weights = measure_weights(&time_grid, Measure::A, &params)?;
        let density = density_weights(&spectral_grid, &params)?;
        let abs_density = measure_weights(&spectral_grid, Measure::SigmaAbs, &params)?;
        let mut forward = vec![Complex64::new(0.0, 0.0); nl * nx];
        let mut inverse = vec![Complex64::new(0.0, 0.0); nx * nl];
        for k in 0..nl {
            for j in 0..nx {
                forward[k * nx + j] = table[k * nx + time_grid.mirror(j)] * time_weights[j];
                inverse[j * nl + k] = table[k * nx + j] * density[k];
            }
        }
        Ok(Self { params, time_grid, spectral_grid, table, forward, inverse, time_weights, density, abs_density })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn time_grid(&self) -> &Arc<QuadratureGrid> {
        &self.time_grid
    }

    pub fn spectral_grid(&self) -> &Arc<QuadratureGrid> {
        &self.spectral_grid
    }

    /// G_{λ_k}(x_j).
    pub fn eigen(&self, k: usize, j: usize) -> Cplx {
        self.table[k * self.time_grid.len() + j]
    }

    pub fn forward_entry(&self, k: usize, j: usize) -> Cplx {
        self.forward[k * self.time_grid.len() + j]
    }

    pub fn inverse_entry(&self, j: usize, k: usize) -> Cplx {
        self.inverse[j * self.spectral_grid.len() + k]
    }

    /// A(x_j)·w_j.
    pub fn time_weights(&self) -> &[f64] {
        &self.time_weights
    }

    /// density(λ_k)·v_k.
    pub fn density(&self) -> &[Cplx] {
        &self.density
    }

    /// |density(λ_k)|·v_k.
    pub fn abs_density(&self) -> &[f64] {
        &self.abs_density
    }

    /// Writes the eigenfunction table in the OCTF1 layout: magic, (α, β, ρ) as f64, time and
    /// spectral grid hashes as u64, then the row-major complex table as (re, im) f64 pairs.
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(45 + 16 * self.table.len());
        bytes.extend_from_slice(PLAN_MAGIC);
        bytes.extend_from_slice(&self.params.to_le_bytes());
        bytes.extend_from_slice(&self.time_grid.hash().to_le_bytes());
        bytes.extend_from_slice(&self.spectral_grid.hash().to_le_bytes());
        for v in &self.table {
            bytes.extend_from_slice(&v.re.to_le_bytes());
            bytes.extend_from_slice(&v.im.to_le_bytes());
        }
        write_atomic(path, &bytes)
    }

    /// Loads a plan written by [`save_cache`](Self::save_cache); fails if the header does not
    /// match the requested parameters and grids.
    pub fn load_cache(path: &Path, time_grid: Arc<QuadratureGrid>, spectral_grid: Arc<QuadratureGrid>, p: &Params) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let mut r = Reader::new(&bytes);
        r.header(PLAN_MAGIC, &p.to_le_bytes())?;
        if r.u64()? != time_grid.hash() || r.u64()? != spectral_grid.hash() {
            return Err(Error::Cache("grid hashes differ from the requested grids".into()));
        }
        let n = time_grid.len() * spectral_grid.len();
        if r.remaining() != 16 * n {
            return Err(Error::Cache("table size does not match the grids".into()));
        }
        let mut table = Vec::with_capacity(n);
        for _ in 0..n {
            table.push(Complex64::new(r.f64()?, r.f64()?));
        }
        Self::from_table(time_grid, spectral_grid, *p, table)
    }

    /// Loads the cached plan if it matches, otherwise builds and stores it. Returns whether the
    /// cache was hit.
    pub fn load_or_build(path: &Path, time_grid: Arc<QuadratureGrid>, spectral_grid: Arc<QuadratureGrid>, p: &Params) -> Result<(Self, bool)> {
        if path.exists() {
            if let Ok(plan) = Self::load_cache(path, time_grid.clone(), spectral_grid.clone(), p) {
                return Ok((plan, true));
            }
        }
        let plan = build_plan(time_grid, spectral_grid, p)?;
        plan.save_cache(path)?;
        Ok((plan, false))
    }
}

fn matvec(m: &[Cplx], rows: usize, cols: usize, v: &[Cplx]) -> Vec<Cplx> {
    (0..rows)
        .into_par_iter()
        .map(|r| m[r * cols..(r + 1) * cols].iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// ℋf on the spectral grid.
pub fn forward(plan: &TransformPlan, f: &SampledFunction) -> Result<SampledFunction> {
    f.check_grid(&plan.time_grid, Side::Time)?;
    let v = matvec(&plan.forward, plan.spectral_grid.len(), plan.time_grid.len(), f.values());
    SampledFunction::new(plan.spectral_grid.clone(), v, Side::Spectral)
}

/// ℋ⁻¹F on the time grid.
pub fn inverse(plan: &TransformPlan, f: &SampledFunction) -> Result<SampledFunction> {
    f.check_grid(&plan.spectral_grid, Side::Spectral)?;
    let v = matvec(&plan.inverse, plan.time_grid.len(), plan.spectral_grid.len(), f.values());
    SampledFunction::new(plan.time_grid.clone(), v, Side::Time)
}

fn report(lhs: f64, rhs: Cplx) -> PlancherelReport {
    let rel_err = if lhs == 0.0 { rhs.norm() } else { (rhs - lhs).norm() / lhs };
    let imag_leak = if rhs.norm() == 0.0 { 0.0 } else { rhs.im.abs() / rhs.norm() };
    PlancherelReport { lhs, rhs, rel_err, imag_leak }
}

/// ∫|f|²A dx against ∫|ℋf|² dσ with the complex density.
pub fn plancherel_report(plan: &TransformPlan, f: &SampledFunction) -> Result<PlancherelReport> {
    let hf = forward(plan, f)?;
    let lhs: f64 = f.values().iter().zip(&plan.time_weights).map(|(v, w)| v.norm_sqr() * w).sum();
    let rhs: Cplx = hf.values().iter().zip(&plan.density).map(|(v, d)| d * v.norm_sqr()).sum();
    Ok(report(lhs, rhs))
}

/// ∫|f|²A dx against ∫ ℋf(λ)·conj(ℋf̌(−λ)) dσ, where f̌(x) = f(−x).
pub fn plancherel_report_reflected(plan: &TransformPlan, f: &SampledFunction) -> Result<PlancherelReport> {
    let hf = forward(plan, f)?;
    let hfr = forward(plan, &f.reflect())?;
    let lhs: f64 = f.values().iter().zip(&plan.time_weights).map(|(v, w)| v.norm_sqr() * w).sum();
    let sg = &plan.spectral_grid;
    let rhs: Cplx = (0..sg.len()).map(|k| plan.density[k] * hf.values()[k] * hfr.values()[sg.mirror(k)].conj()).sum();
    Ok(report(lhs, rhs))
}
