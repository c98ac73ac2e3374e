use std::sync::Arc;

use num_complex::Complex64;

use super::grid::QuadratureGrid;
use super::measure::{abs_density, plancherel_density, weight_a};
use crate::error::{Error, Result};
use crate::params::Params;

/// Which variable a function is sampled in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Time,
    Spectral,
}

/// Positive measure a norm is taken against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    /// A(x) dx on the time side.
    A,
    /// |σ|(λ) dλ on the spectral side.
    SigmaAbs,
}

impl Side {
    pub fn measure(self) -> Measure {
        match self {
            Side::Time => Measure::A,
            Side::Spectral => Measure::SigmaAbs,
        }
    }
}

/// Quadrature weights times the density of `measure` at each node.
pub fn measure_weights(grid: &QuadratureGrid, measure: Measure, p: &Params) -> Result<Vec<f64>> {
    grid.nodes()
        .iter()
        .zip(grid.weights())
        .map(|(&x, &w)| {
            Ok(w * match measure {
                Measure::A => weight_a(x, p),
                Measure::SigmaAbs => abs_density(x, p)?,
            })
        })
        .collect()
}

/// Quadrature weights times the complex Plancherel density.
pub fn density_weights(grid: &QuadratureGrid, p: &Params) -> Result<Vec<Complex64>> {
    grid.nodes().iter().zip(grid.weights()).map(|(&l, &v)| Ok(plancherel_density(l, p)? * v)).collect()
}

/// Complex samples of a function on a quadrature grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    grid: Arc<QuadratureGrid>,
    values: Vec<Complex64>,
    side: Side,
}

impl SampledFunction {
    pub fn new(grid: Arc<QuadratureGrid>, values: Vec<Complex64>, side: Side) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} samples on a grid of {} nodes", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("samples must be finite".into()));
        }
        Ok(Self { grid, values, side })
    }

    pub fn from_fn(grid: Arc<QuadratureGrid>, side: Side, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self { grid, values, side }
    }

    pub fn zeros(grid: Arc<QuadratureGrid>, side: Side) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, values, side }
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same grid and side, new values.
    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        Self::new(self.grid.clone(), values, self.side)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect(), side: self.side }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// x ↦ f(−x).
    pub fn reflect(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self { grid: self.grid.clone(), values, side: self.side }
    }

    /// a·self + b·other.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&u, &v)| a * u + b * v).collect();
        Ok(Self { grid: self.grid.clone(), values, side: self.side })
    }

    /// Errors unless `other` lives on the same grid and side.
    pub fn check_same(&self, other: &Self) -> Result<()> {
        if self.side != other.side || self.grid.hash() != other.grid.hash() {
            return Err(Error::GridMismatch("functions live on different grids".into()));
        }
        Ok(())
    }

    /// Errors unless the samples live on `grid`.
    pub fn check_grid(&self, grid: &QuadratureGrid, side: Side) -> Result<()> {
        if self.side != side || self.grid.hash() != grid.hash() {
            return Err(Error::GridMismatch(format!("expected a {side:?}-side function on grid {:016x}", grid.hash())));
        }
        Ok(())
    }

    /// Σ f_i conj(h_i) m_i for precomputed measure weights m.
    pub fn inner_weighted(&self, other: &Self, weights: &[f64]) -> Complex64 {
        self.values.iter().zip(&other.values).zip(weights).map(|((&u, &v), &w)| u * v.conj() * w).sum()
    }
}

/// (Σ |f_i|^p m_i)^{1/p} against `measure`; p = ∞ gives max |f_i|.
pub fn lp_norm(f: &SampledFunction, pexp: f64, measure: Measure, p: &Params) -> Result<f64> {
    if !(pexp >= 1.0) {
        return Err(Error::Domain(format!("Lebesgue exponent must be in [1, inf], got {pexp}")));
    }
    let expected = f.side().measure();
    if measure != expected {
        return Err(Error::GridMismatch(format!("{measure:?} norm requested for a {:?}-side function", f.side())));
    }
    if pexp.is_infinite() {
        return Ok(f.values().iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    let w = measure_weights(f.grid(), measure, p)?;
    Ok(lp_norm_weighted(f.values(), pexp, &w))
}

/// (Σ |v_i|^p w_i)^{1/p}, or max |v_i| for p = ∞.
pub fn lp_norm_weighted(values: &[Complex64], pexp: f64, weights: &[f64]) -> f64 {
    if pexp.is_infinite() {
        return values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    let s: f64 = values.iter().zip(weights).map(|(v, &w)| v.norm().powf(pexp) * w).sum();
    s.powf(1.0 / pexp)
}
