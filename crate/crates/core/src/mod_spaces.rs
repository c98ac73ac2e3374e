//! Classical short-time Fourier transform with Gaussian reference windows, and the mixed
//! modulation norms M^{p,q}(ℝ, A) on the line and M^p(ℝ², A⊗σ) for symbols.
//!
//! The STFT itself is Lebesgue: V_g f(x, w) = ∫ f(t) conj(g(t−x)) e^{−2πiwt} dt. The weights
//! A (and |σ| on the ξ axis of a symbol) enter only in the outer norms.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure_grid::{make_grid, measure_weights, GridKind, Measure, QuadratureGrid, SampledFunction};
use crate::modulation_window::TFPlane;
use crate::params::Params;
use crate::Cplx;

/// Frequency half-width of the default STFT lattices.
pub const DEFAULT_FREQ_HALF_WIDTH: f64 = 4.0;
/// Frequency nodes of the default 1-D lattice.
pub const DEFAULT_FREQ_NODES: usize = 64;
/// Nodes per axis of the default 4-D symbol lattice.
pub const DEFAULT_SYMBOL_NODES: usize = 16;

/// g(t) = e^{−π(t/scale)²}; scale 1 is the fixed reference window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceWindow {
    pub scale: f64,
}

impl ReferenceWindow {
    pub const UNIT: Self = Self { scale: 1.0 };

    pub fn dilated(scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Domain(format!("window scale must be positive, got {scale}")));
        }
        Ok(Self { scale })
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let s = t / self.scale;
        (-PI * s * s).exp()
    }
}

impl Default for ReferenceWindow {
    fn default() -> Self {
        Self::UNIT
    }
}

fn check_exponent(pexp: f64) -> Result<()> {
    if !(pexp >= 1.0) {
        return Err(Error::Domain(format!("exponent must be in [1, inf], got {pexp}")));
    }
    Ok(())
}

/// V_{g₀} f(x, w) by quadrature on the grid of f, with the unit reference window.
pub fn stft(f: &SampledFunction, x: f64, w: f64) -> Cplx {
    stft_with(f, x, w, ReferenceWindow::UNIT)
}

pub fn stft_with(f: &SampledFunction, x: f64, w: f64, win: ReferenceWindow) -> Cplx {
    let g = f.grid();
    g.nodes()
        .iter()
        .zip(g.weights())
        .zip(f.values())
        .map(|((&t, &h), &v)| v * (win.eval(t - x) * h) * Complex64::from_polar(1.0, -2.0 * PI * w * t))
        .sum()
}

/// Sample points (x, w) of an STFT, each axis a Lebesgue quadrature grid.
#[derive(Clone, Debug, PartialEq)]
pub struct StftLattice {
    pub x_grid: Arc<QuadratureGrid>,
    pub w_grid: Arc<QuadratureGrid>,
}

impl StftLattice {
    /// Positions on `grid` itself, frequencies on the default Gauss–Legendre grid.
    pub fn for_grid(grid: &Arc<QuadratureGrid>) -> Result<Self> {
        Ok(Self { x_grid: grid.clone(), w_grid: Arc::new(make_grid(DEFAULT_FREQ_HALF_WIDTH, DEFAULT_FREQ_NODES, GridKind::GaussLegendreComposite)?) })
    }
}

/// V_g f on a lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct StftPlane {
    pub x_grid: Arc<QuadratureGrid>,
    pub w_grid: Arc<QuadratureGrid>,
    /// Row-major [N_x × N_w].
    pub values: Vec<Cplx>,
}

impl StftPlane {
    pub fn get(&self, j: usize, k: usize) -> Cplx {
        self.values[j * self.w_grid.len() + k]
    }
}

/// STFT of f over a lattice; parallel over frequency columns.
pub fn stft_plane(f: &SampledFunction, lattice: &StftLattice, win: ReferenceWindow) -> StftPlane {
    let (xs, ws) = (lattice.x_grid.nodes(), lattice.w_grid.nodes());
    let g = f.grid();
    let fw: Vec<Cplx> = f.values().iter().zip(g.weights()).map(|(v, h)| v * h).collect();
    let cols: Vec<Vec<Cplx>> = ws
        .par_iter()
        .map(|&w| {
            let phased: Vec<Cplx> = fw.iter().zip(g.nodes()).map(|(v, &t)| v * Complex64::from_polar(1.0, -2.0 * PI * w * t)).collect();
            xs.iter().map(|&x| phased.iter().zip(g.nodes()).map(|(v, &t)| v * win.eval(t - x)).sum()).collect()
        })
        .collect();
    let nw = ws.len();
    let mut values = vec![Complex64::new(0.0, 0.0); xs.len() * nw];
    for (k, col) in cols.iter().enumerate() {
        for (j, v) in col.iter().enumerate() {
            values[j * nw + k] = *v;
        }
    }
    StftPlane { x_grid: lattice.x_grid.clone(), w_grid: lattice.w_grid.clone(), values }
}

/// (Σ_k (Σ_j |v_jk|^p a_j)^{q/p} b_k)^{1/q} with the usual sup conventions.
fn mixed(values: &[Cplx], a: &[f64], b: &[f64], pexp: f64, qexp: f64) -> f64 {
    let nb = b.len();
    let inner: Vec<f64> = (0..nb)
        .map(|k| {
            let col = (0..a.len()).map(|j| values[j * nb + k].norm());
            if pexp.is_infinite() {
                col.fold(0.0, f64::max)
            } else {
                col.zip(a).map(|(v, &w)| v.powf(pexp) * w).sum::<f64>().powf(1.0 / pexp)
            }
        })
        .collect();
    if qexp.is_infinite() {
        inner.into_iter().fold(0.0, f64::max)
    } else {
        inner.iter().zip(b).map(|(v, &w)| v.powf(qexp) * w).sum::<f64>().powf(1.0 / qexp)
    }
}

/// ‖V f‖ in L^{p,q}(ℝ², A): p over positions against A(x)dx, q over frequencies against
/// A(w)dw.
pub fn mixed_norm(plane: &StftPlane, pexp: f64, qexp: f64, p: &Params) -> Result<f64> {
    check_exponent(pexp)?;
    check_exponent(qexp)?;
    let a = measure_weights(&plane.x_grid, Measure::A, p)?;
    let b = measure_weights(&plane.w_grid, Measure::A, p)?;
    Ok(mixed(&plane.values, &a, &b, pexp, qexp))
}

/// ‖f‖_{M^{p,q}(ℝ, A)} with the unit reference window on the default lattice.
pub fn modulation_norm_1d(f: &SampledFunction, pexp: f64, qexp: f64, p: &Params) -> Result<f64> {
    modulation_norm_1d_with(f, pexp, qexp, p, &StftLattice::for_grid(f.grid_arc())?, ReferenceWindow::UNIT)
}

pub fn modulation_norm_1d_with(f: &SampledFunction, pexp: f64, qexp: f64, p: &Params, lattice: &StftLattice, win: ReferenceWindow) -> Result<f64> {
    check_exponent(pexp)?;
    check_exponent(qexp)?;
    mixed_norm(&stft_plane(f, lattice, win), pexp, qexp, p)
}

/// Four axes of the symbol STFT: positions (x₀, ξ₀) and frequencies (w₁, w₂).
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolLattice {
    pub x0: Arc<QuadratureGrid>,
    pub xi0: Arc<QuadratureGrid>,
    pub w1: Arc<QuadratureGrid>,
    pub w2: Arc<QuadratureGrid>,
}

impl SymbolLattice {
    /// n nodes per axis; positions span the plane, frequencies [−4, 4].
    pub fn for_plane(plane: &TFPlane, n: usize) -> Result<Self> {
        let g = |h: f64| -> Result<Arc<QuadratureGrid>> { Ok(Arc::new(make_grid(h, n, GridKind::GaussLegendreComposite)?)) };
        Ok(Self {
            x0: g(plane.x_grid().truncation())?,
            xi0: g(plane.xi_grid().truncation())?,
            w1: g(DEFAULT_FREQ_HALF_WIDTH)?,
            w2: g(DEFAULT_FREQ_HALF_WIDTH)?,
        })
    }
}

/// ‖F‖_{M^p(ℝ², A⊗σ)} for a symbol on the (x, ξ) lattice, with the separable window
/// e^{−π((x/s)²+(ξ/s)²)} and the default 16⁴ lattice.
pub fn modulation_norm_2d(f: &TFPlane, pexp: f64) -> Result<f64> {
    modulation_norm_2d_with(f, pexp, &SymbolLattice::for_plane(f, DEFAULT_SYMBOL_NODES)?, ReferenceWindow::UNIT)
}

/// Position slots are weighted by A(x₀)·|σ|(ξ₀), frequency slots by A(w₁)·|σ|(w₂).
pub fn modulation_norm_2d_with(f: &TFPlane, pexp: f64, lat: &SymbolLattice, win: ReferenceWindow) -> Result<f64> {
    check_exponent(pexp)?;
    let v = symbol_stft(f, lat, win);
    let p = f.params();
    let pos: Vec<f64> = {
        let a = measure_weights(&lat.x0, Measure::A, p)?;
        let s = measure_weights(&lat.xi0, Measure::SigmaAbs, p)?;
        a.iter().flat_map(|&u| s.iter().map(move |&t| u * t)).collect()
    };
    let freq: Vec<f64> = {
        let a = measure_weights(&lat.w1, Measure::A, p)?;
        let s = measure_weights(&lat.w2, Measure::SigmaAbs, p)?;
        a.iter().flat_map(|&u| s.iter().map(move |&t| u * t)).collect()
    };
    Ok(mixed(&v, &pos, &freq, pexp, pexp))
}

/// V F on the lattice as a row-major [(x₀, ξ₀) × (w₁, w₂)] array. The window and phase
/// factor separate, so the ξ sum is done first.
fn symbol_stft(f: &TFPlane, lat: &SymbolLattice, win: ReferenceWindow) -> Vec<Cplx> {
    let (xg, sg) = (f.x_grid(), f.xi_grid());
    let (nx, ns) = (xg.len(), sg.len());
    let factor = |grid: &QuadratureGrid, pos: f64, freq: f64| -> Vec<Cplx> {
        grid.nodes().iter().zip(grid.weights()).map(|(&t, &h)| Complex64::from_polar(win.eval(t - pos) * h, -2.0 * PI * freq * t)).collect()
    };
    // B[x][(ξ₀, w₂)] = Σ_ξ F(x, ξ) b(ξ; ξ₀, w₂)
    let pairs2: Vec<(f64, f64)> = lat.xi0.nodes().iter().flat_map(|&a| lat.w2.nodes().iter().map(move |&b| (a, b))).collect();
    let bfac: Vec<Vec<Cplx>> = pairs2.iter().map(|&(a, b)| factor(sg, a, b)).collect();
    let partial: Vec<Vec<Cplx>> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let row = &f.values()[i * ns..(i + 1) * ns];
            bfac.iter().map(|b| row.iter().zip(b).map(|(u, v)| u * v).sum()).collect()
        })
        .collect();
    let pairs1: Vec<(f64, f64)> = lat.x0.nodes().iter().flat_map(|&a| lat.w1.nodes().iter().map(move |&b| (a, b))).collect();
    let (n0, n1, n2) = (lat.xi0.len(), lat.w1.len(), lat.w2.len());
    let npos = lat.x0.len() * n0;
    let nfreq = n1 * n2;
    let mut out = vec![Complex64::new(0.0, 0.0); npos * nfreq];
    let blocks: Vec<(usize, Vec<Cplx>)> = pairs1
        .par_iter()
        .enumerate()
        .map(|(idx, &(a, b))| {
            let fac = factor(xg, a, b);
            let sums: Vec<Cplx> = (0..pairs2.len()).map(|q| (0..nx).map(|i| fac[i] * partial[i][q]).sum()).collect();
            (idx, sums)
        })
        .collect();
    for (idx, sums) in blocks {
        let (ix0, iw1) = (idx / n1, idx % n1);
        for (q, v) in sums.into_iter().enumerate() {
            let (ixi0, iw2) = (q / n2, q % n2);
            out[(ix0 * n0 + ixi0) * nfreq + iw1 * n2 + iw2] = v;
        }
    }
    out
}
