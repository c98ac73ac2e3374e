//! Test functions, windows and symbols shared by the checks, the CLI and the test suites.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure_grid::{measure_weights, Measure, QuadratureGrid, SampledFunction, Side};
use crate::modulation_window::TFPlane;
use crate::params::Params;

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// e^{−x²}·cosh(x)^{−ρ}.
pub fn canonical_window(grid: &Arc<QuadratureGrid>, p: &Params) -> SampledFunction {
    let rho = p.rho();
    SampledFunction::from_fn(grid.clone(), Side::Time, |x| re((-x * x).exp() * x.cosh().powf(-rho)))
}

/// e^{−((x−c)/w)²}.
pub fn gaussian(grid: &Arc<QuadratureGrid>, center: f64, width: f64) -> SampledFunction {
    SampledFunction::from_fn(grid.clone(), Side::Time, |x| re((-((x - center) / width).powi(2)).exp()))
}

/// exp(1 − 1/(1 − ((t−c)/r)²)) inside the support, 0 outside; peak value 1.
pub fn bump_value(t: f64, center: f64, radius: f64) -> f64 {
    let s = (t - center) / radius;
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

pub fn bump(grid: &Arc<QuadratureGrid>, side: Side, center: f64, radius: f64) -> SampledFunction {
    SampledFunction::from_fn(grid.clone(), side, |t| re(bump_value(t, center, radius)))
}

/// Functions x^k·e^{−x²/(2s²)}·cosh(x)^{−ρ}, k = 0..n, orthonormalized in L²(A) by modified
/// Gram–Schmidt. Lower index means smoother. The scale s² = X/Λ balances the time and
/// frequency spread of the Hermite-type profiles against the truncation box.
pub fn smooth_basis(grid: &Arc<QuadratureGrid>, spectral_half_width: f64, p: &Params, n: usize) -> Result<Vec<SampledFunction>> {
    let inv = 0.5 * spectral_half_width / grid.truncation();
    let w = measure_weights(grid, Measure::A, p)?;
    let rho = p.rho();
    let mut out: Vec<SampledFunction> = Vec::with_capacity(n);
    for k in 0..n {
        let mut f = SampledFunction::from_fn(grid.clone(), Side::Time, |x| re(x.powi(k as i32) * (-x * x * inv).exp() * x.cosh().powf(-rho)));
        for e in &out {
            let c = f.inner_weighted(e, &w);
            f = f.combine(re(1.0), e, -c)?;
        }
        let norm = f.inner_weighted(&f, &w).re.sqrt();
        if !(norm > 1e-13) {
            return Err(Error::Grid(format!("smooth basis degenerates at degree {k}")));
        }
        out.push(f.scale(re(1.0 / norm)));
    }
    Ok(out)
}

/// Seeded draws of smooth, compactly supported complex functions: one or two bumps with random
/// centers, radii and phases inside [−X+0.5, X−0.5].
pub fn random_smooth(grid: &Arc<QuadratureGrid>, side: Side, rng: &mut ChaCha8Rng) -> SampledFunction {
    let x = grid.truncation();
    let terms = rng.random_range(1..=2);
    let mut spec = Vec::with_capacity(terms);
    for _ in 0..terms {
        let radius = rng.random_range(0.35..0.6) * x;
        let center = rng.random_range(-(x - radius - 0.1 * x)..(x - radius - 0.1 * x));
        let amp = Complex64::from_polar(rng.random_range(0.5..1.0), rng.random_range(0.0..std::f64::consts::TAU));
        spec.push((center, radius, amp));
    }
    SampledFunction::from_fn(grid.clone(), side, |t| spec.iter().map(|&(c, r, a)| a * bump_value(t, c, r)).sum())
}

/// Seeded generator used for every randomized draw.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Named window selection for configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WindowSpec {
    Canonical,
    Gaussian { center: f64, width: f64 },
    /// e^{−((x−c)/w)²}·cosh(x)^{−ρ}.
    DampedGaussian { center: f64, width: f64 },
    Bump { center: f64, radius: f64 },
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec::Canonical
    }
}

impl WindowSpec {
    pub fn sample(&self, grid: &Arc<QuadratureGrid>, p: &Params) -> Result<SampledFunction> {
        match *self {
            WindowSpec::Canonical => Ok(canonical_window(grid, p)),
            WindowSpec::Gaussian { center, width } if width > 0.0 => Ok(gaussian(grid, center, width)),
            WindowSpec::DampedGaussian { center, width } if width > 0.0 => {
                let rho = p.rho();
                Ok(SampledFunction::from_fn(grid.clone(), Side::Time, |x| re((-((x - center) / width).powi(2)).exp() * x.cosh().powf(-rho))))
            }
            WindowSpec::Bump { center, radius } if radius > 0.0 => Ok(bump(grid, Side::Time, center, radius)),
            _ => Err(Error::Config(format!("invalid window {self:?}"))),
        }
    }
}

/// Seeded smooth compactly supported windows: bump(x; c, r)·cosh(x)^{−ρ} with the center within
/// 0.5 of the origin so that translates stay inside the resolved range.
pub fn random_window(grid: &Arc<QuadratureGrid>, p: &Params, rng: &mut ChaCha8Rng) -> SampledFunction {
    let center = rng.random_range(-0.5..0.5);
    let radius = rng.random_range(1.0..2.0);
    let rho = p.rho();
    SampledFunction::from_fn(grid.clone(), Side::Time, |x| re(bump_value(x, center, radius) * x.cosh().powf(-rho)))
}

/// Named symbol selection for configuration files and the bound suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SymbolSpec {
    Zero,
    One,
    /// φ(x)ψ(ξ) with bump factors, scaled by a complex amplitude.
    TensorBump {
        x_center: f64,
        x_radius: f64,
        xi_center: f64,
        xi_radius: f64,
        #[serde(default = "unit_amplitude")]
        amplitude: [f64; 2],
    },
    /// ±1 on cells of the given sizes over the whole plane.
    Checkerboard { x_cell: f64, xi_cell: f64 },
    /// 1 at the lattice cell nearest (x, ξ), 0 elsewhere.
    Spike { x: f64, xi: f64 },
}

fn unit_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}

impl Default for SymbolSpec {
    fn default() -> Self {
        SymbolSpec::TensorBump { x_center: 0.0, x_radius: 1.5, xi_center: 0.0, xi_radius: 4.0, amplitude: unit_amplitude() }
    }
}

impl SymbolSpec {
    pub fn sample(&self, x_grid: &Arc<QuadratureGrid>, xi_grid: &Arc<QuadratureGrid>, p: &Params) -> Result<TFPlane> {
        let (xg, sg) = (x_grid.clone(), xi_grid.clone());
        match *self {
            SymbolSpec::Zero => TFPlane::zeros(xg, sg, *p),
            SymbolSpec::One => TFPlane::from_fn(xg, sg, *p, |_, _| re(1.0)),
            SymbolSpec::TensorBump { x_center, x_radius, xi_center, xi_radius, amplitude } if x_radius > 0.0 && xi_radius > 0.0 => {
                let a = Complex64::new(amplitude[0], amplitude[1]);
                TFPlane::from_fn(xg, sg, *p, |x, s| a * bump_value(x, x_center, x_radius) * bump_value(s, xi_center, xi_radius))
            }
            SymbolSpec::Checkerboard { x_cell, xi_cell } if x_cell > 0.0 && xi_cell > 0.0 => {
                TFPlane::from_fn(xg, sg, *p, |x, s| if ((x / x_cell).floor() + (s / xi_cell).floor()).rem_euclid(2.0) == 0.0 { re(1.0) } else { re(-1.0) })
            }
            SymbolSpec::Spike { x, xi } => {
                let (i, m) = (x_grid.nearest(x), xi_grid.nearest(xi));
                let nxi = xi_grid.len();
                let mut values = vec![re(0.0); x_grid.len() * nxi];
                values[i * nxi + m] = re(1.0);
                TFPlane::new(xg, sg, *p, values)
            }
            _ => Err(Error::Config(format!("invalid symbol {self:?}"))),
        }
    }

    /// Seeded tensor bump with a random unit-modulus amplitude: x center in [−1, 1], x radius in
    /// [0.5, 1.5], ξ center within Λ/4 of the origin and ξ radius in [0.1Λ, 0.25Λ].
    pub fn random(xi_half: f64, rng: &mut ChaCha8Rng) -> Self {
        let x_center = rng.random_range(-1.0..1.0);
        let x_radius = rng.random_range(0.5..1.5);
        let xi_center = rng.random_range(-0.25..0.25) * xi_half;
        let xi_radius = rng.random_range(0.1..0.25) * xi_half;
        let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        SymbolSpec::TensorBump { x_center, x_radius, xi_center, xi_radius, amplitude: [phase.cos(), phase.sin()] }
    }
}
