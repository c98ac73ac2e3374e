//! Spectral modulation, time-frequency atoms and the windowed Opdam–Cherednik transform.
//!
//! M_ξ g = ℋ⁻¹(√(τ_ξ|ℋg|²)) applies the generalized translation in the spectral variable,
//! integrating against K(ξ, λ, z)A(z)dz exactly as in time. Atoms are g_{x,ξ} = τ_x M_ξ g and
//! the transform is W_g f(x, ξ) = (f ∗ conj(M_ξ g))(x).

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure_grid::{density_weights, measure_weights, Geometry, Measure, QuadratureGrid, SampledFunction, Side};
use crate::params::Params;
use crate::transform::{forward, inverse, TransformPlan};
use crate::translation_conv::{build_kernel_tensor, build_kernel_tensor_rect, convolve, translate_at, KernelTensor};
use crate::Cplx;

/// Largest clamped spectral mass fraction `modulation` accepts.
pub const CLAMP_LIMIT: f64 = 1e-3;

fn zero() -> Cplx {
    Complex64::new(0.0, 0.0)
}

/// Transform plan plus the time and spectral kernel tensors every windowed quantity needs.
#[derive(Clone, Debug)]
pub struct TfContext {
    pub plan: Arc<TransformPlan>,
    /// Square tensor on the time grid.
    pub time_tensor: Arc<KernelTensor>,
    /// Tensor with ξ in the translation slot and λ, z on the spectral grid.
    pub spectral_tensor: Arc<KernelTensor>,
}

impl TfContext {
    pub fn new(plan: Arc<TransformPlan>, time_tensor: Arc<KernelTensor>, spectral_tensor: Arc<KernelTensor>) -> Result<Self> {
        if time_tensor.grid().hash() != plan.time_grid().hash() || time_tensor.x_grid().hash() != plan.time_grid().hash() {
            return Err(Error::GridMismatch("time tensor is not built on the plan's time grid".into()));
        }
        if spectral_tensor.grid().hash() != plan.spectral_grid().hash() {
            return Err(Error::GridMismatch("spectral tensor is not built on the plan's spectral grid".into()));
        }
        if time_tensor.params() != plan.params() || spectral_tensor.params() != plan.params() {
            return Err(Error::Param("tensors and plan disagree on (alpha, beta)".into()));
        }
        Ok(Self { plan, time_tensor, spectral_tensor })
    }

    /// Builds everything from a geometry without caching.
    pub fn build(geo: &Geometry, p: &Params) -> Result<Self> {
        geo.validate()?;
        let tg = geo.time_grid()?;
        let sg = geo.spectral_grid()?;
        let plan = crate::transform::build_plan(tg.clone(), sg.clone(), p)?;
        let tt = build_kernel_tensor(tg, p, geo.n_chi)?;
        let st = build_spectral_tensor(geo, sg, p)?;
        Self::new(Arc::new(plan), Arc::new(tt), Arc::new(st))
    }

    /// As [`TfContext::build`], reusing and refreshing cache files in `dir`. Returns which of
    /// (plan, time tensor, spectral tensor) were cache hits.
    pub fn load_or_build(geo: &Geometry, p: &Params, dir: &Path) -> Result<(Self, [bool; 3])> {
        std::fs::create_dir_all(dir)?;
        let [pp, tp, sp] = Self::cache_paths(geo, p, dir)?;
        let (tg, sg, xg) = (geo.time_grid()?, geo.spectral_grid()?, geo.xi_grid()?);
        let (plan, h0) = TransformPlan::load_or_build(&pp, tg.clone(), sg.clone(), p)?;
        let (tt, h1) = KernelTensor::load_or_build(&tp, tg.clone(), tg, p, geo.n_chi)?;
        let (st, h2) = KernelTensor::load_or_build(&sp, xg, sg, p, geo.n_chi)?;
        Ok((Self::new(Arc::new(plan), Arc::new(tt), Arc::new(st))?, [h0, h1, h2]))
    }

    /// Cache file paths of (plan, time tensor, spectral tensor) under `dir`.
    pub fn cache_paths(geo: &Geometry, p: &Params, dir: &Path) -> Result<[PathBuf; 3]> {
        geo.validate()?;
        let (tg, sg, xg) = (geo.time_grid()?, geo.spectral_grid()?, geo.xi_grid()?);
        let tag = format!("a{}_b{}", p.alpha(), p.beta());
        Ok([
            dir.join(format!("plan_{tag}_{:016x}_{:016x}.octf", tg.hash(), sg.hash())),
            dir.join(format!("time_{tag}_{:016x}_n{}.ockt", tg.hash(), geo.n_chi)),
            dir.join(format!("spectral_{tag}_{:016x}_{:016x}_n{}.ockt", xg.hash(), sg.hash(), geo.n_chi)),
        ])
    }

    pub fn params(&self) -> &Params {
        self.plan.params()
    }

    pub fn time_grid(&self) -> &Arc<QuadratureGrid> {
        self.plan.time_grid()
    }

    pub fn xi_grid(&self) -> &Arc<QuadratureGrid> {
        self.spectral_tensor.x_grid()
    }

    pub fn time_weights(&self) -> &[f64] {
        self.plan.time_weights()
    }
}

/// Spectral translation tensor for a geometry: ξ on the coarse ξ grid, λ and z on `spectral`.
pub fn build_spectral_tensor(geo: &Geometry, spectral: Arc<QuadratureGrid>, p: &Params) -> Result<KernelTensor> {
    build_kernel_tensor_rect(geo.xi_grid()?, spectral, p, geo.n_chi)
}

fn check_real(f: &SampledFunction) -> Result<()> {
    let scale = f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    if f.values().iter().any(|v| v.im.abs() > 1e-12 * scale) {
        return Err(Error::Domain("spectral translation expects a real-valued profile".into()));
    }
    Ok(())
}

/// τ_ξ F on the spectral grid for the ξ node `m`, integrating against K(ξ, λ, z)A(z)dz.
pub fn spectral_translate_at(f: &SampledFunction, m: usize, tensor: &KernelTensor) -> Result<SampledFunction> {
    f.check_grid(tensor.grid(), Side::Spectral)?;
    check_real(f)?;
    translate_at(f, m, tensor)
}

/// τ_ξ F with ξ snapped to the nearest ξ node; ξ = 0 returns F.
pub fn spectral_translate(f: &SampledFunction, xi: f64, tensor: &KernelTensor) -> Result<SampledFunction> {
    f.check_grid(tensor.grid(), Side::Spectral)?;
    check_real(f)?;
    match tensor.snap(xi).0 {
        None => Ok(f.clone()),
        Some(m) => translate_at(f, m, tensor),
    }
}

/// One row of the σ-invariance survey.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InvarianceRow {
    pub xi: f64,
    /// ∫ τ_ξ F dσ.
    pub translated: Cplx,
    /// ∫ F dσ.
    pub original: Cplx,
    pub rel_dev: f64,
}

/// Compares ∫ τ_ξ F dσ with ∫ F dσ at every ξ node. Recorded, not asserted: the translation
/// preserves A-mass, not σ-mass.
pub fn sigma_invariance_survey(f: &SampledFunction, ctx: &TfContext) -> Result<Vec<InvarianceRow>> {
    let dens = ctx.plan.density();
    let integrate = |h: &SampledFunction| -> Cplx { h.values().iter().zip(dens).map(|(v, d)| v * d).sum() };
    let original = integrate(f);
    let xi = ctx.xi_grid().nodes();
    (0..xi.len())
        .into_par_iter()
        .map(|m| {
            let translated = integrate(&spectral_translate_at(f, m, &ctx.spectral_tensor)?);
            Ok(InvarianceRow { xi: xi[m], translated, original, rel_dev: (translated - original).norm() / original.norm() })
        })
        .collect()
}

/// M_ξ g together with the clamp telemetry of the square root.
#[derive(Clone, Debug, PartialEq)]
pub struct Modulated {
    pub function: SampledFunction,
    /// |σ|-mass of the negative part of τ_ξ|ℋg|² over the |σ|-mass of |ℋg|². The two masses
    /// would coincide if the translation preserved σ; the literal one does not, and relative to
    /// its own (possibly vanishing) mass the clamp would just measure round-off.
    pub clamp_fraction: f64,
}

/// ∫ P d|σ| for a real profile.
fn abs_mass(profile: &SampledFunction, ctx: &TfContext) -> f64 {
    profile.values().iter().zip(ctx.plan.abs_density()).map(|(v, w)| v.re.abs() * w).sum()
}

/// ℋ⁻¹ of √(max(P, 0)) for a real spectral profile P; `reference` is the |σ|-mass the clamped
/// part is measured against.
fn sqrt_profile(profile: &SampledFunction, reference: f64, ctx: &TfContext) -> Result<Modulated> {
    let w = ctx.plan.abs_density();
    let mut neg = 0.0;
    let roots: Vec<Cplx> = profile
        .values()
        .iter()
        .zip(w)
        .map(|(v, &wk)| {
            if v.re < 0.0 {
                neg += -v.re * wk;
                zero()
            } else {
                Complex64::new(v.re.sqrt(), 0.0)
            }
        })
        .collect();
    let clamp_fraction = if reference > 0.0 { neg / reference } else { 0.0 };
    let function = inverse(&ctx.plan, &profile.with_values(roots)?)?;
    Ok(Modulated { function, clamp_fraction })
}

/// M_ξ g for the ξ node `m`, or ξ = 0 when `m` is `None`; no clamp limit applied.
pub fn modulation_telemetry(g: &SampledFunction, m: Option<usize>, ctx: &TfContext) -> Result<Modulated> {
    let hg = forward(&ctx.plan, g)?;
    let power = hg.map(|v| Complex64::new(v.norm_sqr(), 0.0));
    let reference = abs_mass(&power, ctx);
    let profile = match m {
        None => power,
        Some(m) => spectral_translate_at(&power, m, &ctx.spectral_tensor)?,
    };
    sqrt_profile(&profile, reference, ctx)
}

/// M_ξ g with ξ snapped to the ξ grid. Fails with `Error::Clamp` when more than
/// [`CLAMP_LIMIT`] of the translated spectral mass had to be clamped.
pub fn modulation(g: &SampledFunction, xi: f64, ctx: &TfContext) -> Result<SampledFunction> {
    let md = modulation_telemetry(g, ctx.spectral_tensor.snap(xi).0, ctx)?;
    if md.clamp_fraction > CLAMP_LIMIT {
        return Err(Error::Clamp { fraction: md.clamp_fraction, limit: CLAMP_LIMIT });
    }
    Ok(md.function)
}

/// Point of the time-frequency lattice: node indices, `None` standing for 0.
pub type TfNode = (Option<usize>, Option<usize>);

/// Memo table of modulated windows and atoms for one window. Entries are pure functions of
/// their key, so concurrent writers store identical values.
#[derive(Debug)]
pub struct AtomCache {
    window: SampledFunction,
    norm_sq: f64,
    power: SampledFunction,
    modulated: Vec<OnceLock<Modulated>>,
    atoms: RwLock<HashMap<TfNode, Arc<SampledFunction>>>,
}

impl AtomCache {
    pub fn new(window: SampledFunction, ctx: &TfContext) -> Result<Self> {
        window.check_grid(ctx.time_grid(), Side::Time)?;
        let norm_sq = window.inner_weighted(&window, ctx.time_weights()).re;
        if !(norm_sq.sqrt() >= 1e-12) {
            return Err(Error::DegenerateWindow(norm_sq.max(0.0).sqrt()));
        }
        let power = forward(&ctx.plan, &window)?.map(|v| Complex64::new(v.norm_sqr(), 0.0));
        let modulated = (0..=ctx.xi_grid().len()).map(|_| OnceLock::new()).collect();
        Ok(Self { window, norm_sq, power, modulated, atoms: RwLock::new(HashMap::new()) })
    }

    pub fn window(&self) -> &SampledFunction {
        &self.window
    }

    /// ‖g‖²_{L²(A)}.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    fn slot(m: Option<usize>) -> usize {
        m.map_or(0, |m| m + 1)
    }

    /// M_ξ g with telemetry, memoized per ξ node.
    pub fn modulated(&self, m: Option<usize>, ctx: &TfContext) -> Result<&Modulated> {
        let cell = &self.modulated[Self::slot(m)];
        if let Some(v) = cell.get() {
            return Ok(v);
        }
        let profile = match m {
            None => self.power.clone(),
            Some(m) => spectral_translate_at(&self.power, m, &ctx.spectral_tensor)?,
        };
        let v = sqrt_profile(&profile, abs_mass(&self.power, ctx), ctx)?;
        Ok(cell.get_or_init(|| v))
    }

    /// M_ξ g, failing when the clamp limit is exceeded.
    pub fn modulated_checked(&self, m: Option<usize>, ctx: &TfContext) -> Result<&SampledFunction> {
        let md = self.modulated(m, ctx)?;
        if md.clamp_fraction > CLAMP_LIMIT {
            return Err(Error::Clamp { fraction: md.clamp_fraction, limit: CLAMP_LIMIT });
        }
        Ok(&md.function)
    }

    /// Largest clamp fraction over all ξ nodes.
    pub fn max_clamp_fraction(&self, ctx: &TfContext) -> Result<f64> {
        let n = ctx.xi_grid().len();
        (0..n).into_par_iter().map(|m| Ok(self.modulated(Some(m), ctx)?.clamp_fraction)).try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
    }

    /// g_{x,ξ} = τ_x M_ξ g.
    pub fn atom(&self, node: TfNode, ctx: &TfContext) -> Result<Arc<SampledFunction>> {
        if let Some(a) = self.atoms.read().expect("atom cache poisoned").get(&node) {
            return Ok(a.clone());
        }
        let mg = self.modulated_checked(node.1, ctx)?;
        let a = Arc::new(match node.0 {
            None => mg.clone(),
            Some(i) => translate_at(mg, i, &ctx.time_tensor)?,
        });
        self.atoms.write().expect("atom cache poisoned").insert(node, a.clone());
        Ok(a)
    }

    /// g_{x,ξ} recomputed without touching the memo table.
    pub fn atom_uncached(&self, node: TfNode, ctx: &TfContext) -> Result<SampledFunction> {
        let profile = match node.1 {
            None => self.power.clone(),
            Some(m) => spectral_translate_at(&self.power, m, &ctx.spectral_tensor)?,
        };
        let mg = sqrt_profile(&profile, abs_mass(&self.power, ctx), ctx)?.function;
        match node.0 {
            None => Ok(mg),
            Some(i) => translate_at(&mg, i, &ctx.time_tensor),
        }
    }

    pub fn cached_atoms(&self) -> usize {
        self.atoms.read().expect("atom cache poisoned").len()
    }
}

/// Snaps (x, ξ) to lattice nodes; zero coordinates map to `None`.
pub fn snap_node(x: f64, xi: f64, ctx: &TfContext) -> TfNode {
    (ctx.time_tensor.snap(x).0, ctx.spectral_tensor.snap(xi).0)
}

/// g_{x,ξ} with (x, ξ) snapped to the lattice.
pub fn atom(cache: &AtomCache, x: f64, xi: f64, ctx: &TfContext) -> Result<Arc<SampledFunction>> {
    cache.atom(snap_node(x, xi, ctx), ctx)
}

/// Samples on the (x, ξ) lattice: time grid × ξ grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TFPlane {
    x_grid: Arc<QuadratureGrid>,
    xi_grid: Arc<QuadratureGrid>,
    params: Params,
    /// Row-major [N_x × N_ξ].
    values: Vec<Cplx>,
    /// A(x)w_x.
    x_weights: Vec<f64>,
    /// density(ξ)v_ξ.
    xi_density: Vec<Cplx>,
}

/// Provenance written next to an exported plane.
#[derive(Clone, Debug, Serialize)]
pub struct PlaneSidecar {
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub x_grid_hash: String,
    pub xi_grid_hash: String,
    pub n_x: usize,
    pub n_xi: usize,
}

impl TFPlane {
    pub fn new(x_grid: Arc<QuadratureGrid>, xi_grid: Arc<QuadratureGrid>, params: Params, values: Vec<Cplx>) -> Result<Self> {
        if values.len() != x_grid.len() * xi_grid.len() {
            return Err(Error::GridMismatch(format!("{} values for a {}x{} plane", values.len(), x_grid.len(), xi_grid.len())));
        }
        let x_weights = measure_weights(&x_grid, Measure::A, &params)?;
        let xi_density = density_weights(&xi_grid, &params)?;
        Ok(Self { x_grid, xi_grid, params, values, x_weights, xi_density })
    }

    pub fn zeros(x_grid: Arc<QuadratureGrid>, xi_grid: Arc<QuadratureGrid>, params: Params) -> Result<Self> {
        let n = x_grid.len() * xi_grid.len();
        Self::new(x_grid, xi_grid, params, vec![zero(); n])
    }

    /// Samples a function of (x, ξ).
    pub fn from_fn(x_grid: Arc<QuadratureGrid>, xi_grid: Arc<QuadratureGrid>, params: Params, f: impl Fn(f64, f64) -> Cplx) -> Result<Self> {
        let values = x_grid.nodes().iter().flat_map(|&x| xi_grid.nodes().iter().map(move |&xi| (x, xi))).map(|(x, xi)| f(x, xi)).collect();
        Self::new(x_grid, xi_grid, params, values)
    }

    pub fn x_grid(&self) -> &Arc<QuadratureGrid> {
        &self.x_grid
    }

    pub fn xi_grid(&self) -> &Arc<QuadratureGrid> {
        &self.xi_grid
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn values(&self) -> &[Cplx] {
        &self.values
    }

    pub fn get(&self, i: usize, m: usize) -> Cplx {
        self.values[i * self.xi_grid.len() + m]
    }

    pub fn x_weights(&self) -> &[f64] {
        &self.x_weights
    }

    pub fn xi_density(&self) -> &[Cplx] {
        &self.xi_density
    }

    /// d(A⊗σ) at cell (i, m).
    pub fn cell_measure(&self, i: usize, m: usize) -> Cplx {
        self.xi_density[m] * self.x_weights[i]
    }

    pub fn map(&self, f: impl Fn(Cplx) -> Cplx) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    pub fn scale(&self, c: Cplx) -> Self {
        self.map(|v| v * c)
    }

    /// Pointwise product with another plane on the same lattice.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(), ..self.clone() })
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if self.x_grid.hash() != other.x_grid.hash() || self.xi_grid.hash() != other.xi_grid.hash() || self.params != other.params {
            return Err(Error::GridMismatch("planes live on different lattices".into()));
        }
        Ok(())
    }

    /// ∬ U conj(V) d(A⊗σ), complex because σ is.
    pub fn inner(&self, other: &Self) -> Result<Cplx> {
        self.check_same(other)?;
        let nxi = self.xi_grid.len();
        Ok((0..self.x_grid.len())
            .map(|i| {
                let row: Cplx = (0..nxi).map(|m| self.values[i * nxi + m] * other.values[i * nxi + m].conj() * self.xi_density[m]).sum();
                row * self.x_weights[i]
            })
            .sum())
    }

    /// (x, ξ, W) triples in row-major order, for CSV export.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, Cplx)> + '_ {
        let nxi = self.xi_grid.len();
        self.values.iter().enumerate().map(move |(idx, &v)| (self.x_grid.nodes()[idx / nxi], self.xi_grid.nodes()[idx % nxi], v))
    }

    pub fn sidecar(&self) -> PlaneSidecar {
        PlaneSidecar {
            alpha: self.params.alpha(),
            beta: self.params.beta(),
            rho: self.params.rho(),
            x_grid_hash: format!("{:016x}", self.x_grid.hash()),
            xi_grid_hash: format!("{:016x}", self.xi_grid.hash()),
            n_x: self.x_grid.len(),
            n_xi: self.xi_grid.len(),
        }
    }
}

/// L^p norm of a plane against |A⊗σ|; p = ∞ gives the sup.
pub fn lp_tfplane_norm(w: &TFPlane, pexp: f64) -> Result<f64> {
    if !(pexp >= 1.0) {
        return Err(Error::Domain(format!("Lebesgue exponent must be in [1, inf], got {pexp}")));
    }
    if pexp.is_infinite() {
        return Ok(w.values.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    let nxi = w.xi_grid.len();
    let s: f64 = (0..w.x_grid.len())
        .map(|i| w.x_weights[i] * (0..nxi).map(|m| w.values[i * nxi + m].norm().powf(pexp) * w.xi_density[m].norm()).sum::<f64>())
        .sum();
    Ok(s.powf(1.0 / pexp))
}

/// W_g f on the full lattice via the convolution form (f ∗ conj(M_ξ g))(x), one ξ column at
/// a time. Fails if any modulated window exceeds the clamp limit.
pub fn windowed_transform(f: &SampledFunction, cache: &AtomCache, ctx: &TfContext) -> Result<TFPlane> {
    f.check_grid(ctx.time_grid(), Side::Time)?;
    let nxi = ctx.xi_grid().len();
    let nx = ctx.time_grid().len();
    let cols: Vec<Vec<Cplx>> = (0..nxi)
        .into_par_iter()
        .map(|m| {
            let h = cache.modulated_checked(Some(m), ctx)?.conj();
            Ok(convolve(f, &h, &ctx.time_tensor)?.into_values())
        })
        .collect::<Result<_>>()?;
    let mut values = vec![zero(); nx * nxi];
    for (m, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            values[i * nxi + m] = *v;
        }
    }
    TFPlane::new(ctx.time_grid().clone(), ctx.xi_grid().clone(), *ctx.params(), values)
}

/// W_g f at one lattice point from the atom form Σ_s f(s) conj(g_{x,ξ}(−s)) A(s)w_s.
pub fn windowed_transform_direct(f: &SampledFunction, node: TfNode, cache: &AtomCache, ctx: &TfContext) -> Result<Cplx> {
    f.check_grid(ctx.time_grid(), Side::Time)?;
    let a = cache.atom(node, ctx)?;
    Ok(f.inner_weighted(&a.reflect(), ctx.time_weights()))
}

/// Both sides of the windowed Plancherel identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindowedPlancherel {
    /// ∬ |W_g f|² d(A⊗σ).
    pub lhs: Cplx,
    /// ‖f‖²‖g‖².
    pub rhs: f64,
    pub rel_err: f64,
    pub imag_leak: f64,
}

pub fn windowed_plancherel(f: &SampledFunction, w: &TFPlane, cache: &AtomCache, ctx: &TfContext) -> Result<WindowedPlancherel> {
    let lhs = w.inner(w)?;
    let rhs = f.inner_weighted(f, ctx.time_weights()).re * cache.norm_sq();
    if rhs == 0.0 {
        return Ok(WindowedPlancherel { lhs, rhs, rel_err: lhs.norm(), imag_leak: lhs.im.abs() });
    }
    Ok(WindowedPlancherel { lhs, rhs, rel_err: (lhs.re - rhs).abs() / rhs, imag_leak: lhs.im.abs() / rhs })
}

/// Both sides of the orthogonality relation for (f, h).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrthogonalityReport {
    /// ∬ W_g f conj(W_g h) d(A⊗σ).
    pub lhs: Cplx,
    /// ‖g‖²⟨f, h⟩.
    pub rhs: Cplx,
    pub residual: f64,
    /// ‖f‖‖h‖‖g‖².
    pub scale: f64,
    pub rel_err: f64,
}

pub fn orthogonality_check(f: &SampledFunction, h: &SampledFunction, cache: &AtomCache, ctx: &TfContext) -> Result<OrthogonalityReport> {
    let wf = windowed_transform(f, cache, ctx)?;
    let wh = windowed_transform(h, cache, ctx)?;
    orthogonality_from_planes(f, h, &wf, &wh, cache, ctx)
}

/// As [`orthogonality_check`] with precomputed planes.
pub fn orthogonality_from_planes(f: &SampledFunction, h: &SampledFunction, wf: &TFPlane, wh: &TFPlane, cache: &AtomCache, ctx: &TfContext) -> Result<OrthogonalityReport> {
    let tw = ctx.time_weights();
    let lhs = wf.inner(wh)?;
    let rhs = f.inner_weighted(h, tw) * cache.norm_sq();
    let residual = (lhs - rhs).norm();
    let scale = (f.inner_weighted(f, tw).re * h.inner_weighted(h, tw).re).sqrt() * cache.norm_sq();
    let rel_err = if scale > 0.0 { residual / scale } else { residual };
    Ok(OrthogonalityReport { lhs, rhs, residual, scale, rel_err })
}

/// K_g(·, ·; (x, ξ)) = W_g(g_{x,ξ}(−·))/‖g‖² over the whole lattice.
pub fn reproducing_kernel_plane(node: TfNode, cache: &AtomCache, ctx: &TfContext) -> Result<TFPlane> {
    let a = cache.atom(node, ctx)?.reflect();
    Ok(windowed_transform(&a, cache, ctx)?.scale(Complex64::new(1.0 / cache.norm_sq(), 0.0)))
}

/// K_g((x′, ξ′); (x, ξ)) for two lattice points.
pub fn reproducing_kernel(primed: TfNode, node: TfNode, cache: &AtomCache, ctx: &TfContext) -> Result<Cplx> {
    let a = cache.atom(node, ctx)?.reflect();
    Ok(windowed_transform_direct(&a, primed, cache, ctx)? / cache.norm_sq())
}

/// (1/‖g‖²) ∬ W(x, ξ) g_{x,ξ}(−·) d(A⊗σ)(x, ξ).
pub fn reconstruct(w: &TFPlane, cache: &AtomCache, ctx: &TfContext) -> Result<SampledFunction> {
    if w.x_grid.hash() != ctx.time_grid().hash() || w.xi_grid.hash() != ctx.xi_grid().hash() {
        return Err(Error::GridMismatch("plane does not live on the context lattice".into()));
    }
    let (nx, nxi) = (w.x_grid.len(), w.xi_grid.len());
    let parts: Vec<Vec<Cplx>> = (0..nxi)
        .into_par_iter()
        .map(|m| {
            let mut acc = vec![zero(); nx];
            for i in 0..nx {
                let c = w.get(i, m) * w.cell_measure(i, m);
                if c == zero() {
                    continue;
                }
                let a = cache.atom((Some(i), Some(m)), ctx)?;
                for (s, v) in acc.iter_mut().enumerate() {
                    *v += c * a.values()[nx - 1 - s];
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut out = vec![zero(); nx];
    for part in parts {
        for (o, v) in out.iter_mut().zip(part) {
            *o += v;
        }
    }
    let inv = 1.0 / cache.norm_sq();
    SampledFunction::new(ctx.time_grid().clone(), out.into_iter().map(|v| v * inv).collect(), Side::Time)
}
