//! Localization operators on the sampled time grid: three assembly paths, the weighted adjoint,
//! singular values and Schatten norms, the auxiliary symbol ς̃ and the bound suite.
//!
//! Operators act on L²(A) sampled at the time nodes, so a matrix M represents f ↦ Mf on raw
//! sample vectors and the inner product is ⟨u, v⟩ = Σ u_i conj(v_i) A(x_i)w_i. Spectral
//! quantities are taken from D^{1/2} M D^{−1/2} with D = diag(A(x_i)w_i).

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{canonical_window, random_smooth, random_window, rng, smooth_basis, SymbolSpec};
use crate::measure_grid::{measure_weights, Measure, QuadratureGrid, SampledFunction, Side};
use crate::mod_spaces::{mixed_norm, modulation_norm_2d_with, stft_plane, ReferenceWindow, StftLattice, SymbolLattice, DEFAULT_SYMBOL_NODES};
use crate::modulation_window::{AtomCache, TFPlane, TfContext};
use crate::params::Params;
use crate::Cplx;

/// Relative slack of every bound comparison.
pub const REPORT_EPS: f64 = 1e-9;

fn zero() -> Cplx {
    Complex64::new(0.0, 0.0)
}

/// A sampled operator on L²(A).
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    matrix: DMatrix<Cplx>,
    grid: Arc<QuadratureGrid>,
    params: Params,
    weights: Vec<f64>,
}

impl OperatorMatrix {
    pub fn new(matrix: DMatrix<Cplx>, grid: Arc<QuadratureGrid>, params: Params) -> Result<Self> {
        let n = grid.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::GridMismatch(format!("{}x{} matrix on a grid of {n} nodes", matrix.nrows(), matrix.ncols())));
        }
        let weights = measure_weights(&grid, Measure::A, &params)?;
        Ok(Self { matrix, grid, params, weights })
    }

    pub fn zeros(grid: Arc<QuadratureGrid>, params: Params) -> Result<Self> {
        let n = grid.len();
        Self::new(DMatrix::zeros(n, n), grid, params)
    }

    pub fn matrix(&self) -> &DMatrix<Cplx> {
        &self.matrix
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// A(x_i)w_i.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        f.check_grid(&self.grid, Side::Time)?;
        let v = &self.matrix * nalgebra::DVector::from_column_slice(f.values());
        SampledFunction::new(self.grid.clone(), v.as_slice().to_vec(), Side::Time)
    }

    /// ⟨Mf, h⟩_{L²(A)}.
    pub fn inner(&self, f: &SampledFunction, h: &SampledFunction) -> Result<Cplx> {
        h.check_grid(&self.grid, Side::Time)?;
        Ok(self.apply(f)?.inner_weighted(h, &self.weights))
    }

    /// D^{1/2} M D^{−1/2}.
    pub fn weighted_form(&self) -> DMatrix<Cplx> {
        let s: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.matrix[(i, j)] * (s[i] / s[j]))
    }

    /// Kernel K with M = K·D, so (Mf)(y) = Σ_z K(y, z) f(z) A(z)w_z.
    pub fn kernel(&self) -> DMatrix<Cplx> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.matrix[(i, j)] / self.weights[j])
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.grid.hash() != other.grid.hash() || self.params != other.params {
            return Err(Error::GridMismatch("operators live on different spaces".into()));
        }
        Ok(())
    }

    /// Largest entrywise difference relative to the largest entry of `other`.
    pub fn rel_diff(&self, other: &Self) -> Result<f64> {
        self.same_space(other)?;
        let d = (&self.matrix - &other.matrix).iter().map(|v| v.norm()).fold(0.0, f64::max);
        let s = other.matrix.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Ok(if s > 0.0 { d / s } else { d })
    }
}

fn check_lattice(symbol: &TFPlane, ctx: &TfContext) -> Result<()> {
    if symbol.x_grid().hash() != ctx.time_grid().hash() || symbol.xi_grid().hash() != ctx.xi_grid().hash() {
        return Err(Error::GridMismatch("symbol does not live on the context lattice".into()));
    }
    Ok(())
}

/// Lattice cells with a nonzero symbol value and their weights ς(x, ξ)·A(x)w·σ(ξ)v.
fn support(symbol: &TFPlane) -> Vec<(usize, usize, Cplx)> {
    let nxi = symbol.xi_grid().len();
    (0..symbol.x_grid().len())
        .flat_map(|i| (0..nxi).map(move |m| (i, m)))
        .filter_map(|(i, m)| {
            let s = symbol.get(i, m);
            (s != zero()).then(|| (i, m, s * symbol.cell_measure(i, m)))
        })
        .collect()
}

type AtomPair = (Arc<SampledFunction>, Arc<SampledFunction>);

fn atom_pairs(cells: &[(usize, usize, Cplx)], c1: &AtomCache, c2: &AtomCache, ctx: &TfContext) -> Result<Vec<AtomPair>> {
    cells.par_iter().map(|&(i, m, _)| Ok((c1.atom((Some(i), Some(m)), ctx)?, c2.atom((Some(i), Some(m)), ctx)?))).collect()
}

/// Sampled localization operator: (Mf)(y) = Σ ς W_{g₁}f(x, ξ) g₂_{x,ξ}(−y) μ(x, ξ) with
/// W_{g₁}f(x, ξ) = Σ_z f(z) conj(g₁_{x,ξ}(−z)) A(z)w_z, assembled as U·V^H·D.
pub fn assemble(symbol: &TFPlane, c1: &AtomCache, c2: &AtomCache, ctx: &TfContext) -> Result<OperatorMatrix> {
    check_lattice(symbol, ctx)?;
    let grid = ctx.time_grid();
    let n = grid.len();
    let cells = support(symbol);
    let atoms = atom_pairs(&cells, c1, c2, ctx)?;
    let w = ctx.time_weights();
    let u = DMatrix::from_fn(n, cells.len(), |s, c| cells[c].2 * atoms[c].1.values()[grid.mirror(s)]);
    let vhd = DMatrix::from_fn(cells.len(), n, |c, t| atoms[c].0.values()[grid.mirror(t)].conj() * w[t]);
    OperatorMatrix::new(u * vhd, grid.clone(), *ctx.params())
}

/// ⟨Mf, h⟩ from the weak form Σ ς W_{g₁}f conj(W_{g₂}h) μ, with both transforms taken from
/// the atom form at each cell.
pub fn weak_form(symbol: &TFPlane, f: &SampledFunction, h: &SampledFunction, c1: &AtomCache, c2: &AtomCache, ctx: &TfContext) -> Result<Cplx> {
    check_lattice(symbol, ctx)?;
    f.check_grid(ctx.time_grid(), Side::Time)?;
    h.check_grid(ctx.time_grid(), Side::Time)?;
    let tw = ctx.time_weights();
    let cells = support(symbol);
    let parts: Vec<Cplx> = cells
        .par_iter()
        .map(|&(i, m, c)| {
            let a1 = c1.atom((Some(i), Some(m)), ctx)?.reflect();
            let a2 = c2.atom((Some(i), Some(m)), ctx)?.reflect();
            Ok(c * f.inner_weighted(&a1, tw) * h.inner_weighted(&a2, tw).conj())
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().sum())
}

/// 𝒦(y, z) = Σ ς conj(g₁_{x,ξ}(−z)) g₂_{x,ξ}(−y) μ with y, z snapped to time nodes.
pub fn schur_kernel(symbol: &TFPlane, c1: &AtomCache, c2: &AtomCache, y: f64, z: f64, ctx: &TfContext) -> Result<Cplx> {
    check_lattice(symbol, ctx)?;
    let grid = ctx.time_grid();
    let (ys, zs) = (grid.mirror(grid.nearest(y)), grid.mirror(grid.nearest(z)));
    let cells = support(symbol);
    let atoms = atom_pairs(&cells, c1, c2, ctx)?;
    Ok(cells.iter().zip(&atoms).map(|(&(_, _, c), (a1, a2))| c * a1.values()[zs].conj() * a2.values()[ys]).sum())
}

/// 𝒦 on all node pairs, row by row.
pub fn schur_kernel_matrix(symbol: &TFPlane, c1: &AtomCache, c2: &AtomCache, ctx: &TfContext) -> Result<DMatrix<Cplx>> {
    check_lattice(symbol, ctx)?;
    let grid = ctx.time_grid();
    let n = grid.len();
    let cells = support(symbol);
    let atoms = atom_pairs(&cells, c1, c2, ctx)?;
    let rows: Vec<Vec<Cplx>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut row = vec![zero(); n];
            for (&(_, _, c), (a1, a2)) in cells.iter().zip(&atoms) {
                let coef = c * a2.values()[grid.mirror(s)];
                if coef == zero() {
                    continue;
                }
                for (t, r) in row.iter_mut().enumerate() {
                    *r += coef * a1.values()[grid.mirror(t)].conj();
                }
            }
            row
        })
        .collect();
    Ok(DMatrix::from_fn(n, n, |s, t| rows[s][t]))
}

/// The integral operator with kernel 𝒦: M = 𝒦·D.
pub fn assemble_from_kernel(symbol: &TFPlane, c1: &AtomCache, c2: &AtomCache, ctx: &TfContext) -> Result<OperatorMatrix> {
    let k = schur_kernel_matrix(symbol, c1, c2, ctx)?;
    let w = ctx.time_weights();
    let n = k.nrows();
    OperatorMatrix::new(DMatrix::from_fn(n, n, |s, t| k[(s, t)] * w[t]), ctx.time_grid().clone(), *ctx.params())
}

/// Schur-test masses of a kernel: sup_y Σ_z |𝒦(y, z)|A(z)w_z and sup_z Σ_y |𝒦(y, z)|A(y)w_y.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelMasses {
    pub row: f64,
    pub col: f64,
}

pub fn kernel_masses(m: &OperatorMatrix) -> KernelMasses {
    let k = m.kernel();
    let w = m.weights();
    let n = m.dim();
    let row = (0..n).map(|s| (0..n).map(|t| k[(s, t)].norm() * w[t]).sum::<f64>()).fold(0.0, f64::max);
    let col = (0..n).map(|t| (0..n).map(|s| k[(s, t)].norm() * w[s]).sum::<f64>()).fold(0.0, f64::max);
    KernelMasses { row, col }
}

/// Adjoint in L²(A): D⁻¹ M^H D.
pub fn adjoint(m: &OperatorMatrix) -> OperatorMatrix {
    let w = &m.weights;
    let n = m.dim();
    let a = DMatrix::from_fn(n, n, |i, j| m.matrix[(j, i)].conj() * (w[j] / w[i]));
    OperatorMatrix { matrix: a, grid: m.grid.clone(), params: m.params, weights: m.weights.clone() }
}

/// Singular values of the operator on L²(A), descending.
pub fn singular_values(m: &OperatorMatrix) -> Result<Vec<f64>> {
    let svd = m.weighted_form().try_svd(false, false, f64::EPSILON, 100_000).ok_or_else(|| Error::LinAlg("SVD did not converge".into()))?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// ℓ^p norm of a singular-value list; p = ∞ gives the largest value.
pub fn schatten_from_values(sv: &[f64], pexp: f64) -> Result<f64> {
    if !(pexp >= 1.0) {
        return Err(Error::Domain(format!("Schatten exponent must be in [1, inf], got {pexp}")));
    }
    if pexp.is_infinite() {
        return Ok(sv.iter().copied().fold(0.0, f64::max));
    }
    Ok(sv.iter().map(|s| s.powf(pexp)).sum::<f64>().powf(1.0 / pexp))
}

pub fn schatten_norm(m: &OperatorMatrix, pexp: f64) -> Result<f64> {
    schatten_from_values(&singular_values(m)?, pexp)
}

/// Frobenius norm of D^{1/2} M D^{−1/2}, the Hilbert–Schmidt norm on L²(A).
pub fn weighted_frobenius(m: &OperatorMatrix) -> f64 {
    m.weighted_form().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &OperatorMatrix) -> Cplx {
    m.matrix.diagonal().iter().sum()
}

/// Smallest eigenvalue of the weighted symmetrization (B + B^H)/2, B = D^{1/2} M D^{−1/2}.
pub fn symmetrized_min_eigenvalue(m: &OperatorMatrix) -> Result<f64> {
    let b = m.weighted_form();
    let h = (&b + b.adjoint()).scale(0.5);
    let eig = h.try_symmetric_eigen(f64::EPSILON, 100_000).ok_or_else(|| Error::LinAlg("eigensolver did not converge".into()))?;
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// ς̃(x, ξ) = ⟨M g₁_{x,ξ}, g₂_{x,ξ}⟩_{L²(A)} at one lattice node.
pub fn sigma_tilde(m: &OperatorMatrix, c1: &AtomCache, c2: &AtomCache, node: (usize, usize), ctx: &TfContext) -> Result<Cplx> {
    let (i, mm) = node;
    let a1 = c1.atom((Some(i), Some(mm)), ctx)?;
    let a2 = c2.atom((Some(i), Some(mm)), ctx)?;
    m.inner(&a1, &a2)
}

/// ς̃ on the whole (x, ξ) lattice.
pub fn sigma_tilde_plane(m: &OperatorMatrix, c1: &AtomCache, c2: &AtomCache, ctx: &TfContext) -> Result<TFPlane> {
    let (nx, nxi) = (ctx.time_grid().len(), ctx.xi_grid().len());
    let values: Vec<Cplx> = (0..nx * nxi).into_par_iter().map(|k| sigma_tilde(m, c1, c2, (k / nxi, k % nxi), ctx)).collect::<Result<_>>()?;
    TFPlane::new(ctx.time_grid().clone(), ctx.xi_grid().clone(), *ctx.params(), values)
}

/// Singular-value decay indicators: σ_{N/2}/σ₁ and the share of Σσ_k beyond index N/2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CompactnessProxy {
    pub sv_decay_ratio: f64,
    pub tail_mass: f64,
}

pub fn compactness_proxy(sv: &[f64]) -> CompactnessProxy {
    let half = sv.len() / 2;
    let total: f64 = sv.iter().sum();
    if sv.is_empty() || total == 0.0 {
        return CompactnessProxy { sv_decay_ratio: 0.0, tail_mass: 0.0 };
    }
    CompactnessProxy { sv_decay_ratio: sv.get(half).copied().unwrap_or(0.0) / sv[0], tail_mass: sv[half..].iter().sum::<f64>() / total }
}

/// The nine families of estimates checked by [`verify_bounds`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFamily {
    /// ‖L‖ ≤ ‖ς‖_∞‖g₁‖_{M¹}‖g₂‖_{M¹}.
    BoundedLinfSymbol,
    /// ‖L‖ ≤ ‖ς‖_{M¹}‖g₁‖_{M¹}‖g₂‖_{M¹}.
    BoundedM1Symbol,
    /// ‖L‖ ≤ ‖ς‖_{M^∞}‖g₁‖_{M¹}‖g₂‖_{M¹}.
    BoundedMinfSymbol,
    /// ‖L‖ ≤ ‖ς‖_{M^p}‖g₁‖_{M¹}‖g₂‖_{M¹}, p ∈ {2, 4}.
    BoundedMpSymbol,
    /// ‖L‖_{S₁} ≤ 2‖ς‖_{M¹}(‖g₁‖²_{M¹} + ‖g₂‖²_{M¹}).
    TraceClass,
    /// ‖L‖_{S_p} ≤ 2^{1/p}‖ς‖_{M^p}(‖g₁‖²_{M¹} + ‖g₂‖²_{M¹})^{1/p}, p ∈ {1, 2, 4}.
    Schatten,
    /// 2‖ς̃‖_{M¹}/(‖g₁‖²_{M¹} + ‖g₂‖²_{M¹}) ≤ ‖L‖_{S₁} ≤ ½(‖g₁‖²_{M¹} + ‖g₂‖²_{M¹})‖ς‖_{M¹}.
    TraceClassTwoSided,
    /// Operator norm on M^q, q ∈ {2, 4}, against ‖ς‖_{M¹}‖g₁‖_{M^{q′}}‖g₂‖_{M^q} and
    /// ‖ς‖_{M^q}‖g₁‖_{M¹}‖g₂‖_{M¹}.
    ModulationBounded,
    /// Schur masses of 𝒦 against max(‖g₁‖_{M¹}‖g₂‖_∞, ‖g₁‖_∞‖g₂‖_{M¹})‖ς‖_{M¹}.
    SchurKernel,
}

impl BoundFamily {
    pub const ALL: [BoundFamily; 9] = [
        BoundFamily::BoundedLinfSymbol,
        BoundFamily::BoundedM1Symbol,
        BoundFamily::BoundedMinfSymbol,
        BoundFamily::BoundedMpSymbol,
        BoundFamily::TraceClass,
        BoundFamily::Schatten,
        BoundFamily::TraceClassTwoSided,
        BoundFamily::ModulationBounded,
        BoundFamily::SchurKernel,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub family: BoundFamily,
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// (rhs − lhs)/rhs, or 0 when both sides vanish.
    pub margin: f64,
    /// Dilation of the reference window used for the modulation norms. Anything other than 1
    /// means the unit window violated the bound and an equivalent window was tried.
    pub window_scale: f64,
}

fn report(family: BoundFamily, name: String, lhs: f64, rhs: f64, window_scale: f64) -> BoundReport {
    let satisfied = lhs <= rhs * (1.0 + REPORT_EPS);
    let margin = if rhs > 0.0 { (rhs - lhs) / rhs } else if lhs == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    BoundReport { family, name, lhs, rhs, satisfied, margin, window_scale }
}

/// One (ς, g₁, g₂) triple of the suite.
#[derive(Clone, Debug)]
pub struct SuiteMember {
    pub label: String,
    pub symbol: TFPlane,
    pub g1: SampledFunction,
    pub g2: SampledFunction,
}

/// Fixed triples at the context geometry: zero, bumps, a checkerboard, a spike, ς ≡ 1 and a
/// bump with two different windows. Windows are the canonical one unless stated.
pub fn canonical_suite(ctx: &TfContext) -> Result<Vec<SuiteMember>> {
    let (tg, xg, p) = (ctx.time_grid(), ctx.xi_grid(), ctx.params());
    let g = canonical_window(tg, p);
    let rho = p.rho();
    let other = SampledFunction::from_fn(tg.clone(), Side::Time, |x| Complex64::new((-((x - 0.3) / 0.8).powi(2)).exp() * x.cosh().powf(-rho), 0.0));
    let lam = xg.truncation();
    let specs = [
        ("zero", SymbolSpec::Zero, false),
        ("bump", SymbolSpec::default(), false),
        ("offset-bump", SymbolSpec::TensorBump { x_center: 0.5, x_radius: 1.0, xi_center: lam / 8.0, xi_radius: lam / 4.0, amplitude: [0.0, 1.0] }, false),
        ("checkerboard", SymbolSpec::Checkerboard { x_cell: 0.5, xi_cell: lam / 8.0 }, false),
        ("spike", SymbolSpec::Spike { x: 0.3, xi: 1.0 }, false),
        ("one", SymbolSpec::One, false),
        ("bump-two-windows", SymbolSpec::default(), true),
    ];
    specs
        .into_iter()
        .map(|(label, spec, two)| {
            Ok(SuiteMember { label: label.into(), symbol: spec.sample(tg, xg, p)?, g1: g.clone(), g2: if two { other.clone() } else { g.clone() } })
        })
        .collect()
}

/// `n` seeded draws of random tensor-bump symbols with two random bump windows.
pub fn random_suite(ctx: &TfContext, seed: u64, n: usize) -> Result<Vec<SuiteMember>> {
    let (tg, xg, p) = (ctx.time_grid(), ctx.xi_grid(), ctx.params());
    let mut r = rng(seed);
    (0..n)
        .map(|k| {
            let spec = SymbolSpec::random(xg.truncation(), &mut r);
            let g1 = random_window(tg, p, &mut r);
            let g2 = random_window(tg, p, &mut r);
            Ok(SuiteMember { label: format!("random-{k}"), symbol: spec.sample(tg, xg, p)?, g1, g2 })
        })
        .collect()
}

/// Functions over which M^q operator norms are estimated from below: 20 smooth basis functions,
/// 20 damped Gaussians and 20 seeded random bumps.
pub fn operator_test_family(ctx: &TfContext, seed: u64) -> Result<Vec<SampledFunction>> {
    let tg = ctx.time_grid();
    let p = ctx.params();
    let rho = p.rho();
    let mut out = smooth_basis(tg, ctx.plan.spectral_grid().truncation(), p, 20)?;
    for k in 0..20 {
        let c = -1.5 + 3.0 * (k % 5) as f64 / 4.0;
        let w = [0.4, 0.7, 1.0, 1.5][k / 5];
        out.push(SampledFunction::from_fn(tg.clone(), Side::Time, |x| Complex64::new((-((x - c) / w).powi(2)).exp() * x.cosh().powf(-rho), 0.0)));
    }
    let mut r = rng(seed ^ 0x5eed);
    for _ in 0..20 {
        out.push(random_smooth(tg, Side::Time, &mut r));
    }
    Ok(out)
}

/// Everything about one assembled operator that the bounds need, independent of the
/// reference window.
struct Spectral {
    s: [f64; 4],
    masses: KernelMasses,
    sym_sup: f64,
    g_sup: [f64; 2],
}

/// Window-dependent modulation norms.
struct Norms {
    /// ‖ς‖_{M^p} for p = 1, 2, 4, ∞.
    sym: [f64; 4],
    tilde_m1: f64,
    /// ‖g_k‖_{M^1}, ‖g_k‖_{M^2}, ‖g_k‖_{M^{4/3}}, ‖g_k‖_{M^4}.
    g: [[f64; 4]; 2],
    /// Lower estimates of ‖L‖_{B(M^q)} for q = 2, 4.
    op: [f64; 2],
}

const SCALES: [f64; 3] = [1.0, 2.0, 0.5];

fn norms(m: &OperatorMatrix, member: &SuiteMember, tilde: &TFPlane, family: &[SampledFunction], scale: f64) -> Result<Norms> {
    let win = ReferenceWindow::dilated(scale)?;
    let p = m.params();
    let lat2 = SymbolLattice::for_plane(&member.symbol, DEFAULT_SYMBOL_NODES)?;
    let mut sym = [0.0; 4];
    for (k, q) in [1.0, 2.0, 4.0, f64::INFINITY].into_iter().enumerate() {
        sym[k] = modulation_norm_2d_with(&member.symbol, q, &lat2, win)?;
    }
    let tilde_m1 = modulation_norm_2d_with(tilde, 1.0, &SymbolLattice::for_plane(tilde, DEFAULT_SYMBOL_NODES)?, win)?;
    let lat = StftLattice::for_grid(m.grid())?;
    let gnorm = |g: &SampledFunction| -> Result<[f64; 4]> {
        let v = stft_plane(g, &lat, win);
        Ok([mixed_norm(&v, 1.0, 1.0, p)?, mixed_norm(&v, 2.0, 2.0, p)?, mixed_norm(&v, 4.0 / 3.0, 4.0 / 3.0, p)?, mixed_norm(&v, 4.0, 4.0, p)?])
    };
    let g = [gnorm(&member.g1)?, gnorm(&member.g2)?];
    let ratios: Vec<[f64; 2]> = family
        .par_iter()
        .map(|f| {
            let (vf, vl) = (stft_plane(f, &lat, win), stft_plane(&m.apply(f)?, &lat, win));
            let mut r = [0.0; 2];
            for (k, q) in [2.0, 4.0].into_iter().enumerate() {
                let d = mixed_norm(&vf, q, q, p)?;
                r[k] = if d > 0.0 { mixed_norm(&vl, q, q, p)? / d } else { 0.0 };
            }
            Ok(r)
        })
        .collect::<Result<_>>()?;
    let op = [0, 1].map(|k| ratios.iter().map(|r| r[k]).fold(0.0, f64::max));
    Ok(Norms { sym, tilde_m1, g, op })
}

type Check = Box<dyn Fn(&Spectral, &Norms) -> (f64, f64) + Sync>;

fn checks() -> Vec<(BoundFamily, String, Check)> {
    use BoundFamily::*;
    let m1m1 = |n: &Norms| n.g[0][0] * n.g[1][0];
    let sq = |n: &Norms| n.g[0][0].powi(2) + n.g[1][0].powi(2);
    let mut v: Vec<(BoundFamily, String, Check)> = vec![
        (BoundedLinfSymbol, "operator_norm".into(), Box::new(move |s: &Spectral, n: &Norms| (s.s[3], s.sym_sup * m1m1(n)))),
        (BoundedM1Symbol, "operator_norm".into(), Box::new(move |s: &Spectral, n: &Norms| (s.s[3], n.sym[0] * m1m1(n)))),
        (BoundedMinfSymbol, "operator_norm".into(), Box::new(move |s: &Spectral, n: &Norms| (s.s[3], n.sym[3] * m1m1(n)))),
    ];
    for (k, pe) in [(1usize, 2.0), (2, 4.0)] {
        v.push((BoundedMpSymbol, format!("operator_norm/p={pe}"), Box::new(move |s: &Spectral, n: &Norms| (s.s[3], n.sym[k] * m1m1(n)))));
    }
    v.push((TraceClass, "s1".into(), Box::new(move |s: &Spectral, n: &Norms| (s.s[0], 2.0 * n.sym[0] * sq(n)))));
    for (k, pe) in [(0usize, 1.0f64), (1, 2.0), (2, 4.0)] {
        v.push((Schatten, format!("s{pe}"), Box::new(move |s: &Spectral, n: &Norms| (s.s[k], 2f64.powf(1.0 / pe) * n.sym[k] * sq(n).powf(1.0 / pe)))));
    }
    v.push((TraceClassTwoSided, "lower".into(), Box::new(move |s: &Spectral, n: &Norms| (2.0 * n.tilde_m1 / sq(n), s.s[0]))));
    v.push((TraceClassTwoSided, "upper".into(), Box::new(move |s: &Spectral, n: &Norms| (s.s[0], 0.5 * sq(n) * n.sym[0]))));
    for (k, q, gi) in [(0usize, 2.0, 1usize), (1, 4.0, 2)] {
        // q = 2 pairs M^2 with M^2, q = 4 pairs M^{4/3} with M^4.
        let gq = if q == 2.0 { 1 } else { 3 };
        v.push((ModulationBounded, format!("m1_symbol/q={q}"), Box::new(move |_: &Spectral, n: &Norms| (n.op[k], n.sym[0] * n.g[0][gi] * n.g[1][gq]))));
        v.push((ModulationBounded, format!("mq_symbol/q={q}"), Box::new(move |_: &Spectral, n: &Norms| (n.op[k], n.sym[k + 1] * m1m1(n)))));
    }
    v.push((
        SchurKernel,
        "kernel_mass".into(),
        Box::new(|s: &Spectral, n: &Norms| (s.masses.row.max(s.masses.col), (n.g[0][0] * s.g_sup[1]).max(s.g_sup[0] * n.g[1][0]) * n.sym[0])),
    ));
    v
}

/// Bound reports and spectral summary of one suite member.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemberReport {
    pub label: String,
    pub singular_values: Vec<f64>,
    pub trace: [f64; 2],
    pub reports: Vec<BoundReport>,
}

impl MemberReport {
    pub fn satisfied(&self) -> bool {
        self.reports.iter().all(|r| r.satisfied)
    }
}

/// Assembles the member's operator and checks every bound. Modulation norms use the unit
/// reference window; a violated bound is re-evaluated with the windows dilated by 2 and ½
/// and counts as satisfied if either equivalent norm satisfies it.
pub fn verify_member(member: &SuiteMember, family: &[SampledFunction], ctx: &TfContext) -> Result<MemberReport> {
    let c1 = AtomCache::new(member.g1.clone(), ctx)?;
    let c2 = if member.g2 == member.g1 { None } else { Some(AtomCache::new(member.g2.clone(), ctx)?) };
    let c2r = c2.as_ref().unwrap_or(&c1);
    let m = assemble(&member.symbol, &c1, c2r, ctx)?;
    let sv = singular_values(&m)?;
    let s = [1.0, 2.0, 4.0, f64::INFINITY].map(|q| schatten_from_values(&sv, q).unwrap_or(f64::NAN));
    let sup = |g: &SampledFunction| g.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let spectral = Spectral {
        s,
        masses: kernel_masses(&m),
        sym_sup: member.symbol.values().iter().map(|v| v.norm()).fold(0.0, f64::max),
        g_sup: [sup(&member.g1), sup(&member.g2)],
    };
    let tilde = sigma_tilde_plane(&m, &c1, c2r, ctx)?;
    let mut cache: Vec<Option<Norms>> = SCALES.iter().map(|_| None).collect();
    cache[0] = Some(norms(&m, member, &tilde, family, SCALES[0])?);
    let mut reports = Vec::new();
    for (fam, name, check) in checks() {
        let (lhs, rhs) = check(&spectral, cache[0].as_ref().expect("unit norms"));
        let mut r = report(fam, name.clone(), lhs, rhs, SCALES[0]);
        for k in 1..SCALES.len() {
            if r.satisfied {
                break;
            }
            if cache[k].is_none() {
                cache[k] = Some(norms(&m, member, &tilde, family, SCALES[k])?);
            }
            let (l, rr) = check(&spectral, cache[k].as_ref().expect("norms computed above"));
            let alt = report(fam, name.clone(), l, rr, SCALES[k]);
            if alt.satisfied {
                r = alt;
            }
        }
        reports.push(r);
    }
    let tr = trace(&m);
    Ok(MemberReport { label: member.label.clone(), singular_values: sv, trace: [tr.re, tr.im], reports })
}

/// Runs [`verify_member`] over every member.
pub fn verify_bounds(members: &[SuiteMember], family: &[SampledFunction], ctx: &TfContext) -> Result<Vec<MemberReport>> {
    members.iter().map(|mem| verify_member(mem, family, ctx)).collect()
}
