//! Registry of named numerical checks. Each check measures one worst-case deviation and
//! compares it against a fixed tolerance.

use anyhow::Result;
use cherednik_tf::families::{rng, random_smooth, smooth_basis, SymbolSpec, WindowSpec};
use cherednik_tf::localization::{
    adjoint, assemble, assemble_from_kernel, canonical_suite, compactness_proxy, operator_test_family, random_suite, schatten_from_values,
    singular_values, symmetrized_min_eigenvalue, trace, verify_bounds, weak_form, MemberReport,
};
use cherednik_tf::measure_grid::{SampledFunction, Side};
use cherednik_tf::modulation_window::{
    lp_tfplane_norm, orthogonality_from_planes, reconstruct, reproducing_kernel_plane, windowed_plancherel, windowed_transform,
    windowed_transform_direct, AtomCache, TFPlane, TfContext,
};
use cherednik_tf::measure_grid::{measure_weights, Measure, QuadratureGrid};
use cherednik_tf::special_fn::opdam_g;
use cherednik_tf::transform::{forward, TransformPlan};
use cherednik_tf::translation_conv::{convolve, kernel_mass, translate_at, translation_norm_survey, KernelQuadrature, KernelTensor};
use cherednik_tf::Params;
use rand::Rng;
use std::sync::Arc;
use cherednik_tf::Cplx;
use num_complex::Complex64;
use serde::Serialize;

/// Names accepted in a configuration's `suite`.
pub const CHECKS: [&str; 8] = ["bounds", "assembly_paths", "adjoint", "identity", "positivity", "trace", "linearity", "compactness"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst deviation found.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: value <= tolerance, value, tolerance, detail: detail.into() }
    }
}

fn c(v: f64) -> Cplx {
    Complex64::new(v, 0.0)
}

pub fn l2a_norm(f: &SampledFunction, ctx: &TfContext) -> f64 {
    f.inner_weighted(f, ctx.time_weights()).re.sqrt()
}

/// Context, the configured window, a second window for two-window checks, the configured
/// symbol and the seed for random draws.
pub struct Env {
    pub ctx: TfContext,
    pub window: AtomCache,
    pub other: AtomCache,
    pub symbol: TFPlane,
    pub seed: u64,
}

impl Env {
    pub fn new(ctx: TfContext, window: &WindowSpec, symbol: &SymbolSpec, seed: u64) -> Result<Self> {
        let p = *ctx.params();
        let g = window.sample(ctx.time_grid(), &p)?;
        let h = WindowSpec::DampedGaussian { center: 0.3, width: 0.8 }.sample(ctx.time_grid(), &p)?;
        let symbol = symbol.sample(ctx.time_grid(), ctx.xi_grid(), &p)?;
        let window = AtomCache::new(g, &ctx)?;
        let other = AtomCache::new(h, &ctx)?;
        Ok(Self { ctx, window, other, symbol, seed })
    }

    fn sample(&self, spec: &SymbolSpec) -> Result<TFPlane> {
        Ok(spec.sample(self.ctx.time_grid(), self.ctx.xi_grid(), self.ctx.params())?)
    }

    /// The configured symbol followed by two seeded random tensor bumps.
    fn symbols(&self) -> Result<Vec<TFPlane>> {
        let mut r = rng(self.seed);
        let lam = self.ctx.xi_grid().truncation();
        let mut out = vec![self.symbol.clone()];
        for _ in 0..2 {
            out.push(self.sample(&SymbolSpec::random(lam, &mut r))?);
        }
        Ok(out)
    }

    /// Nonnegative symbols: the default bump, ς ≡ 1 and |configured symbol|.
    fn nonnegative_symbols(&self) -> Result<Vec<(String, TFPlane)>> {
        Ok(vec![
            ("bump".into(), self.sample(&SymbolSpec::default())?),
            ("one".into(), self.sample(&SymbolSpec::One)?),
            ("abs-config".into(), self.symbol.map(|v| c(v.norm()))),
        ])
    }
}

/// Runs one registered check other than `bounds`.
pub fn run_check(name: &str, env: &Env) -> Result<CheckResult> {
    match name {
        "assembly_paths" => assembly_paths(env),
        "adjoint" => adjoint_identity(env),
        "identity" => identity_case(env),
        "positivity" => positivity(env),
        "trace" => trace_equals_s1(env),
        "linearity" => linearity(env),
        "compactness" => compactness(env),
        other => anyhow::bail!("check `{other}` is not a standalone check"),
    }
}

/// Matrix assembly against the Schur-kernel path and against the weak form on random pairs.
pub fn assembly_paths(env: &Env) -> Result<CheckResult> {
    let ctx = &env.ctx;
    let mut r = rng(env.seed ^ 0x5eed);
    let (mut kernel_dev, mut weak_dev): (f64, f64) = (0.0, 0.0);
    for sym in env.symbols()? {
        let m = assemble(&sym, &env.window, &env.other, ctx)?;
        kernel_dev = kernel_dev.max(assemble_from_kernel(&sym, &env.window, &env.other, ctx)?.rel_diff(&m)?);
        let sinf = schatten_from_values(&singular_values(&m)?, f64::INFINITY)?;
        for _ in 0..3 {
            let f = random_smooth(ctx.time_grid(), Side::Time, &mut r);
            let h = random_smooth(ctx.time_grid(), Side::Time, &mut r);
            let weak = weak_form(&sym, &f, &h, &env.window, &env.other, ctx)?;
            let scale = l2a_norm(&f, ctx) * l2a_norm(&h, ctx) * sinf;
            if scale > 0.0 {
                weak_dev = weak_dev.max((weak - m.inner(&f, &h)?).norm() / scale);
            }
        }
    }
    Ok(CheckResult::new("assembly_paths", kernel_dev.max(weak_dev), 1e-8, format!("schur kernel {kernel_dev:.3e}, weak form {weak_dev:.3e}")))
}

/// Adjoint of L_{g1,g2}(ς) against L_{g2,g1}(conj ς).
pub fn adjoint_identity(env: &Env) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for sym in env.symbols()? {
        let adj = adjoint(&assemble(&sym, &env.window, &env.other, &env.ctx)?);
        let swapped = assemble(&sym.map(|v| v.conj()), &env.other, &env.window, &env.ctx)?;
        worst = worst.max(swapped.rel_diff(&adj)?);
    }
    Ok(CheckResult::new("adjoint", worst, 1e-8, "max entry relative deviation"))
}

/// ς ≡ 1 with g1 = g2 = g should act as ‖g‖² times the identity on smooth functions.
pub fn identity_case(env: &Env) -> Result<CheckResult> {
    let ctx = &env.ctx;
    let one = env.sample(&SymbolSpec::One)?;
    let m = assemble(&one, &env.window, &env.window, ctx)?;
    let gn = env.window.norm_sq();
    let mut worst: f64 = 0.0;
    for b in smooth_basis(ctx.time_grid(), ctx.xi_grid().truncation(), ctx.params(), 10)? {
        let d = m.apply(&b)?.combine(c(1.0), &b, c(-gn))?;
        worst = worst.max(l2a_norm(&d, ctx) / (gn * l2a_norm(&b, ctx)));
    }
    Ok(CheckResult::new("identity", worst, 5e-2, "max ‖Lb − ‖g‖²b‖/(‖g‖²‖b‖) over 10 smooth functions"))
}

/// Minimum eigenvalue of the weighted Hermitian part for nonnegative symbols and g1 = g2.
pub fn positivity(env: &Env) -> Result<CheckResult> {
    let mut worst = f64::NEG_INFINITY;
    let mut detail = Vec::new();
    for (label, sym) in env.nonnegative_symbols()? {
        let m = assemble(&sym, &env.window, &env.window, &env.ctx)?;
        let sinf = schatten_from_values(&singular_values(&m)?, f64::INFINITY)?;
        let v = -symmetrized_min_eigenvalue(&m)? / sinf;
        detail.push(format!("{label} {v:.3e}"));
        worst = worst.max(v);
    }
    Ok(CheckResult::new("positivity", worst, 1e-8, format!("−λ_min/S∞: {}", detail.join(", "))))
}

/// trace(L) = ‖L‖_{S1} for nonnegative symbols and g1 = g2.
pub fn trace_equals_s1(env: &Env) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (label, sym) in env.nonnegative_symbols()? {
        let m = assemble(&sym, &env.window, &env.window, &env.ctx)?;
        let s1 = schatten_from_values(&singular_values(&m)?, 1.0)?;
        let tr = trace(&m);
        let v = (tr - c(s1)).norm() / s1;
        detail.push(format!("{label} trace {:.4e} S1 {s1:.4e}", tr.re));
        worst = worst.max(v);
    }
    Ok(CheckResult::new("trace", worst, 1e-9, detail.join(", ")))
}

pub fn linearity(env: &Env) -> Result<CheckResult> {
    let s = env.symbols()?;
    let (a, b) = (Complex64::new(0.7, -0.3), Complex64::new(-1.2, 0.5));
    let combo = TFPlane::new(s[0].x_grid().clone(), s[0].xi_grid().clone(), *s[0].params(), s[0].values().iter().zip(s[1].values()).map(|(u, v)| a * u + b * v).collect())?;
    let lhs = assemble(&combo, &env.window, &env.other, &env.ctx)?;
    let (m1, m2) = (assemble(&s[0], &env.window, &env.other, &env.ctx)?, assemble(&s[1], &env.window, &env.other, &env.ctx)?);
    let rhs = cherednik_tf::localization::OperatorMatrix::new(m1.matrix() * a + m2.matrix() * b, m1.grid().clone(), *m1.params())?;
    Ok(CheckResult::new("linearity", lhs.rel_diff(&rhs)?, 1e-12, "L(aς1 + bς2) against aL(ς1) + bL(ς2)"))
}

/// Singular-value tail mass of the default bump symbol.
pub fn compactness(env: &Env) -> Result<CheckResult> {
    let m = assemble(&env.sample(&SymbolSpec::default())?, &env.window, &env.window, &env.ctx)?;
    let proxy = compactness_proxy(&singular_values(&m)?);
    Ok(CheckResult::new("compactness", proxy.tail_mass, 0.05, format!("decay ratio {:.3e}", proxy.sv_decay_ratio)))
}

/// Bound suite over the canonical members and `draws` seeded random members.
pub fn bounds(env: &Env, draws: usize) -> Result<(Vec<MemberReport>, CheckResult)> {
    let ctx = &env.ctx;
    let mut members = canonical_suite(ctx)?;
    members.extend(random_suite(ctx, env.seed, draws)?);
    let family = operator_test_family(ctx, env.seed)?;
    let reports = verify_bounds(&members, &family, ctx)?;
    let failed: Vec<String> = reports.iter().flat_map(|m| m.reports.iter().filter(|r| !r.satisfied).map(move |r| format!("{}:{}", m.label, r.name))).collect();
    let total: usize = reports.iter().map(|m| m.reports.len()).sum();
    let detail = if failed.is_empty() { format!("{total} reports satisfied over {} members", reports.len()) } else { format!("violated: {}", failed.join(", ")) };
    Ok((reports, CheckResult::new("bounds", failed.len() as f64, 0.0, detail)))
}

/// Time nodes with |x| ≤ 1.5, where translation is resolved inside the truncation box.
fn inner_x_nodes(ctx: &TfContext) -> Vec<usize> {
    let nodes = ctx.time_grid().nodes();
    let inside: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].abs() <= 1.5).collect();
    if inside.len() <= 8 {
        return inside;
    }
    (0..8).map(|k| inside[k * (inside.len() - 1) / 7]).collect()
}

/// Identities of the windowed transform for f against the companion h = damped Gaussian at
/// −0.4 with width 1: convolution versus atom form, Plancherel, orthogonality, weak
/// reconstruction on 10 smooth functionals and the reproducing-kernel bound.
pub fn wct_checks(f: &SampledFunction, cache: &AtomCache, ctx: &TfContext) -> Result<(TFPlane, Vec<CheckResult>)> {
    let p = *ctx.params();
    let w = windowed_transform(f, cache, ctx)?;
    let mut out = Vec::new();

    let nxi = ctx.xi_grid().len();
    let xi_nodes: Vec<usize> = if nxi <= 8 { (0..nxi).collect() } else { (0..8).map(|k| k * (nxi - 1) / 7).collect() };
    let mut dual: f64 = 0.0;
    for i in inner_x_nodes(ctx) {
        for &m in &xi_nodes {
            let d = windowed_transform_direct(f, (Some(i), Some(m)), cache, ctx)?;
            let scale = w.get(i, m).norm();
            if scale > 0.0 {
                dual = dual.max((d - w.get(i, m)).norm() / scale);
            }
        }
    }
    out.push(CheckResult::new("dual_path", dual, 1e-6, "convolution form against atom inner products"));

    let pl = windowed_plancherel(f, &w, cache, ctx)?;
    out.push(CheckResult::new("windowed_plancherel", pl.rel_err, 1e-2, format!("lhs {:.6e}{:+.3e}i rhs {:.6e}", pl.lhs.re, pl.lhs.im, pl.rhs)));

    let h = WindowSpec::DampedGaussian { center: -0.4, width: 1.0 }.sample(ctx.time_grid(), &p)?;
    let wh = windowed_transform(&h, cache, ctx)?;
    let orth = orthogonality_from_planes(f, &h, &w, &wh, cache, ctx)?;
    out.push(CheckResult::new("orthogonality", orth.rel_err, 1e-2, format!("residual {:.3e} scale {:.3e}", orth.residual, orth.scale)));

    let rec = reconstruct(&w, cache, ctx)?;
    let fnorm = l2a_norm(f, ctx);
    let mut weak: f64 = 0.0;
    for b in smooth_basis(ctx.time_grid(), ctx.xi_grid().truncation(), &p, 10)? {
        let tw = ctx.time_weights();
        let d = (rec.inner_weighted(&b, tw) - f.inner_weighted(&b, tw)).norm() / (fnorm * l2a_norm(&b, ctx));
        weak = weak.max(d);
    }
    out.push(CheckResult::new("reconstruction", weak, 2e-2, "max |⟨rec − f, b⟩|/(‖f‖‖b‖) over 10 smooth functionals"));

    let survey = translation_norm_survey(&ctx.time_tensor, 2.0, &smooth_basis(ctx.time_grid(), ctx.xi_grid().truncation(), &p, 8)?)?;
    let nx = ctx.time_grid().len();
    let mut ratio: f64 = 0.0;
    for node in [(nx / 2, nxi / 2), (nx * 5 / 16, nxi * 25 / 64), (nx * 45 / 64, nxi * 50 / 64)] {
        let kp = reproducing_kernel_plane((Some(node.0), Some(node.1)), cache, ctx)?;
        ratio = ratio.max(lp_tfplane_norm(&kp, f64::INFINITY)? / (survey * survey));
    }
    out.push(CheckResult::new("reproducing_kernel", ratio, 1.0, format!("sup |K_g| / C² with surveyed C = {survey:.6}")));
    Ok((w, out))
}

/// z-mass of the continuous kernel at one (x, y).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MassRow {
    pub x: f64,
    pub y: f64,
    pub mass: f64,
}

/// e^{−2(x−c)²}·cosh(x)^{−ρ}, narrow enough that translates by |x| ≤ 1.5 stay in the box.
fn tight(grid: &Arc<QuadratureGrid>, p: &Params, center: f64) -> SampledFunction {
    let rho = p.rho();
    SampledFunction::from_fn(grid.clone(), Side::Time, |x| c((-2.0 * (x - center).powi(2)).exp() * x.cosh().powf(-rho)))
}

fn max_rel(a: &[Cplx], b: &[Cplx]) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let err = a.iter().zip(b).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

/// Kernel mass at 25 (x, y) pairs, tensor slice masses, the kernel symmetries at 25 seeded
/// admissible triples, translation against the transform and the convolution theorem on five
/// pairs built from f, g and narrow damped Gaussians.
pub fn kernel_checks(plan: &TransformPlan, tensor: &KernelTensor, f: &SampledFunction, g: &SampledFunction, seed: u64) -> Result<(Vec<MassRow>, Vec<CheckResult>)> {
    let p = *plan.params();
    let grid = plan.time_grid();
    let n_chi = tensor.n_chi();
    let mut out = Vec::new();

    let mut rows = Vec::new();
    for x in [0.15, 0.6, 1.1, -1.7, 2.3] {
        for y in [0.2, -0.75, 1.1, 1.4, 1.6] {
            rows.push(MassRow { x, y, mass: kernel_mass(x, y, &p, n_chi, 64)? });
        }
    }
    let dev = rows.iter().map(|r| (r.mass - 1.0).abs()).fold(0.0, f64::max);
    out.push(CheckResult::new("kernel_mass", dev, 1e-3, "max |∫K(x, y, z)A(z)dz − 1| over 25 pairs"));

    let aw = measure_weights(grid, Measure::A, &p)?;
    let mut slice_dev: f64 = 0.0;
    let idx: Vec<usize> = [0.2, 0.6, -1.1, 1.5, -0.4].iter().map(|&x| grid.nearest(x)).collect();
    for &i in &idx {
        for &j in &idx {
            if grid.nodes()[i].abs() + grid.nodes()[j].abs() <= grid.truncation() {
                let m: f64 = tensor.slice(i, j).iter().zip(&aw).map(|(k, a)| k * a).sum();
                slice_dev = slice_dev.max((m - 1.0).abs());
            }
        }
    }
    out.push(CheckResult::new("tensor_slice_mass", slice_dev, 1e-3, "max slice mass deviation at node pairs inside the box"));

    let kq = KernelQuadrature::new(&p, n_chi)?;
    let mut r = rng(seed);
    let (mut s1, mut s2): (f64, f64) = (0.0, 0.0);
    for _ in 0..25 {
        let (x, y): (f64, f64) = (r.random_range(0.1..2.5), r.random_range(0.1..2.5));
        let t: f64 = r.random_range(0.02..0.98);
        let z = (x - y).abs() + t * (x + y - (x - y).abs());
        let sg = |b: bool| if b { -1.0 } else { 1.0 };
        let (x, y, z) = (x * sg(r.random()), y * sg(r.random()), z * sg(r.random()));
        let k = kq.eval(x, y, z);
        let scale = k.abs().max(1e-300);
        s1 = s1.max((kq.eval(-z, y, -x) - k).abs() / scale);
        s2 = s2.max((kq.eval(x, -z, -y) - k).abs() / scale);
    }
    out.push(CheckResult::new("kernel_symmetry", s1.max(s2), 1e-10, format!("K(−z, y, −x) {s1:.3e}, K(x, −z, −y) {s2:.3e}")));

    let sg = plan.spectral_grid();
    let hf = forward(plan, f)?;
    let mut tr: f64 = 0.0;
    for x in [-1.5, -1.0, -0.5, 0.5, 1.0, 1.5] {
        let i = grid.nearest(x);
        let xs = grid.nodes()[i];
        let htf = forward(plan, &translate_at(f, i, tensor)?)?;
        let expect: Result<Vec<Cplx>> = sg.nodes().iter().zip(hf.values()).map(|(&l, h)| Ok(opdam_g(c(l), xs, &p)? * h)).collect();
        tr = tr.max(max_rel(htf.values(), &expect?));
    }
    out.push(CheckResult::new("translation_transform", tr, 1e-3, "max_λ |ℋ(τ_x f) − G_λ(x)ℋf| / max|G_λ(x)ℋf| over six x"));

    let pairs = [
        (f.clone(), g.clone()),
        (g.clone(), tight(grid, &p, 0.3)),
        (tight(grid, &p, 0.0), tight(grid, &p, -0.5)),
        (tight(grid, &p, 0.5), g.scale(Complex64::new(0.0, 1.0))),
        (tight(grid, &p, -0.2), tight(grid, &p, 0.6)),
    ];
    let mut conv: f64 = 0.0;
    for (a, b) in &pairs {
        let hab = forward(plan, &convolve(a, b, tensor)?)?;
        let prod: Vec<Cplx> = forward(plan, a)?.values().iter().zip(forward(plan, b)?.values()).map(|(u, v)| u * v).collect();
        conv = conv.max(max_rel(hab.values(), &prod));
    }
    out.push(CheckResult::new("convolution_theorem", conv, 5e-3, "max_λ |ℋ(f ∗ g) − ℋf·ℋg| / max|ℋf·ℋg| over five pairs"));
    Ok((rows, out))
}
