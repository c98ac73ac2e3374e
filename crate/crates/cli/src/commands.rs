use std::path::Path;

use anyhow::{Context, Result};
use cherednik_tf::families::WindowSpec;
use cherednik_tf::localization::{assemble, compactness_proxy, kernel_masses, schatten_from_values, singular_values, symmetrized_min_eigenvalue, trace, MemberReport};
use cherednik_tf::measure_grid::Geometry;
use cherednik_tf::modulation_window::{AtomCache, PlaneSidecar, TfContext};
use cherednik_tf::transform::{forward, inverse, plancherel_report, plancherel_report_reflected, PlancherelReport, TransformPlan};
use cherednik_tf::translation_conv::KernelTensor;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::checks::{bounds, kernel_checks, run_check, wct_checks, CheckResult, Env, MassRow};
use crate::config::{ParamsConfig, RunConfig};
use crate::output::{num, write_csv, write_json};

/// The six subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Forward and inverse transform of the configured function, with the Plancherel report.
    Transform,
    /// Translation kernel tensor, mass and symmetry tests, translation and convolution checks.
    Kernel,
    /// Windowed transform of the configured function and its identity checks.
    Wct,
    /// Localization operator of the configured symbol: spectrum, trace and Schatten norms.
    Localize,
    /// Bound suite plus the configured invariant checks. Exits 1 unless everything holds.
    Verify,
    /// Summary table of the JSON outputs already present in the output directory.
    Report,
}

/// Runs one command. `Ok(false)` means a numerical check failed.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<bool> {
    match cmd {
        Command::Transform => cmd_transform(cfg),
        Command::Kernel => cmd_kernel(cfg),
        Command::Wct => cmd_wct(cfg),
        Command::Localize => cmd_localize(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Report => cmd_report(cfg),
    }
}

#[derive(Serialize)]
struct RunInfo<'a> {
    params: ParamsConfig,
    geometry: &'a Geometry,
    seed: u64,
}

fn info(cfg: &RunConfig) -> RunInfo<'_> {
    RunInfo { params: cfg.params, geometry: &cfg.geometry, seed: cfg.seed }
}

fn hit_word(hit: bool) -> &'static str {
    if hit {
        "hit"
    } else {
        "miss (built and stored)"
    }
}

fn load_context(cfg: &RunConfig) -> Result<TfContext> {
    let (ctx, hits) = TfContext::load_or_build(&cfg.geometry, &cfg.params(), &cfg.cache_dir).context("building transform plan and kernel tensors")?;
    for (name, h) in ["plan", "time tensor", "spectral tensor"].iter().zip(hits) {
        log::info!("{name} cache {}", hit_word(h));
    }
    Ok(ctx)
}

fn print_checks(checks: &[CheckResult]) {
    for c in checks {
        println!("{:<24} {:<4} {:>12.4e} (tol {:.1e})  {}", c.name, if c.passed { "ok" } else { "FAIL" }, c.value, c.tolerance, c.detail);
    }
}

fn out_path(cfg: &RunConfig, name: &str) -> std::path::PathBuf {
    cfg.output_dir.join(name)
}

#[derive(Serialize)]
struct TransformSummary<'a> {
    run: RunInfo<'a>,
    function: &'a WindowSpec,
    /// ∫ ℋf(λ)·conj(ℋf̌(−λ)) dσ, valid for every f.
    plancherel: PlancherelReport,
    /// ∫|ℋf|² dσ, which only matches ‖f‖² for even f.
    plancherel_modulus: PlancherelReport,
    round_trip_rel_err: f64,
}

pub fn cmd_transform(cfg: &RunConfig) -> Result<bool> {
    let p = cfg.params();
    let [plan_path, _, _] = TfContext::cache_paths(&cfg.geometry, &p, &cfg.cache_dir)?;
    let (tg, sg) = (cfg.geometry.time_grid()?, cfg.geometry.spectral_grid()?);
    let (plan, hit) = TransformPlan::load_or_build(&plan_path, tg.clone(), sg.clone(), &p)?;
    log::info!("plan cache {}", hit_word(hit));
    let f = cfg.function.sample(&tg, &p)?;
    let hf = forward(&plan, &f)?;
    let rt = inverse(&plan, &hf)?;
    let report = plancherel_report_reflected(&plan, &f)?;
    let modulus = plancherel_report(&plan, &f)?;
    let diff = rt.combine(Complex64::new(1.0, 0.0), &f, Complex64::new(-1.0, 0.0))?;
    let norm = |g: &cherednik_tf::measure_grid::SampledFunction| g.inner_weighted(g, plan.time_weights()).re.sqrt();
    let fnorm = norm(&f);
    let round_trip_rel_err = if fnorm > 0.0 { norm(&diff) / fnorm } else { norm(&diff) };

    write_csv(
        &out_path(cfg, "transform_time.csv"),
        &["x", "f_re", "f_im", "roundtrip_re", "roundtrip_im"],
        tg.nodes().iter().zip(f.values()).zip(rt.values()).map(|((&x, v), r)| vec![num(x), num(v.re), num(v.im), num(r.re), num(r.im)]),
    )?;
    write_csv(&out_path(cfg, "transform_spectral.csv"), &["lambda", "re", "im"], sg.nodes().iter().zip(hf.values()).map(|(&l, v)| vec![num(l), num(v.re), num(v.im)]))?;
    write_json(&out_path(cfg, "transform.json"), &TransformSummary { run: info(cfg), function: &cfg.function, plancherel: report, plancherel_modulus: modulus, round_trip_rel_err })?;
    println!("plancherel rel err {:.3e}, imaginary leak {:.3e}, round trip {:.3e}", report.rel_err, report.imag_leak, round_trip_rel_err);
    Ok(true)
}

#[derive(Serialize)]
struct KernelSummary<'a> {
    run: RunInfo<'a>,
    n_chi: usize,
    masses: Vec<MassRow>,
    checks: Vec<CheckResult>,
    passed: bool,
}

pub fn cmd_kernel(cfg: &RunConfig) -> Result<bool> {
    let p = cfg.params();
    let [plan_path, time_path, _] = TfContext::cache_paths(&cfg.geometry, &p, &cfg.cache_dir)?;
    let (tg, sg) = (cfg.geometry.time_grid()?, cfg.geometry.spectral_grid()?);
    let (plan, h0) = TransformPlan::load_or_build(&plan_path, tg.clone(), sg, &p)?;
    log::info!("plan cache {}", hit_word(h0));
    let (tensor, h1) = KernelTensor::load_or_build(&time_path, tg.clone(), tg.clone(), &p, cfg.geometry.n_chi)?;
    log::info!("time tensor cache {}", hit_word(h1));
    let f = cfg.function.sample(&tg, &p)?;
    let g = cfg.window.sample(&tg, &p)?;
    let (masses, checks) = kernel_checks(&plan, &tensor, &f, &g, cfg.seed)?;
    print_checks(&checks);
    let passed = checks.iter().all(|c| c.passed);
    write_json(&out_path(cfg, "kernel.json"), &KernelSummary { run: info(cfg), n_chi: cfg.geometry.n_chi, masses, checks, passed })?;
    Ok(passed)
}

#[derive(Serialize)]
struct WctSummary<'a> {
    run: RunInfo<'a>,
    window: &'a WindowSpec,
    function: &'a WindowSpec,
    window_norm_sq: f64,
    max_clamp_fraction: f64,
    checks: Vec<CheckResult>,
    passed: bool,
}

pub fn cmd_wct(cfg: &RunConfig) -> Result<bool> {
    let ctx = load_context(cfg)?;
    let p = cfg.params();
    let cache = AtomCache::new(cfg.window.sample(ctx.time_grid(), &p)?, &ctx)?;
    let f = cfg.function.sample(ctx.time_grid(), &p)?;
    let (plane, checks) = wct_checks(&f, &cache, &ctx)?;
    write_csv(&out_path(cfg, "wct_plane.csv"), &["x", "xi", "re", "im"], plane.rows().map(|(x, s, v)| vec![num(x), num(s), num(v.re), num(v.im)]))?;
    let side: PlaneSidecar = plane.sidecar();
    write_json(&out_path(cfg, "wct_plane.json"), &side)?;
    print_checks(&checks);
    let passed = checks.iter().all(|c| c.passed);
    let summary = WctSummary {
        run: info(cfg),
        window: &cfg.window,
        function: &cfg.function,
        window_norm_sq: cache.norm_sq(),
        max_clamp_fraction: cache.max_clamp_fraction(&ctx)?,
        checks,
        passed,
    };
    write_json(&out_path(cfg, "wct.json"), &summary)?;
    Ok(passed)
}

#[derive(Serialize)]
struct Schatten {
    s1: f64,
    s2: f64,
    s4: f64,
    s_inf: f64,
}

#[derive(Serialize)]
struct LocalizeSummary<'a> {
    run: RunInfo<'a>,
    window: &'a WindowSpec,
    symbol: &'a cherednik_tf::families::SymbolSpec,
    trace: [f64; 2],
    schatten: Schatten,
    min_hermitian_eigenvalue: f64,
    kernel_row_mass: f64,
    kernel_col_mass: f64,
    sv_decay_ratio: f64,
    tail_mass: f64,
}

pub fn cmd_localize(cfg: &RunConfig) -> Result<bool> {
    let ctx = load_context(cfg)?;
    let p = cfg.params();
    let cache = AtomCache::new(cfg.window.sample(ctx.time_grid(), &p)?, &ctx)?;
    let symbol = cfg.symbol.sample(ctx.time_grid(), ctx.xi_grid(), &p)?;
    let m = assemble(&symbol, &cache, &cache, &ctx)?;
    let sv = singular_values(&m)?;
    write_csv(&out_path(cfg, "localize_sv.csv"), &["index", "sigma"], sv.iter().enumerate().map(|(k, &s)| vec![k.to_string(), num(s)]))?;
    let tr = trace(&m);
    let km = kernel_masses(&m);
    let proxy = compactness_proxy(&sv);
    let s = |q: f64| schatten_from_values(&sv, q);
    let summary = LocalizeSummary {
        run: info(cfg),
        window: &cfg.window,
        symbol: &cfg.symbol,
        trace: [tr.re, tr.im],
        schatten: Schatten { s1: s(1.0)?, s2: s(2.0)?, s4: s(4.0)?, s_inf: s(f64::INFINITY)? },
        min_hermitian_eigenvalue: symmetrized_min_eigenvalue(&m)?,
        kernel_row_mass: km.row,
        kernel_col_mass: km.col,
        sv_decay_ratio: proxy.sv_decay_ratio,
        tail_mass: proxy.tail_mass,
    };
    println!(
        "trace {:.6e}{:+.3e}i  S1 {:.6e}  S2 {:.6e}  S∞ {:.6e}  tail mass {:.3e}",
        tr.re, tr.im, summary.schatten.s1, summary.schatten.s2, summary.schatten.s_inf, proxy.tail_mass
    );
    write_json(&out_path(cfg, "localize.json"), &summary)?;
    Ok(true)
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    run: RunInfo<'a>,
    window: &'a WindowSpec,
    suite: &'a [String],
    random_draws: usize,
    passed: bool,
    checks: Vec<CheckResult>,
    bounds: Vec<MemberReport>,
}

fn print_bound_table(members: &[MemberReport]) {
    println!("{:<18} {:<34} {:>12} {:>12} {:>10} {:>6}  ok", "member", "bound", "lhs", "rhs", "margin", "scale");
    for m in members {
        for r in &m.reports {
            println!("{:<18} {:<34} {:>12.4e} {:>12.4e} {:>10.3e} {:>6}  {}", m.label, r.name, r.lhs, r.rhs, r.margin, r.window_scale, if r.satisfied { "yes" } else { "NO" });
        }
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<bool> {
    let ctx = load_context(cfg)?;
    let env = Env::new(ctx, &cfg.window, &cfg.symbol, cfg.seed)?;
    let mut checks = Vec::new();
    let mut members = Vec::new();
    for name in &cfg.suite {
        log::info!("running check {name}");
        if name == "bounds" {
            let (m, c) = bounds(&env, cfg.random_draws)?;
            members = m;
            checks.push(c);
        } else {
            checks.push(run_check(name, &env)?);
        }
    }
    if !members.is_empty() {
        print_bound_table(&members);
    }
    print_checks(&checks);
    let passed = checks.iter().all(|c| c.passed);
    let summary = VerifySummary { run: info(cfg), window: &cfg.window, suite: &cfg.suite, random_draws: cfg.random_draws, passed, checks, bounds: members };
    write_json(&out_path(cfg, "verify.json"), &summary)?;
    println!("verify: {}", if passed { "all checks passed" } else { "FAILED" });
    Ok(passed)
}

/// Output files `report` looks for, in table order.
pub const REPORT_INPUTS: [&str; 5] = ["transform.json", "kernel.json", "wct.json", "localize.json", "verify.json"];

/// Scalar leaves of a JSON value keyed by dotted path. Arrays are skipped except for arrays of
/// check results, which are keyed by their `name`.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) if prefix.ends_with("checks") => {
            for it in items {
                if let Some(name) = it.get("name").and_then(Value::as_str) {
                    for field in ["value", "passed"] {
                        if let Some(x) = it.get(field) {
                            out.push((format!("{prefix}.{name}.{field}"), x.clone()));
                        }
                    }
                }
            }
        }
        Value::Array(_) => {}
        other => out.push((prefix.to_string(), other.clone())),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn cmd_report(cfg: &RunConfig) -> Result<bool> {
    let mut rows: Vec<(String, String, String)> = Vec::new();
    let mut found = 0;
    let mut summary = serde_json::Map::new();
    for name in REPORT_INPUTS {
        let path = out_path(cfg, name);
        if !Path::new(&path).exists() {
            continue;
        }
        found += 1;
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let mut leaves = Vec::new();
        flatten("", &v, &mut leaves);
        let source = name.trim_end_matches(".json");
        for (k, x) in &leaves {
            if !k.starts_with("run.") {
                rows.push((source.to_string(), k.clone(), cell(x)));
            }
        }
        summary.insert(source.to_string(), v);
    }
    if found == 0 {
        anyhow::bail!("no command outputs found in {}", cfg.output_dir.display());
    }
    for (s, k, v) in &rows {
        println!("{s:<10} {k:<48} {v}");
    }
    write_csv(&out_path(cfg, "summary.csv"), &["source", "metric", "value"], rows.iter().map(|(s, k, v)| vec![s.clone(), k.clone(), v.clone()]))?;
    write_json(&out_path(cfg, "summary.json"), &Value::Object(summary))?;
    Ok(true)
}
