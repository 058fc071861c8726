//! Command-line front end: argument parsing, config assembly, dispatch to
//! the computation modules, and CSV/JSON/manifest emission.
//!
//! Exit codes: 0 success, 2 validation failure, 3 budget exhaustion.

use crate::averaging::{diag_shell_variance, mean_var_f, shell_block, variance_target, AveragingKernel};
use crate::cache;
use crate::config::{parse_kernel, RunConfig};
use crate::counting::{DeviationEvaluator, Mollifier, SpectralEvaluator};
use crate::diophantine::{estimate_type, parse_shift, ShiftVector};
use crate::error::{Error, Result};
use crate::expsums::{mean_square_trace, rep_sums, ExpSumSeries};
use crate::lattice::{build_digest, build_radii, RadiiMultiset};
use crate::quadform::{parse_matrix_spec, QuadFormCtx};
use crate::theta::{
    bridge_check, msq_integral_u, phase_check, Generator, GroupPoint, ThetaProfile,
};
use clap::{Parser, Subcommand};
use serde_json::json;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

/// Lattice-point statistics of ellipsoids with diophantine centers.
#[derive(Parser, Debug)]
#[command(name = "ellipsum", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// key=value config file; flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// matrix spec: diag:a1,..,an | full:[[..],..] | qdiag:p/q,.. | qfull:[[p/q,..],..]
    #[arg(long, global = true)]
    matrix: Option<String>,
    /// center spec: comma-separated tokens (decimal, sqrtK, sqrtK-1, p/q)
    #[arg(long, global = true)]
    alpha: Option<String>,
    /// shell truncation for exponential-sum series
    #[arg(long, global = true)]
    pmax: Option<u64>,
    /// radius bound for the lattice radii multiset
    #[arg(long, global = true)]
    rmax: Option<f64>,
    /// averaging scale T
    #[arg(long, global = true)]
    t: Option<f64>,
    /// spectral smoothing parameter K
    #[arg(long, global = true)]
    k: Option<u64>,
    /// spectral truncation exponent ζ ∈ (0,2]
    #[arg(long, global = true)]
    zeta: Option<f64>,
    /// shell-width exponent γ ∈ (0,1): ε = T^{−γ}
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// variance-series truncation P
    #[arg(long, global = true)]
    p: Option<u64>,
    /// explicit shell half-width ε (overrides γ)
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// denominator bound for diophantine type estimation
    #[arg(long, global = true)]
    qmax: Option<u64>,
    /// averaging kernel spec: bump:c0,c1
    #[arg(long, global = true)]
    kernel: Option<String>,
    /// output file (CSV or JSON); stdout when omitted
    #[arg(long, global = true)]
    out: Option<String>,
    /// cache directory (ELLIPSUM_CACHE env var overrides)
    #[arg(long, global = true)]
    cache_dir: Option<String>,
    /// worker thread count
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// accept limit theorems whose shell-sum hypothesis is unproven for
    /// non-diagonal forms
    #[arg(long, global = true)]
    assume_property_1: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Estimate the diophantine type of the center (JSON).
    /// Output: {alpha, q_max, kappa_hat, worst_q, worst_dist, rational_hit, norm}
    Dio,
    /// Exponential-sum series r(p). CSV: p,r_re,r_im,r_abs2,r_cum
    Repsums,
    /// Mean-square trace R(N)/N^{n/2} vs |E^M|. CSV: n,ratio,target
    Meansq,
    /// Counting function and deviation on a t-grid. CSV: t,count,f
    Count,
    /// Deviation vs spectral approximation F^{K,0}. CSV: t,f,f_k0,diff
    Fdev,
    /// ⟨F⟩_T and ⟨F²⟩_T vs the series prediction.
    /// CSV: t_scale,mean_f,mean_f_err,var_f,var_f_err,target,target_tail,ratio
    Variance,
    /// Shell statistics: ε²-block mass and the diagonal mollified shell
    /// variance. CSV: statistic,value,target
    Shell,
    /// Theta phase identities and the exact mean-square identity (JSON).
    ThetaCheck,
    /// Inspect or clear the binary cache.
    Cache {
        #[command(subcommand)]
        action: CacheCmd,
    },
}

#[derive(Subcommand, Debug)]
enum CacheCmd {
    /// List cache entries (JSON).
    Inspect,
    /// Remove all cache entries.
    Clear,
}

/// 17 significant digits: round-trippable binary64 text.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn assemble_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::parse(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    cfg.command = match &cli.command {
        Cmd::Dio => "dio",
        Cmd::Repsums => "repsums",
        Cmd::Meansq => "meansq",
        Cmd::Count => "count",
        Cmd::Fdev => "fdev",
        Cmd::Variance => "variance",
        Cmd::Shell => "shell",
        Cmd::ThetaCheck => "theta-check",
        Cmd::Cache { .. } => "cache",
    }
    .to_string();
    if let Some(v) = &cli.matrix {
        cfg.matrix = v.clone();
    }
    if let Some(v) = &cli.alpha {
        cfg.alpha = v.clone();
    }
    if let Some(v) = cli.pmax {
        cfg.pmax = v;
    }
    if let Some(v) = cli.rmax {
        cfg.rmax = v;
    }
    if let Some(v) = cli.t {
        cfg.t = v;
    }
    if let Some(v) = cli.k {
        cfg.k = v;
    }
    if let Some(v) = cli.zeta {
        cfg.zeta = v;
    }
    if let Some(v) = cli.gamma {
        cfg.gamma = v;
    }
    if let Some(v) = cli.p {
        cfg.p = v;
    }
    if let Some(v) = cli.eps {
        cfg.eps = v;
    }
    if let Some(v) = cli.qmax {
        cfg.qmax = v;
    }
    if let Some(v) = &cli.kernel {
        cfg.kernel = v.clone();
    }
    if let Some(v) = &cli.out {
        cfg.out = v.clone();
    }
    if let Some(v) = &cli.cache_dir {
        cfg.cache_dir = v.clone();
    }
    if let Some(v) = cli.workers {
        cfg.workers = v;
    }
    if cli.assume_property_1 {
        cfg.assume_property_1 = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

struct RunOutput {
    /// Main artifact text (CSV or JSON).
    body: String,
    /// Cache digests consumed or produced.
    cache_digests: Vec<String>,
    /// Per-result quadrature error estimates, when available.
    est_errors: Vec<f64>,
}

impl RunOutput {
    fn new(body: String) -> RunOutput {
        RunOutput {
            body,
            cache_digests: Vec::new(),
            est_errors: Vec::new(),
        }
    }
}

/// Caching is active only when a directory was requested explicitly
/// (config/flag or the ELLIPSUM_CACHE env var); otherwise results are
/// recomputed and nothing is written.
fn cache_dir(cfg: &RunConfig) -> Option<PathBuf> {
    if std::env::var("ELLIPSUM_CACHE").map_or(false, |v| !v.is_empty()) || !cfg.cache_dir.is_empty()
    {
        let configured = if cfg.cache_dir.is_empty() {
            None
        } else {
            Some(PathBuf::from(&cfg.cache_dir))
        };
        Some(cache::resolve_cache_dir(configured.as_deref()))
    } else {
        None
    }
}

fn load_or_build_series(
    cfg: &RunConfig,
    ctx: &QuadFormCtx,
    alpha: &ShiftVector,
    p_max: u64,
    out: &mut RunOutput,
) -> Result<ExpSumSeries> {
    let dir = cache_dir(cfg);
    if let Some(dir) = &dir {
        let path = cache::series_path(dir, ctx, &alpha.spec, p_max);
        if path.exists() {
            // digest mismatch or corruption falls through to recompute
            if let Ok(series) = cache::read_series(&path) {
                let expected = build_digest(ctx, &alpha.spec, p_max as f64);
                if series.matrix_digest == expected
                    && series.p_max == p_max
                    && series.alpha_spec == alpha.spec
                {
                    out.cache_digests
                        .push(path.file_name().unwrap().to_string_lossy().into_owned());
                    return Ok(series);
                }
            }
        }
    }
    let series = rep_sums(ctx, alpha, p_max)?;
    if let Some(dir) = &dir {
        let path = cache::write_series(dir, ctx, &series)?;
        out.cache_digests
            .push(path.file_name().unwrap().to_string_lossy().into_owned());
    }
    Ok(series)
}

fn load_or_build_radii(
    cfg: &RunConfig,
    ctx: &QuadFormCtx,
    alpha: &ShiftVector,
    r_max: f64,
    out: &mut RunOutput,
) -> Result<RadiiMultiset> {
    let dir = cache_dir(cfg);
    if let Some(dir) = &dir {
        let path = cache::radii_path(dir, ctx, &alpha.spec, r_max);
        if path.exists() {
            if let Ok(rm) = cache::read_radii(&path) {
                let expected = build_digest(ctx, &alpha.spec, r_max);
                if rm.ctx_digest == expected && rm.r_max == r_max {
                    out.cache_digests
                        .push(path.file_name().unwrap().to_string_lossy().into_owned());
                    return Ok(rm);
                }
            }
        }
    }
    let rm = build_radii(ctx, alpha, r_max)?;
    if let Some(dir) = &dir {
        let path = cache::write_radii(dir, ctx, &alpha.spec, &rm)?;
        out.cache_digests
            .push(path.file_name().unwrap().to_string_lossy().into_owned());
    }
    Ok(rm)
}

fn is_diagonal(ctx: &QuadFormCtx) -> bool {
    (0..ctx.n).all(|i| (0..ctx.n).all(|j| i == j || ctx.m[i * ctx.n + j] == 0))
}

/// The variance-type limit theorems rest on a shell-sum hypothesis proven
/// for diagonal forms only; extending them needs an explicit opt-in.
fn guard_property_1(cfg: &RunConfig, ctx: &QuadFormCtx) -> Result<()> {
    if !is_diagonal(ctx) && !cfg.assume_property_1 {
        return Err(Error::AssumePropertyRequired);
    }
    Ok(())
}

fn log_checkpoints(p_max: u64, count: usize) -> Vec<u64> {
    let mut cps: Vec<u64> = (1..=count)
        .map(|j| (p_max as f64).powf(j as f64 / count as f64).round() as u64)
        .map(|n| n.clamp(1, p_max))
        .collect();
    cps.dedup();
    cps
}

fn cmd_dio(cfg: &RunConfig) -> Result<RunOutput> {
    let n = cfg.alpha.split(',').count();
    let alpha = parse_shift(&cfg.alpha, n)?;
    let report = estimate_type(&alpha, cfg.qmax);
    let body = serde_json::to_string_pretty(&json!({
        "alpha": alpha.spec,
        "q_max": report.q_max,
        "kappa_hat": report.kappa_hat,
        "worst_q": report.worst_q,
        "worst_dist": report.worst_dist,
        "rational_hit": report.rational_hit,
        "norm": report.norm,
    }))
    .expect("json");
    Ok(RunOutput::new(body))
}

fn cmd_repsums(cfg: &RunConfig, ctx: &QuadFormCtx) -> Result<RunOutput> {
    let alpha = parse_shift(&cfg.alpha, ctx.n)?;
    let mut out = RunOutput::new(String::new());
    let series = load_or_build_series(cfg, ctx, &alpha, cfg.pmax, &mut out)?;
    let stride = (cfg.pmax / 10_000).max(1);
    let mut body = String::from("p,r_re,r_im,r_abs2,r_cum\n");
    for p in (stride..=cfg.pmax).step_by(stride as usize).chain(
        (cfg.pmax % stride != 0).then_some(cfg.pmax),
    ) {
        let r = series.r_at(p);
        let _ = writeln!(
            body,
            "{p},{},{},{},{}",
            fmt(r.re),
            fmt(r.im),
            fmt(r.norm_sqr()),
            fmt(series.r_cum_at(p))
        );
    }
    out.body = body;
    Ok(out)
}

fn cmd_meansq(cfg: &RunConfig, ctx: &QuadFormCtx) -> Result<RunOutput> {
    let alpha = parse_shift(&cfg.alpha, ctx.n)?;
    let mut out = RunOutput::new(String::new());
    let series = load_or_build_series(cfg, ctx, &alpha, cfg.pmax, &mut out)?;
    let rows = mean_square_trace(&series, ctx, &log_checkpoints(cfg.pmax, 40))?;
    let mut body = String::from("n,ratio,target\n");
    for row in rows {
        let _ = writeln!(body, "{},{},{}", row.n_checkpoint, fmt(row.ratio), fmt(row.target));
    }
    out.body = body;
    Ok(out)
}

fn cmd_count(cfg: &RunConfig, ctx: &QuadFormCtx) -> Result<RunOutput> {
    let alpha = parse_shift(&cfg.alpha, ctx.n)?;
    let r_max = cfg.rmax.max(cfg.t);
    let mut out = RunOutput::new(String::new());
    let rm = load_or_build_radii(cfg, ctx, &alpha, r_max, &mut out)?;
    let ev = DeviationEvaluator::new(ctx, &rm);
    let samples = 512usize;
    let mut body = String::from("t,count,f\n");
    for j in 1..=samples {
        let t = cfg.t * j as f64 / samples as f64;
        let _ = writeln!(body, "{},{},{}", fmt(t), ev.count(t)?, fmt(ev.f(t)?));
    }
    out.body = body;
    Ok(out)
}

fn cmd_fdev(cfg: &RunConfig, ctx: &QuadFormCtx) -> Result<RunOutput> {
    guard_property_1(cfg, ctx)?;
    let alpha = parse_shift(&cfg.alpha, ctx.n)?;
    let (c0, c1) = parse_kernel(&cfg.kernel)?;
    let r_max = cfg.rmax.max(c1 * cfg.t);
    let mut out = RunOutput::new(String::new());
    let rm = load_or_build_radii(cfg, ctx, &alpha, r_max, &mut out)?;
    let ev = DeviationEvaluator::new(ctx, &rm);
    let adj_ctx = ctx.adjugate_ctx()?;
    let k = cfg.k as f64;
    let p_cut = k.powf(2.0 + cfg.zeta).floor() as u64;
    let series = load_or_build_series(cfg, &adj_ctx, &alpha, p_cut, &mut out)?;
    let spec = SpectralEvaluator::new(ctx, &series, k, cfg.zeta, &Mollifier::Gaussian)?;
    let samples = 512usize;
    let mut body = String::from("t,f,f_k0,diff\n");
    for j in 0..samples {
        let t = c0 * cfg.t + (c1 - c0) * cfg.t * (j as f64 + 0.5) / samples as f64;
        let f = ev.f(t)?;
        let fk = spec.f_k0(t);
        let _ = writeln!(body, "{},{},{},{}", fmt(t), fmt(f), fmt(fk), fmt(f - fk));
    }
    out.body = body;
    Ok(out)
}

fn cmd_variance(cfg: &RunConfig, ctx: &QuadFormCtx) -> Result<RunOutput> {
    guard_property_1(cfg, ctx)?;
    let alpha = parse_shift(&cfg.alpha, ctx.n)?;
    let (c0, c1) = parse_kernel(&cfg.kernel)?;
    let kernel = AveragingKernel::bump_on(c0, c1);
    let r_max = cfg.rmax.max(c1 * cfg.t * 1.001);
    let mut out = RunOutput::new(String::new());
    let rm = load_or_build_radii(cfg, ctx, &alpha, r_max, &mut out)?;
    let ev = DeviationEvaluator::new(ctx, &rm);
    let (mean, var) = mean_var_f(&ev, cfg.t, &kernel)?;
    let adj_ctx = ctx.adjugate_ctx()?;
    let adj_series = load_or_build_series(cfg, &adj_ctx, &alpha, cfg.p, &mut out)?;
    let (target, tail) = variance_target(ctx, &adj_series, cfg.p)?;
    let mut body = String::from(
        "t_scale,mean_f,mean_f_err,var_f,var_f_err,target,target_tail,ratio\n",
    );
    let _ = writeln!(
        body,
        "{},{},{},{},{},{},{},{}",
        fmt(cfg.t),
        fmt(mean.value),
        fmt(mean.est_error),
        fmt(var.value),
        fmt(var.est_error),
        fmt(target),
        fmt(tail),
        fmt(var.value / target)
    );
    out.est_errors = vec![mean.est_error, var.est_error];
    out.body = body;
    Ok(out)
}

fn cmd_shell(cfg: &RunConfig, ctx: &QuadFormCtx) -> Result<RunOutput> {
    guard_property_1(cfg, ctx)?;
    let alpha = parse_shift(&cfg.alpha, ctx.n)?;
    let mut out = RunOutput::new(String::new());
    let eps = cfg.eps;

    // ε²-block mass of the series for M itself over [1, 4]
    let p_need = (4.0 / (eps * eps)).ceil() as u64;
    let series = load_or_build_series(cfg, ctx, &alpha, p_need.max(cfg.pmax), &mut out)?;
    let (block, block_target) = shell_block(ctx, &series, eps, 1.0, 4.0)?;

    // diagonal mollified shell variance vs the limit n|E^M|
    let adj_ctx = ctx.adjugate_ctx()?;
    let k = cfg.k as f64;
    let p_cut = k.powf(2.0 + cfg.zeta).floor() as u64;
    let adj_series = load_or_build_series(cfg, &adj_ctx, &alpha, p_cut, &mut out)?;
    let diag = diag_shell_variance(ctx, &adj_series, eps, k, cfg.zeta, &Mollifier::Gaussian)?;
    let diag_target = ctx.n as f64 * ctx.volume;

    let mut body = String::from("statistic,value,target\n");
    let _ = writeln!(body, "block_1_4,{},{}", fmt(block), fmt(block_target));
    let _ = writeln!(body, "diag_variance,{},{}", fmt(diag), fmt(diag_target));
    out.body = body;
    Ok(out)
}

/// Deterministic splitmix64 stream mapped to [0, 1); seeded sampling for
/// the self-check command without a runtime RNG dependency.
struct Stream(u64);

impl Stream {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }
    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

fn cmd_theta_check(cfg: &RunConfig) -> Result<RunOutput> {
    let gaussian = ThetaProfile::Gaussian { scale: 1.0 };
    let mut st = Stream(42);
    let random_point = |st: &mut Stream| {
        let mut g = GroupPoint::base(2);
        for k in 0..2 {
            g.z[k] = (st.range(-0.5, 0.5), st.range(0.6, 1.6));
            g.x[k] = st.range(-0.5, 0.5);
            g.y[k] = st.range(-0.5, 0.5);
        }
        g.t = st.range(-1.0, 1.0);
        g
    };
    let (mut err_u, mut err_m, mut err_f) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..5 {
        let g = random_point(&mut st);
        for k in 0..2 {
            err_u = err_u.max(phase_check(&gaussian, &g, &Generator::U(k), 10.0)?.2);
            err_f = err_f.max(phase_check(&gaussian, &g, &Generator::F(k), 10.0)?.2);
        }
        err_m = err_m.max(
            phase_check(&gaussian, &g, &Generator::M(vec![1, -2], vec![3, 1]), 10.0)?.2,
        );
    }
    let mut err_msq = 0.0f64;
    for _ in 0..20 {
        let a = vec![
            st.range(1.0, 4.0).floor() as i64,
            st.range(1.0, 4.0).floor() as i64,
        ];
        let v = st.range(0.01, 0.5);
        let x = vec![st.range(-1.0, 1.0), st.range(-1.0, 1.0)];
        let (lhs, rhs) = msq_integral_u(&a, v, &x)?;
        err_msq = err_msq.max((lhs - rhs).abs());
    }
    let alpha = parse_shift(&cfg.alpha, 2).unwrap_or_else(|_| ShiftVector::zero(2));
    let bridge = bridge_check(&[1, 1], &alpha, &[1e-2], 20.0)?;
    let body = serde_json::to_string_pretty(&json!({
        "max_phase_err_u": err_u,
        "max_phase_err_m": err_m,
        "max_phase_err_f": err_f,
        "max_msq_err": err_msq,
        "bridge": bridge,
    }))
    .expect("json");
    Ok(RunOutput::new(body))
}

fn cmd_cache(cfg: &RunConfig, action: &CacheCmd) -> Result<RunOutput> {
    let dir = cache_dir(cfg).unwrap_or_else(|| cache::resolve_cache_dir(None));
    match action {
        CacheCmd::Inspect => {
            let entries = cache::list_entries(&dir)?;
            let rows: Vec<_> = entries
                .iter()
                .map(|(name, size)| json!({"file": name, "bytes": size}))
                .collect();
            Ok(RunOutput::new(
                serde_json::to_string_pretty(&json!({
                    "dir": dir.to_string_lossy(),
                    "entries": rows,
                }))
                .expect("json"),
            ))
        }
        CacheCmd::Clear => {
            let removed = cache::clear_entries(&dir)?;
            Ok(RunOutput::new(
                serde_json::to_string_pretty(&json!({"removed": removed})).expect("json"),
            ))
        }
    }
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<RunOutput> {
    match &cli.command {
        Cmd::Dio => cmd_dio(cfg),
        Cmd::ThetaCheck => cmd_theta_check(cfg),
        Cmd::Cache { action } => cmd_cache(cfg, action),
        other => {
            let parsed = parse_matrix_spec(&cfg.matrix)?;
            let ctx = parsed.ctx;
            match other {
                Cmd::Repsums => cmd_repsums(cfg, &ctx),
                Cmd::Meansq => cmd_meansq(cfg, &ctx),
                Cmd::Count => cmd_count(cfg, &ctx),
                Cmd::Fdev => cmd_fdev(cfg, &ctx),
                Cmd::Variance => cmd_variance(cfg, &ctx),
                Cmd::Shell => cmd_shell(cfg, &ctx),
                _ => unreachable!(),
            }
        }
    }
}

fn emit(cfg: &RunConfig, out: &RunOutput, wall_s: f64) -> Result<()> {
    let manifest = serde_json::to_string_pretty(&json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config": cfg.canonical(),
        "cache_digests": out.cache_digests,
        "wall_time_s": wall_s,
        "est_errors": out.est_errors,
    }))
    .expect("json");
    if cfg.out.is_empty() {
        print!("{}", out.body);
        if !out.body.ends_with('\n') {
            println!();
        }
        eprintln!("{manifest}");
    } else {
        std::fs::write(&cfg.out, &out.body)?;
        std::fs::write(format!("{}.manifest.json", cfg.out), manifest)?;
    }
    Ok(())
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::BudgetExceeded { .. } | Error::SearchSpaceTooLarge { .. } => 3,
        _ => 2,
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    let cfg = match assemble_config(&cli) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("error: {err}");
            return 2;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
    {
        Ok(pool) => pool,
        Err(err) => {
            eprintln!("error: worker pool: {err}");
            return 2;
        }
    };
    let start = Instant::now();
    let result = pool.install(|| dispatch(&cli, &cfg));
    match result {
        Ok(out) => {
            if let Err(err) = emit(&cfg, &out, start.elapsed().as_secs_f64()) {
                eprintln!("error: {err}");
                return 2;
            }
            0
        }
        Err(err) => {
            eprintln!("error [{}]: {err}", cfg.command);
            if matches!(err, Error::AssumePropertyRequired) {
                eprintln!(
                    "hint: the shell-sum hypothesis behind this limit theorem is proven \
                     for diagonal forms only; pass --assume-property-1 to proceed anyway"
                );
            }
            exit_code(&err)
        }
    }
}

/// Manifest file path for a given output path.
pub fn manifest_path(out: &str) -> String {
    format!("{out}.manifest.json")
}
