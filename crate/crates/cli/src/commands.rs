//! Subcommands and their argument parsing.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use dopkit::ensembles::batch;
use dopkit::equilibrium::{SegmentKind, DEFAULT_GRID};
use dopkit::harness::{band_check, hard_edge_check, saturated_check, Endpoint};
use dopkit::kernels::{cd_kernel, gap_diagnostics, sine_compare};
use dopkit::nodes::{build_nodes, DensityShape, NodeDensity};
use dopkit::orthopoly::{build_basis_ladder, locate_zeros};
use dopkit::tiling::{
    column_ensemble, frozen_boundary, macmahon, one_point_profile, particle_profile, Hexagon,
};
use dopkit::Fraction;

use crate::accept::{self, Suite};
use crate::config::{parse_list, resolve_bits, RunConfig};
use crate::output::{num, write_report, write_table, Format, Sink, Table};
use crate::pipeline::{equilibrium, prepare, weights};
use crate::{CliError, EXIT_CONFIG, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "dopkit", version, about = "Discrete orthogonal polynomial toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every command that reads a weight configuration.
#[derive(Debug, Args, Clone)]
pub struct Common {
    /// JSON weight configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Node counts, comma separated; overrides the configuration
    #[arg(long = "N", value_name = "N")]
    pub n: Option<String>,
    /// Ratio c = k/N as "p/q"
    #[arg(long)]
    pub c: Option<Fraction>,
    /// Equilibrium grid size M
    #[arg(long)]
    pub grid: Option<usize>,
    /// Working precision in bits
    #[arg(long)]
    pub bits: Option<u32>,
    /// Output: "csv", "json", or a file path
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quantized nodes of a density
    Nodes {
        /// "uniform" or comma-separated polynomial coefficients
        #[arg(long, default_value = "uniform")]
        density: String,
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long = "N", value_name = "N")]
        n: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// Evaluate π_k and p_k on a grid
    Poly {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: usize,
        /// a:b:n, defaults to the nodes
        #[arg(long)]
        eval_grid: Option<String>,
    },
    /// Zeros of π_k and their offsets from the nodes
    Zeros {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: usize,
    },
    /// Constrained equilibrium measure and its classification
    Eqm {
        #[command(flatten)]
        common: Common,
    },
    /// Christoffel–Darboux kernel statistics
    Kernel {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: usize,
        /// Any of diag, sine, gaps
        #[arg(long, default_value = "diag")]
        stats: String,
    },
    /// Exact samples of the k-point ensemble
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        n_samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Lozenge tilings of a hexagon
    Hexagon(HexagonArgs),
    /// Asymptotic structure checks across several N
    Verify {
        #[command(flatten)]
        common: Common,
        /// Any of band, saturated, hardedge
        #[arg(long, default_value = "band,saturated,hardedge")]
        checks: String,
        /// Keep the sampled profiles in the report
        #[arg(long)]
        samples: bool,
    },
    /// Run the acceptance criteria
    Accept {
        #[arg(long, default_value = "small")]
        suite: Suite,
        #[arg(long, default_value_t = accept::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct HexagonArgs {
    #[arg(long)]
    pub a: Option<u64>,
    #[arg(long)]
    pub b: Option<u64>,
    #[arg(long)]
    pub c: Option<u64>,
    /// Vertical line, 1..a+b−1
    #[arg(long)]
    pub m: Option<u64>,
    /// One-point hole and particle probabilities on line m
    #[arg(long)]
    pub profile: bool,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Scale n of the hexagon (αn, βn, γn)
    #[arg(long)]
    pub n: Option<u64>,
    /// Band edges on line τn against the inscribed ellipse
    #[arg(long)]
    pub boundary: bool,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub out: Option<String>,
}

/// Parses and runs; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("dopkit: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Nodes {
            density,
            a,
            b,
            n,
            out,
        } => nodes(&density, a, b, n, out.as_deref()),
        Command::Poly {
            common,
            k,
            eval_grid,
        } => poly(&common, k, eval_grid.as_deref()),
        Command::Zeros { common, k } => zeros(&common, k),
        Command::Eqm { common } => eqm(&common),
        Command::Kernel { common, k, stats } => kernel(&common, k, &stats),
        Command::Sample {
            common,
            k,
            n_samples,
            seed,
        } => sample(&common, k, n_samples, seed),
        Command::Hexagon(h) => hexagon(&h),
        Command::Verify {
            common,
            checks,
            samples,
        } => verify(&common, &checks, samples),
        Command::Accept { suite, seed, out } => run_accept(suite, seed, out.as_deref()),
    }
}

/// The configuration file merged with command-line overrides.
fn resolve(common: &Common) -> Result<RunConfig, CliError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(n) = &common.n {
        cfg.n = parse_list(n)?;
    }
    if common.c.is_some() {
        cfg.c = common.c;
    }
    if common.grid.is_some() {
        cfg.grid = common.grid;
    }
    cfg.bits = Some(resolve_bits(common.bits.or(cfg.bits))?);
    if cfg.n.contains(&0) {
        return Err(CliError::Config("N must be positive".into()));
    }
    Ok(cfg)
}

fn header(command: &str, cfg: &impl serde::Serialize, params: Value) -> Value {
    json!({ "command": command, "run": cfg, "params": params, "version": env!("CARGO_PKG_VERSION") })
}

fn density_from_flag(s: &str, a: f64, b: f64) -> Result<NodeDensity, CliError> {
    let shape = if s == "uniform" {
        DensityShape::Uniform
    } else {
        let coeffs: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
        DensityShape::Polynomial(
            coeffs.map_err(|_| CliError::Config(format!("density {s:?} is neither uniform nor coefficients")))?,
        )
    };
    Ok(NodeDensity::new(a, b, shape)?)
}

fn nodes(density: &str, a: f64, b: f64, n: usize, out: Option<&str>) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Config("N must be positive".into()));
    }
    let ns = build_nodes(&density_from_flag(density, a, b)?, n)?;
    let mut t = Table::new(&["j", "x"]);
    for (j, x) in ns.nodes().iter().enumerate() {
        t.push(vec![j.to_string(), num(*x)]);
    }
    let params = json!({ "density": density, "a": a, "b": b, "N": n });
    write_table(&Sink::parse(out, Format::Csv), &header("nodes", &params, Value::Null), &t)
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::Config(format!("grid {s:?} must be a:b:n"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

fn check_degree(k: usize, n: usize) -> Result<(), CliError> {
    if k >= n {
        return Err(CliError::Config(format!("degree {k} must be below N = {n}")));
    }
    Ok(())
}

fn poly(common: &Common, k: usize, grid: Option<&str>) -> Result<(), CliError> {
    let cfg = resolve(common)?;
    let n = cfg.single_n()?;
    check_degree(k, n)?;
    let lw = weights(&cfg.spec()?, &cfg.density()?, n)?;
    let basis = build_basis_ladder(&lw, k, cfg.bits.unwrap_or_default())?;
    let zs = match grid {
        Some(g) => parse_grid(g)?,
        None => basis.nodes().to_vec(),
    };
    let lead = basis.log_lead(k);
    let mut t = Table::new(&["z", "log_abs_pi", "sign", "log_abs_p"]);
    for z in zs {
        let (l, s) = basis.evaluate_log(k, z, true)?;
        t.push(vec![num(z), num(l), s.to_string(), num(l + lead)]);
    }
    let params = json!({ "k": k, "eval_grid": grid, "bits_used": basis.bits() });
    write_table(&Sink::parse(common.out.as_deref(), Format::Csv), &header("poly", &cfg, params), &t)
}

fn zeros(common: &Common, k: usize) -> Result<(), CliError> {
    let cfg = resolve(common)?;
    let n = cfg.single_n()?;
    check_degree(k, n)?;
    if k == 0 {
        return Err(CliError::Config("degree 0 has no zeros".into()));
    }
    let lw = weights(&cfg.spec()?, &cfg.density()?, n)?;
    let basis = build_basis_ladder(&lw, k, cfg.bits.unwrap_or_default())?;
    let zs = locate_zeros(&basis, k)?;
    let mut t = Table::new(&["i", "zero", "nearest_node", "offset"]);
    for (i, z) in zs.zeros().iter().enumerate() {
        t.push(vec![
            i.to_string(),
            num(*z),
            zs.nearest[i].to_string(),
            num(zs.offsets[i]),
        ]);
    }
    let params = json!({
        "k": k,
        "bits_used": basis.bits(),
        "crowded_intervals": zs.crowded_intervals,
        "outside": zs.outside,
    });
    write_table(&Sink::parse(common.out.as_deref(), Format::Csv), &header("zeros", &cfg, params), &t)
}

fn eqm(common: &Common) -> Result<(), CliError> {
    let cfg = resolve(common)?;
    let n = cfg.single_n()?;
    let c = cfg.c.ok_or_else(|| CliError::Config("the ratio c is required".into()))?;
    let grid = cfg.grid.unwrap_or(DEFAULT_GRID);
    let (e, cls) = equilibrium(&cfg.spec()?, &cfg.density()?, n, c, grid)?;
    let sink = Sink::parse(common.out.as_deref(), Format::Json);
    let head = header("eqm", &cfg, json!({ "grid": grid }));
    match sink.format() {
        Format::Csv => {
            let mut t = Table::new(&["x", "psi", "cap", "derivative"]);
            for i in 0..e.grid.len() {
                let h = e.edges[i + 1] - e.edges[i];
                t.push(vec![num(e.grid[i]), num(e.psi[i]), num(e.cap[i] / h), num(e.derivative[i])]);
            }
            write_table(&sink, &head, &t)
        }
        Format::Json => {
            let report = json!({
                "ell": e.ell,
                "kkt_residual": e.kkt_residual,
                "iterations": e.iterations,
                "total_mass": e.total_mass(),
                "case_one": cls.is_case_one(),
                "segments": cls.segments,
                "assumption_violations": cls.assumption_violations,
                "grid": e.grid,
                "psi": e.psi,
            });
            write_report(&sink, &head, &report)
        }
    }
}

fn stats_list(s: &str, allowed: &[&str]) -> Result<Vec<String>, CliError> {
    let out: Vec<String> = s.split(',').map(|t| t.trim().to_string()).collect();
    for t in &out {
        if !allowed.contains(&t.as_str()) {
            return Err(CliError::Config(format!("unknown item {t:?} (allowed: {})", allowed.join(", "))));
        }
    }
    Ok(out)
}

fn kernel(common: &Common, k: usize, stats: &str) -> Result<(), CliError> {
    let stats = stats_list(stats, &["diag", "sine", "gaps"])?;
    let cfg = resolve(common)?;
    let n = cfg.single_n()?;
    check_degree(k, n)?;
    if k == 0 {
        return Err(CliError::Config("kernel rank must be positive".into()));
    }
    let spec = cfg.spec()?;
    let density = cfg.density()?;
    let lw = weights(&spec, &density, n)?;
    let basis = build_basis_ladder(&lw, n - 1, cfg.bits.unwrap_or_default())?;
    let kk = cd_kernel(&basis, k)?;
    let mut report = serde_json::Map::new();
    report.insert("trace".into(), json!(kk.trace()));
    report.insert("projection_defect".into(), json!(kk.projection_defect()));
    report.insert("cd_deviation".into(), json!(kk.cd_deviation));
    if stats.iter().any(|s| s == "diag") {
        let d: Vec<f64> = (0..n).map(|i| kk.diag(i)).collect();
        report.insert("diag".into(), json!(d));
    }
    let c = Fraction::new(k as u64, n as u64)?;
    if stats.iter().any(|s| s == "sine" || s == "gaps") {
        let grid = cfg.grid.unwrap_or(DEFAULT_GRID);
        let (e, cls) = equilibrium(&spec, &density, n, c, grid)?;
        if stats.iter().any(|s| s == "sine") {
            let x = kk.nodes();
            let mut sine = Vec::new();
            for band in cls.of_kind(SegmentKind::Band) {
                let mid = 0.5 * (band.left + band.right);
                let center = (0..n)
                    .min_by(|&i, &j| (x[i] - mid).abs().total_cmp(&(x[j] - mid).abs()))
                    .unwrap_or(0);
                let window = 10.min(center).min(n - 1 - center);
                match sine_compare(&kk, &e, center, window) {
                    Ok(s) => sine.push(json!(s)),
                    Err(err) => sine.push(json!({ "center": center, "error": err.to_string() })),
                }
            }
            report.insert("sine".into(), json!(sine));
        }
        if stats.iter().any(|s| s == "gaps") {
            report.insert("gaps".into(), json!(gap_diagnostics(&kk, &e)));
        }
    }
    let params = json!({ "k": k, "stats": stats, "bits_used": basis.bits() });
    write_report(
        &Sink::parse(common.out.as_deref(), Format::Json),
        &header("kernel", &cfg, params),
        &Value::Object(report),
    )
}

fn sample(common: &Common, k: usize, count: usize, seed: Option<u64>) -> Result<(), CliError> {
    let mut cfg = resolve(common)?;
    cfg.seed = seed.or(cfg.seed).or(Some(accept::DEFAULT_SEED));
    let n = cfg.single_n()?;
    check_degree(k, n)?;
    if k == 0 {
        return Err(CliError::Config("k must be positive".into()));
    }
    let lw = weights(&cfg.spec()?, &cfg.density()?, n)?;
    let basis = build_basis_ladder(&lw, n - 1, cfg.bits.unwrap_or_default())?;
    let kk = cd_kernel(&basis, k)?;
    let samples = batch(&kk, count, cfg.seed.unwrap_or_default())?;
    let mut t = Table::new(&["sample", "index", "x"]);
    for (s, conf) in samples.iter().enumerate() {
        for &i in &conf.indices {
            t.push(vec![s.to_string(), i.to_string(), num(kk.nodes()[i])]);
        }
    }
    let params = json!({ "k": k, "n_samples": count, "seed": cfg.seed });
    write_table(&Sink::parse(common.out.as_deref(), Format::Csv), &header("sample", &cfg, params), &t)
}

fn hexagon(h: &HexagonArgs) -> Result<(), CliError> {
    if h.boundary {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| CliError::Config(format!("--boundary needs --{name}")))
        };
        let (alpha, beta, gamma) = (need(h.alpha, "alpha")?, need(h.beta, "beta")?, need(h.gamma, "gamma")?);
        let tau = need(h.tau, "tau")?;
        let n = h.n.ok_or_else(|| CliError::Config("--boundary needs --n".into()))?;
        let grid = h.grid.unwrap_or(DEFAULT_GRID);
        let f = frozen_boundary(alpha, beta, gamma, tau, n, grid)?;
        let params = json!({ "alpha": alpha, "beta": beta, "gamma": gamma, "tau": tau, "n": n, "grid": grid });
        return write_report(&Sink::parse(h.out.as_deref(), Format::Json), &header("hexagon", &params, Value::Null), &f);
    }
    let need = |v: Option<u64>, name: &str| v.ok_or_else(|| CliError::Config(format!("--{name} is required")));
    let hex = Hexagon::new(need(h.a, "a")?, need(h.b, "b")?, need(h.c, "c")?)?;
    let count = macmahon(hex);
    let params = json!({ "a": hex.a, "b": hex.b, "c": hex.c, "m": h.m, "tilings": count.to_string() });
    let sink = Sink::parse(h.out.as_deref(), Format::Csv);
    if !h.profile {
        let mut t = Table::new(&["a", "b", "c", "tilings"]);
        t.push(vec![hex.a.to_string(), hex.b.to_string(), hex.c.to_string(), count.to_string()]);
        return write_table(&sink, &header("hexagon", &params, Value::Null), &t);
    }
    let col = column_ensemble(hex, need(h.m, "m")?)?;
    let holes = one_point_profile(&col)?;
    let particles = particle_profile(&col)?;
    let floor = hex.floor(col.m);
    let mut t = Table::new(&["y", "hole", "particle"]);
    for j in 0..col.nodes() {
        t.push(vec![(floor + j as u64).to_string(), num(holes[j]), num(particles[j])]);
    }
    write_table(&sink, &header("hexagon", &params, Value::Null), &t)
}

fn strip(mut v: Value, keys: &[&str]) -> Value {
    match &mut v {
        Value::Object(m) => {
            for k in keys {
                m.remove(*k);
            }
            for (_, x) in m.iter_mut() {
                *x = strip(x.take(), keys);
            }
        }
        Value::Array(a) => {
            for x in a.iter_mut() {
                *x = strip(x.take(), keys);
            }
        }
        _ => {}
    }
    v
}

fn verify(common: &Common, checks: &str, keep_samples: bool) -> Result<(), CliError> {
    let checks = stats_list(checks, &["band", "saturated", "hardedge"])?;
    let cfg = resolve(common)?;
    let c = cfg.c.ok_or_else(|| CliError::Config("the ratio c is required".into()))?;
    cfg.degrees()?;
    let spec = cfg.spec()?;
    let density = cfg.density()?;
    let grid = cfg.grid.unwrap_or(DEFAULT_GRID);
    let bits = cfg.bits.unwrap_or_default();
    let has = |s: &str| checks.iter().any(|c| c == s);
    let runs: Vec<Result<Value, CliError>> = cfg
        .n
        .par_iter()
        .map(|&n| {
            let p = prepare(&spec, &density, n, c, grid, bits, false)?;
            let mut run = serde_json::Map::new();
            run.insert("N".into(), json!(n));
            run.insert("k".into(), json!(p.k));
            run.insert("segments".into(), json!(p.cls.segments));
            if has("band") {
                let mut v = Vec::new();
                for seg in p.cls.of_kind(SegmentKind::Band) {
                    v.push(json!(band_check(&p.basis, p.k, &p.eqm, seg, 2000)?));
                }
                run.insert("band".into(), json!(v));
            }
            if has("saturated") {
                let mut v = Vec::new();
                for (i, seg) in p.cls.segments.iter().enumerate() {
                    if seg.kind == SegmentKind::Saturated {
                        v.push(json!(saturated_check(&p.basis, p.k, &p.eqm, i)?));
                    }
                }
                run.insert("saturated".into(), json!(v));
            }
            if has("hardedge") {
                let mut v = Vec::new();
                let ends = [
                    (p.cls.segments.first(), Endpoint::Left),
                    (p.cls.segments.last(), Endpoint::Right),
                ];
                for (seg, end) in ends {
                    if seg.map(|s| s.kind) == Some(SegmentKind::Saturated) {
                        v.push(json!(hard_edge_check(&p.basis, p.k, &p.eqm, end, 40)?));
                    }
                }
                run.insert("hardedge".into(), json!(v));
            }
            Ok(Value::Object(run))
        })
        .collect();
    let mut runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    if !keep_samples {
        runs = runs
            .into_iter()
            .map(|r| strip(r, &["samples", "midpoint_envelope", "inside", "outside"]))
            .collect();
    }
    let trends = trends(&runs);
    let report = json!({ "runs": runs, "trends": trends });
    write_report(
        &Sink::parse(common.out.as_deref(), Format::Json),
        &header("verify", &cfg, json!({ "checks": checks })),
        &report,
    )
}

/// Ratios of the first run's statistics to the last run's.
fn trends(runs: &[Value]) -> Value {
    let (Some(first), Some(last)) = (runs.first(), runs.last()) else {
        return Value::Null;
    };
    if runs.len() < 2 {
        return Value::Null;
    }
    let get = |r: &Value, path: &[&str]| -> Option<f64> {
        let mut v = r;
        for p in path {
            v = match v {
                Value::Array(a) => a.first()?,
                _ => v,
            };
            v = v.get(*p)?;
        }
        v.as_f64()
    };
    let ratio = |path: &[&str]| match (get(first, path), get(last, path)) {
        (Some(a), Some(b)) if b != 0.0 => json!(a / b),
        _ => Value::Null,
    };
    json!({
        "band_max_abs_ratio": ratio(&["band", "max_abs"]),
        "saturated_offset_ratio": ratio(&["saturated", "max_zero_offset"]),
        "hardedge_deviation_ratio": ratio(&["hardedge", "max_deviation"]),
    })
}

fn run_accept(suite: Suite, seed: u64, out: Option<&str>) -> Result<(), CliError> {
    let outcomes = accept::run_suite(suite, seed);
    for o in &outcomes {
        eprintln!("{}", o.line());
    }
    let suite_name = match suite {
        Suite::Small => "small",
        Suite::Full => "full",
    };
    let params = json!({ "suite": suite_name, "seed": seed });
    let mut t = Table::new(&["criterion", "name", "passed", "detail"]);
    for o in &outcomes {
        t.push(vec![o.id.to_string(), o.name.clone(), o.passed.to_string(), o.detail.clone()]);
    }
    let sink = Sink::parse(out, Format::Json);
    let head = header("accept", &params, Value::Null);
    match sink.format() {
        Format::Json => write_report(&sink, &head, &outcomes)?,
        Format::Csv => write_table(&sink, &head, &t)?,
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Acceptance(format!("criteria {} failed", failed.join(", "))))
    }
}
