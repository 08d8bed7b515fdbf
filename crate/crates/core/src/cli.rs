//! The `votewave` command line: subcommand dispatch, CSV/JSON outputs and run manifests.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::bernstein::{BernsteinPoly, PolyJson};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::{cluster_report, ClusterReport, GridCdf, GridRecursion};
use crate::increments::IncrementLaw;
use crate::mc::{sample_threshold, EmpiricalCdf};
use crate::models::{analyze, analyze_exact, outcome_representation, presets, threshold_representation, DEFAULT_D_CAP};
use crate::scalar::fmt_sig12;
use crate::wave::{solve_wave, WaveOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

const SUMMARY_LEVELS: [f64; 7] = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99];
const CLUSTER_EPS: f64 = 0.05;
const DIAGNOSTIC_NOTE: &str = "cluster flags are numerical diagnostics of the computed series, not proofs of tightness";

#[derive(Parser, Debug)]
#[command(name = "votewave", version, about = "Voting on branching random walks: recursions, simulation and traveling waves")]
struct Cli {
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find threshold/outcome models with a given recursion polynomial.
    Represent {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, default_value_t = DEFAULT_D_CAP)]
        d_cap: usize,
    },
    /// Monte Carlo samples of M_n.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        replicas: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid recursion F_{n+1} = g(q * F_n).
    Iterate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        record_every: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Traveling wave of a bistable model with density increments.
    Wave {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 20_000)]
        max_iters: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// CDFs of M_n for the three fig1 archetype models.
    Figure1 {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Quantiles, clusters and tightness diagnostics at several times.
    Diagnose {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = vec![250, 500, 1000])]
        n_list: Vec<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Represent { .. } => "represent",
            Command::Simulate { .. } => "simulate",
            Command::Iterate { .. } => "iterate",
            Command::Wave { .. } => "wave",
            Command::Figure1 { .. } => "figure1",
            Command::Diagnose { .. } => "diagnose",
        }
    }
}

/// Runs the command line `argv` (program name first), writing to the given
/// streams. Returns the process exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let mut buffer = Vec::new();
    let outcome = pool.install(|| dispatch(&cli, &mut buffer));
    let _ = stdout.write_all(&buffer);
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
                _ => EXIT_CONFIG,
            }
        }
    }
}

/// Entry point used by the binary.
pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

/// Worker pool sized by `VOTEWAVE_THREADS` (all cores when unset).
fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(text) = std::env::var("VOTEWAVE_THREADS") {
        let n: usize = text
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("VOTEWAVE_THREADS must be a positive integer, got {text:?}")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder.build().map_err(|e| Error::Config(e.to_string()))
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig> {
    let mut config = RunConfig::load(path)?;
    if let Some(seed) = seed {
        config.set_seed(seed);
    }
    Ok(config)
}

fn dispatch(cli: &Cli, stdout: &mut Vec<u8>) -> Result<()> {
    let clock = Instant::now();
    let name = cli.command.name();
    match &cli.command {
        Command::Represent { poly, d_cap } => {
            let text = fs::read_to_string(poly).map_err(|e| Error::Config(format!("cannot read {}: {e}", poly.display())))?;
            let json: PolyJson = serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad polynomial file: {e}")))?;
            let g = BernsteinPoly::<f64>::from_json(&json)?;
            writeln!(stdout, "{}", represent(&g, *d_cap))?;
        }
        Command::Simulate { config, depth, replicas, out } => {
            let mut cfg = load_config(config, cli.seed)?;
            if let Some(depth) = depth {
                cfg.set_depth(*depth);
            }
            if let Some(replicas) = replicas {
                cfg.set_replicas(*replicas);
            }
            let samples = sample_threshold(&cfg.sim_config())?;
            let mut csv = String::from("replica,value\n");
            for (r, v) in samples.iter().enumerate() {
                csv.push_str(&format!("{r},{}\n", fmt_sig12(*v)));
            }
            write_file(out, &csv)?;
            let ecdf = EmpiricalCdf::from_samples(samples);
            let quantiles: serde_json::Map<String, Value> = SUMMARY_LEVELS
                .iter()
                .map(|a| (fmt_sig12(*a), Value::from(ecdf.quantile(*a))))
                .collect();
            let summary = json!({"depth": cfg.depth, "replicas": cfg.replicas, "mean": ecdf.mean(), "quantiles": quantiles});
            writeln!(stdout, "{}", pretty(&summary)?)?;
            write_manifest(dir_of(out), name, Some(&cfg), vec![out.clone()], clock)?;
        }
        Command::Iterate { config, n, record_every, out_dir } => {
            let cfg = load_config(config, cli.seed)?;
            fs::create_dir_all(out_dir)?;
            let rec = GridRecursion::<f64>::with_h(&cfg.model, &cfg.increments, cfg.grid_h())?;
            let every = if *record_every == 0 { (*n).max(1) } else { *record_every };
            let mut outputs = Vec::new();
            let mut series = Vec::new();
            for (m, f) in rec.iter().enumerate().take(n + 1) {
                if m == *n || (m > 0 && m % every == 0) {
                    let path = out_dir.join(format!("F_{m:06}.csv"));
                    write_file(&path, &cdf_csv(&f, "F"))?;
                    outputs.push(path);
                    series.push((m, f));
                }
            }
            let report = grid_report(&cfg, &series)?;
            let path = out_dir.join("report.json");
            write_file(&path, &(pretty(&report)? + "\n"))?;
            outputs.push(path);
            write_manifest(out_dir, name, Some(&cfg), outputs, clock)?;
        }
        Command::Wave { config, tol, max_iters, out } => {
            let cfg = load_config(config, cli.seed)?;
            let g = cfg.model.recursion_polynomial::<f64>()?;
            let nl = analyze(&g)?;
            let options = WaveOptions { tol: *tol, max_iters: *max_iters, ..WaveOptions::default() };
            let wave = solve_wave(&nl, &cfg.increments, &options)?;
            write_file(out, &cdf_csv(&wave.phi, "phi"))?;
            let summary = json!({
                "speed": wave.speed,
                "residual": wave.residual,
                "pin_level": wave.pin_level,
                "domain": [-wave.half_width, wave.half_width],
                "h": wave.h(),
                "iterations": wave.iterations,
                "tail_widths_1e-6": wave.tail_widths(1e-6),
            });
            let json_path = out.with_extension("json");
            write_file(&json_path, &(pretty(&summary)? + "\n"))?;
            writeln!(stdout, "{}", pretty(&summary)?)?;
            write_manifest(dir_of(out), name, Some(&cfg), vec![out.clone(), json_path], clock)?;
        }
        Command::Figure1 { out_dir, n } => {
            fs::create_dir_all(out_dir)?;
            let q = IncrementLaw::lazy_symmetric();
            let mut outputs = Vec::new();
            for (tag, model) in [("a", presets::fig1a()), ("b", presets::fig1b()), ("c", presets::fig1c())] {
                let f = GridRecursion::<f64>::new(&model, &q)?.run(*n);
                let path = out_dir.join(format!("fig1{tag}.csv"));
                write_file(&path, &cdf_csv(&f, "F"))?;
                outputs.push(path);
            }
            writeln!(stdout, "wrote {} files to {}", outputs.len(), out_dir.display())?;
            write_manifest(out_dir, name, None, outputs, clock)?;
        }
        Command::Diagnose { config, n_list, out_dir } => {
            let cfg = load_config(config, cli.seed)?;
            let report = diagnose(&cfg, n_list)?;
            let text = pretty(&report)? + "\n";
            writeln!(stdout, "{}", text.trim_end())?;
            if let Some(dir) = out_dir {
                fs::create_dir_all(dir)?;
                let path = dir.join("diagnose.json");
                write_file(&path, &text)?;
                write_manifest(dir, name, Some(&cfg), vec![path], clock)?;
            }
        }
    }
    Ok(())
}

/// `{"threshold": ...}` when a threshold model exists, otherwise both
/// searches with their diagnoses.
pub fn represent(g: &BernsteinPoly<f64>, d_cap: usize) -> Value {
    match threshold_representation(g, d_cap) {
        Ok(rep) => json!({"threshold": rep.to_json()}),
        Err(threshold_diag) => {
            let (outcome, outcome_diag) = match outcome_representation(g, d_cap) {
                Ok(rep) => (rep.to_json(), Value::Null),
                Err(d) => (Value::Null, Value::String(d.to_string())),
            };
            json!({
                "threshold": null,
                "threshold_diagnosis": threshold_diag.to_string(),
                "outcome": outcome,
                "outcome_diagnosis": outcome_diag,
            })
        }
    }
}

/// Quantiles and cluster report of the grid recursion at the times in `n_list`,
/// plus the `med(|M_n|)` series up to the largest time.
pub fn diagnose(cfg: &RunConfig, n_list: &[usize]) -> Result<Value> {
    let mut wanted: Vec<usize> = n_list.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let n_max = *wanted.last().ok_or_else(|| Error::Config("empty --n-list".into()))?;
    let rec = GridRecursion::<f64>::with_h(&cfg.model, &cfg.increments, cfg.grid_h())?;
    let mut series = Vec::new();
    let mut median_abs = Vec::with_capacity(n_max + 1);
    for (n, f) in rec.iter().enumerate().take(n_max + 1) {
        median_abs.push(f.median_abs());
        if wanted.contains(&n) {
            series.push((n, f));
        }
    }
    let mut report = grid_report(cfg, &series)?;
    let gaps: Vec<f64> = series
        .iter()
        .map(|(_, f)| Ok(f.quantile(0.95)? - f.quantile(0.05)?))
        .collect::<Result<_>>()?;
    let (lo, hi) = gaps.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), g| (a.min(*g), b.max(*g)));
    let last = *gaps.last().unwrap_or(&0.0);
    report["gap_05_95"] = json!({
        "values": gaps,
        "relative_variation": if last > 0.0 { (hi - lo) / last } else { 0.0 },
        "stable_within_10pct": hi - lo <= 0.1 * last,
    });
    let max_abs = median_abs.iter().fold(0.0f64, |m, v| m.max(*v));
    report["median_abs"] = json!({"series": median_abs, "max": max_abs});
    Ok(report)
}

fn grid_report(cfg: &RunConfig, series: &[(usize, GridCdf<f64>)]) -> Result<Value> {
    let quantiles: Vec<Value> = series
        .iter()
        .map(|(n, f)| {
            let q: serde_json::Map<String, Value> = SUMMARY_LEVELS
                .iter()
                .map(|a| Ok((fmt_sig12(*a), Value::from(f.quantile(*a)?))))
                .collect::<Result<_>>()?;
            Ok(json!({"n": n, "quantiles": q}))
        })
        .collect::<Result<_>>()?;
    let g = cfg.model.recursion_polynomial::<BigRational>()?;
    let clusters = match analyze_exact(&g) {
        Ok(nl) => cluster_json(&cluster_report(series, &nl, CLUSTER_EPS)?, &nl.zeros, &nl.multiplicities),
        Err(e) => json!({"error": e.to_string()}),
    };
    Ok(json!({"quantiles": quantiles, "clusters": clusters}))
}

fn cluster_json(report: &ClusterReport, zeros: &[f64], multiplicities: &[usize]) -> Value {
    json!({
        "note": DIAGNOSTIC_NOTE,
        "zeros": zeros,
        "multiplicities": multiplicities,
        "reference_level": report.level,
        "reference_quantiles": report.reference.iter().map(|(n, q)| json!({"n": n, "q": q})).collect::<Vec<_>>(),
        "rows": report.rows.iter().map(|r| json!({
            "n": r.n, "s": r.s, "interval": [r.interval.0, r.interval.1], "median": r.median, "gap": r.gap,
        })).collect::<Vec<_>>(),
        "summary": report.clusters.iter().map(|c| json!({
            "s": c.s, "drift_slope": c.drift_slope, "bounded": c.bounded, "tight": c.tight, "last_offset": c.last_offset,
        })).collect::<Vec<_>>(),
    })
}

/// Pretty JSON with every float rounded to 12 significant digits.
fn pretty(value: &Value) -> Result<String> {
    fn round(v: &mut Value) {
        match v {
            Value::Number(n) if n.is_f64() => {
                let x = n.as_f64().expect("f64");
                *v = fmt_sig12(x).parse::<f64>().map_or(Value::Null, Value::from);
            }
            Value::Array(items) => items.iter_mut().for_each(round),
            Value::Object(map) => map.values_mut().for_each(round),
            _ => {}
        }
    }
    let mut value = value.clone();
    round(&mut value);
    Ok(serde_json::to_string_pretty(&value)?)
}

fn cdf_csv(f: &GridCdf<f64>, column: &str) -> String {
    let mut csv = format!("x,{column}\n");
    for (x, v) in f.points() {
        csv.push_str(&format!("{},{}\n", fmt_sig12(x), fmt_sig12(*v)));
    }
    csv
}

fn dir_of(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn write_manifest(dir: &Path, subcommand: &str, cfg: Option<&RunConfig>, outputs: Vec<PathBuf>, clock: Instant) -> Result<()> {
    let names: Vec<String> = outputs
        .iter()
        .map(|p| p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned()))
        .collect();
    let manifest = json!({
        "tool": "votewave",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": subcommand,
        "argv": std::env::args().skip(1).collect::<Vec<_>>(),
        "config_sha256": cfg.map(RunConfig::hash),
        "config": cfg.map(|c| c.raw().clone()),
        "seed": cfg.map(|c| c.seed),
        "wall_time_s": clock.elapsed().as_secs_f64(),
        "outputs": names,
    });
    write_file(&dir.join("manifest.json"), &(serde_json::to_string_pretty(&manifest)? + "\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let argv = std::iter::once("votewave").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_subcommand_is_a_usage_error() {
        let (code, _, err) = run_args(&["frobnicate"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("Usage"));
    }

    #[test]
    fn represent_prints_the_threshold_model() {
        let dir = tempfile::tempdir().unwrap();
        let poly = dir.path().join("g_a.json");
        fs::write(&poly, r#"{"basis":"bernstein","degree":3,"coeffs":[0,0,1,1]}"#).unwrap();
        let (code, out, _) = run_args(&["represent", "--poly", poly.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), r#"{"threshold":{"d":3,"zeta":{"2,3":1.0}}}"#);
    }

    #[test]
    fn bad_config_exits_with_2() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad.json");
        fs::write(&cfg, r#"{"offspring":{"3":1},"rule":{"type":"threshold","zeta":{"2,3":0.7}}}"#).unwrap();
        let out = dir.path().join("out.csv");
        let (code, _, err) = run_args(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("zeta rows must sum to 1"));
    }

    #[test]
    fn wave_non_convergence_exits_with_3() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bistable.json");
        fs::write(
            &cfg,
            r#"{"offspring":{"2":0.25,"3":0.75},"rule":{"type":"threshold","zeta":{"2,2":1,"2,3":1}},
               "increments":{"kind":"density","shape":"raised_cosine","radius":1,"h":0.05}}"#,
        )
        .unwrap();
        let out = dir.path().join("wave.csv");
        let (code, _, _) = run_args(&["wave", "--config", cfg.to_str().unwrap(), "--max-iters", "3", "--out", out.to_str().unwrap()]);
        assert_eq!(code, EXIT_NONCONVERGENCE);
        let (code, out_text, _) = run_args(&["wave", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert!(out_text.contains("speed"));
        assert!(dir.path().join("manifest.json").exists());
        assert!(dir.path().join("wave.json").exists());
    }
}
