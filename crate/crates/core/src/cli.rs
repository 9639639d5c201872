//! Command-line front end: argument types and the four subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bundled;
use crate::error::{Error, Result};
use crate::evolution::{
    diagnostics_k, initial_data, picard_solve, solve_linear, spec_grid, CoefficientPath, EnergyTrace, LinearConfig,
    PicardConfig,
};
use crate::linalg::ComplexMatrix;
use crate::paracalc::{paracheck, GridField, ParacheckConfig};
use crate::stability::{ode_sum_stability, stability_scan, OdePair, ScanConfig, ScanVerdict};
use crate::symbol::{
    check_assumption_2_2, check_assumption_2_7, conjugator_at, eigen_decompose, sphere_samples, state_samples,
    track_along_path, AssumptionReport, SystemSpec, Verdict, TAU_CLUSTER,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_STRUCTURAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dispersio", version, about = "Dispersive stabilization toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Eigenstructure, hypothesis checks and conjugator samples for a spec.
    Analyze(AnalyzeArgs),
    /// Amplification-matrix growth scan over |ξ| (or sum stability for an ODE pair).
    StabilityScan(ScanArgs),
    /// Integrate the linearized or quasilinear system and write an energy trace.
    Solve(SolveArgs),
    /// Empirical checks of the discrete paradifferential calculus.
    Paracheck(ParacheckArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Spec file, or the name of a bundled spec.
    #[arg(long)]
    pub config: String,
    /// Report path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Unit frequencies sampled when d ≥ 2.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    /// Random states sampled for state-dependent coefficients.
    #[arg(long, default_value_t = 8)]
    pub states: usize,
    /// Radius of the sampled state ball.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[arg(long)]
    pub config: String,
    /// Per-frequency CSV (stdout when omitted).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Verdict JSON.
    #[arg(long)]
    pub verdict: Option<PathBuf>,
    #[arg(long, default_value_t = 128.0)]
    pub xi_max: f64,
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    pub times: Vec<f64>,
    #[arg(long, default_value_t = 256)]
    pub dense_samples: usize,
    #[arg(long, default_value_t = 32)]
    pub per_octave: usize,
    /// Radius of the bounded-frequency constant.
    #[arg(long, default_value_t = 4.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Strang,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Linear,
    Picard,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub config: String,
    #[arg(long, default_value_t = 1.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub dt: f64,
    /// Mollifier parameter of J_ε.
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = Scheme::Strang)]
    pub scheme: Scheme,
    #[arg(long, value_enum, default_value_t = Mode::Linear)]
    pub mode: Mode,
    /// Energy trace CSV (stdout when omitted).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Summary JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Override the spec's grid size.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Trace sample spacing in steps.
    #[arg(long, default_value_t = 1)]
    pub sample_every: usize,
    #[arg(long, default_value_t = 30)]
    pub max_iters: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ParacheckArgs {
    /// Points per axis of the fine grid; the coarse grid has half as many.
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Random draws for the constant estimates.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cutoff gap N of the admissible cutoff.
    #[arg(long, default_value_t = 3)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 6)]
    pub probes: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Caps the global rayon pool from `DISPERSIO_THREADS`.
pub fn configure_threads() {
    if let Some(n) = std::env::var("DISPERSIO_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Parsed input file: its text, hash and JSON value.
struct Source {
    label: String,
    sha256: String,
    value: Value,
}

fn load(config: &str) -> Result<Source> {
    let path = Path::new(config);
    let text = if path.exists() {
        std::fs::read_to_string(path)?
    } else if let Some(t) = bundled::text(config) {
        t.to_owned()
    } else {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{config}: no such file or bundled spec"),
        )));
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        pointer: String::new(),
        message: e.to_string(),
    })?;
    Ok(Source {
        label: config.to_owned(),
        sha256: hex::encode(Sha256::digest(text.as_bytes())),
        value,
    })
}

fn run_meta(src: Option<&Source>, command: &Command) -> Value {
    let mut meta = json!({ "version": env!("CARGO_PKG_VERSION"), "flags": command });
    if let Some(s) = src {
        meta["spec"] = json!({ "source": s.label, "sha256": s.sha256 });
    }
    meta
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn write_json(path: Option<&Path>, v: &Value) -> Result<()> {
    let mut w = open_out(path)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect();
    json!(rows)
}

fn state_json(u: &[Complex64]) -> Value {
    json!(u.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
}

/// Maps a finished command to its exit status.
pub fn exit_code(result: &Result<i32>) -> i32 {
    match result {
        Ok(code) => *code,
        Err(e) if e.is_structural() => EXIT_STRUCTURAL,
        Err(_) => EXIT_IO,
    }
}

pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Analyze(a) => analyze(a, &cli.command),
        Command::StabilityScan(a) => scan(a, &cli.command),
        Command::Solve(a) => solve(a, &cli.command),
        Command::Paracheck(a) => run_paracheck(a, &cli.command),
    };
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    exit_code(&result)
}

#[derive(Serialize)]
struct SelfAdjointness {
    verdict: Verdict,
    samples: usize,
    failure: Option<String>,
}

fn check_dispersion(spec: &SystemSpec, xis: &[Vec<f64>]) -> SelfAdjointness {
    let mut failure = None;
    for xi in xis {
        if let Err(e) = eigen_decompose(&spec.a, xi, TAU_CLUSTER) {
            failure = Some(e.to_string());
            break;
        }
    }
    // branches must be trackable along arcs joining consecutive samples
    if failure.is_none() && spec.dim >= 2 {
        for w in xis.windows(2) {
            let path: Vec<Vec<f64>> = (0..=32)
                .map(|i| {
                    let s = i as f64 / 32.0;
                    let v: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| (1.0 - s) * a + s * b).collect();
                    let r = crate::symbol::norm(&v);
                    v.into_iter().map(|x| x / r).collect()
                })
                .filter(|v: &Vec<f64>| v.iter().all(|x| x.is_finite()))
                .collect();
            if let Err(e) = track_along_path(&spec.a, &path, TAU_CLUSTER) {
                failure = Some(e.to_string());
                break;
            }
        }
    }
    SelfAdjointness {
        verdict: if failure.is_none() { Verdict::Pass } else { Verdict::Fail },
        samples: xis.len(),
        failure,
    }
}

fn conclusion(
    dispersion: &SelfAdjointness,
    coupling: Option<&AssumptionReport>,
    conjugate: Option<&AssumptionReport>,
) -> String {
    let Some(coupling) = coupling.filter(|_| dispersion.verdict == Verdict::Pass) else {
        return format!(
            "FAIL: dispersion symbol is not self-adjoint with trackable branches ({})",
            dispersion.failure.as_deref().unwrap_or("")
        );
    };
    let failed = |r: &AssumptionReport| r.verdict == Verdict::Fail;
    let witness = |r: &AssumptionReport| {
        r.witness
            .as_ref()
            .map(|w| format!(" at xi = {:?}, branches ({}, {})", w.xi, w.p, w.q))
            .unwrap_or_default()
    };
    match conjugate {
        None if failed(coupling) => format!(
            "FAIL: antisymmetric part of B does not vanish on coincident eigenvalues{}",
            witness(coupling)
        ),
        None => "Theorem 2.5 hypotheses satisfied".into(),
        Some(c) if failed(c) => format!("FAIL: conjugate coupling violates the symmetry condition{}", witness(c)),
        Some(_) => "Theorem 2.8 hypotheses satisfied".into(),
    }
}

fn analyze(args: &AnalyzeArgs, command: &Command) -> Result<i32> {
    let src = load(&args.config)?;
    let spec = SystemSpec::from_value(&src.value)?;
    let xis = sphere_samples(spec.dim, args.samples, args.seed);
    let states = if spec.is_state_independent() {
        state_samples(spec.components, 1, 0.0, args.seed)
    } else {
        state_samples(spec.components, args.states, args.radius, args.seed)
    };
    let dispersion = check_dispersion(&spec, &xis);
    let eigen: Vec<Value> = xis
        .iter()
        .filter_map(|xi| eigen_decompose(&spec.a, xi, TAU_CLUSTER).ok())
        .map(|es| {
            json!({
                "xi": es.xi,
                "eigenvalues": es.branches.iter().map(|b| b.lambda).collect::<Vec<_>>(),
                "multiplicities": es.multiplicities(),
            })
        })
        .collect();
    let (coupling, conjugate) = if dispersion.verdict == Verdict::Pass {
        let c = check_assumption_2_2(&spec, &xis, &states)?;
        let conj = if spec.has_conjugate_coupling() {
            Some(check_assumption_2_7(&spec, &xis, &states)?)
        } else {
            None
        };
        (Some(c), conj)
    } else {
        (None, None)
    };
    let mut conjugators = Vec::new();
    if coupling.as_ref().is_some_and(|c| c.verdict == Verdict::Pass) {
        for xi in xis.iter().take(8) {
            for u in states.iter().take(2) {
                if let Ok(v) = conjugator_at(&spec, u, xi) {
                    conjugators.push(json!({ "xi": xi, "state": state_json(u), "v_minus_one": matrix_json(&v) }));
                }
            }
        }
    }
    let line = conclusion(&dispersion, coupling.as_ref(), conjugate.as_ref());
    let pass = !line.starts_with("FAIL");
    let report = json!({
        "run": run_meta(Some(&src), command),
        "name": spec.name,
        "dimension": spec.dim,
        "components": spec.components,
        "eigenstructure": eigen,
        "dispersion_check": dispersion,
        "coupling_check": coupling,
        "conjugate_coupling_check": conjugate,
        "conjugator_samples": conjugators,
        "conclusion": line,
    });
    write_json(args.out.as_deref(), &report)?;
    Ok(if pass { EXIT_PASS } else { EXIT_STRUCTURAL })
}

fn scan(args: &ScanArgs, command: &Command) -> Result<i32> {
    let src = load(&args.config)?;
    let meta = run_meta(Some(&src), command);
    if OdePair::looks_like(&src.value) {
        let pair = OdePair::from_value(&src.value)?;
        let r = ode_sum_stability(&pair.a, &pair.b)?;
        let report = json!({
            "run": meta,
            "name": pair.name,
            "ode_pair": r,
            "summary": if r.turing { "both generators stable, sum unstable" } else { "no sum instability" },
        });
        write_json(args.verdict.as_deref().or(args.csv.as_deref()), &report)?;
        return Ok(EXIT_PASS);
    }
    let spec = SystemSpec::from_value(&src.value)?;
    let cfg = ScanConfig {
        xi_max: args.xi_max,
        dense_samples: args.dense_samples,
        per_octave: args.per_octave,
        times: args.times.clone(),
        radius: args.radius,
        seed: args.seed,
        ..ScanConfig::default()
    };
    let zero = vec![Complex64::new(0.0, 0.0); spec.components];
    let report = stability_scan(&spec, &zero, &cfg)?;
    {
        let mut w = open_out(args.csv.as_deref())?;
        report.write_csv(&mut w, spec.dim, Some(&meta))?;
        w.flush()?;
    }
    if let Some(p) = &args.verdict {
        write_json(Some(p), &json!({ "run": meta, "verdicts": report.verdicts }))?;
    }
    let ill = report.verdicts.iter().any(|v| v.verdict == ScanVerdict::ExponentiallyIllPosed);
    if report.verdicts.iter().any(|v| v.verdict == ScanVerdict::Inconclusive) {
        log::warn!("scan verdict inconclusive for at least one time");
    }
    Ok(if ill { EXIT_STRUCTURAL } else { EXIT_PASS })
}

fn write_trace(path: Option<&Path>, trace: &EnergyTrace) -> Result<()> {
    let mut w = open_out(path)?;
    trace.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn solve(args: &SolveArgs, command: &Command) -> Result<i32> {
    let src = load(&args.config)?;
    let mut spec = SystemSpec::from_value(&src.value)?;
    if let Some(n) = args.grid {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::Invalid(format!("--grid {n} is not a power of two ≥ 4")));
        }
        spec.grid_points = n;
    }
    let grid = spec_grid(&spec);
    let h = initial_data(&spec, grid)?;
    let meta = run_meta(Some(&src), command);
    match args.mode {
        Mode::Linear => {
            // state-dependent coefficients are frozen at the initial data
            let a = if spec.is_state_independent() { GridField::zeros(grid, spec.components) } else { h.clone() };
            let path = CoefficientPath::Constant(a);
            let cfg = LinearConfig {
                t_max: args.tmax,
                dt: args.dt,
                eps: args.eps,
                sample_every: args.sample_every,
                energy: true,
                keep_trajectory: false,
                cutoff: 3,
            };
            match solve_linear(&spec, &path, None, &h, &cfg) {
                Ok(run) => {
                    write_trace(args.trace.as_deref(), &run.trace)?;
                    if let Some(p) = &args.report {
                        let report = json!({
                            "run": meta,
                            "status": "ok",
                            "t_final": run.state.t,
                            "steps": cfg.steps(),
                            "l2_initial": h.l2_norm(),
                            "l2_final": run.state.u.l2_norm(),
                            "growth_rate": run.growth_rate,
                            "fitted_c": run.fitted_c,
                            "symmetrizer": run.symmetrizer,
                            "k": diagnostics_k(&path, spec.sobolev_s),
                        });
                        write_json(Some(p), &report)?;
                    }
                    Ok(EXIT_PASS)
                }
                Err(Error::IllPosedSuspected { t, growth, trace }) => {
                    write_trace(args.trace.as_deref(), &trace)?;
                    if let Some(p) = &args.report {
                        let report = json!({
                            "run": meta,
                            "status": "ILL_POSED_SUSPECTED",
                            "t_abort": t,
                            "growth": growth,
                            "growth_rate": crate::evolution::growth_rate(&trace),
                        });
                        write_json(Some(p), &report)?;
                    }
                    eprintln!("ILL_POSED_SUSPECTED: L2 norm grew by {growth:.3e} at t = {t:.4}");
                    Ok(EXIT_STRUCTURAL)
                }
                Err(e) => Err(e),
            }
        }
        Mode::Picard => {
            let cfg = PicardConfig {
                t_max: args.tmax,
                dt: args.dt,
                eps: args.eps,
                max_iters: args.max_iters,
                sample_every: args.sample_every,
                ..PicardConfig::default()
            };
            let r = picard_solve(&spec, &h, &cfg)?;
            write_trace(args.trace.as_deref(), &r.trace)?;
            if let Some(p) = &args.report {
                let report = json!({
                    "run": meta,
                    "status": if r.converged { "converged" } else { "not-converged" },
                    "t_final": r.t_final,
                    "halvings": r.halvings,
                    "iterations": r.iterations,
                    "diffs": r.diffs,
                    "contraction": r.contraction,
                    "residual": r.residual,
                    "residual_relative": r.residual_relative,
                });
                write_json(Some(p), &report)?;
            }
            Ok(if r.converged { EXIT_PASS } else { EXIT_STRUCTURAL })
        }
    }
}

fn run_paracheck(args: &ParacheckArgs, command: &Command) -> Result<i32> {
    if args.grid < 8 || !args.grid.is_power_of_two() {
        return Err(Error::Invalid(format!("--grid {} is not a power of two ≥ 8", args.grid)));
    }
    if args.cutoff < 3 {
        return Err(Error::Invalid("--cutoff must be at least 3".into()));
    }
    let cfg = ParacheckConfig {
        dim: args.dim,
        n: args.grid,
        cutoff: args.cutoff,
        draws: args.trials,
        probes: args.probes,
        seed: args.seed,
        ..ParacheckConfig::default()
    };
    let report = paracheck(&cfg);
    write_json(args.out.as_deref(), &json!({ "run": run_meta(None, command), "report": report }))?;
    Ok(if report.pass { EXIT_PASS } else { EXIT_STRUCTURAL })
}

