//! Constant-coefficient analysis on the Fourier side: amplification
//! matrices `exp(tM(ξ))`, frequency scans and well-posedness verdicts.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ExpmPath};
use crate::symbol::{self, generator, SystemSpec};

/// Above this value of `t·max Re spec(M)` the norm is reported as saturated.
pub const SATURATION: f64 = 700.0;

#[derive(Debug, Clone)]
pub struct Amplification {
    /// `exp(tM)`; `None` when saturated.
    pub matrix: Option<ComplexMatrix>,
    /// `ln ‖exp(tM)‖₂`, finite even when saturated.
    pub log_op_norm: f64,
    pub max_re_spec: f64,
    pub saturated: bool,
    pub path: ExpmPath,
}

/// `exp(tM)` for a generator matrix. The spectral abscissa `α` is factored
/// out first, `exp(tM) = e^{tα} exp(t(M − α))`, so the log-norm stays
/// finite past overflow.
pub fn amplify(m: &ComplexMatrix, t: f64) -> Amplification {
    let n = m.nrows();
    let alpha = linalg::spectral_abscissa(m).max(0.0);
    let shifted = (m - linalg::identity(n) * linalg::c(alpha)) * linalg::c(t);
    let (e, path) = linalg::expm_with_path(&shifted, 1e-12);
    let log_op_norm = t * alpha + linalg::op_norm(&e).ln();
    let max_re_spec = linalg::spectral_abscissa(m);
    let saturated = t * max_re_spec > SATURATION;
    let matrix = (!saturated).then(|| e * linalg::c((t * alpha).exp()));
    Amplification {
        matrix,
        log_op_norm,
        max_re_spec,
        saturated,
        path,
    }
}

/// `exp(tM(ξ))` for the system frozen at the constant state `u`.
pub fn amplification_matrix(spec: &SystemSpec, u: &[Complex64], xi: &[f64], t: f64) -> Amplification {
    amplify(&generator(spec, u, xi), t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScanVerdict {
    #[serde(rename = "uniformly-bounded-in-xi")]
    UniformlyBounded,
    #[serde(rename = "exponentially-ill-posed")]
    ExponentiallyIllPosed,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanConfig {
    pub xi_max: f64,
    /// Linear sampling covers `|ξ| ≤ dense_max`.
    pub dense_max: f64,
    pub dense_samples: usize,
    pub per_octave: usize,
    /// Random directions used in addition to the signed axes when d ≥ 2.
    pub directions: usize,
    pub times: Vec<f64>,
    /// Radius of the bounded-frequency constant.
    pub radius: f64,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            xi_max: 128.0,
            dense_max: 4.0,
            dense_samples: 256,
            per_octave: 32,
            directions: 8,
            times: vec![1.0],
            radius: 4.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityRecord {
    pub xi: Vec<f64>,
    pub t: f64,
    pub op_norm: f64,
    pub log_op_norm: f64,
    pub max_re_spec: f64,
    pub cond_eigvec: f64,
    pub saturated: bool,
}

impl StabilityRecord {
    pub fn radius(&self) -> f64 {
        symbol::norm(&self.xi)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TimeVerdict {
    pub t: f64,
    pub verdict: ScanVerdict,
    /// Supremum of the norm over `|ξ| ∈ [K/4, K/2]`.
    pub lower_octave_sup: f64,
    /// Supremum over `|ξ| ∈ [K/2, K]`.
    pub upper_octave_sup: f64,
    /// `(upper − lower) / lower`.
    pub plateau_change: f64,
    /// Least-squares slope of `ln ‖exp(tM)‖` against `|ξ|` over `[K/4, K]`.
    pub fitted_slope: f64,
    pub slope_threshold: f64,
    /// `sup_{|ξ| ≤ R} ‖exp(tM(ξ))‖`.
    pub bounded_frequency_constant: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub records: Vec<StabilityRecord>,
    pub verdicts: Vec<TimeVerdict>,
}

/// Frequency magnitudes: linear on `[0, dense_max]` plus `per_octave`
/// geometric samples per octave beyond it, including every octave endpoint.
pub fn scan_magnitudes(cfg: &ScanConfig) -> Vec<f64> {
    let mut out: Vec<f64> = (0..=cfg.dense_samples)
        .map(|i| cfg.dense_max.min(cfg.xi_max) * i as f64 / cfg.dense_samples as f64)
        .collect();
    if cfg.xi_max > cfg.dense_max {
        let octaves = (cfg.xi_max / cfg.dense_max).log2();
        let total = (octaves * cfg.per_octave as f64).ceil() as usize;
        for i in 1..=total {
            let r = cfg.dense_max * 2f64.powf(i as f64 / cfg.per_octave as f64);
            out.push(r.min(cfg.xi_max));
        }
        // octave endpoints below xi_max, exactly
        let mut k = cfg.xi_max;
        while k > cfg.dense_max {
            out.push(k);
            k /= 2.0;
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    out
}

fn directions(dim: usize, extra: usize, seed: u64) -> Vec<Vec<f64>> {
    if dim == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    let mut out = Vec::new();
    for e in 0..dim {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; dim];
            v[e] = s;
            out.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = out.len() + extra;
    while out.len() < target {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = symbol::norm(&v);
        if r > 0.1 && r <= 1.0 {
            out.push(v.into_iter().map(|x| x / r).collect());
        }
    }
    out
}

fn record(spec: &SystemSpec, u: &[Complex64], xi: Vec<f64>, t: f64) -> StabilityRecord {
    let m = generator(spec, u, &xi);
    let amp = amplify(&m, t);
    StabilityRecord {
        op_norm: if amp.saturated { f64::INFINITY } else { amp.log_op_norm.exp() },
        log_op_norm: amp.log_op_norm,
        max_re_spec: amp.max_re_spec,
        cond_eigvec: linalg::eigvec_condition(&m),
        saturated: amp.saturated,
        xi,
        t,
    }
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Scans `‖exp(tM(ξ))‖₂` over frequencies and times at the constant state
/// `u` and classifies the growth.
pub fn stability_scan(spec: &SystemSpec, u: &[Complex64], cfg: &ScanConfig) -> Result<StabilityReport> {
    let mags = scan_magnitudes(cfg);
    if mags.len() < 64 {
        return Err(Error::Invalid(format!("only {} frequency samples; need at least 64", mags.len())));
    }
    if cfg.times.is_empty() || cfg.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Invalid("times must be finite and non-negative".into()));
    }
    let dirs = directions(spec.dim, cfg.directions, cfg.seed);
    let mut jobs: Vec<(Vec<f64>, f64)> = Vec::new();
    for &r in &mags {
        for (i, dir) in dirs.iter().enumerate() {
            if r == 0.0 && i > 0 {
                continue;
            }
            for &t in &cfg.times {
                jobs.push((dir.iter().map(|x| x * r).collect(), t));
            }
        }
    }
    let records: Vec<StabilityRecord> = jobs.into_par_iter().map(|(xi, t)| record(spec, u, xi, t)).collect();

    let k = cfg.xi_max;
    let mut verdicts = Vec::new();
    for &t in &cfg.times {
        let at_t: Vec<&StabilityRecord> = records.iter().filter(|r| r.t == t).collect();
        let sup_in = |lo: f64, hi: f64| {
            at_t.iter()
                .filter(|r| r.radius() >= lo * (1.0 - 1e-12) && r.radius() <= hi * (1.0 + 1e-12))
                .map(|r| r.log_op_norm)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let lower = sup_in(k / 4.0, k / 2.0);
        let upper = sup_in(k / 2.0, k);
        let plateau_change = (upper - lower).exp() - 1.0;
        let top: Vec<&&StabilityRecord> = at_t.iter().filter(|r| r.radius() >= k / 4.0 * (1.0 - 1e-12)).collect();
        let xs: Vec<f64> = top.iter().map(|r| r.radius()).collect();
        let ys: Vec<f64> = top.iter().map(|r| r.log_op_norm).collect();
        let fitted_slope = if xs.len() >= 2 { least_squares_slope(&xs, &ys) } else { f64::NAN };
        let slope_threshold = 0.1 * t;
        let verdict = if fitted_slope > slope_threshold {
            ScanVerdict::ExponentiallyIllPosed
        } else if plateau_change < 0.05 {
            ScanVerdict::UniformlyBounded
        } else {
            ScanVerdict::Inconclusive
        };
        let bounded = at_t
            .iter()
            .filter(|r| r.radius() <= cfg.radius)
            .map(|r| r.log_op_norm)
            .fold(f64::NEG_INFINITY, f64::max)
            .exp();
        verdicts.push(TimeVerdict {
            t,
            verdict,
            lower_octave_sup: lower.exp(),
            upper_octave_sup: upper.exp(),
            plateau_change,
            fitted_slope,
            slope_threshold,
            bounded_frequency_constant: bounded,
            radius: cfg.radius,
        });
    }
    Ok(StabilityReport { records, verdicts })
}

impl StabilityReport {
    /// Per-frequency table followed by the verdict block as `#`-prefixed
    /// JSON lines.
    pub fn write_csv<W: Write>(&self, mut w: W, dim: usize, meta: Option<&Value>) -> Result<()> {
        let header: Vec<String> = (1..=dim).map(|j| format!("xi_{j}")).collect();
        writeln!(w, "{},t,op_norm,max_re_spec,cond_eigvec", header.join(","))?;
        for r in &self.records {
            let xi: Vec<String> = r.xi.iter().map(|x| format!("{x:e}")).collect();
            writeln!(
                w,
                "{},{:e},{:e},{:e},{:e}",
                xi.join(","),
                r.t,
                r.op_norm,
                r.max_re_spec,
                r.cond_eigvec
            )?;
        }
        let mut block = serde_json::json!({ "verdicts": self.verdicts });
        if let Some(meta) = meta {
            block["run"] = meta.clone();
        }
        for line in serde_json::to_string_pretty(&block)?.lines() {
            writeln!(w, "# {line}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OdeSumReport {
    pub max_re_a: f64,
    pub max_re_b: f64,
    pub max_re_sum: f64,
    pub turing: bool,
}

/// Spectral abscissae of `A`, `B` and `A + B`; flags the case where both
/// summands are stable and the sum is not.
pub fn ode_sum_stability(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<OdeSumReport> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::Invalid("ODE pair must be square matrices of equal size".into()));
    }
    let max_re_a = linalg::spectral_abscissa(a);
    let max_re_b = linalg::spectral_abscissa(b);
    let max_re_sum = linalg::spectral_abscissa(&(a + b));
    Ok(OdeSumReport {
        max_re_a,
        max_re_b,
        max_re_sum,
        turing: max_re_a < 0.0 && max_re_b < 0.0 && max_re_sum > 0.0,
    })
}

/// A pair of ODE generators stored as `{"A": matrix, "B": matrix}`.
#[derive(Debug, Clone)]
pub struct OdePair {
    pub name: Option<String>,
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
}

impl OdePair {
    pub fn from_value(v: &Value) -> Result<Self> {
        let size = |key: &str| {
            v.get(key)
                .and_then(|m| m.as_array())
                .map(|m| m.len())
                .ok_or_else(|| Error::Parse {
                    pointer: format!("/{key}"),
                    message: "expected a square matrix".into(),
                })
        };
        let n = size("A")?;
        let a = symbol_matrix(&v["A"], n, "/A")?;
        let b = symbol_matrix(&v["B"], size("B")?, "/B")?;
        Ok(Self {
            name: v.get("name").and_then(|s| s.as_str()).map(str::to_owned),
            a,
            b,
        })
    }

    /// ODE-pair files have no `dimension` key.
    pub fn looks_like(v: &Value) -> bool {
        v.get("dimension").is_none() && v.get("A").is_some() && v.get("B").is_some()
    }
}

fn symbol_matrix(v: &Value, n: usize, pointer: &str) -> Result<ComplexMatrix> {
    crate::symbol::parse_matrix_value(v, n, pointer)
}
