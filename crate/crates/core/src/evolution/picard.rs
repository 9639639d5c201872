//! Picard iteration `u_{n+1} = L(u_n)` where `L(a)` solves the linearized
//! equation with coefficient frozen at `a`, starting from `u₀ ≡ h`.

use num_complex::Complex64;
use serde::Serialize;

use super::linear::{solve_linear, LinearConfig};
use super::path::CoefficientPath;
use super::stepper::Stepper;
use super::trace::EnergyTrace;
use crate::error::{Error, Result};
use crate::paracalc::GridField;
use crate::symbol::SystemSpec;

pub const MAX_HALVINGS: usize = 4;

#[derive(Debug, Clone, Serialize)]
pub struct PicardConfig {
    pub t_max: f64,
    pub dt: f64,
    pub eps: f64,
    pub max_iters: usize,
    /// Converged once the sup-in-time L² diff is below `tol·‖h‖_{H^s}`.
    pub tol: f64,
    pub cutoff: usize,
    /// Trace sample spacing (steps) for the final energy run.
    pub sample_every: usize,
    pub energy: bool,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            t_max: 1.0,
            dt: 2.5e-3,
            eps: 0.0,
            max_iters: 30,
            tol: 1e-8,
            cutoff: 3,
            sample_every: 10,
            energy: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PicardReport {
    pub t_final: f64,
    pub halvings: usize,
    /// Number of linear solves performed on the final interval.
    pub iterations: usize,
    /// `sup_t ‖u_{n+1}(t) − u_n(t)‖_{L²}` per iteration.
    pub diffs: Vec<f64>,
    /// Largest ratio of consecutive diffs above the roundoff floor.
    pub contraction: f64,
    pub converged: bool,
    /// `max_t ‖∂ₜu + iA(∂ₓ)u + B(u, ∂ₓ)u‖_{L²}` of the limit, ε = 0.
    pub residual: f64,
    /// `residual / ‖h‖_{L²}`.
    pub residual_relative: f64,
    pub times: Vec<f64>,
    pub solution: Vec<GridField>,
    pub trace: EnergyTrace,
}

fn sup_diff(a: &[GridField], b: &[GridField]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.sub(y).l2_norm()).fold(0.0, f64::max)
}

fn sup_hs(a: &[GridField], s: f64) -> f64 {
    a.iter().map(|x| x.spectrum().sobolev_norm(s)).fold(0.0, f64::max)
}

/// Largest `d_{i+1}/d_i` over pairs with `d_i` above `floor`.
pub fn contraction_ratio(diffs: &[f64], floor: f64) -> f64 {
    diffs
        .windows(2)
        .filter(|w| w[0] > floor)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max)
}

/// Residual of the nonlinear equation along a trajectory, with fourth-order
/// differences in time and spectral derivatives in space.
pub fn nonlinear_residual(spec: &SystemSpec, times: &[f64], u: &[GridField]) -> f64 {
    let m = u.len();
    if m < 5 {
        return f64::NAN;
    }
    let grid = u[0].grid;
    let h = times[1] - times[0];
    let stepper = Stepper::new(spec, grid, h, 0.0);
    let mut worst: f64 = 0.0;
    for i in 2..m - 2 {
        let mut dt = u[i - 2].clone().scaled(Complex64::new(1.0 / (12.0 * h), 0.0));
        dt.add_scaled(&u[i - 1], Complex64::new(-8.0 / (12.0 * h), 0.0));
        dt.add_scaled(&u[i + 1], Complex64::new(8.0 / (12.0 * h), 0.0));
        dt.add_scaled(&u[i + 2], Complex64::new(-1.0 / (12.0 * h), 0.0));
        let rhs = stepper.rhs(&u[i].spectrum(), &u[i]).to_field();
        worst = worst.max(dt.sub(&rhs).l2_norm());
    }
    worst
}

struct Attempt {
    iterations: usize,
    diffs: Vec<f64>,
    converged: bool,
    times: Vec<f64>,
    solution: Vec<GridField>,
}

fn iterate(spec: &SystemSpec, h: &GridField, cfg: &PicardConfig, t_max: f64) -> Result<Option<Attempt>> {
    let lin = LinearConfig {
        t_max,
        dt: cfg.dt,
        eps: cfg.eps,
        sample_every: usize::MAX,
        energy: false,
        keep_trajectory: true,
        cutoff: cfg.cutoff,
    };
    let steps = lin.steps();
    let dt = t_max / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let s = spec.sobolev_s;
    let target = cfg.tol * h.spectrum().sobolev_norm(s);
    let mut current = vec![h.clone(); steps + 1];
    let mut current_hs = sup_hs(&current, s);
    let mut diffs = Vec::new();
    for n in 1..=cfg.max_iters {
        let path = CoefficientPath::Sampled {
            times: times.clone(),
            fields: current.clone(),
        };
        let run = solve_linear(spec, &path, None, h, &lin)?;
        let next = run.trajectory;
        let next_hs = sup_hs(&next, s);
        if current_hs > 0.0 && next_hs > 2.0 * current_hs {
            log::info!("H^s norm doubled at iterate {n} ({current_hs:.3e} -> {next_hs:.3e})");
            return Ok(None);
        }
        let d = sup_diff(&next, &current);
        diffs.push(d);
        current = next;
        current_hs = next_hs;
        if d <= target {
            return Ok(Some(Attempt {
                iterations: n,
                diffs,
                converged: true,
                times,
                solution: current,
            }));
        }
    }
    Ok(Some(Attempt {
        iterations: cfg.max_iters,
        diffs,
        converged: false,
        times,
        solution: current,
    }))
}

/// Iterates to a fixed point, halving `T` (at most [`MAX_HALVINGS`] times)
/// when the iterates' `H^s` norms double.
pub fn picard_solve(spec: &SystemSpec, h: &GridField, cfg: &PicardConfig) -> Result<PicardReport> {
    if spec.sobolev_s <= 1.0 + spec.dim as f64 / 2.0 {
        log::warn!("s = {} is at or below 1 + d/2; the iteration may not close", spec.sobolev_s);
    }
    if !h.is_finite() {
        return Err(Error::NonFinite("initial data".into()));
    }
    let mut t_max = cfg.t_max;
    let mut halvings = 0;
    let attempt = loop {
        match iterate(spec, h, cfg, t_max)? {
            Some(a) => break a,
            None if halvings < MAX_HALVINGS => {
                halvings += 1;
                t_max *= 0.5;
                log::warn!("halving the interval to T = {t_max}");
            }
            None => {
                return Err(Error::Invalid(format!(
                    "Picard iterates unbounded even after {MAX_HALVINGS} halvings of T"
                )))
            }
        }
    };
    let floor = 1e-12 * h.l2_norm().max(f64::MIN_POSITIVE);
    let contraction = contraction_ratio(&attempt.diffs, floor);
    let residual = nonlinear_residual(spec, &attempt.times, &attempt.solution);
    let h_l2 = h.l2_norm();
    let residual_relative = if h_l2 > 0.0 { residual / h_l2 } else { residual };

    let trace = if cfg.energy {
        let path = CoefficientPath::Sampled {
            times: attempt.times.clone(),
            fields: attempt.solution.clone(),
        };
        let lin = LinearConfig {
            t_max,
            dt: cfg.dt,
            eps: cfg.eps,
            sample_every: cfg.sample_every,
            energy: true,
            keep_trajectory: false,
            cutoff: cfg.cutoff,
        };
        solve_linear(spec, &path, None, h, &lin)?.trace
    } else {
        EnergyTrace::default()
    };

    Ok(PicardReport {
        t_final: t_max,
        halvings,
        iterations: attempt.iterations,
        diffs: attempt.diffs,
        contraction,
        converged: attempt.converged,
        residual,
        residual_relative,
        times: attempt.times,
        solution: attempt.solution,
        trace,
    })
}
