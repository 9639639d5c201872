use num_complex::Complex64;
use serde::Serialize;

use super::path::CoefficientPath;
use super::stepper::{Forcing, SolverState, Stepper};
use super::symmetrizer::{build_symmetrizer, SymmetrizerState, SymmetrizerSummary};
use super::trace::{EnergySample, EnergyTrace};
use crate::error::{Error, Result};
use crate::paracalc::{CutoffSpec, GridField};
use crate::symbol::SystemSpec;

pub const BLOWUP: f64 = 1e10;

#[derive(Debug, Clone, Serialize)]
pub struct LinearConfig {
    pub t_max: f64,
    pub dt: f64,
    pub eps: f64,
    /// Trace sample spacing in steps.
    pub sample_every: usize,
    /// Evaluate `(Σu, u)` at the samples.
    pub energy: bool,
    pub keep_trajectory: bool,
    pub cutoff: usize,
}

impl Default for LinearConfig {
    fn default() -> Self {
        Self {
            t_max: 1.0,
            dt: 1e-2,
            eps: 0.0,
            sample_every: 1,
            energy: true,
            keep_trajectory: false,
            cutoff: 3,
        }
    }
}

impl LinearConfig {
    pub fn steps(&self) -> usize {
        ((self.t_max / self.dt) - 1e-9).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone)]
pub struct LinearRun {
    pub state: SolverState,
    pub trace: EnergyTrace,
    /// States at every step time, when requested.
    pub trajectory: Vec<GridField>,
    pub symmetrizer: Option<SymmetrizerSummary>,
    /// `max [dE/dt − 2‖Σf‖‖u‖]/‖u‖²` over the run.
    pub fitted_c: Option<f64>,
    pub growth_rate: f64,
}

/// Least-squares slope of `ln ‖u‖` over the second half of the trace.
pub fn growth_rate(trace: &EnergyTrace) -> f64 {
    let Some(last) = trace.last() else { return 0.0 };
    let half = 0.5 * last.t;
    let pts: Vec<(f64, f64)> = trace
        .samples
        .iter()
        .filter(|s| s.t >= half && s.l2 > 0.0)
        .map(|s| (s.t, s.l2.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    crate::paracalc::ls_slope(&x, &y)
}

/// Running `K₀`, `K₁` along a path.
struct RunningK {
    s: f64,
    k0: f64,
    hs: f64,
    dt: f64,
}

impl RunningK {
    fn update(&mut self, path: &CoefficientPath, t: f64, h: f64, t_max: f64) {
        let a = path.at(t);
        self.k0 = self.k0.max(a.max_abs());
        self.hs = self.hs.max(a.spectrum().sobolev_norm(self.s));
        if !path.is_constant() {
            let (lo, hi) = ((t - h).max(0.0), (t + h).min(t_max));
            if hi > lo {
                let d = path.at(hi).sub(&path.at(lo)).scaled(Complex64::new(1.0 / (hi - lo), 0.0));
                self.dt = self.dt.max(d.spectrum().sobolev_norm(self.s - 2.0));
            }
        }
    }

    fn k1(&self) -> f64 {
        self.hs + self.dt
    }
}

/// Integrates the (mollified) linearized equation from `h` to `t_max`.
pub fn solve_linear(
    spec: &SystemSpec,
    path: &CoefficientPath,
    forcing: Option<Forcing>,
    h: &GridField,
    cfg: &LinearConfig,
) -> Result<LinearRun> {
    if !h.is_finite() {
        return Err(Error::NonFinite("initial data".into()));
    }
    let grid = h.grid;
    let steps = cfg.steps();
    let dt = cfg.t_max / steps as f64;
    let stepper = Stepper::new(spec, grid, dt, cfg.eps);
    match path {
        CoefficientPath::Constant(a) => stepper.check_cfl(a)?,
        CoefficientPath::Sampled { fields, .. } => {
            for a in fields {
                stepper.check_cfl(a)?;
            }
        }
    }
    let cut = CutoffSpec::new(cfg.cutoff);
    let mut sym: Option<SymmetrizerState> = if cfg.energy {
        Some(build_symmetrizer(spec, &path.at(0.0), cut)?)
    } else {
        None
    };
    let summary = sym.as_ref().map(|s| s.summary.clone());

    let mut trace = EnergyTrace::default();
    let mut sigma_f = Vec::new();
    let mut running = RunningK {
        s: spec.sobolev_s,
        k0: 0.0,
        hs: 0.0,
        dt: 0.0,
    };
    let mut trajectory = Vec::new();
    let l2_0 = h.l2_norm();
    let mut s = h.spectrum();
    let every = cfg.sample_every.max(1);

    let mut sample = |k: usize, u: &GridField, trace: &mut EnergyTrace, sym: &mut Option<SymmetrizerState>| -> Result<()> {
        let t = k as f64 * dt;
        running.update(path, t, dt, cfg.t_max);
        let mut sigma_energy = f64::NAN;
        let mut sf = 0.0;
        if let Some(state) = sym.as_mut() {
            if !path.is_constant() && k > 0 {
                *state = state.refrozen(spec, &path.at(t))?;
            }
            sigma_energy = state.energy(u);
            if let Some(f) = forcing {
                sf = state.apply_norm(&f(t));
            }
        }
        sigma_f.push(sf);
        trace.push(EnergySample {
            t,
            l2: u.l2_norm(),
            hs: u.spectrum().sobolev_norm(spec.sobolev_s),
            sigma_energy,
            k0: running.k0,
            k1: running.k1(),
        });
        Ok(())
    };

    sample(0, h, &mut trace, &mut sym)?;
    if cfg.keep_trajectory {
        trajectory.push(h.clone());
    }
    for k in 1..=steps {
        stepper.step(&mut s, (k - 1) as f64 * dt, path, forcing);
        let l2 = s.l2_norm();
        let t = k as f64 * dt;
        if !l2.is_finite() || (l2_0 > 0.0 && l2 > BLOWUP * l2_0) {
            return Err(Error::IllPosedSuspected {
                t,
                growth: if l2.is_finite() { l2 / l2_0 } else { f64::INFINITY },
                trace: Box::new(trace),
            });
        }
        let need_field = cfg.keep_trajectory || k % every == 0 || k == steps;
        if need_field {
            let u = s.to_field();
            if k % every == 0 || k == steps {
                sample(k, &u, &mut trace, &mut sym)?;
            }
            if cfg.keep_trajectory {
                trajectory.push(u);
            }
        }
    }

    let fitted_c = summary.as_ref().map(|_| {
        let mut best = f64::NEG_INFINITY;
        for (i, w) in trace.samples.windows(2).enumerate() {
            let (a, b) = (&w[0], &w[1]);
            let de = (b.sigma_energy - a.sigma_energy) / (b.t - a.t);
            let u_mid = 0.5 * (a.l2 + b.l2);
            let sf = 0.5 * (sigma_f[i] + sigma_f[i + 1]);
            if u_mid > 0.0 {
                best = best.max((de - 2.0 * sf * u_mid) / (u_mid * u_mid));
            }
        }
        best
    });
    let growth = growth_rate(&trace);
    Ok(LinearRun {
        state: SolverState {
            t: cfg.t_max,
            u: s.to_field(),
            dt,
            eps: cfg.eps,
        },
        trace,
        trajectory,
        symmetrizer: summary,
        fitted_c,
        growth_rate: growth,
    })
}
