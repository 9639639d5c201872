//! The energy symmetrizer `Σ = Id − T_V − (T_V)* + γ(1 − Δ)^{−1}`.
//!
//! `V = ζ(ξ) V₋₁(a(x), ξ)` is Hermitian, so this is the usual
//! `Id + iT_W − i(T_W)*` with `W = iV`. It is a diagnostic only: the
//! solver never applies it to advance the state.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::paracalc::{random_field, smoothstep, CutoffSpec, Grid, GridField, ParaOperator, ParadiffSymbol, Spectrum};
use crate::symbol::{build_v_minus_one, double_state, double_system, eigen_decompose, SystemSpec, TAU_CLUSTER};

pub const COERCIVITY: f64 = 0.5;
pub const POWER_STEPS: usize = 20;
pub const PROBES: usize = 10;
pub const MAX_DOUBLINGS: usize = 8;

const START_SEED: u64 = 0x5ee_d5ee_d;

/// 0 on `|ξ| ≤ 1/4`, 1 on `|ξ| ≥ 1`.
pub fn zeta(r: f64) -> f64 {
    smoothstep((r - 0.25) / 0.75)
}

/// The system the symmetrizer acts on: the spec itself, or its doubling
/// when a conjugate coupling is present.
fn working_spec(spec: &SystemSpec) -> (SystemSpec, bool) {
    if spec.has_conjugate_coupling() {
        (double_system(spec), true)
    } else {
        (spec.clone(), false)
    }
}

fn working_state(a: &GridField, doubled: bool) -> GridField {
    if !doubled {
        return a.clone();
    }
    let len = a.grid.len();
    let mut out = GridField::zeros(a.grid, 2 * a.components);
    for i in 0..len {
        for (c, v) in double_state(&a.at(i)).into_iter().enumerate() {
            out.values[c * len + i] = v;
        }
    }
    out
}

fn stack_conj(u: &GridField) -> GridField {
    GridField::stack(&[u.clone(), u.conj()])
}

/// `V(x, ξ)` as a separable symbol of order −1, frozen at `a`.
pub fn v_symbol(spec: &SystemSpec, a: &GridField) -> Result<ParadiffSymbol> {
    let (work, doubled) = working_spec(spec);
    let state = working_state(a, doubled);
    let raw = ParadiffSymbol::first_order(&work.b, &state);
    // fail early on any grid frequency where V cannot be built
    for i in 0..a.grid.len() {
        let xi = a.grid.xi(i);
        let r = crate::symbol::norm(&xi);
        if zeta(r) == 0.0 {
            continue;
        }
        let es = eigen_decompose(&work.a, &xi, TAU_CLUSTER)?;
        for t in &raw.terms {
            build_v_minus_one(&es, &linalg::im_part(&(t.multiplier)(&xi)))?;
        }
    }
    let qa = work.a.clone();
    let n = work.components;
    let map = Arc::new(move |xi: &[f64], m: linalg::ComplexMatrix| {
        let z = zeta(crate::symbol::norm(xi));
        if z == 0.0 {
            return linalg::zeros(n);
        }
        eigen_decompose(&qa, xi, TAU_CLUSTER)
            .and_then(|es| build_v_minus_one(&es, &linalg::im_part(&m)))
            .map(|v| v * linalg::c(z))
            .unwrap_or_else(|_| linalg::zeros(n))
    });
    Ok(ParadiffSymbol::frozen_with(&work.b, &state, -1.0, map))
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetrizerSummary {
    pub gamma: f64,
    /// Measured `‖T_V‖_{L² → H¹}`.
    pub c0_hat: f64,
    pub doublings: usize,
    /// `min (Σu, u)/‖u‖²` over the probes.
    pub min_ratio: f64,
    /// `max ‖Σu‖/‖u‖` over the probes.
    pub bound: f64,
}

pub struct SymmetrizerState {
    pub summary: SymmetrizerSummary,
    doubled: bool,
    op: ParaOperator,
}

impl SymmetrizerState {
    pub fn gamma(&self) -> f64 {
        self.summary.gamma
    }

    fn lift(&self, u: &GridField) -> GridField {
        if self.doubled {
            stack_conj(u)
        } else {
            u.clone()
        }
    }

    fn apply_lifted(&self, s: &Spectrum) -> Spectrum {
        let tv = self.op.apply_spectrum(s);
        let tvs = self.op.apply_adjoint_spectrum(s);
        let gamma = self.summary.gamma;
        let norms = s.grid.xi_norms();
        let len = s.grid.len();
        let mut out = s.clone();
        for c in 0..s.components {
            for i in 0..len {
                let k = c * len + i;
                out.coeffs[k] += gamma / (1.0 + norms[i] * norms[i]) * s.coeffs[k] - tv.coeffs[k] - tvs.coeffs[k];
            }
        }
        out
    }

    /// `Σu` (on `(u, ū)` when the system is doubled).
    pub fn apply(&self, u: &GridField) -> GridField {
        self.apply_lifted(&self.lift(u).spectrum()).to_field()
    }

    /// `(Σu, u)`, normalized so that `Σ = Id` gives `‖u‖²`.
    pub fn energy(&self, u: &GridField) -> f64 {
        let s = self.lift(u).spectrum();
        let su = self.apply_lifted(&s);
        let vol = s.grid.volume();
        let e: f64 = su.coeffs.iter().zip(&s.coeffs).map(|(a, b)| (a * b.conj()).re).sum::<f64>() * vol;
        if self.doubled {
            0.5 * e
        } else {
            e
        }
    }

    /// `‖Σf‖` on the same scale as [`Self::energy`].
    pub fn apply_norm(&self, f: &GridField) -> f64 {
        let n = self.apply(f).l2_norm();
        if self.doubled {
            n / std::f64::consts::SQRT_2
        } else {
            n
        }
    }

    /// The same symmetrizer frozen at a new coefficient, keeping `γ`.
    pub fn refrozen(&self, spec: &SystemSpec, a: &GridField) -> Result<Self> {
        let sym = v_symbol(spec, a)?;
        Ok(Self {
            summary: self.summary.clone(),
            doubled: self.doubled,
            op: self.op.with_coefficients(&sym),
        })
    }
}

fn power_iteration(op: &ParaOperator, grid: Grid, components: usize) -> f64 {
    let norms = grid.xi_norms();
    let lift = |s: &mut Spectrum| {
        let w: Vec<f64> = norms.iter().map(|r| 1.0 + r * r).collect();
        s.apply_weights(&w);
    };
    let mut x = random_field(grid, components, grid.n / 2, 0.0, START_SEED).spectrum();
    let mut estimate = 0.0;
    for _ in 0..POWER_STEPS {
        let nx = x.l2_norm();
        if nx == 0.0 {
            return 0.0;
        }
        x.coeffs.iter_mut().for_each(|z| *z /= nx);
        let tv = op.apply_spectrum(&x);
        estimate = tv.sobolev_norm(1.0);
        let mut y = tv;
        lift(&mut y);
        x = op.apply_adjoint_spectrum(&y);
    }
    estimate
}

/// Builds `Σ` at the coefficient `a`, chooses `γ = 2Ĉ₀²` and checks
/// coercivity on random probes, doubling `γ` when needed.
pub fn build_symmetrizer(spec: &SystemSpec, a: &GridField, cut: CutoffSpec) -> Result<SymmetrizerState> {
    let sym = v_symbol(spec, a)?;
    let grid = a.grid;
    let op = ParaOperator::new(&sym, grid, cut);
    let lifted = if spec.has_conjugate_coupling() { 2 * spec.components } else { spec.components };
    let c0_hat = power_iteration(&op, grid, lifted);
    let mut state = SymmetrizerState {
        summary: SymmetrizerSummary {
            gamma: 2.0 * c0_hat * c0_hat,
            c0_hat,
            doublings: 0,
            min_ratio: 0.0,
            bound: 0.0,
        },
        doubled: spec.has_conjugate_coupling(),
        op,
    };
    let probes: Vec<GridField> = (0..PROBES)
        .map(|i| random_field(grid, spec.components, grid.n / 2, (i % 3) as f64, START_SEED + 1 + i as u64))
        .collect();
    loop {
        let mut min_ratio = f64::INFINITY;
        let mut bound: f64 = 0.0;
        for p in &probes {
            let n2 = p.l2_norm().powi(2);
            min_ratio = min_ratio.min(state.energy(p) / n2);
            bound = bound.max(state.apply_norm(p) / n2.sqrt());
        }
        state.summary.min_ratio = min_ratio;
        state.summary.bound = bound;
        if min_ratio >= COERCIVITY {
            return Ok(state);
        }
        if state.summary.doublings == MAX_DOUBLINGS {
            return Err(Error::Coercivity {
                doublings: MAX_DOUBLINGS,
                min_ratio,
            });
        }
        state.summary.doublings += 1;
        state.summary.gamma = if state.summary.gamma > 0.0 { 2.0 * state.summary.gamma } else { 1.0 };
        log::debug!("coercivity ratio {min_ratio:.4}, gamma raised to {}", state.summary.gamma);
    }
}

/// Scalar helper shared by tests and reports.
pub fn coercivity_ratio(state: &SymmetrizerState, u: &GridField) -> f64 {
    state.energy(u) / u.l2_norm().powi(2)
}
