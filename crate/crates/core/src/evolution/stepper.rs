//! Strang splitting for `∂ₜu = −iA(∂ₓ)J_ε u − B(a, ∂ₓ)J_ε u − C(a, ∂ₓ)(J_ε u)‾ + f`.
//!
//! The dispersive half steps are exact Fourier multipliers; the first-order
//! part takes one explicit midpoint step, evaluated pseudo-spectrally.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::path::CoefficientPath;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::paracalc::{fft_nd, Grid, GridField, Spectrum};
use crate::symbol::{eval_a_unchecked, monomial_value, FirstOrderSymbol, SystemSpec};

/// `B_j(a)` as constants plus monomial-weighted matrices, flattened
/// `[j][row][col]`.
#[derive(Debug, Clone)]
pub struct FirstOrderTable {
    pub components: usize,
    pub dim: usize,
    constant: Vec<Complex64>,
    monomials: Vec<(Vec<u32>, Vec<Complex64>)>,
}

fn flatten(mats: &[ComplexMatrix]) -> Vec<Complex64> {
    let mut out = Vec::new();
    for m in mats {
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                out.push(m[(r, c)]);
            }
        }
    }
    out
}

impl FirstOrderTable {
    pub fn new(b: &FirstOrderSymbol) -> Self {
        let n = b.components;
        let dim = b.dim();
        let constant = flatten(&b.coeffs.iter().map(|m| m.constant.clone()).collect::<Vec<_>>());
        let mut by: BTreeMap<Vec<u32>, Vec<ComplexMatrix>> = BTreeMap::new();
        for (j, cm) in b.coeffs.iter().enumerate() {
            for t in &cm.u_terms {
                by.entry(t.monomial.clone()).or_insert_with(|| vec![linalg::zeros(n); dim])[j] += &t.coeff;
            }
        }
        let monomials = by.into_iter().map(|(m, mats)| (m, flatten(&mats))).collect();
        Self {
            components: n,
            dim,
            constant,
            monomials,
        }
    }

    pub fn is_state_independent(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.constant.iter().all(|z| z.norm_sqr() == 0.0)
            && self.monomials.iter().all(|(_, m)| m.iter().all(|z| z.norm_sqr() == 0.0))
    }

    /// `[j][row][col]` at one state value.
    pub fn at(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.constant.clone();
        for (mono, mats) in &self.monomials {
            let w = monomial_value(mono, u);
            if w != 0.0 {
                for (o, m) in out.iter_mut().zip(mats) {
                    *o += m * w;
                }
            }
        }
        out
    }

    /// Per-node tables for a coefficient field, `[node][j][row][col]`.
    pub fn nodes(&self, a: &GridField) -> Vec<Complex64> {
        let len = a.grid.len();
        let mut out = Vec::with_capacity(len * self.constant.len());
        for i in 0..len {
            out.extend(self.at(&a.at(i)));
        }
        out
    }

    /// `max_x Σ_j ‖B_j(a(x))‖_F`.
    pub fn sup_norm(&self, a: &GridField) -> f64 {
        let block = self.components * self.components;
        let len = a.grid.len();
        let mut best: f64 = 0.0;
        for i in 0..if self.is_state_independent() { 1 } else { len } {
            let t = self.at(&a.at(i));
            let s: f64 = t.chunks(block).map(|m| m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).sum();
            best = best.max(s);
        }
        best
    }
}

pub type Forcing<'a> = &'a (dyn Fn(f64) -> GridField + Sync);

#[derive(Debug, Clone)]
pub struct SolverState {
    pub t: f64,
    pub u: GridField,
    pub dt: f64,
    pub eps: f64,
}

/// `1/(1 + ε|ξ|²)`.
pub fn mollifier(eps: f64, r: f64) -> f64 {
    1.0 / (1.0 + eps * r * r)
}

/// Everything that does not change from step to step.
pub struct Stepper {
    pub grid: Grid,
    pub components: usize,
    pub dt: f64,
    pub eps: f64,
    half: Vec<Complex64>,
    /// `−i A(iξ) J_ε(ξ)` per mode.
    dispersive: Vec<Complex64>,
    /// `ξ_j J_ε(ξ)` per direction.
    grad_weights: Vec<Vec<f64>>,
    b: FirstOrderTable,
    c: Option<FirstOrderTable>,
}

/// Bound used by the first-order CFL proxy: `max_ξ |ξ| J_ε(ξ)`.
pub fn effective_kmax(grid: &Grid, eps: f64) -> f64 {
    grid.xi_norms().into_iter().map(|r| r * mollifier(eps, r)).fold(0.0, f64::max)
}

impl Stepper {
    pub fn new(spec: &SystemSpec, grid: Grid, dt: f64, eps: f64) -> Self {
        let n = spec.components;
        let len = grid.len();
        let norms = grid.xi_norms();
        let j_eps: Vec<f64> = norms.iter().map(|&r| mollifier(eps, r)).collect();
        let mut half = Vec::with_capacity(len * n * n);
        let mut dispersive = Vec::with_capacity(len * n * n);
        let mut max_phase: f64 = 0.0;
        for i in 0..len {
            let a = eval_a_unchecked(&spec.a, &grid.xi(i));
            for r in 0..n {
                for c in 0..n {
                    dispersive.push(a[(r, c)] * Complex64::new(0.0, -j_eps[i]));
                }
            }
            let m = &a * Complex64::new(0.0, -0.5 * dt * j_eps[i]);
            max_phase = max_phase.max(linalg::op_norm(&a) * dt * j_eps[i]);
            let e = linalg::expm(&m);
            for r in 0..n {
                for c in 0..n {
                    half.push(e[(r, c)]);
                }
            }
        }
        if max_phase > std::f64::consts::PI {
            log::warn!(
                "dispersive phase per step reaches {max_phase:.2} rad; splitting resonances possible at high modes"
            );
        }
        let grad_weights = (0..grid.dim)
            .map(|j| (0..len).map(|i| grid.xi(i)[j] * j_eps[i]).collect())
            .collect();
        Self {
            grid,
            components: n,
            dt,
            eps,
            half,
            dispersive,
            grad_weights,
            b: FirstOrderTable::new(&spec.b),
            c: spec.c.as_ref().map(FirstOrderTable::new),
        }
    }

    /// `Δt·‖B‖·k_max ≤ 1`, with `‖B‖` the sup over the coefficient.
    pub fn check_cfl(&self, a: &GridField) -> Result<()> {
        let norm = self.b.sup_norm(a) + self.c.as_ref().map_or(0.0, |c| c.sup_norm(a));
        let k = effective_kmax(&self.grid, self.eps);
        let load = self.dt * norm * k;
        if load > 1.0 {
            return Err(Error::Cfl {
                dt: self.dt,
                suggested: 1.0 / (norm * k),
            });
        }
        Ok(())
    }

    fn dispersive_half(&self, s: &mut Spectrum) {
        Self::apply_table(&self.half, self.components, s);
    }

    fn apply_table(table: &[Complex64], n: usize, s: &mut Spectrum) {
        let len = s.grid.len();
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..len {
            let e = &table[i * n * n..(i + 1) * n * n];
            for (c, x) in v.iter_mut().enumerate() {
                *x = s.coeffs[c * len + i];
            }
            for r in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..n {
                    acc += e[r * n + c] * v[c];
                }
                s.coeffs[r * len + i] = acc;
            }
        }
    }

    /// Physical values of `∂_j J_ε u` for every direction.
    fn gradients(&self, s: &Spectrum) -> Vec<Vec<Complex64>> {
        let len = self.grid.len();
        self.grad_weights
            .iter()
            .map(|w| {
                let mut g = s.coeffs.clone();
                for chunk in g.chunks_mut(len) {
                    for (z, w) in chunk.iter_mut().zip(w) {
                        *z *= Complex64::new(0.0, *w);
                    }
                }
                for chunk in g.chunks_mut(len) {
                    fft_nd(chunk, self.grid.n, self.grid.dim, true);
                }
                g
            })
            .collect()
    }

    /// `−B(a)∂J_ε u − C(a)(∂J_ε u)‾ + f` in spectral form, from per-node
    /// (or shared) `B` and `C` tables.
    pub fn first_order_rhs(
        &self,
        s: &Spectrum,
        b_nodes: &[Complex64],
        c_nodes: Option<&[Complex64]>,
        f: Option<&GridField>,
    ) -> Spectrum {
        let n = self.components;
        let d = self.grid.dim;
        let len = self.grid.len();
        let grads = self.gradients(s);
        let mut out = GridField::zeros(self.grid, n);
        let per = d * n * n;
        let shared = b_nodes.len() == per;
        for i in 0..len {
            let bt = if shared { b_nodes } else { &b_nodes[i * per..(i + 1) * per] };
            let ct = c_nodes.map(|c| if c.len() == per { c } else { &c[i * per..(i + 1) * per] });
            for r in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, g) in grads.iter().enumerate() {
                    for c in 0..n {
                        let w = g[c * len + i];
                        acc -= bt[j * n * n + r * n + c] * w;
                        if let Some(ct) = ct {
                            acc -= ct[j * n * n + r * n + c] * w.conj();
                        }
                    }
                }
                out.values[r * len + i] = acc;
            }
        }
        if let Some(f) = f {
            out.add_scaled(f, Complex64::new(1.0, 0.0));
        }
        out.spectrum()
    }

    fn tables(&self, a: &GridField) -> (Vec<Complex64>, Option<Vec<Complex64>>) {
        let node = |t: &FirstOrderTable| {
            if t.is_state_independent() {
                t.at(&vec![Complex64::new(0.0, 0.0); self.components])
            } else {
                t.nodes(a)
            }
        };
        (node(&self.b), self.c.as_ref().map(node))
    }

    /// Full right-hand side `−iA(∂ₓ)J_ε u − B(a)∂J_ε u − C(a)(∂J_ε u)‾`.
    pub fn rhs(&self, s: &Spectrum, a: &GridField) -> Spectrum {
        let (b, c) = self.tables(a);
        let mut out = self.first_order_rhs(s, &b, c.as_deref(), None);
        let mut disp = s.clone();
        Self::apply_table(&self.dispersive, self.components, &mut disp);
        for (o, d) in out.coeffs.iter_mut().zip(&disp.coeffs) {
            *o += d;
        }
        out
    }

    /// One Strang step from `t` to `t + Δt`.
    pub fn step(&self, s: &mut Spectrum, t: f64, path: &CoefficientPath, forcing: Option<Forcing>) {
        self.dispersive_half(s);
        let dt = self.dt;
        let skip = self.b.is_zero() && self.c.is_none() && forcing.is_none();
        if !skip {
            let (b0, c0) = self.tables(&path.at(t));
            let f0 = forcing.map(|f| f(t));
            let k1 = self.first_order_rhs(s, &b0, c0.as_deref(), f0.as_ref());
            let mut mid = s.clone();
            for (m, k) in mid.coeffs.iter_mut().zip(&k1.coeffs) {
                *m += k * (0.5 * dt);
            }
            let tm = t + 0.5 * dt;
            let (bm, cm) = if path.is_constant() { (b0, c0) } else { self.tables(&path.at(tm)) };
            let fm = forcing.map(|f| f(tm));
            let k2 = self.first_order_rhs(&mid, &bm, cm.as_deref(), fm.as_ref());
            for (x, k) in s.coeffs.iter_mut().zip(&k2.coeffs) {
                *x += k * dt;
            }
        }
        self.dispersive_half(s);
    }
}

/// Advances `state` by one step.
pub fn linear_step(
    spec: &SystemSpec,
    state: &SolverState,
    path: &CoefficientPath,
    forcing: Option<Forcing>,
) -> Result<SolverState> {
    let stepper = Stepper::new(spec, state.u.grid, state.dt, state.eps);
    stepper.check_cfl(&path.at(state.t))?;
    let mut s = state.u.spectrum();
    stepper.step(&mut s, state.t, path, forcing);
    let u = s.to_field();
    if !u.is_finite() {
        return Err(Error::NonFinite(format!("state at t = {}", state.t + state.dt)));
    }
    Ok(SolverState {
        t: state.t + state.dt,
        u,
        ..state.clone()
    })
}
