//! Time integration of the linearized and quasilinear systems, with the
//! symmetrizer and energy diagnostics.

mod linear;
mod path;
mod picard;
mod stepper;
mod symmetrizer;
mod trace;

use num_complex::Complex64;

pub use linear::{growth_rate, solve_linear, LinearConfig, LinearRun, BLOWUP};
pub use path::{diagnostics_k, CoefficientPath, KDiagnostics};
pub use picard::{contraction_ratio, nonlinear_residual, picard_solve, PicardConfig, PicardReport, MAX_HALVINGS};
pub use stepper::{effective_kmax, linear_step, mollifier, FirstOrderTable, Forcing, SolverState, Stepper};
pub use symmetrizer::{
    build_symmetrizer, coercivity_ratio, v_symbol, zeta, SymmetrizerState, SymmetrizerSummary, COERCIVITY,
    MAX_DOUBLINGS, POWER_STEPS, PROBES,
};
pub use trace::{EnergySample, EnergyTrace};

use crate::error::{Error, Result};
use crate::paracalc::{hashed_gaussian, Grid, GridField, Spectrum};
use crate::symbol::SystemSpec;

/// `(L^d Σ (1+|ξ|²)^s |û|²)^{1/2}`; `s = 0` is the L² norm.
pub fn sobolev_norm(u: &GridField, s: f64) -> f64 {
    u.spectrum().sobolev_norm(s)
}

/// The grid a spec asks for.
pub fn spec_grid(spec: &SystemSpec) -> Grid {
    Grid::new(spec.dim, spec.grid_points, spec.period)
}

/// Initial data described by the spec: listed modes plus an optional
/// broadband part with `|ĥ(ξ)| ∝ (1+|ξ|²)^{−decay/2}`. The broadband draw
/// is keyed by integer wavenumber, so a finer grid sees the same function
/// plus its new high modes.
pub fn initial_data(spec: &SystemSpec, grid: Grid) -> Result<GridField> {
    let data = spec
        .initial_data
        .as_ref()
        .ok_or_else(|| Error::Invalid("spec has no initial_data".into()))?;
    let len = grid.len();
    let mut s = Spectrum::zeros(grid, spec.components);
    for m in &data.modes {
        if m.component >= spec.components {
            return Err(Error::Invalid(format!("mode component {} out of range", m.component)));
        }
        let i = grid
            .flat_of_wavenumbers(&m.wavenumber)
            .ok_or_else(|| Error::Invalid(format!("wavenumber {:?} not resolved on the grid", m.wavenumber)))?;
        s.coeffs[m.component * len + i] += m.amplitude;
    }
    if let Some(b) = &data.broadband {
        let limit = b.max_mode.unwrap_or(usize::MAX);
        for i in 0..len {
            let k = grid.wavenumbers(i);
            if k.iter().any(|&ki| ki.unsigned_abs() as usize > limit) {
                continue;
            }
            let r2: f64 = grid.xi(i).iter().map(|x| x * x).sum();
            let w = b.amplitude * (1.0 + r2).powf(-0.5 * b.decay);
            for c in 0..spec.components {
                s.coeffs[c * len + i] += hashed_gaussian(b.seed, &k, c as u64) * w;
            }
        }
    }
    Ok(s.to_field())
}

/// A single Fourier mode `amplitude·e^{iξ·x}` in one component.
pub fn single_mode(grid: Grid, components: usize, k: &[i64], component: usize, amplitude: Complex64) -> GridField {
    let mut s = Spectrum::zeros(grid, components);
    let i = grid.flat_of_wavenumbers(k).expect("wavenumber not resolved");
    s.coeffs[component * grid.len() + i] = amplitude;
    s.to_field()
}
