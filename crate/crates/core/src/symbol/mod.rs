//! Symbol algebra for `∂ₜu + iA(∂ₓ)u + B(u, ∂ₓ)u (+ C(u, ∂ₓ)ū) = 0`.
//!
//! Fourier convention: `∂_j ↦ iξ_j`, so the dispersive symbol is
//! `A(iξ) = −Σ A_jk ξ_j ξ_k` and the first-order symbol is `iB(ξ)` with
//! `B(ξ) = Σ ξ_j B_j`.

mod assumptions;
mod conjugator;
mod doubling;
mod eigen;
mod linearize;
mod spec;

pub use assumptions::{
    check_assumption_2_2, check_assumption_2_7, sphere_samples, state_samples, AssumptionReport, BlockFamily,
    Verdict, Witness, WitnessKind,
};
pub use conjugator::{build_v_minus_one, conjugated_symbol, conjugator_at};
pub use doubling::{double_state, double_system};
pub use eigen::{eigen_decompose, eigen_decompose_matrix, track_along_path, track_branches, Branch, EigenStructure};
pub use linearize::{linearized_symbols, wirtinger_partials, LinearizedSymbols};
pub(crate) use spec::parse_matrix as parse_matrix_value;
pub use spec::{
    monomial_value, BroadbandData, CoefficientMap, FirstOrderSymbol, InitialData, ModeData, QuadraticSymbol,
    SystemSpec, UTerm,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};

/// Eigenvalues closer than `TAU_CLUSTER·|ξ|²` (times the coefficient scale)
/// are merged into one branch.
pub const TAU_CLUSTER: f64 = 1e-8;
/// Algebraic identities are checked to `TAU_ALG` times the matrix scale.
pub const TAU_ALG: f64 = 1e-9;
/// Floor for eigenvalue-gap divisors.
pub const TAU_DIV: f64 = 1e-6;

pub fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `A(iξ) = −Σ A_jk ξ_j ξ_k` without the Hermitian check.
pub fn eval_a_unchecked(a: &QuadraticSymbol, xi: &[f64]) -> ComplexMatrix {
    let mut m = linalg::zeros(a.components);
    for j in 0..a.dim {
        for k in 0..a.dim {
            let w = xi[j] * xi[k];
            if w != 0.0 {
                m -= a.coeff(j, k) * linalg::c(w);
            }
        }
    }
    m
}

/// Symbol of `A(∂ₓ)` at `ξ`. Errors when the result is not Hermitian.
pub fn eval_a(a: &QuadraticSymbol, xi: &[f64]) -> Result<ComplexMatrix> {
    if xi.len() != a.dim || xi.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("frequency {xi:?} is not a finite {}-vector", a.dim)));
    }
    let m = eval_a_unchecked(a, xi);
    let scale = a.scale() * norm(xi).powi(2);
    let dev = linalg::hermitian_deviation(&m);
    if dev > TAU_ALG * scale {
        return Err(Error::Structural {
            xi: xi.to_vec(),
            message: format!("A(xi) is not self-adjoint (deviation {dev:.3e})"),
        });
    }
    Ok(m)
}

/// Fourier-side generator `M(ξ) = −i·A(iξ) − iB(u, ξ)` of the constant
/// coefficient problem frozen at `u`.
pub fn generator(spec: &SystemSpec, u: &[Complex64], xi: &[f64]) -> ComplexMatrix {
    let a = eval_a_unchecked(&spec.a, xi);
    let b = spec.b.eval(u, xi);
    (a + b) * (-linalg::I)
}
