//! Symbolic-calculus defects. Each returns the defect applied to `u`.

use num_complex::Complex64;

use super::cutoff::CutoffSpec;
use super::grid::GridField;
use super::operator::{apply_t, ParaOperator};
use super::symbol::ParadiffSymbol;

/// `(T_a T_b − T_{ab}) u`.
pub fn compose_defect(a: &ParadiffSymbol, b: &ParadiffSymbol, u: &GridField, cut: CutoffSpec) -> GridField {
    let tb = apply_t(b, u, cut);
    apply_t(a, &tb, cut).sub(&apply_t(&a.product(b), u, cut))
}

/// `((T_a)* − T_{a*}) u` with the exact discrete adjoint.
pub fn adjoint_defect(a: &ParadiffSymbol, u: &GridField, cut: CutoffSpec) -> GridField {
    let op = ParaOperator::new(a, u.grid, cut);
    op.apply_adjoint(u).sub(&apply_t(&a.adjoint(), u, cut))
}

/// `(T_a^{ψ₁} − T_a^{ψ₂}) u`.
pub fn cutoff_independence(a: &ParadiffSymbol, u: &GridField, psi1: CutoffSpec, psi2: CutoffSpec) -> GridField {
    apply_t(a, u, psi1).sub(&apply_t(a, u, psi2))
}

/// `[∂ₜ, T_a] u = T_{∂ₜa} u`: the coefficient low-pass is applied to
/// `∂ₜa` band by band, which is what keeps the result bounded when `∂ₜa`
/// is only Besov-regular.
pub fn time_commutator(dta: &ParadiffSymbol, u: &GridField, cut: CutoffSpec) -> GridField {
    apply_t(dta, u, cut)
}

/// `∂_j u` by spectral differentiation.
pub fn derivative(u: &GridField, j: usize) -> GridField {
    let mut s = u.spectrum();
    s.apply_scalar(|xi| Complex64::new(0.0, xi[j]));
    s.to_field()
}

/// `max|a| + max|∇a|` on the grid.
pub fn w1_inf_norm(a: &GridField) -> f64 {
    let grads: Vec<GridField> = (0..a.grid.dim).map(|j| derivative(a, j)).collect();
    let len = a.grid.len();
    let mut g = 0.0f64;
    for i in 0..len {
        let mut s = 0.0;
        for d in &grads {
            for c in 0..a.components {
                s += d.values[c * len + i].norm_sqr();
            }
        }
        g = g.max(s.sqrt());
    }
    a.max_abs() + g
}
