use num_complex::Complex64;

use super::{eigen_decompose, eval_a_unchecked, EigenStructure, SystemSpec, TAU_ALG, TAU_CLUSTER, TAU_DIV};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};

/// `V = −i Σ_{p≠q} Π_p (Im B) Π_q / (λ_p − λ_q)`.
///
/// `V` is Hermitian and `B − [V, A]` is self-adjoint: every off-diagonal
/// block of `[V, A]` equals `i Π_p (Im B) Π_q`. Pairs whose gap is below the
/// divisor floor are skipped when their block vanishes and rejected
/// otherwise.
pub fn build_v_minus_one(es: &EigenStructure, imb: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = imb.nrows();
    let tol = TAU_ALG * linalg::fro_norm(imb).max(1.0);
    let mut v = linalg::zeros(n);
    for (p, bp) in es.branches.iter().enumerate() {
        for (q, bq) in es.branches.iter().enumerate() {
            if p == q {
                continue;
            }
            let block = &bp.projector * imb * &bq.projector;
            let gap = bp.lambda - bq.lambda;
            if gap.abs() < TAU_DIV {
                if linalg::fro_norm(&block) <= tol {
                    continue;
                }
                return Err(Error::Degenerate { xi: es.xi.clone(), p, q, gap });
            }
            v += block * Complex64::new(0.0, -1.0 / gap);
        }
    }
    Ok(v)
}

/// The conjugator for `spec` frozen at state `u` and frequency `ξ ≠ 0`.
pub fn conjugator_at(spec: &SystemSpec, u: &[Complex64], xi: &[f64]) -> Result<ComplexMatrix> {
    let es = eigen_decompose(&spec.a, xi, TAU_CLUSTER)?;
    build_v_minus_one(&es, &linalg::im_part(&spec.b.eval(u, xi)))
}

/// `B − [V, A]` at the given frequency.
pub fn conjugated_symbol(spec: &SystemSpec, u: &[Complex64], xi: &[f64], v: &ComplexMatrix) -> ComplexMatrix {
    let a = eval_a_unchecked(&spec.a, xi);
    spec.b.eval(u, xi) - linalg::commutator(v, &a)
}
