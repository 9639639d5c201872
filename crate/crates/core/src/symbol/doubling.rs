use num_complex::Complex64;

use super::{CoefficientMap, FirstOrderSymbol, QuadraticSymbol, SystemSpec, UTerm};
use crate::linalg::{self, ComplexMatrix};

fn block2(tl: &ComplexMatrix, tr: &ComplexMatrix, bl: &ComplexMatrix, br: &ComplexMatrix) -> ComplexMatrix {
    let n = tl.nrows();
    let mut m = linalg::zeros(2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(tl);
    m.view_mut((0, n), (n, n)).copy_from(tr);
    m.view_mut((n, 0), (n, n)).copy_from(bl);
    m.view_mut((n, n), (n, n)).copy_from(br);
    m
}

fn widen(monomial: &[u32]) -> Vec<u32> {
    let mut m = monomial.to_vec();
    m.resize(2 * monomial.len(), 0);
    m
}

/// Collects `(monomial, matrix)` pairs of one coefficient map, including
/// the constant under the empty monomial.
fn terms(map: &CoefficientMap, n: usize) -> Vec<(Vec<u32>, ComplexMatrix)> {
    let mut out = vec![(vec![0; 2 * n], map.constant.clone())];
    out.extend(map.u_terms.iter().map(|t| (t.monomial.clone(), t.coeff.clone())));
    out
}

/// Rewrites `B u + C ū` as a system in `(u, v = ū)` without conjugate
/// coupling: `𝒜 = diag(A, −Ā)`, `ℬ = [[B, C], [C̄, B̄]]`.
///
/// For real `A_jk` this is `diag(A, −A)`. The doubled state is `(u, ū)`;
/// u-terms keep reading the first half.
pub fn double_system(spec: &SystemSpec) -> SystemSpec {
    let n = spec.components;
    let d = spec.dim;
    let zero = linalg::zeros(n);
    let a = QuadraticSymbol {
        dim: d,
        components: 2 * n,
        coeffs: spec
            .a
            .coeffs
            .iter()
            .map(|m| block2(m, &zero, &zero, &(-linalg::conj(m))))
            .collect(),
    };
    let c_zero = FirstOrderSymbol::zero(d, n);
    let c = spec.c.as_ref().unwrap_or(&c_zero);
    let mut coeffs = Vec::with_capacity(d);
    for j in 0..d {
        // every monomial appearing in B_j or C_j becomes one doubled term
        let mut entries: Vec<(Vec<u32>, ComplexMatrix, ComplexMatrix)> = Vec::new();
        for (mono, m) in terms(&spec.b.coeffs[j], n) {
            match entries.iter_mut().find(|e| e.0 == mono) {
                Some(e) => e.1 += m,
                None => entries.push((mono, m, zero.clone())),
            }
        }
        for (mono, m) in terms(&c.coeffs[j], n) {
            match entries.iter_mut().find(|e| e.0 == mono) {
                Some(e) => e.2 += m,
                None => entries.push((mono, zero.clone(), m)),
            }
        }
        let mut constant = linalg::zeros(2 * n);
        let mut u_terms = Vec::new();
        for (mono, bm, cm) in entries {
            let big = block2(&bm, &cm, &linalg::conj(&cm), &linalg::conj(&bm));
            if mono.iter().all(|&e| e == 0) {
                constant += big;
            } else {
                u_terms.push(UTerm { monomial: widen(&mono), coeff: big });
            }
        }
        coeffs.push(CoefficientMap { constant, u_terms });
    }
    SystemSpec {
        name: spec.name.as_ref().map(|s| format!("{s} (doubled)")),
        dim: d,
        components: 2 * n,
        a,
        b: FirstOrderSymbol { components: 2 * n, coeffs },
        c: None,
        period: spec.period,
        grid_points: spec.grid_points,
        sobolev_s: spec.sobolev_s,
        initial_data: None,
    }
}

/// `(u, ū)`.
pub fn double_state(u: &[Complex64]) -> Vec<Complex64> {
    u.iter().copied().chain(u.iter().map(|z| z.conj())).collect()
}
