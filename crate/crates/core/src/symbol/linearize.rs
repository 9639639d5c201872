//! Principal symbols of a fully nonlinear first-order term `F(u, ∇u)`.
//!
//! With `v_j = ∂_j u`, the linearization is `B(ξ) = Σ ξ_j ∂F/∂v_j` and
//! `C(ξ) = Σ ξ_j ∂F/∂v̄_j`, with Wirtinger derivatives
//! `∂/∂v = ½(∂/∂Re v − i ∂/∂Im v)` and `∂/∂v̄ = ½(∂/∂Re v + i ∂/∂Im v)`.

use num_complex::Complex64;

use crate::linalg::{self, ComplexMatrix};

#[derive(Debug, Clone)]
pub struct LinearizedSymbols {
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
}

/// Contracts the partial-derivative matrices (one per direction) with `ξ`.
pub fn linearized_symbols(dfdv: &[ComplexMatrix], dfdvbar: &[ComplexMatrix], xi: &[f64]) -> LinearizedSymbols {
    let n = dfdv.first().or(dfdvbar.first()).map_or(0, |m| m.nrows());
    let contract = |ms: &[ComplexMatrix]| {
        ms.iter()
            .zip(xi)
            .fold(linalg::zeros(n), |acc, (m, &x)| acc + m * linalg::c(x))
    };
    LinearizedSymbols {
        b: contract(dfdv),
        c: contract(dfdvbar),
    }
}

/// Wirtinger partials of `f(u, v)` with respect to every gradient slot
/// `v_j`, by central differences of step `h` in `Re v` and `Im v`.
/// Returns `(∂F/∂v_j, ∂F/∂v̄_j)` for `j = 1..d`.
pub fn wirtinger_partials<F>(f: F, u: &[Complex64], v: &[Vec<Complex64>], h: f64) -> (Vec<ComplexMatrix>, Vec<ComplexMatrix>)
where
    F: Fn(&[Complex64], &[Vec<Complex64>]) -> Vec<Complex64>,
{
    let d = v.len();
    let n = u.len();
    let mut dv = Vec::with_capacity(d);
    let mut dvbar = Vec::with_capacity(d);
    for j in 0..d {
        let mut mv = linalg::zeros(n);
        let mut mvbar = linalg::zeros(n);
        for k in 0..n {
            let diff = |step: Complex64| {
                let mut plus = v.to_vec();
                let mut minus = v.to_vec();
                plus[j][k] += step;
                minus[j][k] -= step;
                let fp = f(u, &plus);
                let fm = f(u, &minus);
                fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>()
            };
            let d_re = diff(Complex64::new(h, 0.0));
            let d_im = diff(Complex64::new(0.0, h));
            for i in 0..n {
                mv[(i, k)] = (d_re[i] - linalg::I * d_im[i]) * 0.5;
                mvbar[(i, k)] = (d_re[i] + linalg::I * d_im[i]) * 0.5;
            }
        }
        dv.push(mv);
        dvbar.push(mvbar);
    }
    (dv, dvbar)
}
