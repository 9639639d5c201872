#![allow(dead_code)]

use dispersio::linalg::ComplexMatrix;
use dispersio::symbol::{QuadraticSymbol, SystemSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real(rows: &[&[f64]]) -> ComplexMatrix {
    let n = rows.len();
    ComplexMatrix::from_fn(n, n, |i, j| z(rows[i][j], 0.0))
}

pub fn cmat(rows: &[&[(f64, f64)]]) -> ComplexMatrix {
    let n = rows.len();
    ComplexMatrix::from_fn(n, n, |i, j| z(rows[i][j].0, rows[i][j].1))
}

pub fn diag(v: &[f64]) -> ComplexMatrix {
    let n = v.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { z(v[i], 0.0) } else { z(0.0, 0.0) })
}

pub fn fro(m: &ComplexMatrix) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| z(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let m = random_matrix(rng, n);
    (&m + m.adjoint()) * z(0.5, 0.0)
}

/// The dispersive part of the 2×2 model system: `A_11 = diag(1, −1)`.
pub fn model_a() -> QuadraticSymbol {
    QuadraticSymbol::new(1, 2, vec![diag(&[1.0, -1.0])]).unwrap()
}

pub fn model_system() -> SystemSpec {
    SystemSpec::constant(model_a(), vec![real(&[&[0.0, 1.0], &[-1.0, 0.0]])])
}

pub fn pauli_x() -> ComplexMatrix {
    real(&[&[0.0, 1.0], &[1.0, 0.0]])
}
