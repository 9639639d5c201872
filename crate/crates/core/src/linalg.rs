//! Small dense complex linear algebra used by the symbol and stability layers.
//!
//! Matrices here are tiny (N×N with N the number of coupled components), so
//! everything is dense `nalgebra` with `Complex64` entries.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type ComplexMatrix = DMatrix<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(n, n)
}

/// Conjugate transpose.
pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

/// Entrywise complex conjugate (no transpose).
pub fn conj(m: &ComplexMatrix) -> ComplexMatrix {
    m.map(|z| z.conj())
}

/// `(M − M*) / 2i`, the Hermitian "imaginary part" of a matrix.
pub fn im_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m - m.adjoint()) / Complex64::new(0.0, 2.0)
}

/// `(M + M*) / 2`.
pub fn re_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c(0.5)
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn fro_norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn one_norm(m: &ComplexMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Frobenius norm of `M − M*`.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    fro_norm(&(m - m.adjoint()))
}

/// Frobenius norm of `M + M*`.
pub fn anti_hermitian_deviation(m: &ComplexMatrix) -> f64 {
    fro_norm(&(m + m.adjoint()))
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Spectral (2-)norm: the largest singular value.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

/// Eigenvalues of a general complex square matrix (via complex Schur form).
pub fn eigenvalues(m: &ComplexMatrix) -> Vec<Complex64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    if n == 2 {
        // closed form keeps the 2×2 workhorse exact to rounding
        let tr = m[(0, 0)] + m[(1, 1)];
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let disc = (tr * tr * 0.25 - det).sqrt();
        return vec![tr * 0.5 + disc, tr * 0.5 - disc];
    }
    match m.clone().schur().eigenvalues() {
        Some(ev) => ev.iter().copied().collect(),
        None => {
            let t = m.clone().schur().unpack().1;
            (0..n).map(|i| t[(i, i)]).collect()
        }
    }
}

/// Largest real part of the spectrum.
pub fn spectral_abscissa(m: &ComplexMatrix) -> f64 {
    eigenvalues(m)
        .into_iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Hermitian eigendecomposition. Eigenvalues come back ascending with the
/// matching unit eigenvectors as columns.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    let h = re_part(m);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Condition number of the eigenvector matrix of `m` (columns normalized).
/// Returns `f64::INFINITY` for defective matrices.
pub fn eigvec_condition(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 1.0;
    }
    let values = eigenvalues(m);
    let mut vecs = ComplexMatrix::zeros(n, n);
    for (col, mu) in values.iter().enumerate() {
        let shifted = m - identity(n) * *mu;
        let svd = shifted.svd(false, true);
        let v_t = match svd.v_t {
            Some(v) => v,
            None => return f64::INFINITY,
        };
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
        for r in 0..n {
            vecs[(r, col)] = v_t[(imin, r)].conj();
        }
    }
    let sv = singular_values(&vecs);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smin <= 1e-14 * smax.max(1.0) || !(smin > 0.0) {
        return f64::INFINITY;
    }
    smax / smin
}

/// Which algorithm produced a matrix exponential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpmPath {
    /// `M` anti-Hermitian: unitary result from a Hermitian eigendecomposition.
    Unitary,
    /// `M` Hermitian: positive definite result from its eigendecomposition.
    Hermitian,
    /// Scaling and squaring with the degree-13 Padé approximant.
    Pade13 { squarings: u32 },
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// Matrix exponential. Anti-Hermitian and Hermitian inputs (to `tol`
/// relative) go through an eigendecomposition so unitarity / positivity is
/// preserved to rounding; everything else uses Padé-13 scaling and squaring.
pub fn expm_with_path(m: &ComplexMatrix, tol: f64) -> (ComplexMatrix, ExpmPath) {
    let n = m.nrows();
    let scale = fro_norm(m);
    if scale == 0.0 {
        return (identity(n), ExpmPath::Unitary);
    }
    if anti_hermitian_deviation(m) <= tol * scale {
        // M = -iH with H = iM Hermitian
        let h = m * I;
        let (vals, vecs) = hermitian_eigen(&h);
        let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            vals.iter().map(|&l| Complex64::new(0.0, -l).exp()),
        ));
        return (&vecs * d * vecs.adjoint(), ExpmPath::Unitary);
    }
    if hermitian_deviation(m) <= tol * scale {
        let (vals, vecs) = hermitian_eigen(m);
        let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            vals.iter().map(|&l| c(l.exp())),
        ));
        return (&vecs * d * vecs.adjoint(), ExpmPath::Hermitian);
    }
    let (e, s) = expm_pade13(m);
    (e, ExpmPath::Pade13 { squarings: s })
}

pub fn expm(m: &ComplexMatrix) -> ComplexMatrix {
    expm_with_path(m, 1e-12).0
}

/// Padé-13 scaling and squaring (Higham 2005). Returns the number of
/// squarings used.
pub fn expm_pade13(m: &ComplexMatrix) -> (ComplexMatrix, u32) {
    let n = m.nrows();
    let norm = one_norm(m);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let a = m * c(0.5f64.powi(s as i32));
    let id = identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;
    let inner_u = &a6 * c(b[13]) + &a4 * c(b[11]) + &a2 * c(b[9]);
    let u = &a * (&a6 * inner_u + &a6 * c(b[7]) + &a4 * c(b[5]) + &a2 * c(b[3]) + &id * c(b[1]));
    let inner_v = &a6 * c(b[12]) + &a4 * c(b[10]) + &a2 * c(b[8]);
    let v = &a6 * inner_v + &a6 * c(b[6]) + &a4 * c(b[4]) + &a2 * c(b[2]) + &id * c(b[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular for scaled arguments");
    for _ in 0..s {
        r = &r * &r;
    }
    (r, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[(f64, f64)]]) -> ComplexMatrix {
        let n = rows.len();
        ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j].0, rows[i][j].1))
    }

    #[test]
    fn pade_matches_scalar_exponential() {
        let m = mat(&[&[(0.3, -2.0)]]);
        let (e, _) = expm_pade13(&m);
        let exact = Complex64::new(0.3, -2.0).exp();
        assert!((e[(0, 0)] - exact).norm() < 1e-14);
    }

    #[test]
    fn pade_matches_nilpotent_closed_form() {
        // exp(N) = I + N for N² = 0
        let nil = mat(&[&[(0.0, 5.0), (0.0, -5.0)], &[(0.0, 5.0), (0.0, -5.0)]]);
        let (e, s) = expm_pade13(&nil);
        assert!(s > 0);
        let expected = identity(2) + &nil;
        assert!(fro_norm(&(e - expected)) < 1e-11);
    }

    #[test]
    fn unitary_path_for_anti_hermitian() {
        let m = mat(&[&[(0.0, 3.0), (1.0, 2.0)], &[(-1.0, 2.0), (0.0, -7.0)]]);
        let (e, path) = expm_with_path(&m, 1e-12);
        assert_eq!(path, ExpmPath::Unitary);
        let dev = fro_norm(&(&e * e.adjoint() - identity(2)));
        assert!(dev < 1e-13);
        let (p, _) = expm_pade13(&m);
        assert!(fro_norm(&(p - e)) < 1e-11);
    }

    #[test]
    fn hermitian_path_gives_exponential_norm() {
        let xi = 12.0;
        let m = mat(&[&[(0.0, 0.0), (0.0, -xi)], &[(0.0, xi), (0.0, 0.0)]]);
        let (e, path) = expm_with_path(&m, 1e-12);
        assert_eq!(path, ExpmPath::Hermitian);
        assert!((op_norm(&e) / xi.exp() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn closed_form_two_by_two_eigenvalues() {
        let xi: f64 = 2.0;
        let m = mat(&[
            &[(0.0, xi * xi), (0.0, -xi)],
            &[(0.0, xi), (0.0, -xi * xi)],
        ]);
        let mut ev = eigenvalues(&m);
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!(ev[0].re.abs() < 1e-14 && (ev[0].im + 12f64.sqrt()).abs() < 1e-13);
        assert!(ev[1].re.abs() < 1e-14 && (ev[1].im - 12f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn defective_condition_is_infinite() {
        let m = mat(&[&[(0.0, 1.0), (0.0, -1.0)], &[(0.0, 1.0), (0.0, -1.0)]]);
        assert!(eigvec_condition(&m).is_infinite());
        let d = mat(&[&[(1.0, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (2.0, 0.0)]]);
        assert!((eigvec_condition(&d) - 1.0).abs() < 1e-12);
    }
}
