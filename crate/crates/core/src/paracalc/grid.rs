//! Uniform periodic grids, sampled N-vector fields and their spectra.
//!
//! Spectral coefficients are normalized so that `u(x) = Σ_k c_k e^{iξ_k·x}`,
//! i.e. `c = FFT(u) / n^d`. With this choice
//! `Σ_x |u|² (L/n)^d = L^d Σ_k |c_k|²`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};

type Plan = Arc<dyn Fft<f64>>;

fn plan_cache() -> &'static RwLock<HashMap<(usize, bool), Plan>> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn plan(n: usize, inverse: bool) -> Plan {
    if let Some(p) = plan_cache().read().expect("plan cache poisoned").get(&(n, inverse)) {
        return p.clone();
    }
    let mut cache = plan_cache().write().expect("plan cache poisoned");
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Unnormalized in-place d-dimensional FFT of a row-major `n^d` block.
pub fn fft_nd(data: &mut [Complex64], n: usize, dim: usize, inverse: bool) {
    let p = plan(n, inverse);
    let len = n.pow(dim as u32);
    debug_assert_eq!(data.len(), len);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            p.process(data);
            continue;
        }
        let block = stride * n;
        for start in (0..len).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                p.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub dim: usize,
    pub n: usize,
    pub period: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, period: f64) -> Self {
        assert!(n.is_power_of_two() && n >= 4, "grid size must be a power of two >= 4");
        assert!(dim >= 1 && period > 0.0);
        Self { dim, n, period }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    /// `L^d`.
    pub fn volume(&self) -> f64 {
        self.period.powi(self.dim as i32)
    }

    /// Frequency of one integer wavenumber step, `2π/L`.
    pub fn dk(&self) -> f64 {
        std::f64::consts::TAU / self.period
    }

    /// Signed wavenumber index in `[−n/2, n/2 − 1]` of axis position `i`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Axis position of a wavenumber, if it is resolved.
    pub fn position(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        (-half..half).contains(&k).then(|| k.rem_euclid(self.n as i64) as usize)
    }

    pub fn axis_indices(&self, flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim];
        let mut r = flat;
        for a in (0..self.dim).rev() {
            out[a] = r % self.n;
            r /= self.n;
        }
        out
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn wavenumbers(&self, flat: usize) -> Vec<i64> {
        self.axis_indices(flat).into_iter().map(|i| self.wavenumber(i)).collect()
    }

    pub fn flat_of_wavenumbers(&self, k: &[i64]) -> Option<usize> {
        let idx: Option<Vec<usize>> = k.iter().map(|&k| self.position(k)).collect();
        idx.map(|i| self.flat(&i))
    }

    pub fn xi(&self, flat: usize) -> Vec<f64> {
        let dk = self.dk();
        self.wavenumbers(flat).into_iter().map(|k| k as f64 * dk).collect()
    }

    /// `|ξ|` at every spectral index.
    pub fn xi_norms(&self) -> Vec<f64> {
        (0..self.len())
            .map(|f| self.xi(f).iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect()
    }

    pub fn max_xi(&self) -> f64 {
        self.dk() * (self.n / 2) as f64 * (self.dim as f64).sqrt()
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let h = self.spacing();
        self.axis_indices(flat).into_iter().map(|i| i as f64 * h).collect()
    }

    /// Same box, twice the points per axis.
    pub fn refined(&self) -> Grid {
        Grid { n: 2 * self.n, ..*self }
    }
}

/// Sampled field with `components` values per node, stored component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: Grid,
    pub components: usize,
    pub values: Vec<Complex64>,
}

/// Fourier coefficients of a field, same layout as [`GridField`].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: Grid,
    pub components: usize,
    pub coeffs: Vec<Complex64>,
}

impl GridField {
    pub fn zeros(grid: Grid, components: usize) -> Self {
        Self {
            grid,
            components,
            values: vec![Complex64::new(0.0, 0.0); grid.len() * components],
        }
    }

    pub fn constant(grid: Grid, value: &[Complex64]) -> Self {
        let mut f = Self::zeros(grid, value.len());
        for (c, v) in value.iter().enumerate() {
            f.component_mut(c).fill(*v);
        }
        f
    }

    pub fn from_fn(grid: Grid, components: usize, f: impl Fn(&[f64]) -> Vec<Complex64>) -> Self {
        let mut out = Self::zeros(grid, components);
        let len = grid.len();
        for i in 0..len {
            let v = f(&grid.node(i));
            for c in 0..components {
                out.values[c * len + i] = v[c];
            }
        }
        out
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.values[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        &mut self.values[c * len..(c + 1) * len]
    }

    /// Values at one node.
    pub fn at(&self, node: usize) -> Vec<Complex64> {
        let len = self.grid.len();
        (0..self.components).map(|c| self.values[c * len + node]).collect()
    }

    pub fn spectrum(&self) -> Spectrum {
        let len = self.grid.len();
        let scale = 1.0 / len as f64;
        let mut coeffs = self.values.clone();
        for chunk in coeffs.chunks_mut(len) {
            fft_nd(chunk, self.grid.n, self.grid.dim, false);
            chunk.iter_mut().for_each(|z| *z *= scale);
        }
        Spectrum {
            grid: self.grid,
            components: self.components,
            coeffs,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        let w = self.grid.spacing().powi(self.grid.dim as i32);
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * w).sqrt()
    }

    /// L² inner product `∫ Σ_c u_c v̄_c`.
    pub fn inner(&self, other: &GridField) -> Complex64 {
        let w = self.grid.spacing().powi(self.grid.dim as i32);
        self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum::<Complex64>() * w
    }

    pub fn max_abs(&self) -> f64 {
        let len = self.grid.len();
        (0..len)
            .map(|i| {
                (0..self.components)
                    .map(|c| self.values[c * len + i].norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scaled(mut self, s: Complex64) -> Self {
        self.values.iter_mut().for_each(|z| *z *= s);
        self
    }

    pub fn add_scaled(&mut self, other: &GridField, s: Complex64) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b * s;
        }
    }

    pub fn sub(&self, other: &GridField) -> GridField {
        let mut out = self.clone();
        out.add_scaled(other, Complex64::new(-1.0, 0.0));
        out
    }

    pub fn conj(&self) -> GridField {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|z| *z = z.conj());
        out
    }

    /// Scalar field built from component `c`.
    pub fn extract(&self, c: usize) -> GridField {
        GridField {
            grid: self.grid,
            components: 1,
            values: self.component(c).to_vec(),
        }
    }

    pub fn stack(parts: &[GridField]) -> GridField {
        let grid = parts[0].grid;
        let mut values = Vec::new();
        for p in parts {
            values.extend_from_slice(&p.values);
        }
        GridField {
            grid,
            components: values.len() / grid.len(),
            values,
        }
    }
}

impl Spectrum {
    pub fn zeros(grid: Grid, components: usize) -> Self {
        Self {
            grid,
            components,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len() * components],
        }
    }

    pub fn to_field(&self) -> GridField {
        let len = self.grid.len();
        let mut values = self.coeffs.clone();
        for chunk in values.chunks_mut(len) {
            fft_nd(chunk, self.grid.n, self.grid.dim, true);
        }
        GridField {
            grid: self.grid,
            components: self.components,
            values,
        }
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.coeffs[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        &mut self.coeffs[c * len..(c + 1) * len]
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    /// `(L^d Σ (1+|ξ|²)^s |c_ξ|²)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let len = self.grid.len();
        let norms = self.grid.xi_norms();
        let mut acc = 0.0;
        for c in 0..self.components {
            for (i, z) in self.coeffs[c * len..(c + 1) * len].iter().enumerate() {
                let w = if s == 0.0 { 1.0 } else { (1.0 + norms[i] * norms[i]).powf(s) };
                acc += w * z.norm_sqr();
            }
        }
        (acc * self.grid.volume()).sqrt()
    }

    /// Multiplies every mode by the scalar `m(ξ)`.
    pub fn apply_scalar(&mut self, m: impl Fn(&[f64]) -> Complex64) {
        let len = self.grid.len();
        let weights: Vec<Complex64> = (0..len).map(|i| m(&self.grid.xi(i))).collect();
        for chunk in self.coeffs.chunks_mut(len) {
            for (z, w) in chunk.iter_mut().zip(&weights) {
                *z *= w;
            }
        }
    }

    /// Multiplies by precomputed real weights, one per spectral index.
    pub fn apply_weights(&mut self, w: &[f64]) {
        let len = self.grid.len();
        for chunk in self.coeffs.chunks_mut(len) {
            for (z, w) in chunk.iter_mut().zip(w) {
                *z *= *w;
            }
        }
    }

    /// Embeds into the grid with twice the points (zero padding).
    pub fn padded(&self) -> Spectrum {
        let big = self.grid.refined();
        let len = self.grid.len();
        let big_len = big.len();
        let mut out = Spectrum::zeros(big, self.components);
        let map: Vec<usize> = (0..len)
            .map(|i| big.flat_of_wavenumbers(&self.grid.wavenumbers(i)).expect("resolved on refined grid"))
            .collect();
        for c in 0..self.components {
            for (i, &j) in map.iter().enumerate() {
                out.coeffs[c * big_len + j] = self.coeffs[c * len + i];
            }
        }
        out
    }

    /// Restricts to the modes resolved on the grid with half the points.
    pub fn truncated(&self) -> Spectrum {
        let small = Grid { n: self.grid.n / 2, ..self.grid };
        let len = small.len();
        let big_len = self.grid.len();
        let mut out = Spectrum::zeros(small, self.components);
        for i in 0..len {
            let j = self.grid.flat_of_wavenumbers(&small.wavenumbers(i)).expect("small grid is nested");
            for c in 0..self.components {
                out.coeffs[c * len + i] = self.coeffs[c * big_len + j];
            }
        }
        out
    }
}

/// Pointwise product `a·u` (scalar `a`) without aliasing: both factors are
/// evaluated on the doubled grid and the result is projected back onto the
/// resolved modes.
pub fn dealiased_product(a: &Spectrum, u: &Spectrum) -> Spectrum {
    assert_eq!(a.components, 1);
    let pa = a.padded().to_field();
    dealiased_product_with(&pa.values, u)
}

/// As [`dealiased_product`] with the scalar factor already sampled on the
/// doubled grid.
pub fn dealiased_product_with(padded_a: &[Complex64], u: &Spectrum) -> Spectrum {
    let mut pu = u.padded().to_field();
    let big_len = pu.grid.len();
    for c in 0..pu.components {
        for (z, a) in pu.values[c * big_len..(c + 1) * big_len].iter_mut().zip(padded_a) {
            *z *= a;
        }
    }
    pu.spectrum().truncated()
}

fn mix(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Standard complex Gaussian drawn deterministically from `(seed, k, salt)`,
/// independent of the grid the mode lives on.
pub fn hashed_gaussian(seed: u64, k: &[i64], salt: u64) -> Complex64 {
    let mut h = mix(seed ^ 0x9e37_79b9_7f4a_7c15);
    for &ki in k {
        h = mix(h ^ (ki as u64).wrapping_mul(0x2545_f491_4f6c_dd1d));
    }
    h = mix(h ^ salt);
    let mut rng = ChaCha8Rng::seed_from_u64(h);
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    Complex64::from_polar(r / std::f64::consts::SQRT_2, std::f64::consts::TAU * u2)
}

/// Random field with `|k|_∞ ≤ max_mode` and coefficients
/// `g_k (1 + |ξ|)^{−decay}`; the same seed gives the same function on every
/// grid that resolves `max_mode`.
pub fn random_field(grid: Grid, components: usize, max_mode: usize, decay: f64, seed: u64) -> GridField {
    let mut spec = Spectrum::zeros(grid, components);
    let len = grid.len();
    for i in 0..len {
        let k = grid.wavenumbers(i);
        if k.iter().any(|&ki| ki.unsigned_abs() as usize > max_mode) {
            continue;
        }
        let r = grid.xi(i).iter().map(|x| x * x).sum::<f64>().sqrt();
        let w = (1.0 + r).powf(-decay);
        for c in 0..components {
            spec.coeffs[c * len + i] = hashed_gaussian(seed, &k, c as u64) * w;
        }
    }
    spec.to_field()
}
