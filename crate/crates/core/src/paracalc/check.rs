//! Empirical checks of the calculus on a concrete grid: partition of unity,
//! multiplier identity, order gains of the defects, the paralinearization
//! constant, the Besov embedding and the time commutator.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::cutoff::{phi_k, Admissibility, CutoffSpec};
use super::defects::{derivative, w1_inf_norm};
use super::dyadic::{besov_norm, decompose, k_max};
use super::grid::{dealiased_product, hashed_gaussian, random_field, Grid, GridField, Spectrum};
use super::operator::ParaOperator;
use super::symbol::ParadiffSymbol;
use crate::linalg;

pub const SLOPE_ALLOWANCE: f64 = 0.2;
pub const CONSTANT_SPREAD: f64 = 2.0;

#[derive(Debug, Clone, Serialize)]
pub struct ParacheckConfig {
    pub dim: usize,
    pub n: usize,
    pub period: f64,
    pub cutoff: usize,
    pub draws: usize,
    pub probes: usize,
    pub seed: u64,
}

impl Default for ParacheckConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            n: 512,
            period: TAU,
            cutoff: 3,
            draws: 100,
            probes: 6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BandSlope {
    pub name: String,
    pub naive_order: f64,
    pub bands: Vec<usize>,
    pub ratios: Vec<f64>,
    pub slope: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantPair {
    pub n: usize,
    pub constant: f64,
    pub n_refined: usize,
    pub constant_refined: f64,
    pub spread: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorCheck {
    pub modes: Vec<usize>,
    pub coefficient_sup: Vec<f64>,
    pub ratios: Vec<f64>,
    pub growth: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParacheckReport {
    pub config: ParacheckConfig,
    pub k_max: usize,
    pub admissibility: Admissibility,
    pub multiplier_identity_error: f64,
    pub reconstruction_error: f64,
    pub paralinearization: ConstantPair,
    pub besov_embedding: ConstantPair,
    pub slopes: Vec<BandSlope>,
    pub time_commutator: CommutatorCheck,
    pub pass: bool,
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Random field spectrally supported in band `k`, with coefficients `g_ξ φ_k(ξ)`.
pub fn band_probe(grid: Grid, components: usize, k: usize, seed: u64) -> GridField {
    let len = grid.len();
    let mut s = Spectrum::zeros(grid, components);
    let norms = grid.xi_norms();
    for i in 0..len {
        let w = phi_k(k as i64, norms[i]);
        if w == 0.0 {
            continue;
        }
        let kv = grid.wavenumbers(i);
        for c in 0..components {
            s.coeffs[c * len + i] = hashed_gaussian(seed, &kv, (k * 64 + c) as u64) * w;
        }
    }
    s.to_field()
}

/// RMS gain `‖D u‖/‖u‖` over `probes` band-`k` inputs for `k ∈ [4, K_max − 1]`
/// and the fitted log₂ slope.
pub fn band_slope(
    name: &str,
    naive_order: f64,
    grid: Grid,
    components: usize,
    probes: usize,
    seed: u64,
    op: impl Fn(&Spectrum) -> Spectrum + Sync,
) -> BandSlope {
    let kmax = k_max(&grid);
    let bands: Vec<usize> = (4..kmax).collect();
    let ratios: Vec<f64> = bands
        .iter()
        .map(|&k| {
            let (num, den) = (0..probes)
                .into_par_iter()
                .map(|p| {
                    let u = band_probe(grid, components, k, seed.wrapping_add(p as u64)).spectrum();
                    (op(&u).l2_norm().powi(2), u.l2_norm().powi(2))
                })
                .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
            (num / den).sqrt()
        })
        .collect();
    let x: Vec<f64> = bands.iter().map(|&k| k as f64).collect();
    let y: Vec<f64> = ratios.iter().map(|r| r.max(1e-300).log2()).collect();
    let slope = if bands.len() >= 2 { ls_slope(&x, &y) } else { f64::NAN };
    BandSlope {
        name: name.to_string(),
        naive_order,
        pass: slope <= naive_order - 1.0 + SLOPE_ALLOWANCE,
        bands,
        ratios,
        slope,
    }
}

fn sub(a: Spectrum, b: &Spectrum) -> Spectrum {
    let mut a = a;
    for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
        *x -= y;
    }
    a
}

/// Smooth coefficient used by the defect checks.
pub fn smooth_coefficient(grid: Grid, seed: u64) -> GridField {
    random_field(grid, 1, 16.min(grid.n / 2 - 1), 5.0, seed)
}

fn bracket(xi: &[f64]) -> f64 {
    (1.0 + xi.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

/// Slopes for the three defect families with fixed smooth test symbols.
pub fn defect_slopes(grid: Grid, cut: CutoffSpec, probes: usize, seed: u64) -> Vec<BandSlope> {
    let c1 = smooth_coefficient(grid, seed ^ 0x11);
    let c2 = smooth_coefficient(grid, seed ^ 0x22);

    let a = ParadiffSymbol::separable(c1.clone(), 1.0, 1, |xi| linalg::identity(1) * Complex64::new(0.0, xi[0]));
    let b = ParadiffSymbol::separable(c2, 1.0, 1, |xi| linalg::identity(1) * linalg::c(bracket(xi)));
    let ta = ParaOperator::new(&a, grid, cut);
    let tb = ParaOperator::new(&b, grid, cut);
    let tab = ParaOperator::new(&a.product(&b), grid, cut);
    let compose = band_slope("compose", a.order + b.order, grid, 1, probes, seed, |u| {
        sub(ta.apply_spectrum(&tb.apply_spectrum(u)), &tab.apply_spectrum(u))
    });

    let k = linalg::ComplexMatrix::from_row_slice(
        2,
        2,
        &[linalg::c(1.0), Complex64::new(2.0, 1.0), Complex64::new(-1.0, 0.5), Complex64::new(0.0, 0.3)],
    );
    let m = ParadiffSymbol::separable(c1.clone(), 1.0, 2, move |xi| &k * linalg::c(xi[0]));
    let tm = ParaOperator::new(&m, grid, cut);
    let tm_star = ParaOperator::new(&m.adjoint(), grid, cut);
    let adjoint = band_slope("adjoint", m.order, grid, 2, probes, seed, |u| {
        sub(tm.apply_adjoint_spectrum(u), &tm_star.apply_spectrum(u))
    });

    let alt = CutoffSpec::new(cut.n + 1);
    let t1 = ParaOperator::new(&a, grid, cut);
    let t2 = ParaOperator::new(&a, grid, alt);
    let cutoff = band_slope("cutoff", a.order, grid, 1, probes, seed, |u| {
        sub(t1.apply_spectrum(u), &t2.apply_spectrum(u))
    });

    vec![compose, adjoint, cutoff]
}

/// Grid-independent random draw with at most `max_mode` per axis.
fn draw(grid: Grid, max_mode: usize, decay: f64, seed: u64) -> GridField {
    random_field(grid, 1, max_mode.min(grid.n / 2 - 1), decay, seed)
}

/// Largest `‖a ∂_0 u − T_a ∂_0 u‖ / (‖a‖_{W^{1,∞}} ‖u‖)` over `draws` draws.
pub fn paralinearization_constant(grid: Grid, cut: CutoffSpec, draws: usize, seed: u64) -> f64 {
    (0..draws)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
            let a = draw(grid, 32, 2.5, s ^ 0xa);
            let u = draw(grid, 100, 0.0, s ^ 0xb);
            let du = derivative(&u, 0);
            let exact = dealiased_product(&a.spectrum(), &du.spectrum()).to_field();
            let para = ParaOperator::new(&ParadiffSymbol::paraproduct(a.clone(), 1), grid, cut).apply(&du);
            exact.sub(&para).l2_norm() / (w1_inf_norm(&a) * u.l2_norm())
        })
        .reduce(|| 0.0, f64::max)
}

/// Largest `besov_norm(u) / ‖u‖_{H^s}` with `s = d/2 − 1/2` over `draws` draws.
pub fn besov_embedding_constant(grid: Grid, draws: usize, seed: u64) -> f64 {
    let s = grid.dim as f64 / 2.0 - 0.5;
    (0..draws)
        .into_par_iter()
        .map(|i| {
            let u = draw(grid, 100, 0.5, seed.wrapping_mul(7_919).wrapping_add(i as u64));
            besov_norm(&u) / u.spectrum().sobolev_norm(s)
        })
        .reduce(|| 0.0, f64::max)
}

/// `m ↦ ‖T_{∂ₜa_m} u‖_{H^{−1}} / ‖u‖` for `∂ₜa_m = 2^m e^{i 2^m x_1}` and
/// broadband `u`; `m` runs over `4..K_max`.
pub fn time_commutator_check(grid: Grid, cut: CutoffSpec, seed: u64) -> CommutatorCheck {
    let kmax = k_max(&grid);
    let u = random_field(grid, 1, grid.n / 2, 0.0, seed);
    let norm_u = u.l2_norm();
    let modes: Vec<usize> = (4..kmax).collect();
    let mut ratios = Vec::new();
    let mut sups = Vec::new();
    for &m in &modes {
        let dta = oscillating_coefficient(grid, m);
        sups.push(dta.max_abs());
        let out = ParaOperator::new(&ParadiffSymbol::paraproduct(dta, 1), grid, cut).apply(&u);
        ratios.push(out.spectrum().sobolev_norm(-1.0) / norm_u);
    }
    // below the floor a ratio is roundoff
    let floor = 1e-12;
    let first = ratios.first().copied().unwrap_or(0.0).max(floor);
    let top = ratios.iter().copied().fold(floor, f64::max);
    let growth = top / first;
    CommutatorCheck {
        pass: growth <= CONSTANT_SPREAD,
        modes,
        coefficient_sup: sups,
        ratios,
        growth,
    }
}

/// `2^m e^{i k x_1}` with `k` the wavenumber closest to frequency `2^m`.
pub fn oscillating_coefficient(grid: Grid, m: usize) -> GridField {
    let freq = 2f64.powi(m as i32);
    let k = (freq / grid.dk()).round();
    let xi = k * grid.dk();
    GridField::from_fn(grid, 1, |x| vec![Complex64::from_polar(freq, xi * x[0])])
}

fn pair(n: usize, constant: f64, n_refined: usize, constant_refined: f64) -> ConstantPair {
    let spread = (constant / constant_refined).max(constant_refined / constant);
    ConstantPair {
        n,
        constant,
        n_refined,
        constant_refined,
        spread,
        pass: spread.is_finite() && spread < CONSTANT_SPREAD,
    }
}

pub fn paracheck(cfg: &ParacheckConfig) -> ParacheckReport {
    let grid = Grid::new(cfg.dim, cfg.n, cfg.period);
    let coarse = Grid::new(cfg.dim, cfg.n / 2, cfg.period);
    let cut = CutoffSpec::new(cfg.cutoff);
    let kmax = k_max(&grid);

    let u = random_field(grid, 2, cfg.n / 2, 0.0, cfg.seed);
    let rec = decompose(&u).reconstruct();
    let reconstruction_error = rec.sub(&u).l2_norm() / u.l2_norm();

    let mult = ParadiffSymbol::scalar_multiplier(2, 1.0, |xi| linalg::c(bracket(xi)));
    let via_t = ParaOperator::new(&mult, grid, cut).apply(&u);
    let mut direct = u.spectrum();
    direct.apply_scalar(|xi| linalg::c(bracket(xi)));
    let direct = direct.to_field();
    let multiplier_identity_error = via_t.sub(&direct).l2_norm() / direct.l2_norm();

    let paralinearization = pair(
        coarse.n,
        paralinearization_constant(coarse, cut, cfg.draws, cfg.seed),
        grid.n,
        paralinearization_constant(grid, cut, cfg.draws, cfg.seed),
    );
    let besov_embedding = pair(
        coarse.n,
        besov_embedding_constant(coarse, cfg.draws, cfg.seed),
        grid.n,
        besov_embedding_constant(grid, cfg.draws, cfg.seed),
    );
    let slopes = defect_slopes(grid, cut, cfg.probes, cfg.seed);
    let time_commutator = time_commutator_check(grid, cut, cfg.seed);

    let pass = multiplier_identity_error <= 1e-12
        && reconstruction_error <= 1e-12
        && paralinearization.pass
        && besov_embedding.pass
        && slopes.iter().all(|s| s.pass)
        && time_commutator.pass;
    ParacheckReport {
        config: cfg.clone(),
        k_max: kmax,
        admissibility: cut.admissibility(kmax, 400),
        multiplier_identity_error,
        reconstruction_error,
        paralinearization,
        besov_embedding,
        slopes,
        time_commutator,
        pass,
    }
}
