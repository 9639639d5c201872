//! Paradifferential operators `T_a`, applied band by band:
//! `T_a u = Σ_r Σ_k P[(S_{k−N} c_r) · Δ_k G_r(D) u]`,
//! where `P` keeps the resolved modes. Products are formed on the doubled
//! grid, so the only approximation is the final projection.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::cutoff::CutoffSpec;
use super::dyadic::{band_weights, k_max};
use super::grid::{dealiased_product_with, Grid, GridField, Spectrum};
use super::symbol::ParadiffSymbol;

enum LowPass {
    Zero,
    Constant(Complex64),
    /// `S_{k−N} c` sampled on the doubled grid.
    Field(Vec<Complex64>),
}

struct PreparedTerm {
    /// `G(ξ)` per spectral index, flattened `[i][row][col]`.
    table: Arc<Vec<Complex64>>,
    bands: Option<Vec<LowPass>>,
}

pub struct ParaOperator {
    pub grid: Grid,
    pub components: usize,
    pub cutoff: CutoffSpec,
    kmax: usize,
    weights: Vec<Vec<f64>>,
    terms: Vec<PreparedTerm>,
}

fn is_zero(s: &Spectrum) -> bool {
    s.coeffs.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

fn low_passes(coeff: &GridField, grid: Grid, cutoff: CutoffSpec, kmax: usize, norms: &[f64]) -> Vec<LowPass> {
    assert_eq!(coeff.grid, grid, "coefficient lives on a different grid");
    let spec = coeff.spectrum();
    (0..=kmax)
        .map(|k| {
            let mut low = spec.clone();
            let w: Vec<f64> = norms.iter().map(|&r| cutoff.low_pass(k, r)).collect();
            low.apply_weights(&w);
            let mean = low.coeffs[0];
            if low.coeffs[1..].iter().all(|z| z.norm_sqr() == 0.0) {
                if mean.norm_sqr() == 0.0 {
                    LowPass::Zero
                } else {
                    LowPass::Constant(mean)
                }
            } else {
                LowPass::Field(low.padded().to_field().values)
            }
        })
        .collect()
}

impl ParaOperator {
    pub fn new(sym: &ParadiffSymbol, grid: Grid, cutoff: CutoffSpec) -> Self {
        let kmax = k_max(&grid);
        let weights: Vec<Vec<f64>> = (0..=kmax).map(|k| band_weights(&grid, k)).collect();
        let n = sym.components;
        let len = grid.len();
        let norms = grid.xi_norms();
        let terms = sym
            .terms
            .iter()
            .map(|t| {
                let mut table = Vec::with_capacity(len * n * n);
                for i in 0..len {
                    let g = (t.multiplier)(&grid.xi(i));
                    for r in 0..n {
                        for c in 0..n {
                            table.push(g[(r, c)]);
                        }
                    }
                }
                let bands = t.coeff.as_ref().map(|coeff| low_passes(coeff, grid, cutoff, kmax, &norms));
                PreparedTerm {
                    table: Arc::new(table),
                    bands,
                }
            })
            .collect();
        Self {
            grid,
            components: n,
            cutoff,
            kmax,
            weights,
            terms,
        }
    }

    /// Same multipliers, new coefficient fields. `sym` must have the term
    /// layout this operator was built from.
    pub fn with_coefficients(&self, sym: &ParadiffSymbol) -> Self {
        assert_eq!(sym.terms.len(), self.terms.len());
        let norms = self.grid.xi_norms();
        let terms = self
            .terms
            .iter()
            .zip(&sym.terms)
            .map(|(old, t)| PreparedTerm {
                table: old.table.clone(),
                bands: t
                    .coeff
                    .as_ref()
                    .map(|c| low_passes(c, self.grid, self.cutoff, self.kmax, &norms)),
            })
            .collect();
        Self {
            grid: self.grid,
            components: self.components,
            cutoff: self.cutoff,
            kmax: self.kmax,
            weights: self.weights.clone(),
            terms,
        }
    }

    pub fn k_max(&self) -> usize {
        self.kmax
    }

    fn multiply(&self, table: &[Complex64], u: &Spectrum, adjoint: bool) -> Spectrum {
        let n = self.components;
        let len = self.grid.len();
        let mut out = Spectrum::zeros(self.grid, n);
        for i in 0..len {
            let g = &table[i * n * n..(i + 1) * n * n];
            for r in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..n {
                    let entry = if adjoint { g[c * n + r].conj() } else { g[r * n + c] };
                    acc += entry * u.coeffs[c * len + i];
                }
                out.coeffs[r * len + i] = acc;
            }
        }
        out
    }

    fn band(&self, s: &Spectrum, k: usize) -> Spectrum {
        let mut b = s.clone();
        b.apply_weights(&self.weights[k]);
        b
    }

    fn accumulate(out: &mut Spectrum, add: &Spectrum) {
        for (a, b) in out.coeffs.iter_mut().zip(&add.coeffs) {
            *a += b;
        }
    }

    fn sum_bands(&self, parts: Vec<Spectrum>) -> Spectrum {
        let mut out = Spectrum::zeros(self.grid, self.components);
        for p in &parts {
            Self::accumulate(&mut out, p);
        }
        out
    }

    pub fn apply_spectrum(&self, u: &Spectrum) -> Spectrum {
        assert_eq!(u.grid, self.grid);
        let mut out = Spectrum::zeros(self.grid, self.components);
        for term in &self.terms {
            let w = self.multiply(&term.table, u, false);
            match &term.bands {
                None => Self::accumulate(&mut out, &w),
                Some(bands) => {
                    let parts: Vec<Spectrum> = (0..=self.kmax)
                        .into_par_iter()
                        .filter_map(|k| {
                            let wk = self.band(&w, k);
                            if is_zero(&wk) {
                                return None;
                            }
                            match &bands[k] {
                                LowPass::Zero => None,
                                LowPass::Constant(c) => {
                                    let mut s = wk;
                                    s.coeffs.iter_mut().for_each(|z| *z *= c);
                                    Some(s)
                                }
                                LowPass::Field(p) => Some(dealiased_product_with(p, &wk)),
                            }
                        })
                        .collect();
                    Self::accumulate(&mut out, &self.sum_bands(parts));
                }
            }
        }
        out
    }

    pub fn apply(&self, u: &GridField) -> GridField {
        self.apply_spectrum(&u.spectrum()).to_field()
    }

    /// Exact adjoint with respect to the discrete L² inner product.
    pub fn apply_adjoint_spectrum(&self, v: &Spectrum) -> Spectrum {
        assert_eq!(v.grid, self.grid);
        let mut out = Spectrum::zeros(self.grid, self.components);
        for term in &self.terms {
            let inner = match &term.bands {
                None => v.clone(),
                Some(bands) => {
                    let parts: Vec<Spectrum> = (0..=self.kmax)
                        .into_par_iter()
                        .filter_map(|k| {
                            let moved = match &bands[k] {
                                LowPass::Zero => return None,
                                LowPass::Constant(c) => {
                                    let mut s = v.clone();
                                    s.coeffs.iter_mut().for_each(|z| *z *= c.conj());
                                    s
                                }
                                LowPass::Field(p) => {
                                    let conj: Vec<Complex64> = p.iter().map(|z| z.conj()).collect();
                                    dealiased_product_with(&conj, v)
                                }
                            };
                            Some(self.band(&moved, k))
                        })
                        .collect();
                    self.sum_bands(parts)
                }
            };
            Self::accumulate(&mut out, &self.multiply(&term.table, &inner, true));
        }
        out
    }

    pub fn apply_adjoint(&self, v: &GridField) -> GridField {
        self.apply_adjoint_spectrum(&v.spectrum()).to_field()
    }
}

/// One-shot `T_a u` with cutoff `ψ_N`.
pub fn apply_t(a: &ParadiffSymbol, u: &GridField, cutoff: CutoffSpec) -> GridField {
    ParaOperator::new(a, u.grid, cutoff).apply(u)
}
