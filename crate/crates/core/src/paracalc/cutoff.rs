//! Littlewood–Paley cutoffs.

use serde::Serialize;

pub const CHI_INNER: f64 = 1.1;
pub const CHI_OUTER: f64 = 1.9;

/// C² polynomial step, 0 at `t ≤ 0` and 1 at `t ≥ 1`.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

/// Radial base bump: 1 on `r ≤ 1.1`, 0 on `r ≥ 1.9`.
pub fn chi(r: f64) -> f64 {
    1.0 - smoothstep((r - CHI_INNER) / (CHI_OUTER - CHI_INNER))
}

/// `χ_k(r) = χ(2^{−k} r)`, any integer `k`.
pub fn chi_k(k: i64, r: f64) -> f64 {
    chi(r * 2f64.powi(-k as i32))
}

/// `φ_0 = χ_0`, `φ_k = χ_k − χ_{k−1}`.
pub fn phi_k(k: i64, r: f64) -> f64 {
    if k == 0 {
        chi(r)
    } else {
        chi_k(k, r) - chi_k(k - 1, r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CutoffSpec {
    pub n: usize,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self { n: 3 }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Admissibility {
    pub eps1: f64,
    pub eps2: f64,
}

impl CutoffSpec {
    pub fn new(n: usize) -> Self {
        assert!(n >= 3, "cutoff shift must be at least 3");
        Self { n }
    }

    /// Low-pass profile applied to the coefficient for output band `k`.
    pub fn low_pass(&self, k: usize, eta: f64) -> f64 {
        chi_k(k as i64 - self.n as i64, eta)
    }

    /// `ψ_N(η, ξ) = Σ_{k ≤ kmax} χ_{k−N}(η) φ_k(ξ)`.
    pub fn psi(&self, eta: f64, xi: f64, kmax: usize) -> f64 {
        (0..=kmax).map(|k| self.low_pass(k, eta) * phi_k(k as i64, xi)).sum()
    }

    /// Samples `ψ_N` on `|ξ| ≤ 1.1·2^kmax` and returns the largest `ε₁` and
    /// smallest `ε₂` consistent with the samples:
    /// `ψ = 1` for `|η| ≤ ε₁(1+|ξ|)`, `ψ = 0` for `|η| ≥ ε₂(1+|ξ|)`.
    pub fn admissibility(&self, kmax: usize, samples: usize) -> Admissibility {
        let xi_top = CHI_INNER * 2f64.powi(kmax as i32);
        let mut eps1 = f64::INFINITY;
        let mut eps2: f64 = 0.0;
        for i in 0..=samples {
            let xi = xi_top * i as f64 / samples as f64;
            let w = 1.0 + xi;
            for j in 1..=samples {
                let ratio = j as f64 / samples as f64;
                let p = self.psi(ratio * w, xi, kmax);
                if p < 1.0 - 1e-14 {
                    eps1 = eps1.min(ratio);
                }
                if p > 1e-14 {
                    eps2 = eps2.max(ratio);
                }
            }
        }
        let step = 1.0 / samples as f64;
        Admissibility {
            eps1: eps1 - step,
            eps2: eps2 + step,
        }
    }
}
