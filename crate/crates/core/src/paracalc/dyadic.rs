use super::cutoff::{phi_k, CHI_INNER};
use super::grid::{Grid, GridField, Spectrum};

/// Top dyadic band: the smallest `K` with `χ_K = 1` on every resolved
/// wavenumber, so that `Σ_{k ≤ K} φ_k = 1` on the grid.
pub fn k_max(grid: &Grid) -> usize {
    let top = grid.max_xi();
    let mut k = 0;
    while CHI_INNER * 2f64.powi(k as i32) < top {
        k += 1;
    }
    k
}

/// `φ_k(|ξ|)` at every spectral index.
pub fn band_weights(grid: &Grid, k: usize) -> Vec<f64> {
    grid.xi_norms().into_iter().map(|r| phi_k(k as i64, r)).collect()
}

#[derive(Debug, Clone)]
pub struct DyadicDecomposition {
    pub blocks: Vec<GridField>,
}

impl DyadicDecomposition {
    pub fn k_max(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn reconstruct(&self) -> GridField {
        let mut out = GridField::zeros(self.blocks[0].grid, self.blocks[0].components);
        for b in &self.blocks {
            out.add_scaled(b, num_complex::Complex64::new(1.0, 0.0));
        }
        out
    }
}

pub fn band(spec: &Spectrum, k: usize) -> Spectrum {
    let mut s = spec.clone();
    s.apply_weights(&band_weights(&spec.grid, k));
    s
}

pub fn decompose(u: &GridField) -> DyadicDecomposition {
    let spec = u.spectrum();
    let blocks = (0..=k_max(&u.grid)).map(|k| band(&spec, k).to_field()).collect();
    DyadicDecomposition { blocks }
}

/// `sup_k 2^{−k} max_x |Δ_k u(x)|`.
pub fn besov_norm(u: &GridField) -> f64 {
    decompose(u)
        .blocks
        .iter()
        .enumerate()
        .map(|(k, b)| b.max_abs() * 2f64.powi(-(k as i32)))
        .fold(0.0, f64::max)
}
