use num_complex::Complex64;
use serde::Serialize;

use crate::paracalc::GridField;

/// Frozen coefficient `a(t, x)` of a linearized run.
#[derive(Debug, Clone)]
pub enum CoefficientPath {
    Constant(GridField),
    /// Samples at increasing times, linearly interpolated and clamped.
    Sampled { times: Vec<f64>, fields: Vec<GridField> },
}

impl CoefficientPath {
    pub fn at(&self, t: f64) -> GridField {
        match self {
            CoefficientPath::Constant(f) => f.clone(),
            CoefficientPath::Sampled { times, fields } => {
                if t <= times[0] {
                    return fields[0].clone();
                }
                let last = times.len() - 1;
                if t >= times[last] {
                    return fields[last].clone();
                }
                let i = times.partition_point(|&s| s <= t) - 1;
                let w = (t - times[i]) / (times[i + 1] - times[i]);
                let mut out = fields[i].clone().scaled(Complex64::new(1.0 - w, 0.0));
                out.add_scaled(&fields[i + 1], Complex64::new(w, 0.0));
                out
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CoefficientPath::Constant(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KDiagnostics {
    pub k0: f64,
    pub k1: f64,
}

/// `K₀ = max |a|` and `K₁ = max_t ‖a‖_{H^s} + max_t ‖∂ₜa‖_{H^{s−2}}` with
/// `∂ₜa` by centered differences inside and one-sided ones at the ends.
pub fn diagnostics_k(path: &CoefficientPath, s: f64) -> KDiagnostics {
    match path {
        CoefficientPath::Constant(a) => KDiagnostics {
            k0: a.max_abs(),
            k1: a.spectrum().sobolev_norm(s),
        },
        CoefficientPath::Sampled { times, fields } => {
            let k0 = fields.iter().map(GridField::max_abs).fold(0.0, f64::max);
            let hs = fields.iter().map(|f| f.spectrum().sobolev_norm(s)).fold(0.0, f64::max);
            let m = fields.len();
            let mut dt_max: f64 = 0.0;
            if m >= 2 {
                for i in 0..m {
                    let (lo, hi) = if i == 0 {
                        (0, 1)
                    } else if i == m - 1 {
                        (m - 2, m - 1)
                    } else {
                        (i - 1, i + 1)
                    };
                    let d = fields[hi].sub(&fields[lo]).scaled(Complex64::new(1.0 / (times[hi] - times[lo]), 0.0));
                    dt_max = dt_max.max(d.spectrum().sobolev_norm(s - 2.0));
                }
            }
            KDiagnostics { k0, k1: hs + dt_max }
        }
    }
}
