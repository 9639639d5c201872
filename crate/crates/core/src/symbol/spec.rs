//! Declarative system description and its JSON form.

use num_complex::Complex64;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};

/// `A(∂ₓ) = Σ A_jk ∂_j ∂_k`, stored as the d×d table of N×N coefficients
/// (row-major, `coeffs[j * d + k]`).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSymbol {
    pub dim: usize,
    pub components: usize,
    pub coeffs: Vec<ComplexMatrix>,
}

impl QuadraticSymbol {
    pub fn new(dim: usize, components: usize, coeffs: Vec<ComplexMatrix>) -> Result<Self> {
        if coeffs.len() != dim * dim {
            return Err(Error::Invalid(format!(
                "expected {} coefficient matrices, got {}",
                dim * dim,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|m| m.nrows() != components || m.ncols() != components) {
            return Err(Error::Invalid("coefficient matrix has wrong shape".into()));
        }
        Ok(Self { dim, components, coeffs })
    }

    pub fn zero(dim: usize, components: usize) -> Self {
        Self {
            dim,
            components,
            coeffs: vec![linalg::zeros(components); dim * dim],
        }
    }

    pub fn coeff(&self, j: usize, k: usize) -> &ComplexMatrix {
        &self.coeffs[j * self.dim + k]
    }

    /// Largest coefficient norm, floored at 1 so it can be used as a
    /// tolerance scale for the zero symbol too.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(linalg::fro_norm).fold(1.0, f64::max)
    }
}

/// One polynomial term `coeff · Π (Re u_k)^{e_2k} (Im u_k)^{e_2k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct UTerm {
    pub monomial: Vec<u32>,
    pub coeff: ComplexMatrix,
}

/// Coefficient map `u ↦ B_j(u)`: a constant matrix plus polynomial terms.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMap {
    pub constant: ComplexMatrix,
    pub u_terms: Vec<UTerm>,
}

pub fn monomial_value(exponents: &[u32], u: &[Complex64]) -> f64 {
    let mut v = 1.0;
    for (i, &e) in exponents.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let z = u[i / 2];
        let base = if i % 2 == 0 { z.re } else { z.im };
        v *= base.powi(e as i32);
    }
    v
}

impl CoefficientMap {
    pub fn constant(m: ComplexMatrix) -> Self {
        Self { constant: m, u_terms: Vec::new() }
    }

    pub fn eval(&self, u: &[Complex64]) -> ComplexMatrix {
        let mut m = self.constant.clone();
        for term in &self.u_terms {
            let w = monomial_value(&term.monomial, u);
            if w != 0.0 {
                m += &term.coeff * linalg::c(w);
            }
        }
        m
    }

    pub fn is_state_independent(&self) -> bool {
        self.u_terms.is_empty()
    }
}

/// `B(u, ξ) = Σ ξ_j B_j(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderSymbol {
    pub components: usize,
    pub coeffs: Vec<CoefficientMap>,
}

impl FirstOrderSymbol {
    pub fn zero(dim: usize, components: usize) -> Self {
        Self {
            components,
            coeffs: (0..dim)
                .map(|_| CoefficientMap::constant(linalg::zeros(components)))
                .collect(),
        }
    }

    pub fn from_constants(mats: Vec<ComplexMatrix>) -> Self {
        let n = mats.first().map_or(0, |m| m.nrows());
        Self {
            components: n,
            coeffs: mats.into_iter().map(CoefficientMap::constant).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// The per-direction matrices `B_j(u)`.
    pub fn eval_coeffs(&self, u: &[Complex64]) -> Vec<ComplexMatrix> {
        self.coeffs.iter().map(|c| c.eval(u)).collect()
    }

    pub fn eval(&self, u: &[Complex64], xi: &[f64]) -> ComplexMatrix {
        let mut m = linalg::zeros(self.components);
        for (cm, &x) in self.coeffs.iter().zip(xi) {
            if x != 0.0 {
                m += cm.eval(u) * linalg::c(x);
            }
        }
        m
    }

    pub fn is_state_independent(&self) -> bool {
        self.coeffs.iter().all(CoefficientMap::is_state_independent)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| {
            linalg::max_abs(&c.constant) == 0.0 && c.u_terms.iter().all(|t| linalg::max_abs(&t.coeff) == 0.0)
        })
    }

    /// Largest total monomial degree among the u-terms.
    pub fn max_degree(&self) -> u32 {
        self.coeffs
            .iter()
            .flat_map(|c| c.u_terms.iter())
            .map(|t| t.monomial.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeData {
    /// Integer wavenumber index per axis; the physical frequency is `2πk/L`.
    pub wavenumber: Vec<i64>,
    pub component: usize,
    pub amplitude: Complex64,
}

/// Random data with `|ĥ(ξ)| ∝ amplitude·(1+|ξ|²)^{-decay/2}` and seeded phases.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadbandData {
    pub amplitude: f64,
    pub decay: f64,
    pub seed: u64,
    pub max_mode: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InitialData {
    pub modes: Vec<ModeData>,
    pub broadband: Option<BroadbandData>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub name: Option<String>,
    pub dim: usize,
    pub components: usize,
    pub a: QuadraticSymbol,
    pub b: FirstOrderSymbol,
    pub c: Option<FirstOrderSymbol>,
    pub period: f64,
    pub grid_points: usize,
    pub sobolev_s: f64,
    pub initial_data: Option<InitialData>,
}

impl SystemSpec {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            pointer: String::new(),
            message: e.to_string(),
        })?;
        Self::from_value(&v)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| perr("", "expected an object"))?;
        let dim = get_usize(v, "/dimension")?;
        let n = get_usize(v, "/components")?;
        if dim == 0 || n == 0 {
            return Err(perr("/dimension", "dimension and components must be positive"));
        }

        let a_val = v.pointer("/A").ok_or_else(|| perr("/A", "missing key"))?;
        let a_rows = a_val.as_array().ok_or_else(|| perr("/A", "expected a d×d array"))?;
        if a_rows.len() != dim {
            return Err(perr("/A", &format!("expected {dim} rows")));
        }
        let mut coeffs = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            let row = a_rows[j]
                .as_array()
                .filter(|r| r.len() == dim)
                .ok_or_else(|| perr(&format!("/A/{j}"), &format!("expected {dim} entries")))?;
            for (k, m) in row.iter().enumerate() {
                coeffs.push(parse_matrix(m, n, &format!("/A/{j}/{k}"))?);
            }
        }
        let a = QuadraticSymbol::new(dim, n, coeffs)?;

        let b = parse_first_order(v.pointer("/B"), dim, n, "/B")?
            .ok_or_else(|| perr("/B", "missing key"))?;
        let c = parse_first_order(v.pointer("/C"), dim, n, "/C")?;

        let period = match obj.get("period") {
            None => 2.0 * std::f64::consts::PI,
            Some(p) => p.as_f64().filter(|p| *p > 0.0 && p.is_finite()).ok_or_else(|| perr("/period", "expected a positive number"))?,
        };
        let grid_points = match obj.get("grid_points") {
            None => 128,
            Some(_) => get_usize(v, "/grid_points")?,
        };
        if !grid_points.is_power_of_two() || grid_points < 4 {
            return Err(perr("/grid_points", "expected a power of two >= 4"));
        }
        let sobolev_s = match obj.get("sobolev_s") {
            None => 1.0 + dim as f64 / 2.0 + 0.5,
            Some(s) => s.as_f64().ok_or_else(|| perr("/sobolev_s", "expected a number"))?,
        };
        let name = obj.get("name").and_then(|s| s.as_str()).map(str::to_owned);
        let initial_data = match obj.get("initial_data") {
            None => None,
            Some(d) => Some(parse_initial_data(d, dim, n)?),
        };

        let spec = SystemSpec {
            name,
            dim,
            components: n,
            a,
            b,
            c,
            period,
            grid_points,
            sobolev_s,
            initial_data,
        };
        if spec.sobolev_s <= 1.0 + dim as f64 / 2.0 {
            log::warn!(
                "sobolev_s = {} is below the nonlinear threshold 1 + d/2 = {}",
                spec.sobolev_s,
                1.0 + dim as f64 / 2.0
            );
        }
        Ok(spec)
    }

    /// Same system with a different constant first-order part and no state
    /// dependence: handy for building test systems.
    pub fn constant(a: QuadraticSymbol, b: Vec<ComplexMatrix>) -> Self {
        let dim = a.dim;
        let n = a.components;
        SystemSpec {
            name: None,
            dim,
            components: n,
            a,
            b: FirstOrderSymbol::from_constants(b),
            c: None,
            period: 2.0 * std::f64::consts::PI,
            grid_points: 128,
            sobolev_s: 1.0 + dim as f64 / 2.0 + 0.5,
            initial_data: None,
        }
    }

    pub fn has_conjugate_coupling(&self) -> bool {
        self.c.as_ref().is_some_and(|c| !c.is_zero())
    }

    pub fn is_state_independent(&self) -> bool {
        self.b.is_state_independent() && self.c.as_ref().is_none_or(|c| c.is_state_independent())
    }
}

fn perr(pointer: &str, message: &str) -> Error {
    Error::Parse {
        pointer: pointer.to_owned(),
        message: message.to_owned(),
    }
}

fn get_usize(v: &Value, pointer: &str) -> Result<usize> {
    let x = v.pointer(pointer).ok_or_else(|| perr(pointer, "missing key"))?;
    x.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| perr(pointer, "expected a non-negative integer"))
}

pub(crate) fn parse_complex(v: &Value, pointer: &str) -> Result<Complex64> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| perr(pointer, "expected a [re, im] pair"))?;
    let re = pair[0].as_f64().ok_or_else(|| perr(&format!("{pointer}/0"), "expected a number"))?;
    let im = pair[1].as_f64().ok_or_else(|| perr(&format!("{pointer}/1"), "expected a number"))?;
    Ok(Complex64::new(re, im))
}

pub(crate) fn parse_matrix(v: &Value, n: usize, pointer: &str) -> Result<ComplexMatrix> {
    let rows = v
        .as_array()
        .filter(|r| r.len() == n)
        .ok_or_else(|| perr(pointer, &format!("expected a {n}×{n} matrix")))?;
    let mut m = linalg::zeros(n);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|r| r.len() == n)
            .ok_or_else(|| perr(&format!("{pointer}/{i}"), &format!("expected {n} entries")))?;
        for (j, z) in row.iter().enumerate() {
            m[(i, j)] = parse_complex(z, &format!("{pointer}/{i}/{j}"))?;
        }
    }
    Ok(m)
}

fn parse_first_order(v: Option<&Value>, dim: usize, n: usize, pointer: &str) -> Result<Option<FirstOrderSymbol>> {
    let Some(v) = v else { return Ok(None) };
    let entries = v
        .as_array()
        .filter(|a| a.len() == dim)
        .ok_or_else(|| perr(pointer, &format!("expected {dim} entries")))?;
    let mut coeffs = Vec::with_capacity(dim);
    for (j, e) in entries.iter().enumerate() {
        let p = format!("{pointer}/{j}");
        let obj = e.as_object().ok_or_else(|| perr(&p, "expected an object"))?;
        let constant = match obj.get("const") {
            Some(m) => parse_matrix(m, n, &format!("{p}/const"))?,
            None => linalg::zeros(n),
        };
        let mut u_terms = Vec::new();
        if let Some(terms) = obj.get("u_terms") {
            let terms = terms.as_array().ok_or_else(|| perr(&format!("{p}/u_terms"), "expected an array"))?;
            for (t, term) in terms.iter().enumerate() {
                let tp = format!("{p}/u_terms/{t}");
                let mono = term
                    .get("monomial")
                    .and_then(|m| m.as_array())
                    .filter(|m| m.len() == 2 * n)
                    .ok_or_else(|| perr(&format!("{tp}/monomial"), &format!("expected {} exponents", 2 * n)))?;
                let monomial = mono
                    .iter()
                    .enumerate()
                    .map(|(i, e)| {
                        e.as_u64()
                            .map(|x| x as u32)
                            .ok_or_else(|| perr(&format!("{tp}/monomial/{i}"), "expected a non-negative integer"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let coeff = parse_matrix(
                    term.get("coeff").ok_or_else(|| perr(&format!("{tp}/coeff"), "missing key"))?,
                    n,
                    &format!("{tp}/coeff"),
                )?;
                u_terms.push(UTerm { monomial, coeff });
            }
        }
        coeffs.push(CoefficientMap { constant, u_terms });
    }
    Ok(Some(FirstOrderSymbol { components: n, coeffs }))
}

fn parse_initial_data(v: &Value, dim: usize, n: usize) -> Result<InitialData> {
    let p = "/initial_data";
    let obj = v.as_object().ok_or_else(|| perr(p, "expected an object"))?;
    let mut data = InitialData::default();
    if let Some(modes) = obj.get("modes") {
        let modes = modes.as_array().ok_or_else(|| perr(&format!("{p}/modes"), "expected an array"))?;
        for (i, m) in modes.iter().enumerate() {
            let mp = format!("{p}/modes/{i}");
            let wavenumber = m
                .get("wavenumber")
                .and_then(|w| w.as_array())
                .filter(|w| w.len() == dim)
                .and_then(|w| w.iter().map(|x| x.as_i64()).collect::<Option<Vec<_>>>())
                .ok_or_else(|| perr(&format!("{mp}/wavenumber"), &format!("expected {dim} integers")))?;
            let component = match m.get("component") {
                None => 0,
                Some(c) => c
                    .as_u64()
                    .map(|c| c as usize)
                    .filter(|&c| c < n)
                    .ok_or_else(|| perr(&format!("{mp}/component"), "component index out of range"))?,
            };
            let amplitude = parse_complex(
                m.get("amplitude").ok_or_else(|| perr(&format!("{mp}/amplitude"), "missing key"))?,
                &format!("{mp}/amplitude"),
            )?;
            data.modes.push(ModeData { wavenumber, component, amplitude });
        }
    }
    if let Some(b) = obj.get("broadband") {
        let bp = format!("{p}/broadband");
        let num = |k: &str| -> Result<f64> {
            b.get(k)
                .and_then(|x| x.as_f64())
                .ok_or_else(|| perr(&format!("{bp}/{k}"), "expected a number"))
        };
        data.broadband = Some(BroadbandData {
            amplitude: num("amplitude")?,
            decay: num("decay")?,
            seed: b.get("seed").and_then(|s| s.as_u64()).unwrap_or(0),
            max_mode: b.get("max_mode").and_then(|m| m.as_u64()).map(|m| m as usize),
        });
    }
    Ok(data)
}
