//! Separable symbols `a(x, ξ) = Σ_r c_r(x) G_r(ξ)`.
//!
//! Each term pairs an optional scalar coefficient field (absent means the
//! constant 1) with an `N×N` matrix multiplier. Every symbol the solver and
//! the checks need has this shape: multipliers, paraproducts, and first-order
//! symbols frozen at a state, where the coefficients are the monomials of the
//! state.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use super::grid::{dealiased_product, GridField};
use crate::linalg::{self, ComplexMatrix};
use crate::symbol::{monomial_value, FirstOrderSymbol};

pub type Multiplier = Arc<dyn Fn(&[f64]) -> ComplexMatrix + Send + Sync>;

#[derive(Clone)]
pub struct SymbolTerm {
    pub coeff: Option<GridField>,
    pub multiplier: Multiplier,
}

#[derive(Clone)]
pub struct ParadiffSymbol {
    pub components: usize,
    pub order: f64,
    pub terms: Vec<SymbolTerm>,
}

impl std::fmt::Debug for ParadiffSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParadiffSymbol")
            .field("components", &self.components)
            .field("order", &self.order)
            .field("terms", &self.terms.len())
            .finish()
    }
}

impl ParadiffSymbol {
    pub fn multiplier(components: usize, order: f64, g: impl Fn(&[f64]) -> ComplexMatrix + Send + Sync + 'static) -> Self {
        Self {
            components,
            order,
            terms: vec![SymbolTerm { coeff: None, multiplier: Arc::new(g) }],
        }
    }

    pub fn scalar_multiplier(components: usize, order: f64, g: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        Self::multiplier(components, order, move |xi| linalg::identity(components) * g(xi))
    }

    pub fn identity(components: usize) -> Self {
        Self::multiplier(components, 0.0, move |_| linalg::identity(components))
    }

    /// `c(x) G(ξ)`.
    pub fn separable(coeff: GridField, order: f64, components: usize, g: impl Fn(&[f64]) -> ComplexMatrix + Send + Sync + 'static) -> Self {
        assert_eq!(coeff.components, 1, "coefficient fields are scalar");
        Self {
            components,
            order,
            terms: vec![SymbolTerm { coeff: Some(coeff), multiplier: Arc::new(g) }],
        }
    }

    /// Scalar paraproduct symbol `a(x)` acting diagonally on `components`.
    pub fn paraproduct(a: GridField, components: usize) -> Self {
        Self::separable(a, 0.0, components, move |_| linalg::identity(components))
    }

    /// Matrix paraproduct from a field holding the `N²` entries row-major.
    pub fn matrix_paraproduct(a: &GridField, components: usize) -> Self {
        assert_eq!(a.components, components * components);
        let terms = (0..components * components)
            .map(|e| {
                let mut unit = linalg::zeros(components);
                unit[(e / components, e % components)] = Complex64::new(1.0, 0.0);
                SymbolTerm {
                    coeff: Some(a.extract(e)),
                    multiplier: Arc::new(move |_: &[f64]| unit.clone()),
                }
            })
            .collect();
        Self { components, order: 0.0, terms }
    }

    /// A first-order symbol frozen at `state`, passed through a map that is
    /// linear in its matrix argument: `ξ ↦ map(ξ, Σ_j ξ_j B_j(state(x)))`.
    ///
    /// The coefficient fields are the state monomials, which is what makes
    /// the result separable.
    pub fn frozen_with(
        b: &FirstOrderSymbol,
        state: &GridField,
        order: f64,
        map: Arc<dyn Fn(&[f64], ComplexMatrix) -> ComplexMatrix + Send + Sync>,
    ) -> Self {
        let n = b.components;
        let dim = b.dim();
        let constants: Vec<ComplexMatrix> = b.coeffs.iter().map(|m| m.constant.clone()).collect();
        let mut by_monomial: BTreeMap<Vec<u32>, Vec<ComplexMatrix>> = BTreeMap::new();
        for (j, cm) in b.coeffs.iter().enumerate() {
            for t in &cm.u_terms {
                let entry = by_monomial.entry(t.monomial.clone()).or_insert_with(|| vec![linalg::zeros(n); dim]);
                entry[j] += &t.coeff;
            }
        }
        let contract = |mats: Vec<ComplexMatrix>| {
            move |xi: &[f64]| {
                mats.iter()
                    .zip(xi)
                    .fold(linalg::zeros(mats[0].nrows()), |acc, (m, &x)| acc + m * linalg::c(x))
            }
        };
        let mut terms = Vec::new();
        let c0 = contract(constants);
        let m0 = map.clone();
        terms.push(SymbolTerm {
            coeff: None,
            multiplier: Arc::new(move |xi: &[f64]| m0(xi, c0(xi))),
        });
        let len = state.grid.len();
        for (monomial, mats) in by_monomial {
            let mut field = GridField::zeros(state.grid, 1);
            for i in 0..len {
                field.values[i] = Complex64::new(monomial_value(&monomial, &state.at(i)), 0.0);
            }
            let cm = contract(mats);
            let mm = map.clone();
            terms.push(SymbolTerm {
                coeff: Some(field),
                multiplier: Arc::new(move |xi: &[f64]| mm(xi, cm(xi))),
            });
        }
        Self { components: n, order, terms }
    }

    /// `Σ_j ξ_j B_j(state(x))`.
    pub fn first_order(b: &FirstOrderSymbol, state: &GridField) -> Self {
        Self::frozen_with(b, state, 1.0, Arc::new(|_, m| m))
    }

    pub fn is_x_independent(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.is_none())
    }

    /// Evaluates `a(x_node, ξ)`.
    pub fn eval(&self, node: usize, xi: &[f64]) -> ComplexMatrix {
        self.terms.iter().fold(linalg::zeros(self.components), |acc, t| {
            let w = t.coeff.as_ref().map_or(Complex64::new(1.0, 0.0), |c| c.values[node]);
            acc + (t.multiplier)(xi) * w
        })
    }

    /// Pointwise adjoint `a*(x, ξ) = a(x, ξ)*`.
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let g = t.multiplier.clone();
                SymbolTerm {
                    coeff: t.coeff.as_ref().map(GridField::conj),
                    multiplier: Arc::new(move |xi: &[f64]| g(xi).adjoint()),
                }
            })
            .collect();
        Self { terms, ..self.clone() }
    }

    /// Pointwise product `a(x, ξ) b(x, ξ)`.
    pub fn product(&self, other: &ParadiffSymbol) -> Self {
        let mut terms = Vec::new();
        for ta in &self.terms {
            for tb in &other.terms {
                let coeff = match (&ta.coeff, &tb.coeff) {
                    (None, None) => None,
                    (Some(c), None) | (None, Some(c)) => Some(c.clone()),
                    (Some(a), Some(b)) => Some(dealiased_product(&a.spectrum(), &b.spectrum()).to_field()),
                };
                let (ga, gb) = (ta.multiplier.clone(), tb.multiplier.clone());
                terms.push(SymbolTerm {
                    coeff,
                    multiplier: Arc::new(move |xi: &[f64]| ga(xi) * gb(xi)),
                });
            }
        }
        Self {
            components: self.components,
            order: self.order + other.order,
            terms,
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let g = t.multiplier.clone();
                SymbolTerm {
                    coeff: t.coeff.clone(),
                    multiplier: Arc::new(move |xi: &[f64]| g(xi) * s),
                }
            })
            .collect();
        Self { terms, ..self.clone() }
    }

    pub fn sum(&self, other: &ParadiffSymbol) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self {
            components: self.components,
            order: self.order.max(other.order),
            terms,
        }
    }
}
