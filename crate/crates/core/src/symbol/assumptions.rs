//! Numerical checks of the eigenvalue-coincidence hypotheses.
//!
//! At every sample `(ξ, u)` the blocks `Π_p X Π_q` of the relevant
//! antisymmetric parts are compared with their eigenvalue gaps. Blocks
//! between coincident branches must vanish. Off-diagonal ratios
//! `‖block‖ / max(|gap|, τ_div)` must stay bounded: near every sampled
//! near-coincidence we locate the closest coincidence on the sphere by
//! pattern search and walk towards it in 5 decades. A ratio that grows by
//! more than 10× is reported as a failure. This is a surrogate for
//! divisibility, which no finite sample set can certify.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{eigen_decompose, eval_a_unchecked, norm, EigenStructure, SystemSpec, TAU_ALG, TAU_CLUSTER, TAU_DIV};
use crate::error::Result;
use crate::linalg::{self, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Which block family a witness belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockFamily {
    /// `Π_p (Im B) Π_q` against `λ_p − λ_q`.
    ImB,
    /// `Π_p (C − ᵗC)/2i Π̄_q` against `λ_p + λ_q`.
    CAntisymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// Nonzero block between coincident branches.
    DiagonalBlock,
    /// Ratio grew by more than 10× approaching a coincidence.
    RatioGrowth,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub xi: Vec<f64>,
    pub state: Vec<[f64; 2]>,
    pub family: BlockFamily,
    pub p: usize,
    pub q: usize,
    pub block_norm: f64,
    pub ratio: f64,
    pub kind: WitnessKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub max_diagonal_block: f64,
    pub max_ratio: f64,
    pub samples: usize,
    pub refinements: usize,
    pub max_ratio_growth: f64,
    pub note: String,
}

const NEAR_GAP: f64 = 0.25;
const REFINE_LEVELS: i32 = 5;
const REFINE_START: f64 = 0.1;
const MAX_REFINEMENTS: usize = 16;

#[derive(Debug, Clone)]
struct PairBlock {
    family: BlockFamily,
    p: usize,
    q: usize,
    raw_p: usize,
    raw_q: usize,
    block: f64,
    gap: f64,
    coincident: bool,
}

struct Evaluated {
    blocks: Vec<PairBlock>,
    tol: f64,
}

fn evaluate(spec: &SystemSpec, xi: &[f64], u: &[Complex64], families: &[BlockFamily]) -> Result<Evaluated> {
    let es = eigen_decompose(&spec.a, xi, TAU_CLUSTER)?;
    let r = norm(xi);
    let cluster_tol = TAU_CLUSTER * r * r * spec.a.scale();
    let b = spec.b.eval(u, xi);
    let c = spec.c.as_ref().map(|c| c.eval(u, xi));
    let mut scale = linalg::fro_norm(&b);
    if let Some(c) = &c {
        scale = scale.max(linalg::fro_norm(c));
    }
    let tol = TAU_ALG * (1.0 + r) * scale.max(1.0);
    let mut blocks = Vec::new();
    for &family in families {
        match family {
            BlockFamily::ImB => push_blocks(&mut blocks, &es, &linalg::im_part(&b), family, false, cluster_tol),
            BlockFamily::CAntisymmetric => {
                if let Some(c) = &c {
                    let x = (c - c.transpose()) / Complex64::new(0.0, 2.0);
                    push_blocks(&mut blocks, &es, &x, family, true, cluster_tol);
                }
            }
        }
    }
    Ok(Evaluated { blocks, tol })
}

fn push_blocks(
    out: &mut Vec<PairBlock>,
    es: &EigenStructure,
    x: &ComplexMatrix,
    family: BlockFamily,
    conjugate_right: bool,
    cluster_tol: f64,
) {
    for (p, bp) in es.branches.iter().enumerate() {
        for (q, bq) in es.branches.iter().enumerate() {
            let right = if conjugate_right { linalg::conj(&bq.projector) } else { bq.projector.clone() };
            let block = linalg::fro_norm(&(&bp.projector * x * right));
            let (gap, coincident) = if conjugate_right {
                let g = bp.lambda + bq.lambda;
                (g, g.abs() <= cluster_tol)
            } else {
                (bp.lambda - bq.lambda, p == q)
            };
            out.push(PairBlock {
                family,
                p,
                q,
                raw_p: bp.first_index,
                raw_q: bq.first_index,
                block,
                gap,
                coincident,
            });
        }
    }
}

fn state_pairs(u: &[Complex64]) -> Vec<[f64; 2]> {
    u.iter().map(|z| [z.re, z.im]).collect()
}

/// Gap of the raw (sorted) eigenvalue pair; continuous in ξ even through
/// crossings.
fn raw_gap(spec: &SystemSpec, xi: &[f64], family: BlockFamily, ip: usize, iq: usize) -> f64 {
    let (vals, _) = linalg::hermitian_eigen(&eval_a_unchecked(&spec.a, xi));
    match family {
        BlockFamily::ImB => (vals[ip] - vals[iq]).abs(),
        BlockFamily::CAntisymmetric => (vals[ip] + vals[iq]).abs(),
    }
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let r = norm(&v);
    v.into_iter().map(|x| x / r).collect()
}

fn tangent_basis(xi: &[f64]) -> Vec<Vec<f64>> {
    let d = xi.len();
    let n0 = normalized(xi.to_vec());
    let mut basis: Vec<Vec<f64>> = vec![n0];
    for e in 0..d {
        let mut v = vec![0.0; d];
        v[e] = 1.0;
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= dot * bi;
            }
        }
        if norm(&v) > 1e-6 {
            basis.push(normalized(v));
        }
        if basis.len() == d {
            break;
        }
    }
    basis.remove(0);
    basis
}

fn on_sphere(base: &[f64], tangents: &[Vec<f64>], s: &[f64]) -> Vec<f64> {
    let mut v = base.to_vec();
    for (t, &si) in tangents.iter().zip(s) {
        for (vi, ti) in v.iter_mut().zip(t) {
            *vi += si * ti;
        }
    }
    normalized(v)
}

/// Derivative-free compass search; tolerates the V-shaped gap landscape.
fn compass_min(f: impl Fn(&[f64]) -> f64, dim: usize, step0: f64) -> (Vec<f64>, f64) {
    let mut x = vec![0.0; dim];
    let mut fx = f(&x);
    let mut step = step0;
    let mut evals = 0;
    while step > 1e-14 && evals < 4000 {
        let mut improved = false;
        for i in 0..dim {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += sign * step;
                let fy = f(&y);
                evals += 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

struct Candidate {
    xi: Vec<f64>,
    u: Vec<Complex64>,
    family: BlockFamily,
    raw_p: usize,
    raw_q: usize,
    gap: f64,
}

struct RefineOutcome {
    growth: f64,
    witness: Option<Witness>,
}

fn refine(spec: &SystemSpec, cand: &Candidate, families: &[BlockFamily]) -> Result<RefineOutcome> {
    let tangents = tangent_basis(&cand.xi);
    let objective = |s: &[f64]| raw_gap(spec, &on_sphere(&cand.xi, &tangents, s), cand.family, cand.raw_p, cand.raw_q);
    let (s_star, _) = compass_min(objective, tangents.len(), 0.25);
    let xi_star = on_sphere(&cand.xi, &tangents, &s_star);
    let star_tangents = tangent_basis(&xi_star);

    let mut worst = RefineOutcome { growth: 1.0, witness: None };
    for t in &star_tangents {
        let mut first: Option<f64> = None;
        let mut last = (0.0, 0.0, Vec::new(), 0, 0, 0.0);
        for level in 0..REFINE_LEVELS {
            let delta = REFINE_START * 10f64.powi(-level);
            let xi = on_sphere(&xi_star, std::slice::from_ref(t), &[delta]);
            let ev = evaluate(spec, &xi, &cand.u, families)?;
            if let Some(diag) = ev
                .blocks
                .iter()
                .filter(|b| b.coincident && b.block > ev.tol)
                .max_by(|a, b| a.block.total_cmp(&b.block))
            {
                return Ok(RefineOutcome {
                    growth: f64::INFINITY,
                    witness: Some(Witness {
                        xi,
                        state: state_pairs(&cand.u),
                        family: diag.family,
                        p: diag.p,
                        q: diag.q,
                        block_norm: diag.block,
                        ratio: f64::INFINITY,
                        kind: WitnessKind::DiagonalBlock,
                    }),
                });
            }
            let pair = ev
                .blocks
                .iter()
                .find(|b| b.family == cand.family && b.raw_p == cand.raw_p && b.raw_q == cand.raw_q && !b.coincident);
            let Some(pair) = pair else { break };
            let ratio = pair.block / pair.gap.abs().max(TAU_DIV);
            if first.is_none() {
                first = Some(ratio.max(f64::MIN_POSITIVE));
            }
            last = (ratio, pair.block, xi, pair.p, pair.q, ev.tol);
        }
        let Some(first) = first else { continue };
        let (ratio, block, xi, p, q, tol) = last;
        let growth = ratio / first;
        if block > tol && growth > worst.growth {
            worst.growth = growth;
            if growth > 10.0 {
                worst.witness = Some(Witness {
                    xi,
                    state: state_pairs(&cand.u),
                    family: cand.family,
                    p,
                    q,
                    block_norm: block,
                    ratio,
                    kind: WitnessKind::RatioGrowth,
                });
            }
        }
    }
    Ok(worst)
}

fn run_check(
    spec: &SystemSpec,
    xis: &[Vec<f64>],
    states: &[Vec<Complex64>],
    families: &[BlockFamily],
) -> Result<AssumptionReport> {
    let zero_state = vec![vec![Complex64::new(0.0, 0.0); spec.components]];
    let states = if states.is_empty() { &zero_state[..] } else { states };
    let mut max_diag: f64 = 0.0;
    let mut max_ratio: f64 = 0.0;
    let mut diag_witness: Option<Witness> = None;
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut samples = 0;
    for xi in xis {
        let r = norm(xi);
        for u in states {
            samples += 1;
            let ev = evaluate(spec, xi, u, families)?;
            for b in &ev.blocks {
                if b.coincident {
                    if b.block > ev.tol && diag_witness.as_ref().is_none_or(|w| b.block > w.block_norm) {
                        diag_witness = Some(Witness {
                            xi: xi.clone(),
                            state: state_pairs(u),
                            family: b.family,
                            p: b.p,
                            q: b.q,
                            block_norm: b.block,
                            ratio: f64::INFINITY,
                            kind: WitnessKind::DiagonalBlock,
                        });
                    }
                    max_diag = max_diag.max(b.block);
                    continue;
                }
                let ratio = b.block / b.gap.abs().max(TAU_DIV);
                max_ratio = max_ratio.max(ratio);
                let near = b.gap.abs() < NEAR_GAP * spec.a.scale() * r * r;
                // (p, q) and (q, p) carry the same information
                let canonical = b.raw_p < b.raw_q || b.family == BlockFamily::CAntisymmetric && b.raw_p <= b.raw_q;
                if near && canonical && b.block > ev.tol && spec.dim >= 2 {
                    candidates.push(Candidate {
                        xi: xi.clone(),
                        u: u.clone(),
                        family: b.family,
                        raw_p: b.raw_p,
                        raw_q: b.raw_q,
                        gap: b.gap.abs(),
                    });
                }
            }
        }
    }

    let note = "divisibility is tested by ratio boundedness under geometric refinement towards sampled \
                near-coincidences; this is a numerical surrogate, not a certificate"
        .to_string();
    if let Some(w) = diag_witness {
        return Ok(AssumptionReport {
            verdict: Verdict::Fail,
            witness: Some(w),
            max_diagonal_block: max_diag,
            max_ratio,
            samples,
            refinements: 0,
            max_ratio_growth: f64::NAN,
            note,
        });
    }

    candidates.sort_by(|a, b| a.gap.total_cmp(&b.gap));
    candidates.truncate(MAX_REFINEMENTS);
    let mut max_growth: f64 = 1.0;
    let mut witness = None;
    for cand in &candidates {
        let outcome = refine(spec, cand, families)?;
        if outcome.growth > max_growth {
            max_growth = outcome.growth;
            if outcome.witness.is_some() {
                witness = outcome.witness;
            }
        }
    }
    let verdict = if witness.is_some() { Verdict::Fail } else { Verdict::Pass };
    Ok(AssumptionReport {
        verdict,
        witness,
        max_diagonal_block: max_diag,
        max_ratio,
        samples,
        refinements: candidates.len(),
        max_ratio_growth: max_growth,
        note,
    })
}

/// Coincidence condition on `Im B`: blocks between coincident eigenvalues
/// vanish and `Π_p (Im B) Π_q / (λ_p − λ_q)` stays bounded.
pub fn check_assumption_2_2(
    spec: &SystemSpec,
    xis: &[Vec<f64>],
    states: &[Vec<Complex64>],
) -> Result<AssumptionReport> {
    run_check(spec, xis, states, &[BlockFamily::ImB])
}

/// The conjugate-coupling version: the `Im B` family plus
/// `Π_p (C − ᵗC) Π̄_q` against `λ_p + λ_q`.
pub fn check_assumption_2_7(
    spec: &SystemSpec,
    xis: &[Vec<f64>],
    states: &[Vec<Complex64>],
) -> Result<AssumptionReport> {
    run_check(spec, xis, states, &[BlockFamily::ImB, BlockFamily::CAntisymmetric])
}

/// Unit frequencies: both orientations in d = 1; otherwise the signed axes
/// followed by seeded random directions.
pub fn sphere_samples(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    if dim == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    let mut out = Vec::with_capacity(count.max(2 * dim));
    for e in 0..dim {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; dim];
            v[e] = sign;
            out.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = norm(&v);
        if r > 0.1 && r <= 1.0 {
            out.push(normalized(v));
        }
    }
    out
}

/// The zero state followed by seeded random states with `|u_k| ≤ radius`.
pub fn state_samples(components: usize, count: usize, radius: f64, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f5a_u64);
    let mut out = vec![vec![Complex64::new(0.0, 0.0); components]];
    while out.len() < count.max(1) {
        out.push(
            (0..components)
                .map(|_| {
                    let r = radius * rng.random::<f64>().sqrt();
                    let th = rng.random_range(0.0..std::f64::consts::TAU);
                    Complex64::from_polar(r, th)
                })
                .collect(),
        );
    }
    out
}
