use serde::Serialize;

use super::{eval_a, norm, QuadraticSymbol};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};

#[derive(Debug, Clone)]
pub struct Branch {
    pub lambda: f64,
    pub projector: ComplexMatrix,
    pub rank: usize,
    /// Index of the first raw (ascending) eigenvalue in this cluster.
    pub first_index: usize,
}

#[derive(Debug, Clone)]
pub struct EigenStructure {
    pub xi: Vec<f64>,
    pub branches: Vec<Branch>,
    /// Raw ascending eigenvalues before clustering.
    pub raw_eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProjectorDefects {
    pub partition: f64,
    pub orthogonality: f64,
    pub hermitian: f64,
}

impl EigenStructure {
    pub fn multiplicities(&self) -> Vec<usize> {
        self.branches.iter().map(|b| b.rank).collect()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.raw_eigenvalues.len();
        self.branches
            .iter()
            .fold(linalg::zeros(n), |acc, b| acc + &b.projector * linalg::c(b.lambda))
    }

    /// Frobenius defects of `ΣΠ_p = I`, `Π_pΠ_q = δ_pq Π_p`, `Π_p = Π_p*`.
    pub fn projector_defects(&self) -> ProjectorDefects {
        let n = self.raw_eigenvalues.len();
        let sum = self.branches.iter().fold(linalg::zeros(n), |acc, b| acc + &b.projector);
        let partition = linalg::fro_norm(&(sum - linalg::identity(n)));
        let mut orthogonality: f64 = 0.0;
        let mut hermitian: f64 = 0.0;
        for (p, bp) in self.branches.iter().enumerate() {
            hermitian = hermitian.max(linalg::hermitian_deviation(&bp.projector));
            for (q, bq) in self.branches.iter().enumerate() {
                let prod = &bp.projector * &bq.projector;
                let target = if p == q { bp.projector.clone() } else { linalg::zeros(n) };
                orthogonality = orthogonality.max(linalg::fro_norm(&(prod - target)));
            }
        }
        ProjectorDefects { partition, orthogonality, hermitian }
    }
}

/// Eigenstructure of `A(iξ)` with eigenvalues within `tau_cluster·|ξ|²`
/// (relative to the coefficient scale) merged.
pub fn eigen_decompose(a: &QuadraticSymbol, xi: &[f64], tau_cluster: f64) -> Result<EigenStructure> {
    let r = norm(xi);
    if r == 0.0 {
        return Err(Error::Domain(
            "eigenprojectors are undefined at xi = 0".into(),
        ));
    }
    let m = eval_a(a, xi)?;
    Ok(eigen_decompose_matrix(&m, xi, tau_cluster * r * r * a.scale()))
}

/// Clustered Hermitian eigenstructure of an explicit matrix, with absolute
/// clustering tolerance.
pub fn eigen_decompose_matrix(m: &ComplexMatrix, xi: &[f64], cluster_tol: f64) -> EigenStructure {
    let (vals, vecs) = linalg::hermitian_eigen(m);
    let n = vals.len();
    let mut branches: Vec<Branch> = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && vals[end] - vals[end - 1] <= cluster_tol {
            end += 1;
        }
        let cols = vecs.columns(start, end - start);
        let projector = &cols * cols.adjoint();
        let lambda = vals[start..end].iter().sum::<f64>() / (end - start) as f64;
        branches.push(Branch {
            lambda,
            projector,
            rank: end - start,
            first_index: start,
        });
        start = end;
    }
    EigenStructure {
        xi: xi.to_vec(),
        branches,
        raw_eigenvalues: vals,
    }
}

/// Reorders `next` so branch `p` continues branch `p` of `prev`, by maximal
/// projector overlap `‖Π_new Π_old‖_F`. Ties go to eigenvalue order.
pub fn track_branches(prev: &EigenStructure, next: EigenStructure) -> Result<EigenStructure> {
    if prev.multiplicities().iter().sum::<usize>() != next.multiplicities().iter().sum::<usize>()
        || prev.branches.len() != next.branches.len()
    {
        return Err(Error::Tracking {
            xi: next.xi.clone(),
            message: format!(
                "multiplicity pattern changed from {:?} to {:?}",
                prev.multiplicities(),
                next.multiplicities()
            ),
        });
    }
    let k = prev.branches.len();
    let mut overlaps = Vec::with_capacity(k * k);
    for (p, old) in prev.branches.iter().enumerate() {
        for (q, new) in next.branches.iter().enumerate() {
            let o = linalg::fro_norm(&(&new.projector * &old.projector));
            overlaps.push((o, p, q));
        }
    }
    // greedy: largest overlap first, ties broken by index distance
    overlaps.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| a.1.abs_diff(a.2).cmp(&b.1.abs_diff(b.2)))
    });
    let mut assigned: Vec<Option<usize>> = vec![None; k];
    let mut used = vec![false; k];
    for (_, p, q) in overlaps {
        if assigned[p].is_none() && !used[q] {
            assigned[p] = Some(q);
            used[q] = true;
        }
    }
    let mut slots: Vec<Option<Branch>> = next.branches.into_iter().map(Some).collect();
    let mut branches = Vec::with_capacity(k);
    for (p, q) in assigned.into_iter().enumerate() {
        let b = slots[q.expect("greedy matching is complete")].take().expect("each branch used once");
        if b.rank != prev.branches[p].rank {
            return Err(Error::Tracking {
                xi: next.xi.clone(),
                message: format!("branch {p} changed rank from {} to {}", prev.branches[p].rank, b.rank),
            });
        }
        branches.push(b);
    }
    Ok(EigenStructure {
        xi: next.xi,
        branches,
        raw_eigenvalues: next.raw_eigenvalues,
    })
}

/// Eigenstructures along a path of frequencies with continuous branch labels.
pub fn track_along_path(a: &QuadraticSymbol, path: &[Vec<f64>], tau_cluster: f64) -> Result<Vec<EigenStructure>> {
    let mut out: Vec<EigenStructure> = Vec::with_capacity(path.len());
    for xi in path {
        let es = eigen_decompose(a, xi, tau_cluster)?;
        let es = match out.last() {
            Some(prev) => track_branches(prev, es)?,
            None => es,
        };
        out.push(es);
    }
    Ok(out)
}
