//! EDMD and Hermitian DMD operators built from a [`GramPair`].
//!
//! All solves against `G` go through its truncated eigendecomposition
//! `G ≈ Q_r Λ_r Q_r*`; nothing here forms `G^{-1}` or `G^{±1/2}` on the full
//! space.

mod gram;
mod procrustes;

pub use gram::{assemble_gram_pair, weighted_moments, GramAccumulator, GramPair};
pub use procrustes::symmetric_procrustes;

use faer::{Mat, MatRef};
use num_complex::Complex64 as c64;

use crate::error::{HdmdError, Result};
use crate::linalg::{frobenius, hermitian_eigen, hermitian_part};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum KoopmanKind {
    Edmd,
    HermitianDmd,
}

/// A Koopman matrix `K` together with the Gram pair it was computed from.
#[derive(Debug, Clone)]
pub struct KoopmanMatrix<'a> {
    k: Mat<c64>,
    kind: KoopmanKind,
    gram: &'a GramPair,
}

impl<'a> KoopmanMatrix<'a> {
    pub fn k(&self) -> MatRef<'_, c64> {
        self.k.as_ref()
    }

    pub fn kind(&self) -> KoopmanKind {
        self.kind
    }

    pub fn gram(&self) -> &'a GramPair {
        self.gram
    }

    /// Retained rank of `G` fell below `N`.
    pub fn rank_deficient(&self) -> bool {
        self.gram.is_rank_deficient()
    }

    /// `‖GK − K*G‖_F / max(1, ‖GK‖_F)`.
    pub fn hermiticity_residual(&self) -> f64 {
        let gk = self.gram.g() * &self.k;
        let kg = self.k.adjoint() * self.gram.g();
        let diff = &gk - &kg;
        frobenius(diff.as_ref()) / frobenius(gk.as_ref()).max(1.0)
    }

    pub fn into_matrix(self) -> Mat<c64> {
        self.k
    }
}

/// `K = G† A` with the truncated pseudoinverse of `G`.
pub fn edmd(pair: &GramPair) -> KoopmanMatrix<'_> {
    KoopmanMatrix {
        k: pair.pinv_apply(pair.a()),
        kind: KoopmanKind::Edmd,
        gram: pair,
    }
}

/// Hermitian DMD: `K = G^{-1} (A + A*)/2` on the retained subspace of `G`.
///
/// With `P = Q_r Q_r*` the result is `K = Q_r Λ_r^{-1} Q_r* B Q_r Q_r*`, so
/// `GK = PBP = K*G` holds exactly even when `G` is truncated.
pub fn hermitian_dmd(pair: &GramPair) -> KoopmanMatrix<'_> {
    let b = hermitian_part(pair.a());
    let t = pair.truncated();
    let q = &t.basis;
    let compressed = q.adjoint() * (&b * q);
    let left = t.scaled_basis(|l| 1.0 / l) * compressed;
    KoopmanMatrix {
        k: left * q.adjoint(),
        kind: KoopmanKind::HermitianDmd,
        gram: pair,
    }
}

/// Real eigenvalues and `G`-orthonormal eigenvectors of a Hermitian DMD operator.
#[derive(Debug, Clone)]
pub struct KoopmanEig<'a> {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<c64>,
    gram: &'a GramPair,
}

impl<'a> KoopmanEig<'a> {
    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `N × r`, column `j` is `v_j`.
    pub fn eigenvectors(&self) -> MatRef<'_, c64> {
        self.eigenvectors.as_ref()
    }

    pub fn gram(&self) -> &'a GramPair {
        self.gram
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `max_j ‖B v_j − λ_j G v_j‖₂ / ‖G v_j‖₂` with `B = (A + A*)/2`.
    pub fn max_residual(&self) -> f64 {
        let b = hermitian_part(self.gram.a());
        let bv = &b * &self.eigenvectors;
        let gv = self.gram.g() * &self.eigenvectors;
        (0..self.len())
            .map(|j| {
                let lam = self.eigenvalues[j];
                let mut num = 0.0;
                let mut den = 0.0;
                for i in 0..bv.nrows() {
                    num += (bv[(i, j)] - gv[(i, j)] * lam).norm_sqr();
                    den += gv[(i, j)].norm_sqr();
                }
                (num / den).sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `max_{i,j} |v_i* G v_j − δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let gv = self.gram.g() * &self.eigenvectors;
        let m = self.eigenvectors.adjoint() * gv;
        let mut worst: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((m[(i, j)] - target).norm());
            }
        }
        worst
    }
}

/// Solves `B v = λ G v` on the retained subspace of `G` via the whitened
/// matrix `Λ^{-1/2} Q* B Q Λ^{-1/2}`. Each eigenvector is rotated so its
/// largest-modulus entry is real and positive.
pub fn eigendecompose<'a>(k: &KoopmanMatrix<'a>) -> Result<KoopmanEig<'a>> {
    if k.kind != KoopmanKind::HermitianDmd {
        return Err(HdmdError::WrongKind(k.kind));
    }
    let pair = k.gram;
    if pair.retained_rank() == 0 {
        return Err(HdmdError::ZeroRank);
    }
    let b = hermitian_part(pair.a());
    let whitened = hermitian_part(pair.whiten(b.as_ref()).as_ref());
    let (values, u) = hermitian_eigen(whitened.as_ref())?;
    let s = pair.truncated().scaled_basis(|l| 1.0 / l.sqrt());
    let mut vecs = s * u;

    for j in 0..vecs.ncols() {
        let mut best = 0usize;
        let mut best_mod = -1.0;
        for i in 0..vecs.nrows() {
            let m = vecs[(i, j)].norm();
            if m > best_mod {
                best_mod = m;
                best = i;
            }
        }
        if best_mod > 0.0 {
            let phase = vecs[(best, j)].conj() / best_mod;
            for i in 0..vecs.nrows() {
                vecs[(i, j)] *= phase;
            }
            vecs[(best, j)] = c64::new(vecs[(best, j)].norm(), 0.0);
        }
    }

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues = order.iter().map(|&j| values[j]).collect();
    let eigenvectors = Mat::from_fn(vecs.nrows(), order.len(), |i, c| vecs[(i, order[c])]);
    Ok(KoopmanEig {
        eigenvalues,
        eigenvectors,
        gram: pair,
    })
}
