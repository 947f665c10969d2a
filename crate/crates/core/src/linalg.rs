//! Small dense helpers on top of faer.

use faer::{Mat, MatRef, Side};
use num_complex::Complex64 as c64;

use crate::error::{HdmdError, Result};

pub(crate) const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

/// `(M + M*)/2`.
pub fn hermitian_part(m: MatRef<'_, c64>) -> Mat<c64> {
    let n = m.nrows();
    Mat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// Frobenius norm.
pub fn frobenius(m: MatRef<'_, c64>) -> f64 {
    m.norm_l2()
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: MatRef<'_, c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| HdmdError::NoConvergence("hermitian eigendecomposition"))?;
    let values: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((values, evd.U().to_owned()))
}

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(m: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| HdmdError::NoConvergence("symmetric eigendecomposition"))?;
    Ok((evd.S().column_vector().iter().copied().collect(), evd.U().to_owned()))
}

/// Spectral truncation `G ≈ Q_r Λ_r Q_r*` keeping eigenvalues `λ > tol·λ_max`.
#[derive(Debug, Clone)]
pub struct TruncatedEigen {
    /// `N × r`, orthonormal columns.
    pub basis: Mat<c64>,
    /// Retained eigenvalues, ascending.
    pub values: Vec<f64>,
    pub dropped: usize,
}

impl TruncatedEigen {
    pub fn new(g: MatRef<'_, c64>, rel_tol: f64) -> Result<Self> {
        let (values, vectors) = hermitian_eigen(g)?;
        let lmax = values.iter().copied().fold(0.0_f64, f64::max);
        if !(lmax > 0.0) {
            return Err(HdmdError::ZeroRank);
        }
        let cutoff = rel_tol * lmax;
        let first = values.iter().position(|&l| l > cutoff).ok_or(HdmdError::ZeroRank)?;
        let r = values.len() - first;
        let basis = vectors.subcols(first, r).to_owned();
        Ok(Self {
            basis,
            values: values[first..].to_vec(),
            dropped: first,
        })
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    /// Scales column `k` of `basis` by `s(λ_k)`.
    pub fn scaled_basis(&self, s: impl Fn(f64) -> f64) -> Mat<c64> {
        let (n, r) = (self.basis.nrows(), self.rank());
        let scale: Vec<f64> = self.values.iter().map(|&l| s(l)).collect();
        Mat::from_fn(n, r, |i, k| self.basis[(i, k)] * scale[k])
    }
}
