use faer::linalg::matmul::matmul;
use faer::{get_global_parallelism, Accum, Col, Mat, MatRef};
use num_complex::Complex64 as c64;

use crate::dictionary::FeatureMatrices;
use crate::error::{HdmdError, Result};
use crate::linalg::{hermitian_part, TruncatedEigen, ZERO};
use crate::quadrature::QuadratureRule;

/// The Gram matrix `G = Ψ_X* W Ψ_X` and correlation matrix `A = Ψ_X* W Ψ_Y`,
/// together with the truncated eigendecomposition of `G` that every solve
/// against `G` goes through.
#[derive(Debug, Clone)]
pub struct GramPair {
    g: Mat<c64>,
    a: Mat<c64>,
    eig: TruncatedEigen,
    rank_tolerance: f64,
}

impl GramPair {
    /// `g` is symmetrized as `(g + g*)/2`; eigenvalues of `g` at or below
    /// `rank_tolerance · λ_max` are discarded.
    pub fn new(g: Mat<c64>, a: Mat<c64>, rank_tolerance: f64) -> Result<Self> {
        let n = g.nrows();
        if g.ncols() != n {
            return Err(HdmdError::DimensionMismatch {
                context: "gram matrix columns",
                expected: n,
                found: g.ncols(),
            });
        }
        if a.nrows() != n || a.ncols() != n {
            return Err(HdmdError::DimensionMismatch {
                context: "correlation matrix",
                expected: n,
                found: a.nrows().max(a.ncols()),
            });
        }
        if !(rank_tolerance >= 0.0 && rank_tolerance < 1.0) {
            return Err(HdmdError::arg("rank_tolerance", "must lie in [0, 1)"));
        }
        let g = hermitian_part(g.as_ref());
        let eig = TruncatedEigen::new(g.as_ref(), rank_tolerance)?;
        if eig.dropped > 0 {
            log::warn!(
                "gram matrix is numerically rank deficient: retained {} of {} directions",
                eig.rank(),
                n
            );
        }
        Ok(Self {
            g,
            a,
            eig,
            rank_tolerance,
        })
    }

    pub fn g(&self) -> MatRef<'_, c64> {
        self.g.as_ref()
    }

    pub fn a(&self) -> MatRef<'_, c64> {
        self.a.as_ref()
    }

    pub fn size(&self) -> usize {
        self.g.nrows()
    }

    pub fn retained_rank(&self) -> usize {
        self.eig.rank()
    }

    /// Smallest retained eigenvalue of `G`.
    pub fn g_eigen_floor(&self) -> f64 {
        self.eig.values[0]
    }

    pub fn g_eigen_max(&self) -> f64 {
        *self.eig.values.last().unwrap()
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    /// True when truncation discarded at least one direction of `G`.
    pub fn is_rank_deficient(&self) -> bool {
        self.eig.dropped > 0
    }

    pub(crate) fn truncated(&self) -> &TruncatedEigen {
        &self.eig
    }

    /// `Q_r Λ_r^{-1} Q_r* rhs`, the truncated pseudoinverse applied to `rhs`.
    pub fn pinv_apply(&self, rhs: MatRef<'_, c64>) -> Mat<c64> {
        let q = &self.eig.basis;
        let qs = self.eig.scaled_basis(|l| 1.0 / l);
        let coords = q.adjoint() * rhs;
        qs * coords
    }

    /// `Λ_r^{-1/2} Q_r* M Q_r Λ_r^{-1/2}`: `M` expressed in a `G`-orthonormal
    /// basis of the retained subspace.
    pub fn whiten(&self, m: MatRef<'_, c64>) -> Mat<c64> {
        let s = self.eig.scaled_basis(|l| 1.0 / l.sqrt());
        let ms = m * &s;
        s.adjoint() * ms
    }

    /// The induced inner product `h* G g`.
    pub fn inner(&self, h: &Col<c64>, g: &Col<c64>) -> c64 {
        let gg = &self.g * g;
        h.iter().zip(gg.iter()).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Streaming assembly of `G`, `A` and optional moment vectors `Ψ_X* W s`
/// over blocks of snapshot rows. Blocks are accumulated in the order added.
#[derive(Debug, Clone)]
pub struct GramAccumulator {
    g: Mat<c64>,
    a: Mat<c64>,
    moments: Mat<c64>,
    rows_seen: usize,
}

impl GramAccumulator {
    pub fn new(n: usize, observables: usize) -> Self {
        Self {
            g: Mat::zeros(n, n),
            a: Mat::zeros(n, n),
            moments: Mat::zeros(n, observables),
            rows_seen: 0,
        }
    }

    /// Adds the contribution of one row block. `samples`, when given, holds
    /// one column of observable samples per moment vector.
    pub fn add_block(
        &mut self,
        psi_x: MatRef<'_, c64>,
        psi_y: MatRef<'_, c64>,
        weights: &[f64],
        samples: Option<MatRef<'_, c64>>,
    ) -> Result<()> {
        let (m, n) = (psi_x.nrows(), psi_x.ncols());
        if n != self.g.nrows() || psi_y.ncols() != n || psi_y.nrows() != m {
            return Err(HdmdError::DimensionMismatch {
                context: "feature block",
                expected: self.g.nrows(),
                found: n,
            });
        }
        if weights.len() != m {
            return Err(HdmdError::DimensionMismatch {
                context: "feature rows vs quadrature nodes",
                expected: weights.len(),
                found: m,
            });
        }
        let par = get_global_parallelism();
        let wx = Mat::from_fn(m, n, |i, j| psi_x[(i, j)] * weights[i]);
        matmul(&mut self.g, Accum::Add, psi_x.adjoint(), &wx, c64::new(1.0, 0.0), par);
        matmul(&mut self.a, Accum::Add, wx.adjoint(), psi_y, c64::new(1.0, 0.0), par);
        if let Some(s) = samples {
            if s.nrows() != m || s.ncols() != self.moments.ncols() {
                return Err(HdmdError::DimensionMismatch {
                    context: "observable samples",
                    expected: m,
                    found: s.nrows(),
                });
            }
            matmul(&mut self.moments, Accum::Add, wx.adjoint(), s, c64::new(1.0, 0.0), par);
        }
        self.rows_seen += m;
        Ok(())
    }

    pub fn rows_seen(&self) -> usize {
        self.rows_seen
    }

    /// Moment vectors `Ψ_X* W s`, one column per observable.
    pub fn moments(&self) -> MatRef<'_, c64> {
        self.moments.as_ref()
    }

    pub fn finish(self, rank_tolerance: f64) -> Result<(GramPair, Mat<c64>)> {
        Ok((GramPair::new(self.g, self.a, rank_tolerance)?, self.moments))
    }
}

/// `G = Ψ_X* W Ψ_X`, `A = Ψ_X* W Ψ_Y` as weighted sums over snapshots.
pub fn assemble_gram_pair(features: &FeatureMatrices, quad: &QuadratureRule) -> Result<GramPair> {
    if features.snapshots() != quad.len() {
        return Err(HdmdError::DimensionMismatch {
            context: "feature rows vs quadrature nodes",
            expected: quad.len(),
            found: features.snapshots(),
        });
    }
    let mut acc = GramAccumulator::new(features.dictionary_size(), 0);
    acc.add_block(features.psi_x.as_ref(), features.psi_y.as_ref(), quad.weights(), None)?;
    Ok(acc.finish(features.rank_tolerance)?.0)
}

/// `Ψ_X* W s` for a single sample vector.
pub fn weighted_moments(features: &FeatureMatrices, quad: &QuadratureRule, samples: &[c64]) -> Result<Col<c64>> {
    if samples.len() != quad.len() || features.snapshots() != quad.len() {
        return Err(HdmdError::DimensionMismatch {
            context: "observable samples",
            expected: quad.len(),
            found: samples.len(),
        });
    }
    let n = features.dictionary_size();
    let mut b = Col::<c64>::zeros(n);
    for (m, (&s, &w)) in samples.iter().zip(quad.weights()).enumerate() {
        let ws = s * w;
        if ws == ZERO {
            continue;
        }
        for j in 0..n {
            b[j] += features.psi_x[(m, j)].conj() * ws;
        }
    }
    Ok(b)
}
