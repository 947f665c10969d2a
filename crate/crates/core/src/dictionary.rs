//! Dictionaries of observables and the feature matrices `Ψ_X`, `Ψ_Y`.

use std::io::Write;

use faer::Mat;
use num_complex::Complex64 as c64;
use rayon::prelude::*;

use crate::error::{HdmdError, Result};
use crate::quadrature::{AxisBox, Points};
use crate::DEFAULT_RANK_TOLERANCE;

/// A finite family `ψ_1,…,ψ_N` evaluated pointwise.
///
/// Implementations must be deterministic: the same point always yields a
/// bitwise-identical row.
pub trait Dictionary: Send + Sync {
    /// Number of observables `N`.
    fn size(&self) -> usize;

    /// Dimension `d` of the state space the observables are defined on.
    fn domain_dim(&self) -> usize;

    /// Writes `Ψ(x)` into `row`, which has length `size()`.
    fn eval_into(&self, x: &[f64], row: &mut [c64]);

    fn eval(&self, x: &[f64]) -> Vec<c64> {
        let mut row = vec![c64::new(0.0, 0.0); self.size()];
        self.eval_into(x, &mut row);
        row
    }
}

/// Isotropic Gaussians `ψ(x) = c·exp(-a|x - center|²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDictionary {
    centers: Points,
    width: f64,
    amplitude: c64,
}

impl GaussianDictionary {
    pub fn new(centers: Points, width: f64, amplitude: c64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(HdmdError::arg("width", format!("must be positive, got {width}")));
        }
        if centers.is_empty() {
            return Err(HdmdError::arg("centers", "dictionary needs at least one center"));
        }
        Ok(Self {
            centers,
            width,
            amplitude,
        })
    }

    /// `per_axis^d` Gaussians on a uniform grid over `centers_box`, endpoints
    /// included. With one center per axis the center sits at the lower corner.
    /// Centers are ordered row-major, last axis fastest.
    pub fn grid(centers_box: &AxisBox, per_axis: usize, width: f64, amplitude: c64) -> Result<Self> {
        if per_axis == 0 {
            return Err(HdmdError::arg("per_axis", "must be at least 1"));
        }
        let d = centers_box.dim();
        let axis = |k: usize| -> Vec<f64> {
            let (a, b) = (centers_box.lower()[k], centers_box.upper()[k]);
            if per_axis == 1 {
                return vec![a];
            }
            let h = (b - a) / (per_axis - 1) as f64;
            (0..per_axis)
                .map(|i| if i == per_axis - 1 { b } else { a + h * i as f64 })
                .collect()
        };
        let axes: Vec<Vec<f64>> = (0..d).map(axis).collect();
        let total = per_axis.pow(d as u32);
        let mut coords = Vec::with_capacity(total * d);
        for flat in 0..total {
            let mut rem = flat;
            let mut idx = vec![0usize; d];
            for k in (0..d).rev() {
                idx[k] = rem % per_axis;
                rem /= per_axis;
            }
            coords.extend(idx.iter().enumerate().map(|(k, &i)| axes[k][i]));
        }
        Self::new(Points::new(coords, d)?, width, amplitude)
    }

    pub fn centers(&self) -> &Points {
        &self.centers
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn amplitude(&self) -> c64 {
        self.amplitude
    }
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl Dictionary for GaussianDictionary {
    fn size(&self) -> usize {
        self.centers.len()
    }

    fn domain_dim(&self) -> usize {
        self.centers.dim()
    }

    fn eval_into(&self, x: &[f64], row: &mut [c64]) {
        for (out, center) in row.iter_mut().zip(self.centers.iter()) {
            *out = self.amplitude * (-self.width * squared_distance(x, center)).exp();
        }
    }
}

/// Dictionary backed by a closure, for linear/constant/test dictionaries.
pub struct FnDictionary<F> {
    size: usize,
    dim: usize,
    f: F,
}

impl<F> FnDictionary<F>
where
    F: Fn(&[f64], &mut [c64]) + Send + Sync,
{
    pub fn new(size: usize, dim: usize, f: F) -> Self {
        Self { size, dim, f }
    }
}

impl<F> Dictionary for FnDictionary<F>
where
    F: Fn(&[f64], &mut [c64]) + Send + Sync,
{
    fn size(&self) -> usize {
        self.size
    }

    fn domain_dim(&self) -> usize {
        self.dim
    }

    fn eval_into(&self, x: &[f64], row: &mut [c64]) {
        (self.f)(x, row)
    }
}

/// The constant observable `ψ ≡ 1`.
pub fn constant_dictionary(dim: usize) -> impl Dictionary {
    FnDictionary::new(1, dim, |_, row| row[0] = c64::new(1.0, 0.0))
}

/// Coordinate observables `ψ_k(x) = x_k` (classical DMD features).
pub fn linear_dictionary(dim: usize) -> impl Dictionary {
    FnDictionary::new(dim, dim, |x, row| {
        for (o, &v) in row.iter_mut().zip(x) {
            *o = c64::new(v, 0.0);
        }
    })
}

/// Dictionary evaluations at the snapshot inputs and outputs.
#[derive(Debug, Clone)]
pub struct FeatureMatrices {
    pub psi_x: Mat<c64>,
    pub psi_y: Mat<c64>,
    /// Relative eigenvalue cutoff applied to the Gram matrix built from these features.
    pub rank_tolerance: f64,
}

impl FeatureMatrices {
    pub fn new(psi_x: Mat<c64>, psi_y: Mat<c64>) -> Result<Self> {
        if psi_x.nrows() != psi_y.nrows() || psi_x.ncols() != psi_y.ncols() {
            return Err(HdmdError::DimensionMismatch {
                context: "feature matrices",
                expected: psi_x.nrows() * psi_x.ncols(),
                found: psi_y.nrows() * psi_y.ncols(),
            });
        }
        Ok(Self {
            psi_x,
            psi_y,
            rank_tolerance: DEFAULT_RANK_TOLERANCE,
        })
    }

    pub fn with_rank_tolerance(mut self, tol: f64) -> Self {
        self.rank_tolerance = tol;
        self
    }

    pub fn snapshots(&self) -> usize {
        self.psi_x.nrows()
    }

    pub fn dictionary_size(&self) -> usize {
        self.psi_x.ncols()
    }

    /// Debug export: one CSV per matrix, complex entries as re/im column pairs.
    pub fn write_csv<W1: Write, W2: Write>(&self, x_out: W1, y_out: W2) -> Result<()> {
        crate::io::write_matrix_csv(self.psi_x.as_ref(), x_out)?;
        crate::io::write_matrix_csv(self.psi_y.as_ref(), y_out)
    }
}

/// Evaluates `dict` at every point, one row per point.
///
/// Rows are filled in parallel; each row depends only on its own point, so
/// the result is independent of the thread count.
pub fn evaluate_rows<D: Dictionary + ?Sized>(dict: &D, points: &Points) -> Result<Mat<c64>> {
    if points.dim() != dict.domain_dim() {
        return Err(HdmdError::DimensionMismatch {
            context: "node dimension vs dictionary domain",
            expected: dict.domain_dim(),
            found: points.dim(),
        });
    }
    let n = dict.size();
    let m = points.len();
    let mut rows = vec![c64::new(0.0, 0.0); m * n];
    rows.par_chunks_mut(n.max(1))
        .enumerate()
        .for_each(|(i, row)| dict.eval_into(points.row(i), row));
    Ok(Mat::from_fn(m, n, |i, j| rows[i * n + j]))
}

/// `Ψ_X[m,:] = Ψ(x_m)` and `Ψ_Y[m,:] = Ψ(y_m)`.
pub fn evaluate_snapshots<D: Dictionary + ?Sized>(
    dict: &D,
    x_nodes: &Points,
    y_nodes: &Points,
) -> Result<FeatureMatrices> {
    if x_nodes.len() != y_nodes.len() {
        return Err(HdmdError::DimensionMismatch {
            context: "snapshot pairs",
            expected: x_nodes.len(),
            found: y_nodes.len(),
        });
    }
    FeatureMatrices::new(evaluate_rows(dict, x_nodes)?, evaluate_rows(dict, y_nodes)?)
}

/// The sample vector `(g(x_1), …, g(x_M))`.
pub fn evaluate_function_samples<G: Fn(&[f64]) -> c64>(points: &Points, g: G) -> Vec<c64> {
    points.iter().map(g).collect()
}
