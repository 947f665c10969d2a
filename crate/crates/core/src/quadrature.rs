//! Quadrature rules discretizing the `L²(Ω, ω)` inner product.
//!
//! A rule is a list of nodes with strictly positive weights. The weights are
//! always stored explicitly so that any rule (tensor trapezoid, equal-weight
//! Monte Carlo, or user supplied) flows through the same assembly code.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{HdmdError, Result};

/// A set of points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    coords: Vec<f64>,
    dim: usize,
}

impl Points {
    pub fn new(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(HdmdError::arg("dim", "must be positive"));
        }
        if coords.len() % dim != 0 {
            return Err(HdmdError::DimensionMismatch {
                context: "point coordinates",
                expected: dim * (coords.len() / dim + 1),
                found: coords.len(),
            });
        }
        Ok(Self { coords, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| HdmdError::arg("rows", "at least one point is required"))?;
        let mut coords = Vec::with_capacity(dim * rows.len());
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(HdmdError::DimensionMismatch {
                    context: "point rows",
                    expected: dim,
                    found: r.len(),
                });
            }
            coords.extend_from_slice(r);
        }
        Self::new(coords, dim)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn row(&self, m: usize) -> &[f64] {
        &self.coords[m * self.dim..(m + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    /// Copies the rows `start..start + len` into a new point set.
    pub fn slice(&self, start: usize, len: usize) -> Points {
        Points {
            coords: self.coords[start * self.dim..(start + len) * self.dim].to_vec(),
            dim: self.dim,
        }
    }
}

/// Axis-aligned box `[a₁,b₁] × … × [a_d,b_d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl AxisBox {
    /// Builds a box, rejecting empty or inverted axes.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Self::validated(lower, upper, false)
    }

    /// Like [`AxisBox::new`] but admits degenerate axes with `a_k == b_k`.
    /// Used for dictionary center boxes, where a single center per axis is legal.
    pub fn closed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Self::validated(lower, upper, true)
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    fn validated(lower: Vec<f64>, upper: Vec<f64>, allow_flat: bool) -> Result<Self> {
        if lower.is_empty() {
            return Err(HdmdError::InvalidDomain("box has no axes".into()));
        }
        if lower.len() != upper.len() {
            return Err(HdmdError::DimensionMismatch {
                context: "box bounds",
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (k, (&a, &b)) in lower.iter().zip(&upper).enumerate() {
            let ok = a.is_finite() && b.is_finite() && if allow_flat { b >= a } else { b > a };
            if !ok {
                return Err(HdmdError::InvalidDomain(format!(
                    "axis {k} has bounds [{a}, {b}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| b - a)
            .product()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&a, &b))| a <= x && x <= b)
    }
}

/// Nodes and strictly positive weights defining a discrete measure `ω_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Points,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(nodes: Points, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(HdmdError::arg("nodes", "a rule needs at least one node"));
        }
        if nodes.len() != weights.len() {
            return Err(HdmdError::DimensionMismatch {
                context: "quadrature weights",
                expected: nodes.len(),
                found: weights.len(),
            });
        }
        if let Some(m) = weights.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(HdmdError::arg(
                "weights",
                format!("weight {m} is {}, must be finite and positive", weights[m]),
            ));
        }
        Ok(Self { nodes, weights })
    }

    /// Tensor-product trapezoidal rule on a uniform grid.
    ///
    /// Nodes are ordered row-major with the last axis varying fastest.
    pub fn tensor_trapezoid(domain: &AxisBox, points_per_axis: &[usize]) -> Result<Self> {
        let d = domain.dim();
        if points_per_axis.len() != d {
            return Err(HdmdError::DimensionMismatch {
                context: "points per axis",
                expected: d,
                found: points_per_axis.len(),
            });
        }
        if let Some(&p) = points_per_axis.iter().find(|&&p| p < 2) {
            return Err(HdmdError::arg(
                "points_per_axis",
                format!("each axis needs at least 2 points, got {p}"),
            ));
        }

        let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..d)
            .map(|k| trapezoid_1d(domain.lower[k], domain.upper[k], points_per_axis[k]))
            .collect();

        let total: usize = points_per_axis.iter().product();
        let mut coords = Vec::with_capacity(total * d);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            let mut w = 1.0;
            for k in 0..d {
                coords.push(axes[k].0[idx[k]]);
                w *= axes[k].1[idx[k]];
            }
            weights.push(w);
            for k in (0..d).rev() {
                idx[k] += 1;
                if idx[k] < points_per_axis[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Self::new(Points::new(coords, d)?, weights)
    }

    /// Equal-weight rule `w_m = total_mass / M` for samples drawn from `ω`.
    pub fn monte_carlo(samples: Points, total_mass: f64) -> Result<Self> {
        if !(total_mass > 0.0 && total_mass.is_finite()) {
            return Err(HdmdError::arg("total_mass", "must be finite and positive"));
        }
        let m = samples.len();
        Self::new(samples, vec![total_mass / m as f64; m])
    }

    pub fn nodes(&self) -> &Points {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.nodes.dim()
    }

    /// `Σ w_m`, compensated sum in node order.
    pub fn total_weight(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }

    /// `Σ w_m f(x_m)`, compensated sum in node order.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        compensated_sum(self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)))
    }

    /// Parallel version of [`QuadratureRule::integrate`]. The reduction order
    /// depends on the thread pool, so results may differ from the sequential
    /// sum at roundoff level.
    pub fn integrate_par<F: Fn(&[f64]) -> f64 + Sync>(&self, f: F) -> f64 {
        self.weights
            .par_iter()
            .enumerate()
            .map(|(m, w)| w * f(self.nodes.row(m)))
            .sum()
    }

    /// Writes `x1,…,xd,w` with a one-line header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.dim()).map(|k| format!("x{k}")).collect();
        header.push("w".into());
        wtr.write_record(&header)?;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let rec: Vec<String> = x
                .iter()
                .chain(std::iter::once(w))
                .map(|v| format!("{v:e}"))
                .collect();
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let ncols = rdr.headers()?.len();
        if ncols < 2 {
            return Err(HdmdError::Parse {
                line: 1,
                message: "expected columns x1,…,xd,w".into(),
            });
        }
        let dim = ncols - 1;
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            for (k, field) in rec.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| HdmdError::Parse {
                    line,
                    message: format!("cannot parse `{field}` as a number"),
                })?;
                if k < dim {
                    coords.push(v);
                } else {
                    weights.push(v);
                }
            }
        }
        Self::new(Points::new(coords, dim)?, weights)
    }
}

/// Neumaier summation.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

fn trapezoid_1d(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = (b - a) / (n - 1) as f64;
    let nodes = (0..n)
        .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
        .collect();
    let weights = (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
        .collect();
    (nodes, weights)
}
