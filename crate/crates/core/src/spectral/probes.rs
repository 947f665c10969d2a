//! Finite-section convergence diagnostics.
//!
//! A large Hermitian `reference` matrix `L` stands in for the operator. For
//! each truncation size `n`, `P_n` is the projection onto the first `n`
//! coordinates and `L_n = P_n L P_n*` the leading principal submatrix. The
//! probes compare resolvents, moments, and integrals of test functions
//! against the spectral measure of `v` between `L_n` and `L` itself.
//!
//! Every table also carries the reference's own resolution floor: the same
//! gap evaluated at `n_ref / 2`. Gaps below that floor cannot be told apart
//! from truncation of the truth proxy.

use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef};
use num_complex::Complex64 as c64;
use rayon::prelude::*;

use crate::error::{HdmdError, Result};
use crate::linalg::{hermitian_eigen, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub n: usize,
    pub key: String,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTable {
    pub rows: Vec<ProbeRow>,
    /// `(key, gap at n_ref / 2)`.
    pub resolution_floor: Vec<(String, f64)>,
    pub reference_size: usize,
}

impl ProbeTable {
    pub fn gaps(&self, key: &str) -> Vec<(usize, f64)> {
        self.rows.iter().filter(|r| r.key == key).map(|r| (r.n, r.gap)).collect()
    }

    pub fn gap(&self, n: usize, key: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n && r.key == key).map(|r| r.gap)
    }

    pub fn floor(&self, key: &str) -> Option<f64> {
        self.resolution_floor.iter().find(|(k, _)| k == key).map(|(_, g)| *g)
    }

    /// CSV `n,key,gap`. Floor rows use `n = n_ref / 2` and key `<key>:floor`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["n", "key", "gap"])?;
        for r in &self.rows {
            wtr.write_record([r.n.to_string(), r.key.clone(), format!("{:e}", r.gap)])?;
        }
        for (k, g) in &self.resolution_floor {
            wtr.write_record([
                (self.reference_size / 2).to_string(),
                format!("{k}:floor"),
                format!("{g:e}"),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// A named bounded continuous function on the real line.
pub struct TestFunction {
    pub name: String,
    pub f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl TestFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Box::new(f),
        }
    }
}

/// The free Jacobi matrix: zero diagonal, unit off-diagonals. Its spectral
/// measure at `e₁` is the semicircle law on `[-2, 2]`.
pub fn free_jacobi(n: usize) -> Mat<c64> {
    Mat::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { c64::new(1.0, 0.0) } else { ZERO })
}

pub fn diagonal_reference(diag: &[f64]) -> Mat<c64> {
    let n = diag.len();
    Mat::from_fn(n, n, |i, j| if i == j { c64::new(diag[i], 0.0) } else { ZERO })
}

/// Standard basis vector `e_k` of length `n`.
pub fn basis_vector(n: usize, k: usize) -> Vec<c64> {
    let mut v = vec![ZERO; n];
    v[k] = c64::new(1.0, 0.0);
    v
}

fn validate(reference: MatRef<'_, c64>, v: &[c64], sizes: &[usize]) -> Result<usize> {
    let n_ref = reference.nrows();
    if reference.ncols() != n_ref {
        return Err(HdmdError::DimensionMismatch {
            context: "reference matrix",
            expected: n_ref,
            found: reference.ncols(),
        });
    }
    if v.len() != n_ref {
        return Err(HdmdError::DimensionMismatch {
            context: "probe vector",
            expected: n_ref,
            found: v.len(),
        });
    }
    if n_ref < 2 {
        return Err(HdmdError::arg("reference", "needs at least 2 rows"));
    }
    if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HdmdError::arg("truncation_sizes", "must be positive and strictly increasing"));
    }
    if *sizes.last().unwrap() > n_ref {
        return Err(HdmdError::arg("truncation_sizes", format!("exceed reference size {n_ref}")));
    }
    Ok(n_ref)
}

fn section(reference: MatRef<'_, c64>, n: usize) -> MatRef<'_, c64> {
    reference.submatrix(0, 0, n, n)
}

fn column(v: &[c64]) -> Mat<c64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn shifted_solve(l: MatRef<'_, c64>, z: c64, rhs: &[c64]) -> Vec<c64> {
    let n = l.nrows();
    let shifted = Mat::from_fn(n, n, |i, j| if i == j { l[(i, j)] - z } else { l[(i, j)] });
    let x = shifted.partial_piv_lu().solve(column(rhs));
    (0..n).map(|i| x[(i, 0)]).collect()
}

/// `‖P_n*[P_n(L−z)P_n*]^{-1}P_n v − (L−z)^{-1}v‖₂` for each `n`.
pub fn resolvent_convergence_probe(
    reference: MatRef<'_, c64>,
    v: &[c64],
    z: c64,
    truncation_sizes: &[usize],
) -> Result<ProbeTable> {
    let n_ref = validate(reference, v, truncation_sizes)?;
    if z.im == 0.0 {
        return Err(HdmdError::arg("z", "must have nonzero imaginary part"));
    }
    let truth = shifted_solve(reference, z, v);
    let error_at = |n: usize| -> f64 {
        let x = shifted_solve(section(reference, n), z, &v[..n]);
        let inside: f64 = x.iter().zip(&truth).map(|(a, b)| (a - b).norm_sqr()).sum();
        let outside: f64 = truth[n..].iter().map(|b| b.norm_sqr()).sum();
        (inside + outside).sqrt()
    };
    let rows = truncation_sizes
        .par_iter()
        .map(|&n| ProbeRow {
            n,
            key: "resolvent".into(),
            gap: error_at(n),
        })
        .collect();
    Ok(ProbeTable {
        rows,
        resolution_floor: vec![("resolvent".into(), error_at(n_ref / 2))],
        reference_size: n_ref,
    })
}

/// `⟨L^k v, v⟩` for `k = 0..=k_max`.
fn moments(l: MatRef<'_, c64>, v: &[c64], k_max: usize) -> Vec<c64> {
    let vcol = column(v);
    let mut w = vcol.clone();
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        if k > 0 {
            w = l * &w;
        }
        out.push((0..v.len()).map(|i| vcol[(i, 0)].conj() * w[(i, 0)]).sum());
    }
    out
}

/// `|⟨L_n^k P_n v, P_n v⟩ − ⟨L^k v, v⟩|` for each `n` and `k ≤ k_max`, keyed `k=<k>`.
pub fn moment_convergence_probe(
    reference: MatRef<'_, c64>,
    v: &[c64],
    max_moment: usize,
    truncation_sizes: &[usize],
) -> Result<ProbeTable> {
    let n_ref = validate(reference, v, truncation_sizes)?;
    let truth = moments(reference, v, max_moment);
    let gaps_at = |n: usize| -> Vec<f64> {
        moments(section(reference, n), &v[..n], max_moment)
            .iter()
            .zip(&truth)
            .map(|(a, b)| (a - b).norm())
            .collect()
    };
    let per_size: Vec<Vec<f64>> = truncation_sizes.par_iter().map(|&n| gaps_at(n)).collect();
    let rows = truncation_sizes
        .iter()
        .zip(&per_size)
        .flat_map(|(&n, gaps)| {
            gaps.iter().enumerate().map(move |(k, &gap)| ProbeRow {
                n,
                key: format!("k={k}"),
                gap,
            })
        })
        .collect();
    let floor = gaps_at(n_ref / 2)
        .into_iter()
        .enumerate()
        .map(|(k, g)| (format!("k={k}"), g))
        .collect();
    Ok(ProbeTable {
        rows,
        resolution_floor: floor,
        reference_size: n_ref,
    })
}

/// Eigenvalues of `l` and the weights `|u_j* v|²` of `v` on each eigenvector.
pub fn finite_spectral_measure(l: MatRef<'_, c64>, v: &[c64]) -> Result<Vec<(f64, f64)>> {
    let (values, u) = hermitian_eigen(l)?;
    Ok(values
        .iter()
        .enumerate()
        .map(|(j, &lam)| {
            let dot: c64 = (0..v.len()).map(|i| u[(i, j)].conj() * v[i]).sum();
            (lam, dot.norm_sqr())
        })
        .collect())
}

/// `|∫φ dμ_{v,n} − ∫φ dμ_v|` for each `n` and each test function.
pub fn weak_convergence_probe(
    reference: MatRef<'_, c64>,
    v: &[c64],
    test_fns: &[TestFunction],
    truncation_sizes: &[usize],
) -> Result<ProbeTable> {
    let n_ref = validate(reference, v, truncation_sizes)?;
    let integrals = |mu: &[(f64, f64)]| -> Vec<f64> {
        test_fns
            .iter()
            .map(|t| mu.iter().map(|&(l, w)| w * (t.f)(l)).sum())
            .collect()
    };
    let truth = integrals(&finite_spectral_measure(reference, v)?);
    let gaps_at = |n: usize| -> Result<Vec<f64>> {
        let mu = finite_spectral_measure(section(reference, n), &v[..n])?;
        Ok(integrals(&mu).iter().zip(&truth).map(|(a, b)| (a - b).abs()).collect())
    };
    let per_size: Vec<Vec<f64>> = truncation_sizes
        .par_iter()
        .map(|&n| gaps_at(n))
        .collect::<Result<_>>()?;
    let rows = truncation_sizes
        .iter()
        .zip(&per_size)
        .flat_map(|(&n, gaps)| {
            gaps.iter().zip(test_fns).map(move |(&gap, t)| ProbeRow {
                n,
                key: t.name.clone(),
                gap,
            })
        })
        .collect();
    let floor = gaps_at(n_ref / 2)?
        .into_iter()
        .zip(test_fns)
        .map(|(g, t)| (t.name.clone(), g))
        .collect();
    Ok(ProbeTable {
        rows,
        resolution_floor: floor,
        reference_size: n_ref,
    })
}

/// `e_{i+1} ≤ (1 + slack)·e_i + floor` for consecutive entries.
pub fn nonincreasing_within(gaps: &[f64], slack: f64, floor: f64) -> bool {
    gaps.windows(2).all(|w| w[1] <= (1.0 + slack) * w[0] + floor)
}
