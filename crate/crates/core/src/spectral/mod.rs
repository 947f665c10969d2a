//! Atomic spectral measures of observables under a Hermitian DMD operator.
//!
//! For an observable `f = Ψ f` with coefficient vector `f`, the approximate
//! spectral measure is `μ = Σ_j c_j δ_{λ_j}` with `c_j = |v_j* G f|²`, where
//! `(λ_j, v_j)` are the `G`-orthonormal eigenpairs from
//! [`crate::dmd::eigendecompose`].

pub mod probes;

use std::io::{Read, Write};

use faer::Col;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::dictionary::FeatureMatrices;
use crate::dmd::{weighted_moments, GramPair, KoopmanEig};
use crate::error::{HdmdError, Result};
use crate::quadrature::QuadratureRule;

/// Expansion coefficients `g_{N,M}` of an observable in the dictionary.
#[derive(Debug, Clone)]
pub struct ObservableCoefficients<'a> {
    coeffs: Col<c64>,
    gram: &'a GramPair,
}

impl<'a> ObservableCoefficients<'a> {
    /// Coefficients from the moment vector `b = Ψ_X* W s`: `G† b`.
    pub fn from_moments(moments: &Col<c64>, gram: &'a GramPair) -> Result<Self> {
        if moments.nrows() != gram.size() {
            return Err(HdmdError::DimensionMismatch {
                context: "moment vector",
                expected: gram.size(),
                found: moments.nrows(),
            });
        }
        let sol = gram.pinv_apply(moments.as_mat());
        Ok(Self {
            coeffs: sol.col(0).to_owned(),
            gram,
        })
    }

    /// Wraps coefficients that are already known (e.g. an eigenvector).
    pub fn from_coefficients(coeffs: Col<c64>, gram: &'a GramPair) -> Result<Self> {
        if coeffs.nrows() != gram.size() {
            return Err(HdmdError::DimensionMismatch {
                context: "coefficient vector",
                expected: gram.size(),
                found: coeffs.nrows(),
            });
        }
        Ok(Self { coeffs, gram })
    }

    pub fn coeffs(&self) -> &Col<c64> {
        &self.coeffs
    }

    pub fn gram(&self) -> &'a GramPair {
        self.gram
    }

    /// `f* G f`, the discrete `L²` norm squared.
    pub fn gram_norm_sq(&self) -> f64 {
        self.gram.inner(&self.coeffs, &self.coeffs).re
    }
}

/// Least-squares fit `(W^{1/2}Ψ_X)† W^{1/2} s`, computed as `G† Ψ_X* W s`
/// with the same spectral truncation as the DMD operators.
pub fn project_observable<'a>(
    samples: &[c64],
    features: &FeatureMatrices,
    quad: &QuadratureRule,
    gram: &'a GramPair,
) -> Result<ObservableCoefficients<'a>> {
    if features.dictionary_size() != gram.size() {
        return Err(HdmdError::GramMismatch);
    }
    let b = weighted_moments(features, quad, samples)?;
    ObservableCoefficients::from_moments(&b, gram)
}

/// A point mass `weight · δ_location`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(rename = "lambda")]
    pub location: f64,
    pub weight: f64,
    /// Set by [`cluster_atoms`] on atoms that matched no reference location.
    #[serde(skip)]
    pub unmatched: bool,
}

impl Atom {
    pub fn new(location: f64, weight: f64) -> Self {
        Self {
            location,
            weight,
            unmatched: false,
        }
    }
}

/// `μ = Σ c_j δ_{λ_j}` with atoms sorted by location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
    total_mass: f64,
}

impl AtomicMeasure {
    /// Sorts atoms by location (stable) and totals their weights.
    pub fn new(mut atoms: Vec<Atom>) -> Result<Self> {
        if let Some(a) = atoms.iter().find(|a| !(a.weight >= 0.0) || !a.location.is_finite()) {
            return Err(HdmdError::arg(
                "atoms",
                format!("atom at {} has weight {}", a.location, a.weight),
            ));
        }
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        let total_mass = atoms.iter().map(|a| a.weight).sum();
        Ok(Self { atoms, total_mass })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Total weight of atoms with `|λ − center| ≤ radius`.
    pub fn mass_near(&self, center: f64, radius: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| (a.location - center).abs() <= radius)
            .map(|a| a.weight)
            .sum()
    }

    /// Drops atoms lighter than `rel · total_mass`. Never applied implicitly.
    pub fn without_negligible(&self, rel: f64) -> AtomicMeasure {
        let cutoff = rel * self.total_mass;
        let kept = self.atoms.iter().copied().filter(|a| a.weight >= cutoff).collect();
        AtomicMeasure::new(kept).expect("filtered atoms remain valid")
    }

    /// CSV with header `lambda,weight`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["lambda", "weight"])?;
        for a in &self.atoms {
            wtr.write_record([format!("{:e}", a.location), format!("{:e}", a.weight)])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let rows = crate::io::read_real_rows(input)?;
        let atoms = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                if r.len() != 2 {
                    return Err(HdmdError::Parse {
                        line: i + 2,
                        message: "expected lambda,weight".into(),
                    });
                }
                Ok(Atom::new(r[0], r[1]))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms)
    }

    /// `{"atoms":[{"lambda":…,"weight":…}],"total_mass":…}`
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            atoms: Vec<Atom>,
        }
        let raw: Raw = serde_json::from_str(text)?;
        Self::new(raw.atoms)
    }
}

/// `c_j = |v_j* G f|²` at each eigenvalue `λ_j`.
pub fn spectral_measure(eig: &KoopmanEig<'_>, obs: &ObservableCoefficients<'_>) -> Result<AtomicMeasure> {
    if !std::ptr::eq(eig.gram(), obs.gram()) {
        return Err(HdmdError::GramMismatch);
    }
    let gf = eig.gram().g() * obs.coeffs();
    let v = eig.eigenvectors();
    let atoms = (0..eig.len())
        .map(|j| {
            let mut s = c64::new(0.0, 0.0);
            for i in 0..v.nrows() {
                s += v[(i, j)].conj() * gf[i];
            }
            Atom::new(eig.eigenvalues()[j], s.norm_sqr())
        })
        .collect();
    AtomicMeasure::new(atoms)
}

/// `∫ φ dμ = Σ_j c_j φ(λ_j)`.
pub fn integrate<F: Fn(f64) -> f64>(measure: &AtomicMeasure, test_fn: F) -> f64 {
    measure.atoms.iter().map(|a| a.weight * test_fn(a.location)).sum()
}

/// How a cluster of atoms is collapsed to one location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterCenter {
    /// `Σ c_j λ_j / Σ c_j`; falls back to the plain mean if the cluster has no weight.
    #[default]
    WeightedMean,
    Mean,
}

/// Merges atoms within `radius` of each reference location into one atom
/// carrying the summed weight. Atoms near no reference are kept and flagged
/// as unmatched. The total mass is carried over unchanged.
pub fn cluster_atoms(
    measure: &AtomicMeasure,
    reference_locations: &[f64],
    radius: f64,
    center: ClusterCenter,
) -> Result<AtomicMeasure> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(HdmdError::arg("radius", "must be positive"));
    }
    let mut refs = reference_locations.to_vec();
    refs.sort_by(f64::total_cmp);
    for w in refs.windows(2) {
        let gap = w[1] - w[0];
        if gap == 0.0 {
            return Err(HdmdError::arg("reference_locations", format!("{} is repeated", w[0])));
        }
        if radius >= 0.5 * gap {
            return Err(HdmdError::arg(
                "radius",
                format!("{radius} is not below half the reference gap {gap}"),
            ));
        }
    }

    let mut out = Vec::with_capacity(refs.len());
    let mut taken = vec![false; measure.atoms.len()];
    for &e in &refs {
        let members: Vec<usize> = (0..measure.atoms.len())
            .filter(|&j| (measure.atoms[j].location - e).abs() <= radius)
            .collect();
        if members.is_empty() {
            continue;
        }
        let weight: f64 = members.iter().map(|&j| measure.atoms[j].weight).sum();
        let mean = || members.iter().map(|&j| measure.atoms[j].location).sum::<f64>() / members.len() as f64;
        let location = match center {
            ClusterCenter::WeightedMean if weight > 0.0 => {
                members
                    .iter()
                    .map(|&j| measure.atoms[j].weight * measure.atoms[j].location)
                    .sum::<f64>()
                    / weight
            }
            _ => mean(),
        };
        for &j in &members {
            taken[j] = true;
        }
        out.push(Atom::new(location, weight));
    }
    for (j, a) in measure.atoms.iter().enumerate() {
        if !taken[j] {
            out.push(Atom {
                unmatched: true,
                ..*a
            });
        }
    }
    let mut clustered = AtomicMeasure::new(out)?;
    clustered.total_mass = measure.total_mass;
    Ok(clustered)
}
