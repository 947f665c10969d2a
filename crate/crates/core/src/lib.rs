//! Hermitian dynamic mode decomposition of self-adjoint Koopman operators.
//!
//! The pipeline runs from a [`quadrature::QuadratureRule`] and a
//! [`dictionary::Dictionary`] to the Gram pair `(G, A)`, then to a Hermitian
//! DMD matrix, its `G`-orthonormal eigenpairs, and finally atomic spectral
//! measures of observables. [`schrodinger`] provides the 2-D harmonic
//! oscillator benchmark with closed-form snapshots and exact spectra, and
//! [`spectral::probes`] checks finite-section convergence on matrix proxies.

pub mod dictionary;
pub mod dmd;
mod error;
pub mod io;
pub mod linalg;
pub mod quadrature;
pub mod schrodinger;
pub mod spectral;

pub use error::{HdmdError, Result};

pub use dictionary::{evaluate_snapshots, Dictionary, FeatureMatrices, GaussianDictionary};
pub use dmd::{
    assemble_gram_pair, edmd, eigendecompose, hermitian_dmd, symmetric_procrustes, GramPair, KoopmanEig,
    weighted_moments, KoopmanKind, KoopmanMatrix,
};
pub use quadrature::{AxisBox, Points, QuadratureRule};
pub use spectral::{cluster_atoms, integrate, project_observable, spectral_measure, Atom, AtomicMeasure, ObservableCoefficients};

pub use faer::{set_global_parallelism, Col, Mat, MatRef, Par};
pub use num_complex::Complex64 as c64;

/// Relative cutoff on the eigenvalues of `G` below which directions are discarded.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-12;
