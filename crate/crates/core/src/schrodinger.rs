//! The 2-D harmonic oscillator `Ĥ = −½Δ + ½(x² + y²)` on `(−5, 5)²`.
//!
//! Snapshot pairs are `(u, Ĥu)` for Gaussian bumps `u`, with `Ĥu` evaluated in
//! closed form, so no time stepping is involved. Exact eigenpairs are
//! `φ_{m,n} = H_m(x) H_n(y) e^{−(x²+y²)/2}` with energy `m + n + 1`
//! (physicists' Hermite polynomials).

use faer::linalg::matmul::matmul;
use faer::{get_global_parallelism, Accum, Col, Mat};
use num_complex::Complex64 as c64;

use crate::dictionary::{evaluate_rows, squared_distance, Dictionary, FeatureMatrices, GaussianDictionary};
use crate::dmd::{GramAccumulator, GramPair};
use crate::error::{HdmdError, Result};
use crate::quadrature::{AxisBox, Points, QuadratureRule};
use crate::spectral::{Atom, AtomicMeasure};

/// Layout of the Gaussian dictionary: `per_axis²` centers on a closed square.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianGridSpec {
    pub centers_lower: f64,
    pub centers_upper: f64,
    pub per_axis: usize,
    pub width: f64,
    pub amplitude: c64,
}

impl Default for GaussianGridSpec {
    fn default() -> Self {
        Self {
            centers_lower: -4.0,
            centers_upper: 4.0,
            per_axis: 20,
            width: 3.0,
            amplitude: c64::new(1.0, 1.0),
        }
    }
}

impl GaussianGridSpec {
    pub fn build(&self) -> Result<GaussianDictionary> {
        let b = AxisBox::closed(vec![self.centers_lower; 2], vec![self.centers_upper; 2])?;
        GaussianDictionary::grid(&b, self.per_axis, self.width, self.amplitude)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicOscillatorProblem {
    pub domain: AxisBox,
    pub dictionary: GaussianGridSpec,
}

impl Default for HarmonicOscillatorProblem {
    fn default() -> Self {
        Self {
            domain: AxisBox::cube(-5.0, 5.0, 2).expect("static box"),
            dictionary: GaussianGridSpec::default(),
        }
    }
}

impl HarmonicOscillatorProblem {
    pub fn potential(p: &[f64]) -> f64 {
        0.5 * (p[0] * p[0] + p[1] * p[1])
    }

    /// Tensor trapezoid rule on the domain with `points` nodes per axis.
    pub fn grid(&self, points: usize) -> Result<QuadratureRule> {
        QuadratureRule::tensor_trapezoid(&self.domain, &[points, points])
    }
}

/// `Ĥu(p)` for `u = c·e^{−a r²}`, `r² = |p − center|²`:
/// `u(p)·(2a − 2a²r² + ½|p|²)`.
pub fn apply_hamiltonian_gaussian(center: [f64; 2], width: f64, amplitude: c64, p: [f64; 2]) -> c64 {
    hamiltonian_gaussian(&center, width, amplitude, &p)
}

#[inline]
fn hamiltonian_gaussian(center: &[f64], a: f64, c: c64, p: &[f64]) -> c64 {
    let r2 = squared_distance(p, center);
    c * ((-a * r2).exp() * (2.0 * a - 2.0 * a * a * r2 + HarmonicOscillatorProblem::potential(p)))
}

/// The family `Ĥψ_1, …, Ĥψ_N` viewed as a dictionary, so `Ψ_Y` can be
/// evaluated with the same row machinery as `Ψ_X`.
struct HamiltonianImage<'a>(&'a GaussianDictionary);

impl Dictionary for HamiltonianImage<'_> {
    fn size(&self) -> usize {
        self.0.size()
    }

    fn domain_dim(&self) -> usize {
        2
    }

    fn eval_into(&self, x: &[f64], row: &mut [c64]) {
        let (a, c) = (self.0.width(), self.0.amplitude());
        for (out, center) in row.iter_mut().zip(self.0.centers().iter()) {
            *out = hamiltonian_gaussian(center, a, c, x);
        }
    }
}

fn check_nodes(problem: &HarmonicOscillatorProblem, nodes: &Points) -> Result<()> {
    if nodes.dim() != 2 {
        return Err(HdmdError::DimensionMismatch {
            context: "benchmark nodes",
            expected: 2,
            found: nodes.dim(),
        });
    }
    if let Some(p) = nodes.iter().find(|p| !problem.domain.contains(p)) {
        return Err(HdmdError::InvalidDomain(format!("node {p:?} lies outside the domain")));
    }
    Ok(())
}

/// `Ψ_X` holds the Gaussians at the nodes, `Ψ_Y` holds `Ĥ` applied to each
/// Gaussian at the same nodes (since `i∂_t u = Ĥu`).
pub fn generate_snapshots(problem: &HarmonicOscillatorProblem, quad: &QuadratureRule) -> Result<FeatureMatrices> {
    check_nodes(problem, quad.nodes())?;
    let dict = problem.dictionary.build()?;
    FeatureMatrices::new(
        evaluate_rows(&dict, quad.nodes())?,
        evaluate_rows(&HamiltonianImage(&dict), quad.nodes())?,
    )
}

/// Assembles `(G, A)` and the moment vectors `Ψ_X* W f` of the given
/// observables block by block, without materializing the `M × N` features.
pub fn assemble_streaming(
    problem: &HarmonicOscillatorProblem,
    quad: &QuadratureRule,
    observables: &[&(dyn Fn(&[f64]) -> f64 + Sync)],
    block_rows: usize,
    rank_tolerance: f64,
) -> Result<(GramPair, Vec<Col<c64>>)> {
    check_nodes(problem, quad.nodes())?;
    let dict = problem.dictionary.build()?;
    let image = HamiltonianImage(&dict);
    let block_rows = block_rows.max(1);
    let mut acc = GramAccumulator::new(dict.size(), observables.len());
    let mut start = 0;
    while start < quad.len() {
        let len = block_rows.min(quad.len() - start);
        let pts = quad.nodes().slice(start, len);
        let px = evaluate_rows(&dict, &pts)?;
        let py = evaluate_rows(&image, &pts)?;
        let samples = Mat::from_fn(len, observables.len(), |i, k| c64::new(observables[k](pts.row(i)), 0.0));
        acc.add_block(
            px.as_ref(),
            py.as_ref(),
            &quad.weights()[start..start + len],
            Some(samples.as_ref()),
        )?;
        start += len;
    }
    let (pair, moments) = acc.finish(rank_tolerance)?;
    let cols = (0..moments.ncols()).map(|k| moments.col(k).to_owned()).collect();
    Ok((pair, cols))
}

/// Physicists' Hermite polynomial via `H_{m+1} = 2x H_m − 2m H_{m−1}`.
pub fn hermite_polynomial(m: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if m == 0 {
        return prev;
    }
    for k in 1..m {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `L²(R)`-normalized Hermite function `H_m(x) e^{−x²/2} / √(2^m m! √π)`.
pub fn hermite_function(m: usize, x: f64) -> f64 {
    let norm = (2f64.powi(m as i32) * factorial(m) * std::f64::consts::PI.sqrt()).sqrt();
    hermite_polynomial(m, x) * (-0.5 * x * x).exp() / norm
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactEigenpair {
    pub m: usize,
    pub n: usize,
    pub energy: f64,
}

impl ExactEigenpair {
    pub fn new(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            energy: (m + n + 1) as f64,
        }
    }

    /// `H_m(x) H_n(y) e^{−(x²+y²)/2}`, unnormalized.
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        hermite_polynomial(self.m, p[0])
            * hermite_polynomial(self.n, p[1])
            * (-0.5 * (p[0] * p[0] + p[1] * p[1])).exp()
    }

    /// `(2^{m+n} m! n! π)^{−1/2}`.
    pub fn normalization(&self) -> f64 {
        1.0 / (2f64.powi((self.m + self.n) as i32) * factorial(self.m) * factorial(self.n) * std::f64::consts::PI)
            .sqrt()
    }

    pub fn eval_normalized(&self, p: [f64; 2]) -> f64 {
        self.eval(p) * self.normalization()
    }
}

/// All `(m, n)` with `m + n + 1 ≤ max_energy`, by energy then `(m, n)`.
pub fn exact_spectrum(max_energy: usize) -> Vec<ExactEigenpair> {
    let mut out = Vec::new();
    for e in 1..=max_energy {
        for m in 0..e {
            out.push(ExactEigenpair::new(m, e - 1 - m));
        }
    }
    out
}

/// The benchmark observable `f(x, y) = sin(πx/5) sin(πy/5)`.
pub fn reference_observable(p: [f64; 2]) -> f64 {
    let k = std::f64::consts::PI / 5.0;
    (k * p[0]).sin() * (k * p[1]).sin()
}

/// Weight of `observable` on each energy level `E ≤ max_energy`:
/// `Σ_{m+n+1=E} |⟨f, φ̂_{m,n}⟩|²`, with inner products taken by a
/// `quad_resolution²` tensor trapezoid rule on the domain.
///
/// The eigenfunctions factor as `ĥ_m(x) ĥ_n(y)`, so the full table of 2-D
/// quadrature sums is `H_xᵀ (W F W) H_y` with `F_ij = f(x_i, y_j)`.
pub fn exact_spike_weights(
    problem: &HarmonicOscillatorProblem,
    max_energy: usize,
    observable: &dyn Fn([f64; 2]) -> f64,
    quad_resolution: usize,
) -> Result<AtomicMeasure> {
    if max_energy == 0 {
        return Err(HdmdError::arg("max_energy", "must be at least 1"));
    }
    if quad_resolution < 2 {
        return Err(HdmdError::arg("quad_resolution", "must be at least 2"));
    }
    let axis = |k: usize| -> Result<(Vec<f64>, Vec<f64>)> {
        let b = AxisBox::new(vec![problem.domain.lower()[k]], vec![problem.domain.upper()[k]])?;
        let q = QuadratureRule::tensor_trapezoid(&b, &[quad_resolution])?;
        Ok((q.nodes().as_slice().to_vec(), q.weights().to_vec()))
    };
    let (xs, wx) = axis(0)?;
    let (ys, wy) = axis(1)?;
    let r = quad_resolution;
    let f = Mat::from_fn(r, r, |i, j| wx[i] * wy[j] * observable([xs[i], ys[j]]));
    let hx = Mat::from_fn(r, max_energy, |i, m| hermite_function(m, xs[i]));
    let hy = Mat::from_fn(r, max_energy, |j, n| hermite_function(n, ys[j]));

    let par = get_global_parallelism();
    let mut fh = Mat::<f64>::zeros(r, max_energy);
    matmul(&mut fh, Accum::Replace, &f, &hy, 1.0, par);
    let mut s = Mat::<f64>::zeros(max_energy, max_energy);
    matmul(&mut s, Accum::Replace, hx.transpose(), &fh, 1.0, par);

    let atoms = (1..=max_energy)
        .map(|e| {
            let w = (0..e).map(|m| s[(m, e - 1 - m)].powi(2)).sum();
            Atom::new(e as f64, w)
        })
        .collect();
    AtomicMeasure::new(atoms)
}
