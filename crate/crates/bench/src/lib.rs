//! Shared fixtures for the benchmarks.

use hdmd::schrodinger::{assemble_streaming, reference_observable, GaussianGridSpec, HarmonicOscillatorProblem};
use hdmd::{c64, Col, GramPair, Mat, DEFAULT_RANK_TOLERANCE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The benchmark problem with `per_axis²` Gaussians.
pub fn problem(per_axis: usize) -> HarmonicOscillatorProblem {
    HarmonicOscillatorProblem {
        dictionary: GaussianGridSpec {
            per_axis,
            ..GaussianGridSpec::default()
        },
        ..HarmonicOscillatorProblem::default()
    }
}

/// Gram pair and observable moments on a `grid²` trapezoid rule.
pub fn assembled(grid: usize, per_axis: usize) -> (GramPair, Col<c64>) {
    let p = problem(per_axis);
    let quad = p.grid(grid).expect("valid grid");
    let f = |x: &[f64]| reference_observable([x[0], x[1]]);
    let (pair, mut moments) = assemble_streaming(&p, &quad, &[&f], 4096, DEFAULT_RANK_TOLERANCE).expect("assembles");
    (pair, moments.remove(0))
}

pub fn random_complex(seed: u64, m: usize, n: usize) -> Mat<c64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Mat::from_fn(m, n, |_, _| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}
