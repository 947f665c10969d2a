mod common;

use common::*;
use faer::linalg::solvers::Solve;
use hdmd::spectral::probes::{finite_spectral_measure, free_jacobi};
use hdmd::spectral::{cluster_atoms, ClusterCenter};
use hdmd::{
    assemble_gram_pair, c64, eigendecompose, hermitian_dmd, integrate, project_observable, spectral_measure, Atom,
    AtomicMeasure, Col, FeatureMatrices, GramPair, Mat, ObservableCoefficients, DEFAULT_RANK_TOLERANCE,
};
use proptest::prelude::*;

fn random_unitary(seed: u64, n: usize) -> Mat<c64> {
    let mut r = rng(seed);
    random_complex(&mut r, n, n).qr().compute_Q()
}

/// `G = I`, `A = U diag(d) U*`.
fn rotated_pair(seed: u64, d: &[f64]) -> (GramPair, Mat<c64>) {
    let n = d.len();
    let u = random_unitary(seed, n);
    let du = Mat::from_fn(n, n, |i, j| u[(i, j)] * d[j]);
    let a = du * u.adjoint();
    (GramPair::new(Mat::identity(n, n), a, DEFAULT_RANK_TOLERANCE).unwrap(), u)
}

fn col(v: &[c64]) -> Col<c64> {
    Col::from_fn(v.len(), |i| v[i])
}

#[test]
fn in_span_observable_is_recovered() {
    let mut r = rng(3);
    let (m, n) = (40, 6);
    let psi_x = random_complex(&mut r, m, n);
    let psi_y = random_complex(&mut r, m, n);
    let w = random_weights(&mut r, m);
    let coeffs = random_complex(&mut r, n, 1);
    let s = &psi_x * &coeffs;
    let samples: Vec<c64> = (0..m).map(|i| s[(i, 0)]).collect();
    let feats = FeatureMatrices::new(psi_x, psi_y).unwrap();
    let quad = rule_with_weights(&w);
    let pair = assemble_gram_pair(&feats, &quad).unwrap();
    let obs = project_observable(&samples, &feats, &quad, &pair).unwrap();
    let err: f64 = (0..n).map(|i| (obs.coeffs()[i] - coeffs[(i, 0)]).norm_sqr()).sum();
    assert!(err.sqrt() < 1e-12);
    // f*Gf is the weighted L² norm of the samples
    let direct: f64 = samples.iter().zip(&w).map(|(s, w)| w * s.norm_sqr()).sum();
    assert!((obs.gram_norm_sq() - direct).abs() < 1e-12 * direct);
}

#[test]
fn degenerate_eigenspace_mass_is_rotation_invariant() {
    let d = [1.0, 1.0, 2.0, 3.0, 3.0, 3.0];
    let f: Vec<c64> = (0..6).map(|i| c64::new(0.3 * i as f64 - 0.5, 0.1 * (i * i) as f64)).collect();
    for seed in 0..5 {
        let (pair, u) = rotated_pair(seed, &d);
        let k = hermitian_dmd(&pair);
        let eig = eigendecompose(&k).unwrap();
        let obs = ObservableCoefficients::from_coefficients(col(&f), &pair).unwrap();
        let mu = spectral_measure(&eig, &obs).unwrap();
        // oracle: |U* f|² summed over each eigenvalue's columns
        let uf = u.adjoint() * col(&f);
        for level in [1.0, 2.0, 3.0] {
            let want: f64 = (0..6).filter(|&j| d[j] == level).map(|j| uf[j].norm_sqr()).sum();
            let got = mu.mass_near(level, 0.1);
            assert!((got - want).abs() < 1e-12, "seed {seed} level {level}: {got} vs {want}");
        }
    }
}

#[test]
fn eigenvector_observable_is_a_unit_atom() {
    let mut r = rng(5);
    let (m, n) = (30, 5);
    let psi_x = random_complex(&mut r, m, n);
    let psi_y = random_complex(&mut r, m, n);
    let w = random_weights(&mut r, m);
    let feats = FeatureMatrices::new(psi_x, psi_y).unwrap();
    let pair = assemble_gram_pair(&feats, &rule_with_weights(&w)).unwrap();
    let k = hermitian_dmd(&pair);
    let eig = eigendecompose(&k).unwrap();
    for j in 0..n {
        let v = eig.eigenvectors().col(j).to_owned();
        let obs = ObservableCoefficients::from_coefficients(v, &pair).unwrap();
        let mu = spectral_measure(&eig, &obs).unwrap();
        let lam = eig.eigenvalues()[j];
        for a in mu.atoms() {
            if a.location == lam {
                assert!((a.weight - 1.0).abs() < 1e-10);
            } else {
                assert!(a.weight < 1e-10);
            }
        }
    }
}

/// `⟨(L − i)^{-1} e₁, e₁⟩` by a dense LU solve.
fn resolvent_form(l: &Mat<c64>) -> c64 {
    let n = l.nrows();
    let shifted = Mat::from_fn(n, n, |i, j| l[(i, j)] - if i == j { c64::new(0.0, 1.0) } else { c64::new(0.0, 0.0) });
    let rhs = Mat::from_fn(n, 1, |i, _| if i == 0 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
    shifted.partial_piv_lu().solve(rhs)[(0, 0)]
}

#[test]
fn resolvent_integral_matches_dense_solve() {
    let n = 200;
    let l = free_jacobi(n);
    let truth = resolvent_form(&l);
    // semicircle Stieltjes transform at i is i(√5 − 1)/2
    assert!((truth - c64::new(0.0, (5f64.sqrt() - 1.0) / 2.0)).norm() < 1e-12);

    // through the DMD pipeline with Ψ_X = I, Ψ_Y = L, unit weights
    let feats = FeatureMatrices::new(Mat::identity(n, n), l.clone()).unwrap();
    let pair = assemble_gram_pair(&feats, &rule_with_weights(&vec![1.0; n])).unwrap();
    let k = hermitian_dmd(&pair);
    let eig = eigendecompose(&k).unwrap();
    let e1 = Col::from_fn(n, |i| if i == 0 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
    let obs = ObservableCoefficients::from_coefficients(e1, &pair).unwrap();
    let mu = spectral_measure(&eig, &obs).unwrap();
    let re = integrate(&mu, |x| x / (x * x + 1.0));
    let im = integrate(&mu, |x| 1.0 / (x * x + 1.0));
    assert!((re - truth.re).abs() < 1e-12);
    assert!((im - truth.im).abs() < 1e-12);

    let fin = finite_spectral_measure(l.as_ref(), &hdmd::spectral::probes::basis_vector(n, 0)).unwrap();
    let im2: f64 = fin.iter().map(|&(x, w)| w / (x * x + 1.0)).sum();
    assert!((im2 - truth.im).abs() < 1e-12);
}

#[test]
fn clustering_keeps_mass_and_flags_strays() {
    let mu = AtomicMeasure::new(vec![
        Atom::new(2.9, 1.0),
        Atom::new(3.1, 3.0),
        Atom::new(4.0, 0.5),
        Atom::new(5.05, 2.0),
    ])
    .unwrap();
    let c = cluster_atoms(&mu, &[3.0, 5.0], 0.4, ClusterCenter::WeightedMean).unwrap();
    assert_eq!(c.total_mass(), mu.total_mass());
    let atoms = c.atoms();
    assert_eq!(atoms.len(), 3);
    assert!((atoms[0].location - 3.05).abs() < 1e-12 && atoms[0].weight == 4.0);
    assert!(atoms[1].unmatched && atoms[1].location == 4.0);
    assert!(!atoms[2].unmatched && atoms[2].weight == 2.0);
    let plain = cluster_atoms(&mu, &[3.0, 5.0], 0.4, ClusterCenter::Mean).unwrap();
    assert!((plain.atoms()[0].location - 3.0).abs() < 1e-12);
    assert!(cluster_atoms(&mu, &[3.0, 3.5], 0.4, ClusterCenter::Mean).is_err());
}

#[test]
fn measure_serialization_round_trips() {
    let mu = AtomicMeasure::new(vec![Atom::new(1.0, 0.25), Atom::new(-0.5, 1e-17)]).unwrap();
    let mut buf = Vec::new();
    mu.write_csv(&mut buf).unwrap();
    let back = AtomicMeasure::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, mu);
    let json = mu.to_json().unwrap();
    assert!(json.contains("\"lambda\""));
    assert_eq!(AtomicMeasure::from_json(&json).unwrap(), mu);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mass_equals_gram_norm(seed in any::<u64>(), n in 1usize..=20, extra in 0usize..20) {
        let mut r = rng(seed);
        let m = n + extra + 1;
        let psi_x = random_complex(&mut r, m, n);
        let psi_y = random_complex(&mut r, m, n);
        let w = random_weights(&mut r, m);
        let s = random_complex(&mut r, m, 1);
        let samples: Vec<c64> = (0..m).map(|i| s[(i, 0)]).collect();
        let feats = FeatureMatrices::new(psi_x, psi_y).unwrap();
        let quad = rule_with_weights(&w);
        let pair = assemble_gram_pair(&feats, &quad).unwrap();
        let eig = eigendecompose(&hermitian_dmd(&pair)).unwrap();
        let obs = project_observable(&samples, &feats, &quad, &pair).unwrap();
        let mu = spectral_measure(&eig, &obs).unwrap();
        let want = obs.gram_norm_sq();
        prop_assert!((mu.total_mass() - want).abs() <= 1e-10 * want.max(1e-300));
    }
}
