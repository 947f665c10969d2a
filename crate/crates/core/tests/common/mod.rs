#![allow(dead_code)]

use hdmd::{c64, Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Mat<c64> {
    Mat::from_fn(m, n, |_, _| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Mat<c64> {
    let a = random_complex(rng, n, n);
    Mat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Well-conditioned random positive definite matrix `R*R + I`.
pub fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> Mat<c64> {
    let r = random_complex(rng, n + 2, n);
    let mut g = r.adjoint() * &r;
    for i in 0..n {
        g[(i, i)] += c64::new(1.0, 0.0);
    }
    Mat::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5)
}

pub fn fro(m: MatRef<'_, c64>) -> f64 {
    m.norm_l2()
}

pub fn diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    fro((a - b).as_ref())
}

/// `G^p` for Hermitian positive definite `G`, via its eigendecomposition.
pub fn hpd_power(g: MatRef<'_, c64>, p: f64) -> Mat<c64> {
    let evd = g.self_adjoint_eigen(faer::Side::Lower).unwrap();
    let u = evd.U();
    let s: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re.powf(p)).collect();
    let us = Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * s[j]);
    us * u.adjoint()
}

pub fn sqrt_diag(w: &[f64]) -> Mat<c64> {
    let n = w.len();
    Mat::from_fn(n, n, |i, j| if i == j { c64::new(w[i].sqrt(), 0.0) } else { c64::new(0.0, 0.0) })
}

/// `‖W^{1/2}(Ψ_Y − Ψ_X K) G^{-1/2}‖_F`.
pub fn hermitian_objective(
    psi_x: MatRef<'_, c64>,
    psi_y: MatRef<'_, c64>,
    w: &[f64],
    g_inv_sqrt: MatRef<'_, c64>,
    k: MatRef<'_, c64>,
) -> f64 {
    let r = psi_y - psi_x * k;
    let r = sqrt_diag(w) * r * g_inv_sqrt;
    fro(r.as_ref())
}

pub fn random_weights(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(0.1..2.0)).collect()
}

/// A quadrature rule on dummy 1-D nodes carrying the given weights.
pub fn rule_with_weights(w: &[f64]) -> hdmd::QuadratureRule {
    let pts = hdmd::Points::new((0..w.len()).map(|i| i as f64).collect(), 1).unwrap();
    hdmd::QuadratureRule::new(pts, w.to_vec()).unwrap()
}

pub fn scale(m: &Mat<c64>, s: f64) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}
