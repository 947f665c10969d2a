use faer::{Mat, MatRef};
use num_complex::Complex64 as c64;

use crate::error::{HdmdError, Result};
use crate::linalg::ZERO;

/// Hermitian `M` minimizing `‖Y − XM‖_F` (Higham's symmetric Procrustes solution).
///
/// With the economy SVD `X = U Σ V*` and `C = U* Y V`, `M = V Υ V*` where
/// `Υ_ij = (σ_i c_ij + σ_j conj(c_ji)) / (σ_i² + σ_j²)`, and `Υ_ij = 0` when
/// both singular values vanish.
pub fn symmetric_procrustes(x: MatRef<'_, c64>, y: MatRef<'_, c64>) -> Result<Mat<c64>> {
    let (m, n) = (x.nrows(), x.ncols());
    if y.nrows() != m || y.ncols() != n {
        return Err(HdmdError::DimensionMismatch {
            context: "procrustes operands",
            expected: m * n,
            found: y.nrows() * y.ncols(),
        });
    }
    // Zero rows change neither the objective nor the minimizer; padding to
    // M >= N keeps the economy SVD's V square.
    let (x, y) = if m < n {
        let pad = |a: MatRef<'_, c64>| Mat::from_fn(n, n, |i, j| if i < m { a[(i, j)] } else { ZERO });
        (pad(x), pad(y))
    } else {
        (x.to_owned(), y.to_owned())
    };

    let svd = x
        .thin_svd()
        .map_err(|_| HdmdError::NoConvergence("singular value decomposition"))?;
    let u = svd.U();
    let v = svd.V();
    let sigma: Vec<f64> = svd.S().column_vector().iter().map(|s| s.re).collect();
    let c = u.adjoint() * (&y * v);

    let upsilon = Mat::from_fn(n, n, |i, j| {
        let (si, sj) = (sigma[i], sigma[j]);
        let den = si * si + sj * sj;
        if den == 0.0 {
            ZERO
        } else {
            (c[(i, j)] * si + c[(j, i)].conj() * sj) / den
        }
    });
    Ok(v * (&upsilon * v.adjoint()))
}
