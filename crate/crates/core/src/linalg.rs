//! Small dense Hermitian helpers over `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::discfun::C64;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;

/// Eigenvalues of a Hermitian matrix in ascending order, with eigenvectors
/// as matching columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn lambda_max(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).last().copied().unwrap_or(0.0)
}

pub fn lambda_min(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Symmetrizes `(m + m*) / 2` to remove rounding asymmetry.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Solves `G x = b` for Hermitian positive definite `G`.
///
/// Falls back to a pseudo-inverse through the eigendecomposition when the
/// Cholesky factorization fails; errors only when `G` is numerically singular.
pub fn solve_hermitian_pd(g: &CMatrix, b: &[C64]) -> Result<Vec<C64>> {
    let rhs = DVector::from_column_slice(b);
    if let Some(chol) = g.clone().cholesky() {
        return Ok(chol.solve(&rhs).iter().copied().collect());
    }
    let (values, vectors) = hermitian_eigen(g);
    let top = values.last().copied().unwrap_or(0.0);
    let bottom = values.first().copied().unwrap_or(0.0);
    if top <= 0.0 || bottom <= 1e-15 * top {
        return Err(Error::IllConditioned(if top > 0.0 { bottom / top } else { 0.0 }));
    }
    log::warn!(
        "Cholesky failed; solving through eigendecomposition (ratio {:e})",
        bottom / top
    );
    let coords = vectors.adjoint() * rhs;
    let scaled = DVector::from_iterator(coords.len(), coords.iter().zip(&values).map(|(c, v)| c / *v));
    Ok((vectors * scaled).iter().copied().collect())
}
