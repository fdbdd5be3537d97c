//! Dense Hermitian eigensolver helpers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::C64;

/// Eigen-decomposition of a Hermitian matrix: `(eigenvalues, eigenvectors)`
/// with eigenvectors as columns.
pub fn eigh(h: &DMatrix<C64>) -> (DVector<f64>, DMatrix<C64>) {
    // Symmetrise so round-off asymmetry does not leak into the solver.
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    (eig.eigenvalues, eig.eigenvectors)
}

/// exp(−i·angle·h) for Hermitian `h`, from precomputed eigenpairs.
pub fn exp_from_eigen(values: &DVector<f64>, vectors: &DMatrix<C64>, angle: f64) -> DMatrix<C64> {
    let phases = DVector::from_iterator(values.len(), values.iter().map(|&e| C64::new(0.0, -angle * e).exp()));
    let mut scaled = vectors.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    scaled * vectors.adjoint()
}

/// exp(−i·angle·h) for Hermitian `h`.
pub fn expm_hermitian(h: &DMatrix<C64>, angle: f64) -> DMatrix<C64> {
    let (values, vectors) = eigh(h);
    exp_from_eigen(&values, &vectors, angle)
}

/// Max |m†m − 1| entrywise.
pub fn unitarity_error(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let prod = m.adjoint() * m;
    (prod - DMatrix::<C64>::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_y_rotation() {
        // exp(−iθσ_y) = cosθ − i sinθ σ_y
        let sy = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)]);
        let theta = 0.37;
        let u = expm_hermitian(&sy, theta);
        let expect = DMatrix::<C64>::identity(2, 2) * C64::new(theta.cos(), 0.0) - &sy * C64::new(0.0, theta.sin());
        assert!((u - expect).norm() < 1e-14);
    }
}
