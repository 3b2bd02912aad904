//! Hermitian eigendecomposition, PSD tests and the real embedding the
//! solver sees.

use nalgebra::DMatrix;
use num_complex::Complex64;
use secure_dfrc::linalg::{hermitian_eig, is_psd, real_embed, reconstruction_residual, HermitianMatrix};

fn main() -> secure_dfrc::Result<()> {
    let c = |re, im| Complex64::new(re, im);
    let a = HermitianMatrix::new(DMatrix::from_row_slice(
        3,
        3,
        &[c(2.0, 0.0), c(0.5, -1.0), c(0.0, 0.3), c(0.5, 1.0), c(1.0, 0.0), c(-0.2, 0.0), c(0.0, -0.3), c(-0.2, 0.0), c(0.5, 0.0)],
    ))?;
    let eig = hermitian_eig(&a)?;
    println!("eigenvalues (descending): {:?}", eig.values.as_slice());
    println!("reconstruction residual: {:.2e}", reconstruction_residual(&a, &eig));
    println!("PSD at tol 1e-8: {}", is_psd(&a, 1e-8)?);

    // [[0, -j], [j, 0]] has eigenvalues ±1; its embedding doubles each.
    let y = HermitianMatrix::new(DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]))?;
    let emb = real_embed(&y);
    let spec = emb.as_matrix().clone().symmetric_eigenvalues();
    println!("embedding of the Pauli-Y matrix ({}x{}): eigenvalues {:?}", emb.dim(), emb.dim(), spec.as_slice());
    Ok(())
}
