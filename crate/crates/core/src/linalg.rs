//! Dense numerical kernels shared by the entropy and trace-distance code.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Max elementwise `|M - M†|`.
pub fn hermiticity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in j..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(M + M†)/2`.
pub fn hermitize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

pub fn trace(m: &DMatrix<Complex64>) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Eigenvalues of a Hermitian matrix, nondecreasing. Only the lower triangle is read.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let n = m.nrows();
    let a = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| {
        let z = m[(i, j)];
        faer::c64::new(z.re, z.im)
    });
    a.self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigensolver did not converge: {e:?}")))
}

/// `Σ |λ|` over the eigenvalues of a Hermitian matrix.
pub fn hermitian_trace_norm(m: &DMatrix<Complex64>) -> Result<f64> {
    let ev = hermitian_eigenvalues(m)?;
    Ok(pairwise_sum(&ev.iter().map(|x| x.abs()).collect::<Vec<_>>()))
}

/// Singular values, nonincreasing.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Fixed-shape tree summation; the result does not depend on how the
/// terms were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
