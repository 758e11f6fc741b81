//! Small dense complex matrix helpers on top of nalgebra.

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector2};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Vec2 = Vector2<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn commutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b - b * a
}

pub fn anticommutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b + b * a
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

pub fn to_dynamic<const N: usize>(m: &nalgebra::SMatrix<C64, N, N>) -> DMatrix<C64> {
    DMatrix::from_iterator(N, N, m.iter().copied())
}

pub fn mat4_from_dynamic(m: &DMatrix<C64>) -> Mat4 {
    assert_eq!(m.shape(), (4, 4));
    Mat4::from_iterator(m.iter().copied())
}

/// Eigenvalues of a Hermitian matrix in ascending order. The input is
/// symmetrised first so round-off asymmetry does not leak into the result.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn min_hermitian_eigenvalue(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Principal square root of a Hermitian positive semidefinite 2×2 matrix.
///
/// Eigenvalues in `(-tol, 0)` are clamped to zero; anything more negative is
/// returned as `Err(min_eigenvalue)`.
pub fn hermitian_sqrt2(m: &Mat2, tol: f64) -> std::result::Result<Mat2, f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err(min);
    }
    let sqrt_diag = Mat2::from_diagonal(&Vec2::new(
        C64::new(eig.eigenvalues[0].max(0.0).sqrt(), 0.0),
        C64::new(eig.eigenvalues[1].max(0.0).sqrt(), 0.0),
    ));
    let v = eig.eigenvectors;
    Ok(v * sqrt_diag * v.adjoint())
}

/// Partial trace over the second (output) factor of a `dim·dim` square matrix.
pub fn partial_trace_second(m: &DMatrix<C64>, dim_first: usize, dim_second: usize) -> DMatrix<C64> {
    assert_eq!(m.nrows(), dim_first * dim_second);
    DMatrix::from_fn(dim_first, dim_first, |i, j| {
        (0..dim_second)
            .map(|k| m[(i * dim_second + k, j * dim_second + k)])
            .sum()
    })
}

/// Partial trace over the first factor.
pub fn partial_trace_first(m: &DMatrix<C64>, dim_first: usize, dim_second: usize) -> DMatrix<C64> {
    assert_eq!(m.nrows(), dim_first * dim_second);
    DMatrix::from_fn(dim_second, dim_second, |i, j| {
        (0..dim_first)
            .map(|k| m[(k * dim_second + i, k * dim_second + j)])
            .sum()
    })
}
