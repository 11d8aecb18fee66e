//! Small dense Hermitian helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigen-decomposition of a Hermitian matrix (the lower triangle is used).
pub fn herm_eigen(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let h = hermitize(m);
    let eig = h.symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// `f(H)` for Hermitian `H`, applying `f` to each eigenvalue.
pub fn herm_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = herm_eigen(m);
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&x| Complex64::new(f(x), 0.0)));
    &vecs * CMatrix::from_diagonal(&d) * vecs.adjoint()
}

/// Inverse square root on the eigenspaces above `floor`, plus an orthonormal
/// basis (as columns) of the eigenspaces at or below it.
pub fn inv_sqrt_psd(m: &CMatrix, floor: f64) -> (CMatrix, CMatrix, usize) {
    let (vals, vecs) = herm_eigen(m);
    let n = vals.len();
    let kept = vals.iter().filter(|&&x| x > floor).count();
    let mut out = CMatrix::zeros(n, n);
    let mut dropped = CMatrix::zeros(n, n - kept);
    let mut c = 0;
    for (i, &x) in vals.iter().enumerate() {
        let v = vecs.column(i);
        if x > floor {
            out += (&v * v.adjoint()).scale(1.0 / x.sqrt());
        } else {
            dropped.set_column(c, &v);
            c += 1;
        }
    }
    (out, dropped, kept)
}

/// Operator (spectral) norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let g = m.adjoint() * m;
    let (vals, _) = herm_eigen(&g);
    vals.iter().fold(0.0f64, |a, &b| a.max(b)).max(0.0).sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}
