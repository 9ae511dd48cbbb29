//! Dense complex linear algebra on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::frobenius;

pub type CMatrix = DMatrix<Complex64>;

/// Condition number (1-norm) above which a resolvent is refused.
pub const SINGULAR_CONDITION: f64 = 1e14;

pub fn norm1(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest singular value.
pub fn norm2(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Ratio of extreme singular values.
pub fn condition2(m: &CMatrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

fn shifted(h: &CMatrix, z: Complex64) -> CMatrix {
    let mut a = -h.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += z;
    }
    a
}

/// `(zI - H)^{-1}` by pivoted LU without a conditioning check.
pub(crate) fn resolvent_unchecked(h: &CMatrix, z: Complex64) -> Option<CMatrix> {
    shifted(h, z).lu().try_inverse()
}

/// `(zI - H)^{-1}` by pivoted LU. Fails when the 1-norm condition number of
/// `zI - H` exceeds [`SINGULAR_CONDITION`].
pub fn resolvent(h: &CMatrix, z: Complex64) -> Result<CMatrix> {
    let a = shifted(h, z);
    let singular = |condition| Error::Singular {
        re: z.re,
        im: z.im,
        condition,
    };
    let inv = a.clone().lu().try_inverse().ok_or(singular(f64::INFINITY))?;
    let condition = norm1(&a) * norm1(&inv);
    if !(condition <= SINGULAR_CONDITION) {
        return Err(singular(condition));
    }
    Ok(inv)
}

/// `|| (zI - H) R - I ||_F`.
pub fn resolvent_residual(h: &CMatrix, z: Complex64, r: &CMatrix) -> f64 {
    let n = h.nrows();
    frobenius(&(shifted(h, z) * r - CMatrix::identity(n, n)))
}

/// Eigenvalues and a unit-column eigenvector basis from the complex Schur
/// form `H = Q T Q*`, with eigenvectors of `T` by back substitution.
pub fn eigen_decomposition(h: &CMatrix) -> Result<(Vec<Complex64>, CMatrix)> {
    let n = h.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let schur = h
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NotDiagonalizable("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let scale = frobenius(&t).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * scale;
    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = Complex64::new(1.0, 0.0);
        let lambda = t[(k, k)];
        for i in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            y[(i, k)] = -acc / d;
        }
    }
    let mut v = q * y;
    for mut col in v.column_iter_mut() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        col /= Complex64::from(norm);
    }
    let eigenvalues = (0..n).map(|i| t[(i, i)]).collect();
    Ok((eigenvalues, v))
}

/// Eigenvalues from the Schur form.
pub fn eigenvalues(h: &CMatrix) -> Result<Vec<Complex64>> {
    if h.is_empty() {
        return Ok(Vec::new());
    }
    let schur = h
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NotDiagonalizable("Schur iteration did not converge".into()))?;
    let t = schur.unpack().1;
    Ok((0..h.nrows()).map(|i| t[(i, i)]).collect())
}
