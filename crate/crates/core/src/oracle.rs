//! Reference computations independent of the plane quadrature: spectral
//! matrix functions, the 2x2 Jordan-block formula, and the resolvent growth
//! fit.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hs_engine::{GrowthEstimate, OperatorHandle};
use crate::jets::{japanese_bracket, Domain, Jet};
use crate::linalg::{condition2, eigen_decomposition, norm2, resolvent_unchecked, CMatrix};
use crate::numeric::frobenius;

/// Eigenbases worse conditioned than this are refused.
pub const MAX_EIGENBASIS_CONDITION: f64 = 1e8;
/// Multiplicative slack in the growth bound.
pub const GROWTH_SLACK: f64 = 1.05;
pub const ALPHA_STEP: f64 = 0.25;
pub const ALPHA_MAX: f64 = 8.0;

fn real_point(lam: Complex64, f: &Jet) -> Result<f64> {
    let slack = 1e-9 * lam.norm().max(1.0);
    if lam.im.abs() > slack {
        return Err(Error::precondition(format!(
            "eigenvalue {lam} is not real; the jet is only defined on the real line"
        )));
    }
    let mut x = lam.re;
    if f.domain() == Domain::HalfLine && x < 0.0 && x > -slack {
        x = 0.0;
    }
    Ok(x)
}

/// `(lambda, N)` when `H = lambda I + N` is 2x2 with `N` nonzero nilpotent.
fn jordan_2x2(h: &CMatrix) -> Option<(Complex64, CMatrix)> {
    if h.nrows() != 2 {
        return None;
    }
    let lam = (h[(0, 0)] + h[(1, 1)]) * 0.5;
    let mut nil = h.clone();
    nil[(0, 0)] -= lam;
    nil[(1, 1)] -= lam;
    let size = frobenius(&nil);
    if size == 0.0 {
        return None;
    }
    let sq = &nil * &nil;
    (frobenius(&sq) <= 1e-12 * size * size).then_some((lam, nil))
}

/// `V diag(f(lambda_i)) V^{-1}` for diagonalizable `H`, or
/// `f(lambda) I + f'(lambda) N` for a 2x2 Jordan block `lambda I + N`.
pub fn matrix_function_oracle(h: &OperatorHandle, f: &Jet) -> Result<CMatrix> {
    let m = h.entries();
    let n = m.nrows();
    let (vals, v) = eigen_decomposition(m)?;
    let kappa = condition2(&v);
    if kappa <= MAX_EIGENBASIS_CONDITION {
        let fv: Vec<Complex64> = vals
            .iter()
            .map(|&lam| f.value(real_point(lam, f)?))
            .collect::<Result<_>>()?;
        let vinv = v
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NotDiagonalizable("eigenbasis is singular".into()))?;
        return Ok(&v * CMatrix::from_diagonal(&DVector::from_vec(fv)) * vinv);
    }
    if let Some((lam, nil)) = jordan_2x2(m) {
        let d = f.derivatives(real_point(lam, f)?, 1)?;
        return Ok(CMatrix::identity(n, n) * d[0] + nil * d[1]);
    }
    Err(Error::NotDiagonalizable(format!(
        "eigenbasis condition number {kappa:e} exceeds {MAX_EIGENBASIS_CONDITION:e} and the matrix is not a 2x2 Jordan block"
    )))
}

/// Fit diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub estimate: GrowthEstimate,
    /// Sample attaining the largest normalised ratio.
    pub worst: Complex64,
    pub worst_norm: f64,
    pub samples: usize,
}

/// `|Im z|` log-spaced over `[1e-4, 10]` with both signs, `Re z` uniform over
/// `[-4 max(rho, 1), 4 max(rho, 1)]` plus the real parts of the eigenvalues.
pub fn default_grid(h: &OperatorHandle) -> Vec<Complex64> {
    let reach = 4.0 * h.spectral_radius().max(1.0);
    let mut res: Vec<f64> = (0..=80).map(|k| -reach + 2.0 * reach * k as f64 / 80.0).collect();
    res.extend(h.eigenvalues().iter().map(|l| l.re));
    let ims: Vec<f64> = (0..=25).map(|k| 10f64.powf(-4.0 + k as f64 / 5.0)).collect();
    let mut grid = Vec::with_capacity(res.len() * ims.len() * 2);
    for &x in &res {
        for &y in &ims {
            grid.push(Complex64::new(x, y));
            grid.push(Complex64::new(x, -y));
        }
    }
    grid
}

fn ratio(norm: f64, z: Complex64, alpha: f64) -> f64 {
    let y = z.im.abs();
    norm * y * (y / japanese_bracket(z)).powf(alpha)
}

/// Sampled resolvent norms `||(z - H)^{-1}||_2`.
pub fn resolvent_norms(h: &OperatorHandle, grid: &[Complex64]) -> Result<Vec<f64>> {
    if grid.iter().any(|z| z.im == 0.0) {
        return Err(Error::invalid("growth grid must avoid the real axis"));
    }
    grid.par_iter()
        .map(|&z| {
            resolvent_unchecked(h.entries(), z)
                .map(|r| norm2(&r))
                .filter(|v| v.is_finite())
                .ok_or(Error::GrowthRejected)
        })
        .collect()
}

/// Least `alpha` on the quarter-integer lattice in `[0, 8]` whose bound is
/// stable on the grid, with `c` the largest ratio times the 5% slack.
///
/// A lattice value is accepted when the sup of the normalised ratio over the
/// full grid is within the slack of its sup over the points outside the
/// smallest `|Im z|` decade. Any `alpha` fits a finite grid with a large
/// enough `c`; this test asks that the ratio has stopped growing towards
/// the real axis.
pub fn fit_growth(h: &OperatorHandle, grid: &[Complex64]) -> Result<GrowthFit> {
    let norms = resolvent_norms(h, grid)?;
    let min_im = grid.iter().map(|z| z.im.abs()).fold(f64::INFINITY, f64::min);
    let steps = (ALPHA_MAX / ALPHA_STEP).round() as usize;
    for k in 0..=steps {
        let alpha = k as f64 * ALPHA_STEP;
        let mut full = (0.0, 0usize);
        let mut outer = 0.0f64;
        for (i, (&z, &nr)) in grid.iter().zip(&norms).enumerate() {
            let q = ratio(nr, z, alpha);
            if q > full.0 {
                full = (q, i);
            }
            if z.im.abs() >= 10.0 * min_im {
                outer = outer.max(q);
            }
        }
        if full.0 <= GROWTH_SLACK * outer {
            return Ok(GrowthFit {
                estimate: GrowthEstimate {
                    c: GROWTH_SLACK * full.0,
                    alpha,
                },
                worst: grid[full.1],
                worst_norm: norms[full.1],
                samples: grid.len(),
            });
        }
    }
    Err(Error::GrowthRejected)
}

pub fn estimate_growth(h: &OperatorHandle, grid: &[Complex64]) -> Result<GrowthEstimate> {
    fit_growth(h, grid).map(|f| f.estimate)
}

/// Fraction of grid points where `||R(z)|| > c |Im z|^{-1} (<z>/|Im z|)^alpha`.
pub fn growth_violations(h: &OperatorHandle, g: &GrowthEstimate, grid: &[Complex64]) -> Result<f64> {
    let norms = resolvent_norms(h, grid)?;
    let bad = grid
        .iter()
        .zip(&norms)
        .filter(|(&z, &nr)| ratio(nr, z, g.alpha) > g.c)
        .count();
    Ok(bad as f64 / grid.len().max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{make_builtin, Builtin};

    fn exp1() -> Jet {
        make_builtin(&Builtin::Exp { t: 1.0 }, Domain::HalfLine).unwrap()
    }

    #[test]
    fn diagonal_and_jordan_examples() {
        let d = OperatorHandle::diagonal(&[0.0, 1.0]).unwrap();
        let r = matrix_function_oracle(&d, &exp1()).unwrap();
        assert!((r[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((r[(1, 1)].re - (-1f64).exp()).abs() < 1e-14);
        assert!(r[(0, 1)].norm() < 1e-14);

        let j = OperatorHandle::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let r = matrix_function_oracle(&j, &exp1()).unwrap();
        let want = CMatrix::from_row_slice(
            2,
            2,
            &[1.0, -1.0, 0.0, 1.0].map(|x| Complex64::new(x, 0.0)),
        );
        assert!(frobenius(&(r - want)) < 1e-14);
    }

    #[test]
    fn similarity_example() {
        // V diag(0, 1) V^{-1} with V = [[1, 1], [0, 1]] is [[0, 1], [0, 1]]
        let h = OperatorHandle::from_real_rows(&[&[0.0, 1.0], &[0.0, 1.0]]).unwrap();
        let f = make_builtin(&Builtin::Bracket { beta: -1.0 }, Domain::WholeLine).unwrap();
        let r = matrix_function_oracle(&h, &f).unwrap();
        let s = 0.5f64.sqrt();
        // V diag(1, s) V^{-1} = [[1, s - 1], [0, s]]
        let want = CMatrix::from_row_slice(2, 2, &[1.0, s - 1.0, 0.0, s].map(|x| Complex64::new(x, 0.0)));
        assert!(frobenius(&(r - want)) < 1e-12);
    }

    #[test]
    fn refuses_larger_defective_matrices() {
        let h = OperatorHandle::from_real_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(
            matrix_function_oracle(&h, &exp1()),
            Err(Error::NotDiagonalizable(_))
        ));
    }

    #[test]
    fn growth_examples() {
        let d = OperatorHandle::diagonal(&[0.0, 1.0]).unwrap();
        let g = estimate_growth(&d, &default_grid(&d)).unwrap();
        assert_eq!(g.alpha, 0.0);
        assert!(g.c <= 1.05 * (1.0 + 1e-12), "{g:?}");

        let z = OperatorHandle::diagonal(&[0.0]).unwrap();
        let g = estimate_growth(&z, &default_grid(&z)).unwrap();
        assert_eq!(g.alpha, 0.0);
        assert!(g.c <= 1.05 * (1.0 + 1e-12), "{g:?}");

        let j = OperatorHandle::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let g = estimate_growth(&j, &default_grid(&j)).unwrap();
        assert!(g.alpha >= 1.0, "{g:?}");
    }

    #[test]
    fn grid_on_real_axis_rejected() {
        let d = OperatorHandle::diagonal(&[0.0, 1.0]).unwrap();
        assert!(estimate_growth(&d, &[Complex64::new(0.5, 0.0)]).is_err());
    }
}
