#![allow(dead_code)]

use hsfc::{CMatrix, OperatorHandle};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn diag01() -> OperatorHandle {
    OperatorHandle::diagonal(&[0.0, 1.0])
        .unwrap()
        .with_spectral_floor(0.0)
        .unwrap()
        .with_fitted_growth()
        .unwrap()
}

pub fn jordan() -> OperatorHandle {
    OperatorHandle::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
        .unwrap()
        .with_spectral_floor(0.0)
        .unwrap()
        .with_fitted_growth()
        .unwrap()
}

pub fn zero1() -> OperatorHandle {
    OperatorHandle::diagonal(&[0.0])
        .unwrap()
        .with_spectral_floor(0.0)
        .unwrap()
        .with_fitted_growth()
        .unwrap()
}

/// `Q diag(lambda) Q^T` with `lambda` uniform in `[0, 50]` and `Q` the
/// orthogonal factor of a random matrix.
pub fn random_symmetric(dim: usize, seed: u64) -> OperatorHandle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    let q = a.qr().q();
    let lambda = nalgebra::DVector::<f64>::from_fn(dim, |_, _| rng.random_range(0.0..50.0));
    let h = &q * DMatrix::from_diagonal(&lambda) * q.transpose();
    let h = (&h + h.transpose()) * 0.5;
    OperatorHandle::new(h.map(|x| Complex64::new(x, 0.0)))
        .unwrap()
        .with_spectral_floor(0.0)
        .unwrap()
        .with_fitted_growth()
        .unwrap()
}

pub fn frob(m: &CMatrix) -> f64 {
    hsfc::numeric::frobenius(m)
}
