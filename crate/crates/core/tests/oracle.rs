mod common;

use common::*;
use hsfc::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn diagonalizable() -> Vec<OperatorHandle> {
    vec![
        diag01(),
        zero1(),
        random_symmetric(6, 1),
        OperatorHandle::from_real_rows(&[&[0.0, 1.0], &[0.0, 1.0]]).unwrap(),
        OperatorHandle::from_real_rows(&[&[2.0, 0.5, 0.0], &[0.0, 1.0, -0.3], &[0.0, 0.0, 3.0]]).unwrap(),
    ]
}

#[test]
fn oracle_matches_resolvent() {
    for h in diagonalizable() {
        for w in [c(0.0, 2.0), c(-1.0, 1.0), c(3.0, 0.5), c(0.5, -0.25)] {
            let f = make_builtin(&Builtin::Gz { z: w }, Domain::WholeLine).unwrap();
            let d = frob(&(matrix_function_oracle(&h, &f).unwrap() - resolvent(&h, w).unwrap()));
            assert!(d <= 1e-10, "dim {} w {w}: {d:e}", h.dim());
        }
    }
}

#[test]
fn jordan_oracle_matches_resolvent() {
    let h = jordan();
    let w = c(0.5, 1.0);
    let f = make_builtin(&Builtin::Gz { z: w }, Domain::WholeLine).unwrap();
    let d = frob(&(matrix_function_oracle(&h, &f).unwrap() - resolvent(&h, w).unwrap()));
    assert!(d <= 1e-10, "{d:e}");
}

/// Same ranges as the fitting grid, random positions.
fn fresh_grid(h: &OperatorHandle, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = 4.0 * h.spectral_radius().max(1.0);
    (0..2000)
        .map(|_| {
            let im = 10f64.powf(rng.random_range(-4.0..1.0));
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            c(rng.random_range(-reach..reach), sign * im)
        })
        .collect()
}

#[test]
fn fitted_growth_holds_on_fresh_grid() {
    let mut hs = diagonalizable();
    hs.push(OperatorHandle::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap());
    for (i, h) in hs.iter().enumerate() {
        let g = estimate_growth(h, &default_grid(h)).unwrap();
        let v = oracle::growth_violations(h, &g, &fresh_grid(h, 100 + i as u64)).unwrap();
        eprintln!("matrix {i}: c {:.4} alpha {} violations {:.3}%", g.c, g.alpha, 100.0 * v);
        assert!(v <= 0.01);
    }
}

#[test]
fn growth_fit_reports_worst_sample() {
    let h = jordan();
    let fit = fit_growth(&h, &default_grid(&h)).unwrap();
    assert_eq!(fit.samples, default_grid(&h).len());
    assert!(fit.worst.im != 0.0 && fit.worst_norm > 0.0);
}
