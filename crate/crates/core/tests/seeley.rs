mod common;

use common::c;
use hsfc::*;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn half(b: Builtin) -> Jet {
    make_builtin(&b, Domain::HalfLine).unwrap()
}

fn catalog() -> Vec<Jet> {
    vec![
        half(Builtin::Exp { t: 1.0 }),
        half(Builtin::Exp { t: 0.5 }),
        half(Builtin::Bracket { beta: -1.0 }),
        half(Builtin::Bracket { beta: -2.0 }),
        half(Builtin::Gz { z: c(0.0, 1.0) }),
        half(Builtin::Gz { z: c(-1.0, 0.5) }),
    ]
}

#[test]
fn exact_moments_up_to_sixteen() {
    for k in 1..=16 {
        let s = make_seeley_coefficients(k).unwrap();
        for n in 0..k {
            let sum = s
                .a()
                .iter()
                .zip(s.b())
                .fold(num_rational::BigRational::zero(), |acc, (a, b)| {
                    acc + a * num_rational::BigRational::from_integer(b.pow(n as u32))
                });
            assert!(sum.is_one(), "K={k} n={n}");
        }
    }
}

#[test]
fn linearity() {
    let coeffs = make_seeley_coefficients(6).unwrap();
    let phi = default_cutoff();
    let (f, g) = (half(Builtin::Exp { t: 1.0 }), half(Builtin::Bracket { beta: -1.0 }));
    let alpha = c(1.5, -0.25);
    let combo = Jet::linear_combination(&[(alpha, &f), (c(1.0, 0.0), &g)]).unwrap();
    let (ef, eg, ec) = (
        seeley_extend(&f, &phi, &coeffs).unwrap(),
        seeley_extend(&g, &phi, &coeffs).unwrap(),
        seeley_extend(&combo, &phi, &coeffs).unwrap(),
    );
    for i in 0..64 {
        let x = -3.0 + 6.0 * i as f64 / 63.0;
        for r in 0..=3 {
            let (a, b) = (ef.derivative(x, r).unwrap(), eg.derivative(x, r).unwrap());
            let want = alpha * a + b;
            let got = ec.derivative(x, r).unwrap();
            let scale = (alpha.norm() * a.norm() + b.norm()).max(f64::MIN_POSITIVE);
            assert!((got - want).norm() <= 1e-12 * scale, "x={x} r={r}");
        }
    }
}

proptest! {
    #[test]
    fn compact_tail(x in -1e6f64..-2.0, k in 1usize..=20, i in 0usize..6) {
        let f = &catalog()[i];
        let e = seeley_extend(f, &default_cutoff(), &make_seeley_coefficients(k).unwrap()).unwrap();
        let top = e.max_order().unwrap();
        prop_assert!(e.derivatives(x, top).unwrap().iter().all(|v| *v == c(0.0, 0.0)));
    }

    #[test]
    fn agrees_with_f_on_half_line(x in 0.0f64..50.0, i in 0usize..6) {
        let f = &catalog()[i];
        let e = seeley_extend(f, &default_cutoff(), &make_seeley_coefficients(6).unwrap()).unwrap();
        prop_assert_eq!(e.derivatives(x, 4).unwrap(), f.derivatives(x, 4).unwrap());
    }
}

#[test]
fn scaling_bound() {
    for f in catalog() {
        let t = scale_jet(&f, 2.0).unwrap();
        let tol = 1e-8;
        let (nf, nt) = (
            an_norm(&f, 3, Line::Half, tol).unwrap(),
            an_norm(&t, 3, Line::Half, tol).unwrap(),
        );
        assert!(nt.value <= 8.0 * nf.value + tol, "{}: {} vs {}", f.label(), nt.value, nf.value);
    }
}

#[test]
fn extension_norm_bound_and_ratio() {
    let n = 3;
    let k = n + 2;
    let coeffs = make_seeley_coefficients(k).unwrap();
    let phi = default_cutoff();
    let bound = extension_norm_bound(&coeffs, &phi, n).unwrap();
    let tol = 1e-8;
    let mut ratios = Vec::new();
    for f in catalog() {
        let e = seeley_extend(&f, &phi, &coeffs).unwrap();
        let whole = an_norm(&e, n, Line::Whole, tol).unwrap().value;
        let base = an_norm(&f, n, Line::Half, tol).unwrap().value;
        assert!(whole <= bound * base + tol, "{}: {whole} > {bound} * {base}", f.label());
        ratios.push(whole / base);
    }
    eprintln!("bound {bound:.3}, ratios {ratios:?}");
    assert!(ratios.iter().all(|r| r.is_finite() && *r >= 1.0));
}

#[test]
fn operator_norm_ratio_is_bounded() {
    // the ratio stays bounded when the functions are stretched out
    let n = 2;
    let coeffs = make_seeley_coefficients(n + 2).unwrap();
    let phi = default_cutoff();
    let bound = extension_norm_bound(&coeffs, &phi, n).unwrap();
    let mut worst = 0.0f64;
    for t in [0.125, 0.5, 1.0, 4.0, 16.0] {
        let f = half(Builtin::Exp { t });
        let e = seeley_extend(&f, &phi, &coeffs).unwrap();
        let r = an_norm(&e, n, Line::Whole, 1e-8).unwrap().value
            / an_norm(&f, n, Line::Half, 1e-8).unwrap().value;
        worst = worst.max(r);
    }
    eprintln!("worst ratio {worst:.4}, bound {bound:.3}");
    assert!(worst <= bound);
}

#[test]
fn cutoff_multiplication_keeps_domain() {
    let f = half(Builtin::Exp { t: 1.0 });
    let p = multiply_by_cutoff(&default_cutoff(), &f).unwrap();
    assert_eq!(p.domain(), Domain::HalfLine);
    let v = p.value(1.5).unwrap().re;
    assert!(v > 0.0 && v < (-1.5f64).exp());
    assert_eq!(p.value(3.0).unwrap(), c(0.0, 0.0));
}
