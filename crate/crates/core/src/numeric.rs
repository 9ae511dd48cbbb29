//! Small floating-point utilities: error-free transformations, compensated
//! summation and compensated Horner evaluation.

use nalgebra::DMatrix;
use num_complex::Complex64;

#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Neumaier summation accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.sum, x);
        self.sum = s;
        self.carry += e;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Entrywise compensated accumulation of complex matrices.
#[derive(Debug, Clone)]
pub struct MatrixAccumulator {
    re: Vec<CompensatedSum>,
    im: Vec<CompensatedSum>,
    rows: usize,
    cols: usize,
}

impl MatrixAccumulator {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            re: vec![CompensatedSum::new(); rows * cols],
            im: vec![CompensatedSum::new(); rows * cols],
            rows,
            cols,
        }
    }

    pub fn add(&mut self, m: &DMatrix<Complex64>) {
        debug_assert_eq!(m.shape(), (self.rows, self.cols));
        for (k, z) in m.iter().enumerate() {
            self.re[k].add(z.re);
            self.im[k].add(z.im);
        }
    }

    pub fn value(&self) -> DMatrix<Complex64> {
        DMatrix::from_iterator(
            self.rows,
            self.cols,
            self.re
                .iter()
                .zip(&self.im)
                .map(|(r, i)| Complex64::new(r.value(), i.value())),
        )
    }
}

/// Horner evaluation with an error-free correction term (Graillat et al.).
/// `coeffs[k]` multiplies `x^k`. The result is as accurate as plain Horner
/// in doubled working precision.
pub fn compensated_horner(coeffs: &[f64], x: f64) -> f64 {
    let Some((&lead, rest)) = coeffs.split_last() else {
        return 0.0;
    };
    let mut s = lead;
    let mut c = 0.0f64;
    for &a in rest.iter().rev() {
        let (p, pe) = two_prod(s, x);
        let (t, se) = two_sum(p, a);
        s = t;
        c = c.mul_add(x, pe + se);
    }
    s + c
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc.round()
}

/// `m * 2^e` without spurious intermediate overflow or underflow.
pub fn ldexp(mut m: f64, mut e: i64) -> f64 {
    const STEP: i64 = 960;
    let big = 2f64.powi(STEP as i32);
    let small = 2f64.powi(-STEP as i32);
    while e > STEP {
        m *= big;
        e -= STEP;
        if !m.is_finite() {
            return m;
        }
    }
    while e < -STEP {
        m *= small;
        e += STEP;
        if m == 0.0 {
            return m;
        }
    }
    m * 2f64.powi(e as i32)
}

pub fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_bits() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn horner_matches_exact_integer_polynomial() {
        // (x - 1)^6 expanded, evaluated near its root where plain Horner loses everything.
        let c = [1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0];
        let x = 1.0 + 1e-3;
        let exact = 1e-18;
        let got = compensated_horner(&c, x);
        assert!((got - exact).abs() < 1e-24, "{got}");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(10, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(binomial(30, 15), 155117520.0);
    }

    #[test]
    fn ldexp_extremes() {
        assert_eq!(ldexp(1.0, 3), 8.0);
        assert_eq!(ldexp(1.5, -1), 0.75);
        assert_eq!(ldexp(2f64.powi(-1000), 1500), 2f64.powi(500));
        assert_eq!(ldexp(1.0, -2000), 0.0);
    }
}
