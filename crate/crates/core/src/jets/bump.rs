//! Smooth compactly supported cutoffs built from `h(t) = exp(-1/t)`.
//!
//! Each transition is the quotient `h(a) / (h(a) + h(b))`; derivatives of `h`
//! are `h^(m)(t) = q_m(1/t) h(t)` with `q_0 = 1` and
//! `q_{m+1}(u) = u^2 (q_m(u) - q_m'(u))`. The `q_m` coefficients are computed
//! once in exact integer arithmetic.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use super::{Derivatives, Domain, Jet};
use crate::error::{Error, Result};
use crate::numeric::{binomial, compensated_horner};

/// Highest derivative order a bump jet supports. Up to `q_17` every
/// coefficient is an integer below 2^53, so the cached `f64` table is exact.
pub const BUMP_MAX_ORDER: usize = 16;

fn q_table() -> &'static [Vec<f64>] {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut exact: Vec<Vec<BigInt>> = vec![vec![BigInt::from(1)]];
        for m in 0..BUMP_MAX_ORDER {
            let q = &exact[m];
            // u^2 * (q - q'): coefficient of u^(k+2) is q_k - (k+1) q_{k+1}.
            let mut next = vec![BigInt::zero(); q.len() + 2];
            for k in 0..q.len() {
                let mut c = q[k].clone();
                if k + 1 < q.len() {
                    c -= &q[k + 1] * BigInt::from(k + 1);
                }
                next[k + 2] = c;
            }
            exact.push(next);
        }
        exact
            .iter()
            .map(|q| {
                q.iter()
                    .map(|c| c.to_f64().expect("q_m coefficient fits in f64"))
                    .collect()
            })
            .collect()
    })
}

/// Integer coefficients of `q_m`, lowest power first.
pub(crate) fn q_coefficients(m: usize) -> &'static [f64] {
    &q_table()[m]
}

/// `h^(m)(t)` for `m < out.len()`.
fn h_derivatives(t: f64, out: &mut [f64]) {
    if t <= 0.0 {
        out.fill(0.0);
        return;
    }
    let u = 1.0 / t;
    // exp(-u) underflows to zero past this point; q_m(u) may overflow.
    if u > 745.0 {
        out.fill(0.0);
        return;
    }
    let e = (-u).exp();
    for (m, o) in out.iter_mut().enumerate() {
        *o = compensated_horner(q_coefficients(m), u) * e;
    }
}

/// Derivatives of `N / (N + M)` given derivative tables of `N` and `M`.
fn smooth_quotient(n: &[f64], m: &[f64], out: &mut [f64]) {
    let len = out.len();
    let d: Vec<f64> = n.iter().zip(m).map(|(a, b)| a + b).collect();
    for r in 0..len {
        let mut acc = n[r];
        for k in 0..r {
            acc -= binomial(r, k) * out[k] * d[r - k];
        }
        out[r] = acc / d[0];
    }
}

/// A cutoff that is exactly 1 on `[plateau_lo, plateau_hi]`, exactly 0
/// outside `(support_lo, support_hi)`, and smooth everywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    support_lo: f64,
    plateau_lo: f64,
    plateau_hi: f64,
    support_hi: f64,
}

impl Bump {
    pub fn new(support_lo: f64, plateau_lo: f64, plateau_hi: f64, support_hi: f64) -> Result<Self> {
        let pts = [support_lo, plateau_lo, plateau_hi, support_hi];
        if pts.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("bump breakpoints must be finite"));
        }
        if !(support_lo < plateau_lo && plateau_lo <= plateau_hi && plateau_hi < support_hi) {
            return Err(Error::invalid(format!(
                "bump needs support_lo < plateau_lo <= plateau_hi < support_hi, got {pts:?}"
            )));
        }
        Ok(Self {
            support_lo,
            plateau_lo,
            plateau_hi,
            support_hi,
        })
    }

    /// `psi(s) = h(o - |s|) / (h(o - |s|) + h(|s| - i))` recentred at `center`.
    pub fn symmetric(inner: f64, outer: f64, center: f64) -> Result<Self> {
        if !(inner >= 0.0) || inner >= outer {
            return Err(Error::invalid(format!(
                "bump needs 0 <= inner < outer, got inner = {inner}, outer = {outer}"
            )));
        }
        Self::new(center - outer, center - inner, center + inner, center + outer)
    }

    /// The cutoff used by the extension operator: 1 on `[0, 1]`, 0 for
    /// `x >= 2` and for `x <= -1`.
    pub fn extension_default() -> Self {
        Self::new(-1.0, 0.0, 1.0, 2.0).expect("valid constant bump")
    }

    pub fn support(&self) -> (f64, f64) {
        (self.support_lo, self.support_hi)
    }

    pub fn plateau(&self) -> (f64, f64) {
        (self.plateau_lo, self.plateau_hi)
    }

    pub fn breakpoints(&self) -> [f64; 4] {
        [self.support_lo, self.plateau_lo, self.plateau_hi, self.support_hi]
    }

    /// `psi^(r)(s)` for `r < out.len()`; `out.len() <= BUMP_MAX_ORDER + 1`.
    pub fn eval(&self, s: f64, out: &mut [f64]) {
        let len = out.len();
        debug_assert!(len <= BUMP_MAX_ORDER + 1);
        if s <= self.support_lo || s >= self.support_hi {
            out.fill(0.0);
            return;
        }
        if s >= self.plateau_lo && s <= self.plateau_hi {
            out.fill(0.0);
            if len > 0 {
                out[0] = 1.0;
            }
            return;
        }
        let mut rising = [0.0; BUMP_MAX_ORDER + 1];
        let mut falling = [0.0; BUMP_MAX_ORDER + 1];
        let (a, b) = (&mut rising[..len], &mut falling[..len]);
        if s > self.plateau_hi {
            // numerator h(support_hi - s), competitor h(s - plateau_hi)
            h_derivatives(self.support_hi - s, a);
            flip_signs(a);
            h_derivatives(s - self.plateau_hi, b);
        } else {
            // numerator h(s - support_lo), competitor h(plateau_lo - s)
            h_derivatives(s - self.support_lo, a);
            h_derivatives(self.plateau_lo - s, b);
            flip_signs(b);
        }
        smooth_quotient(a, b, out);
    }

    pub fn jet(&self) -> Jet {
        Jet::new(*self, Domain::WholeLine, Some(BUMP_MAX_ORDER), -1.0)
            .with_real_values(true)
            .with_breakpoints(self.breakpoints().to_vec())
            .with_label(format!(
                "bump[{},{},{},{}]",
                self.support_lo, self.plateau_lo, self.plateau_hi, self.support_hi
            ))
    }
}

fn flip_signs(d: &mut [f64]) {
    for (m, v) in d.iter_mut().enumerate() {
        if m % 2 == 1 {
            *v = -*v;
        }
    }
}

impl Derivatives for Bump {
    fn fill(&self, x: f64, out: &mut [Complex64]) {
        let mut buf = [0.0; BUMP_MAX_ORDER + 1];
        let buf = &mut buf[..out.len()];
        self.eval(x, buf);
        for (o, v) in out.iter_mut().zip(buf.iter()) {
            *o = Complex64::new(*v, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_recurrence_low_orders() {
        assert_eq!(q_coefficients(0), &[1.0]);
        assert_eq!(q_coefficients(1), &[0.0, 0.0, 1.0]);
        assert_eq!(q_coefficients(2), &[0.0, 0.0, 0.0, -2.0, 1.0]);
        assert_eq!(q_coefficients(3), &[0.0, 0.0, 0.0, 0.0, 6.0, -6.0, 1.0]);
    }

    #[test]
    fn q_coefficients_are_exact_integers() {
        for m in 0..=BUMP_MAX_ORDER {
            for &c in q_coefficients(m) {
                assert!(c.abs() < 2f64.powi(53));
                assert_eq!(c, c.trunc());
            }
        }
    }

    #[test]
    fn h_derivative_matches_difference_quotient() {
        let t = 0.37;
        let mut d = [0.0; 6];
        h_derivatives(t, &mut d);
        let step = 1e-6;
        for m in 0..5 {
            let mut lo = [0.0; 6];
            let mut hi = [0.0; 6];
            h_derivatives(t - step, &mut lo);
            h_derivatives(t + step, &mut hi);
            let fd = (hi[m] - lo[m]) / (2.0 * step);
            assert!((fd - d[m + 1]).abs() <= 1e-6 * d[m + 1].abs().max(1.0), "m={m}");
        }
    }

    #[test]
    fn plateau_and_exterior_are_exact() {
        let b = Bump::symmetric(1.0, 2.0, 0.0).unwrap();
        let mut out = [0.0; 7];
        for s in [-1.0, -0.5, 0.0, 0.999, 1.0] {
            b.eval(s, &mut out);
            assert_eq!(out[0], 1.0);
            assert!(out[1..].iter().all(|&v| v == 0.0));
        }
        for s in [-7.0, -2.0, 2.0, 2.0001, 30.0] {
            b.eval(s, &mut out);
            assert!(out.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn transition_is_strictly_between() {
        let b = Bump::symmetric(1.0, 2.0, 0.0).unwrap();
        let mut out = [0.0; 2];
        b.eval(1.5, &mut out);
        assert!(out[0] > 0.0 && out[0] < 1.0);
        // symmetric quotient at the midpoint is exactly one half
        assert!((out[0] - 0.5).abs() < 1e-15);
        assert!(out[1] < 0.0);
        b.eval(-1.5, &mut out);
        assert!((out[0] - 0.5).abs() < 1e-15);
        assert!(out[1] > 0.0);
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(Bump::symmetric(2.0, 1.0, 0.0).is_err());
        assert!(Bump::symmetric(1.0, 1.0, 0.0).is_err());
        assert!(Bump::new(0.0, 1.0, 0.5, 2.0).is_err());
    }

    #[test]
    fn extension_cutoff_shape() {
        let phi = Bump::extension_default();
        let mut v = [0.0; 1];
        for (s, want) in [(-1.0, 0.0), (0.0, 1.0), (0.5, 1.0), (1.0, 1.0), (2.0, 0.0)] {
            phi.eval(s, &mut v);
            assert_eq!(v[0], want, "s = {s}");
        }
    }
}
