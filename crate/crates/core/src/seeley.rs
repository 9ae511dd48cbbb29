//! Seeley extension of half-line functions to the whole line.
//!
//! For `x < 0` the extension is `sum_k a_k (phi f)(b_k x)` with `b_k = -2^k`
//! and coefficients chosen so that `sum_k a_k b_k^n = 1` for every `n < K`.
//! That moment condition makes all derivatives of order `< K` agree across
//! zero.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::jets::{jet_product, leibniz, Bump, Derivatives, Domain, Jet};
use crate::numeric::{binomial, ldexp, CompensatedSum};

pub const MAX_TRUNCATION: usize = 64;

/// `a_k` stored as `(hi + lo) * 2^exp`, so coefficients far below the
/// `f64` range still combine correctly with large powers of `b_k`.
#[derive(Debug, Clone, Copy)]
struct SplitCoefficient {
    hi: f64,
    lo: f64,
    exp: i64,
}

impl SplitCoefficient {
    fn from_rational(q: &BigRational) -> Self {
        if q.is_zero() {
            return Self {
                hi: 0.0,
                lo: 0.0,
                exp: 0,
            };
        }
        let exp = q.numer().bits() as i64 - q.denom().bits() as i64;
        let two = BigInt::from(2);
        let scale = BigRational::from_integer(num_traits::pow(two, exp.unsigned_abs() as usize));
        let scaled = if exp >= 0 { q / &scale } else { q * &scale };
        let hi = scaled.to_f64().expect("scaled coefficient is O(1)");
        let rest = &scaled - BigRational::from_float(hi).expect("finite");
        let lo = rest.to_f64().unwrap_or(0.0);
        Self { hi, lo, exp }
    }

    /// `(hi * 2^(exp+shift), lo * 2^(exp+shift))` with a sign flip.
    fn scaled(&self, shift: i64, negate: bool) -> (f64, f64) {
        let s = if negate { -1.0 } else { 1.0 };
        (
            s * ldexp(self.hi, self.exp + shift),
            s * ldexp(self.lo, self.exp + shift),
        )
    }
}

/// Truncated Seeley sequences: `b_k = -2^k` and exact rational `a_k`
/// satisfying `sum_k a_k b_k^n = 1` for `0 <= n < K`.
#[derive(Clone)]
pub struct SeeleyCoefficients {
    a: Vec<BigRational>,
    b: Vec<BigInt>,
    split: Vec<SplitCoefficient>,
}

impl fmt::Debug for SeeleyCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeeleyCoefficients")
            .field("K", &self.len())
            .field("a", &self.a.iter().map(|q| q.to_string()).collect::<Vec<_>>())
            .finish()
    }
}

/// Solves the `K x K` moment system exactly.
pub fn make_seeley_coefficients(k: usize) -> Result<SeeleyCoefficients> {
    SeeleyCoefficients::new(k)
}

impl SeeleyCoefficients {
    pub fn new(k: usize) -> Result<Self> {
        if !(1..=MAX_TRUNCATION).contains(&k) {
            return Err(Error::invalid(format!(
                "truncation K must lie in 1..={MAX_TRUNCATION}, got {k}"
            )));
        }
        let b: Vec<BigInt> = (0..k).map(|j| -(BigInt::one() << j)).collect();
        // The system V^T a = 1 says sum_k a_k p(b_k) = p(1) for every
        // polynomial of degree < K, so a_k is the k-th Lagrange basis
        // polynomial on the nodes b evaluated at 1.
        let one = BigInt::one();
        let a: Vec<BigRational> = (0..k)
            .map(|i| {
                let mut num = BigInt::one();
                let mut den = BigInt::one();
                for j in (0..k).filter(|&j| j != i) {
                    num *= &one - &b[j];
                    den *= &b[i] - &b[j];
                }
                BigRational::new(num, den)
            })
            .collect();
        let split = a.iter().map(SplitCoefficient::from_rational).collect();
        Ok(Self { a, b, split })
    }

    /// Truncation length `K`.
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self) -> &[BigRational] {
        &self.a
    }

    pub fn b(&self) -> &[BigInt] {
        &self.b
    }

    /// Nearest `f64` to `a_k`.
    pub fn a_f64(&self, k: usize) -> f64 {
        let s = self.split[k];
        ldexp(s.hi + s.lo, s.exp)
    }

    pub fn b_f64(&self, k: usize) -> f64 {
        -ldexp(1.0, k as i64)
    }

    /// `sum_k a_k b_k^n - 1` in exact arithmetic.
    pub fn moment_residual_exact(&self, n: usize) -> BigRational {
        let mut acc = -BigRational::one();
        for (a, b) in self.a.iter().zip(&self.b) {
            acc += a * BigRational::from_integer(num_traits::pow(b.clone(), n));
        }
        acc
    }

    /// `sum_k a_k b_k^n - 1` using the floating representation the
    /// extension evaluates with, accumulated with compensated summation.
    pub fn moment_residual_f64(&self, n: usize) -> f64 {
        let mut acc = CompensatedSum::new();
        acc.add(-1.0);
        for k in 0..self.len() {
            let (hi, lo) = self.weighted_power_split(k, n);
            acc.add(hi);
            acc.add(lo);
        }
        acc.value()
    }

    /// Same residual with each `a_k` rounded to a single `f64` and summed
    /// naively, for diagnostics.
    pub fn moment_residual_plain_f64(&self, n: usize) -> f64 {
        (0..self.len())
            .map(|k| self.a_f64(k) * self.b_f64(k).powi(n as i32))
            .sum::<f64>()
            - 1.0
    }

    fn weighted_power_split(&self, k: usize, r: usize) -> (f64, f64) {
        // b_k^r = (-1)^r 2^(k r)
        self.split[k].scaled((k * r) as i64, r % 2 == 1)
    }

    /// `a_k b_k^r` rounded once.
    pub fn weighted_power(&self, k: usize, r: usize) -> f64 {
        let (hi, lo) = self.weighted_power_split(k, r);
        hi + lo
    }

    /// `sum_k |a_k| |b_k|^n`.
    pub fn abs_moment(&self, n: usize) -> f64 {
        (0..self.len()).map(|k| self.weighted_power(k, n).abs()).sum()
    }

    /// Bound `e^4 2^{-(k^2-3k)/2}` known for the infinite sequence. The
    /// truncated solution is not claimed to satisfy it.
    pub fn infinite_sequence_bound(k: usize) -> f64 {
        let k = k as f64;
        4f64.exp() * 2f64.powf(-(k * k - 3.0 * k) / 2.0)
    }

    /// Indices `k` with `|a_k|` above [`Self::infinite_sequence_bound`].
    pub fn exceeds_infinite_bound(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| {
                let lhs = self.a[k].abs();
                let bound = Self::infinite_sequence_bound(k);
                lhs.to_f64().unwrap_or(f64::INFINITY) >= bound
            })
            .collect()
    }
}

/// Checks that `phi` is exactly 1 on `[0, 1]` and vanishes outside `(-1, 2)`.
fn validate_cutoff(phi: &Jet) -> Result<()> {
    if phi.domain() != Domain::WholeLine {
        return Err(Error::precondition("extension cutoff must be a whole-line jet"));
    }
    for i in 0..=16 {
        let s = i as f64 / 16.0;
        if phi.value(s)? != Complex64::new(1.0, 0.0) {
            return Err(Error::precondition(format!(
                "extension cutoff is not 1 at s = {s} in [0, 1]"
            )));
        }
    }
    for s in [-1.0, -1.5, -4.0, 2.0, 2.5, 4.0, 64.0] {
        if phi.value(s)? != Complex64::new(0.0, 0.0) {
            return Err(Error::precondition(format!(
                "extension cutoff does not vanish at s = {s}"
            )));
        }
    }
    Ok(())
}

/// The standard extension cutoff as a jet.
pub fn default_cutoff() -> Jet {
    Bump::extension_default().jet()
}

/// Whole-line extension `E f` of a half-line jet.
///
/// `(E f)^(r)(x) = f^(r)(x)` for `x >= 0`; for `x < 0` it is
/// `sum_k a_k b_k^r (phi f)^(r)(b_k x)`, summed over the indices with
/// `2^k |x| < 2`. Derivatives match across zero up to order `K - 1`, which is
/// the extension's maximum order.
pub fn seeley_extend(f: &Jet, phi: &Jet, coeffs: &SeeleyCoefficients) -> Result<Jet> {
    if f.domain() != Domain::HalfLine {
        return Err(Error::precondition("seeley_extend expects a half-line jet"));
    }
    validate_cutoff(phi)?;
    let k = coeffs.len();
    let max_order = [f.max_order(), phi.max_order(), Some(k - 1)]
        .into_iter()
        .flatten()
        .min();

    let mut breaks: Vec<f64> = f.breakpoints().to_vec();
    breaks.push(0.0);
    for j in 0..k {
        let scale = ldexp(1.0, -(j as i64));
        breaks.push(-scale);
        breaks.push(-2.0 * scale);
    }
    let kernel = Extension {
        f: f.clone(),
        phi: phi.clone(),
        coeffs: Arc::new(coeffs.clone()),
    };
    Ok(Jet::new(kernel, Domain::WholeLine, max_order, f.beta())
        .with_real_values(f.is_real_valued() && phi.is_real_valued())
        .with_breakpoints(breaks)
        .with_label(format!("E[K={k}]({})", f.label())))
}

struct Extension {
    f: Jet,
    phi: Jet,
    coeffs: Arc<SeeleyCoefficients>,
}

impl Derivatives for Extension {
    fn fill(&self, x: f64, out: &mut [Complex64]) {
        if x >= 0.0 {
            self.f.fill_unchecked(x, out);
            return;
        }
        let n = out.len();
        out.fill(Complex64::new(0.0, 0.0));
        let mut pd = vec![Complex64::new(0.0, 0.0); n];
        let mut fd = vec![Complex64::new(0.0, 0.0); n];
        let mut prod = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..self.coeffs.len() {
            // b_k x = 2^k |x| grows with k; phi vanishes from 2 on.
            let s = ldexp(-x, k as i64);
            if s >= 2.0 {
                break;
            }
            self.phi.fill_unchecked(s, &mut pd);
            self.f.fill_unchecked(s, &mut fd);
            leibniz(&pd, &fd, &mut prod);
            for (r, o) in out.iter_mut().enumerate() {
                *o += self.coeffs.weighted_power(k, r) * prod[r];
            }
        }
    }
}

/// `(T_a f)(x) = f(a x)` for `a > 1`.
pub fn scale_jet(f: &Jet, a: f64) -> Result<Jet> {
    if f.domain() != Domain::HalfLine {
        return Err(Error::precondition("scale_jet expects a half-line jet"));
    }
    if !(a > 1.0 && a.is_finite()) {
        return Err(Error::invalid(format!("scale factor must exceed 1, got {a}")));
    }
    let mut jet = Jet::new(
        Scaled { f: f.clone(), a },
        Domain::HalfLine,
        f.max_order(),
        f.beta(),
    )
    .with_real_values(f.is_real_valued())
    .with_breakpoints(f.breakpoints().iter().map(|p| p / a).collect())
    .with_label(format!("T_{a}({})", f.label()));
    if let Some(c) = f.decay_constants() {
        // <a x> >= <x>, so a^r c_r still bounds the scaled derivative
        jet = jet.with_decay_constants(
            c.iter()
                .enumerate()
                .map(|(r, c)| c * a.powi(r as i32))
                .collect(),
        );
    }
    Ok(jet)
}

struct Scaled {
    f: Jet,
    a: f64,
}

impl Derivatives for Scaled {
    fn fill(&self, x: f64, out: &mut [Complex64]) {
        self.f.fill_unchecked(self.a * x, out);
        let mut scale = 1.0;
        for o in out.iter_mut() {
            *o *= scale;
            scale *= self.a;
        }
    }
}

/// `(S_phi f)(x) = phi(x) f(x)` on the domain of `f`.
pub fn multiply_by_cutoff(phi: &Jet, f: &Jet) -> Result<Jet> {
    let p = jet_product(phi, f)?;
    Ok(p.with_domain(f.domain()))
}

/// `1 + c_{n,phi} sum_k |a_k| |b_k|^n`, the operator-norm bound for the
/// truncated extension on the order-`n` weighted norm.
///
/// `c_{n,phi} = max_m sum_{r=m}^{n} C(r, m) d_{r-m}` with
/// `d_j = sup_{x >= 0} |phi^(j)(x)| <x>^j`, the sup taken over a dense grid
/// of the cutoff's support.
pub fn extension_norm_bound(coeffs: &SeeleyCoefficients, phi: &Jet, n: usize) -> Result<f64> {
    phi.check_order(n)?;
    let mut d = vec![0.0f64; n + 1];
    const SAMPLES: usize = 40_000;
    for i in 0..=SAMPLES {
        let x = 2.0 * i as f64 / SAMPLES as f64;
        let vals = phi.derivatives(x, n)?;
        let br = 1f64.hypot(x);
        for (j, v) in vals.iter().enumerate() {
            d[j] = d[j].max(v.norm() * br.powi(j as i32));
        }
    }
    let c_phi = (0..=n)
        .map(|m| (m..=n).map(|r| binomial(r, m) * d[r - m]).sum::<f64>())
        .fold(0.0, f64::max);
    Ok(1.0 + c_phi * coeffs.abs_moment(n))
}
