//! Weighted norms `||f||_n = sum_{r<=n} int |f^(r)(x)| <x>^(r-1) dx` over the
//! whole line or the half line.
//!
//! Each term is integrated on the compactified axis `x = u / (1 - u^2)`, so
//! algebraic tails are integrated rather than truncated.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jets::{Domain, Jet};
use crate::numeric::CompensatedSum;
use crate::quadrature::{integrate, Controls};

/// Integration range of a norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Line {
    Whole,
    Half,
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Line::Whole => "whole",
            Line::Half => "half",
        })
    }
}

impl FromStr for Line {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "whole" => Ok(Line::Whole),
            "half" => Ok(Line::Half),
            other => Err(Error::invalid(format!("line must be `whole` or `half`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormResult {
    pub value: f64,
    pub estimated_error: f64,
    /// `terms[r] = int |f^(r)| <x>^(r-1) dx`
    pub terms: Vec<f64>,
    pub term_errors: Vec<f64>,
}

fn x_of(u: f64) -> f64 {
    u / ((1.0 - u) * (1.0 + u))
}

fn u_of(x: f64) -> f64 {
    2.0 * x / (1.0 + (1.0 + 4.0 * x * x).sqrt())
}

/// Subdivision points in `u` for the requested range, with the jet's
/// breakpoints as interior seeds.
fn seeds(f: &Jet, line: Line) -> Vec<f64> {
    let lo = match line {
        Line::Whole => -1.0,
        Line::Half => 0.0,
    };
    let mut pts = vec![lo, 0.0, 1.0];
    pts.extend(
        f.breakpoints()
            .iter()
            .filter(|&&x| x.is_finite() && (line == Line::Whole || x > 0.0))
            .map(|&x| u_of(x)),
    );
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
    pts.retain(|&u| (lo..=1.0).contains(&u));
    pts
}

fn weighted(f: &Jet, r: usize, x: f64, buf: &mut [Complex64]) -> f64 {
    f.fill_unchecked(x, buf);
    buf[r].norm() * 1f64.hypot(x).powi(r as i32 - 1)
}

/// Rejects terms whose integrand `|x| |f^(r)| <x>^(r-1)` fails to decay
/// between `|x| = 1e4` and `|x| = 1e8`.
fn check_tail(f: &Jet, r: usize, line: Line) -> Result<()> {
    let mut buf = vec![Complex64::new(0.0, 0.0); r + 1];
    let signs: &[f64] = match line {
        Line::Whole => &[1.0, -1.0],
        Line::Half => &[1.0],
    };
    for &sg in signs {
        let near = 1e4 * weighted(f, r, sg * 1e4, &mut buf);
        let far = 1e8 * weighted(f, r, sg * 1e8, &mut buf);
        if !near.is_finite() || !far.is_finite() {
            return Err(Error::Divergent(format!("order-{r} term is not finite in the tail")));
        }
        if far > 0.5 * near && far > 0.0 {
            return Err(Error::Divergent(format!(
                "order-{r} term does not decay: |x| |f^({r})| <x>^{} is {near:e} at 1e4 and {far:e} at 1e8",
                r as i64 - 1
            )));
        }
    }
    Ok(())
}

/// `int |f^(r)(x)| <x>^(r-1) dx` over the given range.
pub fn weighted_term(f: &Jet, r: usize, line: Line, controls: Controls) -> Result<(f64, f64)> {
    f.check_order(r)?;
    if line == Line::Whole && f.domain() == Domain::HalfLine {
        return Err(Error::precondition(
            "a half-line jet has no whole-line norm; extend it first",
        ));
    }
    check_tail(f, r, line)?;
    let integrand = |u: f64| {
        let mut buf = [Complex64::new(0.0, 0.0); 64];
        let x = x_of(u);
        // a node rounded onto u = +-1; the integrand is at most integrably singular there
        if !x.is_finite() {
            return 0.0;
        }
        let one_minus = (1.0 - u) * (1.0 + u);
        let jac = (1.0 + u * u) / (one_minus * one_minus);
        let w = if r < buf.len() {
            weighted(f, r, x, &mut buf[..=r])
        } else {
            let mut v = vec![Complex64::new(0.0, 0.0); r + 1];
            weighted(f, r, x, &mut v)
        };
        if w == 0.0 {
            0.0
        } else {
            w * jac
        }
    };
    let res = integrate(integrand, &seeds(f, line), controls)?;
    Ok((res.value, res.error))
}

/// The order-`n` weighted norm, with total error at most `tol`.
///
/// Term `r` receives the budget `tol / 2^(r+1)`, so each term is computed
/// identically for every `n >= r`.
pub fn an_norm(f: &Jet, n: usize, line: Line, tol: f64) -> Result<NormResult> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    f.check_order(n)?;
    let mut terms = Vec::with_capacity(n + 1);
    let mut errors = Vec::with_capacity(n + 1);
    for r in 0..=n {
        let budget = tol * 0.5f64.powi(r as i32 + 1);
        let (v, e) = weighted_term(f, r, line, Controls::absolute(budget))?;
        terms.push(v);
        errors.push(e);
    }
    Ok(NormResult {
        value: terms.iter().copied().collect::<CompensatedSum>().value(),
        estimated_error: errors.iter().sum(),
        terms,
        term_errors: errors,
    })
}
