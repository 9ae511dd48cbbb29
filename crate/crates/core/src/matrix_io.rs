//! Plain-text matrix format.
//!
//! Line 1 holds the dimension `n`; each of the next `n` lines holds `n`
//! whitespace-separated entries `re,im` (a bare `re` is read as real).
//! Numbers are written in the shortest form that parses back to the same
//! `f64`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Shortest round-trippable decimal, in exponent form outside `[1e-5, 1e16)`.
pub fn format_real(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn format_complex(z: Complex64) -> String {
    format!("{},{}", format_real(z.re), format_real(z.im))
}

pub fn format_matrix(m: &CMatrix) -> String {
    let mut out = format!("{}\n", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_complex(m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn parse_number(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}: `{tok}` is not a number")))
}

fn parse_entry(tok: &str, line: usize) -> Result<Complex64> {
    match tok.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse_number(re, line)?, parse_number(im, line)?)),
        None => Ok(Complex64::new(parse_number(tok, line)?, 0.0)),
    }
}

pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (first, head) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let n: usize = head
        .parse()
        .map_err(|_| Error::Parse(format!("line {first}: expected the dimension, got `{head}`")))?;
    if n == 0 {
        return Err(Error::Parse("dimension must be positive".into()));
    }
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        let (ln, row) = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {n} rows, found {i}")))?;
        let toks: Vec<&str> = row.split_whitespace().collect();
        if toks.len() != n {
            return Err(Error::Parse(format!(
                "line {ln}: expected {n} entries, found {}",
                toks.len()
            )));
        }
        for (j, tok) in toks.iter().enumerate() {
            m[(i, j)] = parse_entry(tok, ln)?;
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse(format!("line {ln}: trailing content after {n} rows")));
    }
    Ok(m)
}
