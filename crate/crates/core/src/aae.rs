//! Almost-analytic extensions.
//!
//! `f~(x, y) = (sum_{r<=n} f^(r)(x) (iy)^r / r!) sigma(x, y)` with
//! `sigma(x, y) = psi(y / <x>)`. Its d-bar derivative telescopes to
//! `1/2 sigma f^(n+1)(x) (iy)^n / n! + 1/2 T(x, y) (sigma_x + i sigma_y)`
//! where `T` is the Taylor sum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jets::{Bump, Jet};

/// The two cutoff shapes available for `psi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutoffShape {
    /// 1 on `|s| <= 1`, 0 on `|s| >= 2`.
    #[default]
    Standard,
    /// 1 on `|s| <= 1.2`, 0 on `|s| >= 1.8`.
    Alternate,
}

impl CutoffShape {
    pub fn bump(self) -> Bump {
        let (inner, outer) = match self {
            CutoffShape::Standard => (1.0, 2.0),
            CutoffShape::Alternate => (1.2, 1.8),
        };
        Bump::symmetric(inner, outer, 0.0).expect("valid constant bump")
    }
}

/// `(sigma, sigma_x, sigma_y)` at `(x, y)`.
pub fn sigma_field(psi: &Bump, x: f64, y: f64) -> (f64, f64, f64) {
    let br = 1f64.hypot(x);
    let mut d = [0.0; 2];
    psi.eval(y / br, &mut d);
    if d[1] == 0.0 {
        return (d[0], 0.0, 0.0);
    }
    (d[0], d[1] * (-x * y / (br * br * br)), d[1] / br)
}

/// Jet data at one abscissa, reusable for every `y` on that vertical line.
#[derive(Debug, Clone)]
pub struct Column {
    x: f64,
    n: usize,
    /// `f^(r)(x)` for `r <= n`, plus `f^(n+1)(x)` when available.
    derivs: Vec<Complex64>,
}

impl Column {
    pub fn x(&self) -> f64 {
        self.x
    }

    /// `T(x, y) = sum_{r<=n} f^(r)(x) (iy)^r / r!` and the last term
    /// `f^(n+1)(x) (iy)^n / n!` when present.
    fn taylor(&self, y: f64) -> (Complex64, Option<Complex64>) {
        let iy = Complex64::new(0.0, y);
        let mut power = Complex64::new(1.0, 0.0); // (iy)^r / r!
        let mut sum = Complex64::new(0.0, 0.0);
        for r in 0..=self.n {
            if r > 0 {
                power *= iy / r as f64;
            }
            sum += self.derivs[r] * power;
        }
        (sum, self.derivs.get(self.n + 1).map(|d| d * power))
    }

    pub fn f_tilde(&self, psi: &Bump, y: f64) -> Complex64 {
        let (sigma, _, _) = sigma_field(psi, self.x, y);
        if sigma == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.taylor(y).0 * sigma
    }

    pub fn dbar(&self, psi: &Bump, y: f64) -> Result<Complex64> {
        let (sigma, sx, sy) = sigma_field(psi, self.x, y);
        if sigma == 0.0 && sx == 0.0 && sy == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let (t, last) = self.taylor(y);
        let last = last.ok_or(Error::OrderOverflow {
            requested: self.n + 1,
            max: self.n,
        })?;
        let mut out = 0.5 * sigma * last;
        if sx != 0.0 || sy != 0.0 {
            out += 0.5 * t * Complex64::new(sx, sy);
        }
        Ok(out)
    }
}

/// An almost-analytic extension of order `n` of a jet.
#[derive(Debug, Clone)]
pub struct AlmostAnalytic {
    source: Jet,
    n: usize,
    psi: Bump,
}

impl AlmostAnalytic {
    pub fn new(source: Jet, n: usize, shape: CutoffShape) -> Result<Self> {
        Self::with_psi(source, n, shape.bump())
    }

    /// `psi` must be a symmetric plateau bump centred at 0.
    pub fn with_psi(source: Jet, n: usize, psi: Bump) -> Result<Self> {
        source.check_order(n)?;
        let (lo, hi) = psi.support();
        let (plo, phi) = psi.plateau();
        if lo != -hi || plo != -phi || !(plo <= 0.0) {
            return Err(Error::invalid("psi must be a symmetric bump with a plateau around 0"));
        }
        Ok(Self { source, n, psi })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> &Jet {
        &self.source
    }

    pub fn psi(&self) -> &Bump {
        &self.psi
    }

    /// Evaluates the jet once at `x`, with `f^(n+1)` when the jet has it.
    pub fn column(&self, x: f64) -> Result<Column> {
        let upto = if self.source.supports_order(self.n + 1) {
            self.n + 1
        } else {
            self.n
        };
        Ok(Column {
            x,
            n: self.n,
            derivs: self.source.derivatives(x, upto)?,
        })
    }

    pub fn f_tilde(&self, x: f64, y: f64) -> Result<Complex64> {
        Ok(self.column(x)?.f_tilde(&self.psi, y))
    }

    pub fn dbar_f_tilde(&self, x: f64, y: f64) -> Result<Complex64> {
        self.source.check_order(self.n + 1)?;
        self.column(x)?.dbar(&self.psi, y)
    }
}
