//! Smooth functions represented by exact derivative evaluators.
//!
//! A [`Jet`] never differentiates numerically: every function entering the
//! calculus supplies closed-form derivatives up to its `max_order`.

mod bump;
mod catalog;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::binomial;

pub use bump::{Bump, BUMP_MAX_ORDER};
pub use catalog::{make_builtin, Builtin};

/// Where a jet may be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    WholeLine,
    /// `[0, inf)`; evaluation below zero is an error.
    HalfLine,
}

impl Domain {
    pub fn contains(self, x: f64) -> bool {
        match self {
            Domain::WholeLine => x.is_finite(),
            Domain::HalfLine => x.is_finite() && x >= 0.0,
        }
    }

    fn intersect(self, other: Domain) -> Domain {
        if self == Domain::HalfLine || other == Domain::HalfLine {
            Domain::HalfLine
        } else {
            Domain::WholeLine
        }
    }
}

/// Closed-form derivative provider.
///
/// `fill` writes `f^(r)(x)` into `out[r]` for every `r < out.len()`. Callers
/// guarantee `x` is inside the owning jet's domain and `out.len() - 1` does
/// not exceed its maximum order.
pub trait Derivatives: Send + Sync {
    fn fill(&self, x: f64, out: &mut [Complex64]);
}

/// A smooth function together with its derivative evaluator and the decay
/// class it claims: `|f^(r)(x)| <= c_r <x>^(beta - r)`.
#[derive(Clone)]
pub struct Jet {
    kernel: Arc<dyn Derivatives>,
    domain: Domain,
    max_order: Option<usize>,
    beta: f64,
    decay_constants: Option<Vec<f64>>,
    real_valued: bool,
    breakpoints: Vec<f64>,
    label: String,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("max_order", &self.max_order)
            .field("beta", &self.beta)
            .field("real_valued", &self.real_valued)
            .finish()
    }
}

impl Jet {
    /// Wraps a derivative provider. `max_order = None` means unbounded.
    pub fn new(
        kernel: impl Derivatives + 'static,
        domain: Domain,
        max_order: Option<usize>,
        beta: f64,
    ) -> Self {
        Self {
            kernel: Arc::new(kernel),
            domain,
            max_order,
            beta,
            decay_constants: None,
            real_valued: false,
            breakpoints: Vec::new(),
            label: String::from("custom"),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Declares that `f` takes real values on its domain; enables the
    /// conjugate-symmetric integration path.
    pub fn with_real_values(mut self, real: bool) -> Self {
        self.real_valued = real;
        self
    }

    /// Points where the function changes character (bump edges, the
    /// gluing point of an extension). Quadrature seeds subdivisions there.
    pub fn with_breakpoints(mut self, mut points: Vec<f64>) -> Self {
        points.retain(|p| p.is_finite());
        points.sort_by(f64::total_cmp);
        points.dedup();
        self.breakpoints = points;
        self
    }

    pub fn with_decay_constants(mut self, c: Vec<f64>) -> Self {
        self.decay_constants = Some(c);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn max_order(&self) -> Option<usize> {
        self.max_order
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn decay_constants(&self) -> Option<&[f64]> {
        self.decay_constants.as_deref()
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn supports_order(&self, r: usize) -> bool {
        self.max_order.is_none_or(|m| r <= m)
    }

    pub(crate) fn check_order(&self, r: usize) -> Result<()> {
        match self.max_order {
            Some(max) if r > max => Err(Error::OrderOverflow { requested: r, max }),
            _ => Ok(()),
        }
    }

    fn check_point(&self, x: f64) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else if x.is_finite() {
            Err(Error::OutsideDomain { x })
        } else {
            Err(Error::invalid(format!("non-finite evaluation point {x}")))
        }
    }

    /// `f^(r)(x)`.
    pub fn derivative(&self, x: f64, r: usize) -> Result<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); r + 1];
        self.derivatives_into(x, &mut buf)?;
        Ok(buf[r])
    }

    pub fn value(&self, x: f64) -> Result<Complex64> {
        self.derivative(x, 0)
    }

    /// `[f(x), f'(x), ..., f^(upto)(x)]`.
    pub fn derivatives(&self, x: f64, upto: usize) -> Result<Vec<Complex64>> {
        let mut buf = vec![Complex64::new(0.0, 0.0); upto + 1];
        self.derivatives_into(x, &mut buf)?;
        Ok(buf)
    }

    pub fn derivatives_into(&self, x: f64, out: &mut [Complex64]) -> Result<()> {
        if out.is_empty() {
            return Ok(());
        }
        self.check_order(out.len() - 1)?;
        self.check_point(x)?;
        self.kernel.fill(x, out);
        Ok(())
    }

    /// Unchecked evaluation for combinators that have already validated the point.
    pub(crate) fn fill_unchecked(&self, x: f64, out: &mut [Complex64]) {
        self.kernel.fill(x, out);
    }

    /// The same function seen only on `[0, inf)`.
    pub fn restrict_to_half_line(&self) -> Jet {
        let mut out = self.clone();
        out.domain = Domain::HalfLine;
        out.breakpoints.retain(|&p| p >= 0.0);
        out.label = format!("{}|[0,inf)", self.label);
        out
    }

    pub(crate) fn with_domain(mut self, domain: Domain) -> Jet {
        self.domain = domain;
        if domain == Domain::HalfLine {
            self.breakpoints.retain(|&p| p >= 0.0);
        }
        self
    }

    /// Pointwise product, see [`jet_product`].
    pub fn product(&self, other: &Jet) -> Result<Jet> {
        jet_product(self, other)
    }

    /// `sum_i c_i f_i`. All terms must share a domain.
    pub fn linear_combination(terms: &[(Complex64, &Jet)]) -> Result<Jet> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::invalid("empty linear combination"));
        };
        let domain = first.domain;
        if terms.iter().any(|(_, j)| j.domain != domain) {
            return Err(Error::precondition("linear combination of jets on different domains"));
        }
        let max_order = terms.iter().filter_map(|(_, j)| j.max_order).min();
        let beta = terms.iter().map(|(_, j)| j.beta).fold(f64::NEG_INFINITY, f64::max);
        let real = terms.iter().all(|(c, j)| j.real_valued && c.im == 0.0);
        let breakpoints = terms.iter().flat_map(|(_, j)| j.breakpoints.iter().copied()).collect();
        let label = terms
            .iter()
            .map(|(c, j)| format!("({c})*{}", j.label))
            .collect::<Vec<_>>()
            .join(" + ");
        let kernel = LinearCombination {
            terms: terms.iter().map(|(c, j)| (*c, (*j).clone())).collect(),
        };
        Ok(Jet::new(kernel, domain, max_order, beta)
            .with_real_values(real)
            .with_breakpoints(breakpoints)
            .with_label(label))
    }
}

/// The zero function on the given domain.
pub fn zero_jet(domain: Domain) -> Jet {
    Jet::new(Zero, domain, None, -1.0)
        .with_real_values(true)
        .with_decay_constants(vec![0.0; 16])
        .with_label("zero")
}

struct Zero;

impl Derivatives for Zero {
    fn fill(&self, _x: f64, out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
    }
}

struct LinearCombination {
    terms: Vec<(Complex64, Jet)>,
}

impl Derivatives for LinearCombination {
    fn fill(&self, x: f64, out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        let mut buf = vec![Complex64::new(0.0, 0.0); out.len()];
        for (c, jet) in &self.terms {
            jet.fill_unchecked(x, &mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                *o += c * b;
            }
        }
    }
}

/// Pointwise product via the Leibniz rule
/// `(fg)^(r) = sum_m C(r, m) f^(r-m) g^(m)`.
///
/// The domain is the intersection, the maximum order the smaller one, and
/// the decay exponent the sum of the factors' exponents.
pub fn jet_product(f: &Jet, g: &Jet) -> Result<Jet> {
    let domain = f.domain.intersect(g.domain);
    let max_order = match (f.max_order, g.max_order) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    let decay = match (f.decay_constants(), g.decay_constants()) {
        (Some(cf), Some(cg)) => {
            let len = cf.len().min(cg.len());
            Some(
                (0..len)
                    .map(|r| (0..=r).map(|m| binomial(r, m) * cf[r - m] * cg[m]).sum())
                    .collect(),
            )
        }
        _ => None,
    };
    let mut breakpoints: Vec<f64> = f.breakpoints.iter().chain(&g.breakpoints).copied().collect();
    if domain == Domain::HalfLine {
        breakpoints.retain(|&p| p >= 0.0);
    }
    let mut jet = Jet::new(
        Product {
            f: f.clone(),
            g: g.clone(),
        },
        domain,
        max_order,
        f.beta + g.beta,
    )
    .with_real_values(f.real_valued && g.real_valued)
    .with_breakpoints(breakpoints)
    .with_label(format!("({})*({})", f.label, g.label));
    if let Some(d) = decay {
        jet = jet.with_decay_constants(d);
    }
    Ok(jet)
}

struct Product {
    f: Jet,
    g: Jet,
}

impl Derivatives for Product {
    fn fill(&self, x: f64, out: &mut [Complex64]) {
        let n = out.len();
        let mut fd = vec![Complex64::new(0.0, 0.0); n];
        let mut gd = vec![Complex64::new(0.0, 0.0); n];
        self.f.fill_unchecked(x, &mut fd);
        self.g.fill_unchecked(x, &mut gd);
        leibniz(&fd, &gd, out);
    }
}

/// Writes the Leibniz combination of two derivative tables into `out`.
pub(crate) fn leibniz(fd: &[Complex64], gd: &[Complex64], out: &mut [Complex64]) {
    for (r, o) in out.iter_mut().enumerate() {
        *o = (0..=r).map(|m| binomial(r, m) * fd[r - m] * gd[m]).sum();
    }
}

/// `<z> = (1 + |z|^2)^(1/2)`.
pub fn japanese_bracket(z: Complex64) -> f64 {
    1f64.hypot(z.norm())
}
