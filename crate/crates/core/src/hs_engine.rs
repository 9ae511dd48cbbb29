//! `f(H) = -(1/pi) int int dbar f~(x, y) (z - H)^{-1} dx dy` for square
//! matrices with real spectrum, and the half-line calculus obtained by
//! extending `f` from `[0, inf)` first.
//!
//! The integration runs in coordinates `x = sinh u`, `y = s cosh u` (so that
//! `<x> = cosh u` and the support of the cutoff is `|s| < 2`) with
//! `u = L atanh v`, mapping the whole plane region onto `(-1, 1) x [-2, 2]`.
//! The strip `|s| < y_floor` around the real axis is skipped and its
//! contribution bounded through the resolvent growth estimate.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::aae::{AlmostAnalytic, CutoffShape};
use crate::error::{Error, Result};
use crate::jets::{Bump, Domain, Jet};
use crate::linalg::{self, CMatrix};
use crate::norms::{weighted_term, Line};
use crate::quadrature::{integrate_2d, Controls, Controls2d, MatrixField, Rect};
use crate::seeley::{default_cutoff, make_seeley_coefficients, seeley_extend};

/// Constants of the resolvent bound
/// `||(z - H)^{-1}|| <= c |Im z|^{-1} (<z> / |Im z|)^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthEstimate {
    pub c: f64,
    pub alpha: f64,
}

/// Tolerance used when checking a claimed spectral floor.
pub const SPECTRUM_SLACK: f64 = 1e-9;

/// A square complex matrix with optional spectral metadata.
#[derive(Debug, Clone)]
pub struct OperatorHandle {
    entries: CMatrix,
    spectral_floor: Option<f64>,
    growth: Option<GrowthEstimate>,
    eigenvalues: Vec<Complex64>,
}

impl OperatorHandle {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::invalid(format!(
                "operator must be a non-empty square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("operator entries must be finite"));
        }
        let eigenvalues = linalg::eigenvalues(&entries)?;
        Ok(Self {
            entries,
            spectral_floor: None,
            growth: None,
            eigenvalues,
        })
    }

    /// Builds a real matrix from rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("rows must form a square matrix"));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        Self::new(CMatrix::from_fn(n, n, |i, j| {
            Complex64::new(if i == j { values[i] } else { 0.0 }, 0.0)
        }))
    }

    /// Records a lower bound for the spectrum after checking every
    /// eigenvalue is real (within [`SPECTRUM_SLACK`]) and not below it.
    pub fn with_spectral_floor(mut self, floor: f64) -> Result<Self> {
        for lam in &self.eigenvalues {
            let slack = SPECTRUM_SLACK * lam.norm().max(1.0);
            if lam.im.abs() > slack || lam.re < floor - slack {
                return Err(Error::precondition(format!(
                    "eigenvalue {lam} violates the claimed spectral floor {floor}"
                )));
            }
        }
        self.spectral_floor = Some(floor);
        Ok(self)
    }

    pub fn with_growth(mut self, growth: GrowthEstimate) -> Self {
        self.growth = Some(growth);
        self
    }

    /// Fits the growth constants on the default sample grid.
    pub fn with_fitted_growth(self) -> Result<Self> {
        let grid = crate::oracle::default_grid(&self);
        let g = crate::oracle::estimate_growth(&self, &grid)?;
        Ok(self.with_growth(g))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn spectral_floor(&self) -> Option<f64> {
        self.spectral_floor
    }

    pub fn growth(&self) -> Option<GrowthEstimate> {
        self.growth
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }
}

/// `(zI - H)^{-1}`, refused near the spectrum.
pub fn resolvent(h: &OperatorHandle, z: Complex64) -> Result<CMatrix> {
    linalg::resolvent(h.entries(), z)
}

/// Controls for the plane quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Target absolute error of the result in the Frobenius norm.
    pub tol: f64,
    /// Taylor order of the almost-analytic extension.
    pub n: usize,
    pub max_depth: u32,
    /// Largest half-width of the skipped strip, in units of `<x>`. It is
    /// narrowed further when the strip bound would exceed a tenth of `tol`.
    pub y_floor: f64,
    /// Extra subdivision seeds are placed at `+-x_margin * max(1, rho(H))`.
    pub x_margin: f64,
    pub max_cells: usize,
    pub cutoff: CutoffShape,
}

impl QuadratureConfig {
    pub fn new(tol: f64, n: usize) -> Self {
        Self {
            tol,
            n,
            max_depth: 40,
            y_floor: 1e-10,
            x_margin: 4.0,
            max_cells: 400_000,
            cutoff: CutoffShape::Standard,
        }
    }

    pub fn with_cutoff(mut self, cutoff: CutoffShape) -> Self {
        self.cutoff = cutoff;
        self
    }
}

/// `ceil(alpha) + 1`.
pub fn choose_taylor_order(g: &GrowthEstimate) -> usize {
    g.alpha.ceil() as usize + 1
}

/// Result of the plane quadrature with diagnostics.
#[derive(Debug, Clone)]
pub struct HsOutput {
    pub matrix: CMatrix,
    pub estimated_error: f64,
    /// Bound on the skipped strip around the real axis, included in
    /// `estimated_error`.
    pub strip_bound: f64,
    /// Strip half-width actually used.
    pub y_floor: f64,
    pub cells: usize,
    pub resolvent_evaluations: usize,
}

struct HsField<'a> {
    aa: &'a AlmostAnalytic,
    psi: Bump,
    h: &'a CMatrix,
    scale: f64,
}

impl MatrixField for HsField<'_> {
    fn dim(&self) -> usize {
        self.h.nrows()
    }

    fn column(&self, v: f64, s: &[f64; 15], out: &mut [Option<DMatrix<Complex64>>]) -> Result<()> {
        let u = self.scale * v.atanh();
        // cosh u overflows past ~710; the integrand has long underflowed there
        if !(u.abs() < 700.0) {
            return Ok(());
        }
        let (x, ch) = (u.sinh(), u.cosh());
        let col = self.aa.column(x)?;
        let jac = self.scale / ((1.0 - v) * (1.0 + v));
        for (o, &sj) in out.iter_mut().zip(s) {
            let y = sj * ch;
            let w = col.dbar(&self.psi, y)?;
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            let factor = w * ch * jac * ch * (-1.0 / PI);
            if !(factor.re.is_finite() && factor.im.is_finite()) {
                return Err(Error::Divergent(format!(
                    "integrand is not finite at x = {x}, y = {y}"
                )));
            }
            let z = Complex64::new(x, y);
            let r = linalg::resolvent_unchecked(self.h, z).ok_or(Error::Singular {
                re: x,
                im: y,
                condition: f64::INFINITY,
            })?;
            *o = Some(r * factor);
        }
        Ok(())
    }
}

fn v_seeds(f: &Jet, h: &OperatorHandle, cfg: &QuadratureConfig, scale: f64) -> Vec<f64> {
    let reach = cfg.x_margin * h.spectral_radius().max(1.0);
    let mut xs: Vec<f64> = vec![0.0, reach, -reach];
    xs.extend(f.breakpoints().iter().copied());
    xs.extend(h.eigenvalues().iter().map(|l| l.re));
    let mut vs: Vec<f64> = xs
        .into_iter()
        .filter(|x| x.is_finite())
        .map(|x| (x.asinh() / scale).tanh())
        .filter(|v| v.abs() < 1.0 - 1e-12)
        .collect();
    vs.push(-1.0);
    vs.push(1.0);
    vs.sort_by(f64::total_cmp);
    vs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    vs
}

fn s_seeds(psi: &Bump, floor: f64, both_sides: bool) -> Vec<(f64, f64)> {
    let (_, plateau) = psi.plateau();
    let (_, support) = psi.support();
    let mut out = vec![(floor, plateau), (plateau, support)];
    if both_sides {
        out.extend([(-plateau, -floor), (-support, -plateau)]);
    }
    out
}

/// Bound on the part of the integral over `|y| < y_floor <x>`:
/// on that strip `dbar f~ = f^(n+1) (iy)^n / (2 n!)` and the resolvent obeys
/// the growth bound, giving
/// `sqrt(d) c y_floor^(n-alpha) (1+y_floor^2)^(alpha/2) / (pi n! (n-alpha))
///  * int |f^(n+1)| <x>^n dx`.
///
/// Returns the strip width and its bound, narrowing `cfg.y_floor` until the
/// bound is at most `tol / 10`.
fn strip_bound(f: &Jet, h: &OperatorHandle, g: GrowthEstimate, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let n = cfg.n;
    let gap = n as f64 - g.alpha;
    let controls = Controls {
        abs_tol: 0.0,
        rel_tol: 1e-2,
        max_intervals: 20_000,
    };
    let (t, t_err) = weighted_term(f, n + 1, Line::Whole, controls)?;
    let mut fact = 1.0;
    for k in 2..=n {
        fact *= k as f64;
    }
    let bound = |yf: f64| {
        (h.dim() as f64).sqrt() * g.c * yf.powf(gap) * (1.0 + yf * yf).powf(g.alpha / 2.0)
            / (PI * fact * gap)
            * (t + t_err)
    };
    let target = cfg.tol / 10.0;
    let mut yf = cfg.y_floor;
    let mut b = bound(yf);
    if b > target {
        yf *= (target / b).powf(1.0 / gap);
        b = bound(yf);
        if !(yf > 0.0) || b > target * (1.0 + 1e-9) {
            return Err(Error::NonConvergence {
                estimate: b,
                tol: cfg.tol,
                cells: 0,
            });
        }
    }
    Ok((yf, b))
}

/// The matrix `f(H)` for a whole-line jet.
pub fn hs_apply(f: &Jet, h: &OperatorHandle, cfg: &QuadratureConfig) -> Result<CMatrix> {
    hs_apply_detailed(f, h, cfg).map(|o| o.matrix)
}

pub fn hs_apply_detailed(f: &Jet, h: &OperatorHandle, cfg: &QuadratureConfig) -> Result<HsOutput> {
    if f.domain() != Domain::WholeLine {
        return Err(Error::precondition(
            "hs_apply needs a whole-line jet; extend half-line functions first",
        ));
    }
    if !(f.beta() < 0.0) {
        return Err(Error::precondition(format!(
            "decay exponent must be negative, got {}",
            f.beta()
        )));
    }
    if !(cfg.tol > 0.0) || !(cfg.y_floor > 0.0 && cfg.y_floor < 1.0) {
        return Err(Error::invalid("tolerance must be positive and y_floor in (0, 1)"));
    }
    f.check_order(cfg.n + 1)?;
    let g = h
        .growth()
        .ok_or_else(|| Error::precondition("operator has no growth estimate"))?;
    if !(cfg.n as f64 > g.alpha) {
        return Err(Error::precondition(format!(
            "Taylor order {} must exceed the growth exponent {}",
            cfg.n, g.alpha
        )));
    }

    let (y_floor, strip) = strip_bound(f, h, g, cfg)?;
    let aa = AlmostAnalytic::new(f.clone(), cfg.n, cfg.cutoff)?;
    let psi = cfg.cutoff.bump();
    // makes the far-field integrand vanish like (1 - |v|)^1 at v = +-1
    let scale = (4.0 / f.beta().abs()).clamp(1.0, 40.0);
    let field = HsField {
        aa: &aa,
        psi,
        h: h.entries(),
        scale,
    };
    let conjugate_symmetric = f.is_real_valued() && h.is_real();
    let vs = v_seeds(f, h, cfg, scale);
    let ss = s_seeds(&psi, y_floor, !conjugate_symmetric);
    let rects: Vec<Rect> = vs
        .windows(2)
        .flat_map(|w| {
            ss.iter().map(move |&(s0, s1)| Rect {
                v0: w[0],
                v1: w[1],
                s0,
                s1,
            })
        })
        .collect();

    // the half-plane integral carries half of the strip bound and half of the budget
    let share = if conjugate_symmetric { 0.5 } else { 1.0 };
    let controls = Controls2d {
        tol: cfg.tol * share,
        fixed_error: strip * share,
        max_depth: cfg.max_depth,
        max_cells: cfg.max_cells,
    };
    let res = integrate_2d(&field, &rects, controls).map_err(|e| match e {
        Error::NonConvergence { estimate, cells, .. } => Error::NonConvergence {
            estimate: estimate / share,
            tol: cfg.tol,
            cells,
        },
        other => other,
    })?;
    let matrix = if conjugate_symmetric {
        res.value.map(|z| Complex64::new(2.0 * z.re, 0.0))
    } else {
        res.value
    };
    Ok(HsOutput {
        matrix,
        estimated_error: res.error / share,
        strip_bound: strip,
        y_floor,
        cells: res.cells,
        resolvent_evaluations: res.evaluations,
    })
}

/// The half-line calculus: extend `f` with `K` moment conditions and the
/// default extension cutoff, then apply the plane quadrature.
pub fn gamma_apply(f: &Jet, h: &OperatorHandle, cfg: &QuadratureConfig, k: usize) -> Result<CMatrix> {
    gamma_apply_with_cutoff(f, h, cfg, k, &default_cutoff()).map(|o| o.matrix)
}

pub fn gamma_apply_with_cutoff(
    f: &Jet,
    h: &OperatorHandle,
    cfg: &QuadratureConfig,
    k: usize,
    phi: &Jet,
) -> Result<HsOutput> {
    match h.spectral_floor() {
        Some(floor) if floor >= 0.0 => {}
        Some(floor) => {
            return Err(Error::precondition(format!(
                "spectral floor {floor} is negative"
            )))
        }
        None => return Err(Error::precondition("operator has no spectral floor")),
    }
    if f.domain() != Domain::HalfLine {
        return Err(Error::precondition("gamma_apply expects a half-line jet"));
    }
    if k < cfg.n + 2 {
        return Err(Error::precondition(format!(
            "truncation K = {k} must be at least n + 2 = {}",
            cfg.n + 2
        )));
    }
    if !(f.beta() < 0.0) {
        return Err(Error::precondition(format!(
            "decay exponent must be negative, got {}",
            f.beta()
        )));
    }
    let coeffs = make_seeley_coefficients(k)?;
    let extended = seeley_extend(f, phi, &coeffs)?;
    hs_apply_detailed(&extended, h, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_order_rule() {
        let g = |alpha| GrowthEstimate { c: 1.0, alpha };
        assert_eq!(choose_taylor_order(&g(0.0)), 1);
        assert_eq!(choose_taylor_order(&g(1.0)), 2);
        assert_eq!(choose_taylor_order(&g(2.5)), 4);
        assert_eq!(choose_taylor_order(&g(0.25)), 2);
    }

    #[test]
    fn handle_validation() {
        assert!(OperatorHandle::new(CMatrix::zeros(2, 3)).is_err());
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(OperatorHandle::new(m).is_err());
        let d = OperatorHandle::diagonal(&[0.0, 1.0]).unwrap();
        assert!(d.clone().with_spectral_floor(0.0).is_ok());
        assert!(d.clone().with_spectral_floor(0.5).is_err());
        let rot = OperatorHandle::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        assert!(rot.with_spectral_floor(-5.0).is_err());
    }

    #[test]
    fn resolvent_through_handle() {
        let d = OperatorHandle::diagonal(&[0.0, 1.0]).unwrap();
        let r = resolvent(&d, Complex64::new(0.0, 1.0)).unwrap();
        assert!((r[(1, 1)] - Complex64::new(-0.5, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn seeds_cover_the_line() {
        let d = OperatorHandle::diagonal(&[0.0, 1.0]).unwrap();
        let f = crate::jets::make_builtin(&crate::jets::Builtin::bump(1.0, 2.0), Domain::WholeLine).unwrap();
        let vs = v_seeds(&f, &d, &QuadratureConfig::new(1e-6, 1), 4.0);
        assert_eq!(vs[0], -1.0);
        assert_eq!(*vs.last().unwrap(), 1.0);
        assert!(vs.windows(2).all(|w| w[0] < w[1]));
        assert!(vs.contains(&0.0));
    }
}
