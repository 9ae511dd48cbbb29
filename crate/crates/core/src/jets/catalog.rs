//! Builtin function catalog and its `name:key=value,...` spec strings.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::bump::Bump;
use super::{zero_jet, Derivatives, Domain, Jet};
use crate::error::{Error, Result};

/// Highest derivative order of the `bracket` builtin.
pub const BRACKET_MAX_ORDER: usize = 24;

/// Number of decay constants `c_r` tabulated for builtins.
const DECAY_TABLE_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// `g_z(x) = (z - x)^-1`.
    Gz { z: Complex64 },
    /// `<x>^beta`.
    Bracket { beta: f64 },
    /// `exp(-t x)` on the half-line.
    Exp { t: f64 },
    /// Plateau `|x - center| <= inner`, support `|x - center| < outer`.
    Bump { inner: f64, outer: f64, center: f64 },
    Zero,
}

impl Builtin {
    pub fn bump(inner: f64, outer: f64) -> Self {
        Builtin::Bump {
            inner,
            outer,
            center: 0.0,
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Builtin::Gz { z } => write!(f, "gz:re={},im={}", z.re, z.im),
            Builtin::Bracket { beta } => write!(f, "bracket:beta={beta}"),
            Builtin::Exp { t } => write!(f, "exp:t={t}"),
            Builtin::Bump {
                inner,
                outer,
                center,
            } => {
                write!(f, "bump:inner={inner},outer={outer}")?;
                if center != 0.0 {
                    write!(f, ",center={center}")?;
                }
                Ok(())
            }
            Builtin::Zero => f.write_str("zero"),
        }
    }
}

struct Params<'a> {
    name: &'a str,
    pairs: Vec<(&'a str, f64)>,
}

impl<'a> Params<'a> {
    fn parse(name: &'a str, body: &'a str) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("`{item}` is not key=value in `{name}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("`{v}` is not a number in `{name}`")))?;
            pairs.push((k.trim(), v));
        }
        Ok(Self { name, pairs })
    }

    fn take(&mut self, key: &str) -> Option<f64> {
        let idx = self.pairs.iter().position(|(k, _)| *k == key)?;
        Some(self.pairs.remove(idx).1)
    }

    fn require(&mut self, key: &str) -> Result<f64> {
        self.take(key)
            .ok_or_else(|| Error::Parse(format!("`{}` needs `{key}=`", self.name)))
    }

    fn finish(self) -> Result<()> {
        match self.pairs.first() {
            Some((k, _)) => Err(Error::Parse(format!("unexpected key `{k}` for `{}`", self.name))),
            None => Ok(()),
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, body) = s.split_once(':').unwrap_or((s, ""));
        let mut p = Params::parse(name, body)?;
        let out = match name {
            "gz" => {
                let re = p.require("re")?;
                let im = p.require("im")?;
                Builtin::Gz {
                    z: Complex64::new(re, im),
                }
            }
            "bracket" => Builtin::Bracket {
                beta: p.require("beta")?,
            },
            "exp" => Builtin::Exp { t: p.require("t")? },
            "bump" => Builtin::Bump {
                inner: p.require("inner")?,
                outer: p.require("outer")?,
                center: p.take("center").unwrap_or(0.0),
            },
            "zero" => Builtin::Zero,
            other => return Err(Error::UnknownBuiltin(other.to_string())),
        };
        p.finish()?;
        Ok(out)
    }
}

/// Builds a catalog jet on the requested domain.
pub fn make_builtin(spec: &Builtin, domain: Domain) -> Result<Jet> {
    let jet = match *spec {
        Builtin::Gz { z } => gz(z, domain)?,
        Builtin::Bracket { beta } => bracket(beta, domain)?,
        Builtin::Exp { t } => exp_decay(t, domain)?,
        Builtin::Bump {
            inner,
            outer,
            center,
        } => {
            let jet = Bump::symmetric(inner, outer, center)?.jet();
            match domain {
                Domain::WholeLine => jet,
                Domain::HalfLine => jet.restrict_to_half_line(),
            }
        }
        Builtin::Zero => zero_jet(domain),
    };
    Ok(jet.with_label(spec.to_string()))
}

fn gz(z: Complex64, domain: Domain) -> Result<Jet> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::invalid("gz needs a finite z"));
    }
    // distance from z to the domain
    let dist = match domain {
        Domain::WholeLine => z.im.abs(),
        Domain::HalfLine if z.re < 0.0 => z.norm(),
        Domain::HalfLine => z.im.abs(),
    };
    if dist == 0.0 {
        return Err(Error::invalid(format!(
            "gz pole z = {z} lies on the {} domain",
            match domain {
                Domain::WholeLine => "real line",
                Domain::HalfLine => "half-line",
            }
        )));
    }
    // <x>/|z - x| <= (1 + |z|)/dist + 1 on the domain
    let kappa = (1.0 + z.norm()) / dist + 1.0;
    let mut fact = 1.0;
    let decay = (0..DECAY_TABLE_LEN)
        .map(|r| {
            if r > 0 {
                fact *= r as f64;
            }
            fact * kappa.powi(r as i32 + 1)
        })
        .collect();
    Ok(Jet::new(Resolvent { z }, domain, None, -1.0)
        .with_real_values(z.im == 0.0)
        .with_decay_constants(decay))
}

struct Resolvent {
    z: Complex64,
}

impl Derivatives for Resolvent {
    fn fill(&self, x: f64, out: &mut [Complex64]) {
        // g^(r)(x) = r! (z - x)^-(r+1)
        let q = reciprocal(self.z - x);
        let mut acc = q;
        for (r, o) in out.iter_mut().enumerate() {
            if r > 0 {
                acc *= q * r as f64;
            }
            *o = acc;
        }
    }
}

/// `1 / a` without squaring `|a|`, so it stays accurate for `|a|` near the
/// overflow threshold.
fn reciprocal(a: Complex64) -> Complex64 {
    if a.re.abs() >= a.im.abs() {
        let r = a.im / a.re;
        let d = a.re + a.im * r;
        Complex64::new(1.0 / d, -r / d)
    } else {
        let r = a.re / a.im;
        let d = a.re * r + a.im;
        Complex64::new(r / d, -1.0 / d)
    }
}

fn bracket(beta: f64, domain: Domain) -> Result<Jet> {
    if !beta.is_finite() {
        return Err(Error::invalid("bracket needs a finite beta"));
    }
    let polys = bracket_polynomials(beta, BRACKET_MAX_ORDER);
    let decay = polys
        .iter()
        .take(DECAY_TABLE_LEN)
        .map(|p| p.iter().map(|c| c.abs()).sum())
        .collect();
    Ok(Jet::new(
        BracketPower { beta, polys },
        domain,
        Some(BRACKET_MAX_ORDER),
        beta,
    )
    .with_real_values(true)
    .with_decay_constants(decay))
}

/// `p_r` with `d^r/dx^r <x>^beta = p_r(x) <x>^(beta - 2r)`, via
/// `p_{r+1} = (1 + x^2) p_r' + (beta - 2r) x p_r`. Lowest power first.
pub(crate) fn bracket_polynomials(beta: f64, max_order: usize) -> Vec<Vec<f64>> {
    let mut polys = vec![vec![1.0]];
    for r in 0..max_order {
        let p = &polys[r];
        let mut next = vec![0.0; p.len() + 1];
        for k in 0..next.len() {
            let mut c = 0.0;
            // (1 + x^2) p'
            if k + 1 < p.len() {
                c += (k + 1) as f64 * p[k + 1];
            }
            if k >= 1 && k - 1 < p.len() {
                c += (k - 1) as f64 * p[k - 1];
                c += (beta - 2.0 * r as f64) * p[k - 1];
            }
            next[k] = c;
        }
        polys.push(next);
    }
    polys
}

struct BracketPower {
    beta: f64,
    polys: Vec<Vec<f64>>,
}

impl Derivatives for BracketPower {
    fn fill(&self, x: f64, out: &mut [Complex64]) {
        // p_r(x) <x>^(beta-2r) = [sum_j c_j t^j w^(r-j)] <x>^(beta-r), t = x/<x>, w = 1/<x>
        let br = 1f64.hypot(x);
        let t = x / br;
        let w = 1.0 / br;
        for (r, o) in out.iter_mut().enumerate() {
            let p = &self.polys[r];
            let mut acc = 0.0;
            let mut tp = 1.0;
            for (j, &c) in p.iter().enumerate() {
                if c != 0.0 {
                    acc += c * tp * w.powi((r - j) as i32);
                }
                tp *= t;
            }
            *o = Complex64::new(acc * br.powf(self.beta - r as f64), 0.0);
        }
    }
}

fn exp_decay(t: f64, domain: Domain) -> Result<Jet> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("exp needs t > 0, got {t}")));
    }
    if domain != Domain::HalfLine {
        return Err(Error::invalid("exp(-t x) is only available on the half-line"));
    }
    // sup_{x>=0} t^r e^{-tx} (1+x)^(r+1)
    let decay = (0..DECAY_TABLE_LEN)
        .map(|r| {
            let m = (r + 1) as f64;
            let peak = if m / t >= 1.0 {
                (t - m).exp() * (m / t).powf(m)
            } else {
                1.0
            };
            t.powi(r as i32) * peak.max(1.0)
        })
        .collect();
    Ok(Jet::new(ExpDecay { t }, domain, None, -1.0)
        .with_real_values(true)
        .with_decay_constants(decay))
}

struct ExpDecay {
    t: f64,
}

impl Derivatives for ExpDecay {
    fn fill(&self, x: f64, out: &mut [Complex64]) {
        let mut v = (-self.t * x).exp();
        for o in out.iter_mut() {
            *o = Complex64::new(v, 0.0);
            v *= -self.t;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn catalog_examples() {
        let gi = make_builtin(&Builtin::Gz { z: c(0.0, 1.0) }, Domain::WholeLine).unwrap();
        assert!((gi.derivative(0.0, 0).unwrap() - c(0.0, -1.0)).norm() < 1e-15);
        assert!((gi.derivative(0.0, 1).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);

        let b = make_builtin(&Builtin::Bracket { beta: -1.0 }, Domain::WholeLine).unwrap();
        assert_eq!(b.derivative(0.0, 0).unwrap(), c(1.0, 0.0));
        let d = b.derivative(1.0, 1).unwrap();
        assert!((d.re + 2f64.powf(-1.5)).abs() < 1e-15);
        assert!((b.derivative(0.0, 2).unwrap().re + 1.0).abs() < 1e-15);

        let e = make_builtin(&Builtin::Exp { t: 1.0 }, Domain::HalfLine).unwrap();
        assert_eq!(e.derivative(0.0, 3).unwrap(), c(-1.0, 0.0));
    }

    #[test]
    fn catalog_errors() {
        assert!(matches!("sinc".parse::<Builtin>(), Err(Error::UnknownBuiltin(_))));
        let bad_exp = make_builtin(&Builtin::Exp { t: 0.0 }, Domain::HalfLine);
        assert!(matches!(bad_exp, Err(Error::InvalidParameter(_))));
        assert!(make_builtin(&Builtin::Exp { t: -1.0 }, Domain::HalfLine).is_err());
        assert!(make_builtin(&Builtin::Exp { t: 1.0 }, Domain::WholeLine).is_err());
        assert!(make_builtin(&Builtin::Gz { z: c(2.0, 0.0) }, Domain::WholeLine).is_err());
        assert!(make_builtin(&Builtin::Gz { z: c(2.0, 0.0) }, Domain::HalfLine).is_err());
        assert!(make_builtin(&Builtin::Gz { z: c(-2.0, 0.0) }, Domain::HalfLine).is_ok());
        assert!(make_builtin(&Builtin::bump(2.0, 1.0), Domain::WholeLine).is_err());
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in [
            "gz:re=0,im=2",
            "bracket:beta=-1",
            "exp:t=1.5",
            "bump:inner=1,outer=2",
            "bump:inner=0.25,outer=0.5,center=-2.5",
            "zero",
        ] {
            let b: Builtin = s.parse().unwrap();
            assert_eq!(b.to_string(), s);
        }
        assert!("gz:re=1".parse::<Builtin>().is_err());
        assert!("exp:t=1,k=2".parse::<Builtin>().is_err());
        assert!("bracket:beta=abc".parse::<Builtin>().is_err());
    }

    #[test]
    fn bracket_polynomials_low_orders() {
        let p = bracket_polynomials(-1.0, 3);
        assert_eq!(p[1], vec![0.0, -1.0]);
        assert_eq!(p[2], vec![-1.0, 0.0, 2.0]);
        assert_eq!(p[3], vec![0.0, 9.0, 0.0, -6.0]);
    }

    #[test]
    fn resolvent_far_out() {
        let f = make_builtin(&Builtin::Gz { z: Complex64::new(1.0, 1.0) }, Domain::WholeLine).unwrap();
        for x in [1e155, -1e200, 1e300] {
            let v = f.value(x).unwrap();
            assert!((v.re + 1.0 / x).abs() <= 1e-15 / x.abs(), "{x}: {v}");
        }
        assert_eq!(reciprocal(Complex64::new(0.0, 2.0)), Complex64::new(0.0, -0.5));
    }

    #[test]
    fn bracket_stays_finite_far_out() {
        let b = make_builtin(&Builtin::Bracket { beta: -1.0 }, Domain::WholeLine).unwrap();
        let d = b.derivatives(1e150, 6).unwrap();
        assert!(d.iter().all(|v| v.re.is_finite()));
        assert!((d[0].re - 1e-150).abs() < 1e-163);
    }
}
