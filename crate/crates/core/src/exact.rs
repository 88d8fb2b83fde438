//! Exact rational counterparts of the interaction formulas.
//!
//! Every interaction amplitude is `pi` times a rational function of the box
//! lengths, so with rational lengths the factor `pi` can be carried as a
//! formal unit and everything else computed exactly. Values returned here are
//! the coefficient of `pi` (or of `pi^2` for determinants of two amplitudes).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_basis::{DomainSpec, Frequency, ModeIndex};

pub type Rational = BigRational;
pub type RVec = [Rational; 3];

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero_vec() -> RVec {
    [Rational::zero(), Rational::zero(), Rational::zero()]
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"3"`, `"-1.25"`, `"2.5e-3"` or `"7/5"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a decimal or fraction: {text:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(at) => (&s[..at], s[at + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{whole}{frac}");
    let mut value =
        Rational::from_integer(BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?);
    let shift = exponent - frac.len() as i32;
    let ten = int(10);
    if shift >= 0 {
        value *= num_traits::pow(ten, shift as usize);
    } else {
        value /= num_traits::pow(ten, (-shift) as usize);
    }
    Ok(if negative { -value } else { value })
}

/// Box lengths held exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactDomain {
    lengths: [Rational; 3],
}

impl ExactDomain {
    pub fn new(lengths: [Rational; 3]) -> Result<Self> {
        if lengths.iter().any(|l| !l.is_positive()) {
            return Err(Error::InvalidDomain("lengths must be positive".into()));
        }
        Ok(Self { lengths })
    }

    /// Parses comma separated lengths such as `"1,2,3"` or `"7/5,11/3,2"`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected three lengths, got {text:?}")));
        }
        Self::new([parse_rational(parts[0])?, parse_rational(parts[1])?, parse_rational(parts[2])?])
    }

    pub fn from_integers(l: [i64; 3]) -> Self {
        Self { lengths: [int(l[0]), int(l[1]), int(l[2])] }
    }

    pub fn lengths(&self) -> &[Rational; 3] {
        &self.lengths
    }

    pub fn length(&self, axis: usize) -> &Rational {
        &self.lengths[axis]
    }

    /// Nearest floating point domain with the given viscosity.
    pub fn to_domain(&self, nu: f64) -> Result<DomainSpec> {
        DomainSpec::new([to_f64(&self.lengths[0]), to_f64(&self.lengths[1]), to_f64(&self.lengths[2])], nu)
    }

    /// The same box with axes relabelled: new axis `a` is old axis `perm[a]`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        Self { lengths: [self.lengths[perm[0]].clone(), self.lengths[perm[1]].clone(), self.lengths[perm[2]].clone()] }
    }

    /// `k^L` exactly.
    pub fn scaled(&self, k: Frequency) -> RVec {
        [
            int(i64::from(k.get(0))) / &self.lengths[0],
            int(i64::from(k.get(1))) / &self.lengths[1],
            int(i64::from(k.get(2))) / &self.lengths[2],
        ]
    }
}

impl fmt::Display for ExactDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.lengths[0], self.lengths[1], self.lengths[2])
    }
}

pub fn dot(a: &RVec, b: &RVec) -> Rational {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

pub fn scale(a: &RVec, c: &Rational) -> RVec {
    [&a[0] * c, &a[1] * c, &a[2] * c]
}

pub fn freq_vec(k: Frequency) -> RVec {
    [int(i64::from(k.get(0))), int(i64::from(k.get(1))), int(i64::from(k.get(2)))]
}

/// Determinant of the matrix with columns `c0, c1, c2`.
pub fn det3(c0: &RVec, c1: &RVec, c2: &RVec) -> Rational {
    &c0[0] * (&c1[1] * &c2[2] - &c1[2] * &c2[1]) - &c1[0] * (&c0[1] * &c2[2] - &c0[2] * &c2[1])
        + &c2[0] * (&c0[1] * &c1[2] - &c0[2] * &c1[1])
}

/// `beta / pi = (1/8)(s1 w1 m1/L1 + s2 w2 m2/L2 + s3 w3 m3/L3)`.
pub fn beta(w: &RVec, m: Frequency, signs: [i8; 3], domain: &ExactDomain) -> Rational {
    let ml = domain.scaled(m);
    let mut acc = Rational::zero();
    for a in 0..3 {
        let term = &w[a] * &ml[a];
        if signs[a] > 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc / int(8)
}

/// Exact symmetrized advection amplitudes, as coefficients of `pi`, keyed by
/// folded frequency.
pub fn advection_pair(
    k: Frequency,
    wk: &RVec,
    m: Frequency,
    wm: &RVec,
    domain: &ExactDomain,
) -> BTreeMap<Frequency, RVec> {
    let mut out: BTreeMap<Frequency, RVec> = BTreeMap::new();
    for bits in 0..8u8 {
        let mut s = [1i8; 3];
        for (axis, slot) in s.iter_mut().enumerate() {
            if bits & (4 >> axis) != 0 {
                *slot = -1;
            }
        }
        let b_km = beta(wk, m, s, domain);
        let b_mk = beta(wm, k, s, domain);
        let signed: [i64; 3] = std::array::from_fn(|a| i64::from(k.get(a)) + i64::from(s[a]) * i64::from(m.get(a)));
        let n = Frequency::new(
            signed[0].unsigned_abs() as u32,
            signed[1].unsigned_abs() as u32,
            signed[2].unsigned_abs() as u32,
        );
        let z = out.entry(n).or_insert_with(zero_vec);
        for i in 0..3 {
            if signed[i] == 0 {
                continue;
            }
            let mut amp = &wk[i] * &b_mk;
            if s[i] > 0 {
                amp += &wm[i] * &b_km;
            } else {
                amp -= &wm[i] * &b_km;
            }
            if signed[i] < 0 {
                z[i] -= amp;
            } else {
                z[i] += amp;
            }
        }
    }
    out
}

/// Canonical amplitude basis, same construction as the floating point one.
pub fn perp_basis(k: Frequency, domain: &ExactDomain) -> Result<Vec<RVec>> {
    let zeros = k.num_zero();
    if zeros >= 2 {
        return Err(Error::DegenerateFrequency(k, zeros));
    }
    let l = domain.lengths();
    let kv = freq_vec(k);
    if let Some(zero) = k.zero_axis() {
        let (p, r) = match zero {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let mut w = zero_vec();
        w[p] = -(&kv[r] * &l[p]);
        w[r] = &kv[p] * &l[r];
        return Ok(vec![w]);
    }
    let w1 = [-(&kv[1] * &l[0]), &kv[0] * &l[1], Rational::zero()];
    let v = [-(&kv[2] * &l[0]), Rational::zero(), &kv[0] * &l[2]];
    let c = dot(&v, &w1) / dot(&w1, &w1);
    let w2 = [&v[0] - &c * &w1[0], &v[1] - &c * &w1[1], &v[2] - &c * &w1[2]];
    Ok(vec![w1, w2])
}

/// Exact Leray projection coefficients of `Y_z^n` on the canonical modes.
pub fn project(n: Frequency, z: &RVec, domain: &ExactDomain) -> Result<Vec<(ModeIndex, Rational)>> {
    match n.num_zero() {
        0 => {
            let b = perp_basis(n, domain)?;
            let nl = domain.scaled(n);
            let det = det3(&b[0], &b[1], &nl);
            if det.is_zero() {
                return Err(Error::SingularBasis(n));
            }
            Ok(vec![
                (ModeIndex::new(1, n), det3(z, &b[1], &nl) / &det),
                (ModeIndex::new(2, n), det3(&b[0], z, &nl) / &det),
            ])
        }
        1 => {
            let zero = n.zero_axis().expect("one zero axis");
            let (p, r) = match zero {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let w = &perp_basis(n, domain)?[0];
            let nl = domain.scaled(n);
            let det = &w[p] * &nl[r] - &w[r] * &nl[p];
            if det.is_zero() {
                return Err(Error::SingularBasis(n));
            }
            Ok(vec![(ModeIndex::new(1, n), (&z[p] * &nl[r] - &z[r] * &nl[p]) / det)])
        }
        _ => Ok(Vec::new()),
    }
}

/// A rational written as a numerator/denominator pair of decimal integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRecord {
    pub num: String,
    pub den: String,
}

impl From<&Rational> for RationalRecord {
    fn from(r: &Rational) -> Self {
        Self { num: r.numer().to_string(), den: r.denom().to_string() }
    }
}

impl TryFrom<&RationalRecord> for Rational {
    type Error = Error;

    fn try_from(r: &RationalRecord) -> Result<Self> {
        parse_rational(&format!("{}/{}", r.num, r.den))
    }
}

pub fn is_one(r: &Rational) -> bool {
    r.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("1.41421356").unwrap(), ratio(141421356, 100000000));
        assert_eq!(parse_rational("7/5").unwrap(), ratio(7, 5));
        assert_eq!(parse_rational("-2.5e-1").unwrap(), ratio(-1, 4));
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(ExactDomain::parse("1,2").is_err());
        assert!(ExactDomain::parse("1,0,2").is_err());
    }

    #[test]
    fn exact_matches_float_expansion() {
        let ed = ExactDomain::parse("7/5,11/3,2").unwrap();
        let fd = ed.to_domain(1.0).unwrap();
        let k = Frequency::new(1, 2, 3);
        let m = Frequency::new(0, 1, 1);
        let wk = perp_basis(k, &ed).unwrap()[1].clone();
        let wm = perp_basis(m, &ed).unwrap()[0].clone();
        let exact = advection_pair(k, &wk, m, &wm, &ed);
        let wkf = wk.clone().map(|v| to_f64(&v));
        let wmf = wm.clone().map(|v| to_f64(&v));
        let float = crate::interaction::advection_pair(k, &wkf, m, &wmf, &fd);
        for (n, z) in &exact {
            let zf = float.terms[n];
            for i in 0..3 {
                let e = to_f64(&z[i]) * std::f64::consts::PI;
                assert!((e - zf[i]).abs() < 1e-12 * (1.0 + e.abs()), "{n} {i} {e} {}", zf[i]);
            }
            let pe = project(*n, z, &ed).unwrap();
            let pf = crate::interaction::project(&crate::TrigVectorField::new(*n, zf), &fd).unwrap();
            for (idx, v) in pe {
                let e = to_f64(&v) * std::f64::consts::PI;
                assert!((e - pf.get(&idx)).abs() < 1e-12 * (1.0 + e.abs()));
            }
        }
    }
}
