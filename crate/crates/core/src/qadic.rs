//! Exact rationals and base-`q` digits, truncations and round-ups.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A reduced fraction with positive denominator. Serialized as `"num/den"`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(ExactRational(BigRational::new(num.into(), den)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        ExactRational(BigRational::from_integer(n.into()))
    }

    pub fn from_big(r: BigRational) -> Self {
        ExactRational(r)
    }

    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactRational(BigRational::one())
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// `q^n` for any integer `n`.
    pub fn power_of(q: u64, n: i64) -> Self {
        let base = BigInt::from(q).pow(n.unsigned_abs() as u32);
        if n >= 0 {
            ExactRational::from_integer(base)
        } else {
            ExactRational(BigRational::new(BigInt::one(), base))
        }
    }

    pub fn mul_int(&self, k: impl Into<BigInt>) -> Self {
        ExactRational(&self.0 * BigRational::from_integer(k.into()))
    }

    pub fn approx(&self) -> f64 {
        self.0.numer().to_f64().unwrap_or(f64::NAN) / self.0.denom().to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for ExactRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a rational number: {s:?}"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                ExactRational::new(n, d)
            }
            None => Ok(ExactRational::from_integer(s.parse::<BigInt>().map_err(|_| bad())?)),
        }
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr for ExactRational {
            type Output = ExactRational;
            fn $m(self, o: ExactRational) -> ExactRational {
                ExactRational(self.0.$m(o.0))
            }
        }
        impl<'a> $tr<&'a ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $m(self, o: &ExactRational) -> ExactRational {
                ExactRational((&self.0).$m(&o.0))
            }
        }
    };
}
binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

/// Big integers in reports are decimal strings.
pub fn serialize_opt_bigint<S: Serializer>(
    v: &Option<BigInt>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_some(&x.to_string()),
        None => s.serialize_none(),
    }
}

pub fn serialize_bigint<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn check_positive(t: &ExactRational) -> Result<()> {
    if t.is_positive() {
        Ok(())
    } else {
        Err(Error::Domain(format!("exponent must be positive, got {t}")))
    }
}

/// `⌈t q^n⌉ - 1` as an integer.
fn ceil_minus_one(t: &ExactRational, q: u64, n: i64) -> BigInt {
    (t * &ExactRational::power_of(q, n)).ceil() - 1
}

/// The `n`-th digit `⌈t q^n - 1⌉ - q ⌈t q^{n-1} - 1⌉`.
pub fn digit(t: &ExactRational, q: u64, n: i64) -> Result<BigInt> {
    check_positive(t)?;
    if q < 2 {
        return Err(Error::Domain("base must be at least 2".into()));
    }
    Ok(ceil_minus_one(t, q, n) - BigInt::from(q) * ceil_minus_one(t, q, n - 1))
}

/// `⌈t q^n - 1⌉ / q^n`.
pub fn truncation(t: &ExactRational, q: u64, n: i64) -> Result<ExactRational> {
    check_positive(t)?;
    Ok(ExactRational::from_integer(ceil_minus_one(t, q, n)) * ExactRational::power_of(q, -n))
}

/// `⌈t q^n⌉ / q^n`.
pub fn roundup(t: &ExactRational, q: u64, n: i64) -> Result<ExactRational> {
    check_positive(t)?;
    Ok(ExactRational::from_integer((t * &ExactRational::power_of(q, n)).ceil())
        * ExactRational::power_of(q, -n))
}

/// Least `g >= 0` with `q^g (q-1) t ∈ ℤ`, if any.
pub fn constant_digit_level(t: &ExactRational, q: u64) -> Option<u32> {
    let mut d = t.denom().clone();
    let g = d.gcd(&BigInt::from(q - 1));
    d /= g;
    // what is left must divide a power of q
    let qb = BigInt::from(q);
    let mut level = 0u32;
    let mut scaled = t.mul_int(q - 1);
    while !scaled.is_integer() {
        let gg = d.gcd(&qb);
        if gg.is_one() {
            return None;
        }
        d /= gg;
        scaled = scaled.mul_int(q);
        level += 1;
    }
    Some(level)
}

/// `(l, n0)` with `t^{(n)} = l` for all `n >= n0 >= 1`, `n0` minimal.
pub fn digits_eventually_constant(t: &ExactRational, q: u64) -> Option<(BigInt, u32)> {
    if !t.is_positive() || q < 2 {
        return None;
    }
    let g = constant_digit_level(t, q)?;
    let l = digit(t, q, g as i64 + 1).ok()?;
    let mut onset = g + 1;
    while onset > 1 && digit(t, q, onset as i64 - 1).ok()? == l {
        onset -= 1;
    }
    Some((l, onset))
}

/// Multiplicative order of `p` modulo `d` (`d` coprime to `p`), capped.
pub fn multiplicative_order(p: u64, d: &BigInt, cap: u32) -> Option<u32> {
    if d.is_one() {
        return Some(1);
    }
    let pb = BigInt::from(p);
    let mut acc = pb.clone() % d;
    for h in 1..=cap {
        if acc.is_one() {
            return Some(h);
        }
        acc = (acc * &pb) % d;
    }
    None
}

/// Writes `t = c / (p^g (p^h - 1))`: returns `(g, h)` with `h <= h_max` minimal.
pub fn admissible_form(t: &ExactRational, p: u64, h_max: u32) -> Option<(u32, u32)> {
    let mut d = t.denom().clone();
    let pb = BigInt::from(p);
    let mut g = 0u32;
    while (&d % &pb).is_zero() {
        d /= &pb;
        g += 1;
    }
    multiplicative_order(p, &d, h_max).map(|h| (g, h))
}

/// Every denominator of the form `p^g d` with `d | p^h - 1`, `h <= h_max`.
pub fn is_admissible(t: &ExactRational, p: u64, h_max: u32) -> bool {
    admissible_form(t, p, h_max).is_some()
}

/// Upper limit on the period exponent `h` accepted for exponents.
pub const H_MAX: u32 = 24;

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> ExactRational {
        s.parse().unwrap()
    }

    #[test]
    fn digit_examples() {
        assert_eq!(digit(&r("1/2"), 2, 1).unwrap(), BigInt::from(0));
        for n in 2..8 {
            assert_eq!(digit(&r("1/2"), 2, n).unwrap(), BigInt::from(1));
        }
        for n in 1..6 {
            assert_eq!(digit(&r("1"), 3, n).unwrap(), BigInt::from(2));
        }
        for n in -3..=0 {
            assert_eq!(digit(&r("1"), 3, n).unwrap(), BigInt::from(0));
        }
        assert_eq!(digit(&r("5/6"), 2, 2).unwrap(), BigInt::from(1));
        assert!(digit(&r("0"), 2, 1).is_err());
    }

    #[test]
    fn truncation_examples() {
        assert_eq!(truncation(&r("5/6"), 2, 2).unwrap(), r("3/4"));
        assert_eq!(roundup(&r("5/6"), 2, 2).unwrap(), r("1"));
        assert_eq!(truncation(&r("1"), 5, 3).unwrap(), r("124/125"));
    }

    #[test]
    fn eventually_constant_examples() {
        assert_eq!(digits_eventually_constant(&r("1"), 3), Some((BigInt::from(2), 1)));
        for c in 1..7 {
            let t = ExactRational::new(c, 6).unwrap();
            assert_eq!(digits_eventually_constant(&t, 7), Some((BigInt::from(c), 1)));
        }
        assert_eq!(digits_eventually_constant(&r("1/5"), 2), None);
    }

    #[test]
    fn admissibility() {
        assert_eq!(admissible_form(&r("5/6"), 7, 4), Some((0, 1)));
        assert_eq!(admissible_form(&r("1/3"), 2, 4), Some((0, 2)));
        assert_eq!(admissible_form(&r("3/20"), 2, 8), Some((2, 4)));
        assert_eq!(admissible_form(&r("1/7"), 7, 4), Some((1, 1)));
    }

    #[test]
    fn serde_roundtrip_format() {
        let t = r("4/2");
        assert_eq!(serde_json::to_string(&t).unwrap(), "\"2/1\"");
        let back: ExactRational = serde_json::from_str("\"10/4\"").unwrap();
        assert_eq!(back, r("5/2"));
    }
}
