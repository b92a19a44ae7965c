//! Sparse multivariate polynomials over F_p.

use std::collections::BTreeMap;
use std::fmt::Write;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::Fp;
use crate::monomial::Monomial;
use crate::ring::PolyRing;

/// A polynomial as a list of `(monomial, coefficient)` pairs, sorted by
/// strictly decreasing monomial. Coefficients are nonzero residues in `[1, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<(Monomial, u32)>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: Vec::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Polynomial::constant(nvars, 1)
    }

    pub fn constant(nvars: usize, c: u32) -> Self {
        if c == 0 {
            return Polynomial::zero(nvars);
        }
        Polynomial {
            nvars,
            terms: vec![(Monomial::one(nvars), c)],
        }
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        Polynomial::monomial(Monomial::var(nvars, i, 1), 1)
    }

    pub fn monomial(m: Monomial, c: u32) -> Self {
        let nvars = m.nvars();
        if c == 0 {
            return Polynomial::zero(nvars);
        }
        Polynomial { nvars, terms: vec![(m, c)] }
    }

    /// Builds a polynomial from unsorted terms, combining duplicates.
    pub fn from_terms(nvars: usize, mut terms: Vec<(Monomial, u32)>, fp: Fp) -> Self {
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<(Monomial, u32)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc = fp.add(*lc, c),
                _ => out.push((m, c % fp.p())),
            }
        }
        out.retain(|(_, c)| *c != 0);
        Polynomial { nvars, terms: out }
    }

    /// Wraps terms already sorted decreasingly with nonzero coefficients.
    pub(crate) fn from_sorted_terms(nvars: usize, terms: Vec<(Monomial, u32)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 > w[1].0));
        debug_assert!(terms.iter().all(|(_, c)| *c != 0));
        Polynomial { nvars, terms }
    }

    #[inline]
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    #[inline]
    pub fn terms(&self) -> &[(Monomial, u32)] {
        &self.terms
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_one())
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lead_monomial(&self) -> Option<&Monomial> {
        self.terms.first().map(|(m, _)| m)
    }

    pub fn lead_coeff(&self) -> u32 {
        self.terms.first().map_or(0, |(_, c)| *c)
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u64 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    /// Lowest total degree of a term (order of vanishing at the origin).
    pub fn order(&self) -> u64 {
        self.terms.iter().map(|(m, _)| m.degree()).min().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        match self.terms.first() {
            None => true,
            Some((m, _)) => self.terms.iter().all(|(t, _)| t.degree() == m.degree()),
        }
    }

    pub fn constant_term(&self) -> u32 {
        match self.terms.last() {
            Some((m, c)) if m.is_one() => *c,
            _ => 0,
        }
    }

    pub fn neg(&self, fp: Fp) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), fp.neg(*c))).collect(),
        }
    }

    pub fn scale(&self, c: u32, fp: Fp) -> Self {
        let c = c % fp.p();
        if c == 0 {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, d)| (m.clone(), fp.mul(*d, c))).collect(),
        }
    }

    pub fn make_monic(&self, fp: Fp) -> Self {
        match self.terms.first() {
            None => self.clone(),
            Some((_, 1)) => self.clone(),
            Some((_, c)) => self.scale(fp.inv(*c), fp),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(t, c)| (t.mul(m), *c)).collect(),
        }
    }

    pub fn add(&self, other: &Polynomial, fp: Fp) -> Self {
        self.combine(other, fp, false)
    }

    pub fn sub(&self, other: &Polynomial, fp: Fp) -> Self {
        self.combine(other, fp, true)
    }

    fn combine(&self, other: &Polynomial, fp: Fp, negate: bool) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let b_coeff = |c: u32| if negate { fp.neg(c) } else { c };
        while i < self.terms.len() && j < other.terms.len() {
            let (ma, ca) = &self.terms[i];
            let (mb, cb) = &other.terms[j];
            match ma.cmp(mb) {
                std::cmp::Ordering::Greater => {
                    out.push((ma.clone(), *ca));
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    out.push((mb.clone(), b_coeff(*cb)));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = fp.add(*ca, b_coeff(*cb));
                    if c != 0 {
                        out.push((ma.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(self.terms[i..].iter().cloned());
        out.extend(other.terms[j..].iter().map(|(m, c)| (m.clone(), b_coeff(*c))));
        Polynomial { nvars: self.nvars, terms: out }
    }

    pub fn mul(&self, other: &Polynomial, fp: Fp) -> Self {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        if self.terms.len() == 1 {
            let (m, c) = &self.terms[0];
            return other.mul_monomial(m).scale(*c, fp);
        }
        if other.terms.len() == 1 {
            let (m, c) = &other.terms[0];
            return self.mul_monomial(m).scale(*c, fp);
        }
        let mut acc: BTreeMap<Monomial, u32> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = fp.mul(*ca, *cb);
                let slot = acc.entry(m).or_insert(0);
                *slot = fp.add(*slot, c);
            }
        }
        let terms: Vec<(Monomial, u32)> = acc.into_iter().rev().filter(|(_, c)| *c != 0).collect();
        Polynomial { nvars: self.nvars, terms }
    }

    /// `self^(p^e)`: exponents scale by `p^e` and coefficients are fixed by Frobenius.
    pub fn frobenius_power(&self, q: u32) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.scale(q), *c)).collect(),
        }
    }

    /// `self^n`, using the base-p expansion of `n` and the Frobenius.
    pub fn pow(&self, n: &BigUint, fp: Fp) -> Result<Self> {
        if n.is_zero() {
            return Ok(Polynomial::one(self.nvars));
        }
        if self.is_zero() {
            return Ok(Polynomial::zero(self.nvars));
        }
        if !self.is_constant() {
            let bound = n * BigUint::from(self.terms.iter().flat_map(|(m, _)| m.exponents().iter().copied()).max().unwrap_or(0));
            if bound > BigUint::from(u32::MAX) {
                return Err(Error::Overflow(format!("polynomial power with exponent {n}")));
            }
        }
        let p = fp.p();
        let digits = n.to_radix_le(p);
        let mut acc = Polynomial::one(self.nvars);
        let mut frob = self.clone();
        for (i, d) in digits.iter().enumerate() {
            if *d != 0 {
                acc = acc.mul(&frob.pow_small(*d as u32, fp), fp);
            }
            if i + 1 < digits.len() {
                frob = frob.frobenius_power(p);
            }
        }
        Ok(acc)
    }

    pub fn pow_u64(&self, n: u64, fp: Fp) -> Result<Self> {
        self.pow(&BigUint::from(n), fp)
    }

    fn pow_small(&self, mut n: u32, fp: Fp) -> Self {
        let mut acc = Polynomial::one(self.nvars);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base, fp);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base, fp);
            }
        }
        acc
    }

    /// Exact division by a monomial; `None` if some term is not divisible.
    pub fn div_monomial(&self, m: &Monomial) -> Option<Self> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (t, c) in &self.terms {
            if !m.divides(t) {
                return None;
            }
            terms.push((m.quotient_of(t), *c));
        }
        Some(Polynomial { nvars: self.nvars, terms })
    }

    /// Canonical text such as `x^2*y + 3*y^3`.
    pub fn to_text(&self, ring: &PolyRing) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            let mono = monomial_text(m, ring);
            if mono.is_empty() {
                write!(out, "{c}").unwrap();
            } else if *c == 1 {
                out.push_str(&mono);
            } else {
                write!(out, "{c}*{mono}").unwrap();
            }
        }
        out
    }
}

pub fn monomial_text(m: &Monomial, ring: &PolyRing) -> String {
    let mut parts = Vec::new();
    for (v, e) in ring.vars().iter().zip(m.exponents()) {
        match e {
            0 => {}
            1 => parts.push(v.clone()),
            _ => parts.push(format!("{v}^{e}")),
        }
    }
    parts.join("*")
}

/// Exponent as `u32`, failing with an overflow error.
pub fn exponent_u32(n: &BigUint) -> Result<u32> {
    n.to_u32()
        .ok_or_else(|| Error::Overflow(format!("exponent {n} exceeds u32")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> std::sync::Arc<PolyRing> {
        PolyRing::new(3, &["x", "y"]).unwrap()
    }

    #[test]
    fn arithmetic_and_printing() {
        let r = ring();
        let fp = r.field();
        let f = r.parse("x + y").unwrap();
        let g = f.mul(&f, fp);
        assert_eq!(g.to_text(&r), "x^2 + 2*x*y + y^2");
        let h = f.pow_u64(3, fp).unwrap();
        assert_eq!(h.to_text(&r), "x^3 + y^3");
        assert!(g.sub(&g, fp).is_zero());
    }

    #[test]
    fn power_matches_repeated_product() {
        let r = ring();
        let fp = r.field();
        let f = r.parse("x^2 + 2*x*y + y + 1").unwrap();
        let mut acc = Polynomial::one(2);
        for n in 0..12u64 {
            assert_eq!(f.pow_u64(n, fp).unwrap(), acc);
            acc = acc.mul(&f, fp);
        }
    }

    #[test]
    fn homogeneity() {
        let r = ring();
        assert!(r.parse("x^2 + x*y").unwrap().is_homogeneous());
        assert!(!r.parse("x^2 + y^3").unwrap().is_homogeneous());
    }
}
