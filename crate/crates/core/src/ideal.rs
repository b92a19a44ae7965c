//! Ideals of `F_p[x_1..x_n]` with a lazily computed reduced Gröbner basis.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groebner::{minimal_monomials, normal_form, normal_form_below, reduced_groebner_basis};
use crate::monomial::{monomials_of_degree, Monomial};
use crate::poly::Polynomial;
use crate::ring::PolyRing;

/// Largest number of degree-`D` monomials adjoined when deciding membership
/// in `J + m^D` for non-homogeneous `J`.
const MAX_POWER_MONOMIALS: usize = 20_000;

/// A finitely generated ideal. Equality is equality of reduced Gröbner bases.
#[derive(Clone)]
pub struct Ideal {
    ring: Arc<PolyRing>,
    gens: Vec<Polynomial>,
    gb: OnceLock<Vec<Polynomial>>,
}

/// Binary and unary ideal operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdealOp {
    Sum,
    Product,
    Power(u64),
    /// Frobenius bracket power `a^{[p^e]}` for the given `e`.
    BracketPower(u32),
}

/// Bound on the minimal number of generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MuBound {
    pub value: usize,
    /// True when `value` equals the minimal number of generators at the origin.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalInvariants {
    pub colength: u64,
    pub mu_upper: usize,
    pub mu_exact: bool,
    pub emb: usize,
    pub ell_i: u64,
}

impl Ideal {
    pub fn new(ring: &Arc<PolyRing>, gens: Vec<Polynomial>) -> Ideal {
        let n = ring.nvars();
        assert!(gens.iter().all(|g| g.nvars() == n), "generator in a different ring");
        let mut gens: Vec<Polynomial> = gens.into_iter().filter(|g| !g.is_zero()).collect();
        if gens.iter().any(|g| g.is_constant()) {
            gens = vec![Polynomial::one(n)];
        }
        Ideal {
            ring: ring.clone(),
            gens,
            gb: OnceLock::new(),
        }
    }

    fn with_basis(ring: &Arc<PolyRing>, basis: Vec<Polynomial>) -> Ideal {
        let lock = OnceLock::new();
        let _ = lock.set(basis.clone());
        Ideal {
            ring: ring.clone(),
            gens: basis,
            gb: lock,
        }
    }

    /// Parses a comma separated generator list, e.g. `"x^2, y^3"` or `"(x, y)"`.
    pub fn parse(ring: &Arc<PolyRing>, text: &str) -> Result<Ideal> {
        let gens = crate::parse::parse_generators(ring, text)?;
        Ok(Ideal::new(ring, gens))
    }

    pub fn principal(ring: &Arc<PolyRing>, f: Polynomial) -> Ideal {
        Ideal::new(ring, vec![f])
    }

    pub fn unit(ring: &Arc<PolyRing>) -> Ideal {
        Ideal::with_basis(ring, vec![Polynomial::one(ring.nvars())])
    }

    pub fn zero(ring: &Arc<PolyRing>) -> Ideal {
        Ideal::with_basis(ring, Vec::new())
    }

    /// The maximal ideal of the origin.
    pub fn maximal(ring: &Arc<PolyRing>) -> Ideal {
        Ideal::max_power(ring, 1)
    }

    /// `m^k`, generated by all monomials of degree `k`.
    pub fn max_power(ring: &Arc<PolyRing>, k: u64) -> Ideal {
        if k == 0 {
            return Ideal::unit(ring);
        }
        let d = u32::try_from(k).expect("power of the maximal ideal too large");
        let mut gens: Vec<Polynomial> = monomials_of_degree(ring.nvars(), d)
            .into_iter()
            .map(|m| Polynomial::monomial(m, 1))
            .collect();
        gens.sort_by(|a, b| a.lead_monomial().cmp(&b.lead_monomial()));
        Ideal::with_basis(ring, gens)
    }

    pub fn from_monomials(ring: &Arc<PolyRing>, monos: Vec<Monomial>) -> Ideal {
        let gens = monos.into_iter().map(|m| Polynomial::monomial(m, 1)).collect();
        Ideal::with_basis(ring, minimal_monomials(gens))
    }

    #[inline]
    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    #[inline]
    pub fn gens(&self) -> &[Polynomial] {
        &self.gens
    }

    /// The reduced Gröbner basis, computed once.
    pub fn gb(&self) -> &[Polynomial] {
        self.gb
            .get_or_init(|| reduced_groebner_basis(&self.gens, self.ring.field()))
    }

    pub fn is_zero(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.gb().first(), Some(g) if g.is_constant())
    }

    pub fn is_monomial(&self) -> bool {
        self.gens.iter().all(|g| g.is_monomial())
    }

    pub fn is_homogeneous(&self) -> bool {
        self.gens.iter().all(|g| g.is_homogeneous())
    }

    /// Whether every generator vanishes at the origin.
    pub fn is_proper_at_origin(&self) -> bool {
        self.gens.iter().all(|g| g.constant_term() == 0)
    }

    pub(crate) fn check_ring(&self, other: &Ideal) -> Result<()> {
        if Arc::ptr_eq(&self.ring, &other.ring) || *self.ring == *other.ring {
            Ok(())
        } else {
            Err(Error::RingMismatch(format!("{} vs {}", self.ring, other.ring)))
        }
    }

    pub fn contains(&self, f: &Polynomial) -> bool {
        if f.is_zero() {
            return true;
        }
        if self.is_zero() {
            return false;
        }
        normal_form(f, self.gb(), self.ring.field()).is_zero()
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Ideal) -> bool {
        debug_assert!(self.check_ring(other).is_ok());
        if other.is_unit() {
            return true;
        }
        self.gens.iter().all(|g| other.contains(g))
    }

    pub fn try_is_subset_of(&self, other: &Ideal) -> Result<bool> {
        self.check_ring(other)?;
        Ok(self.is_subset_of(other))
    }

    /// Whether `f ∈ self + m^d`.
    pub fn contains_mod_max_power(&self, f: &Polynomial, d: u64) -> Result<bool> {
        let small: Polynomial = Polynomial::from_sorted_terms(
            f.nvars(),
            f.terms().iter().filter(|(m, _)| m.degree() < d).cloned().collect(),
        );
        if small.is_zero() || self.contains(&small) {
            return Ok(true);
        }
        if self.is_homogeneous() {
            return Ok(normal_form_below(&small, self.gb(), self.ring.field(), Some(d)).is_zero());
        }
        let monos = monomials_of_degree(self.ring.nvars(), u32::try_from(d).unwrap_or(u32::MAX));
        if monos.len() > MAX_POWER_MONOMIALS {
            return Err(Error::Unsupported(format!(
                "membership modulo m^{d} for a non-homogeneous ideal"
            )));
        }
        let mut gens = self.gens.clone();
        gens.extend(monos.into_iter().map(|m| Polynomial::monomial(m, 1)));
        Ok(Ideal::new(&self.ring, gens).contains(&small))
    }

    /// Whether `self ⊆ other + m^d`.
    pub fn is_subset_mod_max_power(&self, other: &Ideal, d: u64) -> Result<bool> {
        self.check_ring(other)?;
        for g in &self.gens {
            if !other.contains_mod_max_power(g, d)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn sum(&self, other: &Ideal) -> Result<Ideal> {
        self.check_ring(other)?;
        Ok(self.add_ideal(other))
    }

    pub fn product(&self, other: &Ideal) -> Result<Ideal> {
        self.check_ring(other)?;
        Ok(self.mul_ideal(other))
    }

    pub(crate) fn add_ideal(&self, other: &Ideal) -> Ideal {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        Ideal::new(&self.ring, gens).canonical()
    }

    pub(crate) fn mul_ideal(&self, other: &Ideal) -> Ideal {
        if self.is_zero() || other.is_zero() {
            return Ideal::zero(&self.ring);
        }
        if self.is_unit() {
            return other.clone();
        }
        if other.is_unit() {
            return self.clone();
        }
        let fp = self.ring.field();
        let a = self.small_gens();
        let b = other.small_gens();
        let mut gens = Vec::with_capacity(a.len() * b.len());
        for f in a {
            for g in b {
                gens.push(f.mul(g, fp));
            }
        }
        Ideal::new(&self.ring, gens).canonical()
    }

    /// Multiplies every generator by `f`.
    pub fn mul_poly(&self, f: &Polynomial) -> Ideal {
        if f.is_constant() && !f.is_zero() {
            return self.clone();
        }
        let fp = self.ring.field();
        let gens = self.small_gens().iter().map(|g| g.mul(f, fp)).collect();
        Ideal::new(&self.ring, gens)
    }

    /// The shorter of the generator list and the Gröbner basis, if known.
    fn small_gens(&self) -> &[Polynomial] {
        match self.gb.get() {
            Some(gb) if gb.len() <= self.gens.len() => gb,
            _ => &self.gens,
        }
    }

    /// Replaces the generators by the reduced Gröbner basis.
    pub fn canonical(self) -> Ideal {
        let basis = self.gb().to_vec();
        Ideal::with_basis(&self.ring, basis)
    }

    pub fn power(&self, k: u64) -> Ideal {
        if k == 0 {
            return Ideal::unit(&self.ring);
        }
        if self.is_zero() || self.is_unit() {
            return self.clone();
        }
        if self.gens.len() == 1 {
            let g = self.gens[0].pow_u64(k, self.ring.field()).expect("power exponent overflow");
            return Ideal::principal(&self.ring, g);
        }
        let mut result: Option<Ideal> = None;
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.mul_ideal(&base),
                });
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_ideal(&base);
            }
        }
        result.unwrap()
    }

    /// `a^{[q]}` for `q` a power of `p`: generated by `q`-th powers of generators.
    pub fn frobenius_bracket(&self, q: u32) -> Ideal {
        debug_assert!(is_power_of(q as u64, self.ring.p() as u64));
        let gens = self.small_gens().iter().map(|g| g.frobenius_power(q)).collect();
        Ideal::new(&self.ring, gens)
    }

    pub fn bracket_power(&self, e: u32) -> Result<Ideal> {
        let q = self.ring.q(e)? as u32;
        Ok(self.frobenius_bracket(q))
    }

    /// Drops all terms of degree `>= d` from each generator. The result
    /// agrees with `self` modulo `m^d`.
    pub fn truncated(&self, d: u64) -> Ideal {
        let gens = self
            .small_gens()
            .iter()
            .map(|g| {
                Polynomial::from_sorted_terms(
                    g.nvars(),
                    g.terms().iter().filter(|(m, _)| m.degree() < d).cloned().collect(),
                )
            })
            .collect();
        Ideal::new(&self.ring, gens)
    }

    /// Largest `k` with `self ⊆ m^k`; `u64::MAX` for the zero ideal.
    pub fn order(&self) -> u64 {
        self.gens.iter().map(|g| g.order()).min().unwrap_or(u64::MAX)
    }

    /// A generating set with no redundant member. For homogeneous ideals it
    /// is minimal, so its size is the minimal number of generators.
    pub fn minimal_generators(&self) -> Vec<Polynomial> {
        if self.is_zero() {
            return Vec::new();
        }
        if self.is_unit() {
            return vec![Polynomial::one(self.ring.nvars())];
        }
        if self.is_monomial() {
            return minimal_monomials(self.gens.clone());
        }
        let pool: Vec<Polynomial> = if self.is_homogeneous() {
            self.gb().to_vec()
        } else {
            let mut own = self.gens.clone();
            own.sort_by(|a, b| a.lead_monomial().cmp(&b.lead_monomial()));
            own
        };
        let mut pool = pool;
        pool.sort_by_key(|g| g.degree());
        let mut kept: Vec<Polynomial> = Vec::new();
        let mut span = Ideal::zero(&self.ring);
        for g in pool {
            if !span.contains(&g) {
                kept.push(g);
                span = Ideal::new(&self.ring, kept.clone());
            }
        }
        if !self.is_homogeneous() {
            // A sparser generating set may still be redundant; drop members
            // lying in the span of the others.
            let mut i = 0;
            while i < kept.len() && kept.len() > 1 {
                let others: Vec<Polynomial> =
                    kept.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone()).collect();
                if Ideal::new(&self.ring, others.clone()).contains(&kept[i]) {
                    kept = others;
                } else {
                    i += 1;
                }
            }
        }
        kept
    }

    pub fn mu_upper(&self) -> MuBound {
        let exact = self.is_homogeneous() || self.gens.len() <= 1;
        MuBound {
            value: self.minimal_generators().len(),
            exact,
        }
    }

    /// Colength `dim_k R/I`, counted as standard monomials of the Gröbner basis.
    pub fn colength(&self) -> Result<u64> {
        let n = self.ring.nvars();
        let leads: Vec<Monomial> = self.gb().iter().map(|g| g.lead_monomial().unwrap().clone()).collect();
        if leads.iter().any(|m| m.is_one()) {
            return Ok(0);
        }
        let mut bounds = vec![0u32; n];
        for (i, b) in bounds.iter_mut().enumerate() {
            *b = leads
                .iter()
                .filter(|m| m.degree() == m.exponents()[i] as u64 && m.exponents()[i] > 0)
                .map(|m| m.exponents()[i])
                .min()
                .ok_or(Error::InfiniteColength)?;
        }
        Ok(count_standard(&leads, &bounds, &mut vec![0; n], 0))
    }

    /// Least `k` with `m^k ⊆ self`.
    pub fn ell(&self) -> Result<u64> {
        if self.is_unit() {
            return Ok(0);
        }
        let colength = self.colength()?;
        for k in 1..=colength.max(1) {
            let inside = monomials_of_degree(self.ring.nvars(), k as u32)
                .into_iter()
                .all(|m| self.contains(&Polynomial::monomial(m, 1)));
            if inside {
                return Ok(k);
            }
        }
        Ok(colength)
    }
}

fn count_standard(leads: &[Monomial], bounds: &[u32], cur: &mut Vec<u32>, i: usize) -> u64 {
    if i == bounds.len() {
        let m = Monomial::from_exponents(cur);
        return u64::from(!leads.iter().any(|l| l.divides(&m)));
    }
    let mut total = 0;
    for e in 0..bounds[i] {
        cur[i] = e;
        // Prune: if the partial monomial is already divisible, so are its extensions.
        let partial = Monomial::from_exponents(cur);
        if leads.iter().any(|l| l.divides(&partial)) {
            break;
        }
        total += count_standard(leads, bounds, cur, i + 1);
    }
    cur[i] = 0;
    total
}

fn is_power_of(n: u64, p: u64) -> bool {
    let mut n = n;
    while n > 1 && n.is_multiple_of(p) {
        n /= p;
    }
    n == 1
}

/// Dispatches a generator-level ideal operation.
pub fn ideal_arith(a: &Ideal, b: &Ideal, op: IdealOp) -> Result<Ideal> {
    a.check_ring(b)?;
    match op {
        IdealOp::Sum => Ok(a.add_ideal(b)),
        IdealOp::Product => Ok(a.mul_ideal(b)),
        IdealOp::Power(k) => Ok(a.power(k)),
        IdealOp::BracketPower(e) => a.bracket_power(e),
    }
}

/// Colength, generator bound, embedding dimension and `ell_I` for a pair `(a, I)`.
pub fn local_invariants(a: &Ideal, i: &Ideal) -> Result<LocalInvariants> {
    a.check_ring(i)?;
    if !a.is_proper_at_origin() {
        return Err(Error::Precondition("the ideal a must vanish at the origin".into()));
    }
    let mu = a.mu_upper();
    Ok(LocalInvariants {
        colength: i.colength()?,
        mu_upper: mu.value,
        mu_exact: mu.exact,
        emb: a.ring.emb(),
        ell_i: i.ell()?,
    })
}

impl PartialEq for Ideal {
    fn eq(&self, other: &Self) -> bool {
        *self.ring == *other.ring && self.gb() == other.gb()
    }
}

impl Eq for Ideal {}

impl Ideal {
    /// Canonical text of each reduced Gröbner basis element.
    /// Reduced Gröbner basis in canonical text, sorted.
    pub fn to_strings(&self) -> Vec<String> {
        let mut v: Vec<String> = self.gb().iter().map(|g| g.to_text(&self.ring)).collect();
        v.sort();
        v
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "(0)");
        }
        write!(f, "({})", self.to_strings().join(", "))
    }
}

impl fmt::Debug for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ideal{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u32) -> Arc<PolyRing> {
        PolyRing::new(p, &["x", "y"]).unwrap()
    }

    #[test]
    fn membership_examples() {
        let r = ring(2);
        let i = Ideal::parse(&r, "x^2, y^2").unwrap();
        assert!(!i.contains(&r.parse("x*y").unwrap()));
        assert!(i.contains(&r.parse("x^2*y + x*y^2").unwrap()));
        let j = Ideal::parse(&r, "x").unwrap();
        assert!(Ideal::parse(&r, "x^2").unwrap().is_subset_of(&j));
    }

    #[test]
    fn colength_and_ell() {
        let r = ring(5);
        let i = Ideal::parse(&r, "x^2, y^3").unwrap();
        assert_eq!(i.colength().unwrap(), 6);
        assert_eq!(i.ell().unwrap(), 4);
        assert_eq!(Ideal::max_power(&r, 3).ell().unwrap(), 3);
        assert_eq!(Ideal::unit(&r).ell().unwrap(), 0);
        assert_eq!(Ideal::parse(&r, "x").unwrap().colength(), Err(Error::InfiniteColength));
    }

    #[test]
    fn mu_of_homogeneous_ideal() {
        let r = ring(5);
        let a = Ideal::parse(&r, "x^2, x*y, y^2, x^3 + y^3").unwrap();
        assert_eq!(a.mu_upper(), MuBound { value: 3, exact: true });
    }

    #[test]
    fn ring_mismatch_is_reported() {
        let a = Ideal::maximal(&ring(2));
        let b = Ideal::maximal(&ring(3));
        assert!(matches!(a.sum(&b), Err(Error::RingMismatch(_))));
    }

    #[test]
    fn membership_modulo_power_of_max() {
        let r = ring(3);
        let k = Ideal::parse(&r, "x*y + x").unwrap();
        assert!(k.contains_mod_max_power(&r.parse("x").unwrap(), 6).unwrap());
        assert!(!k.contains_mod_max_power(&r.parse("y").unwrap(), 6).unwrap());
        let h = Ideal::parse(&r, "x^2 - y^2").unwrap();
        assert!(h.contains_mod_max_power(&r.parse("x^2 - y^2 + x^5").unwrap(), 4).unwrap());
    }
}
