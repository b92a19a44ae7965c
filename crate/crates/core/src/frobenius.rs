//! Frobenius decomposition, the trace map `Φ^e`, e-th roots and the pair
//! maps `φ^e_Δ = Φ^e(f^a · -)`.
//!
//! [`trace_of_product`] evaluates `φ^{ek}_Δ(b_1^{N_1} ⋯ b_r^{N_r} · Z)` for
//! exponents far too large to expand, by splitting off bracket powers at
//! every step: when `N > q(l-1)` for a sum of powers `b = Σ c_i^{M_i}` with
//! `l = Σ μ(c_i)`, `b^N = (b^K)^{[q]} · b^{N-qK}` and `Φ(X^{[q]} Y) = X Φ(Y)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ideal::Ideal;
use crate::monomial::Monomial;
use crate::poly::Polynomial;
use crate::ring::PolyRing;

/// The divisor `Δ = (a / (p^e - 1)) · div(f)`.
#[derive(Clone, Debug)]
pub struct PairDivisor {
    ring: Arc<PolyRing>,
    f: Polynomial,
    a: u64,
    e: u32,
    q: u32,
}

impl PairDivisor {
    pub fn new(ring: &Arc<PolyRing>, f: Polynomial, a: u64, e: u32) -> Result<Self> {
        if e == 0 {
            return Err(Error::Domain("e must be positive".into()));
        }
        if f.is_zero() {
            return Err(Error::Domain("f must be non-zero".into()));
        }
        if f.nvars() != ring.nvars() {
            return Err(Error::RingMismatch("divisor polynomial".into()));
        }
        if a > 0 && f.constant_term() != 0 {
            return Err(Error::Domain(
                "f must vanish at the origin when a > 0".into(),
            ));
        }
        let q = ring.q(e)? as u32;
        Ok(PairDivisor {
            ring: ring.clone(),
            f,
            a,
            e,
            q,
        })
    }

    /// The empty divisor with Frobenius exponent `e`.
    pub fn trivial(ring: &Arc<PolyRing>, e: u32) -> Result<Self> {
        PairDivisor::new(ring, Polynomial::one(ring.nvars()), 0, e)
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn f(&self) -> &Polynomial {
        &self.f
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn is_trivial(&self) -> bool {
        self.a == 0 || self.f.is_constant()
    }

    /// The same divisor written with exponent `e * k`.
    pub fn with_multiple(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("multiplier must be positive".into()));
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let e2 = self
            .e
            .checked_mul(k)
            .ok_or_else(|| Error::Overflow("Frobenius exponent".into()))?;
        let q2 = self.ring.q(e2)?;
        let a2 = if self.is_trivial() {
            0
        } else {
            self.a
                .checked_mul((q2 - 1) / (self.q as u64 - 1))
                .ok_or_else(|| Error::Overflow("divisor coefficient".into()))?
        };
        let f = if a2 == 0 { Polynomial::one(self.ring.nvars()) } else { self.f.clone() };
        PairDivisor::new(&self.ring, f, a2, e2)
    }

    pub fn describe(&self) -> String {
        if self.is_trivial() {
            return "0".to_string();
        }
        format!("({}/{})*div({})", self.a, self.q - 1, self.f.to_text(&self.ring))
    }
}

/// Components `g_u` of `g = Σ_u g_u^{q} x^u` over the basis `0 <= u_i < q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobComponents {
    pub q: u32,
    pub nvars: usize,
    pub comps: BTreeMap<Vec<u32>, Polynomial>,
}

impl FrobComponents {
    pub fn component(&self, u: &[u32]) -> Polynomial {
        self.comps
            .get(u)
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(self.nvars))
    }

    /// `Σ_u g_u^q x^u`.
    pub fn reassemble(&self, ring: &PolyRing) -> Polynomial {
        let fp = ring.field();
        let mut acc = Polynomial::zero(self.nvars);
        for (u, g) in &self.comps {
            let shifted = g.frobenius_power(self.q).mul_monomial(&Monomial::from_exponents(u));
            acc = acc.add(&shifted, fp);
        }
        acc
    }
}

pub fn frobenius_decompose_q(g: &Polynomial, q: u32, ring: &PolyRing) -> FrobComponents {
    let mut buckets: BTreeMap<Vec<u32>, Vec<(Monomial, u32)>> = BTreeMap::new();
    for (m, c) in g.terms() {
        let u: Vec<u32> = m.exponents().iter().map(|x| x % q).collect();
        let v: Vec<u32> = m.exponents().iter().map(|x| x / q).collect();
        buckets.entry(u).or_default().push((Monomial::from_exponents(&v), *c));
    }
    let fp = ring.field();
    let comps = buckets
        .into_iter()
        .map(|(u, terms)| (u, Polynomial::from_terms(g.nvars(), terms, fp)))
        .filter(|(_, p)| !p.is_zero())
        .collect();
    FrobComponents {
        q,
        nvars: g.nvars(),
        comps,
    }
}

pub fn frobenius_decompose(g: &Polynomial, e: u32, ring: &PolyRing) -> Result<FrobComponents> {
    if e == 0 {
        return Err(Error::Domain("e must be positive".into()));
    }
    Ok(frobenius_decompose_q(g, ring.q(e)? as u32, ring))
}

/// The generating trace `Φ^e`: the component at `u = (q-1, ..., q-1)`.
pub fn trace(g: &Polynomial, q: u32, ring: &PolyRing) -> Polynomial {
    let fp = ring.field();
    let terms: Vec<(Monomial, u32)> = g
        .terms()
        .iter()
        .filter(|(m, _)| m.exponents().iter().all(|x| x % q == q - 1))
        .map(|(m, c)| {
            let v: Vec<u32> = m.exponents().iter().map(|x| x / q).collect();
            (Monomial::from_exponents(&v), *c)
        })
        .collect();
    Polynomial::from_terms(g.nvars(), terms, fp)
}

/// The smallest ideal `C` with `J ⊆ C^{[q]}`.
pub fn eth_root_q(j: &Ideal, q: u32) -> Ideal {
    let ring = j.ring();
    if j.is_zero() || q == 1 {
        return j.clone();
    }
    if j.is_monomial() {
        let monos = j
            .gens()
            .iter()
            .map(|g| {
                let v: Vec<u32> = g.lead_monomial().unwrap().exponents().iter().map(|x| x / q).collect();
                Monomial::from_exponents(&v)
            })
            .collect();
        return Ideal::from_monomials(ring, monos);
    }
    let mut gens = Vec::new();
    for g in j.gens() {
        gens.extend(frobenius_decompose_q(g, q, ring).comps.into_values());
    }
    Ideal::new(ring, gens).canonical()
}

pub fn eth_root(j: &Ideal, e: u32) -> Result<Ideal> {
    if e == 0 {
        return Err(Error::Domain("e must be positive".into()));
    }
    Ok(eth_root_q(j, j.ring().q(e)? as u32))
}

/// One application of `φ^e_Δ`: `X ↦ Φ^e(f^a X)`.
pub fn pair_step(j: &Ideal, d: &PairDivisor) -> Ideal {
    if d.is_trivial() {
        return eth_root_q(j, d.q());
    }
    let fp = d.ring().field();
    let q = d.q() as u64;
    let outer = d.f().pow_u64(d.a() / q, fp).expect("divisor power overflow");
    let inner = d.f().pow_u64(d.a() % q, fp).expect("divisor power overflow");
    let root = eth_root_q(&j.mul_poly(&inner), d.q());
    if outer.is_constant() {
        root
    } else {
        root.mul_poly(&outer).canonical()
    }
}

/// `φ^{en}_Δ(F^{en}_* J)`, i.e. `n` applications of [`pair_step`].
pub fn pair_trace_image(j: &Ideal, d: &PairDivisor, n: u32) -> Result<Ideal> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let mut cur = j.clone();
    for _ in 0..n {
        cur = pair_step(&cur, d);
    }
    Ok(cur)
}

/// An ideal presented as `c_1^{M_1} + ... + c_k^{M_k}`.
#[derive(Clone, Debug)]
pub struct PowerSum {
    parts: Vec<(Ideal, u64)>,
}

impl PowerSum {
    pub fn plain(a: Ideal) -> Self {
        PowerSum { parts: vec![(a, 1)] }
    }

    /// `a + m^big`.
    pub fn perturbed(a: Ideal, big: u64) -> Self {
        let m = Ideal::maximal(a.ring());
        PowerSum {
            parts: vec![(a, 1), (m, big)],
        }
    }

    pub fn new(parts: Vec<(Ideal, u64)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Domain("empty sum of powers".into()));
        }
        if parts.iter().any(|(_, m)| *m == 0) {
            return Err(Error::Domain("zero power in a sum of powers".into()));
        }
        Ok(PowerSum { parts })
    }

    pub fn parts(&self) -> &[(Ideal, u64)] {
        &self.parts
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        self.parts[0].0.ring()
    }

    pub fn as_plain(&self) -> Option<&Ideal> {
        match self.parts.as_slice() {
            [(a, 1)] => Some(a),
            _ => None,
        }
    }

    /// `Σ μ(c_i)`, with `μ` the size of the generating sets used.
    pub fn skoda_l(&self) -> usize {
        self.parts.iter().map(|(c, _)| c.minimal_generators().len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|(c, _)| c.is_zero())
    }

    pub fn is_unit(&self) -> bool {
        self.parts.iter().any(|(c, _)| c.is_unit())
    }

    pub fn is_proper_at_origin(&self) -> bool {
        self.parts.iter().all(|(c, _)| c.is_proper_at_origin())
    }

    /// The ideal itself. Expensive when some power is large.
    pub fn materialize(&self) -> Ideal {
        let mut acc = Ideal::zero(self.ring());
        for (c, m) in &self.parts {
            acc = acc.add_ideal(&c.power(*m));
        }
        acc
    }

    pub fn describe(&self) -> String {
        self.parts
            .iter()
            .map(|(c, m)| if *m == 1 { c.to_string() } else { format!("{c}^{m}") })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

struct Atom {
    ideal: Ideal,
    mu: u64,
    order: u64,
    powers: HashMap<u64, Ideal>,
}

impl Atom {
    fn new(ideal: Ideal) -> Atom {
        let gens = ideal.minimal_generators();
        let order = ideal.order();
        let ideal = Ideal::new(ideal.ring(), gens);
        Atom {
            mu: ideal.gens().len() as u64,
            order,
            ideal,
            powers: HashMap::new(),
        }
    }

    fn power(&mut self, k: u64) -> Ideal {
        if let Some(p) = self.powers.get(&k) {
            return p.clone();
        }
        let p = self.ideal.power(k);
        self.powers.insert(k, p.clone());
        p
    }
}

/// Product of two ideals, optionally modulo `m^d`.
fn mul_mod(a: &Ideal, b: &Ideal, d: Option<u64>) -> Ideal {
    let prod = a.mul_ideal(b);
    match d {
        Some(d) => prod.truncated(d),
        None => prod,
    }
}

/// Splits `n = q k + r` with `r > q (l - 1)` whenever possible.
fn skoda_split(n: u64, q: u64, l: u64) -> (u64, u64) {
    if l == 0 || n <= q * (l - 1) {
        return (0, n);
    }
    let k = n.div_ceil(q) - l;
    (k, n - q * k)
}

/// All ways to write `r` as a sum of `k` non-negative parts.
fn compositions(r: u64, k: usize) -> Vec<Vec<u64>> {
    if k == 1 {
        return vec![vec![r]];
    }
    let mut out = Vec::new();
    for first in 0..=r {
        for mut rest in compositions(r - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `(parts as (atom, M), l, exponent)`
type SumFactor = (Vec<(usize, u64)>, u64, u64);

/// A factor `b^N` of the argument of [`trace_of_product`].
pub struct TraceFactor<'a> {
    pub base: &'a PowerSum,
    pub exponent: u64,
}

/// `φ^{ek}_Δ(∏ b_i^{N_i} · z)`.
///
/// With `modulus = Some(D)` the result is only determined modulo `m^D`:
/// the returned ideal `T'` satisfies `T' + m^D = T + m^D`. This is what
/// containment tests against ideals containing `m^D` need, and it lets
/// high powers of `m` in the factors be discarded early.
pub fn trace_of_product(
    d: &PairDivisor,
    steps: u32,
    factors: &[TraceFactor<'_>],
    z: &Ideal,
    modulus: Option<u64>,
) -> Result<Ideal> {
    let ring = d.ring().clone();
    let q = d.q() as u64;
    let emb = ring.emb() as u64;

    if z.is_zero() {
        return Ok(Ideal::zero(&ring));
    }
    // Collect atoms and sum-of-powers factors.
    let mut atoms: Vec<Atom> = Vec::new();
    let mut atom_exps: Vec<u64> = Vec::new();
    let mut sums: Vec<SumFactor> = Vec::new();
    let atom_index = |ideal: &Ideal, atoms: &mut Vec<Atom>, exps: &mut Vec<u64>| -> usize {
        if let Some(i) = atoms.iter().position(|a| a.ideal == *ideal) {
            return i;
        }
        atoms.push(Atom::new(ideal.clone()));
        exps.push(0);
        atoms.len() - 1
    };
    for f in factors {
        if f.exponent == 0 || f.base.is_unit() {
            continue;
        }
        if f.base.is_zero() {
            return Ok(Ideal::zero(&ring));
        }
        let parts: Vec<(usize, u64)> = f
            .base
            .parts()
            .iter()
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, m)| (atom_index(c, &mut atoms, &mut atom_exps), *m))
            .collect();
        if let [(i, 1)] = parts.as_slice() {
            atom_exps[*i] = atom_exps[*i]
                .checked_add(f.exponent)
                .ok_or_else(|| Error::Overflow("factor exponent".into()))?;
        } else {
            let l = parts.iter().map(|(i, _)| atoms[*i].mu).sum();
            sums.push((parts, l, f.exponent));
        }
    }

    // Moduli: mods[i] is the precision needed before step i.
    let mut mods: Vec<Option<u64>> = vec![None; steps as usize + 1];
    mods[steps as usize] = modulus;
    for i in (0..steps as usize).rev() {
        mods[i] = mods[i + 1].and_then(|dm| {
            q.checked_mul(dm.saturating_sub(1))
                .and_then(|x| x.checked_add(emb * (q - 1) + 1))
        });
    }
    let ord_f = if d.is_trivial() { 0 } else { d.f().order() };

    let mut terms: BTreeMap<Vec<u64>, Ideal> = BTreeMap::new();
    terms.insert(atom_exps, match mods[0] {
        Some(m) => z.truncated(m),
        None => z.clone(),
    });

    for step in 0..steps as usize {
        let d_in = mods[step];
        let d_out = mods[step + 1];
        // Split the sum-of-powers factors; the same for every term.
        let mut increments: Vec<Vec<u64>> = vec![vec![0; atoms.len()]];
        let mut sum_orders = 0u64;
        for (parts, l, n) in sums.iter_mut() {
            let (k, r) = skoda_split(*n, q, *l);
            *n = k;
            let min_ord = parts.iter().map(|(i, m)| atoms[*i].order.saturating_mul(*m)).min().unwrap_or(0);
            sum_orders = sum_orders.saturating_add(k.saturating_mul(min_ord));
            let mut next = Vec::new();
            for comp in compositions(r, parts.len()) {
                for inc in &increments {
                    let mut v = inc.clone();
                    for ((i, m), j) in parts.iter().zip(&comp) {
                        v[*i] += m * j;
                    }
                    next.push(v);
                }
            }
            next.sort();
            next.dedup();
            increments = next;
        }

        let mut next_terms: BTreeMap<Vec<u64>, Ideal> = BTreeMap::new();
        for (exps, zt) in &terms {
            let zord = zt.order();
            for inc in &increments {
                let mut keep_exps = Vec::with_capacity(atoms.len());
                let mut rho = Vec::with_capacity(atoms.len());
                let mut outer_ord = sum_orders;
                let mut inner_ord = zord.saturating_add(d.a().saturating_mul(ord_f));
                for (i, atom) in atoms.iter().enumerate() {
                    let total = exps[i] + inc[i];
                    let (k, r) = skoda_split(total, q, atom.mu);
                    keep_exps.push(k);
                    rho.push(r);
                    outer_ord = outer_ord.saturating_add(k.saturating_mul(atom.order));
                    inner_ord = inner_ord.saturating_add(r.saturating_mul(atom.order));
                }
                if let Some(dm) = d_out {
                    let root_ord = inner_ord.saturating_sub(emb * (q - 1)).div_ceil(q);
                    if outer_ord.saturating_add(root_ord) >= dm {
                        continue;
                    }
                }
                let mut y = zt.clone();
                for (i, r) in rho.iter().enumerate() {
                    if *r > 0 {
                        if let Some(dm) = d_in {
                            if r.saturating_mul(atoms[i].order) >= dm {
                                y = Ideal::zero(&ring);
                                break;
                            }
                        }
                        let pw = atoms[i].power(*r);
                        y = mul_mod(&y, &pw, d_in);
                    }
                }
                if y.is_zero() {
                    continue;
                }
                let mut root = pair_step(&y, d);
                if let Some(dm) = d_out {
                    root = root.truncated(dm);
                }
                if root.is_zero() {
                    continue;
                }
                match next_terms.get_mut(&keep_exps) {
                    Some(acc) => *acc = acc.add_ideal(&root),
                    None => {
                        next_terms.insert(keep_exps, root);
                    }
                }
            }
        }
        terms = prune_dominated(next_terms);
    }

    // Materialize what is left.
    let d_fin = mods[steps as usize];
    let mut result = Ideal::zero(&ring);
    let mut pending = Ideal::unit(&ring);
    for (parts, _, n) in &sums {
        if *n == 0 {
            continue;
        }
        let mut base = Ideal::zero(&ring);
        for (i, m) in parts {
            let c = &atoms[*i];
            if d_fin.is_some_and(|dm| c.order.saturating_mul(*m) >= dm) {
                continue;
            }
            base = base.add_ideal(&power_mod(&c.ideal, *m, d_fin));
        }
        pending = mul_mod(&pending, &power_mod(&base, *n, d_fin), d_fin);
    }
    for (exps, zt) in terms {
        let mut t = mul_mod(&zt, &pending, d_fin);
        for (i, k) in exps.iter().enumerate() {
            if *k == 0 {
                continue;
            }
            if d_fin.is_some_and(|dm| k.saturating_mul(atoms[i].order) >= dm) {
                t = Ideal::zero(&ring);
                break;
            }
            t = mul_mod(&t, &power_mod(&atoms[i].ideal, *k, d_fin), d_fin);
        }
        result = result.add_ideal(&t);
    }
    Ok(result)
}

/// `a^k`, optionally modulo `m^d`.
pub(crate) fn power_mod(a: &Ideal, k: u64, d: Option<u64>) -> Ideal {
    match d {
        None => a.power(k),
        Some(dm) => {
            if k == 0 {
                return Ideal::unit(a.ring());
            }
            if a.order().saturating_mul(k) >= dm {
                return Ideal::zero(a.ring());
            }
            let mut result = Ideal::unit(a.ring());
            let mut base = a.truncated(dm);
            let mut k = k;
            while k > 0 {
                if k & 1 == 1 {
                    result = mul_mod(&result, &base, d);
                }
                k >>= 1;
                if k > 0 {
                    base = mul_mod(&base, &base, d);
                }
            }
            result
        }
    }
}

/// Drops terms `c^E · Z` contained in another term `c^{E'} · Z'` with `E' <= E`, `Z ⊆ Z'`.
fn prune_dominated(terms: BTreeMap<Vec<u64>, Ideal>) -> BTreeMap<Vec<u64>, Ideal> {
    if terms.len() <= 1 || terms.len() > 64 {
        return terms;
    }
    let list: Vec<(Vec<u64>, Ideal)> = terms.into_iter().collect();
    let mut dead = vec![false; list.len()];
    for b in 0..list.len() {
        for a in 0..list.len() {
            if a == b || dead[a] {
                continue;
            }
            let le = list[a].0.iter().zip(&list[b].0).all(|(x, y)| x <= y);
            if le && list[b].1.is_subset_of(&list[a].1) {
                dead[b] = true;
                break;
            }
        }
    }
    list.into_iter()
        .zip(dead)
        .filter(|(_, d)| !d)
        .map(|(t, _)| t)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposition_examples() {
        let r = PolyRing::new(3, &["x", "y"]).unwrap();
        let c = frobenius_decompose(&r.parse("x^4*y").unwrap(), 1, &r).unwrap();
        assert_eq!(c.comps.len(), 1);
        assert_eq!(c.component(&[1, 1]).to_text(&r), "x");
        let r2 = PolyRing::new(2, &["x", "y"]).unwrap();
        let c = frobenius_decompose(&r2.parse("x^2+y^2").unwrap(), 1, &r2).unwrap();
        assert_eq!(c.component(&[0, 0]).to_text(&r2), "x + y");
    }

    #[test]
    fn eth_root_examples() {
        let r = PolyRing::new(3, &["x", "y"]).unwrap();
        let j = Ideal::parse(&r, "x^4*y").unwrap();
        assert_eq!(eth_root(&j, 1).unwrap(), Ideal::parse(&r, "x").unwrap());
        let r2 = PolyRing::new(2, &["x", "y"]).unwrap();
        let j = Ideal::parse(&r2, "x^2+y^2").unwrap();
        assert_eq!(eth_root(&j, 1).unwrap(), Ideal::parse(&r2, "x+y").unwrap());
    }

    #[test]
    fn trace_normalization() {
        let r = PolyRing::new(3, &["x", "y"]).unwrap();
        assert_eq!(trace(&r.parse("x^2*y^2").unwrap(), 3, &r).to_text(&r), "1");
        assert!(trace(&r.parse("x^2*y").unwrap(), 3, &r).is_zero());
        assert_eq!(trace(&r.parse("x^5*y^8").unwrap(), 3, &r).to_text(&r), "x*y^2");
    }

    #[test]
    fn pair_image_of_unit_along_x() {
        let r = PolyRing::new(2, &["x"]).unwrap();
        let d = PairDivisor::new(&r, r.parse("x").unwrap(), 1, 1).unwrap();
        let img = pair_trace_image(&Ideal::unit(&r), &d, 2).unwrap();
        assert!(img.is_unit());
    }

    #[test]
    fn skoda_split_bounds() {
        assert_eq!(skoda_split(5, 2, 2), (1, 3));
        assert_eq!(skoda_split(2, 2, 2), (0, 2));
        assert_eq!(skoda_split(100, 5, 1), (19, 5));
    }
}
