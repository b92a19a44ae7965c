//! Oracles shared by the integration suites. None of them touch the
//! trace machinery: they work on raw terms and plain ideal arithmetic.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use frobthresh::monomial::Monomial;
use frobthresh::qadic::ExactRational;
use frobthresh::{Ideal, PolyRing, Polynomial};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ring(p: u32, vars: &[&str]) -> Arc<PolyRing> {
    PolyRing::new(p, vars).unwrap()
}

pub fn ideal(r: &Arc<PolyRing>, s: &str) -> Ideal {
    Ideal::parse(r, s).unwrap()
}

pub fn rat(s: &str) -> ExactRational {
    s.parse().unwrap()
}

pub fn random_poly(r: &PolyRing, rng: &mut ChaCha8Rng, max_deg: u32, max_terms: usize) -> Polynomial {
    random_poly_between(r, rng, 0, max_deg, max_terms)
}

/// Random polynomial with all terms of degree in `[min_deg, max_deg]`.
pub fn random_poly_between(r: &PolyRing, rng: &mut ChaCha8Rng, min_deg: u32, max_deg: u32, max_terms: usize) -> Polynomial {
    let n = r.nvars();
    loop {
        let k = rng.gen_range(1..=max_terms);
        let terms: Vec<(Monomial, u32)> = (0..k)
            .map(|_| {
                let total = rng.gen_range(min_deg..=max_deg);
                let mut exps = vec![0u32; n];
                for _ in 0..total {
                    exps[rng.gen_range(0..n)] += 1;
                }
                (Monomial::from_exponents(&exps), rng.gen_range(1..r.p()))
            })
            .collect();
        let f = Polynomial::from_terms(n, terms, r.field());
        if !f.is_zero() {
            return f;
        }
    }
}

/// Random ideal whose generators all vanish at the origin.
pub fn random_local_ideal(r: &Arc<PolyRing>, rng: &mut ChaCha8Rng, gens: usize, max_deg: u32, max_terms: usize) -> Ideal {
    let g: Vec<Polynomial> = (0..gens)
        .map(|_| loop {
            let f = random_poly(r, rng, max_deg, max_terms);
            if f.constant_term() == 0 {
                break f;
            }
        })
        .collect();
    Ideal::new(r, g)
}

/// `I_e(J)` from the monomial-basis decomposition of each generator:
/// `g = Σ_u g_u^q x^u` with `0 <= u_i < q`, root generated by all `g_u`.
pub fn brute_eth_root(j: &Ideal, q: u32) -> Ideal {
    let r = j.ring();
    let n = r.nvars();
    let mut comps = Vec::new();
    for g in j.gens() {
        let mut by_residue: BTreeMap<Vec<u32>, Vec<(Monomial, u32)>> = BTreeMap::new();
        for (m, c) in g.terms() {
            let res: Vec<u32> = m.exponents().iter().map(|x| x % q).collect();
            let quo: Vec<u32> = m.exponents().iter().map(|x| x / q).collect();
            by_residue.entry(res).or_default().push((Monomial::from_exponents(&quo), *c));
        }
        for (_, terms) in by_residue {
            comps.push(Polynomial::from_terms(n, terms, r.field()));
        }
    }
    Ideal::new(r, comps)
}

/// `ν(q) = max{r : a^r ⊄ I^{[q]}}` by direct powering.
pub fn nu(a: &Ideal, i: &Ideal, q: u32) -> u64 {
    let target = i.frobenius_bracket(q);
    let mut cur = Ideal::unit(a.ring());
    let mut r = 0u64;
    loop {
        if cur.is_subset_of(&target) {
            return r - 1;
        }
        cur = cur.product(a).unwrap();
        r += 1;
    }
}

/// Fraction of least denominator, then least numerator, in `[lo, hi]`.
pub fn simplest_in(lo: &ExactRational, hi: &ExactRational) -> ExactRational {
    let mut den: i64 = 1;
    loop {
        let k = lo.mul_int(den).ceil();
        let c = ExactRational::new(k, den).unwrap();
        if &c <= hi {
            return c;
        }
        den += 1;
    }
}

/// Threshold from the `ν` bracket `ν/q <= c <= (ν+g)/q` at the first
/// `q = p^e >= q_min`, `g` the number of generators of `a`.
pub fn nu_threshold(a: &Ideal, i: &Ideal, q_min: u64) -> ExactRational {
    let p = a.ring().p() as u64;
    let mut q = p;
    while q < q_min {
        q *= p;
    }
    let v = nu(a, i, q as u32);
    let g = a.gens().len() as i64;
    let lo = ExactRational::new(v as i64, q as i64).unwrap();
    let hi = ExactRational::new(v as i64 + g, q as i64).unwrap();
    simplest_in(&lo, &hi)
}

/// Smallest `M` with `m^M ⊆ a`.
pub fn max_power_inside(a: &Ideal) -> u64 {
    let r = a.ring();
    (1..).find(|k| Ideal::max_power(r, *k).is_subset_of(a)).unwrap()
}
