//! Buchberger's algorithm with the Gebauer–Möller pair criteria.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use crate::field::Fp;
use crate::monomial::Monomial;
use crate::poly::Polynomial;

/// Full normal form of `f` modulo `basis` (tail reduced).
pub fn normal_form(f: &Polynomial, basis: &[Polynomial], fp: Fp) -> Polynomial {
    normal_form_below(f, basis, fp, None)
}

/// Normal form where terms of degree `>= cutoff` are discarded as they appear.
/// For homogeneous bases this is the normal form modulo `basis + m^cutoff`.
pub fn normal_form_below(
    f: &Polynomial,
    basis: &[Polynomial],
    fp: Fp,
    cutoff: Option<u64>,
) -> Polynomial {
    let nvars = f.nvars();
    let keep = |m: &Monomial| cutoff.is_none_or(|d| m.degree() < d);
    let mut work: BTreeMap<Monomial, u32> = f
        .terms()
        .iter()
        .filter(|(m, _)| keep(m))
        .map(|(m, c)| (m.clone(), *c))
        .collect();
    if basis.is_empty() {
        let terms = work.into_iter().rev().collect();
        return Polynomial::from_sorted_terms(nvars, terms);
    }
    let leads: Vec<(&Monomial, u32)> = basis
        .iter()
        .map(|g| (g.lead_monomial().expect("zero polynomial in basis"), g.lead_coeff()))
        .collect();
    let mut rem: Vec<(Monomial, u32)> = Vec::new();
    while let Some((m, c)) = work.pop_last() {
        let hit = leads.iter().position(|(lm, _)| lm.divides(&m));
        match hit {
            None => rem.push((m, c)),
            Some(i) => {
                let g = &basis[i];
                let factor = fp.mul(c, fp.inv(leads[i].1));
                let shift = leads[i].0.quotient_of(&m);
                for (gm, gc) in &g.terms()[1..] {
                    let t = gm.mul(&shift);
                    if !keep(&t) {
                        continue;
                    }
                    let delta = fp.neg(fp.mul(factor, *gc));
                    match work.entry(t) {
                        Entry::Occupied(mut o) => {
                            let v = fp.add(*o.get(), delta);
                            if v == 0 {
                                o.remove();
                            } else {
                                *o.get_mut() = v;
                            }
                        }
                        Entry::Vacant(v) => {
                            v.insert(delta);
                        }
                    }
                }
            }
        }
    }
    Polynomial::from_sorted_terms(nvars, rem)
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
}

/// Reduced Gröbner basis: monic, inter-reduced, sorted by increasing lead monomial.
pub fn reduced_groebner_basis(gens: &[Polynomial], fp: Fp) -> Vec<Polynomial> {
    let mut input: Vec<Polynomial> = gens.iter().filter(|g| !g.is_zero()).map(|g| g.make_monic(fp)).collect();
    if input.is_empty() {
        return Vec::new();
    }
    if input.iter().any(|g| g.is_constant()) {
        return vec![Polynomial::one(input[0].nvars())];
    }
    if input.iter().all(|g| g.is_monomial()) {
        return minimal_monomials(input);
    }
    input.sort_by(|a, b| a.lead_monomial().cmp(&b.lead_monomial()));
    input.dedup();

    let mut polys: Vec<Polynomial> = Vec::new();
    let mut active: Vec<bool> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    for g in input {
        let h = normal_form(&g, &active_polys(&polys, &active), fp);
        if !h.is_zero() {
            if h.is_constant() {
                return vec![Polynomial::one(h.nvars())];
            }
            insert(h.make_monic(fp), &mut polys, &mut active, &mut pairs);
        }
    }
    while !pairs.is_empty() {
        let best = (0..pairs.len())
            .min_by(|&a, &b| pairs[a].lcm.cmp(&pairs[b].lcm))
            .unwrap();
        let pair = pairs.swap_remove(best);
        let s = s_polynomial(&polys[pair.i], &polys[pair.j], &pair.lcm, fp);
        let h = normal_form(&s, &active_polys(&polys, &active), fp);
        if h.is_zero() {
            continue;
        }
        if h.is_constant() {
            return vec![Polynomial::one(h.nvars())];
        }
        insert(h.make_monic(fp), &mut polys, &mut active, &mut pairs);
    }
    let basis = active_polys(&polys, &active);
    interreduce(basis, fp)
}

fn active_polys(polys: &[Polynomial], active: &[bool]) -> Vec<Polynomial> {
    polys
        .iter()
        .zip(active)
        .filter(|(_, a)| **a)
        .map(|(p, _)| p.clone())
        .collect()
}

fn s_polynomial(f: &Polynomial, g: &Polynomial, lcm: &Monomial, fp: Fp) -> Polynomial {
    let lf = f.lead_monomial().unwrap();
    let lg = g.lead_monomial().unwrap();
    let a = f.mul_monomial(&lf.quotient_of(lcm)).scale(fp.inv(f.lead_coeff()), fp);
    let b = g.mul_monomial(&lg.quotient_of(lcm)).scale(fp.inv(g.lead_coeff()), fp);
    a.sub(&b, fp)
}

/// Gebauer–Möller update for a new basis element.
fn insert(h: Polynomial, polys: &mut Vec<Polynomial>, active: &mut Vec<bool>, pairs: &mut Vec<Pair>) {
    let k = polys.len();
    let lh = h.lead_monomial().unwrap().clone();

    let mut cands: Vec<(usize, Monomial, bool)> = Vec::new();
    for (i, g) in polys.iter().enumerate() {
        if !active[i] {
            continue;
        }
        let lg = g.lead_monomial().unwrap();
        cands.push((i, lh.lcm(lg), lh.is_coprime(lg)));
    }
    // Chain criterion among the new pairs: drop (h, g1) if some other lcm(h, g2) divides it.
    let mut keep = vec![true; cands.len()];
    for a in 0..cands.len() {
        if cands[a].2 {
            continue;
        }
        for b in 0..cands.len() {
            if a == b || !keep[b] {
                continue;
            }
            if cands[b].1.divides(&cands[a].1) && (cands[b].1 != cands[a].1 || b < a) {
                keep[a] = false;
                break;
            }
        }
    }
    // Drop pairs with equal lcm keeping one; drop coprime (product criterion).
    let mut fresh: Vec<Pair> = Vec::new();
    for (idx, (i, lcm, coprime)) in cands.into_iter().enumerate() {
        if !keep[idx] {
            continue;
        }
        if coprime {
            continue;
        }
        fresh.push(Pair { i, j: k, lcm });
    }

    // Old pairs made redundant by h.
    pairs.retain(|p| {
        if !lh.divides(&p.lcm) {
            return true;
        }
        let li = polys[p.i].lead_monomial().unwrap();
        let lj = polys[p.j].lead_monomial().unwrap();
        lh.lcm(li) == p.lcm || lh.lcm(lj) == p.lcm
    });
    pairs.extend(fresh);

    for (i, g) in polys.iter().enumerate() {
        if active[i] && lh.divides(g.lead_monomial().unwrap()) {
            active[i] = false;
        }
    }
    polys.push(h);
    active.push(true);
}

/// Turns a Gröbner basis into the reduced one.
pub fn interreduce(mut basis: Vec<Polynomial>, fp: Fp) -> Vec<Polynomial> {
    basis.sort_by(|a, b| a.lead_monomial().cmp(&b.lead_monomial()));
    let mut minimal: Vec<Polynomial> = Vec::new();
    for g in basis {
        let lg = g.lead_monomial().unwrap();
        if minimal.iter().any(|h| h.lead_monomial().unwrap().divides(lg)) {
            continue;
        }
        minimal.push(g);
    }
    let mut out = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let lead = Polynomial::from_sorted_terms(minimal[i].nvars(), vec![minimal[i].terms()[0].clone()]);
        let tail = minimal[i].sub(&lead, fp);
        let others: Vec<Polynomial> = minimal
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, g)| g.clone())
            .collect();
        let reduced_tail = normal_form(&tail, &others, fp);
        out.push(lead.add(&reduced_tail, fp).make_monic(fp));
    }
    out.sort_by(|a, b| a.lead_monomial().cmp(&b.lead_monomial()));
    out
}

/// Minimal generators of a monomial ideal, monic and sorted.
pub fn minimal_monomials(gens: Vec<Polynomial>) -> Vec<Polynomial> {
    let mut monos: Vec<Monomial> = gens.iter().map(|g| g.lead_monomial().unwrap().clone()).collect();
    monos.sort();
    monos.dedup();
    let mut kept: Vec<Monomial> = Vec::new();
    for m in monos {
        if !kept.iter().any(|k| k.divides(&m)) {
            kept.push(m);
        }
    }
    kept.into_iter().map(|m| Polynomial::monomial(m, 1)).collect()
}
