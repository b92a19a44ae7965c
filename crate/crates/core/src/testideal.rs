//! Test ideals `τ(R, Δ, a^t)`, the approximations `τ₊^{en}` and `τ^{n,u}`,
//! and stabilization exponents.
//!
//! Full test ideals are certified: for admissible `t` the exponent is
//! rescaled to `s = q'^K t` with `(q'-1)s ∈ ℕ` and `s > l`, where the chain
//! `J_{n+1} = φ^{e'}_Δ(a^{(q'-1)s} J_n)` is the iteration of one monotone
//! operator, so its first repetition is the limit.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frobenius::{trace_of_product, PairDivisor, PowerSum, TraceFactor};
use crate::ideal::Ideal;
use crate::qadic::{admissible_form, ExactRational, H_MAX};

/// A product `a_1^{t_1} ⋯ a_m^{t_m}`.
#[derive(Clone, Debug)]
pub struct MixedExponent {
    factors: Vec<(PowerSum, ExactRational)>,
}

impl MixedExponent {
    pub fn new(factors: Vec<(PowerSum, ExactRational)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Domain("empty mixed exponent".into()));
        }
        if let Some((_, t)) = factors.iter().find(|(_, t)| !t.is_positive() && !t.is_zero()) {
            return Err(Error::Domain(format!("negative exponent {t}")));
        }
        let ring = factors[0].0.ring().clone();
        for (b, _) in &factors {
            if **b.ring() != *ring {
                return Err(Error::RingMismatch("mixed exponent factors".into()));
            }
            if !b.is_proper_at_origin() && !b.is_unit() {
                return Err(Error::Precondition(format!(
                    "ideal {} is not contained in the maximal ideal",
                    b.describe()
                )));
            }
        }
        Ok(MixedExponent { factors })
    }

    pub fn single(a: Ideal, t: ExactRational) -> Result<Self> {
        MixedExponent::new(vec![(PowerSum::plain(a), t)])
    }

    pub fn factors(&self) -> &[(PowerSum, ExactRational)] {
        &self.factors
    }

    /// `None` when the product is zero; otherwise the factors that matter.
    fn effective(&self) -> Option<Vec<(&PowerSum, &ExactRational)>> {
        let mut out = Vec::new();
        for (b, t) in &self.factors {
            if t.is_zero() || b.is_unit() {
                continue;
            }
            if b.is_zero() {
                return None;
            }
            out.push((b, t));
        }
        Some(out)
    }

    /// The same ideals with every exponent replaced via `f`.
    pub fn map_exponents(&self, f: impl Fn(&ExactRational) -> ExactRational) -> MixedExponent {
        MixedExponent {
            factors: self.factors.iter().map(|(b, t)| (b.clone(), f(t))).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertMode {
    FixedOperator,
    WindowHeuristic,
}

/// How a test ideal value was certified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TauChainCertificate {
    /// Applications of the chain operator until the first repetition.
    pub stable_index: u32,
    pub burn_in: u32,
    /// Generators of the fixed point.
    pub witness: Vec<String>,
    pub mode: CertMode,
    /// Frobenius exponent of the chain operator.
    pub chain_e: u32,
    /// Number of chain-operator traces taken after stabilization.
    pub shift: u32,
}

impl TauChainCertificate {
    fn trivial(value: &Ideal, e: u32) -> Self {
        TauChainCertificate {
            stable_index: 0,
            burn_in: 0,
            witness: value.to_strings(),
            mode: CertMode::FixedOperator,
            chain_e: e,
            shift: 0,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.mode == CertMode::FixedOperator
    }
}

pub(crate) fn to_u64(x: &BigInt, what: &str) -> Result<u64> {
    x.to_u64()
        .ok_or_else(|| Error::Overflow(format!("{what} does not fit in 64 bits")))
}

/// `τ(R, Δ)`.
pub fn tau_pair(d: &PairDivisor) -> Result<Ideal> {
    Ok(tau_pair_certified(d)?.0)
}

pub fn tau_pair_certified(d: &PairDivisor) -> Result<(Ideal, TauChainCertificate)> {
    let ring = d.ring();
    if d.is_trivial() {
        let r = Ideal::unit(ring);
        let cert = TauChainCertificate::trivial(&r, d.e());
        return Ok((r, cert));
    }
    // τ(R, Δ) = τ(R, f^{a/(q-1)}).
    let t = ExactRational::new(d.a(), d.q() as u64 - 1)?;
    let m = MixedExponent::single(Ideal::principal(ring, d.f().clone()), t)?;
    let trivial = PairDivisor::trivial(ring, d.e())?;
    certified_tau(&trivial, &Ideal::unit(ring), &m, false)
}

/// Plan for evaluating `τ` at `t` through a fixed-operator chain.
struct ChainPlan {
    mult: u32,
    chain_d: PairDivisor,
    shift: u32,
    /// `(q'-1) s'_i`
    step_exps: Vec<u64>,
    /// `⌈s'_i⌉`
    start_exps: Vec<u64>,
    /// Skoda offsets `s_i - s'_i`.
    offsets: Vec<u64>,
}

fn plan_chain(d: &PairDivisor, factors: &[(&PowerSum, &ExactRational)]) -> Result<ChainPlan> {
    let p = d.ring().p() as u64;
    let mut e2 = d.e() as u64;
    let mut g_max = 0u32;
    for (_, t) in factors {
        let (g, h) = admissible_form(t, p, H_MAX).ok_or_else(|| {
            Error::Domain(format!(
                "exponent {t} is not of the form c/(p^g (p^h - 1)) with h <= {H_MAX}"
            ))
        })?;
        e2 = e2.lcm(&(h as u64));
        g_max = g_max.max(g);
    }
    let mult = (e2 / d.e() as u64) as u32;
    let chain_d = d.with_multiple(mult)?;
    let q2 = BigInt::from(d.ring().q(chain_d.e())?);
    let mut shift = g_max.div_ceil(chain_d.e());
    let ls: Vec<u64> = factors.iter().map(|(b, _)| b.skoda_l() as u64).collect();
    loop {
        let scale = ExactRational::from_integer(q2.pow(shift));
        if factors
            .iter()
            .zip(&ls)
            .all(|((_, t), l)| (*t * &scale) > ExactRational::from_integer(*l))
        {
            break;
        }
        shift += 1;
    }
    let scale = ExactRational::from_integer(q2.pow(shift));
    let mut step_exps = Vec::new();
    let mut start_exps = Vec::new();
    let mut offsets = Vec::new();
    for ((_, t), l) in factors.iter().zip(&ls) {
        let s = *t * &scale;
        let offset: BigInt = s.ceil() - BigInt::from(*l) - BigInt::from(1);
        let offset = offset.max(BigInt::zero());
        let s2 = &s - &ExactRational::from_integer(offset.clone());
        let a = (&s2 * &ExactRational::from_integer(&q2 - 1)).numer().clone();
        step_exps.push(to_u64(&a, "chain exponent")?);
        start_exps.push(to_u64(&s2.ceil(), "chain exponent")?);
        offsets.push(to_u64(&offset, "Skoda offset")?);
    }
    Ok(ChainPlan {
        mult,
        chain_d,
        shift,
        step_exps,
        start_exps,
        offsets,
    })
}

fn trace_factors<'a>(factors: &[(&'a PowerSum, &ExactRational)], exps: &[u64]) -> Vec<TraceFactor<'a>> {
    factors
        .iter()
        .zip(exps)
        .map(|((b, _), n)| TraceFactor {
            base: b,
            exponent: *n,
        })
        .collect()
}

/// `τ(a^t)` (or `τ(a^{t-ε})` when `left` is set) with certificate.
fn certified_tau(
    d: &PairDivisor,
    tau_d: &Ideal,
    m: &MixedExponent,
    left: bool,
) -> Result<(Ideal, TauChainCertificate)> {
    let ring = d.ring();
    let factors = match m.effective() {
        None => {
            let z = Ideal::zero(ring);
            let c = TauChainCertificate::trivial(&z, d.e());
            return Ok((z, c));
        }
        Some(f) => f,
    };
    if factors.is_empty() {
        let c = TauChainCertificate::trivial(tau_d, d.e());
        return Ok((tau_d.clone(), c));
    }
    let plan = plan_chain(d, &factors)?;
    let step = |x: &Ideal| -> Result<Ideal> {
        trace_of_product(d, plan.mult, &trace_factors(&factors, &plan.step_exps), x, None)
    };
    let mut cur = if left {
        // τ(a^{⌈s'⌉-1}) starts the descending chain of left limits.
        let start = MixedExponent {
            factors: factors
                .iter()
                .zip(&plan.start_exps)
                .map(|((b, _), n)| ((*b).clone(), ExactRational::from_integer(n - 1)))
                .collect(),
        };
        certified_tau(d, tau_d, &start, false)?.0
    } else {
        trace_of_product(d, 0, &trace_factors(&factors, &plan.start_exps), tau_d, None)?
    };
    let mut index = 0u32;
    loop {
        let next = step(&cur)?;
        if next == cur {
            break;
        }
        cur = next;
        index += 1;
    }
    let witness = cur.to_strings();
    let value = trace_of_product(
        d,
        plan.mult * plan.shift,
        &trace_factors(&factors, &plan.offsets),
        &cur,
        None,
    )?;
    let cert = TauChainCertificate {
        stable_index: index,
        burn_in: 0,
        witness,
        mode: CertMode::FixedOperator,
        chain_e: plan.chain_d.e(),
        shift: plan.shift,
    };
    Ok((value, cert))
}

/// The test ideal `τ(R, Δ, ∏ a_i^{t_i})` with its certificate.
pub fn test_ideal(d: &PairDivisor, m: &MixedExponent) -> Result<(Ideal, TauChainCertificate)> {
    check_ring(d, m)?;
    let tau_d = tau_pair(d)?;
    certified_tau(d, &tau_d, m, false)
}

/// `τ(R, Δ, ∏ a_i^{t_i - ε})` for small `ε > 0`.
pub fn test_ideal_left(d: &PairDivisor, m: &MixedExponent) -> Result<(Ideal, TauChainCertificate)> {
    check_ring(d, m)?;
    let tau_d = tau_pair(d)?;
    if m.effective().is_some_and(|f| f.is_empty()) {
        return Ok((tau_d.clone(), TauChainCertificate::trivial(&tau_d, d.e())));
    }
    certified_tau(d, &tau_d, m, true)
}

/// Test ideal computation reusing a known `τ(R, Δ)`.
pub(crate) fn test_ideal_with(
    d: &PairDivisor,
    tau_d: &Ideal,
    m: &MixedExponent,
    left: bool,
) -> Result<Ideal> {
    Ok(certified_tau(d, tau_d, m, left)?.0)
}

fn check_ring(d: &PairDivisor, m: &MixedExponent) -> Result<()> {
    if m.factors.iter().any(|(b, _)| **b.ring() != **d.ring()) {
        return Err(Error::RingMismatch("divisor and exponent live in different rings".into()));
    }
    Ok(())
}

/// `⌈t q^n⌉ + offset` as an exponent.
fn scaled_ceil(t: &ExactRational, q: u64, n: u32, minus_one: bool) -> Result<BigInt> {
    let v = (t * &ExactRational::power_of(q, n as i64)).ceil();
    Ok(if minus_one { v - 1 } else { v })
}

/// `τ₊^{en}(R, Δ, a^t) = φ^{en}_Δ(∏ a_i^{⌈t_i q^n⌉} · τ(R, Δ))`.
pub fn tau_plus(d: &PairDivisor, m: &MixedExponent, n: u32) -> Result<Ideal> {
    check_ring(d, m)?;
    let tau_d = tau_pair(d)?;
    tau_plus_with(d, &tau_d, m, n)
}

pub(crate) fn tau_plus_with(d: &PairDivisor, tau_d: &Ideal, m: &MixedExponent, n: u32) -> Result<Ideal> {
    let factors = match m.effective() {
        None => return Ok(Ideal::zero(d.ring())),
        Some(f) => f,
    };
    let q = d.q() as u64;
    let exps = factors
        .iter()
        .map(|(_, t)| to_u64(&scaled_ceil(t, q, n, false)?, "exponent"))
        .collect::<Result<Vec<_>>>()?;
    trace_of_product(d, n, &trace_factors(&factors, &exps), tau_d, None)
}

/// `τ^{n,u}_{e,q}(R, Δ, a^t) = φ^{e(n+u)}_Δ(∏ a_i^{q^u ⌈t_i q^n - 1⌉} · q_aux)`,
/// with `q_aux = τ(R, Δ)` by default.
pub fn tau_mixed_nu(
    d: &PairDivisor,
    m: &MixedExponent,
    n: u32,
    u: u32,
    q_aux: Option<&Ideal>,
) -> Result<Ideal> {
    tau_mixed_nu_mod(d, m, n, u, q_aux, None)
}

/// As [`tau_mixed_nu`], determined only modulo `m^modulus` when given.
pub fn tau_mixed_nu_mod(
    d: &PairDivisor,
    m: &MixedExponent,
    n: u32,
    u: u32,
    q_aux: Option<&Ideal>,
    modulus: Option<u64>,
) -> Result<Ideal> {
    check_ring(d, m)?;
    let owned;
    let z = match q_aux {
        Some(z) => z,
        None => {
            owned = tau_pair(d)?;
            &owned
        }
    };
    let factors = match m.effective() {
        None => return Ok(Ideal::zero(d.ring())),
        Some(f) => f,
    };
    let q = d.q() as u64;
    let qu = BigInt::from(q).pow(u);
    let exps = factors
        .iter()
        .map(|(_, t)| to_u64(&(&qu * scaled_ceil(t, q, n, true)?), "exponent"))
        .collect::<Result<Vec<_>>>()?;
    trace_of_product(d, n + u, &trace_factors(&factors, &exps), z, modulus)
}

/// Result of a stabilization exponent computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabResult {
    pub value: u32,
    pub certified: bool,
}

/// Least `n` with `τ₊^{en}(a^t) = τ(a^t)`, searching up to `cap`.
pub fn stab_exponent(d: &PairDivisor, m: &MixedExponent, cap: u32) -> Result<StabResult> {
    check_ring(d, m)?;
    let tau_d = tau_pair(d)?;
    let target = certified_tau(d, &tau_d, m, false)?.0;
    for n in 0..=cap {
        if tau_plus_with(d, &tau_d, m, n)? == target {
            return Ok(StabResult {
                value: n,
                certified: true,
            });
        }
    }
    Ok(StabResult {
        value: cap,
        certified: false,
    })
}

/// Outcome of a bounded `ustab` enumeration.
#[derive(Clone, Debug, Serialize)]
pub struct UstabResult {
    pub value: u32,
    pub certified: bool,
    /// The exponents attaining the maximum.
    pub argmax: Vec<ExactRational>,
    pub evaluated: usize,
    /// The a-priori bound for ideals containing `m^M`, when computable.
    #[serde(serialize_with = "crate::qadic::serialize_opt_bigint")]
    pub a_priori_bound: Option<BigInt>,
}

/// `ustab(R, Δ, a_•; e)`: the largest stabilization exponent over all `t`
/// with `(q-1)t_i ∈ ℕ`; only `t_i <= μ(a_i)` need to be enumerated.
pub fn ustab_bounded(d: &PairDivisor, a_list: &[Ideal], search_cap: u32) -> Result<UstabResult> {
    if a_list.is_empty() {
        return Err(Error::Domain("empty ideal list".into()));
    }
    let q = d.q() as u64;
    let ranges: Vec<u64> = a_list
        .iter()
        .map(|a| (a.minimal_generators().len() as u64).max(1) * (q - 1))
        .collect();
    let total: u64 = ranges.iter().product();
    if total > 100_000 {
        return Err(Error::Unsupported(format!("{total} exponent tuples to enumerate")));
    }
    let mut idx = vec![1u64; a_list.len()];
    let mut best: Option<(u32, Vec<ExactRational>)> = None;
    let mut certified = true;
    let mut evaluated = 0usize;
    let tau_d = tau_pair(d)?;
    loop {
        let ts: Vec<ExactRational> = idx
            .iter()
            .map(|k| ExactRational::new(*k, q - 1))
            .collect::<Result<_>>()?;
        let m = MixedExponent::new(
            a_list.iter().cloned().map(PowerSum::plain).zip(ts.iter().cloned()).collect(),
        )?;
        let target = certified_tau(d, &tau_d, &m, false)?.0;
        let mut found = None;
        for n in 0..=search_cap {
            if tau_plus_with(d, &tau_d, &m, n)? == target {
                found = Some(n);
                break;
            }
        }
        evaluated += 1;
        let v = found.unwrap_or_else(|| {
            certified = false;
            search_cap
        });
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, ts));
        }
        // advance the odometer
        let mut i = 0;
        loop {
            if i == idx.len() {
                let (value, argmax) = best.unwrap();
                let a_priori_bound = if a_list.len() == 1 {
                    stab_a_priori_bound(d, &tau_d, &a_list[0])?
                } else {
                    None
                };
                return Ok(UstabResult {
                    value,
                    certified,
                    argmax,
                    evaluated,
                    a_priori_bound,
                });
            }
            idx[i] += 1;
            if idx[i] <= ranges[i] {
                break;
            }
            idx[i] = 1;
            i += 1;
        }
    }
}

/// `len(R/m^k)` for the polynomial ring in `n` variables.
pub fn colength_max_power(n: usize, k: u64) -> BigInt {
    // binomial(k - 1 + n, n)
    let mut acc = BigInt::from(1);
    for i in 0..n as u64 {
        acc = acc * BigInt::from(k + i) / BigInt::from(i + 1);
    }
    acc
}

/// `len(τ(R, Δ) / m^k τ(R, Δ))`, available when `τ(R, Δ) = R`.
pub fn tau_colength_max_power(tau_d: &Ideal, k: u64) -> Option<BigInt> {
    if tau_d.is_unit() {
        Some(colength_max_power(tau_d.ring().nvars(), k))
    } else {
        None
    }
}

/// The bound `u_0` on `ustab` for ideals containing `m^M`.
fn stab_a_priori_bound(d: &PairDivisor, tau_d: &Ideal, a: &Ideal) -> Result<Option<BigInt>> {
    let mm = match a.ell() {
        Ok(k) if k > 0 => k,
        _ => return Ok(None),
    };
    let n = d.ring().nvars();
    let l = colength_max_power(n, mm) + colength_max_power(n - 1, mm + 1);
    let q = BigInt::from(d.q());
    let mut n0 = 1u32;
    while q.pow(n0 - 1) <= l {
        n0 += 1;
    }
    let k = &l * BigInt::from(mm) * q.pow(n0);
    let k = match k.to_u64() {
        Some(k) => k,
        None => return Ok(None),
    };
    Ok(tau_colength_max_power(tau_d, k).map(|c| c + BigInt::from(n0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::PolyRing;

    fn r(s: &str) -> ExactRational {
        s.parse().unwrap()
    }

    #[test]
    fn tau_pair_examples() {
        let ring = PolyRing::new(2, &["x"]).unwrap();
        let d0 = PairDivisor::trivial(&ring, 1).unwrap();
        assert!(tau_pair(&d0).unwrap().is_unit());
        let d = PairDivisor::new(&ring, ring.parse("x").unwrap(), 1, 1).unwrap();
        assert_eq!(tau_pair(&d).unwrap(), Ideal::parse(&ring, "x").unwrap());
        let d = PairDivisor::new(&ring, ring.parse("x").unwrap(), 0, 1).unwrap();
        assert!(tau_pair(&d).unwrap().is_unit());
    }

    #[test]
    fn tau_plus_examples() {
        let r3 = PolyRing::new(3, &["x"]).unwrap();
        let d = PairDivisor::trivial(&r3, 1).unwrap();
        let m = MixedExponent::single(Ideal::parse(&r3, "x^2").unwrap(), r("1/2")).unwrap();
        assert_eq!(tau_plus(&d, &m, 1).unwrap(), Ideal::parse(&r3, "x").unwrap());

        let r2 = PolyRing::new(2, &["x", "y"]).unwrap();
        let d = PairDivisor::trivial(&r2, 1).unwrap();
        let mm = Ideal::maximal(&r2);
        let m = MixedExponent::single(mm.clone(), r("2")).unwrap();
        assert_eq!(tau_plus(&d, &m, 0).unwrap(), mm.power(2));
        assert_eq!(tau_plus(&d, &m, 1).unwrap(), mm);
    }

    #[test]
    fn tau_mixed_nu_examples() {
        let r2 = PolyRing::new(2, &["x"]).unwrap();
        let d = PairDivisor::trivial(&r2, 1).unwrap();
        let m = MixedExponent::single(Ideal::parse(&r2, "x").unwrap(), r("1")).unwrap();
        assert!(tau_mixed_nu(&d, &m, 0, 0, Some(&Ideal::unit(&r2))).unwrap().is_unit());
        assert!(tau_mixed_nu(&d, &m, 2, 1, None).unwrap().is_unit());
    }

    #[test]
    fn test_ideal_examples() {
        let r2 = PolyRing::new(2, &["x", "y"]).unwrap();
        let d = PairDivisor::trivial(&r2, 1).unwrap();
        let mm = Ideal::maximal(&r2);
        let (tau, cert) = test_ideal(&d, &MixedExponent::single(mm.clone(), r("2")).unwrap()).unwrap();
        assert_eq!(tau, mm);
        assert!(cert.is_certified());

        let r3 = PolyRing::new(3, &["x"]).unwrap();
        let d3 = PairDivisor::trivial(&r3, 1).unwrap();
        let a = Ideal::parse(&r3, "x^2").unwrap();
        let (tau, _) = test_ideal(&d3, &MixedExponent::single(a, r("1/2")).unwrap()).unwrap();
        assert_eq!(tau, Ideal::parse(&r3, "x").unwrap());

        let r1 = PolyRing::new(2, &["x"]).unwrap();
        let d1 = PairDivisor::trivial(&r1, 1).unwrap();
        let a = Ideal::parse(&r1, "x^3").unwrap();
        let (tau, _) = test_ideal(&d1, &MixedExponent::single(a.clone(), r("1/4")).unwrap()).unwrap();
        assert!(tau.is_unit());
        let (tau, _) = test_ideal(&d1, &MixedExponent::single(a.clone(), r("1/3")).unwrap()).unwrap();
        assert_eq!(tau, Ideal::parse(&r1, "x").unwrap());
        let (left, _) = test_ideal_left(&d1, &MixedExponent::single(a, r("1/3")).unwrap()).unwrap();
        assert!(left.is_unit());
    }

    #[test]
    fn stab_examples() {
        let r2 = PolyRing::new(2, &["x", "y"]).unwrap();
        let d = PairDivisor::trivial(&r2, 1).unwrap();
        let m = MixedExponent::single(Ideal::maximal(&r2), r("2")).unwrap();
        assert_eq!(stab_exponent(&d, &m, 10).unwrap().value, 1);
    }

    #[test]
    fn colength_formula() {
        assert_eq!(colength_max_power(2, 6), BigInt::from(21));
        assert_eq!(colength_max_power(3, 1), BigInt::from(1));
    }
}
