//! F-jumping numbers, F-pure thresholds, the ν-oracle and denominator bounds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frobenius::{power_mod, PairDivisor, PowerSum};
use crate::ideal::Ideal;
use crate::qadic::{multiplicative_order, ExactRational};
use crate::testideal::{
    colength_max_power, tau_mixed_nu_mod, tau_pair, test_ideal_with, MixedExponent,
};

/// A threshold question: `fjn^I(R, Δ; a)` or the jumping numbers in `(lo, hi]`.
#[derive(Clone, Debug)]
pub struct ThresholdQuery {
    pub d: PairDivisor,
    pub a: Ideal,
    pub i: Ideal,
    pub lo: ExactRational,
    pub hi: ExactRational,
    /// Finest grid `1/p^{g_max}` used for bracketing.
    pub g_max: u32,
}

impl ThresholdQuery {
    pub fn new(d: PairDivisor, a: Ideal, i: Ideal) -> Result<Self> {
        let hi = ExactRational::from_integer(default_hi(&a, &i)?);
        let q = ThresholdQuery {
            d,
            a,
            i,
            lo: ExactRational::zero(),
            hi,
            g_max: 12,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn with_window(mut self, lo: ExactRational, hi: ExactRational) -> Result<Self> {
        self.lo = lo;
        self.hi = hi;
        self.validate()?;
        Ok(self)
    }

    pub fn with_g_max(mut self, g_max: u32) -> Self {
        self.g_max = g_max;
        self
    }

    fn validate(&self) -> Result<()> {
        if **self.a.ring() != **self.d.ring() || **self.i.ring() != **self.d.ring() {
            return Err(Error::RingMismatch("threshold query".into()));
        }
        if !self.a.is_proper_at_origin() {
            return Err(Error::Precondition("a must be contained in the maximal ideal".into()));
        }
        if self.a.is_zero() {
            return Err(Error::Precondition("a must be non-zero".into()));
        }
        self.i.colength()?;
        if !self.lo.is_positive() && !self.lo.is_zero() {
            return Err(Error::Domain("window must start at a non-negative value".into()));
        }
        if self.lo >= self.hi {
            return Err(Error::Domain("empty window".into()));
        }
        Ok(())
    }
}

/// `ℓ_I + μ(a)`, which bounds `fjn^I(a)`.
fn default_hi(a: &Ideal, i: &Ideal) -> Result<u64> {
    Ok(i.ell()? + a.minimal_generators().len() as u64)
}

/// `ν = max{r >= 0 : a^r ⊄ I^{[p^e]}}`, by direct membership.
pub fn nu_oracle(a: &Ideal, i: &Ideal, e: u32) -> Result<u64> {
    a.check_ring(i)?;
    if !a.is_proper_at_origin() || a.is_zero() {
        return Err(Error::Precondition(
            "a must be a non-zero ideal inside the maximal ideal".into(),
        ));
    }
    let ib = i.bracket_power(e)?;
    let ell = ib.ell()?;
    if ell == 0 {
        return Err(Error::Precondition("I must be a proper ideal".into()));
    }
    // a^r ⊆ m^r ⊆ I^{[q]} once r >= ell
    let mut pw = Ideal::unit(a.ring());
    for r in 0..=ell {
        if pw.is_subset_of(&ib) {
            return Ok(r - 1);
        }
        pw = power_mod(&pw.mul_ideal(a), 1, Some(ell));
    }
    Ok(ell - 1)
}

/// Outcome of a threshold search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FjnResult {
    pub value: Option<ExactRational>,
    /// `value ∈ (lo, hi]`; a single point once resolved.
    pub lo: ExactRational,
    pub hi: ExactRational,
    pub resolved: bool,
    /// `"nu-oracle+tau"` or `"single-method"`.
    pub provenance: String,
}

/// Simplest rational in the open interval `(a, b)`, `0 <= a < b`.
pub fn simplest_between(a: &ExactRational, b: &ExactRational) -> ExactRational {
    let fl = ExactRational::from_integer(a.floor());
    let next = &fl + &ExactRational::one();
    if &next < b {
        return next;
    }
    // a, b in [n, n+1]
    let da = a - &fl;
    let db = b - &fl;
    let inner = if da.is_zero() {
        // (0, db): 1/(1/db, ∞)
        let inv_b = &ExactRational::one() / &db;
        ExactRational::from_integer(inv_b.floor() + 1)
    } else {
        simplest_between(&(&ExactRational::one() / &db), &(&ExactRational::one() / &da))
    };
    &fl + &(&ExactRational::one() / &inner)
}

/// Searches `c = inf{t ∈ (lo, hi] : drop(t)}` for a monotone predicate.
///
/// `drop(t, left)` evaluates the predicate at `t`, or at `t - ε` when `left`.
type Refine<'a> = dyn Fn(u32, &ExactRational, &ExactRational) -> Result<(ExactRational, ExactRational)> + 'a;

/// `refine(level, lo, hi)` supplies a bracket `(lo, hi]` at the given level.
/// Candidates are the simplest fractions of the current bracket; each one
/// is either certified or shrinks the bracket.
fn threshold_search(
    mut lo: ExactRational,
    mut hi: ExactRational,
    levels: u32,
    drop: &dyn Fn(&ExactRational, bool) -> Result<bool>,
    refine: &Refine<'_>,
) -> Result<(Option<ExactRational>, ExactRational, ExactRational)> {
    const CANDIDATES_PER_LEVEL: usize = 6;
    let mut hi_open = false;
    for level in 1..=levels {
        let (l2, h2) = refine(level, &lo, &hi)?;
        if l2 > lo {
            lo = l2;
        }
        if h2 < hi {
            hi = h2;
            hi_open = false;
        }
        for _ in 0..CANDIDATES_PER_LEVEL {
            if lo >= hi {
                break;
            }
            let mid = simplest_between(&lo, &hi);
            let c = if !hi_open && hi.denom() <= mid.denom() { hi.clone() } else { mid };
            if !drop(&c, false)? {
                lo = c;
            } else if drop(&c, true)? {
                hi = c;
                hi_open = true;
            } else {
                return Ok((Some(c.clone()), c.clone(), c));
            }
        }
    }
    Ok((None, lo, hi))
}

/// Grid bracket: the `k` with `drop((k-1)/p^g)` false and `drop(k/p^g)` true.
fn grid_bracket(
    p: u64,
    g: u32,
    lo: &ExactRational,
    hi: &ExactRational,
    drop: &dyn Fn(&ExactRational, bool) -> Result<bool>,
) -> Result<(ExactRational, ExactRational)> {
    let scale = BigInt::from(p).pow(g);
    let den = ExactRational::from_integer(scale.clone());
    let mut k_lo = (lo * &den).floor(); // drop false at k_lo/p^g (<= lo)
    let mut k_hi = (hi * &den).ceil(); // may be beyond hi
    let at = |k: &BigInt| ExactRational::new(k.clone(), scale.clone());
    if at(&k_hi)? > *hi {
        k_hi = (hi * &den).floor();
        if k_hi <= k_lo || !drop(&at(&k_hi)?, false)? {
            return Ok((at(&k_lo)?.max(lo.clone()), hi.clone()));
        }
    }
    while &k_hi - &k_lo > BigInt::one() {
        let mid: BigInt = (&k_lo + &k_hi) / 2;
        if drop(&at(&mid)?, false)? {
            k_hi = mid;
        } else {
            k_lo = mid;
        }
    }
    Ok((at(&k_lo)?.max(lo.clone()), at(&k_hi)?))
}

/// `fjn^I(R, Δ; a) = inf{t >= 0 : τ(R, Δ, a^t) ⊆ I}`.
pub fn fjn(query: &ThresholdQuery) -> Result<FjnResult> {
    query.validate()?;
    let d = &query.d;
    let tau_d = tau_pair(d)?;
    if tau_d.is_subset_of(&query.i) {
        let z = ExactRational::zero();
        return Ok(FjnResult {
            value: Some(z.clone()),
            lo: z.clone(),
            hi: z,
            resolved: true,
            provenance: "trivial".into(),
        });
    }
    let a = query.a.clone();
    let i = query.i.clone();
    let drop = |t: &ExactRational, left: bool| -> Result<bool> {
        let m = MixedExponent::single(a.clone(), t.clone())?;
        Ok(test_ideal_with(d, &tau_d, &m, left)?.is_subset_of(&i))
    };
    let p = d.ring().p() as u64;
    let mu = a.minimal_generators().len() as u64;
    let use_nu = d.is_trivial();
    let refine = |level: u32, lo: &ExactRational, hi: &ExactRational| {
        if use_nu {
            let nu = nu_oracle(&a, &i, level)?;
            let q = p.pow(level);
            // ν/q < fjn <= (ν+μ)/q
            Ok((ExactRational::new(nu, q)?, ExactRational::new(nu + mu, q)?))
        } else {
            grid_bracket(p, level, lo, hi, &drop)
        }
    };
    let levels = if use_nu { query.g_max.min(nu_level_cap(p)) } else { query.g_max };
    let (value, lo, hi) = threshold_search(query.lo.clone(), query.hi.clone(), levels, &drop, &refine)?;
    Ok(FjnResult {
        resolved: value.is_some(),
        value,
        lo,
        hi,
        provenance: if use_nu { "nu-oracle+tau" } else { "single-method" }.into(),
    })
}

fn nu_level_cap(p: u64) -> u32 {
    // keep p^e within a range where bracket powers stay small
    let mut e = 1;
    while p.pow(e + 1) <= 1 << 12 {
        e += 1;
    }
    e
}

/// `fjn^{n,u}(R, Δ, a^t; b) = inf{s > 0 : τ^{n,u}(a^t b^s) ⊆ I}`.
///
/// `τ^{n,u}` only sees `⌈s q^n - 1⌉`, so the value is `(k-1)/q^n` for the
/// least `k >= 1` whose exponent `q^u (k-1)` lands inside `I`.
pub fn fjn_truncated(
    d: &PairDivisor,
    a_t: &MixedExponent,
    b: &PowerSum,
    i: &Ideal,
    n: u32,
    u: u32,
) -> Result<ExactRational> {
    let tau_d = tau_pair(d)?;
    fjn_truncated_with(d, &tau_d, a_t, b, i, n, u)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn fjn_truncated_with(
    d: &PairDivisor,
    tau_d: &Ideal,
    a_t: &MixedExponent,
    b: &PowerSum,
    i: &Ideal,
    n: u32,
    u: u32,
) -> Result<ExactRational> {
    let ell = i.ell()?;
    let q = d.q() as u64;
    let qn = q.checked_pow(n).ok_or_else(|| Error::Overflow("q^n".into()))?;
    let inside = |k: u64| -> Result<bool> {
        // s = k/q^n has ⌈s q^n - 1⌉ = k - 1
        let mut factors = a_t.factors().to_vec();
        factors.push((b.clone(), ExactRational::new(k, qn)?));
        let m = MixedExponent::new(factors)?;
        let modulus = if ell == 0 { Some(0) } else { Some(ell) };
        let t = tau_mixed_nu_mod(d, &m, n, u, Some(tau_d), modulus)?;
        Ok(ell == 0 || t.is_subset_of(i))
    };
    if inside(1)? {
        return Ok(ExactRational::zero());
    }
    let cap = qn
        .checked_mul(ell + b.skoda_l() as u64)
        .and_then(|x| x.checked_add(1))
        .ok_or_else(|| Error::Overflow("search range".into()))?;
    if !inside(cap)? {
        return Err(Error::Precondition(
            "truncated threshold exceeds its a-priori bound".into(),
        ));
    }
    let (mut lo, mut hi) = (1u64, cap);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if inside(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    ExactRational::new(hi - 1, qn)
}

/// Jumping numbers in `(lo, hi]`, with unresolved sub-intervals reported.
#[derive(Clone, Debug, Serialize)]
pub struct JumpingNumbers {
    pub values: Vec<ExactRational>,
    /// Intervals `(lo, hi]` that may still contain jumps.
    pub unresolved: Vec<(ExactRational, ExactRational)>,
}

pub fn jumping_numbers(query: &ThresholdQuery) -> Result<JumpingNumbers> {
    query.validate()?;
    let d = &query.d;
    let tau_d = tau_pair(d)?;
    let p = d.ring().p() as u64;
    let a = &query.a;
    let tau_at = |t: &ExactRational, left: bool| -> Result<Ideal> {
        if t.is_zero() {
            return Ok(tau_d.clone());
        }
        test_ideal_with(d, &tau_d, &MixedExponent::single(a.clone(), t.clone())?, left)
    };
    let mut values = Vec::new();
    let mut unresolved = Vec::new();
    let mut lo = query.lo.clone();
    loop {
        let base = tau_at(&lo, false)?;
        let drop = |t: &ExactRational, left: bool| -> Result<bool> { Ok(tau_at(t, left)? != base) };
        if !drop(&query.hi, false)? {
            break;
        }
        let refine = |level: u32, l: &ExactRational, h: &ExactRational| grid_bracket(p, level, l, h, &drop);
        let (value, l2, h2) = threshold_search(lo.clone(), query.hi.clone(), query.g_max, &drop, &refine)?;
        match value {
            Some(c) => {
                values.push(c.clone());
                lo = c;
                if lo >= query.hi {
                    break;
                }
            }
            None => {
                unresolved.push((l2, h2.clone()));
                lo = h2;
                if lo >= query.hi {
                    break;
                }
            }
        }
    }
    Ok(JumpingNumbers { values, unresolved })
}

/// The explicit denominator bound `N = q^n (q^{n!} - 1)`.
#[derive(Clone, Debug, Serialize)]
pub struct DenominatorBound {
    /// `len(R/m^M) + μ(m^M)`
    #[serde(serialize_with = "crate::qadic::serialize_bigint")]
    pub l: BigInt,
    /// `len(τ(R,Δ)/τ(R,Δ,m^{Ml}))`
    pub n: u64,
    pub q: u64,
    /// `N` itself, when small enough to hold in memory.
    #[serde(serialize_with = "crate::qadic::serialize_opt_bigint")]
    pub value: Option<BigInt>,
}

/// Bit budget for materializing `N`.
const BOUND_BITS: u64 = 1 << 20;

pub fn denominator_bound(d: &PairDivisor, big_m: u64) -> Result<DenominatorBound> {
    if big_m == 0 {
        return Err(Error::Domain("M must be positive".into()));
    }
    let ring = d.ring();
    let nv = ring.nvars();
    let l = colength_max_power(nv, big_m) + colength_max_power(nv - 1, big_m + 1);
    let tau_d = tau_pair(d)?;
    if !tau_d.is_unit() {
        return Err(Error::Unsupported(
            "denominator bound needs τ(R, Δ) = R to measure lengths".into(),
        ));
    }
    let exp = l
        .to_u64()
        .and_then(|l| l.checked_mul(big_m))
        .ok_or_else(|| Error::Overflow("m-power exponent".into()))?;
    let m = MixedExponent::single(Ideal::maximal(ring), ExactRational::from_integer(exp))?;
    let tau_m = test_ideal_with(d, &tau_d, &m, false)?;
    let n = tau_m.colength()?;
    let q = d.q() as u64;
    let value = bound_value(q, n);
    Ok(DenominatorBound { l, n, q, value })
}

fn bound_value(q: u64, n: u64) -> Option<BigInt> {
    let mut fact = 1u64;
    for i in 2..=n {
        fact = fact.checked_mul(i)?;
    }
    let bits_per = 64 - q.leading_zeros() as u64;
    if fact.checked_mul(bits_per)? > BOUND_BITS {
        return None;
    }
    let qb = BigInt::from(q);
    Some(qb.pow(n as u32) * (qb.pow(fact as u32) - 1))
}

impl DenominatorBound {
    /// Whether `c ∈ (1/N)ℤ`, decided from the shape `q^n (q^{n!} - 1)`
    /// without forming `N`.
    pub fn divides(&self, c: &ExactRational) -> bool {
        if let Some(nv) = &self.value {
            return (nv % c.denom()).is_zero();
        }
        let mut den = c.denom().clone();
        let q = BigInt::from(self.q);
        let mut qn = BigInt::one();
        for _ in 0..self.n {
            let g = den.gcd(&q);
            if g.is_one() {
                break;
            }
            den /= &g;
            qn *= g;
        }
        let g = den.gcd(&q);
        if !g.is_one() {
            return false;
        }
        // den | q^{n!} - 1 iff ord_den(q) | n!
        let cap = 1u32 << 20;
        match multiplicative_order(self.q, &den, cap) {
            Some(ord) => factorial_divisible(self.n, ord as u64),
            None => false,
        }
    }
}

fn factorial_divisible(n: u64, d: u64) -> bool {
    if d <= n.max(1) {
        return true;
    }
    let mut rem = d;
    for i in 2..=n {
        let g = rem.gcd(&i);
        rem /= g;
        if rem == 1 {
            return true;
        }
    }
    rem == 1
}

/// The orbit map `b ↦ (q^m b - ⌊q^m b⌋) + min{l-1, ⌊q^m b⌋}`.
pub fn orbit_map(b: &ExactRational, q: u64, l: u64, m: u32) -> ExactRational {
    let s = b * &ExactRational::power_of(q, m as i64);
    let fl = s.floor();
    let frac = &s - &ExactRational::from_integer(fl.clone());
    let cap = BigInt::from(l.saturating_sub(1));
    &frac + &ExactRational::from_integer(fl.min(cap))
}
