//! Finite-range verification of Condition (★), its sufficient criterion,
//! perturbation rigidity, stabilization of truncated test ideals, and ACC
//! probes over enumerated ideal families.
//!
//! Every statement here quantifies over all `n`; reports only ever cover the
//! explicit range they were run on.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frobenius::{PairDivisor, PowerSum};
use crate::ideal::Ideal;
use crate::monomial::{monomials_of_degree, Monomial};
use crate::parse::split_top_level;
use crate::qadic::{digits_eventually_constant, is_admissible, ExactRational, H_MAX};
use crate::ring::PolyRing;
use crate::testideal::{tau_colength_max_power, tau_mixed_nu_mod, tau_pair, MixedExponent};
use crate::thresholds::{fjn, fjn_truncated_with, ThresholdQuery};

/// The data `(R, Δ, a^t, I, e, u, N)` with a range of `n`.
#[derive(Clone, Debug)]
pub struct StarConfig {
    pub d: PairDivisor,
    pub a: Ideal,
    pub t: ExactRational,
    pub i: Ideal,
    pub u: u32,
    pub n_big: u64,
    /// Inclusive range of `n`.
    pub n_range: (u32, u32),
}

impl StarConfig {
    pub fn new(
        d: PairDivisor,
        a: Ideal,
        t: ExactRational,
        i: Ideal,
        u: u32,
        n_big: u64,
        n_range: (u32, u32),
    ) -> Result<Self> {
        if !t.is_positive() {
            return Err(Error::Domain(format!("t must be positive, got {t}")));
        }
        if !is_admissible(&t, d.ring().p() as u64, H_MAX) {
            return Err(Error::Domain(format!("exponent {t} is not admissible")));
        }
        if **a.ring() != **d.ring() || **i.ring() != **d.ring() {
            return Err(Error::RingMismatch("star configuration".into()));
        }
        if !a.is_proper_at_origin() || a.is_zero() {
            return Err(Error::Precondition("a must be non-zero and inside the maximal ideal".into()));
        }
        i.colength()?;
        if n_range.0 > n_range.1 {
            return Err(Error::Domain("empty n range".into()));
        }
        Ok(StarConfig {
            d,
            a,
            t,
            i,
            u,
            n_big,
            n_range,
        })
    }

    fn q(&self) -> u64 {
        self.d.q() as u64
    }
}

/// `fjn^{n,u}(a^t; b)` for `b` given as a sum of powers.
fn truncated_threshold(
    c: &StarConfig,
    tau_d: &Ideal,
    base: &PowerSum,
    n: u32,
) -> Result<ExactRational> {
    let m = MixedExponent::new(vec![(base.clone(), c.t.clone())])?;
    let mm = PowerSum::plain(Ideal::maximal(c.d.ring()));
    fjn_truncated_with(&c.d, tau_d, &m, &mm, &c.i, n, c.u)
}

#[derive(Clone, Debug, Serialize)]
pub struct StarRow {
    pub n: u32,
    pub fjn_n: ExactRational,
    pub fjn_next: ExactRational,
    /// `fjn_n - N/q^n`
    pub lower_bound: ExactRational,
    /// `fjn_next - lower_bound`
    pub margin: ExactRational,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    HoldsOnRange,
    Violated,
    HypothesisFailed,
    ConclusionFailed,
}

/// Hypothesis checklist of the sufficient criterion for (★).
#[derive(Clone, Debug, Serialize)]
pub struct Hypotheses {
    pub q: u64,
    pub mu: u64,
    pub mu_exact: bool,
    pub ell_i: u64,
    pub emb: u64,
    pub q_gt_mu: bool,
    pub q_gt_ell: bool,
    /// The stronger `q > μ + ℓ_I + emb`.
    pub q_gt_mu_ell_emb: bool,
    pub digit: Option<String>,
    pub digit_onset: Option<u32>,
    pub digits_constant_from_2: bool,
    pub n0: u32,
    pub t0: ExactRational,
    pub m0: String,
    pub containment: Option<bool>,
    pub containment_method: String,
    pub failed: Vec<String>,
    pub all_hold: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StarReport {
    pub n_big: u64,
    pub n_range: (u32, u32),
    pub rows: Vec<StarRow>,
    pub hypotheses: Option<Hypotheses>,
    pub verdict: Verdict,
    pub first_violation: Option<u32>,
    /// True when some value rests on an uncertified computation.
    pub unverified: bool,
}

/// Condition (★): `fjn^{n+1,u}(a^t; m) >= fjn^{n,u}(a^t; m) - N/q^n` for `n` in range.
pub fn check_condition_star(c: &StarConfig) -> Result<StarReport> {
    let tau_d = tau_pair(&c.d)?;
    let base = PowerSum::plain(c.a.clone());
    let (lo, hi) = c.n_range;
    let values: Vec<ExactRational> = (lo..=hi + 1)
        .map(|n| truncated_threshold(c, &tau_d, &base, n))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut first_violation = None;
    for n in lo..=hi {
        let k = (n - lo) as usize;
        let slack = ExactRational::new(c.n_big, BigInt::from(c.q()).pow(n))?;
        let lower_bound = &values[k] - &slack;
        let margin = &values[k + 1] - &lower_bound;
        let pass = margin.is_positive() || margin.is_zero();
        if !pass && first_violation.is_none() {
            first_violation = Some(n);
        }
        rows.push(StarRow {
            n,
            fjn_n: values[k].clone(),
            fjn_next: values[k + 1].clone(),
            lower_bound,
            margin,
            pass,
        });
    }
    Ok(StarReport {
        n_big: c.n_big,
        n_range: c.n_range,
        rows,
        hypotheses: None,
        verdict: if first_violation.is_none() { Verdict::HoldsOnRange } else { Verdict::Violated },
        first_violation,
        unverified: false,
    })
}

/// `J ⊆ K + m^{M}`, decided exactly where possible.
/// `None` when no available method decides the containment.
fn contained_mod_max_power(j: &Ideal, k: &Ideal, big_m: &BigInt) -> (Option<bool>, String) {
    if j.is_subset_of(k) {
        return (Some(true), "plain-containment".into());
    }
    if let Ok(ell) = k.ell() {
        if BigInt::from(ell) <= *big_m {
            // m^M ⊆ K already
            return (Some(false), "m-primary-target".into());
        }
    }
    let order = j.order();
    if BigInt::from(order) >= *big_m {
        return (Some(true), "order-bound".into());
    }
    match big_m.to_u64().map(|mm| j.is_subset_mod_max_power(k, mm)) {
        Some(Ok(v)) => (Some(v), "membership-mod-max-power".into()),
        Some(Err(e)) => (None, format!("undecided: {e}")),
        None => (None, "undecided: modulus too large".into()),
    }
}

/// Checks the sufficient criterion for (★) and, when it holds, (★) itself
/// with `N = q^{n0+3} emb`.
pub fn verify_b_to_a(c: &StarConfig, n0: u32) -> Result<StarReport> {
    let hyp = b_to_a_hypotheses(c, n0)?;
    let q = c.q();
    let emb = c.d.ring().emb() as u64;
    let n_big = q
        .checked_pow(n0 + 3)
        .and_then(|x| x.checked_mul(emb))
        .ok_or_else(|| Error::Overflow("N".into()))?;
    if !hyp.all_hold {
        return Ok(StarReport {
            n_big,
            n_range: c.n_range,
            rows: Vec::new(),
            hypotheses: Some(hyp),
            verdict: Verdict::HypothesisFailed,
            first_violation: None,
            unverified: false,
        });
    }
    let mut c2 = c.clone();
    c2.n_big = n_big;
    let mut report = check_condition_star(&c2)?;
    if report.verdict == Verdict::Violated {
        report.verdict = Verdict::ConclusionFailed;
    }
    report.hypotheses = Some(hyp);
    Ok(report)
}

fn b_to_a_hypotheses(c: &StarConfig, n0: u32) -> Result<Hypotheses> {
    let q = c.q();
    let mu_b = c.a.mu_upper();
    let mu = mu_b.value as u64;
    let ell = c.i.ell()?;
    let emb = c.d.ring().emb() as u64;
    let mut failed = Vec::new();
    let q_gt_mu = q > mu;
    let q_gt_ell = q > ell;
    let q_gt_mu_ell_emb = q > mu + ell + emb;
    if !q_gt_mu {
        failed.push("q > mu(a)".to_string());
    }
    if !q_gt_ell {
        failed.push("q > ell_I".to_string());
    }
    if !q_gt_mu_ell_emb {
        failed.push("q > mu(a) + ell_I + emb".to_string());
    }
    let dc = digits_eventually_constant(&c.t, q);
    let digits_constant_from_2 = matches!(dc, Some((_, onset)) if onset <= 2);
    if !digits_constant_from_2 {
        failed.push("digits of t constant from n = 2".to_string());
    }
    let t0 = ExactRational::new(q * q, q - 1)?;
    let qb = BigInt::from(q);
    let m0 = (qb.pow(n0 + 6) - 1) * BigInt::from(emb) / BigInt::from(q - 1);
    let (containment, containment_method) = match (&dc, failed.is_empty()) {
        (Some((l, _)), true) => {
            let lt0 = t0.mul_int(l.clone());
            let m = MixedExponent::single(c.a.clone(), lt0)?;
            let tau_d = tau_pair(&c.d)?;
            let cur = tau_mixed_nu_mod(&c.d, &m, n0, c.u, Some(&tau_d), None)?;
            let next = tau_mixed_nu_mod(&c.d, &m, n0 + 1, c.u, Some(&tau_d), None)?;
            if tau_d.is_unit() {
                contained_mod_max_power(&cur, &next, &m0)
            } else if cur.is_subset_of(&next) {
                (Some(true), "plain-containment".to_string())
            } else {
                (None, "undecided: τ(R,Δ) != R".to_string())
            }
        }
        _ => (None, "skipped".to_string()),
    };
    if containment.is_none() && containment_method != "skipped" {
        failed.push("containment modulo m^{M0} undecided".to_string());
    }
    if containment == Some(false) {
        failed.push("tau^{n0,u}(a^{l t0}) ⊆ tau^{n0+1,u}(a^{l t0}) + m^{M0} tau(R,Δ)".to_string());
    }
    let all_hold = failed.is_empty() && containment == Some(true);
    Ok(Hypotheses {
        q,
        mu,
        mu_exact: mu_b.exact,
        ell_i: ell,
        emb,
        q_gt_mu,
        q_gt_ell,
        q_gt_mu_ell_emb,
        digit: dc.as_ref().map(|(l, _)| l.to_string()),
        digit_onset: dc.as_ref().map(|(_, o)| *o),
        digits_constant_from_2,
        n0,
        t0,
        m0: m0.to_string(),
        containment,
        containment_method,
        failed,
        all_hold,
    })
}

/// A witness `(e', u, N)` for (★) at fixed `(a, t)`.
#[derive(Clone, Debug, Serialize)]
pub struct CondAWitness {
    pub e: u32,
    pub u: u32,
    pub n0: u32,
    pub n_big: u64,
    pub report: StarReport,
}

/// Searches `e' = e m` (`m <= mult_cap`), `u in [2, u_cap]`, `n0 <= n0_cap`
/// for configurations passing the sufficient criterion, returning the first.
pub fn cond_a_single_witness(
    c: &StarConfig,
    mult_cap: u32,
    u_cap: u32,
    n0_cap: u32,
) -> Result<Option<CondAWitness>> {
    for mult in 1..=mult_cap {
        let d = c.d.with_multiple(mult)?;
        for u in 2..=u_cap.max(2) {
            for n0 in 0..=n0_cap {
                let mut c2 = c.clone();
                c2.d = d.clone();
                c2.u = u;
                let hyp = b_to_a_hypotheses(&c2, n0)?;
                let static_fail = !hyp.q_gt_mu || !hyp.q_gt_mu_ell_emb || !hyp.digits_constant_from_2;
                if static_fail {
                    break;
                }
                if hyp.all_hold {
                    let report = verify_b_to_a(&c2, n0)?;
                    return Ok(Some(CondAWitness {
                        e: d.e(),
                        u,
                        n0,
                        n_big: report.n_big,
                        report,
                    }));
                }
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbRow {
    pub n: u32,
    pub fjn_a: ExactRational,
    pub fjn_b: ExactRational,
    pub equal: bool,
    pub tau_a_in_i: bool,
    pub tau_b_in_i: bool,
    pub equivalent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationReport {
    /// `b = a + m^{M}`
    pub perturbation_order: u64,
    pub rows: Vec<PerturbRow>,
    pub all_equal: bool,
    pub equivalence_holds: bool,
    pub q_gt_mu_ell_emb: bool,
    pub negative_control: Option<Box<PerturbationReport>>,
}

fn perturbation_rows(c: &StarConfig, big_m: u64) -> Result<PerturbationReport> {
    let tau_d = tau_pair(&c.d)?;
    let ell = c.i.ell()?;
    let a = PowerSum::plain(c.a.clone());
    let b = PowerSum::perturbed(c.a.clone(), big_m);
    let mut rows = Vec::new();
    for n in c.n_range.0..=c.n_range.1 {
        let fa = truncated_threshold(c, &tau_d, &a, n)?;
        let fb = truncated_threshold(c, &tau_d, &b, n)?;
        let inside = |base: &PowerSum| -> Result<bool> {
            let m = MixedExponent::new(vec![(base.clone(), c.t.clone())])?;
            let t = tau_mixed_nu_mod(&c.d, &m, n, c.u, Some(&tau_d), Some(ell))?;
            Ok(t.is_subset_of(&c.i))
        };
        let (ia, ib) = (inside(&a)?, inside(&b)?);
        rows.push(PerturbRow {
            n,
            equal: fa == fb,
            fjn_a: fa,
            fjn_b: fb,
            tau_a_in_i: ia,
            tau_b_in_i: ib,
            equivalent: ia == ib,
        });
    }
    let mu = c.a.mu_upper().value as u64;
    let emb = c.d.ring().emb() as u64;
    Ok(PerturbationReport {
        perturbation_order: big_m,
        all_equal: rows.iter().all(|r| r.equal),
        equivalence_holds: rows.iter().all(|r| r.equivalent),
        rows,
        q_gt_mu_ell_emb: c.q() > mu + ell + emb,
        negative_control: None,
    })
}

/// Compares `fjn^{n,u}(a^t; m)` with `fjn^{n,u}(b^t; m)` for
/// `b = a + m^{q^{u+2} N}`, plus a control run with `b = a + m^{control}`.
pub fn perturbation_equivalence(c: &StarConfig, control: Option<u64>) -> Result<PerturbationReport> {
    let q = c.q();
    let big_m = q
        .checked_pow(c.u + 2)
        .and_then(|x| x.checked_mul(c.n_big))
        .ok_or_else(|| Error::Overflow("perturbation order".into()))?;
    let mut report = perturbation_rows(c, big_m)?;
    if let Some(k) = control {
        report.negative_control = Some(Box::new(perturbation_rows(c, k)?));
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct StabExperiment {
    pub perturbation_order: u64,
    /// `(n, τ^{n,u}(b^t) ⊆ I)` over the range.
    pub predicate: Vec<(u32, bool)>,
    pub empirical_n1: u32,
    /// `len(τ(R,Δ) / m^{M⌈t⌉} τ(R,Δ))`
    pub bound_n1: Option<String>,
    pub within_bound: Option<bool>,
    pub q_gt_mu_emb: bool,
    pub t_condition: bool,
    /// Exact check that `n ↦ τ^{n,u}(b^t)` descends, when `M` is small.
    pub descending: Option<bool>,
}

/// Smallest `M` for which the exact chain is still computed.
const EXACT_CHAIN_MAX_M: u64 = 12;

/// Stabilization of `n ↦ [τ^{n,u}(b^t) ⊆ I]` for `b = a + m^M` on `n ∈ [1, n_max]`.
pub fn stabilization_experiment(c: &StarConfig, big_m: u64) -> Result<StabExperiment> {
    let tau_d = tau_pair(&c.d)?;
    let ell = c.i.ell()?;
    let b = PowerSum::perturbed(c.a.clone(), big_m);
    let m = MixedExponent::new(vec![(b.clone(), c.t.clone())])?;
    let (lo, hi) = (c.n_range.0.max(1), c.n_range.1.max(1));
    let mut predicate = Vec::new();
    for n in lo..=hi {
        let t = tau_mixed_nu_mod(&c.d, &m, n, c.u, Some(&tau_d), Some(ell))?;
        predicate.push((n, t.is_subset_of(&c.i)));
    }
    let last = predicate.last().map(|x| x.1).unwrap_or(false);
    let mut empirical = hi;
    for (n, v) in predicate.iter().rev() {
        if *v != last {
            break;
        }
        empirical = *n;
    }
    let bound = c
        .t
        .ceil()
        .to_u64()
        .and_then(|ct| ct.checked_mul(big_m))
        .and_then(|k| tau_colength_max_power(&tau_d, k));
    let within_bound = bound.as_ref().map(|bd| BigInt::from(empirical) <= *bd);
    let q = c.q();
    let mu = c.a.mu_upper().value as u64;
    let emb = c.d.ring().emb() as u64;
    let t_condition = (0..64u32).any(|k| {
        let s = c.t.mul_int(BigInt::from(q).pow(k) * BigInt::from(q - 1));
        s.is_integer()
    });
    let descending = if big_m <= EXACT_CHAIN_MAX_M {
        let mut ok = true;
        let mut prev: Option<Ideal> = None;
        for n in lo..=hi {
            let cur = tau_mixed_nu_mod(&c.d, &m, n, c.u, Some(&tau_d), None)?;
            if let Some(p) = &prev {
                ok &= cur.is_subset_of(p);
            }
            prev = Some(cur);
        }
        Some(ok)
    } else {
        None
    };
    Ok(StabExperiment {
        perturbation_order: big_m,
        predicate,
        empirical_n1: empirical,
        bound_n1: bound.map(|b| b.to_string()),
        within_bound,
        q_gt_mu_emb: q > mu + emb,
        t_condition,
        descending,
    })
}

/// An enumerable family of ideals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilySpec {
    /// Monomial ideals whose minimal generators have degree at most `maxdeg`.
    Monomials { maxdeg: u32 },
    /// `a, a^2, ..., a^kmax`.
    Powers { ideal: String, kmax: u64 },
    /// `x^a + y^b` for `1 <= a <= amax`, `1 <= b <= bmax`.
    BinomialHypersurfaces { amax: u32, bmax: u32 },
    Explicit(Vec<String>),
}

impl FamilySpec {
    pub fn parse(text: &str) -> Result<FamilySpec> {
        let text = text.trim();
        let bad = || Error::Parse(format!("unrecognized family: {text:?}"));
        let (head, rest) = text.split_once('(').ok_or_else(bad)?;
        let body = rest.strip_suffix(')').ok_or_else(bad)?.trim();
        let args = split_top_level(body)?;
        let kv = |s: &str, key: &str| -> Result<u64> {
            let s = s.trim();
            let v = match s.split_once('=') {
                Some((k, v)) if k.trim() == key => v,
                Some(_) => return Err(bad()),
                None => s,
            };
            v.trim().parse::<u64>().map_err(|_| bad())
        };
        match head.trim() {
            "monomials" if args.len() == 1 => Ok(FamilySpec::Monomials {
                maxdeg: kv(args[0], "maxdeg")? as u32,
            }),
            "powers" if args.len() == 2 => Ok(FamilySpec::Powers {
                ideal: args[0].trim().to_string(),
                kmax: kv(args[1], "kmax")?,
            }),
            "binomial-hypersurfaces" if args.len() == 2 => Ok(FamilySpec::BinomialHypersurfaces {
                amax: kv(args[0], "amax")? as u32,
                bmax: kv(args[1], "bmax")? as u32,
            }),
            "explicit" => {
                let inner = body
                    .strip_prefix('[')
                    .and_then(|b| b.strip_suffix(']'))
                    .ok_or_else(bad)?;
                if inner.trim().is_empty() {
                    return Ok(FamilySpec::Explicit(Vec::new()));
                }
                Ok(FamilySpec::Explicit(
                    split_top_level(inner)?
                        .into_iter()
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect(),
                ))
            }
            _ => Err(bad()),
        }
    }

    /// Members in a fixed order, at most `cap` of them.
    pub fn enumerate(&self, ring: &std::sync::Arc<PolyRing>, cap: usize) -> Result<Vec<Ideal>> {
        let mut out = Vec::new();
        match self {
            FamilySpec::Powers { ideal, kmax } => {
                let a = Ideal::parse(ring, ideal)?;
                for k in 1..=*kmax {
                    if out.len() >= cap {
                        break;
                    }
                    out.push(a.power(k));
                }
            }
            FamilySpec::BinomialHypersurfaces { amax, bmax } => {
                if ring.nvars() < 2 {
                    return Err(Error::Domain("binomial hypersurfaces need two variables".into()));
                }
                'outer: for a in 1..=*amax {
                    for b in 1..=*bmax {
                        if out.len() >= cap {
                            break 'outer;
                        }
                        let mut ea = vec![0u32; ring.nvars()];
                        ea[0] = a;
                        let mut eb = vec![0u32; ring.nvars()];
                        eb[1] = b;
                        let f = crate::poly::Polynomial::monomial(Monomial::from_exponents(&ea), 1)
                            .add(&crate::poly::Polynomial::monomial(Monomial::from_exponents(&eb), 1), ring.field());
                        out.push(Ideal::principal(ring, f));
                    }
                }
            }
            FamilySpec::Explicit(items) => {
                for s in items.iter().take(cap) {
                    out.push(Ideal::parse(ring, s)?);
                }
            }
            FamilySpec::Monomials { maxdeg } => {
                let mut monos: Vec<Monomial> = Vec::new();
                for deg in 1..=*maxdeg {
                    monos.extend(monomials_of_degree(ring.nvars(), deg));
                }
                enumerate_antichains(&monos, 0, &mut Vec::new(), &mut |gens| {
                    if out.len() < cap {
                        out.push(Ideal::from_monomials(ring, gens.to_vec()));
                    }
                    out.len() < cap
                });
            }
        }
        Ok(out)
    }
}

/// Non-empty antichains under divisibility, in lexicographic index order.
fn enumerate_antichains(
    monos: &[Monomial],
    start: usize,
    cur: &mut Vec<Monomial>,
    emit: &mut dyn FnMut(&[Monomial]) -> bool,
) -> bool {
    for i in start..monos.len() {
        let m = &monos[i];
        if cur.iter().any(|c| c.divides(m) || m.divides(c)) {
            continue;
        }
        cur.push(m.clone());
        if !emit(cur) || !enumerate_antichains(monos, i + 1, cur, emit) {
            cur.pop();
            return false;
        }
        cur.pop();
    }
    true
}

#[derive(Clone, Debug, Serialize)]
pub struct MemberResult {
    pub index: usize,
    pub ideal: Vec<String>,
    pub threshold: Option<ExactRational>,
    pub resolved: bool,
    pub admissible_denominator: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubaddCheck {
    pub i: usize,
    pub j: usize,
    pub sum_threshold: Option<ExactRational>,
    pub holds: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AccReport {
    pub family: String,
    pub members: Vec<MemberResult>,
    pub thresholds: Vec<ExactRational>,
    pub all_rational_admissible: bool,
    /// Index runs whose thresholds increase with shrinking gaps.
    pub ascending_anomalies: Vec<Vec<usize>>,
    pub subadditivity: Vec<SubaddCheck>,
    pub subadditivity_holds: bool,
}

/// Worker pool sized by `FROBTHRESH_THREADS` when set.
pub fn worker_pool() -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("FROBTHRESH_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        b = b.num_threads(n.max(1));
    }
    b.build().expect("thread pool")
}

fn threshold_of(d: &PairDivisor, a: &Ideal, i: &Ideal) -> Result<(Option<ExactRational>, bool)> {
    let res = fjn(&ThresholdQuery::new(d.clone(), a.clone(), i.clone())?)?;
    Ok((res.value, res.resolved))
}

/// Length of runs flagged as ascending anomalies.
const ANOMALY_RUN: usize = 4;

/// Thresholds over a finite family with the finite facts the ACC implies.
pub fn acc_probe(
    family: &FamilySpec,
    label: &str,
    d: &PairDivisor,
    i: &Ideal,
    cap: usize,
    pair_cap: usize,
) -> Result<AccReport> {
    let ring = d.ring();
    let ideals = family.enumerate(ring, cap)?;
    let p = ring.p() as u64;
    let pool = worker_pool();
    let members: Vec<MemberResult> = pool.install(|| {
        ideals
            .par_iter()
            .enumerate()
            .map(|(index, a)| match threshold_of(d, a, i) {
                Ok((value, resolved)) => MemberResult {
                    index,
                    ideal: a.to_strings(),
                    admissible_denominator: value.as_ref().is_some_and(|v| is_admissible(v, p, H_MAX)),
                    threshold: value,
                    resolved,
                    error: None,
                },
                Err(e) => MemberResult {
                    index,
                    ideal: a.to_strings(),
                    threshold: None,
                    resolved: false,
                    admissible_denominator: false,
                    error: Some(e.to_string()),
                },
            })
            .collect()
    });
    let thresholds: Vec<ExactRational> = members.iter().filter_map(|m| m.threshold.clone()).collect();
    let all_rational_admissible = members.iter().all(|m| m.error.is_some() || m.admissible_denominator);

    // Ascending runs along the family order with strictly shrinking gaps.
    let mut ascending_anomalies = Vec::new();
    let vals: Vec<(usize, ExactRational)> = members
        .iter()
        .filter_map(|m| m.threshold.clone().map(|t| (m.index, t)))
        .collect();
    let mut run: Vec<usize> = Vec::new();
    for k in 0..vals.len() {
        let extend = match run.len() {
            0 => true,
            1 => vals[k].1 > vals[k - 1].1,
            _ => {
                let g_prev = &vals[k - 1].1 - &vals[k - 2].1;
                let g = &vals[k].1 - &vals[k - 1].1;
                g.is_positive() && g < g_prev
            }
        };
        if extend {
            run.push(k);
        } else {
            if run.len() >= ANOMALY_RUN {
                ascending_anomalies.push(run.iter().map(|x| vals[*x].0).collect());
            }
            run = if k > 0 && vals[k].1 > vals[k - 1].1 { vec![k - 1, k] } else { vec![k] };
        }
    }
    if run.len() >= ANOMALY_RUN {
        ascending_anomalies.push(run.iter().map(|x| vals[*x].0).collect());
    }

    let mut pairs = Vec::new();
    'pairs: for x in 0..ideals.len() {
        for y in x + 1..ideals.len() {
            if pairs.len() >= pair_cap {
                break 'pairs;
            }
            pairs.push((x, y));
        }
    }
    let subadditivity: Vec<SubaddCheck> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(x, y)| {
                let sum = ideals[x].add_ideal(&ideals[y]);
                let st = threshold_of(d, &sum, i).ok().and_then(|(v, _)| v);
                let holds = match (&st, &members[x].threshold, &members[y].threshold) {
                    (Some(s), Some(tx), Some(ty)) => Some(*s <= tx + ty),
                    _ => None,
                };
                SubaddCheck {
                    i: x,
                    j: y,
                    sum_threshold: st,
                    holds,
                }
            })
            .collect()
    });
    let subadditivity_holds = subadditivity.iter().all(|s| s.holds != Some(false));
    Ok(AccReport {
        family: label.to_string(),
        members,
        thresholds,
        all_rational_admissible,
        ascending_anomalies,
        subadditivity,
        subadditivity_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_grammar() {
        assert_eq!(
            FamilySpec::parse("monomials(maxdeg=3)").unwrap(),
            FamilySpec::Monomials { maxdeg: 3 }
        );
        assert_eq!(
            FamilySpec::parse("powers((x,y),5)").unwrap(),
            FamilySpec::Powers {
                ideal: "(x,y)".into(),
                kmax: 5
            }
        );
        assert_eq!(
            FamilySpec::parse("binomial-hypersurfaces(amax=3, bmax=4)").unwrap(),
            FamilySpec::BinomialHypersurfaces { amax: 3, bmax: 4 }
        );
        assert_eq!(
            FamilySpec::parse("explicit([(x^2,y), x*y])").unwrap(),
            FamilySpec::Explicit(vec!["(x^2,y)".into(), "x*y".into()])
        );
        assert!(FamilySpec::parse("cubes(3)").is_err());
    }

    #[test]
    fn monomial_family_is_antichains() {
        let ring = PolyRing::new(2, &["x", "y"]).unwrap();
        let fam = FamilySpec::Monomials { maxdeg: 2 };
        let members = fam.enumerate(&ring, 1000).unwrap();
        // degree <= 2 monomials in two variables: x, y, x^2, xy, y^2
        // 5 singletons, 6 pairs, 1 triple
        assert_eq!(members.len(), 12);
    }

    #[test]
    fn empty_family() {
        let ring = PolyRing::new(2, &["x"]).unwrap();
        let d = PairDivisor::trivial(&ring, 1).unwrap();
        let rep = acc_probe(&FamilySpec::Explicit(vec![]), "explicit([])", &d, &Ideal::maximal(&ring), 10, 10).unwrap();
        assert!(rep.members.is_empty() && rep.thresholds.is_empty());
    }
}
