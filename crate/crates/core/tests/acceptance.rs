//! One pass/fail line per acceptance criterion.

mod common;

use std::time::{Duration, Instant};

use common::*;
use frobthresh::frobenius::{eth_root, pair_step, PairDivisor};
use frobthresh::qadic::{admissible_form, digit, ExactRational, H_MAX};
use frobthresh::star::{
    acc_probe, perturbation_equivalence, stabilization_experiment, verify_b_to_a, FamilySpec, StarConfig, Verdict,
};
use frobthresh::testideal::{tau_mixed_nu, tau_pair, tau_plus, MixedExponent};
use frobthresh::thresholds::{denominator_bound, fjn, jumping_numbers, ThresholdQuery};
use frobthresh::Ideal;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

// 1. e-th roots against the basis decomposition.
fn eth_root_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(0xe7);
    let mut bad = 0;
    let mut count = 0;
    let mut nontrivial = 0;
    for k in 0..200 {
        let p = if k % 2 == 0 { 2 } else { 3 };
        let vars: &[&str] = match k % 3 {
            0 => &["x"],
            1 => &["x", "y"],
            _ => &["x", "y", "z"],
        };
        let r = ring(p, vars);
        let e = if p == 2 { rng.gen_range(1..=3) } else { rng.gen_range(1..=2) };
        let q = p.pow(e);
        let gens = rng.gen_range(1..=3);
        let min_deg = if k % 4 < 2 { 1 } else { q.min(8) };
        let g = (0..gens).map(|_| random_poly_between(&r, &mut rng, min_deg, 8, 6)).collect();
        let j = Ideal::new(&r, g);
        let got = eth_root(&j, e).unwrap();
        nontrivial += !got.is_unit() as usize;
        let want = brute_eth_root(&j, q);
        count += 1;
        if got != want || !j.is_subset_of(&got.frobenius_bracket(q)) {
            bad += 1;
            eprintln!("  eth_root mismatch: {j} e={e}: {got} vs {want}");
        }
    }
    let t = start.elapsed();
    outcome(
        bad == 0 && count >= 200 && t < Duration::from_secs(60),
        format!("{count} ideals ({nontrivial} proper roots), {bad} mismatches, {}", secs(t)),
    )
}

// 2. Skoda identities.
fn skoda() -> Outcome {
    let mut rng = rng(0x5c0d);
    let mut single = 0;
    let mut sums = 0;
    let mut bad = 0;
    // (1): a^n = (a^K)^{[q]} a^{n-qK}, K = ceil(n/q) - mu, for n > q(mu-1).
    while single < 60 {
        let p = [2u32, 3][single % 2];
        let r = ring(p, &["x", "y"]);
        let mu = 1 + single % 3;
        let a = random_local_ideal(&r, &mut rng, mu, 3, 3);
        let mu = a.mu_upper().value as u64;
        let q = p as u64;
        let lo = q * (mu.max(1) - 1) + 1;
        let n = rng.gen_range(lo..lo + 4);
        let k = n.div_ceil(q) - mu;
        let lhs = a.power(n);
        let rhs = a.power(k).bracket_power(1).unwrap().product(&a.power(n - q * k)).unwrap();
        if lhs != rhs {
            bad += 1;
            eprintln!("  skoda (1) fails: a={a} n={n}");
        }
        single += 1;
    }
    // (2): the same with a = a_1^{M_1} + a_2^{M_2} and l = mu(a_1) + mu(a_2).
    while sums < 40 {
        let p = [2u32, 3][sums % 2];
        let r = ring(p, &["x", "y"]);
        let a1 = random_local_ideal(&r, &mut rng, 1, 2, 2);
        let a2 = random_local_ideal(&r, &mut rng, 1 + sums % 2, 2, 2);
        let (m1, m2) = (rng.gen_range(1..=2u64), rng.gen_range(1..=2u64));
        let b = a1.power(m1).sum(&a2.power(m2)).unwrap();
        let l = a1.mu_upper().value as u64 + a2.mu_upper().value as u64;
        let q = p as u64;
        let lo = q * (l - 1) + 1;
        let n = rng.gen_range(lo..lo + 3);
        let k = n.div_ceil(q) - l;
        let lhs = b.power(n);
        let rhs = b.power(k).bracket_power(1).unwrap().product(&b.power(n - q * k)).unwrap();
        if lhs != rhs {
            bad += 1;
            eprintln!("  skoda (2) fails: b={b} n={n}");
        }
        sums += 1;
    }
    outcome(bad == 0, format!("{single} single + {sums} power-sum instances, {bad} failures"))
}

// 3. Threshold fixtures, each oracle value checked against the library.
fn threshold_fixtures() -> Outcome {
    let start = Instant::now();
    let mut fixtures: Vec<(u32, Vec<&str>, String, ExactRational, u64)> = Vec::new();
    let names = ["x", "y", "z"];
    for p in [2u32, 3, 5] {
        for n in 1..=3usize {
            let vars = names[..n].to_vec();
            fixtures.push((p, vars.clone(), vars.join(","), ExactRational::from_integer(n as i64), n as u64 + 1));
        }
        for a in 1..=10i64 {
            fixtures.push((p, vec!["x", "y"], format!("x^{a}"), ExactRational::new(1, a).unwrap(), (a * a + 1) as u64));
        }
    }
    fixtures.push((7, vec!["x", "y"], "x^2 + y^3".into(), rat("5/6"), 49));
    let mut bad = Vec::new();
    for (p, vars, a, want, q_min) in &fixtures {
        let r = ring(*p, vars);
        let a = ideal(&r, a);
        let m = Ideal::maximal(&r);
        let oracle = nu_threshold(&a, &m, *q_min);
        let q = ThresholdQuery::new(PairDivisor::trivial(&r, 1).unwrap(), a.clone(), m).unwrap();
        let got = fjn(&q).unwrap();
        if oracle != *want || got.value.as_ref() != Some(want) || !got.resolved {
            bad.push(format!("F_{p} {a}: oracle {oracle}, fjn {:?}, fixture {want}", got.value.map(|v| v.to_string())));
        }
    }
    for b in &bad {
        eprintln!("  {b}");
    }
    let t = start.elapsed();
    outcome(
        bad.is_empty() && t < Duration::from_secs(120),
        format!("{} fixtures, {} mismatches, {}", fixtures.len(), bad.len(), secs(t)),
    )
}

struct Instance {
    d: PairDivisor,
    a: Ideal,
    t: ExactRational,
}

impl Instance {
    fn m(&self) -> MixedExponent {
        MixedExponent::single(self.a.clone(), self.t.clone()).unwrap()
    }
}

fn instance(p: u32, f: Option<&str>, a: &str, t: &str) -> Instance {
    let r = ring(p, &["x", "y"]);
    let d = match f {
        None => PairDivisor::trivial(&r, 1).unwrap(),
        Some(f) => PairDivisor::new(&r, r.parse(f).unwrap(), 1, 1).unwrap(),
    };
    Instance { d, a: ideal(&r, a), t: rat(t) }
}

fn chain_instances() -> Vec<Instance> {
    let mut v = Vec::new();
    for (p, f, a, t) in [
        (2, None, "x", "1/2"),
        (2, None, "x,y", "3/2"),
        (2, None, "x^2 + y^3", "5/6"),
        (2, None, "x*y", "1/3"),
        (3, None, "x^2 + y^3", "2/3"),
        (3, None, "x^2, y^2", "4/3"),
        (3, None, "x*y*(x+y)", "1/2"),
        (3, Some("x"), "y", "1/2"),
        (3, Some("x + y^2"), "x, y", "1/3"),
        (5, None, "x", "1/4"),
        (5, None, "x^2 + y^3", "5/6"),
        (5, None, "x, y^2", "7/20"),
        (5, Some("y"), "x^2 + y^2", "3/4"),
        (7, None, "x^2 + y^3", "1/6"),
        (7, None, "x^2, y^3", "5/6"),
        (2, Some("x*y"), "x + y", "3/4"),
        (3, None, "x^3 + y^4", "7/12"),
    ] {
        v.push(instance(p, f, a, t));
    }
    v
}

// 4. Monotonicity of the three chains.
fn chain_laws() -> Outcome {
    let mut plus = (0, 0);
    let mut in_u = (0, 0);
    let mut in_n = (0, 0);
    for inst in chain_instances() {
        let m = inst.m();
        let q = inst.d.q() as u64;
        let mut prev = tau_plus(&inst.d, &m, 0).unwrap();
        for n in 1..=3 {
            let cur = tau_plus(&inst.d, &m, n).unwrap();
            plus.0 += 1;
            plus.1 += !prev.is_subset_of(&cur) as usize;
            prev = cur;
        }
        for n in [0, 2] {
            let mut prev = tau_mixed_nu(&inst.d, &m, n, 0, None).unwrap();
            for u in 1..=2 {
                let cur = tau_mixed_nu(&inst.d, &m, n, u, None).unwrap();
                in_u.0 += 1;
                in_u.1 += !prev.is_subset_of(&cur) as usize;
                prev = cur;
            }
        }
        // Descending in n needs q(q-1)t integral and q^{u-1} >= mu(a).
        let mu = inst.a.mu_upper().value as u64;
        let u = (1..).find(|u| q.pow(u - 1) >= mu).unwrap();
        if inst.t.mul_int(q * (q - 1)).is_integer() {
            let mut prev = tau_mixed_nu(&inst.d, &m, 1, u, None).unwrap();
            for n in 2..=6 {
                let cur = tau_mixed_nu(&inst.d, &m, n, u, None).unwrap();
                in_n.0 += 1;
                in_n.1 += !cur.is_subset_of(&prev) as usize;
                prev = cur;
            }
        }
    }
    let pass = [plus, in_u, in_n].iter().all(|(c, b)| *c >= 50 && *b == 0);
    outcome(
        pass,
        format!(
            "tau_plus ascending {}/{}; ascending in u {}/{}; descending in n {}/{}",
            plus.0 - plus.1,
            plus.0,
            in_u.0 - in_u.1,
            in_u.0,
            in_n.0 - in_n.1,
            in_n.0
        ),
    )
}

// 5. Digit shift and Frobenius recursion.
fn shift_and_recursion() -> Outcome {
    let mut shift = (0, 0);
    let mut rec = (0, 0);
    for inst in chain_instances() {
        let r = inst.d.ring().clone();
        let m = inst.m();
        let q = inst.d.q() as u64;
        let mu = inst.a.mu_upper().value as u64;
        let u = (1..).find(|u| q.pow(u - 1) >= mu).unwrap();
        let tau_d = tau_pair(&inst.d).unwrap();
        for aux in [tau_d.clone(), Ideal::maximal(&r).product(&tau_d).unwrap()] {
            for n in 1..=3u32 {
                let dg = digit(&inst.t, q, n as i64).unwrap();
                if dg == 0.into() {
                    continue;
                }
                let dg: u64 = dg.try_into().unwrap();
                let lhs = tau_mixed_nu(&inst.d, &m, n, u, Some(&aux)).unwrap();
                let shifted = pair_step(&inst.a.power(q.pow(u) * dg).product(&aux).unwrap(), &inst.d);
                let rhs = tau_mixed_nu(&inst.d, &m, n - 1, u, Some(&shifted)).unwrap();
                shift.0 += 1;
                shift.1 += (lhs != rhs) as usize;
            }
        }
        let scaled = m.map_exponents(|t| t.mul_int(q));
        for n in 0..=3u32 {
            let lhs = pair_step(&tau_plus(&inst.d, &scaled, n).unwrap(), &inst.d);
            let rhs = tau_plus(&inst.d, &m, n + 1).unwrap();
            rec.0 += 1;
            rec.1 += (lhs != rhs) as usize;
        }
    }
    outcome(
        shift.0 >= 50 && rec.0 >= 50 && shift.1 == 0 && rec.1 == 0,
        format!(
            "digit shift {}/{}; Frobenius recursion {}/{}",
            shift.0 - shift.1,
            shift.0,
            rec.0 - rec.1,
            rec.0
        ),
    )
}

// 6. Denominators of jumping numbers.
fn denominators() -> Outcome {
    let mut checked = 0;
    let mut bound_checked = 0;
    let mut bad = Vec::new();
    for (p, a) in [
        (2, "x, y"),
        (3, "x, y"),
        (2, "x^2, y^3"),
        (3, "x^2, y^3"),
        (2, "x^2, x*y, y^2"),
        (3, "x^3, y^2"),
        (5, "x, y^2"),
        (2, "x^2 + y^2, x*y"),
        (3, "x^2, y^2"),
        (5, "x^2, y^3"),
    ] {
        let r = ring(p, &["x", "y"]);
        let a = ideal(&r, a);
        let d = PairDivisor::trivial(&r, 1).unwrap();
        let big_m = max_power_inside(&a);
        let bound = denominator_bound(&d, big_m).unwrap();
        let q = ThresholdQuery::new(d, a.clone(), Ideal::maximal(&r)).unwrap();
        let res = jumping_numbers(&q).unwrap();
        if !res.unresolved.is_empty() {
            bad.push(format!("F_{p} {a}: unresolved windows"));
        }
        for c in &res.values {
            checked += 1;
            if admissible_form(c, p as u64, H_MAX).is_none() {
                bad.push(format!("F_{p} {a}: {c} is not of the form c/(p^g(p^h-1))"));
            }
            bound_checked += 1;
            if !bound.divides(c) {
                bad.push(format!("F_{p} {a}: denominator of {c} does not divide N"));
            }
        }
    }
    for b in &bad {
        eprintln!("  {b}");
    }
    outcome(
        bad.is_empty() && checked > 0,
        format!("{checked} jumping numbers admissible, {bound_checked} checked against N, {} failures", bad.len()),
    )
}

fn star_pool() -> Vec<StarConfig> {
    let mut v = Vec::new();
    for (p, a, t) in [
        (5, "x", "1/4"),
        (5, "x", "3/4"),
        (5, "y", "1/20"),
        (5, "x*y", "3/4"),
        (5, "x*y", "1/2"),
        (5, "x^2 + y^3", "1/4"),
        (5, "x^2 + y^3", "3/4"),
        (5, "x + y^2", "1/2"),
        (7, "x^2 + y^3", "5/6"),
        (7, "x^2 + y^3", "1/6"),
        (7, "x^2, y^2", "1/3"),
        (7, "x, y^2", "1/2"),
        (7, "x*y*(x+y)", "1/2"),
        (7, "x^3 + y^4", "2/3"),
        (7, "x, y", "5/6"),
    ] {
        let r = ring(p, &["x", "y"]);
        let d = PairDivisor::trivial(&r, 1).unwrap();
        v.push(StarConfig::new(d, ideal(&r, a), rat(t), Ideal::maximal(&r), 2, 0, (0, 8)).unwrap());
    }
    v
}

fn label(c: &StarConfig) -> String {
    format!("F_{} ({})^{}", c.d.ring().p(), c.a.to_strings().join(", "), c.t)
}

// 7. The sufficient criterion for (★).
fn b_to_a(passing: &mut Vec<StarConfig>) -> Outcome {
    let mut satisfied = 0;
    let mut conclusion_failed = 0;
    for c in star_pool() {
        let rep = verify_b_to_a(&c, 0).unwrap();
        let ok = rep.hypotheses.as_ref().is_some_and(|h| h.all_hold);
        match rep.verdict {
            Verdict::ConclusionFailed => {
                conclusion_failed += 1;
                eprintln!("  conclusion failed: {}", label(&c));
            }
            Verdict::HoldsOnRange if ok => {
                satisfied += 1;
                let mut c = c.clone();
                c.n_big = rep.n_big;
                passing.push(c);
            }
            v => eprintln!("  skipped {}: {v:?} {:?}", label(&c), rep.hypotheses.map(|h| h.failed)),
        }
    }
    outcome(
        satisfied >= 10 && conclusion_failed == 0,
        format!("{satisfied} configs with all hypotheses, (★) on n in [0,8]; {conclusion_failed} conclusion failures"),
    )
}

// 8. Perturbation by a high power of m.
fn perturbation(configs: &[StarConfig]) -> Outcome {
    let mut equal = 0;
    let mut control_fails = 0;
    for c in configs {
        let mut c = c.clone();
        c.n_range = (1, 6);
        let rep = perturbation_equivalence(&c, Some(1)).unwrap();
        if rep.all_equal {
            equal += 1;
        } else {
            eprintln!("  perturbation changed thresholds: {}", label(&c));
        }
        if rep.negative_control.as_ref().is_some_and(|n| !n.all_equal) {
            control_fails += 1;
        }
    }
    outcome(
        equal >= 10 && equal == configs.len() && control_fails >= 1,
        format!("{equal}/{} configs equal on n in [1,6]; negative control m^1 detected on {control_fails}", configs.len()),
    )
}

// 9. Stabilization against the colength bound.
fn stabilization(configs: &[StarConfig]) -> Outcome {
    let mut within = 0;
    let mut total = 0;
    for c in configs {
        let mut c = c.clone();
        c.n_range = (1, 6);
        for big_m in [2, 3] {
            let rep = stabilization_experiment(&c, big_m).unwrap();
            total += 1;
            if rep.within_bound == Some(true) {
                within += 1;
            } else {
                eprintln!("  stabilization outside bound: {} M={big_m}", label(&c));
            }
        }
    }
    outcome(within >= 10 && within == total, format!("{within}/{total} configs with n1 <= bound"))
}

// 10. ACC probes.
fn acc() -> Outcome {
    let r = ring(3, &["x", "y"]);
    let d = PairDivisor::trivial(&r, 1).unwrap();
    let m = Ideal::maximal(&r);
    let mut ok = true;
    let mut pairs = 0;
    let mut notes = Vec::new();
    for (text, want) in [
        ("powers((x),10)", (1..=10).map(|k| ExactRational::new(1, k).unwrap()).collect::<Vec<_>>()),
        ("powers((x,y),5)", (1..=5).map(|k| ExactRational::new(2, k).unwrap()).collect()),
    ] {
        let fam = FamilySpec::parse(text).unwrap();
        let rep = acc_probe(&fam, text, &d, &m, 64, 64).unwrap();
        let exact = rep.thresholds == want && rep.members.iter().all(|m| m.resolved);
        let fine = exact && rep.ascending_anomalies.is_empty() && rep.all_rational_admissible && rep.subadditivity_holds;
        pairs += rep.subadditivity.iter().filter(|s| s.holds == Some(true)).count();
        notes.push(format!("{text}: {}", if fine { "exact" } else { "MISMATCH" }));
        ok &= fine;
    }
    outcome(ok && pairs >= 50, format!("{}; subadditivity on {pairs} pairs", notes.join(", ")))
}

fn main() {
    let start = Instant::now();
    let mut passing = Vec::new();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "e-th root oracle", eth_root_oracle()),
        (2, "Skoda identities", skoda()),
        (3, "threshold fixtures", threshold_fixtures()),
        (4, "chain laws", chain_laws()),
        (5, "digit shift and recursion", shift_and_recursion()),
        (6, "denominators", denominators()),
        (7, "B to A", b_to_a(&mut passing)),
        (8, "perturbation", perturbation(&passing)),
        (9, "stabilization", stabilization(&passing)),
        (10, "ACC probe", acc()),
    ];
    let mut failed = 0;
    for (k, name, o) in &results {
        println!("criterion {k:>2} {:<26} {}  {}", name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.pass as usize;
    }
    println!("acceptance: {}/{} passed in {}", results.len() - failed, results.len(), secs(start.elapsed()));
    if failed > 0 {
        std::process::exit(1);
    }
}
