//! Command-line front end: argument and job-file parsing, dispatch, and
//! deterministic JSON reports.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use clap::{Arg, ArgAction, ArgMatches, Command};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::frobenius::{PairDivisor, PowerSum};
use crate::ideal::Ideal;
use crate::qadic::{digit, digits_eventually_constant, roundup, truncation, ExactRational};
use crate::ring::PolyRing;
use crate::star::{
    acc_probe, check_condition_star, perturbation_equivalence, stabilization_experiment,
    verify_b_to_a, FamilySpec, StarConfig, Verdict,
};
use crate::testideal::{test_ideal, MixedExponent};
use crate::thresholds::{fjn, jumping_numbers, ThresholdQuery};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_UNRESOLVED: i32 = 2;

pub const COMMANDS: [&str; 9] = [
    "fpt",
    "test-ideal",
    "jumping-numbers",
    "digits",
    "star-check",
    "b-to-a",
    "perturb-check",
    "stab-experiment",
    "acc-probe",
];

/// A validated job: every field a command may read, after merging the
/// job file with command-line flags.
#[derive(Clone, Debug, Default)]
pub struct JobSpec {
    fields: BTreeMap<String, String>,
}

/// A rejected field with the reason.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "field `{}`: {}", self.field, self.message)
    }
}

type FieldResult<T> = std::result::Result<T, FieldError>;

fn field_err(field: &str, e: impl ToString) -> FieldError {
    FieldError {
        field: field.to_string(),
        message: e.to_string(),
    }
}

impl JobSpec {
    /// Parses the `key = value` job format; `#` starts a comment.
    pub fn parse_job(text: &str) -> FieldResult<JobSpec> {
        let mut fields = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| field_err(&format!("line {}", lineno + 1), "expected key = value"))?;
            fields.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        Ok(JobSpec { fields })
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.fields.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.get(key).map(|s| s.as_str())
    }

    fn require(&self, key: &str) -> FieldResult<&str> {
        self.get(key).ok_or_else(|| field_err(key, "missing"))
    }

    fn parse_num<T: std::str::FromStr>(&self, key: &str, default: Option<T>) -> FieldResult<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            Some(v) => v.parse::<T>().map_err(|e| field_err(key, e)),
            None => default.ok_or_else(|| field_err(key, "missing")),
        }
    }

    fn rational(&self, key: &str) -> FieldResult<ExactRational> {
        self.require(key)?.parse().map_err(|e| field_err(key, e))
    }

    fn range(&self, key: &str, default: (i64, i64)) -> FieldResult<(i64, i64)> {
        let Some(v) = self.get(key) else {
            return Ok(default);
        };
        let bad = || field_err(key, format!("expected a range like 0..8, got {v:?}"));
        let (a, b) = match v.split_once("..") {
            Some((a, b)) => (a.trim(), b.trim().trim_start_matches('=')),
            None => (v.trim(), v.trim()),
        };
        let a: i64 = a.parse().map_err(|_| bad())?;
        let b: i64 = b.parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        Ok((a, b))
    }

    pub fn ring(&self) -> FieldResult<Arc<PolyRing>> {
        let p: u32 = self.parse_num("p", None)?;
        let vars = self.get("vars").unwrap_or("x,y");
        let names: Vec<&str> = vars.split(',').map(|s| s.trim()).collect();
        PolyRing::new(p, &names).map_err(|e| field_err(if e.to_string().contains("prime") { "p" } else { "vars" }, e))
    }

    pub fn divisor(&self, ring: &Arc<PolyRing>) -> FieldResult<PairDivisor> {
        let e: u32 = self.parse_num("e", Some(1))?;
        match self.get("f") {
            None => PairDivisor::trivial(ring, e).map_err(|err| field_err("e", err)),
            Some(f) => {
                let poly = ring.parse(f).map_err(|err| field_err("f", err))?;
                let a: u64 = self.parse_num("a", Some(1))?;
                PairDivisor::new(ring, poly, a, e).map_err(|err| field_err("f", err))
            }
        }
    }

    pub fn ideals(&self, ring: &Arc<PolyRing>) -> FieldResult<Vec<Ideal>> {
        self.require("ideal")?
            .split(';')
            .map(|s| Ideal::parse(ring, s).map_err(|e| field_err("ideal", e)))
            .collect()
    }

    pub fn ideal(&self, ring: &Arc<PolyRing>) -> FieldResult<Ideal> {
        let mut v = self.ideals(ring)?;
        if v.len() != 1 {
            return Err(field_err("ideal", "expected exactly one ideal"));
        }
        Ok(v.remove(0))
    }

    pub fn target(&self, ring: &Arc<PolyRing>) -> FieldResult<Ideal> {
        match self.get("target") {
            None => Ok(Ideal::maximal(ring)),
            Some(s) if s.trim() == "m" => Ok(Ideal::maximal(ring)),
            Some(s) => {
                let i = Ideal::parse(ring, s).map_err(|e| field_err("target", e))?;
                i.colength().map_err(|e| field_err("target", e))?;
                Ok(i)
            }
        }
    }

    fn positive(key: &str, text: &str) -> FieldResult<ExactRational> {
        let t: ExactRational = text.parse().map_err(|e| field_err(key, e))?;
        if !t.is_positive() {
            return Err(field_err(key, format!("must be positive, got {t}")));
        }
        Ok(t)
    }

    fn exponents(&self) -> FieldResult<Vec<ExactRational>> {
        self.require("t")?.split(';').map(|s| Self::positive("t", s)).collect()
    }

    fn star_config(&self, ring: &Arc<PolyRing>, default_range: (i64, i64)) -> FieldResult<StarConfig> {
        let d = self.divisor(ring)?;
        let a = self.ideal(ring)?;
        let t = Self::positive("t", self.require("t")?)?;
        let i = self.target(ring)?;
        let u: u32 = self.parse_num("u", Some(2))?;
        let n_big: u64 = self.parse_num("N", Some(0))?;
        let (lo, hi) = self.range("n", default_range)?;
        if lo < 0 {
            return Err(field_err("n", "range must be non-negative"));
        }
        StarConfig::new(d, a, t, i, u, n_big, (lo as u32, hi as u32)).map_err(|e| field_err("ideal", e))
    }
}

fn common_args() -> Vec<Arg> {
    let opt = |name: &'static str, help: &'static str| Arg::new(name).long(name).help(help).num_args(1).allow_hyphen_values(true);
    vec![
        opt("p", "characteristic (a prime)"),
        opt("vars", "comma-separated variable names [default: x,y]"),
        opt("f", "divisor polynomial f in Δ = a/(p^e-1) div(f)"),
        opt("a", "divisor coefficient a [default: 1]"),
        opt("e", "Frobenius exponent e [default: 1]"),
        opt("job", "key=value job file; flags override its entries"),
        opt("out", "write the report here instead of stdout"),
    ]
}

fn build_command() -> Command {
    let opt = |name: &'static str, help: &'static str| Arg::new(name).long(name).help(help).num_args(1).allow_hyphen_values(true);
    let multi = |name: &'static str, help: &'static str| {
        Arg::new(name).long(name).help(help).num_args(1).allow_hyphen_values(true).action(ArgAction::Append)
    };
    let sub = |name: &'static str, about: &'static str| Command::new(name).about(about).args(common_args());
    Command::new("frobthresh")
        .about("Test ideals, F-pure thresholds and F-jumping numbers over F_p[x1..xn]")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(sub("fpt", "F-pure threshold / F-jumping number fjn^I(R, Δ; a)").args([
            opt("ideal", "the ideal a"),
            opt("target", "the m-primary ideal I [default: m]"),
            opt("g-max", "finest bracketing level [default: 12]"),
        ]))
        .subcommand(sub("test-ideal", "certified test ideal τ(R, Δ, ∏ a_i^{t_i})").args([
            multi("ideal", "an ideal a_i (repeatable)"),
            multi("t", "its exponent t_i (repeatable)"),
        ]))
        .subcommand(sub("jumping-numbers", "F-jumping numbers in (lo, hi]").args([
            opt("ideal", "the ideal a"),
            opt("target", "unused; accepted for job-file symmetry"),
            opt("lo", "window start [default: 0]"),
            opt("hi", "window end [default: ell_m + mu(a)]"),
            opt("g-max", "finest bracketing level [default: 12]"),
        ]))
        .subcommand(sub("digits", "base-q digits, truncations and round-ups").args([
            opt("t", "positive rational"),
            opt("q", "base"),
            opt("n", "index range, e.g. 0..4"),
        ]))
        .subcommand(sub("star-check", "evaluate Condition (★) on a range of n").args(star_args()))
        .subcommand(
            sub("b-to-a", "check the sufficient criterion for (★), then (★)")
                .args(star_args())
                .arg(opt("n0", "the index n0 [default: 0]")),
        )
        .subcommand(
            sub("perturb-check", "compare truncated thresholds of a and a + m^{q^{u+2} N}")
                .args(star_args())
                .args([
                    opt("n0", "derive N = q^{n0+3} emb when N is absent"),
                    opt("control", "perturbation order of the negative control"),
                ]),
        )
        .subcommand(
            sub("stab-experiment", "stabilization of τ^{n,u}((a + m^M)^t) ⊆ I")
                .args(star_args())
                .arg(opt("M", "perturbation order M")),
        )
        .subcommand(sub("acc-probe", "thresholds over an enumerated family").args([
            opt("family", "monomials(maxdeg=D) | powers(ideal,kmax) | binomial-hypersurfaces(amax,bmax) | explicit([..])"),
            opt("target", "the m-primary ideal I [default: m]"),
            opt("cap", "maximal family size [default: 64]"),
            opt("pairs", "maximal number of subadditivity pairs [default: 64]"),
        ]))
}

fn star_args() -> Vec<Arg> {
    let opt = |name: &'static str, help: &'static str| Arg::new(name).long(name).help(help).num_args(1).allow_hyphen_values(true);
    vec![
        opt("ideal", "the ideal a"),
        opt("t", "the exponent t"),
        opt("target", "the m-primary ideal I [default: m]"),
        opt("u", "the index u [default: 2]"),
        opt("N", "the constant N [default: 0]"),
        opt("n", "range of n, e.g. 0..8"),
    ]
}

fn collect_flags(m: &ArgMatches, spec: &mut JobSpec) {
    for id in m.ids() {
        let key = id.as_str();
        if key == "job" {
            continue;
        }
        if let Ok(Some(vals)) = m.try_get_many::<String>(key) {
            let v: Vec<&str> = vals.map(|s| s.as_str()).collect();
            spec.set(key, v.join(";"));
        }
    }
}

/// A finished command: the report and its exit status.
pub struct Outcome {
    pub report: Value,
    pub code: i32,
}

fn ok(report: Value) -> Outcome {
    Outcome { report, code: EXIT_OK }
}

fn ring_header(ring: &PolyRing, d: &PairDivisor) -> Value {
    json!({ "ring": ring.to_string(), "divisor": d.describe(), "e": d.e() })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serialization")
}

enum Failure {
    Field(FieldError),
    Compute(Error),
}

impl From<FieldError> for Failure {
    fn from(e: FieldError) -> Self {
        Failure::Field(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

/// Runs one command on a validated job.
pub fn run(command: &str, spec: &JobSpec) -> Outcome {
    match dispatch(command, spec) {
        Ok(o) => o,
        Err(Failure::Field(e)) => Outcome {
            report: json!({ "command": command, "error": { "field": e.field, "message": e.message } }),
            code: EXIT_INPUT,
        },
        Err(Failure::Compute(e)) => {
            let code = match e {
                Error::Overflow(_) | Error::Unsupported(_) => EXIT_UNRESOLVED,
                _ => EXIT_INPUT,
            };
            Outcome {
                report: json!({ "command": command, "error": { "field": Value::Null, "message": e.to_string() } }),
                code,
            }
        }
    }
}

fn dispatch(command: &str, spec: &JobSpec) -> std::result::Result<Outcome, Failure> {
    if command == "digits" {
        return digits_report(spec);
    }
    let ring = spec.ring()?;
    let d = spec.divisor(&ring)?;
    let header = merge(json!({ "command": command }), ring_header(&ring, &d));
    let out = match command {
        "fpt" => {
            let a = spec.ideal(&ring)?;
            let i = spec.target(&ring)?;
            let g_max: u32 = spec.parse_num("g-max", Some(12))?;
            let q = ThresholdQuery::new(d, a.clone(), i.clone())
                .map_err(|e| field_err("ideal", e))?
                .with_g_max(g_max);
            let res = fjn(&q)?;
            let code = if res.resolved { EXIT_OK } else { EXIT_UNRESOLVED };
            Outcome {
                report: merge(header, json!({
                    "ideal": a.to_strings(),
                    "target": i.to_strings(),
                    "fpt": res.value,
                    "approx": res.value.as_ref().map(|v| format!("{:.6}", v.approx())),
                    "resolved": res.resolved,
                    "bracket": { "lo": res.lo, "hi": res.hi },
                    "provenance": res.provenance,
                    "certificate_mode": "fixed-operator",
                    "uncertified": !res.resolved,
                })),
                code,
            }
        }
        "test-ideal" => {
            let ideals = spec.ideals(&ring)?;
            let ts = spec.exponents()?;
            if ideals.len() != ts.len() {
                return Err(field_err("t", "one exponent per ideal is required").into());
            }
            let m = MixedExponent::new(ideals.iter().cloned().map(PowerSum::plain).zip(ts.iter().cloned()).collect())
                .map_err(|e| field_err("ideal", e))?;
            let (tau, cert) = test_ideal(&d, &m).map_err(|e| match e {
                Error::Domain(_) => Failure::Field(field_err("t", e)),
                other => Failure::Compute(other),
            })?;
            let code = if cert.is_certified() { EXIT_OK } else { EXIT_UNRESOLVED };
            Outcome {
                report: merge(header, json!({
                    "ideals": ideals.iter().map(|a| a.to_strings()).collect::<Vec<_>>(),
                    "exponents": ts,
                    "tau": tau.to_strings(),
                    "certificate": to_value(&cert),
                    "uncertified": !cert.is_certified(),
                })),
                code,
            }
        }
        "jumping-numbers" => {
            let a = spec.ideal(&ring)?;
            let i = Ideal::maximal(&ring);
            let g_max: u32 = spec.parse_num("g-max", Some(12))?;
            let mut q = ThresholdQuery::new(d, a.clone(), i).map_err(|e| field_err("ideal", e))?.with_g_max(g_max);
            let lo = match spec.get("lo") {
                Some(_) => spec.rational("lo")?,
                None => ExactRational::zero(),
            };
            let hi = match spec.get("hi") {
                Some(_) => spec.rational("hi")?,
                None => q.hi.clone(),
            };
            q = q.with_window(lo, hi).map_err(|e| field_err("hi", e))?;
            let res = jumping_numbers(&q)?;
            let code = if res.unresolved.is_empty() { EXIT_OK } else { EXIT_UNRESOLVED };
            Outcome {
                report: merge(header, json!({
                    "ideal": a.to_strings(),
                    "window": { "lo": q.lo, "hi": q.hi },
                    "jumping_numbers": res.values,
                    "unresolved": res.unresolved.iter().map(|(l, h)| json!({"lo": l, "hi": h})).collect::<Vec<_>>(),
                    "certificate_mode": "fixed-operator",
                    "uncertified": !res.unresolved.is_empty(),
                })),
                code,
            }
        }
        "star-check" => {
            let c = spec.star_config(&ring, (0, 8))?;
            let rep = check_condition_star(&c)?;
            ok(merge(header, json!({ "report": to_value(&rep), "uncertified": rep.unverified })))
        }
        "b-to-a" => {
            let c = spec.star_config(&ring, (0, 8))?;
            let n0: u32 = spec.parse_num("n0", Some(0))?;
            let rep = verify_b_to_a(&c, n0)?;
            let code = if rep.verdict == Verdict::ConclusionFailed { EXIT_UNRESOLVED } else { EXIT_OK };
            Outcome {
                report: merge(header, json!({ "report": to_value(&rep), "uncertified": rep.unverified })),
                code,
            }
        }
        "perturb-check" => {
            let mut c = spec.star_config(&ring, (1, 6))?;
            if spec.get("N").is_none() {
                let n0: u32 = spec.parse_num("n0", Some(0))?;
                c.n_big = (d.q() as u64)
                    .checked_pow(n0 + 3)
                    .and_then(|x| x.checked_mul(ring.emb() as u64))
                    .ok_or_else(|| field_err("n0", "N overflows"))?;
            }
            let control = match spec.get("control") {
                Some(_) => Some(spec.parse_num::<u64>("control", None)?),
                None => None,
            };
            let rep = perturbation_equivalence(&c, control)?;
            ok(merge(header, json!({ "N": c.n_big, "report": to_value(&rep), "uncertified": false })))
        }
        "stab-experiment" => {
            let c = spec.star_config(&ring, (1, 8))?;
            let big_m: u64 = spec.parse_num("M", None)?;
            let rep = stabilization_experiment(&c, big_m)?;
            ok(merge(header, json!({ "report": to_value(&rep), "uncertified": false })))
        }
        "acc-probe" => {
            let text = spec.require("family")?;
            let fam = FamilySpec::parse(text).map_err(|e| field_err("family", e))?;
            let i = spec.target(&ring)?;
            let cap: usize = spec.parse_num("cap", Some(64))?;
            let pairs: usize = spec.parse_num("pairs", Some(64))?;
            let rep = acc_probe(&fam, text, &d, &i, cap, pairs)?;
            let unresolved = rep.members.iter().any(|m| !m.resolved);
            Outcome {
                report: merge(header, json!({ "report": to_value(&rep), "uncertified": unresolved })),
                code: if unresolved { EXIT_UNRESOLVED } else { EXIT_OK },
            }
        }
        other => return Err(field_err("command", format!("unknown command {other:?}")).into()),
    };
    Ok(out)
}

fn digits_report(spec: &JobSpec) -> std::result::Result<Outcome, Failure> {
    let t = JobSpec::positive("t", spec.require("t")?)?;
    let q: u64 = spec.parse_num("q", None)?;
    if q < 2 {
        return Err(field_err("q", "base must be at least 2").into());
    }
    let (lo, hi) = spec.range("n", (0, 4))?;
    let ns: Vec<i64> = (lo..=hi).collect();
    let digits = ns
        .iter()
        .map(|n| digit(&t, q, *n).map(|d| d.to_string()))
        .collect::<Result<Vec<_>>>()?;
    let truncs = ns.iter().map(|n| truncation(&t, q, *n)).collect::<Result<Vec<_>>>()?;
    let rounds = ns.iter().map(|n| roundup(&t, q, *n)).collect::<Result<Vec<_>>>()?;
    let ev = digits_eventually_constant(&t, q).map(|(l, onset)| json!({ "digit": l.to_string(), "onset": onset }));
    Ok(ok(json!({
        "command": "digits",
        "t": t,
        "q": q,
        "n": ns,
        "digits": digits,
        "truncations": truncs,
        "roundups": rounds,
        "eventually_constant": ev,
    })))
}

/// Parses `args` (including the program name), runs, writes the report.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = match build_command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (command, sub) = matches.subcommand().expect("subcommand required");
    let mut spec = JobSpec::default();
    if let Some(path) = sub.get_one::<String>("job") {
        match std::fs::read_to_string(path) {
            Ok(text) => match JobSpec::parse_job(&text) {
                Ok(s) => spec = s,
                Err(e) => return report_input_error(command, &e),
            },
            Err(e) => return report_input_error(command, &field_err("job", e)),
        }
    }
    collect_flags(sub, &mut spec);
    let outcome = run(command, &spec);
    let text = serde_json::to_string_pretty(&outcome.report).expect("json") + "\n";
    match spec.get("out") {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("cannot write {path}: {e}");
                return EXIT_INPUT;
            }
        }
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    if outcome.code == EXIT_INPUT {
        if let Some(msg) = outcome.report.get("error") {
            eprintln!("error: {msg}");
        }
    }
    outcome.code
}

fn report_input_error(command: &str, e: &FieldError) -> i32 {
    let v = json!({ "command": command, "error": { "field": e.field, "message": e.message } });
    println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    eprintln!("error: {e}");
    EXIT_INPUT
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(pairs: &[(&str, &str)]) -> JobSpec {
        let mut s = JobSpec::default();
        for (k, v) in pairs {
            s.set(k, *v);
        }
        s
    }

    #[test]
    fn job_file_format() {
        let s = JobSpec::parse_job("p = 3\n# comment\nvars=x,y\ng_max = 4\n").unwrap();
        assert_eq!(s.get("p"), Some("3"));
        assert_eq!(s.get("g-max"), Some("4"));
        assert!(JobSpec::parse_job("p 3").is_err());
    }

    #[test]
    fn bad_field_is_named() {
        let out = run("fpt", &job(&[("p", "4"), ("ideal", "x")]));
        assert_eq!(out.code, EXIT_INPUT);
        assert_eq!(out.report["error"]["field"], "p");
        let out = run("fpt", &job(&[("p", "2"), ("ideal", "x+")]));
        assert_eq!(out.report["error"]["field"], "ideal");
    }

    #[test]
    fn digits_command() {
        let out = run("digits", &job(&[("t", "5/6"), ("q", "2"), ("n", "0..4")]));
        assert_eq!(out.code, EXIT_OK);
        assert_eq!(out.report["truncations"][2], "3/4");
        assert_eq!(out.report["digits"][2], "1");
    }

    #[test]
    fn argument_parsing() {
        let cmd = build_command();
        let m = cmd
            .try_get_matches_from(["frobthresh", "test-ideal", "--p", "2", "--ideal", "x", "--t", "1", "--ideal", "y", "--t", "1/2"])
            .unwrap();
        let (name, sub) = m.subcommand().unwrap();
        let mut spec = JobSpec::default();
        collect_flags(sub, &mut spec);
        assert_eq!(name, "test-ideal");
        assert_eq!(spec.get("ideal"), Some("x;y"));
        assert_eq!(spec.get("t"), Some("1;1/2"));
    }
}
