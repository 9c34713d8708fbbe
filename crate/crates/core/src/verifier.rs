//! Extensional checking of class equations, the trait classifier and the
//! virus-versus-infected-form counterexample.
//!
//! Equality between partial functions is only checked on a finite probe
//! corpus. Running out of fuel on either side makes a probe inconclusive; it
//! never counts as agreement or disagreement. Undefined on both sides counts
//! as agreement.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{encode_tuple, pair, Word};
use crate::envmodel::{diff, run_external, Env, EnvOutcome, SlotKind};
use crate::interp::programs::{P_DEL, P_ID};
use crate::interp::{interp, EvalOutcome, Fuel};
use crate::virusforge::{
    document, forge, pad, pad_program, source_file, standard_compiler, standard_renderer,
    strip_padding, Blueprint, Class, EquationId, Forged, DOC_MARKER, SRC_MARKER,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifierError {
    #[error("insufficient probes: {0}")]
    InsufficientProbes(String),
}

/// What a verdict is about: the probe environment and, where the equation
/// is quantified over a host, that host.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub env: Env,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<Word>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u64>,
}

impl Witness {
    fn env(env: &Env) -> Self {
        Witness {
            env: env.clone(),
            host: None,
            depth: None,
        }
    }

    fn host(env: &Env, host: &Word) -> Self {
        Witness {
            host: Some(host.clone()),
            ..Witness::env(env)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Equal,
    Unequal {
        witness: Box<Witness>,
        lhs: EvalOutcome,
        rhs: EvalOutcome,
    },
    Inconclusive {
        witness: Box<Witness>,
        consumed: u64,
    },
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal)
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Verdict::Inconclusive { .. })
    }
}

/// Compares two outcomes.
pub fn judge(witness: Witness, lhs: EvalOutcome, rhs: EvalOutcome) -> Verdict {
    match (&lhs, &rhs) {
        (EvalOutcome::OutOfFuel(n), _) | (_, EvalOutcome::OutOfFuel(n)) => Verdict::Inconclusive {
            witness: Box::new(witness),
            consumed: *n,
        },
        (EvalOutcome::Value(a), EvalOutcome::Value(b)) if a == b => Verdict::Equal,
        (EvalOutcome::Undefined(_), EvalOutcome::Undefined(_)) => Verdict::Equal,
        _ => Verdict::Unequal {
            witness: Box::new(witness),
            lhs,
            rhs,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    fn of(verdicts: &[Verdict]) -> Status {
        if verdicts.is_empty() || verdicts.iter().any(|v| matches!(v, Verdict::Unequal { .. })) {
            Status::Fail
        } else if verdicts.iter().any(Verdict::is_inconclusive) {
            Status::Inconclusive
        } else {
            Status::Pass
        }
    }

    fn combine(a: Status, b: Status) -> Status {
        match (a, b) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquationCheck {
    pub id: String,
    pub verdicts: Vec<Verdict>,
    pub status: Status,
    pub pass: bool,
}

impl EquationCheck {
    fn new(id: impl Into<String>, verdicts: Vec<Verdict>) -> Self {
        let status = Status::of(&verdicts);
        EquationCheck {
            id: id.into(),
            verdicts,
            status,
            pass: status == Status::Pass,
        }
    }

    pub fn equal_count(&self) -> usize {
        self.verdicts.iter().filter(|v| v.is_equal()).count()
    }

    pub fn inconclusive_count(&self) -> usize {
        self.verdicts.iter().filter(|v| v.is_inconclusive()).count()
    }
}

/// Checks `lhs ≃ rhs` on every probe.
pub fn check_equation(
    id: &str,
    lhs: impl Fn(&Env, Fuel) -> EvalOutcome,
    rhs: impl Fn(&Env, Fuel) -> EvalOutcome,
    probes: &[Env],
    fuel: Fuel,
) -> Result<EquationCheck, VerifierError> {
    if probes.is_empty() {
        return Err(VerifierError::InsufficientProbes("no probe environments".into()));
    }
    let verdicts = probes
        .iter()
        .map(|e| judge(Witness::env(e), lhs(e, fuel), rhs(e, fuel)))
        .collect();
    Ok(EquationCheck::new(id, verdicts))
}

/// Applies `k` to the value of `o`, passing other outcomes through.
fn then(o: EvalOutcome, k: impl FnOnce(Word) -> EvalOutcome) -> EvalOutcome {
    match o {
        EvalOutcome::Value(w) => k(w),
        other => other,
    }
}

fn env_value(e: &Env) -> EvalOutcome {
    EvalOutcome::Value(e.encode())
}

/// Undefined outcome for a run whose result is not an environment.
fn as_env(o: EvalOutcome) -> Result<Env, EvalOutcome> {
    match EnvOutcome::from_eval(o) {
        EnvOutcome::Env(e) => Ok(e),
        EnvOutcome::OutOfFuel(n) => Err(EvalOutcome::OutOfFuel(n)),
        EnvOutcome::Undefined(r) => Err(EvalOutcome::Undefined(r)),
        EnvOutcome::MalformedEnvResult(_) => Err(EvalOutcome::Undefined("not an environment".into())),
    }
}

fn member_run(env: &Env, i: usize, fuel: Fuel) -> EvalOutcome {
    match env.without_program(i) {
        Ok(rest) => interp(&env.programs[i], &rest.encode(), fuel),
        Err(e) => EvalOutcome::Undefined(e.to_string()),
    }
}

fn part_index(forged: &Forged, classes: &[Class]) -> usize {
    forged
        .parts
        .iter()
        .position(|p| classes.contains(&p.class))
        .unwrap_or(0)
}

fn equation_name(id: EquationId) -> &'static str {
    match id {
        EquationId::Structure => "structure",
        EquationId::ImageIsVirus => "image_is_virus",
        EquationId::EctoSequencing => "ecto_sequencing",
        EquationId::DocumentRendering => "document_rendering",
        EquationId::SourceCompilation => "source_compilation",
        EquationId::CompanionRelocation => "companion_relocation",
        EquationId::LauncherStub => "launcher_stub (inferred)",
        EquationId::ExplicitRecursion => "explicit_recursion",
        EquationId::GenerationImage => "generation_image",
        EquationId::PadImage => "pad_image",
        EquationId::PaddedEquivalence => "padded_equivalence",
    }
}

/// Runs one class equation over the probes.
pub fn run_equation(forged: &Forged, id: EquationId, probes: &[Env], fuel: Fuel) -> EquationCheck {
    let v = &forged.v;
    let mut verdicts = Vec::new();
    match id {
        EquationId::Structure => {
            for e in probes {
                let want = env_value(&forged.expected(v, e));
                verdicts.push(judge(Witness::env(e), interp(v, &e.encode(), fuel), want));
            }
        }
        EquationId::ImageIsVirus => {
            let k = part_index(forged, &[Class::Overwriter, Class::Duplicator]);
            for e in probes {
                for j in &e.programs {
                    let img = forged.infected_form(k, v, j);
                    let lhs = interp(&img, &e.encode(), fuel);
                    let rhs = interp(v, &e.encode(), fuel);
                    verdicts.push(judge(Witness::host(e, j), lhs, rhs));
                }
            }
        }
        EquationId::EctoSequencing => {
            let k = part_index(forged, &[Class::EctoSymbiote]);
            for e in probes {
                let after_v = interp(v, &e.encode(), fuel);
                for j in &e.programs {
                    let img = forged.infected_form(k, v, j);
                    let lhs = interp(&img, &e.encode(), fuel);
                    let rhs = then(after_v.clone(), |w| interp(j, &w, fuel));
                    verdicts.push(judge(Witness::host(e, j), lhs, rhs));
                }
            }
        }
        EquationId::DocumentRendering => {
            let k = part_index(forged, &[Class::Document]);
            let t = forged.parts[k].t.clone().unwrap_or_default();
            for e in probes {
                let after_v = interp(v, &e.encode(), fuel);
                for j in e.data.iter().filter(|d| d.starts_with(DOC_MARKER)) {
                    let img = forged.infected_form(k, v, j);
                    let lhs = interp(&t, &pair(&img, &e.encode()), fuel);
                    let rhs = then(after_v.clone(), |w| interp(&t, &pair(j, &w), fuel));
                    verdicts.push(judge(Witness::host(e, j), lhs, rhs));
                }
            }
        }
        EquationId::SourceCompilation => {
            let k = part_index(forged, &[Class::Source]);
            let t = forged.parts[k].t.clone().unwrap_or_default();
            for e in probes {
                let after_v = interp(v, &e.encode(), fuel);
                for j in e.data.iter().filter(|d| d.starts_with(SRC_MARKER)) {
                    let img = forged.infected_form(k, v, j);
                    let lhs = then(interp(&t, &img, fuel), |c| interp(&c, &e.encode(), fuel));
                    let rhs = then(interp(&t, j, fuel), |c| {
                        then(after_v.clone(), |w| interp(&c, &w, fuel))
                    });
                    verdicts.push(judge(Witness::host(e, j), lhs, rhs));
                }
            }
        }
        EquationId::CompanionRelocation | EquationId::LauncherStub => {
            for e in probes {
                let post = match as_env(interp(v, &e.encode(), fuel)) {
                    Ok(post) => post,
                    Err(failed) => {
                        verdicts.push(judge(Witness::env(e), failed, env_value(&forged.expected(v, e))));
                        continue;
                    }
                };
                for r in diff(e, &post).replaced {
                    if r.slot.kind != SlotKind::Program {
                        continue;
                    }
                    let i = r.slot.index;
                    let lhs = member_run(&post, i, fuel);
                    let rest = post.without_program(i).expect("replaced slot exists");
                    let rhs = then(interp(v, &rest.encode(), fuel), |w| interp(&r.before, &w, fuel));
                    verdicts.push(judge(Witness::host(&post, &r.before), lhs, rhs));
                }
            }
        }
        EquationId::ExplicitRecursion => {
            let e_word = forged.explicit_e.clone().unwrap_or_default();
            for y in 0..4u64 {
                let phi = interp(&e_word, &Word::from_nat(y), fuel);
                for e in probes {
                    let lhs = then(phi.clone(), |p| interp(&p, &e.encode(), fuel));
                    let input = encode_tuple(&[e_word.clone(), Word::from_nat(y), e.encode()]);
                    let rhs = interp(&forged.body, &input, fuel);
                    let mut w = Witness::env(e);
                    w.depth = Some(y);
                    verdicts.push(judge(w, lhs, rhs));
                }
            }
        }
        EquationId::GenerationImage => {
            let e_word = forged.explicit_e.clone().unwrap_or_default();
            for y in 0..4u64 {
                let Some(gen) = forged.generation(y) else { break };
                for e in probes {
                    let Some((lhs, _)) = first_written_program(&gen, e, fuel) else { continue };
                    let rhs = interp(&e_word, &Word::from_nat(y + 1), fuel);
                    let mut w = Witness::env(e);
                    w.depth = Some(y);
                    verdicts.push(judge(w, lhs, rhs));
                }
            }
        }
        EquationId::PadImage => {
            let rhs = interp(&pad_program(), v, fuel);
            for e in probes {
                let Some((lhs, _)) = first_written_program(v, e, fuel) else { continue };
                verdicts.push(judge(Witness::env(e), lhs, rhs.clone()));
            }
        }
        EquationId::PaddedEquivalence => {
            let gens = generations(v, 5);
            for e in probes {
                for pair_ in gens.windows(2) {
                    let lhs = normalized_run(&pair_[0], e, fuel);
                    let rhs = normalized_run(&pair_[1], e, fuel);
                    verdicts.push(judge(Witness::host(e, &pair_[1]), lhs, rhs));
                }
            }
        }
    }
    EquationCheck::new(equation_name(id), verdicts)
}

/// The first program slot written by running `actor` on `e`, as an outcome.
fn first_written_program(actor: &[u8], e: &Env, fuel: Fuel) -> Option<(EvalOutcome, usize)> {
    match as_env(interp(actor, &e.encode(), fuel)) {
        Ok(post) => {
            let d = diff(e, &post);
            let first = d
                .touched()
                .find(|(s, _)| s.kind == SlotKind::Program)
                .map(|(s, w)| (EvalOutcome::Value(w.clone()), s.index));
            first
        }
        Err(failed) => (!e.programs.is_empty()).then_some((failed, 0)),
    }
}

/// `v, τ(v), τ²(v), …` (`count` words).
pub fn generations(v: &[u8], count: usize) -> Vec<Word> {
    let mut out = vec![Word::from(v)];
    while out.len() < count {
        let next = pad(out.last().expect("non-empty"));
        out.push(next);
    }
    out
}

/// Runs `actor` on `e` and strips generation padding from every program of
/// the resulting environment.
pub fn normalized_run(actor: &[u8], e: &Env, fuel: Fuel) -> EvalOutcome {
    match as_env(interp(actor, &e.encode(), fuel)) {
        Ok(mut post) => {
            post.programs = post.programs.iter().map(|p| strip_padding(p)).collect();
            env_value(&post)
        }
        Err(o) => o,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: Class,
    pub equations: Vec<EquationCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traits: Option<TraitReport>,
    pub status: Status,
    pub pass: bool,
}

/// Runs every equation of the forged class.
pub fn verify_class(forged: &Forged, probes: &[Env], fuel: Fuel) -> Result<ClassReport, VerifierError> {
    if probes.is_empty() {
        return Err(VerifierError::InsufficientProbes("no probe environments".into()));
    }
    let equations: Vec<EquationCheck> = forged
        .equations
        .iter()
        .map(|&id| run_equation(forged, id, probes, fuel))
        .collect();
    let status = equations
        .iter()
        .fold(Status::Pass, |acc, eq| Status::combine(acc, eq.status));
    Ok(ClassReport {
        class: forged.class,
        equations,
        traits: None,
        status,
        pass: status == Status::Pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetType {
    Program,
    Data,
    NewFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HostModification {
    Destructive,
    Preservative,
    PartiallyDestructive,
    #[serde(rename = "n/a")]
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraitReport {
    pub target_type: TargetType,
    pub host_modification: HostModification,
    pub spread_count: usize,
}

/// One observed infection: the environment before and after, and a slot
/// that changed.
struct Observation {
    before: Env,
    after: Env,
}

/// Infers the trait row of `v` from its behaviour on the probes alone.
pub fn classify_traits(v: &[u8], probes: &[Env], fuel: Fuel) -> Result<TraitReport, VerifierError> {
    let has_rich_probe = probes.iter().any(|e| {
        let mut hosts = e.programs.clone();
        hosts.sort();
        hosts.dedup();
        hosts.len() >= 2 && e.data.iter().any(|d| d.starts_with(DOC_MARKER))
    });
    if !has_rich_probe {
        return Err(VerifierError::InsufficientProbes(
            "need an environment with two distinct programs and a document".into(),
        ));
    }
    let observations: Vec<Observation> = probes
        .iter()
        .filter_map(|e| match run_external(v, e, fuel) {
            EnvOutcome::Env(after) if after != *e => Some(Observation {
                before: e.clone(),
                after,
            }),
            _ => None,
        })
        .collect();
    let deltas: Vec<_> = observations.iter().map(|o| diff(&o.before, &o.after)).collect();
    let replaced_program = deltas
        .iter()
        .any(|d| d.replaced.iter().any(|r| r.slot.kind == SlotKind::Program));
    let replaced_data = deltas
        .iter()
        .any(|d| d.replaced.iter().any(|r| r.slot.kind == SlotKind::Data));
    let added = deltas.iter().any(|d| !d.added.is_empty());
    let target_type = if replaced_program {
        TargetType::Program
    } else if replaced_data {
        TargetType::Data
    } else if added {
        TargetType::NewFile
    } else {
        return Err(VerifierError::InsufficientProbes("no probe was infected".into()));
    };

    let spread_count = spread(target_type, &observations, fuel)?;
    let host_modification = match target_type {
        TargetType::NewFile => HostModification::NotApplicable,
        _ => host_modification(target_type, v, &observations, fuel)?,
    };
    Ok(TraitReport {
        target_type,
        host_modification,
        spread_count,
    })
}

fn is_value(o: &EvalOutcome) -> bool {
    matches!(o, EvalOutcome::Value(_))
}

/// 1 + the number of added files the infected form cannot run without.
fn spread(target: TargetType, observations: &[Observation], fuel: Fuel) -> Result<usize, VerifierError> {
    for o in observations {
        let d = diff(&o.before, &o.after);
        let added: Vec<usize> = d
            .added
            .iter()
            .filter(|a| a.slot.kind == SlotKind::Program)
            .map(|a| a.slot.index)
            .collect();
        let infected = match target {
            TargetType::Program => d
                .replaced
                .iter()
                .find(|r| r.slot.kind == SlotKind::Program)
                .map(|r| r.slot.index),
            TargetType::NewFile => added.first().copied(),
            TargetType::Data => {
                if d.replaced.iter().any(|r| r.slot.kind == SlotKind::Data) {
                    // a data image needs only its interpreter, which was
                    // there before the infection
                    return Ok(1);
                }
                None
            }
        };
        let Some(i) = infected else { continue };
        if !is_value(&member_run(&o.after, i, fuel)) {
            continue;
        }
        let needed = added
            .iter()
            .filter(|&&a| a != i)
            .filter(|&&a| {
                let mut without = o.after.clone();
                without.programs.remove(a);
                let i2 = if a < i { i - 1 } else { i };
                !is_value(&member_run(&without, i2, fuel))
            })
            .count();
        return Ok(1 + needed);
    }
    Err(VerifierError::InsufficientProbes(
        "no infected form ran successfully".into(),
    ))
}

/// Whether `image` behaves like `host` composed with the viral run `v`
/// (either order) on the rest of `env`.
fn program_recoverable(v: &[u8], env: &Env, i: usize, host: &Word, fuel: Fuel) -> Option<bool> {
    let lhs = member_run(env, i, fuel);
    if !is_value(&lhs) {
        return None;
    }
    let rest = env.without_program(i).ok()?.encode();
    let vj = then(interp(v, &rest, fuel), |w| interp(host, &w, fuel));
    let jv = then(interp(host, &rest, fuel), |w| interp(v, &w, fuel));
    Some(lhs == vj || lhs == jv)
}

/// Whether some program of `env` interprets `image` like `host` after `v`,
/// as a renderer or as a compiler.
fn data_recoverable(v: &[u8], env: &Env, image: &Word, host: &Word, fuel: Fuel) -> bool {
    let e = env.encode();
    let after_v = interp(v, &e, fuel);
    env.programs.iter().any(|t| {
        let rendered = interp(t, &pair(image, &e), fuel);
        let expect = then(after_v.clone(), |w| interp(t, &pair(host, &w), fuel));
        if is_value(&rendered) && rendered == expect {
            return true;
        }
        let compiled = then(interp(t, image, fuel), |c| interp(&c, &e, fuel));
        let expect = then(interp(t, host, fuel), |c| then(after_v.clone(), |w| interp(&c, &w, fuel)));
        is_value(&compiled) && compiled == expect
    })
}

fn host_modification(
    target: TargetType,
    v: &[u8],
    observations: &[Observation],
    fuel: Fuel,
) -> Result<HostModification, VerifierError> {
    let kind = match target {
        TargetType::Data => SlotKind::Data,
        _ => SlotKind::Program,
    };
    let mut images: Vec<(Word, Word)> = Vec::new();
    let mut recoverable = true;
    let mut checked = 0;
    for o in observations {
        for r in diff(&o.before, &o.after).replaced {
            if r.slot.kind != kind {
                continue;
            }
            images.push((r.before.clone(), r.after.clone()));
            let ok = match kind {
                SlotKind::Program => program_recoverable(v, &o.after, r.slot.index, &r.before, fuel),
                SlotKind::Data => Some(data_recoverable(v, &o.before, &r.after, &r.before, fuel)),
            };
            if let Some(ok) = ok {
                checked += 1;
                recoverable &= ok;
            }
        }
    }
    let distinct_hosts: Vec<&(Word, Word)> = {
        let mut seen: Vec<&(Word, Word)> = Vec::new();
        for im in &images {
            if !seen.iter().any(|s| s.0 == im.0) {
                seen.push(im);
            }
        }
        seen
    };
    if distinct_hosts.len() < 2 || checked == 0 {
        return Err(VerifierError::InsufficientProbes(
            "need infections of two distinct hosts".into(),
        ));
    }
    let host_independent = distinct_hosts.iter().all(|(_, img)| *img == distinct_hosts[0].1);
    Ok(if recoverable {
        HostModification::Preservative
    } else if host_independent {
        HostModification::Destructive
    } else {
        HostModification::PartiallyDestructive
    })
}

/// One run of the counterexample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleCase {
    pub host: String,
    pub n: usize,
    pub env: Env,
    /// `φ_v(d, p₁, …, pₙ)`: the virus run on the whole environment.
    pub lhs: EnvOutcome,
    /// `φ_{î(p₁)}(d, p₂, …, pₙ)`: the infected form run as a member.
    pub rhs: EnvOutcome,
    /// `rhs` with `î(p₁)` put back in slot 0, comparable with `lhs`.
    pub rhs_with_member: EnvOutcome,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub v: Word,
    pub cases: Vec<CounterexampleCase>,
}

impl CounterexampleReport {
    /// Inequality with the deleting host and equality with the identity
    /// host, for every size.
    pub fn reproduced(&self) -> bool {
        self.cases.iter().all(|c| match c.host.as_str() {
            "P_DEL" => matches!(c.verdict, Verdict::Unequal { .. }),
            _ => c.verdict.is_equal(),
        })
    }
}

fn filler_host(k: usize) -> Word {
    Word::from(format!("(pair (add (fst in) '4:#f{k:02}) (snd in))"))
}

/// The virus-versus-infected-form counterexample with an ecto-symbiote.
pub fn bonfante_demo(sizes: &[usize], fuel: Fuel) -> CounterexampleReport {
    let forged = forge(&Blueprint::standard(Class::EctoSymbiote)).expect("standard blueprint");
    let v = forged.v.clone();
    let mut cases = Vec::new();
    for (name, p1) in [("P_DEL", P_DEL), ("P_ID", P_ID)] {
        for &n in sizes {
            let mut programs = vec![Word::from(p1)];
            programs.extend((2..=n).map(filler_host));
            let env = Env::new(vec![Word::from("#readme")], programs).expect("marked data");
            let lhs = run_external(&v, &env, fuel);
            let img = forged.infected_form(0, &v, &Word::from(p1));
            let mut infected = env.clone();
            infected.programs[0] = img.clone();
            let rhs = crate::envmodel::run_member(&infected, 0, fuel).expect("slot 0 exists");
            let rhs_with_member = match &rhs {
                EnvOutcome::Env(e) => {
                    let mut e = e.clone();
                    e.programs.insert(0, img.clone());
                    EnvOutcome::Env(e)
                }
                other => other.clone(),
            };
            let verdict = judge(
                Witness::host(&env, &Word::from(p1)),
                outcome_word(&lhs),
                outcome_word(&rhs_with_member),
            );
            cases.push(CounterexampleCase {
                host: name.into(),
                n,
                env,
                lhs,
                rhs,
                rhs_with_member,
                verdict,
            });
        }
    }
    CounterexampleReport { v, cases }
}

fn outcome_word(o: &EnvOutcome) -> EvalOutcome {
    match o {
        EnvOutcome::Env(e) => env_value(e),
        EnvOutcome::Undefined(r) => EvalOutcome::Undefined(r.clone()),
        EnvOutcome::OutOfFuel(n) => EvalOutcome::OutOfFuel(*n),
        EnvOutcome::MalformedEnvResult(w) => EvalOutcome::Value(w.clone()),
    }
}

const TAG_CHARS: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";

fn tag(rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(3..=8);
    (0..len)
        .map(|_| *TAG_CHARS.choose(rng).expect("non-empty") as char)
        .collect()
}

/// A host program: total, not the identity, at least 16 bytes long.
fn random_host(rng: &mut ChaCha8Rng) -> Word {
    let t = tag(rng);
    let src = match rng.gen_range(0..3) {
        0 => format!("(pair (add (fst in) '{}:#{t}) (snd in))", t.len() + 1),
        1 => format!("(pair (tuple '{}:#{t}) (snd in))", t.len() + 1),
        _ => format!("(seq '{}:{t} (pair (add (fst in) '2:#h) (snd in)))", t.len()),
    };
    Word::from(src)
}

fn random_data(rng: &mut ChaCha8Rng) -> Word {
    let mut w = vec![b'#'];
    w.extend((0..rng.gen_range(0..12)).map(|_| rng.gen::<u8>()));
    Word::from(w)
}

fn distinct_hosts(rng: &mut ChaCha8Rng, n: usize) -> Vec<Word> {
    let mut hosts: Vec<Word> = Vec::new();
    while hosts.len() < n {
        let h = random_host(rng);
        if !hosts.contains(&h) {
            hosts.push(h);
        }
    }
    hosts
}

/// Deterministic probe environments for a seed.
///
/// Environments cycle through four shapes: plain hosts with a document and
/// a source file, a renderer with documents, a compiler with source files,
/// and a small mixed one. Each has at most three programs, since encodings grow
/// exponentially with the number of files.
pub fn probe_corpus(seed: u64, count: usize) -> Vec<Env> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let (data, programs) = match k % 4 {
                0 => {
                    let hosts = distinct_hosts(&mut rng, 2);
                    let doc = document(b"", tag(&mut rng).as_bytes());
                    let src = source_file(&random_host(&mut rng));
                    (vec![doc, src], hosts)
                }
                1 => {
                    let host = random_host(&mut rng);
                    let data = vec![
                        document(b"", tag(&mut rng).as_bytes()),
                        document(&random_host(&mut rng), tag(&mut rng).as_bytes()),
                    ];
                    (data, vec![standard_renderer(), host])
                }
                2 => {
                    let host = random_host(&mut rng);
                    let data = vec![
                        source_file(&random_host(&mut rng)),
                        source_file(&random_host(&mut rng)),
                    ];
                    (data, vec![host, standard_compiler()])
                }
                _ => {
                    let n = rng.gen_range(1..=2);
                    let hosts = distinct_hosts(&mut rng, n);
                    let data = (0..rng.gen_range(0..=2))
                        .map(|_| match rng.gen_range(0..3) {
                            0 => random_data(&mut rng),
                            1 => document(b"", tag(&mut rng).as_bytes()),
                            _ => source_file(&random_host(&mut rng)),
                        })
                        .collect();
                    (data, hosts)
                }
            };
            Env::new(data, programs).expect("data words are marked")
        })
        .collect()
}
