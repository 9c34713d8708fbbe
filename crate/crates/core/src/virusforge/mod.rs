//! Concrete viruses forged from class blueprints.
//!
//! Each class is a body `f` over the pair `⟨self, env⟩` (or the triple
//! `(e, y, env)` for the generation counter); the virus is its fixed point.
//! A body decides the infection condition, walks its targets and rebuilds
//! the environment, and otherwise returns the environment unchanged.
//!
//! [`Forged::expected`] is a second, Rust-level rendering of the same
//! infection behaviour. The verifier compares the two.

mod code;
mod meta;

use serde::{Deserialize, Serialize};

use crate::codec::Word;
use crate::envmodel::Env;
use crate::interp::{lit, parse, SyntaxError};
use crate::recursion::{explicit_fix, explicit_instance, kleene_fix, split_explicit, TranscriptStep};

pub use code::{
    companion_form, digest, document, ecto_wrap, launcher_stub, locator, pad, pad_program,
    source_file, split_companion, split_document, split_ecto, split_stub, standard_compiler,
    standard_renderer, strip_padding, wrapped_prefix, Concat, DOC_MARKER, SRC_MARKER,
};
use code::{and, any, code, not};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    Overwriter,
    EctoSymbiote,
    Duplicator,
    Document,
    Source,
    Companion,
    Launcher,
    Multipartite,
    GenerationCounter,
    Polymorphic,
}

impl Class {
    pub const ALL: [Class; 10] = [
        Class::Overwriter,
        Class::EctoSymbiote,
        Class::Duplicator,
        Class::Document,
        Class::Source,
        Class::Companion,
        Class::Launcher,
        Class::Multipartite,
        Class::GenerationCounter,
        Class::Polymorphic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Class::Overwriter => "overwriter",
            Class::EctoSymbiote => "ecto_symbiote",
            Class::Duplicator => "duplicator",
            Class::Document => "document",
            Class::Source => "source",
            Class::Companion => "companion",
            Class::Launcher => "launcher",
            Class::Multipartite => "multipartite",
            Class::GenerationCounter => "generation_counter",
            Class::Polymorphic => "polymorphic",
        }
    }

    pub fn from_name(s: &str) -> Option<Class> {
        Class::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Which files the class searches. `None` for multipartite.
    pub fn target_kind(self) -> Option<TargetKind> {
        match self {
            Class::Document | Class::Source => Some(TargetKind::Data),
            Class::Multipartite => None,
            _ => Some(TargetKind::Programs),
        }
    }

    fn uses_concat(self) -> bool {
        matches!(self, Class::EctoSymbiote | Class::Document | Class::Source)
    }

    fn uses_t(self) -> bool {
        matches!(self, Class::Document | Class::Source)
    }
}

impl std::fmt::Display for Class {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Programs,
    Data,
}

/// Selection predicate over candidate files.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Filter {
    #[default]
    All,
    AllExceptInfected,
    Prefix(Word),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetKind>,
    #[serde(default)]
    pub filter: Filter,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfectionCondition {
    #[default]
    Always,
    NonemptySelection,
    MinData(usize),
    MinPrograms(usize),
    HasDataPrefix(Word),
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transformer {
    NopInsert,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Blueprint {
    pub class: Class,
    #[serde(default)]
    pub search: SearchSpec,
    #[serde(default)]
    pub condition: InfectionCondition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concat: Option<Concat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Word>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Transformer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parts: Option<Vec<Blueprint>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BlueprintError {
    #[error("{class}: missing field `{field}`")]
    Missing { class: Class, field: &'static str },
    #[error("{class}: field `{field}` does not apply")]
    Unexpected { class: Class, field: &'static str },
    #[error("{class}: {reason}")]
    Invalid { class: Class, reason: String },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

impl Blueprint {
    /// A blueprint with default search and condition and the class's
    /// required fields filled with the standard choices.
    pub fn standard(class: Class) -> Blueprint {
        let filter = match class {
            Class::Polymorphic | Class::GenerationCounter => Filter::All,
            _ => Filter::AllExceptInfected,
        };
        let mut bp = Blueprint {
            class,
            search: SearchSpec {
                target: None,
                filter,
            },
            condition: InfectionCondition::Always,
            concat: None,
            t: None,
            tau: None,
            parts: None,
        };
        match class {
            Class::Document => bp.t = Some(standard_renderer()),
            Class::Source => bp.t = Some(standard_compiler()),
            Class::Polymorphic => bp.tau = Some(Transformer::NopInsert),
            Class::Multipartite => {
                bp.parts = Some(vec![
                    Blueprint::standard(Class::EctoSymbiote),
                    Blueprint::standard(Class::Document),
                ])
            }
            _ => {}
        }
        if class.uses_concat() {
            bp.concat = Some(Concat::VirusFirst);
        }
        bp
    }

    pub fn validate(&self) -> Result<(), BlueprintError> {
        let class = self.class;
        let check = |present: bool, required: bool, field: &'static str| match (present, required) {
            (false, true) => Err(BlueprintError::Missing { class, field }),
            (true, false) => Err(BlueprintError::Unexpected { class, field }),
            _ => Ok(()),
        };
        check(self.t.is_some(), class.uses_t(), "t")?;
        check(self.tau.is_some(), class == Class::Polymorphic, "tau")?;
        check(self.parts.is_some(), class == Class::Multipartite, "parts")?;
        if self.concat.is_some() && !class.uses_concat() {
            return Err(BlueprintError::Unexpected { class, field: "concat" });
        }
        if let Some(t) = &self.t {
            parse(t)?;
        }
        if let Some(target) = self.search.target {
            if class.target_kind() != Some(target) {
                return Err(BlueprintError::Invalid {
                    class,
                    reason: format!("class does not search {target:?}"),
                });
            }
        }
        if let Some(parts) = &self.parts {
            let [program_part, data_part] = parts.as_slice() else {
                return Err(BlueprintError::Invalid {
                    class,
                    reason: "exactly two parts are required".into(),
                });
            };
            let program_ok = matches!(
                program_part.class,
                Class::Overwriter
                    | Class::EctoSymbiote
                    | Class::Duplicator
                    | Class::Companion
                    | Class::Launcher
            );
            let data_ok = matches!(data_part.class, Class::Document | Class::Source);
            if !program_ok || !data_ok {
                return Err(BlueprintError::Invalid {
                    class,
                    reason: "parts must be a program infection followed by a document or source infection".into(),
                });
            }
            if self.search.target.is_some() {
                return Err(BlueprintError::Unexpected { class, field: "search" });
            }
            if self.condition == InfectionCondition::NonemptySelection {
                return Err(BlueprintError::Invalid {
                    class,
                    reason: "selection is defined per part".into(),
                });
            }
            program_part.validate()?;
            data_part.validate()?;
        }
        Ok(())
    }
}

/// Identifiers of the checkable defining equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationId {
    /// `φ_v(E) = β_I(v, E)` for `E ∈ I`, `E` otherwise.
    Structure,
    /// `φ_{î(j)}(E) = φ_v(E)`.
    ImageIsVirus,
    /// `φ_{î(j)}(E) = φ_j(φ_v(E))`.
    EctoSequencing,
    /// `φ_t(î(j), E) = φ_t(j, φ_v(E))`.
    DocumentRendering,
    /// `φ_{φ_t(î(j))}(E) = φ_{φ_t(j)}(φ_v(E))`.
    SourceCompilation,
    /// Member run of `î(j)` in the infected environment equals `φ_j ∘ φ_v`.
    CompanionRelocation,
    /// As above for the launcher stub. Inferred.
    LauncherStub,
    /// `φ_{Φ(y)}(E) = f(e, y, E)`.
    ExplicitRecursion,
    /// Infected form written by `Φ(y)` is `Φ(y + 1)`.
    GenerationImage,
    /// Infected form is `Pad(v)`, computed by the Pad program.
    PadImage,
    /// `φ_{Pad(v)} = φ_{τ(v)}`, compared modulo padding of generation words.
    PaddedEquivalence,
}

/// One resolved single-class infection inside a forged virus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Part {
    pub class: Class,
    pub filter: Filter,
    pub condition: InfectionCondition,
    pub concat: Concat,
    pub t: Option<Word>,
}

impl Part {
    fn from_blueprint(bp: &Blueprint) -> Part {
        Part {
            class: bp.class,
            filter: bp.search.filter.clone(),
            condition: bp.condition.clone(),
            concat: bp.concat.unwrap_or_default(),
            t: bp.t.clone(),
        }
    }

    pub fn target_kind(&self) -> TargetKind {
        self.class.target_kind().expect("parts are single-class")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forged {
    pub class: Class,
    pub blueprint: Blueprint,
    /// The virus.
    pub v: Word,
    /// The class body whose fixed point `v` is.
    pub body: Word,
    /// Parts in execution order; one part except for multipartite viruses.
    pub parts: Vec<Part>,
    /// Outer condition of a multipartite virus.
    pub outer_condition: Option<InfectionCondition>,
    /// Program `e` of `Φ` for the generation counter.
    pub explicit_e: Option<Word>,
    pub transcript: Vec<TranscriptStep>,
    pub equations: Vec<EquationId>,
}

impl Forged {
    /// Meta-level `î(j)` of one part, for the word `actor` doing the
    /// infection (normally `v`).
    pub fn infected_form(&self, part: usize, actor: &[u8], j: &[u8]) -> Word {
        meta::image(&self.parts[part], &self.image_context(actor), j)
    }

    /// Meta-level result of running `actor` (normally `v`) on `env`.
    pub fn expected(&self, actor: &[u8], env: &Env) -> Env {
        let ctx = self.image_context(actor);
        if let Some(cond) = &self.outer_condition {
            if !meta::condition_holds(cond, None, &ctx, env) {
                return env.clone();
            }
        }
        self.parts
            .iter()
            .fold(env.clone(), |e, part| meta::apply_part(part, &ctx, &e))
    }

    /// `Φ(y)` for the generation counter.
    pub fn generation(&self, y: u64) -> Option<Word> {
        let e = self.explicit_e.as_ref()?;
        Some(explicit_instance(e, &Word::from_nat(y), &self.body))
    }

    /// Generation depth embedded in a word produced by this virus's `Φ`.
    pub fn depth_of(w: &[u8]) -> Option<u64> {
        let (_, y, _) = split_explicit(w)?;
        Word::from(y).to_u64()
    }

    fn image_context(&self, actor: &[u8]) -> meta::Ctx {
        let img = match self.class {
            Class::Polymorphic => Some(pad(actor)),
            Class::GenerationCounter => Forged::depth_of(actor)
                .and_then(|y| self.generation(y + 1)),
            _ => None,
        };
        meta::Ctx {
            actor: Word::from(actor),
            img,
        }
    }

    /// Same forged object with `v` replaced, e.g. by a stored artifact.
    pub fn with_v(mut self, v: Word) -> Forged {
        self.v = v;
        self
    }
}

/// Forges the virus described by `bp`.
pub fn forge(bp: &Blueprint) -> Result<Forged, BlueprintError> {
    bp.validate()?;
    match bp.class {
        Class::Overwriter => make_overwriter(bp),
        Class::EctoSymbiote => make_ecto_symbiote(bp),
        Class::Duplicator => make_duplicator(bp),
        Class::Document => make_document_virus(bp),
        Class::Source => make_source_virus(bp),
        Class::Companion => make_companion(bp),
        Class::Launcher => make_launcher(bp),
        Class::Multipartite => {
            let parts = bp.parts.as_ref().expect("validated");
            make_multipartite_with(bp, &parts[0], &parts[1])
        }
        Class::GenerationCounter => make_generation_counter(bp),
        Class::Polymorphic => make_polymorphic(bp),
    }
}

fn expect_class(bp: &Blueprint, class: Class) -> Result<(), BlueprintError> {
    bp.validate()?;
    if bp.class != class {
        return Err(BlueprintError::Invalid {
            class: bp.class,
            reason: format!("expected a {class} blueprint"),
        });
    }
    Ok(())
}

pub fn make_overwriter(bp: &Blueprint) -> Result<Forged, BlueprintError> {
    expect_class(bp, Class::Overwriter)?;
    kleene_virus(bp, vec![EquationId::Structure, EquationId::ImageIsVirus])
}

pub fn make_ecto_symbiote(bp: &Blueprint) -> Result<Forged, BlueprintError> {
    expect_class(bp, Class::EctoSymbiote)?;
    kleene_virus(bp, vec![EquationId::Structure, EquationId::EctoSequencing])
}

pub fn make_duplicator(bp: &Blueprint) -> Result<Forged, BlueprintError> {
    expect_class(bp, Class::Duplicator)?;
    kleene_virus(bp, vec![EquationId::Structure, EquationId::ImageIsVirus])
}

pub fn make_document_virus(bp: &Blueprint) -> Result<Forged, BlueprintError> {
    expect_class(bp, Class::Document)?;
    kleene_virus(bp, vec![EquationId::Structure, EquationId::DocumentRendering])
}

pub fn make_source_virus(bp: &Blueprint) -> Result<Forged, BlueprintError> {
    expect_class(bp, Class::Source)?;
    kleene_virus(bp, vec![EquationId::Structure, EquationId::SourceCompilation])
}

pub fn make_companion(bp: &Blueprint) -> Result<Forged, BlueprintError> {
    expect_class(bp, Class::Companion)?;
    let mut f = kleene_virus(bp, vec![EquationId::Structure, EquationId::CompanionRelocation])?;
    f.transcript.push(TranscriptStep::new("pi (locator)", locator()));
    Ok(f)
}

pub fn make_launcher(bp: &Blueprint) -> Result<Forged, BlueprintError> {
    expect_class(bp, Class::Launcher)?;
    let mut f = kleene_virus(bp, vec![EquationId::Structure, EquationId::LauncherStub])?;
    f.transcript.push(TranscriptStep::new("pi (locator)", locator()));
    f.transcript.push(TranscriptStep::new(
        "note: launcher equation inferred from the companion analogy",
        Word::empty(),
    ));
    Ok(f)
}

/// A multipartite virus running `data_part` then `program_part` in one pass.
pub fn make_multipartite(program_part: &Blueprint, data_part: &Blueprint) -> Result<Forged, BlueprintError> {
    let bp = Blueprint {
        parts: Some(vec![program_part.clone(), data_part.clone()]),
        ..Blueprint::standard(Class::Multipartite)
    };
    bp.validate()?;
    make_multipartite_with(&bp, program_part, data_part)
}

fn make_multipartite_with(
    bp: &Blueprint,
    program_part: &Blueprint,
    data_part: &Blueprint,
) -> Result<Forged, BlueprintError> {
    let parts = vec![Part::from_blueprint(data_part), Part::from_blueprint(program_part)];
    let inner = code!(
        "(let vx-env ",
        part_body(&parts[0]),
        " ",
        part_body(&parts[1]),
        ")"
    );
    let body = guarded(&bp.condition, None, &inner);
    let mut eqs = vec![EquationId::Structure];
    eqs.extend(part_equation(program_part.class));
    eqs.extend(part_equation(data_part.class));
    let mut f = fix_kleene(bp, kleene_prologue(&body), parts, eqs)?;
    f.outer_condition = Some(bp.condition.clone());
    Ok(f)
}

fn part_equation(class: Class) -> Option<EquationId> {
    match class {
        Class::Overwriter | Class::Duplicator => Some(EquationId::ImageIsVirus),
        Class::EctoSymbiote => Some(EquationId::EctoSequencing),
        Class::Document => Some(EquationId::DocumentRendering),
        Class::Source => Some(EquationId::SourceCompilation),
        Class::Companion => Some(EquationId::CompanionRelocation),
        Class::Launcher => Some(EquationId::LauncherStub),
        _ => None,
    }
}

pub fn make_generation_counter(bp: &Blueprint) -> Result<Forged, BlueprintError> {
    expect_class(bp, Class::GenerationCounter)?;
    let part = Part::from_blueprint(bp);
    let body = code!(
        "(let vx-e (nth in 0) (let vx-y (nth in 1) (let vx-env (nth in 2) ",
        part_body(&part),
        ")))"
    );
    parse(&body)?;
    let fp = explicit_fix(&body)?;
    let e = fp.word().clone();
    let v = explicit_instance(&e, &Word::from_nat(0), &body);
    let mut transcript = fp.transcript;
    transcript.push(TranscriptStep::new("v = Phi(0)", v.clone()));
    Ok(Forged {
        class: bp.class,
        blueprint: bp.clone(),
        v,
        body: Word::from(body),
        parts: vec![part],
        outer_condition: None,
        explicit_e: Some(e),
        transcript,
        equations: vec![
            EquationId::Structure,
            EquationId::ExplicitRecursion,
            EquationId::GenerationImage,
        ],
    })
}

pub fn make_polymorphic(bp: &Blueprint) -> Result<Forged, BlueprintError> {
    expect_class(bp, Class::Polymorphic)?;
    let mut f = kleene_virus(
        bp,
        vec![
            EquationId::Structure,
            EquationId::PadImage,
            EquationId::PaddedEquivalence,
        ],
    )?;
    f.transcript.push(TranscriptStep::new("code(Pad)", pad_program()));
    f.transcript.push(TranscriptStep::new("Pad(v)", pad(&f.v)));
    Ok(f)
}

fn kleene_virus(bp: &Blueprint, equations: Vec<EquationId>) -> Result<Forged, BlueprintError> {
    let part = Part::from_blueprint(bp);
    let body = kleene_prologue(&part_body(&part));
    fix_kleene(bp, body, vec![part], equations)
}

fn fix_kleene(
    bp: &Blueprint,
    body: Vec<u8>,
    parts: Vec<Part>,
    equations: Vec<EquationId>,
) -> Result<Forged, BlueprintError> {
    let fp = kleene_fix(&body)?;
    Ok(Forged {
        class: bp.class,
        blueprint: bp.clone(),
        v: fp.word().clone(),
        body: Word::from(body),
        parts,
        outer_condition: None,
        explicit_e: None,
        transcript: fp.transcript,
        equations,
    })
}

fn kleene_prologue(body: &[u8]) -> Vec<u8> {
    code!("(let vx-self (fst in) (let vx-env (snd in) ", body, "))")
}

/// Wraps `infect` (which sees `vx-d`, `vx-p`) in the condition test.
fn guarded(cond: &InfectionCondition, selection: Option<(&str, &[u8])>, infect: &[u8]) -> Vec<u8> {
    code!(
        "(let vx-d (fst vx-env) (let vx-p (snd vx-env) (if ",
        condition_expr(cond, selection),
        " ",
        infect,
        " vx-env)))"
    )
}

fn condition_expr(cond: &InfectionCondition, selection: Option<(&str, &[u8])>) -> Vec<u8> {
    match cond {
        InfectionCondition::Always => b"1".to_vec(),
        InfectionCondition::Never => code::FALSE.as_bytes().to_vec(),
        InfectionCondition::NonemptySelection => {
            let (files, filter) = selection.expect("selection-dependent condition needs a part");
            any(files, "vx-j", filter)
        }
        InfectionCondition::MinData(n) => not(format!("(lt (arity vx-d) {n})").as_bytes()),
        InfectionCondition::MinPrograms(n) => not(format!("(lt (arity vx-p) {n})").as_bytes()),
        InfectionCondition::HasDataPrefix(pfx) => {
            any("vx-d", "vx-k", &code!("(starts-with vx-k ", lit(pfx), ")"))
        }
    }
}

fn filter_expr(part: &Part) -> Vec<u8> {
    let user = match &part.filter {
        Filter::All => b"1".to_vec(),
        Filter::AllExceptInfected => not(&infected_expr(part.class)),
        Filter::Prefix(p) => code!("(starts-with vx-j ", lit(p), ")"),
    };
    match part.class {
        Class::Document => and(&code!("(starts-with vx-j ", lit(DOC_MARKER), ")"), &user),
        Class::Source => and(&code!("(starts-with vx-j ", lit(SRC_MARKER), ")"), &user),
        Class::Launcher => and(b"(not (eq vx-j vx-self))", &user),
        _ => user,
    }
}

fn infected_expr(class: Class) -> Vec<u8> {
    match class {
        Class::Overwriter | Class::Duplicator => b"(eq vx-j vx-self)".to_vec(),
        Class::EctoSymbiote => code::wrapped_by_self_expr(b"vx-j"),
        Class::Document => code!(
            "(let vx-s (fst (drop vx-j 4)) (if (eq vx-s vx-self) 1 ",
            code::wrapped_by_self_expr(b"vx-s"),
            "))"
        ),
        Class::Source => code::wrapped_by_self_expr(b"(drop vx-j 4)"),
        Class::Companion => code!(
            "(if ",
            code::is_companion_form_expr("vx-j"),
            " 1 ",
            code::is_relocated_expr(),
            ")"
        ),
        Class::Launcher => code::is_stub_expr("vx-j"),
        Class::Polymorphic => code::is_self_reproducing_expr("vx-j"),
        Class::GenerationCounter => code::is_generation_expr("vx-j"),
        Class::Multipartite => unreachable!("multipartite has no single target set"),
    }
}

fn action_expr(part: &Part) -> Vec<u8> {
    match part.class {
        Class::Overwriter => b"(replace vx-t vx-i vx-self)".to_vec(),
        Class::Duplicator => b"(add vx-t vx-self)".to_vec(),
        Class::EctoSymbiote => code!(
            "(replace vx-t vx-i ",
            code::ecto_wrap_expr(part.concat, "vx-self", b"vx-j"),
            ")"
        ),
        Class::Document => code!(
            "(replace vx-t vx-i (let vx-doc (drop vx-j 4) (let vx-s (fst vx-doc) (concat ",
            lit(DOC_MARKER),
            " (pair (if (not vx-s) vx-self ",
            code::ecto_wrap_expr(part.concat, "vx-self", b"vx-s"),
            ") (snd vx-doc))))))"
        ),
        Class::Source => code!(
            "(replace vx-t vx-i (concat ",
            lit(SRC_MARKER),
            " ",
            code::ecto_wrap_expr(part.concat, "vx-self", b"(drop vx-j 4)"),
            "))"
        ),
        Class::Companion => code!(
            "(add (replace vx-t vx-i ",
            code::companion_form_expr(),
            ") vx-j)"
        ),
        Class::Launcher => code!("(replace vx-t vx-i ", code::launcher_stub_expr(), ")"),
        Class::Polymorphic | Class::GenerationCounter => b"(replace vx-t vx-i vx-img)".to_vec(),
        Class::Multipartite => unreachable!(),
    }
}

/// Body of one part; expects `vx-env` (and `vx-self` or `vx-e`/`vx-y`)
/// to be bound.
fn part_body(part: &Part) -> Vec<u8> {
    let files = match part.target_kind() {
        TargetKind::Programs => "vx-p",
        TargetKind::Data => "vx-d",
    };
    let filter = filter_expr(part);
    let walked = code::walk(files, &filter, &action_expr(part));
    let mut infect = match (part.class, part.target_kind()) {
        (Class::Launcher, _) => code!(
            "(pair vx-d (let vx-p2 ",
            walked,
            " (if (eq vx-p2 vx-p) vx-p2 (if ",
            any("vx-p2", "vx-k", b"(eq vx-k vx-self)"),
            " vx-p2 (add vx-p2 vx-self)))))"
        ),
        (_, TargetKind::Programs) => code!("(pair vx-d ", walked, ")"),
        (_, TargetKind::Data) => code!("(pair ", walked, " vx-p)"),
    };
    let img = match part.class {
        Class::Polymorphic => Some(code!("(exec ", lit(&pad_program()), " vx-self)")),
        Class::GenerationCounter => Some(b"(exec vx-e (inc vx-y))".to_vec()),
        _ => None,
    };
    if let Some(img) = img {
        infect = code!("(let vx-img ", img, " ", infect, ")");
    }
    if let Some(t) = &part.t {
        let has_t = any("vx-p", "vx-k", &code!("(eq vx-k ", lit(t), ")"));
        infect = code!("(if ", has_t, " ", infect, " vx-env)");
    }
    guarded(&part.condition, Some((files, &filter)), &infect)
}

#[cfg(test)]
mod tests;
