use super::*;
use crate::envmodel::{diff, run_external, run_member, EnvOutcome};
use crate::interp::programs::*;
use crate::interp::{interp, Fuel};

const F: Fuel = Fuel::DEFAULT;

fn w(s: &str) -> Word {
    Word::from(s)
}

fn host(tag: &str) -> Word {
    // total, non-identity, longer than 16 bytes
    w(&format!("(pair (add (fst in) '{}:#{tag}) (snd in))", tag.len() + 1))
}

fn env(data: Vec<Word>, programs: Vec<Word>) -> Env {
    Env::new(data, programs).unwrap()
}

fn ran(v: &[u8], e: &Env) -> Env {
    match run_external(v, e, F) {
        EnvOutcome::Env(e) => e,
        other => panic!("virus run failed: {other:?}"),
    }
}

fn forged(class: Class) -> Forged {
    forge(&Blueprint::standard(class)).unwrap()
}

#[test]
fn every_standard_blueprint_forges_a_program() {
    for class in Class::ALL {
        let f = forged(class);
        parse(&f.v).unwrap();
        assert_ne!(f.v.first(), Some(&b'#'));
        assert_eq!(forged(class).v, f.v, "{class} not deterministic");
        assert!(!f.equations.is_empty());
    }
}

#[test]
fn overwriter() {
    let f = forged(Class::Overwriter);
    let e = env(vec![w("#d1")], vec![host("a"), host("b"), host("c")]);
    let out = ran(&f.v, &e);
    assert_eq!(out, env(vec![w("#d1")], vec![f.v.clone(), f.v.clone(), f.v.clone()]));
    let empty = env(vec![w("#d1")], vec![]);
    assert_eq!(ran(&f.v, &empty), empty);
    let bp = Blueprint {
        condition: InfectionCondition::MinData(2),
        ..Blueprint::standard(Class::Overwriter)
    };
    let guarded = forge(&bp).unwrap();
    assert_eq!(ran(&guarded.v, &e), e);
}

#[test]
fn toy_bodies_agree_with_meta_semantics() {
    let doc = document(b"", b"hello");
    let doc2 = document(P_ID.as_bytes(), b"scripted");
    let src = source_file(host("s").as_bytes());
    let envs = [
        env(vec![], vec![]),
        env(vec![w("#plain")], vec![host("a")]),
        env(
            vec![doc.clone(), src.clone()],
            vec![standard_renderer(), standard_compiler(), host("b")],
        ),
        env(vec![doc2, w("#x")], vec![host("c"), standard_renderer()]),
    ];
    for class in Class::ALL {
        let f = forged(class);
        for e in &envs {
            assert_eq!(ran(&f.v, e), f.expected(&f.v, e), "{class} on {e:?}");
        }
    }
}

#[test]
fn filters_and_conditions_agree_with_meta() {
    let mk = |class, filter, condition| Blueprint {
        search: SearchSpec { target: None, filter },
        condition,
        ..Blueprint::standard(class)
    };
    let e = env(vec![w("#ab"), document(b"", b"x")], vec![host("a"), w("(snd in)"), standard_renderer()]);
    let cases = [
        mk(Class::Overwriter, Filter::Prefix(w("(snd")), InfectionCondition::Always),
        mk(Class::EctoSymbiote, Filter::AllExceptInfected, InfectionCondition::NonemptySelection),
        mk(Class::Duplicator, Filter::AllExceptInfected, InfectionCondition::MinPrograms(3)),
        mk(Class::Duplicator, Filter::All, InfectionCondition::MinPrograms(4)),
        mk(Class::Companion, Filter::AllExceptInfected, InfectionCondition::HasDataPrefix(w("#a"))),
        mk(Class::Launcher, Filter::AllExceptInfected, InfectionCondition::Never),
        mk(Class::Document, Filter::AllExceptInfected, InfectionCondition::NonemptySelection),
    ];
    for bp in cases {
        let f = forge(&bp).unwrap();
        let once = ran(&f.v, &e);
        assert_eq!(once, f.expected(&f.v, &e), "{bp:?}");
        let twice = ran(&f.v, &once);
        assert_eq!(twice, f.expected(&f.v, &once), "{bp:?} second round");
    }
}

#[test]
fn ecto_symbiote_sequencing() {
    let f = forged(Class::EctoSymbiote);
    let j = host("h");
    let e = env(vec![w("#d")], vec![j.clone(), host("k")]);
    let img = f.infected_form(0, &f.v, &j);
    assert_eq!(split_ecto(&img), Some((Concat::VirusFirst, f.v.as_bytes(), j.as_bytes())));
    let lhs = interp(&img, &e.encode(), F);
    let rhs = interp(&j, &ran(&f.v, &e).encode(), F);
    assert_eq!(lhs, rhs);
    assert!(lhs.value().is_some());
}

#[test]
fn duplicator_appends_copies() {
    let f = forged(Class::Duplicator);
    let e = env(vec![w("#d")], vec![host("a")]);
    assert_eq!(ran(&f.v, &e), env(vec![w("#d")], vec![host("a"), f.v.clone()]));
    let two = env(vec![], vec![host("a"), host("b")]);
    let d = diff(&two, &ran(&f.v, &two));
    assert_eq!(d.added.len(), 2);
    assert!(d.added.iter().all(|a| a.word == f.v) && d.replaced.is_empty());
}

#[test]
fn document_virus() {
    let f = forged(Class::Document);
    let t = standard_renderer();
    let doc = document(b"", b"body");
    let e = env(vec![doc.clone()], vec![t.clone(), host("a")]);
    let out = ran(&f.v, &e);
    let (script, body) = split_document(&out.data[0]).unwrap();
    assert_eq!((script, body), (f.v.clone(), w("body")));
    let no_t = env(vec![doc.clone()], vec![host("a")]);
    assert_eq!(ran(&f.v, &no_t), no_t);
    // rendering equation
    let inf = f.infected_form(0, &f.v, &doc);
    let lhs = interp(&t, &crate::codec::pair(&inf, &e.encode()), F);
    let rhs = interp(&t, &crate::codec::pair(&doc, &out.encode()), F);
    assert_eq!(lhs, rhs);
}

#[test]
fn source_virus() {
    let f = forged(Class::Source);
    let t = standard_compiler();
    let j = host("src");
    let s = source_file(&j);
    assert_eq!(interp(&t, &s, F).into_value(), Some(j.clone()));
    let e = env(vec![s.clone()], vec![t.clone()]);
    let out = ran(&f.v, &e);
    let compiled = interp(&t, &out.data[0], F).into_value().unwrap();
    let lhs = interp(&compiled, &e.encode(), F);
    let rhs = interp(&j, &out.encode(), F);
    assert_eq!(lhs, rhs);
    let no_t = env(vec![s], vec![]);
    assert_eq!(ran(&f.v, &no_t), no_t);
}

#[test]
fn companion() {
    let f = forged(Class::Companion);
    let j = host("companion-host");
    let e = env(vec![w("#d")], vec![j.clone()]);
    let post = ran(&f.v, &e);
    assert_eq!(post.programs.len(), 2);
    assert_eq!(post.programs[1], j);
    let img = &post.programs[0];
    assert!(!img.contains_subword(&j));
    let lhs = run_member(&post, 0, F).unwrap();
    let rest = post.without_program(0).unwrap();
    let rhs = EnvOutcome::from_eval(interp(&j, &ran(&f.v, &rest).encode(), F));
    assert_eq!(lhs, rhs);
    assert!(lhs.env().is_some());
    // without the relocated copy the infected form is undefined
    let stripped = env(vec![w("#d")], vec![img.clone()]);
    assert!(matches!(run_member(&stripped, 0, F).unwrap(), EnvOutcome::Undefined(_)));
    // relocated originals are not re-infected
    assert_eq!(ran(&f.v, &post).programs.len(), 2);
}

#[test]
fn launcher() {
    let f = forged(Class::Launcher);
    let j = host("launched");
    let e = env(vec![], vec![j.clone(), host("other")]);
    let post = ran(&f.v, &e);
    assert_eq!(post.programs.len(), 3);
    assert_eq!(post.programs[2], f.v);
    let stub = &post.programs[0];
    assert!(stub.len() - j.len() < f.v.len());
    let lhs = run_member(&post, 0, F).unwrap();
    let rest = post.without_program(0).unwrap();
    let rhs = EnvOutcome::from_eval(interp(&j, &ran(&f.v, &rest).encode(), F));
    assert_eq!(lhs, rhs);
    assert!(lhs.env().is_some());
    assert_eq!(ran(&f.v, &post), post);
}

#[test]
fn multipartite() {
    let f = forged(Class::Multipartite);
    let doc = document(b"", b"x");
    let e = env(vec![doc.clone()], vec![standard_renderer(), host("a")]);
    let d = diff(&e, &ran(&f.v, &e));
    assert!(d.replaced.iter().any(|r| r.slot.kind == crate::envmodel::SlotKind::Data));
    assert!(d.replaced.iter().any(|r| r.slot.kind == crate::envmodel::SlotKind::Program));
    let progs = env(vec![], vec![host("a"), host("b")]);
    let ecto = forged(Class::EctoSymbiote);
    let out = ran(&f.v, &progs);
    assert_eq!(out.programs[0], ecto_wrap(Concat::VirusFirst, &f.v, &host("a")));
    assert_eq!(diff(&progs, &out).replaced.len(), diff(&progs, &ran(&ecto.v, &progs)).replaced.len());
    let neither = env(vec![w("#z")], vec![]);
    assert_eq!(ran(&f.v, &neither), neither);
}

#[test]
fn generation_counter() {
    let f = forged(Class::GenerationCounter);
    let e = env(vec![], vec![host("a")]);
    for y in 0..4 {
        let g = f.generation(y).unwrap();
        assert_eq!(Forged::depth_of(&g), Some(y));
        let out = ran(&g, &e);
        assert_eq!(out.programs[0], f.generation(y + 1).unwrap());
        let e_word = f.explicit_e.as_ref().unwrap();
        assert_eq!(interp(e_word, &Word::from_nat(y + 1), F).into_value(), Some(out.programs[0].clone()));
    }
    let none = env(vec![w("#d")], vec![]);
    assert_eq!(ran(&f.v, &none), none);
}

#[test]
fn polymorphic_generations() {
    let f = forged(Class::Polymorphic);
    let mut gens = vec![f.v.clone()];
    let mut e = env(vec![w("#d")], vec![host("a"), host("b")]);
    for _ in 0..4 {
        let actor = gens.last().unwrap().clone();
        e = ran(&actor, &e);
        assert_eq!(e.programs[0], pad(&actor));
        assert_eq!(e.programs[0].len(), actor.len() + 12);
        gens.push(e.programs[0].clone());
    }
    for (i, a) in gens.iter().enumerate() {
        for b in &gens[i + 1..] {
            assert_ne!(a, b);
            assert_eq!(strip_padding(a), strip_padding(b));
        }
    }
}

#[test]
fn blueprint_validation() {
    let mut bp = Blueprint::standard(Class::Document);
    bp.t = None;
    assert!(matches!(forge(&bp), Err(BlueprintError::Missing { field: "t", .. })));
    let mut bp = Blueprint::standard(Class::Overwriter);
    bp.tau = Some(Transformer::NopInsert);
    assert!(matches!(forge(&bp), Err(BlueprintError::Unexpected { field: "tau", .. })));
    let mut bp = Blueprint::standard(Class::Source);
    bp.t = Some(w("#not a program"));
    assert!(matches!(forge(&bp), Err(BlueprintError::Syntax(_))));
    let mut bp = Blueprint::standard(Class::Multipartite);
    bp.parts = Some(vec![Blueprint::standard(Class::Document)]);
    assert!(forge(&bp).is_err());
    let json = r#"{"class":"overwriter","search":{"filter":{"prefix":"2873"}},"condition":{"min_programs":1}}"#;
    let bp: Blueprint = serde_json::from_str(json).unwrap();
    assert_eq!(bp.search.filter, Filter::Prefix(w("(s")));
    forge(&bp).unwrap();
    assert!(serde_json::from_str::<Blueprint>(r#"{"class":"overwriter","bogus":1}"#).is_err());
    let round: Blueprint =
        serde_json::from_str(&serde_json::to_string(&Blueprint::standard(Class::Multipartite)).unwrap()).unwrap();
    assert_eq!(round, Blueprint::standard(Class::Multipartite));
}
