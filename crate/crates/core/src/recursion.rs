//! Constructive fixed points of program transformers.
//!
//! [`kleene_fix`] builds, for any program `f`, a program `e` with
//! `φ_e(x) = φ_f(⟨e, x⟩)`. The construction never writes `e` inside itself;
//! instead `e = smn(g, g)` where `g` rebuilds `smn(y, y)` from its own first
//! argument at run time and hands it to `f`:
//!
//! ```text
//! g(y, x) = f(smn(y, y), x)        e = smn(g, g)
//! φ_e(x) = φ_g(⟨g, x⟩) = f(smn(g, g), x) = f(e, x)
//! ```
//!
//! [`double_fix`] nests that construction to obtain a mutually referring
//! pair, and [`explicit_fix`] fixes a program `e` that emits specialised
//! programs `Φ(y)` carrying both `e` and `y` as constants.

use serde::{Deserialize, Serialize};

use crate::codec::Word;
use crate::interp::{self, lit, lit_str, parse, read_literal, smn, smn_expr, Program, SyntaxError};

/// One stage of a fixed-point derivation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptStep {
    pub label: String,
    pub word: Word,
}

impl TranscriptStep {
    pub fn new(label: impl Into<String>, word: impl Into<Word>) -> Self {
        TranscriptStep {
            label: label.into(),
            word: word.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedPoint {
    pub e: Program,
    pub transcript: Vec<TranscriptStep>,
}

impl FixedPoint {
    pub fn word(&self) -> &Word {
        self.e.source()
    }
}

const G_OPEN: &str = "(seq (exec ";

fn g_close() -> String {
    format!(" (pair {} (snd in))))", smn_expr("(fst in)", "(fst in)"))
}

/// The self-rebuilding program `g` for `code_f`.
pub fn kleene_g(code_f: &[u8]) -> Word {
    let mut out = G_OPEN.as_bytes().to_vec();
    out.extend(lit(code_f));
    out.extend(g_close().into_bytes());
    Word::from(out)
}

/// Source expression computing `kleene_fix(c).e` at run time from an
/// expression `c` that evaluates to the code of `f`.
pub fn kleene_fix_expr(c: &str) -> String {
    format!(
        "(let vx-g (concat {} (quote {c}) {}) {})",
        lit_str(G_OPEN),
        lit_str(&g_close()),
        smn_expr("vx-g", "vx-g")
    )
}

/// `e` with `φ_e(x) ≃ φ_f(⟨e, x⟩)` for every `x`.
pub fn kleene_fix(code_f: &[u8]) -> Result<FixedPoint, SyntaxError> {
    parse(code_f)?;
    let g = kleene_g(code_f);
    let e = smn(&g, &g);
    let program = parse(&e).expect("fixed point of a program parses");
    Ok(FixedPoint {
        e: program,
        transcript: vec![
            TranscriptStep::new("f", code_f),
            TranscriptStep::new("g = (y, x) -> f(smn(y, y), x)", g),
            TranscriptStep::new("e = smn(g, g)", e),
        ],
    })
}

/// Recovers `g` from a word produced by [`kleene_fix`].
pub fn split_kleene(e: &[u8]) -> Option<&[u8]> {
    let (p, c) = interp::split_smn(e)?;
    (p == c).then_some(p)
}

/// Recovers `f` from a word produced by [`kleene_fix`].
pub fn kleene_body(e: &[u8]) -> Option<&[u8]> {
    let g = split_kleene(e)?;
    let rest = g.strip_prefix(G_OPEN.as_bytes())?;
    let (f, rest) = read_literal(rest)?;
    (rest == g_close().as_bytes()).then_some(f)
}

fn second_g_open(code_g: &[u8]) -> String {
    format!(
        "(exec {} (tuple ",
        String::from_utf8_lossy(&lit(code_g))
    )
}

const SECOND_G_CLOSE: &str = " (fst in) (snd in)))";

/// `(e₂, x) ↦ g(e₁, e₂, x)` for a fixed `e₁`.
fn second_program(code_g: &[u8], e1: &[u8]) -> Word {
    let mut out = b"(exec ".to_vec();
    out.extend(lit(code_g));
    out.extend_from_slice(b" (tuple ");
    out.extend(lit(e1));
    out.extend_from_slice(SECOND_G_CLOSE.as_bytes());
    Word::from(out)
}

/// `e₁, e₂` with `φ_{e₁}(x) ≃ f(e₁, e₂, x)` and `φ_{e₂}(x) ≃ g(e₁, e₂, x)`,
/// where `f` and `g` read their argument as a 3-tuple.
pub fn double_fix(code_f: &[u8], code_g: &[u8]) -> Result<(FixedPoint, FixedPoint), SyntaxError> {
    parse(code_f)?;
    parse(code_g)?;
    // e₂ as a computable function of e₁: kleene_fix((e₂, x) ↦ g(e₁, e₂, x))
    let open = second_g_open(code_g);
    let g_of_e1 = format!(
        "(concat {} (quote vx-e1) {})",
        lit_str(&open),
        lit_str(SECOND_G_CLOSE)
    );
    let f_prime = format!(
        "(let vx-e1 (fst in) (exec {} (tuple vx-e1 {} (snd in))))",
        String::from_utf8_lossy(&lit(code_f)),
        kleene_fix_expr(&g_of_e1)
    );
    // code_f / code_g may hold arbitrary bytes; splice them raw.
    let f_prime = splice_raw(&f_prime, code_f, code_g);
    let first = kleene_fix(&f_prime)?;
    let second_src = second_program(code_g, first.word());
    let mut second = kleene_fix(&second_src)?;
    let mut transcript = vec![TranscriptStep::new("f' = (e1, x) -> f(e1, E2(e1), x)", f_prime)];
    transcript.extend(first.transcript);
    second
        .transcript
        .insert(0, TranscriptStep::new("e1", first.e.source().clone()));
    Ok((
        FixedPoint {
            e: first.e,
            transcript,
        },
        second,
    ))
}

/// Rebuilds a source template where `lit(code_f)` / `lit(code_g)` were
/// formatted lossily, substituting the exact bytes.
fn splice_raw(template: &str, code_f: &[u8], code_g: &[u8]) -> Word {
    let lossy_f = String::from_utf8_lossy(&lit(code_f)).into_owned();
    let lossy_g = String::from_utf8_lossy(&lit(code_g)).into_owned();
    if lossy_f.as_bytes() == lit(code_f) && lossy_g.as_bytes() == lit(code_g) {
        return Word::from(template);
    }
    let bytes = template.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i..].starts_with(lossy_f.as_bytes()) {
            out.extend(lit(code_f));
            i += lossy_f.len();
        } else if bytes[i..].starts_with(lossy_g.as_bytes()) {
            out.extend(lit(code_g));
            i += lossy_g.len();
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    Word::from(out)
}

pub(crate) const PHI_OPEN: &str = "(let in (tuple ";
const PHI_MID: &str = " in) ";
const PHI_CLOSE: &str = ")";

/// `Φ(y)` for the explicit fixed point `e` of `code_f`: a program computing
/// `x ↦ f(e, y, x)`.
pub fn explicit_instance(e: &[u8], y: &[u8], code_f: &[u8]) -> Word {
    let mut out = PHI_OPEN.as_bytes().to_vec();
    out.extend(lit(e));
    out.push(b' ');
    out.extend(lit(y));
    out.extend_from_slice(PHI_MID.as_bytes());
    out.extend_from_slice(code_f);
    out.extend_from_slice(PHI_CLOSE.as_bytes());
    Word::from(out)
}

/// Splits `Φ(y)` into `(e, y, f)`.
pub fn split_explicit(w: &[u8]) -> Option<(&[u8], &[u8], &[u8])> {
    let rest = w.strip_prefix(PHI_OPEN.as_bytes())?;
    let (e, rest) = read_literal(rest)?;
    let (y, rest) = read_literal(rest.strip_prefix(b" ")?)?;
    let f = rest
        .strip_prefix(PHI_MID.as_bytes())?
        .strip_suffix(PHI_CLOSE.as_bytes())?;
    Some((e, y, f))
}

/// The program `(e', y) ↦ Φ_{e'}(y)` whose Kleene fixed point is `e`.
pub fn explicit_builder(code_f: &[u8]) -> Word {
    let mut out = format!(
        "(concat {} (quote (fst in)) '1:  (quote (snd in)) {} ",
        lit_str(PHI_OPEN),
        lit_str(PHI_MID)
    )
    .into_bytes();
    out.extend(lit(code_f));
    out.push(b' ');
    out.extend(lit_str(PHI_CLOSE).into_bytes());
    out.push(b')');
    Word::from(out)
}

/// `e` with `φ_e(y) = Φ(y)` and `φ_{Φ(y)}(x) ≃ f(e, y, x)`; `f` reads its
/// argument as the 3-tuple `(e, y, x)`.
pub fn explicit_fix(code_f: &[u8]) -> Result<FixedPoint, SyntaxError> {
    parse(code_f)?;
    let builder = explicit_builder(code_f);
    let mut fp = kleene_fix(&builder)?;
    fp.transcript.insert(0, TranscriptStep::new("f (explicit)", code_f));
    Ok(fp)
}
