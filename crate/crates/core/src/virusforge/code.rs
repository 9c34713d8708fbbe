//! Toy-language fragments shared by the forged viruses, and the word-level
//! shapes of their infected forms.
//!
//! Every fragment is built as raw bytes: hosts, prefixes and digests are
//! arbitrary words and end up inside literals.

use sha2::{Digest, Sha256};

use crate::codec::Word;
use crate::interp::{lit, read_literal, smn, split_smn, SMN_OPEN};
use crate::recursion::PHI_OPEN;

macro_rules! code {
    ($($part:expr),* $(,)?) => {{
        let mut out: Vec<u8> = Vec::new();
        $( out.extend_from_slice(AsRef::<[u8]>::as_ref(&$part)); )*
        out
    }};
}
pub(crate) use code;

pub(crate) fn lit_of(s: &str) -> Vec<u8> {
    lit(s.as_bytes())
}

pub const DOC_MARKER: &[u8] = b"#DOC";
pub const SRC_MARKER: &[u8] = b"#SRC";

pub(crate) const FALSE: &str = "'0:";
/// Evaluates to a runtime fault.
pub(crate) const FAULT: &str = "(nth (tuple) 0)";

pub(crate) fn and(a: &[u8], b: &[u8]) -> Vec<u8> {
    code!("(if ", a, " ", b, " ", FALSE, ")")
}

pub(crate) fn not(a: &[u8]) -> Vec<u8> {
    code!("(not ", a, ")")
}

/// Truthy iff some item of the tuple variable `files` satisfies `pred`, with
/// the item bound to `var`.
pub(crate) fn any(files: &str, var: &str, pred: &[u8]) -> Vec<u8> {
    let f = format!("{var}-any");
    let i = format!("{var}-i");
    let n = format!("{var}-n");
    code!(
        format!("(letrec {f} ({i} {n}) (if (lt {i} {n}) (let {var} (nth {files} {i}) (if "),
        pred,
        format!(" 1 ({f} (inc {i}) {n}))) {FALSE}) ({f} 0 (arity {files})))")
    )
}

/// Walks the tuple variable `files` and folds `action` over the items that
/// satisfy `filter`. Inside both, `vx-j` is the current item, `vx-i` its
/// index and `vx-t` the tuple built so far.
pub(crate) fn walk(files: &str, filter: &[u8], action: &[u8]) -> Vec<u8> {
    code!(
        "(letrec vx-walk (vx-t vx-i vx-n) (if (lt vx-i vx-n) (let vx-j (nth ",
        files,
        " vx-i) (vx-walk (if ",
        filter,
        " ",
        action,
        " vx-t) (inc vx-i) vx-n)) vx-t) (vx-walk ",
        files,
        " 0 (arity ",
        files,
        ")))"
    )
}

/// Order in which an ecto-symbiote's infected form runs virus and host.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Concat {
    #[default]
    VirusFirst,
    HostFirst,
}

const WRAP_VIR: &str = "(let vx-vir ";
const WRAP_HOST: &str = " (let vx-host ";
const TAIL_VIRUS_FIRST: &str = " (exec vx-host (exec vx-vir in))))";
const TAIL_HOST_FIRST: &str = " (exec vx-vir (exec vx-host in))))";

fn wrap_tail(order: Concat) -> &'static str {
    match order {
        Concat::VirusFirst => TAIL_VIRUS_FIRST,
        Concat::HostFirst => TAIL_HOST_FIRST,
    }
}

/// `δ(v, j)`: a program running `v` and `j` in sequence.
pub fn ecto_wrap(order: Concat, v: &[u8], j: &[u8]) -> Word {
    Word::from(code!(WRAP_VIR, lit(v), WRAP_HOST, lit(j), wrap_tail(order)))
}

/// Inverse of [`ecto_wrap`]: `(order, v, j)`.
pub fn split_ecto(w: &[u8]) -> Option<(Concat, &[u8], &[u8])> {
    let (v, rest) = read_literal(w.strip_prefix(WRAP_VIR.as_bytes())?)?;
    let (j, rest) = read_literal(rest.strip_prefix(WRAP_HOST.as_bytes())?)?;
    [Concat::VirusFirst, Concat::HostFirst]
        .into_iter()
        .find(|&o| rest == wrap_tail(o).as_bytes())
        .map(|o| (o, v, j))
}

pub(crate) fn ecto_wrap_expr(order: Concat, v: &str, j: &[u8]) -> Vec<u8> {
    code!(
        "(concat ",
        lit_of(WRAP_VIR),
        format!(" (quote {v}) "),
        lit_of(WRAP_HOST),
        " (quote ",
        j,
        ") ",
        lit_of(wrap_tail(order)),
        ")"
    )
}

/// Prefix shared by every word wrapped around `v`.
pub fn wrapped_prefix(v: &[u8]) -> Vec<u8> {
    code!(WRAP_VIR, lit(v))
}

pub(crate) fn wrapped_by_self_expr(w: &[u8]) -> Vec<u8> {
    code!(
        "(starts-with ",
        w,
        " (concat ",
        lit_of(WRAP_VIR),
        " (quote vx-self)))"
    )
}

/// Document files: `#DOC ++ ⟨script, body⟩`.
pub fn document(script: &[u8], body: &[u8]) -> Word {
    Word::from(code!(DOC_MARKER, crate::codec::pair(script, body)))
}

pub fn split_document(w: &[u8]) -> Option<(Word, Word)> {
    let rest = w.strip_prefix(DOC_MARKER)?;
    Some(crate::codec::unpair(rest))
}

/// Source files: `#SRC ++ program`.
pub fn source_file(program: &[u8]) -> Word {
    Word::from(code!(SRC_MARKER, program))
}

/// Maps `⟨doc, env⟩` to `⟨body, env'⟩` where `env'` is the result of
/// running the document's script on `env` (or `env` itself for an empty
/// script). Faults on anything that is not a document.
pub fn standard_renderer() -> Word {
    Word::from(code!(
        "(if (starts-with (fst in) ",
        lit(DOC_MARKER),
        ") (let vx-doc (drop (fst in) 4) (let vx-s (fst vx-doc) (pair (snd vx-doc) (if (not vx-s) (snd in) (exec vx-s (snd in)))))) ",
        FAULT,
        ")"
    ))
}

/// Compiles a source file by stripping its marker.
pub fn standard_compiler() -> Word {
    Word::from(code!(
        "(if (starts-with in ",
        lit(SRC_MARKER),
        ") (drop in 4) ",
        FAULT,
        ")"
    ))
}

/// `π`: given `⟨h, env⟩`, the first program of `env` whose digest is `h`.
pub fn locator() -> Word {
    Word::from(code!(
        "(let vx-h (fst in) (let vx-p (snd (snd in)) (letrec vx-find (vx-i vx-n) (if (lt vx-i vx-n) (let vx-j (nth vx-p vx-i) (if (eq (digest vx-j) vx-h) vx-j (vx-find (inc vx-i) vx-n))) ",
        FAULT,
        ") (vx-find 0 (arity vx-p)))))"
    ))
}

pub fn digest(w: &[u8]) -> Word {
    Word::from(Sha256::digest(w).to_vec())
}

pub(crate) const LOC_OPEN: &str = "(let vx-loc ";
const LOC_MID: &str = " (let vx-env2 (exec ";

fn loc_tail() -> Vec<u8> {
    code!(
        " in) (exec (exec ",
        lit(&locator()),
        " (pair vx-loc vx-env2)) vx-env2)))"
    )
}

/// Companion infected form `δ(π, h, v)` with `h` the digest of the host.
pub fn companion_form(v: &[u8], j: &[u8]) -> Word {
    Word::from(code!(LOC_OPEN, lit(&digest(j)), LOC_MID, lit(v), loc_tail()))
}

/// `(h, v)` embedded in a companion form.
pub fn split_companion(w: &[u8]) -> Option<(&[u8], &[u8])> {
    let (h, rest) = read_literal(w.strip_prefix(LOC_OPEN.as_bytes())?)?;
    let (v, rest) = read_literal(rest.strip_prefix(LOC_MID.as_bytes())?)?;
    (rest == loc_tail()).then_some((h, v))
}

pub(crate) fn companion_form_expr() -> Vec<u8> {
    code!(
        "(concat ",
        lit_of(LOC_OPEN),
        " (quote (digest vx-j)) ",
        lit_of(LOC_MID),
        " (quote vx-self) ",
        lit(&loc_tail()),
        ")"
    )
}

pub(crate) fn is_companion_form_expr(w: &str) -> Vec<u8> {
    code!("(starts-with ", w, " ", lit_of(LOC_OPEN), ")")
}

/// Truthy iff `vx-j` is the relocated original of some companion form in
/// `vx-p`.
pub(crate) fn is_relocated_expr() -> Vec<u8> {
    let pred = code!(
        "(starts-with vx-k (concat ",
        lit_of(LOC_OPEN),
        " (quote (digest vx-j))))"
    );
    any("vx-p", "vx-k", &pred)
}

pub(crate) const STUB_OPEN: &str = "(let vx-stub ";

fn stub_mid() -> Vec<u8> {
    code!(" (let vx-env2 (exec (exec ", lit(&locator()), " (pair ")
}

const STUB_TAIL: &str = " in)) in) (exec vx-stub vx-env2)))";

/// Launcher stub around host `j`; it finds `v` by digest at run time.
pub fn launcher_stub(v: &[u8], j: &[u8]) -> Word {
    Word::from(code!(STUB_OPEN, lit(j), stub_mid(), lit(&digest(v)), STUB_TAIL))
}

/// `(j, digest of v)` embedded in a launcher stub.
pub fn split_stub(w: &[u8]) -> Option<(&[u8], &[u8])> {
    let (j, rest) = read_literal(w.strip_prefix(STUB_OPEN.as_bytes())?)?;
    let (h, rest) = read_literal(rest.strip_prefix(stub_mid().as_slice())?)?;
    (rest == STUB_TAIL.as_bytes()).then_some((j, h))
}

pub(crate) fn launcher_stub_expr() -> Vec<u8> {
    code!(
        "(concat ",
        lit_of(STUB_OPEN),
        " (quote vx-j) ",
        lit(&stub_mid()),
        " (quote (digest vx-self)) ",
        lit_of(STUB_TAIL),
        ")"
    )
}

pub(crate) fn is_stub_expr(w: &str) -> Vec<u8> {
    code!("(starts-with ", w, " ", lit_of(STUB_OPEN), ")")
}

const SEQ: &str = "(seq ";
const NOP: &str = "(nop) ";

/// `τ`: inserts one no-op at the head of a program's top-level sequence.
/// On a self-reproducing word `smn(g, g)` the no-op goes into `g`, so the
/// result reproduces itself in padded form.
pub fn pad(w: &[u8]) -> Word {
    if let Some((g, c)) = split_smn(w) {
        if g == c {
            if let Some(rest) = g.strip_prefix(SEQ.as_bytes()) {
                let g2 = code!(SEQ, NOP, rest);
                return smn(&g2, &g2);
            }
        }
    }
    match w.strip_prefix(SEQ.as_bytes()) {
        Some(rest) => Word::from(code!(SEQ, NOP, rest)),
        None => Word::from(code!(SEQ, NOP, w, ")")),
    }
}

/// Removes every no-op inserted by [`pad`] into a self-reproducing word.
pub fn strip_padding(w: &[u8]) -> Word {
    if let Some((g, c)) = split_smn(w) {
        if g == c {
            if let Some(mut rest) = g.strip_prefix(SEQ.as_bytes()) {
                while let Some(r) = rest.strip_prefix(NOP.as_bytes()) {
                    rest = r;
                }
                let g2 = code!(SEQ, rest);
                return smn(&g2, &g2);
            }
        }
    }
    Word::from(w)
}

/// The toy-language program for [`pad`].
pub fn pad_program() -> Word {
    let generic = code!(
        "(if (starts-with in ",
        lit_of(SEQ),
        ") (concat ",
        lit(format!("{SEQ}{NOP}").as_bytes()),
        format!(" (drop in {})) (concat ", SEQ.len()),
        lit(format!("{SEQ}{NOP}").as_bytes()),
        " in '1:)))"
    );
    Word::from(code!(
        "(if (starts-with in ",
        lit_of(SMN_OPEN),
        format!(") (let vx-rl (read-lit (drop in {})) ", SMN_OPEN.len()),
        "(if (if (starts-with (fst vx-rl) ",
        lit_of(SEQ),
        ") (eq (snd vx-rl) (concat ",
        lit_of(crate::interp::SMN_MID),
        " (fst vx-rl) ",
        lit_of(crate::interp::SMN_CLOSE),
        ")) '0:) ",
        "(let vx-g2 (concat ",
        lit(format!("{SEQ}{NOP}").as_bytes()),
        format!(" (drop (fst vx-rl) {})) ", SEQ.len()),
        crate::interp::smn_expr("vx-g2", "vx-g2"),
        ") ",
        generic,
        ")) ",
        generic,
        ")"
    ))
}

pub(crate) fn is_self_reproducing_expr(w: &str) -> Vec<u8> {
    code!("(starts-with ", w, " ", lit_of(SMN_OPEN), ")")
}

pub(crate) fn is_generation_expr(w: &str) -> Vec<u8> {
    code!("(starts-with ", w, " ", lit_of(PHI_OPEN), ")")
}
