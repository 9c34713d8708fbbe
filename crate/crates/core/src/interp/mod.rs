//! The toy language and its fuel-metered universal interpreter.
//!
//! `interp(x, input, fuel)` is the concrete `φ_x(input)`: a word that does not
//! parse denotes the everywhere-undefined function, runtime faults are
//! undefinedness, and running out of fuel is reported separately so that
//! callers can treat it as "no answer yet" rather than as a result.

mod machine;
pub mod sample;
pub mod syntax;

use serde::{Deserialize, Serialize};

use crate::codec::Word;
pub use syntax::{lit, parse, read_literal, Program, SyntaxError, DATA_MARKER};

/// Step budget for one evaluation, shared by every nested `exec`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fuel(pub u64);

impl Fuel {
    pub const DEFAULT: Fuel = Fuel(10_000_000);
}

impl From<u64> for Fuel {
    fn from(n: u64) -> Self {
        Fuel(n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum EvalOutcome {
    Value(Word),
    Undefined(String),
    OutOfFuel(u64),
}

impl EvalOutcome {
    pub fn value(&self) -> Option<&Word> {
        match self {
            EvalOutcome::Value(w) => Some(w),
            _ => None,
        }
    }

    pub fn into_value(self) -> Option<Word> {
        match self {
            EvalOutcome::Value(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_out_of_fuel(&self) -> bool {
        matches!(self, EvalOutcome::OutOfFuel(_))
    }
}

/// Runs a parsed program.
pub fn run(program: &Program, input: &[u8], fuel: Fuel) -> EvalOutcome {
    machine::Machine::new(fuel.0).run(program, input)
}

/// `φ_x(input)` under a step budget.
pub fn interp(x: &[u8], input: &[u8], fuel: Fuel) -> EvalOutcome {
    match parse(x) {
        Ok(p) => run(&p, input, fuel),
        Err(e) => EvalOutcome::Undefined(e.to_string()),
    }
}

pub(crate) const SMN_OPEN: &str = "(let in (pair ";
pub(crate) const SMN_MID: &str = " in) ";
pub(crate) const SMN_CLOSE: &str = ")";

/// Hardcodes `c` as the first component of `p`'s input:
/// `φ_{smn(p,c)}(x) = φ_p(⟨c, x⟩)`.
///
/// Purely syntactic. The result parses exactly when `p` parses, so a
/// non-program `p` yields a word denoting the everywhere-undefined function.
pub fn smn(p: &[u8], c: &[u8]) -> Word {
    let mut out = SMN_OPEN.as_bytes().to_vec();
    out.extend(lit(c));
    out.extend_from_slice(SMN_MID.as_bytes());
    out.extend_from_slice(p);
    out.extend_from_slice(SMN_CLOSE.as_bytes());
    Word::from(out)
}

/// Splits a word of the form `smn(p, c)` back into `(p, c)`.
pub fn split_smn(w: &[u8]) -> Option<(&[u8], &[u8])> {
    let rest = w.strip_prefix(SMN_OPEN.as_bytes())?;
    let (c, rest) = read_literal(rest)?;
    let p = rest
        .strip_prefix(SMN_MID.as_bytes())?
        .strip_suffix(SMN_CLOSE.as_bytes())?;
    Some((p, c))
}

/// Source-level expression that computes `smn(p, c)` at run time, given
/// expressions for `p` and `c`.
pub fn smn_expr(p: &str, c: &str) -> String {
    format!(
        "(concat {} (quote {c}) {} {p} {})",
        lit_str(SMN_OPEN),
        lit_str(SMN_MID),
        lit_str(SMN_CLOSE)
    )
}

/// Literal syntax for a UTF-8 string, as a `String`.
pub(crate) fn lit_str(s: &str) -> String {
    format!("'{}:{s}", s.len())
}

/// Reference programs used throughout the laboratory.
pub mod programs {
    use crate::codec::Word;

    /// Identity: returns its input unchanged.
    pub const P_ID: &str = "in";
    /// Deletes every file: returns the empty environment.
    pub const P_DEL: &str = "(pair (tuple) (tuple))";
    /// Never halts.
    pub const P_LOOP: &str = "(letrec loop (x) (loop x) (loop in))";
    /// `(x, y) ↦ x`
    pub const PROJ1: &str = "(fst in)";
    /// `(x, y) ↦ y`
    pub const PROJ2: &str = "(snd in)";
    /// Returns its whole pair input.
    pub const PAIR_ID: &str = "in";

    /// `i`-th component of a tuple input.
    pub fn tuple_proj(i: usize) -> String {
        format!("(nth in {i})")
    }

    pub fn word(src: &str) -> Word {
        Word::from(src)
    }
}

#[cfg(test)]
mod tests {
    use super::programs::*;
    use super::*;
    use crate::codec::{encode_tuple, pair};

    const F: Fuel = Fuel(100_000);

    fn val(s: &str) -> EvalOutcome {
        EvalOutcome::Value(Word::from(s))
    }

    #[test]
    fn identity_and_data() {
        assert_eq!(interp(P_ID.as_bytes(), b"hello", Fuel(10)), val("hello"));
        assert!(matches!(
            interp(b"#data", b"x", F),
            EvalOutcome::Undefined(_)
        ));
    }

    #[test]
    fn infinite_loop_exhausts_exact_budget() {
        assert_eq!(
            interp(P_LOOP.as_bytes(), b"w", Fuel(10_000)),
            EvalOutcome::OutOfFuel(10_000)
        );
    }

    #[test]
    fn primitives() {
        let cases: &[(&str, &[u8], Word)] = &[
            ("(concat '1:a in '1:c)", b"b", Word::from("abc")),
            ("(eq in '1:x)", b"x", Word::from_nat(1)),
            ("(eq in '1:x)", b"y", Word::empty()),
            ("(if (not in) '1:e '1:n)", b"", Word::from("e")),
            ("(quote in)", b"ab", Word::from("'2:ab")),
            ("(starts-with in '2:ab)", b"abc", Word::from_nat(1)),
            ("(drop in 2)", b"abcd", Word::from("cd")),
            ("(take in 9)", b"abcd", Word::from("abcd")),
            ("(len in)", b"abcd", Word::from_nat(4)),
            ("(inc 255)", b"", Word::from_nat(256)),
            ("(dec 3)", b"", Word::from_nat(2)),
            ("(lt 2 10)", b"", Word::from_nat(1)),
            ("(nop)", b"zz", Word::empty()),
            ("(seq (nop) '1:a '1:b)", b"", Word::from("b")),
            ("(arity (tuple 1 2 3))", b"", Word::from_nat(3)),
            ("(nth (tuple '1:a '1:b) 1)", b"", Word::from("b")),
            ("(read-lit in)", b"'2:hixyz", pair(b"hi", b"xyz")),
        ];
        for (src, input, want) in cases {
            assert_eq!(
                interp(src.as_bytes(), input, F),
                EvalOutcome::Value(want.clone()),
                "{src}"
            );
        }
        let t = interp(b"(add (replace (tuple 1 2) 0 '1:z) '1:q)", b"", F);
        let want = encode_tuple(&[Word::from("z"), Word::from_nat(2), Word::from("q")]);
        assert_eq!(t, EvalOutcome::Value(want));
        let d = interp(b"(len (digest in))", b"abc", F);
        assert_eq!(d, EvalOutcome::Value(Word::from_nat(32)));
    }

    #[test]
    fn runtime_faults_are_undefined() {
        for src in [
            "(nth (tuple) 0)",
            "nope",
            "(f in)",
            "(dec 0)",
            "(read-lit '2:xy)",
            "(exec '5:#data in)",
            "(letrec f (a) a (f 1 2))",
            "(nth (pair 0 in) 0)",
        ] {
            let out = interp(src.as_bytes(), b"zz", F);
            assert!(matches!(out, EvalOutcome::Undefined(_)), "{src}: {out:?}");
        }
    }

    #[test]
    fn recursion_and_closures() {
        // reverse a word one byte at a time
        let src = "(letrec rev (w acc) (if (eq w '0:) acc (rev (drop w 1) (concat (take w 1) acc))) (rev in '0:))";
        assert_eq!(interp(src.as_bytes(), b"abcdef", F), val("fedcba"));
        let deep = "(letrec down (n) (if (eq n 0) '4:done (concat (down (dec n)) '0:)) (down in))";
        let out = interp(deep.as_bytes(), &Word::from_nat(20_000), Fuel(1_000_000));
        assert_eq!(out, val("done"));
    }

    #[test]
    fn exec_is_universal_and_shares_fuel() {
        let q = "(concat in in)";
        let caller = format!("(exec {} in)", String::from_utf8(lit(q.as_bytes())).unwrap());
        assert_eq!(interp(caller.as_bytes(), b"ab", F), val("abab"));
        let looping = format!("(exec {} in)", String::from_utf8(lit(P_LOOP.as_bytes())).unwrap());
        assert_eq!(
            interp(looping.as_bytes(), b"", Fuel(500)),
            EvalOutcome::OutOfFuel(500)
        );
    }

    #[test]
    fn smn_examples() {
        let a = smn(PROJ1.as_bytes(), b"A");
        for x in ["", "x", "long input"] {
            assert_eq!(interp(&a, x.as_bytes(), F), val("A"));
        }
        let whole = smn(PAIR_ID.as_bytes(), b"c");
        assert_eq!(
            interp(&whole, b"x", F),
            EvalOutcome::Value(pair(b"c", b"x"))
        );
        let bad = smn(b"(fst", b"c");
        assert!(parse(&bad).is_err());
        assert!(matches!(interp(&bad, b"x", F), EvalOutcome::Undefined(_)));
        assert_eq!(split_smn(&a), Some((PROJ1.as_bytes(), &b"A"[..])));
    }

    #[test]
    fn smn_expr_matches_meta_smn() {
        let src = smn_expr("(fst in)", "(snd in)");
        let out = interp(src.as_bytes(), &pair(b"(concat in in)", b"\x00'#"), F);
        assert_eq!(out, EvalOutcome::Value(smn(b"(concat in in)", b"\x00'#")));
    }
}
