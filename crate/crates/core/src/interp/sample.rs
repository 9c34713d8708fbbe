//! Seeded random programs and inputs for property checks.
//!
//! Every generated program parses. Many of them fault or loop, which is the
//! point: the invariants must hold for partial programs too.

use rand::Rng;

use super::syntax::lit;
use crate::codec::Word;

const UNARY: &[&str] = &[
    "fst", "snd", "arity", "not", "len", "inc", "dec", "quote", "read-lit", "digest",
];
const BINARY: &[&str] = &[
    "pair", "nth", "add", "eq", "starts-with", "drop", "take", "lt", "concat", "exec",
];

/// Random bytes of length below `max_len`, any byte value allowed.
pub fn random_word<R: Rng>(rng: &mut R, max_len: usize) -> Word {
    let n = rng.gen_range(0..max_len.max(1));
    Word::from((0..n).map(|_| rng.gen::<u8>()).collect::<Vec<u8>>())
}

/// A random input: a raw word, a pair or a small tuple.
pub fn random_input<R: Rng>(rng: &mut R) -> Word {
    match rng.gen_range(0..3) {
        0 => random_word(rng, 8),
        1 => crate::codec::pair(&random_word(rng, 6), &random_word(rng, 6)),
        _ => {
            let items: Vec<Word> = (0..rng.gen_range(0..4)).map(|_| random_word(rng, 5)).collect();
            crate::codec::encode_tuple(&items)
        }
    }
}

/// A random syntactically valid program of nesting depth at most `depth`.
pub fn random_program<R: Rng>(rng: &mut R, depth: u32) -> Word {
    let mut g = Gen { rng, fresh: 0 };
    Word::from(g.expr(depth, &mut Vec::new(), None).0)
}

struct Gen<'a, R> {
    rng: &'a mut R,
    fresh: usize,
}

/// Program text kept as raw bytes, since literals may hold any byte.
struct Src(Vec<u8>);

macro_rules! src {
    ($($part:expr),* $(,)?) => {{
        let mut v: Vec<u8> = Vec::new();
        $( v.extend_from_slice(AsRef::<[u8]>::as_ref(&$part)); )*
        Src(v)
    }};
}

impl AsRef<[u8]> for Src {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl<R: Rng> Gen<'_, R> {
    fn leaf(&mut self, vars: &[String]) -> Src {
        match self.rng.gen_range(0..4) {
            0 => src!("in"),
            1 if !vars.is_empty() => {
                let i = self.rng.gen_range(0..vars.len());
                src!(vars[i])
            }
            2 => src!(self.rng.gen_range(0u8..6).to_string()),
            _ => {
                let w = random_word(self.rng, 6);
                Src(lit(&w))
            }
        }
    }

    fn expr(&mut self, depth: u32, vars: &mut Vec<String>, rec: Option<&str>) -> Src {
        if depth == 0 || self.rng.gen_ratio(1, 4) {
            return self.leaf(vars);
        }
        let d = depth - 1;
        match self.rng.gen_range(0..11) {
            0..=2 => {
                let op = UNARY[self.rng.gen_range(0..UNARY.len())];
                let a = self.expr(d, vars, rec);
                src!("(", op, " ", a, ")")
            }
            3..=5 => {
                let op = BINARY[self.rng.gen_range(0..BINARY.len())];
                let a = self.expr(d, vars, rec);
                let b = self.expr(d, vars, rec);
                src!("(", op, " ", a, " ", b, ")")
            }
            6 => {
                let mut out = src!("(tuple");
                for _ in 0..self.rng.gen_range(0..3) {
                    let a = self.expr(d, vars, rec);
                    out = src!(out, " ", a);
                }
                src!(out, ")")
            }
            7 => {
                let c = self.expr(d, vars, rec);
                let t = self.expr(d, vars, rec);
                let e = self.expr(d, vars, rec);
                src!("(if ", c, " ", t, " ", e, ")")
            }
            8 => {
                let name = self.fresh_name("x");
                let value = self.expr(d, vars, rec);
                vars.push(name.clone());
                let body = self.expr(d, vars, rec);
                vars.pop();
                src!("(let ", name, " ", value, " ", body, ")")
            }
            9 => match rec {
                Some(f) => {
                    let a = self.expr(d, vars, rec);
                    src!("(", f, " ", a, ")")
                }
                None => {
                    let a = self.expr(d, vars, rec);
                    let b = self.expr(d, vars, rec);
                    src!("(seq ", a, " ", b, ")")
                }
            },
            _ => {
                let f = self.fresh_name("f");
                let param = self.fresh_name("a");
                let mut inner = vec![param.clone()];
                let body = self.expr(d, &mut inner, Some(&f));
                let arg = self.expr(d, vars, rec);
                src!("(letrec ", f, " (", param, ") ", body, " (", f, " ", arg, "))")
            }
        }
    }

    fn fresh_name(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }
}
