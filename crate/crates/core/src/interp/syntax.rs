//! Surface syntax of the toy language.
//!
//! ```text
//! program := ws* expr ws*
//! expr    := literal | number | name | '(' ws* head (ws+ expr)* ws* ')'
//! literal := '\'' digits ':' <exactly `digits` raw bytes>
//! number  := digits                      ; a natural, stored as its bijective numeral
//! name    := [a-z] [a-z0-9-]*
//! ```
//!
//! Special forms: `(let x e body)`, `(if c t e)`, `(seq e…)`,
//! `(letrec f (x…) fbody body)`. Every other head is either a primitive
//! (fixed arity, checked here) or a call of a `letrec`-bound function
//! (resolved at run time). No byte outside this grammar is accepted, so the
//! data marker `#` can never appear in a program.

use std::fmt;
use std::rc::Rc;

use crate::codec::Word;

pub const DATA_MARKER: u8 = b'#';

pub type Name = Rc<str>;
pub type Node = Rc<Expr>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub position: usize,
    pub reason: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at byte {}: {}", self.position, self.reason)
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prim {
    Pair,
    Fst,
    Snd,
    Tuple,
    Arity,
    Nth,
    Replace,
    Add,
    Concat,
    Eq,
    Not,
    Quote,
    ReadLit,
    StartsWith,
    Drop,
    Take,
    Len,
    Inc,
    Dec,
    Lt,
    Digest,
    Exec,
    Nop,
}

impl Prim {
    const TABLE: &'static [(&'static str, Prim, Option<usize>)] = &[
        ("pair", Prim::Pair, Some(2)),
        ("fst", Prim::Fst, Some(1)),
        ("snd", Prim::Snd, Some(1)),
        ("tuple", Prim::Tuple, None),
        ("arity", Prim::Arity, Some(1)),
        ("nth", Prim::Nth, Some(2)),
        ("replace", Prim::Replace, Some(3)),
        ("add", Prim::Add, Some(2)),
        ("concat", Prim::Concat, None),
        ("eq", Prim::Eq, Some(2)),
        ("not", Prim::Not, Some(1)),
        ("quote", Prim::Quote, Some(1)),
        ("read-lit", Prim::ReadLit, Some(1)),
        ("starts-with", Prim::StartsWith, Some(2)),
        ("drop", Prim::Drop, Some(2)),
        ("take", Prim::Take, Some(2)),
        ("len", Prim::Len, Some(1)),
        ("inc", Prim::Inc, Some(1)),
        ("dec", Prim::Dec, Some(1)),
        ("lt", Prim::Lt, Some(2)),
        ("digest", Prim::Digest, Some(1)),
        ("exec", Prim::Exec, Some(2)),
        ("nop", Prim::Nop, Some(0)),
    ];

    fn lookup(name: &[u8]) -> Option<(Prim, Option<usize>)> {
        Self::TABLE
            .iter()
            .find(|(n, _, _)| n.as_bytes() == name)
            .map(|&(_, p, a)| (p, a))
    }

    pub fn name(self) -> &'static str {
        Self::TABLE.iter().find(|e| e.1 == self).map(|e| e.0).unwrap()
    }
}

const KEYWORDS: &[&str] = &["let", "if", "seq", "letrec"];

fn is_reserved(name: &[u8]) -> bool {
    KEYWORDS.iter().any(|k| k.as_bytes() == name) || Prim::lookup(name).is_some()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Lit(Rc<[u8]>),
    Var(Name),
    Let(Name, Node, Node),
    If(Node, Node, Node),
    Seq(Rc<[Node]>),
    Letrec {
        name: Name,
        params: Rc<[Name]>,
        body: Node,
        rest: Node,
    },
    Prim(Prim, Rc<[Node]>),
    Call(Name, Rc<[Node]>),
}

/// A word that parses under the toy grammar, together with its syntax tree.
#[derive(Debug, Clone)]
pub struct Program {
    source: Word,
    root: Node,
}

impl Program {
    pub fn source(&self) -> &Word {
        &self.source
    }

    pub fn into_source(self) -> Word {
        self.source
    }

    pub(crate) fn root(&self) -> &Node {
        &self.root
    }
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl Eq for Program {}

/// Literal syntax for an arbitrary word: `'<len>:<bytes>`.
pub fn lit(bytes: &[u8]) -> Vec<u8> {
    let mut out = format!("'{}:", bytes.len()).into_bytes();
    out.extend_from_slice(bytes);
    out
}

/// Reads one literal at the start of `w`; returns its content and the rest.
pub fn read_literal(w: &[u8]) -> Option<(&[u8], &[u8])> {
    let rest = w.strip_prefix(b"'")?;
    let colon = rest.iter().position(|&b| b == b':')?;
    let digits = &rest[..colon];
    if digits.is_empty() || digits.len() > 19 || (digits.len() > 1 && digits[0] == b'0') {
        return None;
    }
    if !digits.iter().all(u8::is_ascii_digit) {
        return None;
    }
    let len: usize = std::str::from_utf8(digits).ok()?.parse().ok()?;
    let body = &rest[colon + 1..];
    if body.len() < len {
        return None;
    }
    Some((&body[..len], &body[len..]))
}

pub fn parse(w: &[u8]) -> Result<Program, SyntaxError> {
    if w.first() == Some(&DATA_MARKER) {
        return Err(SyntaxError {
            position: 0,
            reason: "data marker: words starting with '#' are data, not programs".into(),
        });
    }
    let mut p = Parser { src: w, pos: 0 };
    p.skip_ws();
    if p.pos == w.len() {
        return Err(p.error("empty program"));
    }
    let root = p.expr()?;
    p.skip_ws();
    if p.pos != w.len() {
        return Err(p.error("trailing input after expression"));
    }
    Ok(Program {
        source: Word::from(w),
        root,
    })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn is_ws(b: u8) -> bool {
    matches!(b, b' ' | b'\n' | b'\t' | b'\r')
}

fn is_name_start(b: u8) -> bool {
    b.is_ascii_lowercase()
}

fn is_name_char(b: u8) -> bool {
    b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-'
}

impl<'a> Parser<'a> {
    fn error(&self, reason: impl Into<String>) -> SyntaxError {
        SyntaxError {
            position: self.pos,
            reason: reason.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(is_ws) {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> Result<Node, SyntaxError> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => self.list(),
            Some(b'\'') => {
                let (body, rest) = read_literal(&self.src[self.pos..])
                    .ok_or_else(|| self.error("malformed literal"))?;
                let node = Rc::new(Expr::Lit(Rc::from(body)));
                self.pos = self.src.len() - rest.len();
                Ok(node)
            }
            Some(b) if b.is_ascii_digit() => self.number(),
            Some(b) if is_name_start(b) => {
                let name = self.name()?;
                if is_reserved(name.as_bytes()) {
                    return Err(self.error(format!("reserved word `{name}` used as a value")));
                }
                Ok(Rc::new(Expr::Var(name)))
            }
            Some(b) => Err(self.error(format!("unexpected byte 0x{b:02x}"))),
        }
    }

    fn number(&mut self) -> Result<Node, SyntaxError> {
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits = &self.src[start..self.pos];
        if digits.len() > 1 && digits[0] == b'0' {
            return Err(self.error("leading zero in number"));
        }
        let n: u64 = std::str::from_utf8(digits)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.error("number out of range"))?;
        Ok(Rc::new(Expr::Lit(Rc::from(Word::from_nat(n).into_bytes()))))
    }

    fn name(&mut self) -> Result<Name, SyntaxError> {
        let start = self.pos;
        if !self.peek().is_some_and(is_name_start) {
            return Err(self.error("expected a name"));
        }
        while self.peek().is_some_and(is_name_char) {
            self.pos += 1;
        }
        // name bytes are ASCII by construction
        Ok(Rc::from(std::str::from_utf8(&self.src[start..self.pos]).unwrap()))
    }

    fn binder(&mut self) -> Result<Name, SyntaxError> {
        let name = self.name()?;
        if is_reserved(name.as_bytes()) {
            return Err(self.error(format!("cannot bind reserved word `{name}`")));
        }
        Ok(name)
    }

    /// Consumes mandatory whitespace before the next element of a list.
    fn sep(&mut self) -> Result<(), SyntaxError> {
        if !self.peek().is_some_and(is_ws) {
            return Err(self.error("expected whitespace"));
        }
        self.skip_ws();
        Ok(())
    }

    fn close(&mut self) -> Result<(), SyntaxError> {
        self.skip_ws();
        if self.peek() != Some(b')') {
            return Err(self.error("expected `)`"));
        }
        self.pos += 1;
        Ok(())
    }

    /// Remaining list elements up to the closing paren.
    fn rest_exprs(&mut self) -> Result<Vec<Node>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            let save = self.pos;
            self.skip_ws();
            if self.peek() == Some(b')') {
                self.pos += 1;
                return Ok(out);
            }
            self.pos = save;
            self.sep()?;
            out.push(self.expr()?);
        }
    }

    fn list(&mut self) -> Result<Node, SyntaxError> {
        self.pos += 1; // '('
        self.skip_ws();
        let head_pos = self.pos;
        let head = self.name()?;
        let node = match head.as_ref() {
            "let" => {
                self.sep()?;
                let name = self.binder()?;
                self.sep()?;
                let value = self.expr()?;
                self.sep()?;
                let body = self.expr()?;
                self.close()?;
                Expr::Let(name, value, body)
            }
            "if" => {
                self.sep()?;
                let c = self.expr()?;
                self.sep()?;
                let t = self.expr()?;
                self.sep()?;
                let e = self.expr()?;
                self.close()?;
                Expr::If(c, t, e)
            }
            "seq" => {
                let items = self.rest_exprs()?;
                if items.is_empty() {
                    return Err(self.error("`seq` needs at least one expression"));
                }
                Expr::Seq(items.into())
            }
            "letrec" => {
                self.sep()?;
                let name = self.binder()?;
                self.sep()?;
                if self.peek() != Some(b'(') {
                    return Err(self.error("expected parameter list"));
                }
                self.pos += 1;
                let mut params = Vec::new();
                loop {
                    self.skip_ws();
                    if self.peek() == Some(b')') {
                        self.pos += 1;
                        break;
                    }
                    if !params.is_empty() && !self.src[self.pos - 1].is_ascii_whitespace() {
                        return Err(self.error("expected whitespace"));
                    }
                    params.push(self.binder()?);
                }
                self.sep()?;
                let body = self.expr()?;
                self.sep()?;
                let rest = self.expr()?;
                self.close()?;
                Expr::Letrec {
                    name,
                    params: params.into(),
                    body,
                    rest,
                }
            }
            _ => {
                let args = self.rest_exprs()?;
                match Prim::lookup(head.as_bytes()) {
                    Some((_, Some(n))) if n != args.len() => {
                        return Err(SyntaxError {
                            position: head_pos,
                            reason: format!(
                                "`{head}` takes {n} argument(s), got {}",
                                args.len()
                            ),
                        })
                    }
                    Some((prim, _)) => Expr::Prim(prim, args.into()),
                    None => Expr::Call(head, args.into()),
                }
            }
        };
        Ok(Rc::new(node))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(src: &str) -> Program {
        parse(src.as_bytes()).unwrap_or_else(|e| panic!("{src:?}: {e}"))
    }

    fn err(src: &[u8]) -> SyntaxError {
        parse(src).expect_err("should not parse")
    }

    #[test]
    fn accepts_basic_forms() {
        ok("in");
        ok("  (fst in)\n");
        ok("(let x '3:abc (concat x in))");
        ok("(if (eq in 0) 1 (seq (nop) in))");
        ok("(letrec f (a b) (f b a) (f in in))");
        ok("(tuple)");
        ok("(g in)");
        ok("'0:");
    }

    #[test]
    fn literal_bytes_are_raw() {
        let p = ok("'4:()'\"");
        assert_eq!(*p.root().as_ref(), Expr::Lit(Rc::from(&b"()'\""[..])));
        let quoted = lit(b"#\x00)");
        assert_eq!(read_literal(&quoted), Some((&b"#\x00)"[..], &b""[..])));
    }

    #[test]
    fn rejects_data_marker_and_empty() {
        assert!(err(b"#hello").reason.contains("data marker"));
        assert!(err(b"").reason.contains("empty"));
        assert!(err(b"   ").reason.contains("empty"));
        assert!(parse(b"(fst #x)").is_err());
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "(fst in",
            "(fst in))",
            "(fst)",
            "(pair in)",
            "(let pair 1 in)",
            "(let x 1)",
            "'5:abc",
            "'01:a",
            "007",
            "(seq)",
            "(FST in)",
            "(fst in) in",
            "let",
            "(fst(in))",
        ] {
            assert!(parse(bad.as_bytes()).is_err(), "{bad:?} parsed");
        }
    }

    #[test]
    fn error_positions() {
        let e = err(b"(fst in");
        assert_eq!(e.position, 7);
    }
}
