//! Virtual system environments and the two ways of running a program in one.
//!
//! A *free* program (one that is not yet a file of the environment) receives
//! the whole encoded environment. A *member* program receives the
//! environment with itself removed.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::codec::{decode_tuple_bytes, encode_tuple, pair, unpair_bytes, CodecError, Word};
use crate::interp::{interp, EvalOutcome, Fuel, DATA_MARKER};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnvError {
    #[error("data file {index} does not start with the data marker")]
    UnmarkedData { index: usize },
    #[error("not an environment: {0}")]
    Malformed(String),
    #[error("program index {index} out of range for {count} programs")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("delta does not apply: {0}")]
    BadDelta(String),
}

impl From<CodecError> for EnvError {
    fn from(e: CodecError) -> Self {
        EnvError::Malformed(e.to_string())
    }
}

/// Ordered data files plus ordered program files.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawEnv")]
pub struct Env {
    pub data: Vec<Word>,
    pub programs: Vec<Word>,
}

#[derive(Deserialize)]
struct RawEnv {
    data: Vec<Word>,
    programs: Vec<Word>,
}

impl TryFrom<RawEnv> for Env {
    type Error = EnvError;

    fn try_from(raw: RawEnv) -> Result<Self, Self::Error> {
        Env::new(raw.data, raw.programs)
    }
}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Env")
            .field("data", &self.data)
            .field("programs", &self.programs)
            .finish()
    }
}

impl Env {
    pub fn new(data: Vec<Word>, programs: Vec<Word>) -> Result<Self, EnvError> {
        if let Some(index) = data.iter().position(|d| d.first() != Some(&DATA_MARKER)) {
            return Err(EnvError::UnmarkedData { index });
        }
        Ok(Env { data, programs })
    }

    /// The empty environment `()`.
    pub fn empty() -> Self {
        Env::default()
    }

    pub fn encode(&self) -> Word {
        pair(&encode_tuple(&self.data), &encode_tuple(&self.programs))
    }

    pub fn decode(w: &[u8]) -> Result<Self, EnvError> {
        let (d, p) = unpair_bytes(w);
        let data = decode_tuple_bytes(&d)?.into_iter().map(Word::from).collect();
        let programs = decode_tuple_bytes(&p)?.into_iter().map(Word::from).collect();
        Env::new(data, programs)
    }

    /// The environment seen by program `i` when it runs as a member.
    pub fn without_program(&self, i: usize) -> Result<Env, EnvError> {
        if i >= self.programs.len() {
            return Err(EnvError::IndexOutOfRange {
                index: i,
                count: self.programs.len(),
            });
        }
        let mut rest = self.clone();
        rest.programs.remove(i);
        Ok(rest)
    }

    pub fn len(&self) -> usize {
        self.data.len() + self.programs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, slot: Slot) -> Option<&Word> {
        self.files(slot.kind).get(slot.index)
    }

    fn files(&self, kind: SlotKind) -> &Vec<Word> {
        match kind {
            SlotKind::Data => &self.data,
            SlotKind::Program => &self.programs,
        }
    }

    fn files_mut(&mut self, kind: SlotKind) -> &mut Vec<Word> {
        match kind {
            SlotKind::Data => &mut self.data,
            SlotKind::Program => &mut self.programs,
        }
    }
}

/// Result of running a program against an environment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum EnvOutcome {
    Env(Env),
    Undefined(String),
    OutOfFuel(u64),
    /// The program halted but its output is not an environment.
    MalformedEnvResult(Word),
}

impl EnvOutcome {
    pub fn env(&self) -> Option<&Env> {
        match self {
            EnvOutcome::Env(e) => Some(e),
            _ => None,
        }
    }

    pub fn into_env(self) -> Option<Env> {
        match self {
            EnvOutcome::Env(e) => Some(e),
            _ => None,
        }
    }

    pub fn is_out_of_fuel(&self) -> bool {
        matches!(self, EnvOutcome::OutOfFuel(_))
    }

    pub fn from_eval(out: EvalOutcome) -> Self {
        match out {
            EvalOutcome::Value(w) => match Env::decode(&w) {
                Ok(env) => EnvOutcome::Env(env),
                Err(_) => EnvOutcome::MalformedEnvResult(w),
            },
            EvalOutcome::Undefined(r) => EnvOutcome::Undefined(r),
            EvalOutcome::OutOfFuel(n) => EnvOutcome::OutOfFuel(n),
        }
    }
}

/// Runs a free program on the whole environment.
pub fn run_external(v: &[u8], env: &Env, fuel: Fuel) -> EnvOutcome {
    EnvOutcome::from_eval(interp(v, &env.encode(), fuel))
}

/// Runs `programs[i]` on the rest of the environment.
pub fn run_member(env: &Env, i: usize, fuel: Fuel) -> Result<EnvOutcome, EnvError> {
    let rest = env.without_program(i)?;
    Ok(run_external(&env.programs[i], &rest, fuel))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    Data,
    Program,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub kind: SlotKind,
    pub index: usize,
}

impl Slot {
    pub fn data(index: usize) -> Self {
        Slot {
            kind: SlotKind::Data,
            index,
        }
    }

    pub fn program(index: usize) -> Self {
        Slot {
            kind: SlotKind::Program,
            index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replaced {
    pub slot: Slot,
    pub before: Word,
    pub after: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Added {
    pub slot: Slot,
    pub word: Word,
}

/// Positional difference between two environments.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvDelta {
    pub replaced: Vec<Replaced>,
    pub added: Vec<Added>,
    pub removed: Vec<Slot>,
}

impl EnvDelta {
    pub fn is_empty(&self) -> bool {
        self.replaced.is_empty() && self.added.is_empty() && self.removed.is_empty()
    }

    /// Slots whose content is new in the after-environment.
    pub fn touched(&self) -> impl Iterator<Item = (Slot, &Word)> {
        self.replaced
            .iter()
            .map(|r| (r.slot, &r.after))
            .chain(self.added.iter().map(|a| (a.slot, &a.word)))
    }
}

pub fn diff(before: &Env, after: &Env) -> EnvDelta {
    let mut delta = EnvDelta::default();
    for kind in [SlotKind::Data, SlotKind::Program] {
        let (b, a) = (before.files(kind), after.files(kind));
        for (index, (x, y)) in b.iter().zip(a).enumerate() {
            if x != y {
                delta.replaced.push(Replaced {
                    slot: Slot { kind, index },
                    before: x.clone(),
                    after: y.clone(),
                });
            }
        }
        for (index, w) in a.iter().enumerate().skip(b.len()) {
            delta.added.push(Added {
                slot: Slot { kind, index },
                word: w.clone(),
            });
        }
        delta
            .removed
            .extend((a.len()..b.len()).map(|index| Slot { kind, index }));
    }
    delta
}

/// Replays a delta on the environment it was computed from.
pub fn apply(before: &Env, delta: &EnvDelta) -> Result<Env, EnvError> {
    let mut env = before.clone();
    for r in &delta.replaced {
        let file = env
            .files_mut(r.slot.kind)
            .get_mut(r.slot.index)
            .ok_or_else(|| EnvError::BadDelta(format!("no slot {:?}", r.slot)))?;
        if *file != r.before {
            return Err(EnvError::BadDelta(format!("slot {:?} differs", r.slot)));
        }
        *file = r.after.clone();
    }
    for kind in [SlotKind::Data, SlotKind::Program] {
        let mut removed: Vec<usize> = delta
            .removed
            .iter()
            .filter(|s| s.kind == kind)
            .map(|s| s.index)
            .collect();
        removed.sort_unstable();
        let files = env.files_mut(kind);
        if let Some(&first) = removed.first() {
            if removed != (first..files.len()).collect::<Vec<_>>() {
                return Err(EnvError::BadDelta("removed slots are not a suffix".into()));
            }
            files.truncate(first);
        }
        for a in delta.added.iter().filter(|a| a.slot.kind == kind) {
            if a.slot.index != files.len() {
                return Err(EnvError::BadDelta(format!("gap before {:?}", a.slot)));
            }
            files.push(a.word.clone());
        }
    }
    Env::new(env.data, env.programs)
}

/// One line of a run trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLine {
    pub step: usize,
    pub actor: Word,
    pub delta: EnvDelta,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::programs::*;
    use proptest::prelude::*;

    const F: Fuel = Fuel(1_000_000);

    fn env(data: &[&str], programs: &[&str]) -> Env {
        Env::new(
            data.iter().map(|&d| Word::from(d)).collect(),
            programs.iter().map(|&p| Word::from(p)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn data_must_be_marked() {
        assert_eq!(
            Env::new(vec![Word::from("x")], vec![]),
            Err(EnvError::UnmarkedData { index: 0 })
        );
        let json = r#"{"data":["78"],"programs":[]}"#;
        assert!(serde_json::from_str::<Env>(json).is_err());
        let json = r#"{"data":["2378"],"programs":["696e"]}"#;
        assert_eq!(serde_json::from_str::<Env>(json).unwrap(), env(&["#x"], &["in"]));
    }

    #[test]
    fn external_runs() {
        let e = env(&["#a", "#b"], &["in", "(fst in)"]);
        assert_eq!(run_external(P_ID.as_bytes(), &e, F), EnvOutcome::Env(e.clone()));
        assert_eq!(run_external(P_DEL.as_bytes(), &e, F), EnvOutcome::Env(Env::empty()));
        assert!(matches!(
            run_external(b"#data", &e, F),
            EnvOutcome::Undefined(_)
        ));
        assert!(matches!(
            run_external(b"'1:z", &e, F),
            EnvOutcome::MalformedEnvResult(_)
        ));
    }

    #[test]
    fn member_runs_exclude_self() {
        let e = env(&["#d"], &[P_ID]);
        assert_eq!(run_member(&e, 0, F), Ok(EnvOutcome::Env(env(&["#d"], &[]))));
        assert_eq!(
            run_member(&e, 1, F),
            Err(EnvError::IndexOutOfRange { index: 1, count: 1 })
        );
    }

    #[test]
    fn diff_positions() {
        let a = env(&["#d"], &["p1", "p2"]);
        assert!(diff(&a, &a).is_empty());
        let b = env(&["#d"], &["v", "p2", "p1"]);
        let d = diff(&a, &b);
        assert_eq!(d.replaced.len(), 1);
        assert_eq!(d.replaced[0].slot, Slot::program(0));
        assert_eq!(d.added, vec![Added { slot: Slot::program(2), word: Word::from("p1") }]);
        assert_eq!(apply(&a, &d), Ok(b.clone()));
        let back = diff(&b, &a);
        assert_eq!(back.removed, vec![Slot::program(2)]);
        assert_eq!(apply(&b, &back), Ok(a));
    }

    fn arb_env() -> impl Strategy<Value = Env> {
        let data = prop::collection::vec(
            prop::collection::vec(any::<u8>(), 0..12).prop_map(|mut v| {
                v.insert(0, b'#');
                Word::from(v)
            }),
            0..=4,
        );
        let programs = prop::collection::vec(
            prop::collection::vec(any::<u8>(), 0..12).prop_map(Word::from),
            0..=4,
        );
        (data, programs).prop_map(|(d, p)| Env::new(d, p).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn encode_roundtrip(e in arb_env()) {
            prop_assert_eq!(Env::decode(&e.encode()), Ok(e));
        }

        #[test]
        fn diff_apply_roundtrip(a in arb_env(), b in arb_env()) {
            prop_assert_eq!(apply(&a, &diff(&a, &b)), Ok(b));
        }

        #[test]
        fn identity_is_bit_exact(e in arb_env()) {
            prop_assert_eq!(run_external(P_ID.as_bytes(), &e, F), EnvOutcome::Env(e));
        }
    }
}
