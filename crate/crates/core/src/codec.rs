//! Words, the bijective word/natural bridge, Cantor pairing and tuple encoding.
//!
//! Every byte string is a [`Word`]. Words are put in bijection with the
//! naturals through bijective base-256 numerals (digits `1..=256`), which makes
//! the empty word `0`, the one-byte words `1..=256`, and so on. Pairing is the
//! Cantor pairing function applied to those naturals, so [`pair`] is a total
//! bijection `D × D → D` and [`unpair`] is its total inverse.
//!
//! Tuples carry their arity in-band: `⟨x₁,…,xₙ⟩ = pair(nat(n), x₁ ⊕ (x₂ ⊕ … xₙ))`
//! where `⊕` is [`pair`] folded to the right.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;

use dashu_int::ops::SquareRoot;
use dashu_int::UBig;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Upper bound on the arity a tuple header may announce.
pub const MAX_ARITY: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("malformed tuple: {0}")]
    MalformedTuple(String),
    #[error("index {index} out of range for tuple of arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
    #[error("invalid hex word: {0}")]
    Hex(String),
}

/// A finite byte string: an element of the word domain.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<u8>);

impl Word {
    pub const fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        Word(bytes.into())
    }

    /// The word whose bijective numeral is `n`.
    pub fn from_nat(n: u64) -> Self {
        nat_to_word(&UBig::from(n))
    }

    /// The natural denoted by this word, if it fits in a `u64`.
    pub fn to_u64(&self) -> Option<u64> {
        u64::try_from(&word_to_nat(self)).ok()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, CodecError> {
        hex::decode(s.trim())
            .map(Word)
            .map_err(|e| CodecError::Hex(e.to_string()))
    }

    pub fn starts_with(&self, prefix: &[u8]) -> bool {
        self.0.starts_with(prefix)
    }

    /// True when `needle` occurs as a contiguous run of bytes in this word.
    pub fn contains_subword(&self, needle: &[u8]) -> bool {
        needle.is_empty() || self.0.windows(needle.len()).any(|w| w == needle)
    }
}

impl Deref for Word {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl AsRef<[u8]> for Word {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl From<Vec<u8>> for Word {
    fn from(v: Vec<u8>) -> Self {
        Word(v)
    }
}

impl From<&[u8]> for Word {
    fn from(v: &[u8]) -> Self {
        Word(v.to_vec())
    }
}

impl<const N: usize> From<&[u8; N]> for Word {
    fn from(v: &[u8; N]) -> Self {
        Word(v.to_vec())
    }
}

impl From<&str> for Word {
    fn from(s: &str) -> Self {
        Word(s.as_bytes().to_vec())
    }
}

impl From<String> for Word {
    fn from(s: String) -> Self {
        Word(s.into_bytes())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() <= 96 && self.0.iter().all(|b| b.is_ascii_graphic() || *b == b' ') {
            write!(f, "Word({:?})", String::from_utf8_lossy(&self.0))
        } else if self.0.len() <= 48 {
            write!(f, "Word(0x{})", hex::encode(&self.0))
        } else {
            write!(f, "Word(0x{}…; {} bytes)", hex::encode(&self.0[..24]), self.0.len())
        }
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Word::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// `(256^len - 1) / 255`, the least natural whose numeral has `len` digits.
fn repunit(len: usize) -> UBig {
    UBig::from_be_bytes(&vec![1u8; len])
}

pub fn word_to_nat(w: &[u8]) -> UBig {
    UBig::from_be_bytes(w) + repunit(w.len())
}

pub fn nat_to_word(n: &UBig) -> Word {
    Word(nat_to_bytes(n))
}

fn nat_to_bytes(n: &UBig) -> Vec<u8> {
    if *n == UBig::ZERO {
        return Vec::new();
    }
    let mut len = n.to_be_bytes().len();
    let mut base = repunit(len);
    if *n < base {
        len -= 1;
        base = repunit(len);
    }
    let rest = (n - &base).to_be_bytes();
    let mut out = vec![0u8; len - rest.len()];
    out.extend_from_slice(&rest);
    out
}

fn cantor(x: &UBig, y: &UBig) -> UBig {
    let s = x + y;
    let t = &s * (&s + UBig::ONE);
    (t >> 1) + y
}

fn cantor_inverse(z: &UBig) -> (UBig, UBig) {
    let w = ((z << 3) + UBig::ONE).sqrt() - UBig::ONE;
    let w = w >> 1;
    let t = (&w * (&w + UBig::ONE)) >> 1;
    let y = z - t;
    let x = w - &y;
    (x, y)
}

pub(crate) fn pair_bytes(a: &[u8], b: &[u8]) -> Vec<u8> {
    nat_to_bytes(&cantor(&word_to_nat(a), &word_to_nat(b)))
}

pub(crate) fn unpair_bytes(w: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let (x, y) = cantor_inverse(&word_to_nat(w));
    (nat_to_bytes(&x), nat_to_bytes(&y))
}

pub fn pair(a: &[u8], b: &[u8]) -> Word {
    Word(pair_bytes(a, b))
}

pub fn unpair(w: &[u8]) -> (Word, Word) {
    let (a, b) = unpair_bytes(w);
    (Word(a), Word(b))
}

/// Decoded form of a tuple word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleView {
    pub arity: usize,
    pub items: Vec<Word>,
}

pub(crate) fn encode_tuple_bytes<T: AsRef<[u8]>>(items: &[T]) -> Vec<u8> {
    let header = nat_to_bytes(&UBig::from(items.len()));
    let payload = match items.split_last() {
        None => Vec::new(),
        Some((last, init)) => init
            .iter()
            .rev()
            .fold(last.as_ref().to_vec(), |acc, item| pair_bytes(item.as_ref(), &acc)),
    };
    pair_bytes(&header, &payload)
}

pub(crate) fn decode_tuple_bytes(w: &[u8]) -> Result<Vec<Vec<u8>>, CodecError> {
    let (header, payload) = unpair_bytes(w);
    let arity = usize::try_from(&word_to_nat(&header))
        .ok()
        .filter(|&n| n <= MAX_ARITY)
        .ok_or_else(|| CodecError::MalformedTuple("arity header exceeds limit".into()))?;
    match arity {
        0 if payload.is_empty() => Ok(Vec::new()),
        0 => Err(CodecError::MalformedTuple(
            "arity 0 with non-empty payload".into(),
        )),
        _ => {
            let mut items = Vec::with_capacity(arity);
            let mut rest = payload;
            for _ in 1..arity {
                let (head, tail) = unpair_bytes(&rest);
                items.push(head);
                rest = tail;
            }
            items.push(rest);
            Ok(items)
        }
    }
}

pub fn encode_tuple<T: AsRef<[u8]>>(items: &[T]) -> Word {
    Word(encode_tuple_bytes(items))
}

pub fn decode_tuple(w: &[u8]) -> Result<TupleView, CodecError> {
    let items: Vec<Word> = decode_tuple_bytes(w)?.into_iter().map(Word).collect();
    Ok(TupleView {
        arity: items.len(),
        items,
    })
}

/// `[t ←r f(targets)]`: replaces every targeted item by its image under `f`.
pub fn replace_map(
    tup: &[u8],
    targets: &BTreeSet<usize>,
    f: impl Fn(&Word) -> Word,
) -> Result<Word, CodecError> {
    let mut view = decode_tuple(tup)?;
    if let Some(&index) = targets.iter().find(|&&i| i >= view.arity) {
        return Err(CodecError::IndexOutOfRange {
            index,
            arity: view.arity,
        });
    }
    for &i in targets {
        view.items[i] = f(&view.items[i]);
    }
    Ok(encode_tuple(&view.items))
}

/// `[t ←a …]`: appends `new_items` after the existing items, in order.
pub fn add_items<T: AsRef<[u8]>>(tup: &[u8], new_items: &[T]) -> Result<Word, CodecError> {
    let mut items = decode_tuple_bytes(tup)?;
    items.extend(new_items.iter().map(|w| w.as_ref().to_vec()));
    Ok(Word(encode_tuple_bytes(&items)))
}

/// Concatenation of two encoded tuples into one: `⟨d, p⟩ ↦ ⟨d₁…dₙ, p₁…pₘ⟩`.
pub fn flatten(left: &[u8], right: &[u8]) -> Result<Word, CodecError> {
    let mut items = decode_tuple_bytes(left)?;
    items.extend(decode_tuple_bytes(right)?);
    Ok(Word(encode_tuple_bytes(&items)))
}
