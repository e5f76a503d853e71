//! Bit strings over {0, 1} and the prefix algebra everything else builds on.
//!
//! The ordering on bit strings is *length-lex*: shorter strings sort before
//! longer ones, and strings of equal length sort lexicographically. This is
//! the single global order used wherever a "smallest" element is picked.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// A finite sequence of bits. The empty string is written `λ` in displays.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    /// The empty string λ.
    pub fn empty() -> Self {
        BitString { bits: Vec::new() }
    }

    /// Builds from raw bits; every entry must be 0 or 1.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        let bits: Vec<u8> = bits.into_iter().collect();
        debug_assert!(bits.iter().all(|&b| b <= 1));
        BitString { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// The i-th bit, 0-indexed.
    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn push(&mut self, bit: u8) {
        debug_assert!(bit <= 1);
        self.bits.push(bit);
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BitString { bits }
    }

    /// First `k` bits.
    pub fn take_prefix(&self, k: usize) -> Result<BitString> {
        if k > self.len() {
            return Err(Error::Domain(alloc::format!(
                "take_prefix: k={k} exceeds length {}",
                self.len()
            )));
        }
        Ok(BitString {
            bits: self.bits[..k].to_vec(),
        })
    }

    /// Everything after the first `k` bits.
    pub fn drop_prefix(&self, k: usize) -> Result<BitString> {
        if k > self.len() {
            return Err(Error::Domain(alloc::format!(
                "drop_prefix: k={k} exceeds length {}",
                self.len()
            )));
        }
        Ok(BitString {
            bits: self.bits[k..].to_vec(),
        })
    }

    /// The unique `z` with `self · z = y`; defined only when `self ⪯ y`.
    pub fn residual(&self, y: &BitString) -> Result<BitString> {
        if !self.is_prefix_of(y) {
            return Err(Error::Domain(alloc::format!(
                "residual: {self} is not a prefix of {y}"
            )));
        }
        y.drop_prefix(self.len())
    }

    pub fn is_prefix_of(&self, y: &BitString) -> bool {
        self.len() <= y.len() && self.bits == y.bits[..self.len()]
    }

    pub fn is_strict_prefix_of(&self, y: &BitString) -> bool {
        self.len() < y.len() && self.is_prefix_of(y)
    }

    /// Parses a string of '0'/'1' characters; the empty string is λ.
    pub fn parse(s: &str) -> Result<BitString> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                _ => {
                    return Err(Error::Domain(alloc::format!(
                        "invalid bit character {c:?} in {s:?}"
                    )))
                }
            }
        }
        Ok(BitString { bits })
    }

    /// All `2^len` strings of the given length, in lexicographic order.
    pub fn all_of_len(len: usize) -> Vec<BitString> {
        assert!(len < usize::BITS as usize);
        (0..1usize << len)
            .map(|v| BitString::from_bits((0..len).map(|i| ((v >> (len - 1 - i)) & 1) as u8)))
            .collect()
    }

    /// All strings of length at most `max_len`, in length-lex order.
    pub fn all_up_to_len(max_len: usize) -> Vec<BitString> {
        let mut out = Vec::new();
        for l in 0..=max_len {
            out.extend(BitString::all_of_len(l));
        }
        out
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "λ");
        }
        for &b in &self.bits {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BitString::parse(s)
    }
}

/// ASCII form used in file formats: λ becomes the empty string.
pub fn to_ascii(b: &BitString) -> String {
    let mut s = String::with_capacity(b.len());
    for &bit in b.bits() {
        s.push(if bit == 0 { '0' } else { '1' });
    }
    s
}
