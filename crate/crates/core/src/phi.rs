//! The group Φ_k of bit-string bijections that preserve lengths, the prefix
//! relation in both directions, and every bit after position k.
//!
//! A member is fully determined by one control bit per prefix `b` with
//! `|b| < k` (the control bit is 0 for all longer prefixes). Bit `i` of the
//! image is the input bit XORed with the control bit of the preceding input
//! prefix. The table is stored in length-lex order `λ, 0, 1, 00, 01, 10, 11,
//! …`, so the table printed as a bit string matches the `φ_{b1 b2 b3}`
//! naming used for k = 2.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::orbit::SubsetK;

/// Position of `b` in the length-lex enumeration of all bit strings.
pub(crate) fn lenlex_index(b: &BitString) -> usize {
    let mut value = 0usize;
    for i in 0..b.len() {
        value = (value << 1) | b.bit(i) as usize;
    }
    (1usize << b.len()) - 1 + value
}

/// A member of Φ_k, stored as its control-bit table of length `2^k − 1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhiMap {
    k: usize,
    table: Vec<u8>,
}

impl PhiMap {
    /// The identity mapping (all-zero table).
    pub fn identity(k: usize) -> Self {
        PhiMap {
            k,
            table: alloc::vec![0; table_len(k)],
        }
    }

    /// Builds from an explicit control table in length-lex order.
    pub fn from_table(k: usize, table: Vec<u8>) -> Result<Self> {
        if table.len() != table_len(k) {
            return Err(Error::Domain(alloc::format!(
                "phi table for k={k} must have {} entries, got {}",
                table_len(k),
                table.len()
            )));
        }
        if table.iter().any(|&b| b > 1) {
            return Err(Error::Domain("phi table entries must be bits".into()));
        }
        Ok(PhiMap { k, table })
    }

    /// Parses the serialized form: the table as an ASCII bit string whose
    /// length determines k (`2^k − 1` bits).
    pub fn parse(s: &str) -> Result<Self> {
        let bits = BitString::parse(s)?;
        let n = bits.len() + 1;
        if !n.is_power_of_two() {
            return Err(Error::Domain(alloc::format!(
                "phi table length {} is not 2^k - 1",
                bits.len()
            )));
        }
        let k = n.trailing_zeros() as usize;
        PhiMap::from_table(k, bits.bits().to_vec())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The control table rendered as a bit string (the serialization).
    pub fn table_bits(&self) -> BitString {
        BitString::from_bits(self.table.iter().copied())
    }

    /// Control bit for prefix `b`; zero for `|b| ≥ k`.
    pub fn star(&self, b: &BitString) -> u8 {
        if b.len() >= self.k {
            0
        } else {
            self.table[lenlex_index(b)]
        }
    }

    /// Applies the mapping to `b`.
    pub fn apply(&self, b: &BitString) -> BitString {
        self.apply_prefix(b, b.len())
    }

    /// Computes only the first `n` bits of the image of `b`. The image bit at
    /// position i depends only on the input bits up to i, so this never looks
    /// past position n of the input.
    pub fn apply_prefix(&self, b: &BitString, n: usize) -> BitString {
        let n = n.min(b.len());
        let mut out = BitString::empty();
        // Running length-lex index of the growing input prefix.
        let mut idx = 0usize;
        for i in 0..n {
            let star = if i < self.k { self.table[idx] } else { 0 };
            out.push(b.bit(i) ^ star);
            if i + 1 < self.k {
                idx = 2 * idx + 1 + b.bit(i) as usize;
            }
        }
        out
    }

    /// Element-wise image of a subset of `C^k`.
    pub fn apply_set(&self, a: &SubsetK) -> Result<SubsetK> {
        if a.k() != self.k {
            return Err(Error::Domain(alloc::format!(
                "apply_set: subset of C^{} given to a Φ_{} member",
                a.k(),
                self.k
            )));
        }
        SubsetK::new(a.k(), a.members().iter().map(|b| self.apply(b)))
    }

    /// The composite mapping `self ∘ psi` (apply `psi` first).
    pub fn compose(&self, psi: &PhiMap) -> Result<PhiMap> {
        if self.k != psi.k {
            return Err(Error::Domain(alloc::format!(
                "compose: mismatched k ({} vs {})",
                self.k,
                psi.k
            )));
        }
        let mut table = Vec::with_capacity(table_len(self.k));
        for p in BitString::all_up_to_len(self.k.saturating_sub(1)) {
            if self.k == 0 {
                break;
            }
            table.push(self.star(&psi.apply(&p)) ^ psi.star(&p));
        }
        Ok(PhiMap {
            k: self.k,
            table,
        })
    }

    /// The inverse mapping: the inverse's control bit at the image of `p`
    /// equals this map's control bit at `p`.
    pub fn invert(&self) -> PhiMap {
        let mut table = alloc::vec![0u8; table_len(self.k)];
        if self.k > 0 {
            for p in BitString::all_up_to_len(self.k - 1) {
                table[lenlex_index(&self.apply(&p))] = self.star(&p);
            }
        }
        PhiMap {
            k: self.k,
            table,
        }
    }

    /// The quotient mapping at `d`: the unique map sending `b` to the part of
    /// the image of `d·b` that follows the image of `d`. Its control bit at
    /// `b` is this map's control bit at `d·b`.
    pub fn quotient(&self, d: &BitString) -> PhiMap {
        let mut table = Vec::with_capacity(table_len(self.k));
        if self.k > 0 {
            for b in BitString::all_up_to_len(self.k - 1) {
                table.push(self.star(&d.concat(&b)));
            }
        }
        PhiMap {
            k: self.k,
            table,
        }
    }

    /// Reinterprets a Φ_k member as a Φ_{k2} member (k2 ≥ k) by padding the
    /// control table with zeros.
    pub fn embed(&self, k2: usize) -> Result<PhiMap> {
        if k2 < self.k {
            return Err(Error::Domain(alloc::format!(
                "embed: cannot shrink k from {} to {}",
                self.k,
                k2
            )));
        }
        let mut table = Vec::with_capacity(table_len(k2));
        if k2 > 0 {
            for b in BitString::all_up_to_len(k2 - 1) {
                table.push(self.star(&b));
            }
        }
        Ok(PhiMap { k: k2, table })
    }

    /// All `2^(2^k − 1)` members of Φ_k. Guarded: the census doubles in
    /// exponent with k.
    pub fn enumerate(k: usize) -> Result<Vec<PhiMap>> {
        if k > 4 {
            return Err(Error::Resource(alloc::format!(
                "enumerating Φ_{k} means 2^{} maps",
                table_len(k)
            )));
        }
        let n = table_len(k);
        Ok((0..1usize << n)
            .map(|v| PhiMap {
                k,
                table: (0..n).map(|i| ((v >> (n - 1 - i)) & 1) as u8).collect(),
            })
            .collect())
    }

    /// `|Φ_k| = 2^(2^k − 1)`.
    pub fn count(k: usize) -> BigUint {
        BigUint::from(1u32) << table_len(k)
    }
}

fn table_len(k: usize) -> usize {
    (1usize << k) - 1
}

impl fmt::Display for PhiMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.table.is_empty() {
            return write!(f, "φ_()");
        }
        write!(f, "φ_")?;
        for &b in &self.table {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

impl fmt::Debug for PhiMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
