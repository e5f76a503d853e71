//! Subsets of `C^k` up to the symmetry group Φ_k: canonical forms with
//! explicit witnesses, equivalence tests, transports, and class counting.
//!
//! Two subsets are equivalent when some Φ_k member maps one onto the other.
//! Equivalence is decided structurally: a subset splits by leading bit into
//! two subsets of `C^{k-1}`, and two subsets are equivalent exactly when the
//! unordered pairs of child classes coincide. The canonical form recurses on
//! that split and places the smaller child canonical (in the global order:
//! size first, then member list) under prefix 0; ties keep the original
//! orientation. The witness is assembled from the per-node swap decisions,
//! which are precisely the control bits of a Φ_k member.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigUint;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::phi::{lenlex_index, PhiMap};

/// A subset of `C^k`; doubles as a code-table index and as a prefix-set
/// value. May be empty.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SubsetK {
    k: usize,
    members: BTreeSet<BitString>,
}

impl SubsetK {
    pub fn new<I: IntoIterator<Item = BitString>>(k: usize, members: I) -> Result<Self> {
        let members: BTreeSet<BitString> = members.into_iter().collect();
        for m in &members {
            if m.len() != k {
                return Err(Error::Domain(alloc::format!(
                    "subset of C^{k} contains {m} of length {}",
                    m.len()
                )));
            }
        }
        Ok(SubsetK { k, members })
    }

    pub fn empty(k: usize) -> Self {
        SubsetK {
            k,
            members: BTreeSet::new(),
        }
    }

    /// The whole of `C^k`.
    pub fn full(k: usize) -> Self {
        SubsetK {
            k,
            members: BitString::all_of_len(k).into_iter().collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, b: &BitString) -> bool {
        self.members.contains(b)
    }

    pub fn members(&self) -> &BTreeSet<BitString> {
        &self.members
    }

    pub fn union(&self, other: &SubsetK) -> Result<SubsetK> {
        if self.k != other.k {
            return Err(Error::Domain("union of subsets with different k".into()));
        }
        SubsetK::new(self.k, self.members.iter().chain(other.members.iter()).cloned())
    }

    pub fn intersection(&self, other: &SubsetK) -> Result<SubsetK> {
        if self.k != other.k {
            return Err(Error::Domain(
                "intersection of subsets with different k".into(),
            ));
        }
        SubsetK::new(
            self.k,
            self.members.intersection(&other.members).cloned(),
        )
    }

    pub fn is_disjoint(&self, other: &SubsetK) -> bool {
        self.members.is_disjoint(&other.members)
    }

    /// Splits by leading bit into subsets of `C^{k-1}`.
    pub(crate) fn split(&self) -> (SubsetK, SubsetK) {
        debug_assert!(self.k >= 1);
        let mut zero = BTreeSet::new();
        let mut one = BTreeSet::new();
        for m in &self.members {
            let tail = m.drop_prefix(1).expect("member of positive length");
            if m.bit(0) == 0 {
                zero.insert(tail);
            } else {
                one.insert(tail);
            }
        }
        (
            SubsetK {
                k: self.k - 1,
                members: zero,
            },
            SubsetK {
                k: self.k - 1,
                members: one,
            },
        )
    }

    /// Every member prefixed with one bit; a subset of `C^{k+1}`.
    pub(crate) fn prefixed(&self, bit: u8) -> SubsetK {
        let lead = BitString::from_bits([bit]);
        SubsetK {
            k: self.k + 1,
            members: self.members.iter().map(|m| lead.concat(m)).collect(),
        }
    }

    /// Parses the textual form `{00,10}`; `{}` is empty, `{λ}` has k = 0.
    pub fn parse(k: usize, s: &str) -> Result<SubsetK> {
        let inner = s
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| Error::Domain(alloc::format!("subset must be brace-delimited: {s:?}")))?;
        if inner.is_empty() {
            return Ok(SubsetK::empty(k));
        }
        let mut members = Vec::new();
        for part in inner.split(',') {
            if part == "λ" {
                members.push(BitString::empty());
            } else {
                members.push(BitString::parse(part)?);
            }
        }
        SubsetK::new(k, members)
    }
}

impl Ord for SubsetK {
    fn cmp(&self, other: &Self) -> Ordering {
        self.k
            .cmp(&other.k)
            .then_with(|| self.members.len().cmp(&other.members.len()))
            .then_with(|| self.members.cmp(&other.members))
    }
}

impl PartialOrd for SubsetK {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SubsetK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for SubsetK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A canonical representative together with the mapping that carries it back
/// onto the original set.
#[derive(Clone, Debug)]
pub struct CanonWitness {
    pub canon: SubsetK,
    /// Satisfies `psi.apply_set(&canon) == original`.
    pub psi: PhiMap,
}

/// Canonical form of `a` under Φ_k, with witness.
pub fn canonicalize(a: &SubsetK) -> CanonWitness {
    let (canon, psi) = canon_rec(a);
    CanonWitness { canon, psi }
}

fn canon_rec(a: &SubsetK) -> (SubsetK, PhiMap) {
    let k = a.k();
    if k == 0 {
        return (a.clone(), PhiMap::identity(0));
    }
    let (a0, a1) = a.split();
    let (c0, p0) = canon_rec(&a0);
    let (c1, p1) = canon_rec(&a1);
    let swap = c1 < c0;
    let (lo, hi, w_lo, w_hi) = if swap {
        (c1, c0, p1, p0)
    } else {
        (c0, c1, p0, p1)
    };
    let canon = lo
        .prefixed(0)
        .union(&hi.prefixed(1))
        .expect("children share k");

    // Control table: the root bit is the swap decision, and the two subtrees
    // are the child witnesses.
    let mut table = alloc::vec![0u8; (1usize << k) - 1];
    table[0] = swap as u8;
    for b in BitString::all_up_to_len(k - 1) {
        if b.is_empty() {
            continue;
        }
        let tail = b.drop_prefix(1).expect("non-empty");
        let child = if b.bit(0) == 0 { &w_lo } else { &w_hi };
        table[lenlex_index(&b)] = child.star(&tail);
    }
    let psi = PhiMap::from_table(k, table).expect("table has the right length");
    (canon, psi)
}

/// Whether some Φ_k member maps `a` onto `b`.
pub fn equivalent(a: &SubsetK, b: &SubsetK) -> Result<bool> {
    if a.k() != b.k() {
        return Err(Error::Domain(alloc::format!(
            "equivalent: mismatched k ({} vs {})",
            a.k(),
            b.k()
        )));
    }
    Ok(canonicalize(a).canon == canonicalize(b).canon)
}

/// A deterministic Φ_k member carrying `b` onto `t`. The two sets must be
/// equivalent.
pub fn transport(b: &SubsetK, t: &SubsetK) -> Result<PhiMap> {
    let wb = canonicalize(b);
    let wt = canonicalize(t);
    if wb.canon != wt.canon {
        return Err(Error::Domain(alloc::format!(
            "transport: {b} and {t} are not equivalent"
        )));
    }
    wt.psi.compose(&wb.psi.invert())
}

/// Number of equivalence classes of subsets of `C^k`:
/// `a_0 = 2`, `a_k = a_{k-1}(a_{k-1}+1)/2`.
pub fn count_classes(k: usize) -> BigUint {
    let mut a = BigUint::from(2u32);
    for _ in 0..k {
        a = &a * (&a + 1u32) / 2u32;
    }
    a
}

/// Number of classes after discarding the ones that cannot index a code
/// table of an optimal machine: `a'_k = a_{k-1}(a_{k-1}-1)/2`, k ≥ 1.
pub fn count_classes_restricted(k: usize) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::Domain("restricted count needs k >= 1".into()));
    }
    let a = count_classes(k - 1);
    Ok(&a * (&a - 1u32) / 2u32)
}

/// All canonical representatives for the given k, in the global order.
/// Guarded at k ≤ 4: representatives for k = 5 already have up to 2^31
/// members each.
pub fn enumerate_classes(k: usize) -> Result<Vec<SubsetK>> {
    if k > 4 {
        return Err(Error::Resource(alloc::format!(
            "enumerating classes for k={k} materializes subsets of C^{k}"
        )));
    }
    Ok(enumerate_classes_unchecked(k))
}

/// Unguarded variant of [`enumerate_classes`].
pub fn enumerate_classes_unchecked(k: usize) -> Vec<SubsetK> {
    if k == 0 {
        return alloc::vec![
            SubsetK::empty(0),
            SubsetK::full(0),
        ];
    }
    let prev = enumerate_classes_unchecked(k - 1);
    let mut out = Vec::with_capacity(prev.len() * (prev.len() + 1) / 2);
    for (i, lo) in prev.iter().enumerate() {
        for hi in prev.iter().skip(i) {
            out.push(
                lo.prefixed(0)
                    .union(&hi.prefixed(1))
                    .expect("children share k"),
            );
        }
    }
    out.sort();
    out
}
