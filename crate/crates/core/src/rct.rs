//! Reduced code tuples: one code table per orbit of prefix sets.
//!
//! A reduced code tuple looks like a code tuple except that transitions name
//! arbitrary subsets of `C^k` rather than domain members; a transition target
//! only has to be *equivalent* to some domain element. The domain elements
//! are required to be pairwise inequivalent and act as the orbit
//! representatives. Coding works on the expansion over `domain × Φ_k`,
//! explored lazily: a state is a pair `(A, φ)`, a symbol emits `φ(f̃_A(s))`,
//! and the successor twists `φ` by the quotient at the codeword composed
//! with the transport witness of the transition target.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::bits::BitString;
use crate::codetuple::{Alphabet, CodeTable, CodeTuple, SourceDist, Symbol, TableId};
use crate::error::{Error, Result};
use crate::graph;
use crate::orbit::{self, SubsetK};
use crate::phi::PhiMap;
use crate::Rational;

/// One reduced code table: codeword, transition target set, and an optional
/// pinned witness per symbol. When no witness is pinned, the deterministic
/// orbit transport is used.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RctTable {
    pub f: Vec<BitString>,
    pub tau: Vec<SubsetK>,
    pub psi: Vec<Option<PhiMap>>,
}

impl RctTable {
    pub fn new(f: Vec<BitString>, tau: Vec<SubsetK>) -> Self {
        let n = f.len();
        RctTable {
            f,
            tau,
            psi: alloc::vec![None; n],
        }
    }
}

/// A reduced code tuple.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Rct {
    k: usize,
    alphabet: Alphabet,
    domain: Vec<SubsetK>,
    tables: Vec<RctTable>,
    canon_domain: Vec<SubsetK>,
}

/// Index of a code table of the expanded machine.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ExpandedIndex {
    pub a: SubsetK,
    pub phi: PhiMap,
}

impl ExpandedIndex {
    pub fn new(a: SubsetK, phi: PhiMap) -> Self {
        ExpandedIndex { a, phi }
    }

    /// Textual form `{00,10}|101`: the subset followed by the control bits.
    pub fn to_label(&self) -> String {
        alloc::format!("{}|{}", self.a, crate::bits::to_ascii(&self.phi.table_bits()))
    }

    pub fn parse_label(k: usize, s: &str) -> Result<ExpandedIndex> {
        let (subset, phi) = s
            .split_once('|')
            .ok_or_else(|| Error::Domain(alloc::format!("expanded index needs a '|': {s:?}")))?;
        let a = SubsetK::parse(k, subset)?;
        let phi = if phi.is_empty() && k == 0 {
            PhiMap::identity(0)
        } else {
            PhiMap::parse(phi)?
        };
        if phi.k() != k {
            return Err(Error::Domain(alloc::format!(
                "control table {phi} does not match k={k}"
            )));
        }
        Ok(ExpandedIndex { a, phi })
    }
}

impl fmt::Display for ExpandedIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_label())
    }
}

/// Per-flag outcome of validating a reduced code tuple.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    /// Every table's prefix set equals its own index.
    pub compliant: bool,
    /// Tables whose prefix set differs, with the actual set.
    pub compliance_failures: Vec<(SubsetK, SubsetK)>,
    /// The empty set does not index a table.
    pub extendable: bool,
    pub k_dec: bool,
    pub k_dec_a: Vec<(SubsetK, Symbol)>,
    pub k_dec_b: Vec<(SubsetK, Symbol, Symbol)>,
    /// The direct realization has a unique stationary distribution.
    pub regular: bool,
    /// Average codeword length of the direct realization; present when a
    /// distribution was supplied and the machine is regular.
    pub avg_len: Option<Rational>,
}

impl ValidationReport {
    pub fn all_ok(&self) -> bool {
        self.compliant && self.extendable && self.k_dec && self.regular
    }
}

impl Rct {
    pub fn new(
        k: usize,
        alphabet: Alphabet,
        entries: Vec<(SubsetK, RctTable)>,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("reduced code tuple needs at least one table".into()));
        }
        let domain: Vec<SubsetK> = entries.iter().map(|(a, _)| a.clone()).collect();
        let tables: Vec<RctTable> = entries.into_iter().map(|(_, t)| t).collect();
        for a in &domain {
            if a.k() != k {
                return Err(Error::Domain(alloc::format!(
                    "domain element {a} is not a subset of C^{k}"
                )));
            }
        }
        let canon_domain: Vec<SubsetK> =
            domain.iter().map(|a| orbit::canonicalize(a).canon).collect();
        for i in 0..domain.len() {
            for j in i + 1..domain.len() {
                if canon_domain[i] == canon_domain[j] {
                    return Err(Error::Domain(alloc::format!(
                        "domain elements {} and {} are equivalent",
                        domain[i],
                        domain[j]
                    )));
                }
            }
        }
        let rct = Rct {
            k,
            alphabet,
            domain,
            tables,
            canon_domain,
        };
        for (i, a) in rct.domain.iter().enumerate() {
            let t = &rct.tables[i];
            if t.f.len() != rct.alphabet.len()
                || t.tau.len() != rct.alphabet.len()
                || t.psi.len() != rct.alphabet.len()
            {
                return Err(Error::Domain(alloc::format!(
                    "table {a} must cover all {} symbols",
                    rct.alphabet.len()
                )));
            }
            for s in 0..rct.alphabet.len() {
                let target = &t.tau[s];
                if target.k() != k {
                    return Err(Error::Domain(alloc::format!(
                        "transition target {target} is not a subset of C^{k}"
                    )));
                }
                let rep = rct.representative(target)?;
                if let Some(psi) = &t.psi[s] {
                    if psi.k() != k {
                        return Err(Error::Domain(alloc::format!(
                            "pinned witness {psi} does not match k={k}"
                        )));
                    }
                    if &psi.apply_set(rep)? != target {
                        return Err(Error::Domain(alloc::format!(
                            "pinned witness {psi} does not carry {rep} onto {target}"
                        )));
                    }
                }
            }
        }
        Ok(rct)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn domain(&self) -> &[SubsetK] {
        &self.domain
    }

    pub fn table(&self, a: &SubsetK) -> Result<&RctTable> {
        Ok(&self.tables[self.index_of(a)?])
    }

    pub fn table_at(&self, i: usize) -> &RctTable {
        &self.tables[i]
    }

    pub fn index_of(&self, a: &SubsetK) -> Result<usize> {
        self.domain
            .iter()
            .position(|d| d == a)
            .ok_or_else(|| Error::Domain(alloc::format!("no table {a} in the domain")))
    }

    pub fn max_codeword_len(&self) -> usize {
        self.tables
            .iter()
            .flat_map(|t| t.f.iter().map(BitString::len))
            .max()
            .unwrap_or(0)
    }

    /// The unique domain element equivalent to `t`.
    pub fn representative(&self, t: &SubsetK) -> Result<&SubsetK> {
        let canon = orbit::canonicalize(t).canon;
        self.canon_domain
            .iter()
            .position(|c| c == &canon)
            .map(|i| &self.domain[i])
            .ok_or_else(|| {
                Error::Domain(alloc::format!(
                    "{t} is not equivalent to any domain element"
                ))
            })
    }

    /// Witness carrying the representative of `tau[s]` onto `tau[s]`: the
    /// pinned one when present, the orbit transport otherwise.
    pub fn psi_for(&self, table: usize, s: Symbol) -> Result<PhiMap> {
        let t = &self.tables[table];
        if let Some(psi) = &t.psi[s] {
            return Ok(psi.clone());
        }
        let rep = self.representative(&t.tau[s])?;
        orbit::transport(rep, &t.tau[s])
    }

    /// Prefix set of a table: the union over symbols of the `k`-bit prefixes
    /// of codeword-then-target-set continuations. A finite union, no
    /// fixpoint needed.
    pub fn pref_set_rct(&self, a: &SubsetK) -> Result<SubsetK> {
        let idx = self.index_of(a)?;
        let mut members = alloc::collections::BTreeSet::new();
        for s in 0..self.alphabet.len() {
            let w = &self.tables[idx].f[s];
            for t in self.tables[idx].tau[s].members() {
                members.insert(w.concat(t).take_prefix(self.k)?);
            }
        }
        SubsetK::new(self.k, members)
    }

    /// `k`-bit continuations after `b` contributed by strictly longer
    /// codewords of table `a`.
    pub fn pref_bar_rct(&self, a: &SubsetK, b: &BitString) -> Result<SubsetK> {
        let idx = self.index_of(a)?;
        let mut members = alloc::collections::BTreeSet::new();
        for s in 0..self.alphabet.len() {
            let w = &self.tables[idx].f[s];
            if !b.is_strict_prefix_of(w) {
                continue;
            }
            let r = b.residual(w)?;
            for t in self.tables[idx].tau[s].members() {
                members.insert(r.concat(t).take_prefix(self.k)?);
            }
        }
        SubsetK::new(self.k, members)
    }

    /// Checks compliance, extendability, delay decodability, and regularity.
    /// The average length slot stays empty; use
    /// [`Rct::validate_with_dist`] to fill it.
    pub fn validate(&self) -> ValidationReport {
        let mut compliance_failures = Vec::new();
        for a in &self.domain {
            let p = self.pref_set_rct(a).expect("a is in the domain");
            if &p != a {
                compliance_failures.push((a.clone(), p));
            }
        }
        let extendable = !self.domain.iter().any(SubsetK::is_empty);
        let mut k_dec_a = Vec::new();
        let mut k_dec_b = Vec::new();
        for (i, a) in self.domain.iter().enumerate() {
            for s in 0..self.alphabet.len() {
                let bar = self
                    .pref_bar_rct(a, &self.tables[i].f[s])
                    .expect("a is in the domain");
                if !self.tables[i].tau[s].is_disjoint(&bar) {
                    k_dec_a.push((a.clone(), s));
                }
                for s2 in s + 1..self.alphabet.len() {
                    if self.tables[i].f[s] == self.tables[i].f[s2]
                        && !self.tables[i].tau[s].is_disjoint(&self.tables[i].tau[s2])
                    {
                        k_dec_b.push((a.clone(), s, s2));
                    }
                }
            }
        }
        let regular = !self
            .direct_realization()
            .reachable_core()
            .is_empty();
        ValidationReport {
            compliant: compliance_failures.is_empty(),
            compliance_failures,
            extendable,
            k_dec: k_dec_a.is_empty() && k_dec_b.is_empty(),
            k_dec_a,
            k_dec_b,
            regular,
            avg_len: None,
        }
    }

    /// Validation with the average codeword length of the direct realization
    /// filled in when the machine is regular.
    pub fn validate_with_dist(&self, mu: &SourceDist) -> Result<ValidationReport> {
        let mut report = self.validate();
        if report.regular {
            let realization = self.direct_realization();
            let markov = realization.markov_analyze(mu)?;
            report.avg_len = Some(markov.avg_len()?.clone());
        }
        Ok(report)
    }

    /// The code tuple obtained by snapping every transition target to its
    /// domain representative.
    pub fn direct_realization(&self) -> CodeTuple {
        let entries: Vec<(TableId, CodeTable)> = self
            .domain
            .iter()
            .zip(&self.tables)
            .map(|(a, t)| {
                let tau = t
                    .tau
                    .iter()
                    .map(|target| {
                        TableId::Subset(
                            self.representative(target)
                                .expect("validated at construction")
                                .clone(),
                        )
                    })
                    .collect();
                (
                    TableId::Subset(a.clone()),
                    CodeTable {
                        f: t.f.clone(),
                        tau,
                    },
                )
            })
            .collect();
        CodeTuple::new(self.k, self.alphabet.clone(), entries)
            .expect("realization inherits a valid shape")
    }

    /// One step of the expanded machine: emits the twisted codeword and
    /// produces the next index.
    pub fn expand_index_step(
        &self,
        state: &ExpandedIndex,
        s: Symbol,
    ) -> Result<(BitString, ExpandedIndex)> {
        if s >= self.alphabet.len() {
            return Err(Error::Domain(alloc::format!("unknown symbol index {s}")));
        }
        if state.phi.k() != self.k {
            return Err(Error::Domain(alloc::format!(
                "state control table has k={}, machine has k={}",
                state.phi.k(),
                self.k
            )));
        }
        let idx = self.index_of(&state.a)?;
        let word = &self.tables[idx].f[s];
        let emit = state.phi.apply(word);
        let psi = self.psi_for(idx, s)?;
        let next_phi = state.phi.quotient(word).compose(&psi)?;
        let next_a = self.representative(&self.tables[idx].tau[s])?.clone();
        Ok((emit, ExpandedIndex::new(next_a, next_phi)))
    }

    /// Breadth-first closure of the expanded machine from `seed`: the visited
    /// states in discovery order and, per state and symbol, the emitted word
    /// and successor position.
    pub(crate) fn expand_reachable(
        &self,
        seed: &ExpandedIndex,
    ) -> Result<(Vec<ExpandedIndex>, Vec<Vec<(BitString, usize)>>)> {
        self.index_of(&seed.a)?;
        if seed.phi.k() != self.k {
            return Err(Error::Domain("seed control table does not match k".into()));
        }
        let mut states = alloc::vec![seed.clone()];
        let mut index: BTreeMap<ExpandedIndex, usize> = BTreeMap::new();
        index.insert(seed.clone(), 0);
        let mut edges: Vec<Vec<(BitString, usize)>> = Vec::new();
        let mut head = 0usize;
        while head < states.len() {
            let cur = states[head].clone();
            let mut outs = Vec::with_capacity(self.alphabet.len());
            for s in 0..self.alphabet.len() {
                let (emit, next) = self.expand_index_step(&cur, s)?;
                let pos = match index.get(&next) {
                    Some(&p) => p,
                    None => {
                        let p = states.len();
                        if p >= (1usize << 20) {
                            return Err(Error::Resource(
                                "expanded machine exceeds 2^20 states".into(),
                            ));
                        }
                        index.insert(next.clone(), p);
                        states.push(next);
                        p
                    }
                };
                outs.push((emit, pos));
            }
            edges.push(outs);
            head += 1;
        }
        Ok((states, edges))
    }

    /// Expands the machine lazily from `seed` and restricts it to a minimal
    /// non-empty transition-closed state set: the lexicographically smallest
    /// bottom component of the reachable graph. The reduced code tuple must
    /// pass all four validation flags.
    pub fn expand_minimal(&self, seed: &ExpandedIndex) -> Result<CodeTuple> {
        let report = self.validate();
        if !report.all_ok() {
            return Err(Error::InvalidRct(alloc::format!(
                "expansion needs all four flags: compliant={} extendable={} k_dec={} regular={}",
                report.compliant,
                report.extendable,
                report.k_dec,
                report.regular
            )));
        }
        let (states, edges) = self.expand_reachable(seed)?;
        let adj: Vec<Vec<usize>> = edges
            .iter()
            .map(|outs| {
                let mut v: Vec<usize> = outs.iter().map(|(_, p)| *p).collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        let bottoms = graph::bottom_sccs(&adj);
        let chosen = bottoms
            .into_iter()
            .map(|comp| {
                let mut keyed: Vec<ExpandedIndex> =
                    comp.iter().map(|&i| states[i].clone()).collect();
                keyed.sort();
                (keyed, comp)
            })
            .min_by(|a, b| a.0.cmp(&b.0))
            .ok_or_else(|| Error::Internal("no bottom component in a finite graph".into()))?;
        let (sorted_states, comp) = chosen;
        let mut order: Vec<usize> = comp;
        order.sort_by_key(|&i| states[i].clone());
        debug_assert_eq!(
            sorted_states,
            order.iter().map(|&i| states[i].clone()).collect::<Vec<_>>()
        );
        let entries: Vec<(TableId, CodeTable)> = order
            .iter()
            .map(|&i| {
                let f = edges[i].iter().map(|(w, _)| w.clone()).collect();
                let tau = edges[i]
                    .iter()
                    .map(|(_, p)| TableId::Label(states[*p].to_label()))
                    .collect();
                (
                    TableId::Label(states[i].to_label()),
                    CodeTable { f, tau },
                )
            })
            .collect();
        CodeTuple::new(self.k, self.alphabet.clone(), entries)
    }

    /// Materializes the whole `domain × Φ_k` machine. Guarded by the total
    /// state count.
    pub fn expand_full(&self) -> Result<CodeTuple> {
        let states = self
            .domain
            .len()
            .checked_mul(1usize << ((1usize << self.k) - 1));
        if states.is_none() || states.unwrap() > (1 << 20) {
            return Err(Error::Resource(alloc::format!(
                "full expansion has {} × 2^{} states",
                self.domain.len(),
                (1usize << self.k) - 1
            )));
        }
        self.expand_full_unchecked()
    }

    /// Unguarded variant of [`Rct::expand_full`].
    pub fn expand_full_unchecked(&self) -> Result<CodeTuple> {
        let mut entries = Vec::new();
        for a in &self.domain {
            let idx = self.index_of(a)?;
            for phi in PhiMap::enumerate(self.k)? {
                let state = ExpandedIndex::new(a.clone(), phi);
                let mut f = Vec::with_capacity(self.alphabet.len());
                let mut tau = Vec::with_capacity(self.alphabet.len());
                for s in 0..self.alphabet.len() {
                    let (emit, next) = self.expand_index_step(&state, s)?;
                    f.push(emit);
                    tau.push(TableId::Label(next.to_label()));
                }
                let _ = idx;
                entries.push((TableId::Label(state.to_label()), CodeTable { f, tau }));
            }
        }
        CodeTuple::new(self.k, self.alphabet.clone(), entries)
    }

    /// Whether the emitted length of `x` is identical across the given
    /// expanded states (which must share their table component) and equal to
    /// the direct realization's emitted length.
    pub fn length_invariance_check(
        &self,
        x: &[Symbol],
        states: &[ExpandedIndex],
    ) -> Result<bool> {
        let Some(first) = states.first() else {
            return Ok(true);
        };
        if states.iter().any(|st| st.a != first.a) {
            return Err(Error::Domain(
                "length invariance check needs states sharing one table".into(),
            ));
        }
        let realization = self.direct_realization();
        let want = realization
            .f_star(&TableId::Subset(first.a.clone()), x)?
            .len();
        for st in states {
            let mut cur = st.clone();
            let mut emitted = 0usize;
            for &s in x {
                let (w, next) = self.expand_index_step(&cur, s)?;
                emitted += w.len();
                cur = next;
            }
            if emitted != want {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Average codeword length of a regular reduced code tuple.
pub fn avg_len(rct: &Rct, mu: &SourceDist) -> Result<Rational> {
    let report = rct.validate_with_dist(mu)?;
    report.avg_len.ok_or(Error::NotRegular)
}

/// True when `l` is exactly zero; tiny convenience for report printing.
pub fn is_zero(l: &Rational) -> bool {
    l.is_zero()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::vec;

    fn bs(s: &str) -> BitString {
        BitString::parse(s).unwrap()
    }

    fn set(xs: &[&str]) -> SubsetK {
        SubsetK::new(2, xs.iter().map(|s| bs(s))).unwrap()
    }

    fn phi(s: &str) -> PhiMap {
        PhiMap::parse(s).unwrap()
    }

    /// The worked three-table reduced code tuple with k = 2 used throughout
    /// the tests: domain {00}, {00,10}, {00,01,10,11}.
    pub(crate) fn worked_rct() -> Rct {
        let alphabet = Alphabet::new(["a", "b", "c", "d"]).unwrap();
        Rct::new(
            2,
            alphabet,
            vec![
                (
                    set(&["00"]),
                    RctTable::new(
                        vec![bs("001"), bs("000"), bs("00"), bs("001")],
                        vec![
                            set(&["01", "10"]),
                            set(&["00"]),
                            set(&["01"]),
                            set(&["00", "11"]),
                        ],
                    ),
                ),
                (
                    set(&["00", "10"]),
                    RctTable::new(
                        vec![bs("1"), bs("1001"), bs(""), bs("1000")],
                        vec![
                            set(&["01"]),
                            set(&["00", "01", "10", "11"]),
                            set(&["00"]),
                            set(&["00", "01", "10", "11"]),
                        ],
                    ),
                ),
                (
                    set(&["00", "01", "10", "11"]),
                    RctTable::new(
                        vec![bs("1"), bs("1"), bs("100"), bs("0")],
                        vec![
                            set(&["01", "10"]),
                            set(&["11"]),
                            set(&["00", "01", "10", "11"]),
                            set(&["00", "01", "10", "11"]),
                        ],
                    ),
                ),
            ],
        )
        .unwrap()
    }

    #[test]
    fn pref_sets_match_indices() {
        let r = worked_rct();
        for a in r.domain() {
            assert_eq!(&r.pref_set_rct(a).unwrap(), a, "prefix set of {a}");
        }
    }

    #[test]
    fn pref_bar_table_cells() {
        let r = worked_rct();
        let a1 = set(&["00"]);
        let a2 = set(&["00", "10"]);
        let a3 = set(&["00", "01", "10", "11"]);
        let cell = |a: &SubsetK, s: usize| {
            let w = r.table(a).unwrap().f[s].clone();
            r.pref_bar_rct(a, &w).unwrap()
        };
        // Column {00}: a, b, d have no strict extensions; c sees them all.
        assert!(cell(&a1, 0).is_empty());
        assert!(cell(&a1, 1).is_empty());
        assert_eq!(cell(&a1, 2), set(&["00", "10", "11"]));
        assert!(cell(&a1, 3).is_empty());
        // Column {00,10}.
        assert_eq!(cell(&a2, 0), set(&["00"]));
        assert!(cell(&a2, 1).is_empty());
        assert_eq!(cell(&a2, 2), set(&["10"]));
        assert!(cell(&a2, 3).is_empty());
        // Column {00,01,10,11}.
        assert_eq!(cell(&a3, 0), set(&["00"]));
        assert_eq!(cell(&a3, 1), set(&["00"]));
        assert!(cell(&a3, 2).is_empty());
        assert!(cell(&a3, 3).is_empty());
        // No strictly longer codeword at all.
        assert!(r.pref_bar_rct(&a1, &bs("000000")).unwrap().is_empty());
    }

    #[test]
    fn validation_flags_on_worked_example() {
        let r = worked_rct();
        let report = r.validate();
        assert!(report.compliant);
        assert!(report.extendable);
        assert!(report.k_dec);
        assert!(report.regular);
        assert!(report.all_ok());
        let mu = SourceDist::uniform(4).unwrap();
        let with_l = r.validate_with_dist(&mu).unwrap();
        assert!(with_l.avg_len.is_some());
    }

    #[test]
    fn empty_domain_element_breaks_extendability() {
        let alphabet = Alphabet::new(["a", "b"]).unwrap();
        let empty = SubsetK::empty(2);
        let r = Rct::new(
            2,
            alphabet,
            vec![(
                empty.clone(),
                RctTable::new(vec![bs("0"), bs("1")], vec![empty.clone(), empty.clone()]),
            )],
        )
        .unwrap();
        let report = r.validate();
        assert!(!report.extendable);
        assert!(!report.all_ok());
    }

    #[test]
    fn mutated_targets_break_decodability() {
        // Equal codewords at symbols a and d of table {00}; overlapping
        // targets violate the pairwise-disjointness condition.
        let mut r = worked_rct();
        let i = r.index_of(&set(&["00"])).unwrap();
        r.tables[i].tau[3] = set(&["01", "11"]);
        let report = r.validate();
        assert!(!report.k_dec);
        assert!(report
            .k_dec_b
            .contains(&(set(&["00"]), 0, 3)));
    }

    #[test]
    fn direct_realization_snaps_targets() {
        let r = worked_rct();
        let real = r.direct_realization();
        let a1 = TableId::Subset(set(&["00"]));
        let a2 = TableId::Subset(set(&["00", "10"]));
        let a3 = TableId::Subset(set(&["00", "01", "10", "11"]));
        let t1 = real.table(&a1).unwrap();
        assert_eq!(t1.tau, vec![a2.clone(), a1.clone(), a1.clone(), a2.clone()]);
        let t2 = real.table(&a2).unwrap();
        assert_eq!(t2.tau, vec![a1.clone(), a3.clone(), a1.clone(), a3.clone()]);
        let t3 = real.table(&a3).unwrap();
        assert_eq!(t3.tau, vec![a2.clone(), a1.clone(), a3.clone(), a3.clone()]);
        // Codewords are copied unchanged.
        assert_eq!(t3.f, vec![bs("1"), bs("1"), bs("100"), bs("0")]);
        // A reduced tuple whose targets are already domain elements realizes
        // to itself.
        let p = real.pref_sets();
        for a in r.domain() {
            assert_eq!(p[&TableId::Subset(a.clone())], *a);
        }
    }

    #[test]
    fn transports_match_pinned_witness_table() {
        // The deterministic transports reproduce the witnesses used by the
        // worked coding example.
        let r = worked_rct();
        let expect = [
            (set(&["00"]), 0, phi("010")),
            (set(&["00"]), 1, phi("000")),
            (set(&["00"]), 2, phi("010")),
            (set(&["00"]), 3, phi("001")),
            (set(&["00", "10"]), 0, phi("010")),
            (set(&["00", "10"]), 1, phi("000")),
            (set(&["00", "10"]), 2, phi("000")),
            (set(&["00", "10"]), 3, phi("000")),
            (set(&["00", "01", "10", "11"]), 0, phi("010")),
            (set(&["00", "01", "10", "11"]), 1, phi("110")),
            (set(&["00", "01", "10", "11"]), 2, phi("000")),
            (set(&["00", "01", "10", "11"]), 3, phi("000")),
        ];
        for (a, s, want) in expect {
            let idx = r.index_of(&a).unwrap();
            assert_eq!(r.psi_for(idx, s).unwrap(), want, "witness at ({a}, {s})");
        }
    }

    #[test]
    fn expansion_steps_match_worked_machine() {
        let r = worked_rct();
        let a2 = set(&["00", "10"]);
        let a3 = set(&["00", "01", "10", "11"]);
        let st = ExpandedIndex::new(a2.clone(), phi("101"));
        let (w, next) = r.expand_index_step(&st, 0).unwrap();
        assert_eq!(w, bs("0"));
        assert_eq!(next, ExpandedIndex::new(set(&["00"]), phi("110")));
        let (w, next) = r.expand_index_step(&st, 1).unwrap();
        assert_eq!(w, bs("0101"));
        assert_eq!(next, ExpandedIndex::new(a3.clone(), phi("000")));
        let (w, next) = r.expand_index_step(&st, 2).unwrap();
        assert_eq!(w, BitString::empty());
        assert_eq!(next, ExpandedIndex::new(set(&["00"]), phi("101")));
        let (w, next) = r.expand_index_step(&st, 3).unwrap();
        assert_eq!(w, bs("0100"));
        assert_eq!(next, ExpandedIndex::new(a3, phi("000")));
    }

    #[test]
    fn pinned_witnesses_are_validated_and_used() {
        let mut r = worked_rct();
        let a3 = set(&["00", "01", "10", "11"]);
        let i = r.index_of(&a3).unwrap();
        // Any control table fixes the full set, so this witness is legal.
        r.tables[i].psi[2] = Some(phi("100"));
        let r2 = Rct::new(
            2,
            r.alphabet.clone(),
            r.domain
                .iter()
                .cloned()
                .zip(r.tables.iter().cloned())
                .collect(),
        )
        .unwrap();
        let st = ExpandedIndex::new(a3.clone(), phi("000"));
        let (_, next) = r2.expand_index_step(&st, 2).unwrap();
        assert_eq!(next.phi, phi("100"));

        // A witness that misses the target is rejected outright.
        let mut bad = worked_rct();
        let i = bad.index_of(&set(&["00"])).unwrap();
        bad.tables[i].psi[1] = Some(phi("100")); // {00} must map to {00}
        assert!(Rct::new(
            2,
            bad.alphabet.clone(),
            bad.domain
                .iter()
                .cloned()
                .zip(bad.tables.iter().cloned())
                .collect(),
        )
        .is_err());
    }

    #[test]
    fn construction_rejects_ill_formed_inputs() {
        let alphabet = Alphabet::new(["a", "b"]).unwrap();
        // Equivalent domain elements.
        assert!(Rct::new(
            2,
            alphabet.clone(),
            vec![
                (
                    set(&["00"]),
                    RctTable::new(vec![bs("0"), bs("1")], vec![set(&["00"]), set(&["00"])]),
                ),
                (
                    set(&["11"]),
                    RctTable::new(vec![bs("0"), bs("1")], vec![set(&["11"]), set(&["11"])]),
                ),
            ],
        )
        .is_err());
        // Target in an orbit with no representative.
        assert!(Rct::new(
            2,
            alphabet,
            vec![(
                set(&["00"]),
                RctTable::new(vec![bs("0"), bs("1")], vec![set(&["00"]), set(&["00", "10"])]),
            )],
        )
        .is_err());
    }

    #[test]
    fn expand_minimal_preserves_length_and_flags() {
        let r = worked_rct();
        let seed = ExpandedIndex::new(set(&["00", "01", "10", "11"]), PhiMap::identity(2));
        let expanded = r.expand_minimal(&seed).unwrap();
        let mu = SourceDist::uniform(4).unwrap();
        let l_tilde = avg_len(&r, &mu).unwrap();
        let l = expanded
            .markov_analyze(&mu)
            .unwrap()
            .avg_len()
            .unwrap()
            .clone();
        assert_eq!(l, l_tilde);
        assert!(expanded.is_k_dec().ok());
        assert!(expanded.is_extendable());
        // Prefix sets of the expansion stay inside the twisted table index.
        let p = expanded.pref_sets();
        for id in expanded.domain() {
            let TableId::Label(label) = id else { panic!() };
            let st = ExpandedIndex::parse_label(2, label).unwrap();
            let bound = st.phi.apply_set(&st.a).unwrap();
            for c in p[id].members() {
                assert!(bound.contains(c), "{c} outside {bound} at {id}");
            }
        }
    }

    #[test]
    fn single_table_fixed_point_expansion() {
        // One table whose transition is its own domain element with identity
        // transport: the minimal expansion is a single identical table.
        let alphabet = Alphabet::new(["a", "b"]).unwrap();
        let a = SubsetK::new(1, [bs("0"), bs("1")]).unwrap();
        let r = Rct::new(
            1,
            alphabet,
            vec![(
                a.clone(),
                RctTable::new(vec![bs("0"), bs("1")], vec![a.clone(), a.clone()]),
            )],
        )
        .unwrap();
        let seed = ExpandedIndex::new(a.clone(), PhiMap::identity(1));
        let expanded = r.expand_minimal(&seed).unwrap();
        assert_eq!(expanded.table_count(), 1);
        let id = TableId::Label(seed.to_label());
        let t = expanded.table(&id).unwrap();
        assert_eq!(t.f, vec![bs("0"), bs("1")]);
        assert_eq!(t.tau, vec![id.clone(), id.clone()]);
    }

    #[test]
    fn expand_full_has_every_pair() {
        let r = worked_rct();
        let full = r.expand_full().unwrap();
        assert_eq!(full.table_count(), 3 * 8);
        let st = ExpandedIndex::new(set(&["00", "10"]), phi("101"));
        let t = full.table(&TableId::Label(st.to_label())).unwrap();
        assert_eq!(t.f, vec![bs("0"), bs("0101"), bs(""), bs("0100")]);
    }

    #[test]
    fn length_invariance_across_twists() {
        let r = worked_rct();
        let a3 = set(&["00", "01", "10", "11"]);
        let states: Vec<ExpandedIndex> = PhiMap::enumerate(2)
            .unwrap()
            .into_iter()
            .map(|p| ExpandedIndex::new(a3.clone(), p))
            .collect();
        let x = r.alphabet().seq_from_text("acdb").unwrap();
        assert!(r.length_invariance_check(&x, &states).unwrap());
        assert!(r.length_invariance_check(&[], &states).unwrap());
        let a1_states: Vec<ExpandedIndex> = PhiMap::enumerate(2)
            .unwrap()
            .into_iter()
            .map(|p| ExpandedIndex::new(set(&["00"]), p))
            .collect();
        let x = r.alphabet().seq_from_text("badb").unwrap();
        assert!(r.length_invariance_check(&x, &a1_states).unwrap());
        // Mixed tables are rejected.
        let mixed = vec![states[0].clone(), a1_states[0].clone()];
        assert!(r.length_invariance_check(&x, &mixed).is_err());
    }

    #[test]
    fn labels_round_trip() {
        let st = ExpandedIndex::new(set(&["00", "10"]), phi("101"));
        assert_eq!(st.to_label(), "{00,10}|101");
        assert_eq!(ExpandedIndex::parse_label(2, "{00,10}|101").unwrap(), st);
        assert!(ExpandedIndex::parse_label(2, "{00,10}").is_err());
        assert!(ExpandedIndex::parse_label(2, "{00,10}|1").is_err());
    }
}
