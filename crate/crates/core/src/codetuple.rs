//! Code tuples: a finite family of code tables with a next-table map, the
//! evaluation maps over symbol sequences, prefix sets, decodability and
//! extendability predicates, and exact Markov analysis of the average
//! codeword length.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::graph;
use crate::linalg;
use crate::orbit::SubsetK;
use crate::Rational;

/// Index into an [`Alphabet`].
pub type Symbol = usize;

/// Ordered list of distinct source-symbol names. At least two symbols.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.len() < 2 {
            return Err(Error::Domain("alphabet needs at least two symbols".into()));
        }
        let distinct: BTreeSet<&String> = symbols.iter().collect();
        if distinct.len() != symbols.len() {
            return Err(Error::Domain("alphabet symbols must be distinct".into()));
        }
        if symbols.iter().any(|s| s.is_empty() || s.chars().any(char::is_whitespace)) {
            return Err(Error::Domain(
                "alphabet symbols must be non-empty and free of whitespace".into(),
            ));
        }
        Ok(Alphabet { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symbol(&self, s: Symbol) -> &str {
        &self.symbols[s]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index(&self, name: &str) -> Option<Symbol> {
        self.symbols.iter().position(|s| s == name)
    }

    /// Parses symbol text: one character per symbol when every name is a
    /// single character, whitespace-separated tokens otherwise. Whitespace is
    /// always ignored in the single-character case.
    pub fn seq_from_text(&self, text: &str) -> Result<Vec<Symbol>> {
        if self.symbols.iter().all(|s| s.chars().count() == 1) {
            let mut out = Vec::new();
            for c in text.chars() {
                if c.is_whitespace() {
                    continue;
                }
                let mut buf = [0u8; 4];
                let name: &str = c.encode_utf8(&mut buf);
                out.push(
                    self.index(name)
                        .ok_or_else(|| Error::Domain(alloc::format!("unknown symbol {name:?}")))?,
                );
            }
            Ok(out)
        } else {
            text.split_whitespace()
                .map(|tok| {
                    self.index(tok)
                        .ok_or_else(|| Error::Domain(alloc::format!("unknown symbol {tok:?}")))
                })
                .collect()
        }
    }

    /// Inverse of [`Alphabet::seq_from_text`].
    pub fn seq_to_text(&self, seq: &[Symbol]) -> String {
        let single = self.symbols.iter().all(|s| s.chars().count() == 1);
        let mut out = String::new();
        for (i, &s) in seq.iter().enumerate() {
            if !single && i > 0 {
                out.push(' ');
            }
            out.push_str(&self.symbols[s]);
        }
        out
    }
}

/// Exact source distribution, aligned with an alphabet by index. Every
/// probability is strictly positive and they sum to exactly one.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SourceDist {
    probs: Vec<Rational>,
}

impl SourceDist {
    pub fn new(probs: Vec<Rational>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::Domain("distribution needs at least two symbols".into()));
        }
        if probs.iter().any(|p| p <= &Rational::zero()) {
            return Err(Error::Domain("probabilities must be strictly positive".into()));
        }
        let sum: Rational = probs.iter().sum();
        if !sum.is_one() {
            return Err(Error::Domain(alloc::format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(SourceDist { probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("distribution needs at least two symbols".into()));
        }
        let p = Rational::new(1.into(), (n as i64).into());
        SourceDist::new(alloc::vec![p; n])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn prob(&self, s: Symbol) -> &Rational {
        &self.probs[s]
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }
}

/// Identifier of a code table: either an opaque label or a subset of `C^k`.
/// Labels order before subsets; both order internally, so every id set has a
/// deterministic smallest element.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum TableId {
    Label(String),
    Subset(SubsetK),
}

impl TableId {
    pub fn label(s: &str) -> Self {
        TableId::Label(s.into())
    }

    pub fn subset(&self) -> Option<&SubsetK> {
        match self {
            TableId::Subset(a) => Some(a),
            TableId::Label(_) => None,
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableId::Label(s) => write!(f, "{s}"),
            TableId::Subset(a) => write!(f, "{a}"),
        }
    }
}

/// One code table: codeword and next-table id per symbol.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CodeTable {
    pub f: Vec<BitString>,
    pub tau: Vec<TableId>,
}

/// A code tuple: decoding delay `k`, alphabet, and one [`CodeTable`] per
/// domain id. Every next-table id points back into the domain.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CodeTuple {
    k: usize,
    alphabet: Alphabet,
    domain: Vec<TableId>,
    tables: Vec<CodeTable>,
}

/// Violations of the two delay-decodability conditions: `(table, symbol)`
/// pairs where the tail of a longer codeword collides, and
/// `(table, symbol, symbol)` pairs sharing a codeword with overlapping
/// continuations.
#[derive(Clone, Debug, Default)]
pub struct KDecReport {
    pub cond_a: Vec<(TableId, Symbol)>,
    pub cond_b: Vec<(TableId, Symbol, Symbol)>,
}

impl KDecReport {
    pub fn ok(&self) -> bool {
        self.cond_a.is_empty() && self.cond_b.is_empty()
    }
}

/// Exact Markov analysis of a code tuple: transition matrix, per-table
/// average lengths, the mutually reachable core, and (when the chain is
/// regular) the stationary distribution and average codeword length.
#[derive(Clone, Debug)]
pub struct MarkovReport {
    pub q: Vec<Vec<Rational>>,
    pub l_tables: Vec<Rational>,
    pub core: BTreeSet<TableId>,
    stationary: Option<Vec<Rational>>,
    avg: Option<Rational>,
}

impl MarkovReport {
    pub fn is_regular(&self) -> bool {
        self.stationary.is_some()
    }

    /// Stationary distribution over the full domain (zero off the core).
    pub fn stationary(&self) -> Result<&[Rational]> {
        self.stationary.as_deref().ok_or(Error::NotRegular)
    }

    pub fn avg_len(&self) -> Result<&Rational> {
        self.avg.as_ref().ok_or(Error::NotRegular)
    }
}

impl CodeTuple {
    pub fn new(
        k: usize,
        alphabet: Alphabet,
        entries: Vec<(TableId, CodeTable)>,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("code tuple needs at least one table".into()));
        }
        let domain: Vec<TableId> = entries.iter().map(|(id, _)| id.clone()).collect();
        let distinct: BTreeSet<&TableId> = domain.iter().collect();
        if distinct.len() != domain.len() {
            return Err(Error::Domain("table ids must be distinct".into()));
        }
        let tables: Vec<CodeTable> = entries.into_iter().map(|(_, t)| t).collect();
        for (id, table) in domain.iter().zip(&tables) {
            if table.f.len() != alphabet.len() || table.tau.len() != alphabet.len() {
                return Err(Error::Domain(alloc::format!(
                    "table {id} must define f and tau for all {} symbols",
                    alphabet.len()
                )));
            }
            for target in &table.tau {
                if !distinct.contains(target) {
                    return Err(Error::Domain(alloc::format!(
                        "table {id} transitions to {target}, which is not in the domain"
                    )));
                }
            }
        }
        Ok(CodeTuple {
            k,
            alphabet,
            domain,
            tables,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn domain(&self) -> &[TableId] {
        &self.domain
    }

    pub fn table_count(&self) -> usize {
        self.domain.len()
    }

    pub fn index_of(&self, id: &TableId) -> Result<usize> {
        self.domain
            .iter()
            .position(|d| d == id)
            .ok_or_else(|| Error::Domain(alloc::format!("no table {id} in the domain")))
    }

    pub fn table(&self, id: &TableId) -> Result<&CodeTable> {
        Ok(&self.tables[self.index_of(id)?])
    }

    pub fn table_at(&self, i: usize) -> &CodeTable {
        &self.tables[i]
    }

    pub fn max_codeword_len(&self) -> usize {
        self.tables
            .iter()
            .flat_map(|t| t.f.iter().map(BitString::len))
            .max()
            .unwrap_or(0)
    }

    fn check_symbols(&self, x: &[Symbol]) -> Result<()> {
        for &s in x {
            if s >= self.alphabet.len() {
                return Err(Error::Domain(alloc::format!("unknown symbol index {s}")));
            }
        }
        Ok(())
    }

    /// Codeword sequence emitted for `x` starting from table `i`.
    pub fn f_star(&self, i: &TableId, x: &[Symbol]) -> Result<BitString> {
        self.check_symbols(x)?;
        let mut cur = self.index_of(i)?;
        let mut out = BitString::empty();
        for &s in x {
            out = out.concat(&self.tables[cur].f[s]);
            cur = self.index_of(&self.tables[cur].tau[s])?;
        }
        Ok(out)
    }

    /// Table in use after encoding `x` starting from table `i`.
    pub fn tau_star(&self, i: &TableId, x: &[Symbol]) -> Result<TableId> {
        self.check_symbols(x)?;
        let mut cur = self.index_of(i)?;
        for &s in x {
            cur = self.index_of(&self.tables[cur].tau[s])?;
        }
        Ok(self.domain[cur].clone())
    }

    fn tau_index(&self, i: usize, s: Symbol) -> usize {
        self.domain
            .iter()
            .position(|d| d == &self.tables[i].tau[s])
            .expect("validated at construction")
    }

    /// For every table, the set of `k`-bit strings that can open the emitted
    /// stream from that table. Computed as the least fixpoint over prefixes
    /// of length at most `k`: the closure of {λ} under
    /// `w ↦ truncate_k(f_i(s) · w)` pulled back along the transition map.
    pub fn pref_sets(&self) -> BTreeMap<TableId, SubsetK> {
        self.pref_sets_k(self.k)
    }

    /// Same, at an explicit window width.
    pub fn pref_sets_k(&self, k: usize) -> BTreeMap<TableId, SubsetK> {
        let v = self.pref_closure(k);
        self.domain
            .iter()
            .zip(&v)
            .map(|(id, set)| {
                (
                    id.clone(),
                    SubsetK::new(k, set.iter().filter(|w| w.len() == k).cloned())
                        .expect("closure members never exceed k"),
                )
            })
            .collect()
    }

    fn pref_closure(&self, k: usize) -> Vec<BTreeSet<BitString>> {
        let n = self.tables.len();
        let mut v: Vec<BTreeSet<BitString>> = (0..n)
            .map(|_| {
                let mut s = BTreeSet::new();
                s.insert(BitString::empty());
                s
            })
            .collect();
        loop {
            let mut changed = false;
            for i in 0..n {
                let mut add = Vec::new();
                for s in 0..self.alphabet.len() {
                    let w = &self.tables[i].f[s];
                    let j = self.tau_index(i, s);
                    for t in &v[j] {
                        let c = w.concat(t);
                        let c = if c.len() > k {
                            c.take_prefix(k).expect("checked length")
                        } else {
                            c
                        };
                        if !v[i].contains(&c) {
                            add.push(c);
                        }
                    }
                }
                for c in add {
                    changed |= v[i].insert(c);
                }
            }
            if !changed {
                return v;
            }
        }
    }

    /// The `k`-bit continuations after `b` contributed by strictly longer
    /// codewords of table `i`.
    pub fn pref_bar(&self, i: &TableId, b: &BitString) -> Result<SubsetK> {
        let p = self.pref_sets();
        self.pref_bar_with(&p, i, b)
    }

    fn pref_bar_with(
        &self,
        p: &BTreeMap<TableId, SubsetK>,
        i: &TableId,
        b: &BitString,
    ) -> Result<SubsetK> {
        let idx = self.index_of(i)?;
        let mut members = BTreeSet::new();
        for s in 0..self.alphabet.len() {
            let fw = &self.tables[idx].f[s];
            if !b.is_strict_prefix_of(fw) {
                continue;
            }
            let r = b.residual(fw)?;
            let target = &self.tables[idx].tau[s];
            for t in p[target].members() {
                members.insert(r.concat(t).take_prefix(self.k)?);
            }
        }
        SubsetK::new(self.k, members)
    }

    /// Checks the two delay-decodability conditions and reports every
    /// violating table/symbol combination.
    pub fn is_k_dec(&self) -> KDecReport {
        let p = self.pref_sets();
        let mut report = KDecReport::default();
        for (i, id) in self.domain.iter().enumerate() {
            for s in 0..self.alphabet.len() {
                let bar = self
                    .pref_bar_with(&p, id, &self.tables[i].f[s])
                    .expect("table id comes from the domain");
                if !p[&self.tables[i].tau[s]].is_disjoint(&bar) {
                    report.cond_a.push((id.clone(), s));
                }
                for s2 in s + 1..self.alphabet.len() {
                    if self.tables[i].f[s] == self.tables[i].f[s2]
                        && !p[&self.tables[i].tau[s]].is_disjoint(&p[&self.tables[i].tau[s2]])
                    {
                        report.cond_b.push((id.clone(), s, s2));
                    }
                }
            }
        }
        report
    }

    /// Whether every table can keep emitting bits indefinitely.
    pub fn is_extendable(&self) -> bool {
        self.pref_sets_k(1).values().all(|p| !p.is_empty())
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.tables.len())
            .map(|i| {
                let mut outs: Vec<usize> = (0..self.alphabet.len())
                    .map(|s| self.tau_index(i, s))
                    .collect();
                outs.sort_unstable();
                outs.dedup();
                outs
            })
            .collect()
    }

    /// Tables reachable from every table. Non-empty exactly when the tuple is
    /// regular; the stationary distribution is supported here.
    pub fn reachable_core(&self) -> BTreeSet<TableId> {
        let adj = self.adjacency();
        let n = adj.len();
        let mut common = alloc::vec![true; n];
        for j in 0..n {
            let r = graph::reachable(&adj, j);
            for i in 0..n {
                common[i] &= r[i];
            }
        }
        (0..n)
            .filter(|&i| common[i])
            .map(|i| self.domain[i].clone())
            .collect()
    }

    pub fn is_irreducible(&self) -> bool {
        self.reachable_core().len() == self.domain.len()
    }

    /// Exact transition matrix, per-table lengths, core, and — when regular —
    /// the unique stationary distribution and average codeword length.
    pub fn markov_analyze(&self, mu: &SourceDist) -> Result<MarkovReport> {
        if mu.len() != self.alphabet.len() {
            return Err(Error::Domain(
                "distribution does not match the alphabet".into(),
            ));
        }
        let n = self.tables.len();
        let mut q = alloc::vec![alloc::vec![Rational::zero(); n]; n];
        for i in 0..n {
            for s in 0..self.alphabet.len() {
                let j = self.tau_index(i, s);
                q[i][j] += mu.prob(s);
            }
        }
        let l_tables: Vec<Rational> = (0..n)
            .map(|i| {
                (0..self.alphabet.len())
                    .map(|s| {
                        Rational::from_integer((self.tables[i].f[s].len() as i64).into())
                            * mu.prob(s)
                    })
                    .sum()
            })
            .collect();
        let core = self.reachable_core();
        let mut stationary = None;
        let mut avg = None;
        if !core.is_empty() {
            let core_idx: Vec<usize> = (0..n)
                .filter(|i| core.contains(&self.domain[*i]))
                .collect();
            let m = core_idx.len();
            // π Q = π restricted to the core, plus normalization.
            let mut rows = Vec::with_capacity(m + 1);
            let mut rhs = Vec::with_capacity(m + 1);
            for (cj, &j) in core_idx.iter().enumerate() {
                let mut row = alloc::vec![Rational::zero(); m];
                for (ci, &i) in core_idx.iter().enumerate() {
                    row[ci] = q[i][j].clone();
                }
                row[cj] -= Rational::one();
                rows.push(row);
                rhs.push(Rational::zero());
            }
            rows.push(alloc::vec![Rational::one(); m]);
            rhs.push(Rational::one());
            let sol = linalg::solve_unique(rows, rhs, m).ok_or_else(|| {
                Error::Internal("stationary system has no unique solution on the core".into())
            })?;
            let mut full = alloc::vec![Rational::zero(); n];
            for (ci, &i) in core_idx.iter().enumerate() {
                full[i] = sol[ci].clone();
            }
            let total: Rational = full
                .iter()
                .zip(&l_tables)
                .map(|(p, l)| p * l)
                .sum();
            stationary = Some(full);
            avg = Some(total);
        }
        Ok(MarkovReport {
            q,
            l_tables,
            core,
            stationary,
            avg,
        })
    }

    /// Restriction to the mutually reachable core; preserves the average
    /// codeword length and yields an irreducible tuple.
    pub fn core_restrict(&self) -> Result<CodeTuple> {
        let core = self.reachable_core();
        if core.is_empty() {
            return Err(Error::NotRegular);
        }
        let entries: Vec<(TableId, CodeTable)> = self
            .domain
            .iter()
            .zip(&self.tables)
            .filter(|(id, _)| core.contains(id))
            .map(|(id, t)| (id.clone(), t.clone()))
            .collect();
        for (_, t) in &entries {
            for target in &t.tau {
                if !core.contains(target) {
                    return Err(Error::Internal(
                        "reachable core is not closed under transitions".into(),
                    ));
                }
            }
        }
        CodeTuple::new(self.k, self.alphabet.clone(), entries)
    }

    /// Minimal non-empty transition-closed sets of table ids; these are the
    /// bottom components of the transition graph's condensation.
    pub fn minimal_closed_sets(&self) -> Vec<BTreeSet<TableId>> {
        graph::bottom_sccs(&self.adjacency())
            .into_iter()
            .map(|comp| comp.into_iter().map(|i| self.domain[i].clone()).collect())
            .collect()
    }

    /// Per-table potentials h: offsets making the average-length balance
    /// equation hold exactly at every table, anchored at zero on the first
    /// domain id. Differences of potentials drive length-non-increasing
    /// transition rewrites.
    pub fn potentials(&self, mu: &SourceDist) -> Result<BTreeMap<TableId, Rational>> {
        let report = self.markov_analyze(mu)?;
        let l = report.avg_len()?.clone();
        let n = self.tables.len();
        let mut rows = Vec::with_capacity(n + 1);
        let mut rhs = Vec::with_capacity(n + 1);
        for i in 0..n {
            let mut row = report.q[i].clone();
            row[i] -= Rational::one();
            rows.push(row);
            rhs.push(&l - &report.l_tables[i]);
        }
        let mut anchor = alloc::vec![Rational::zero(); n];
        anchor[0] = Rational::one();
        rows.push(anchor);
        rhs.push(Rational::zero());
        let sol = linalg::solve_unique(rows, rhs, n).ok_or_else(|| {
            Error::Internal("potential system is singular beyond its anchor freedom".into())
        })?;
        Ok(self
            .domain
            .iter()
            .cloned()
            .zip(sol)
            .collect())
    }

    /// Deterministic `k`-bit tail appended after a finished encoding so the
    /// decoder can resolve the final symbols: the smallest member of the
    /// final table's prefix set that no zero-length codeword can absorb.
    pub fn decoder_tail(&self, i: &TableId) -> Result<BitString> {
        let p = self.pref_sets();
        let idx = self.index_of(i)?;
        let own = &p[&self.domain[idx]];
        if own.is_empty() {
            return Err(Error::Flush(alloc::format!(
                "table {i} has an empty {}-bit prefix set",
                self.k
            )));
        }
        let mut unsafe_tails = BTreeSet::new();
        for s in 0..self.alphabet.len() {
            if self.tables[idx].f[s].is_empty() {
                unsafe_tails.extend(p[&self.tables[idx].tau[s]].members().iter().cloned());
            }
        }
        own.members()
            .iter()
            .find(|t| !unsafe_tails.contains(*t))
            .cloned()
            .ok_or_else(|| {
                Error::Flush(alloc::format!(
                    "every tail of table {i} re-enters a zero-length codeword"
                ))
            })
    }

    /// Decodes `c`, which must be an emitted stream followed by a `k`-bit
    /// tail from the final table's prefix set. At each step exactly one
    /// symbol's codeword is a prefix of the remaining input with its next
    /// `k` bits inside the successor's prefix set.
    pub fn decode(&self, i0: &TableId, c: &BitString) -> Result<Vec<Symbol>> {
        let p = self.pref_sets();
        let mut cur = self.index_of(i0)?;
        let mut pos = 0usize;
        let mut out = Vec::new();
        loop {
            let remaining = c.len() - pos;
            let mut matched: Option<Symbol> = None;
            for s in 0..self.alphabet.len() {
                let fw = &self.tables[cur].f[s];
                if fw.len() + self.k > remaining {
                    continue;
                }
                if (0..fw.len()).any(|b| fw.bit(b) != c.bit(pos + b)) {
                    continue;
                }
                let window = BitString::from_bits(
                    (0..self.k).map(|b| c.bit(pos + fw.len() + b)),
                );
                if !p[&self.tables[cur].tau[s]].contains(&window) {
                    continue;
                }
                if let Some(prev) = matched {
                    return Err(Error::InvalidCode(alloc::format!(
                        "symbols {} and {} both match at bit {pos}",
                        self.alphabet.symbol(prev),
                        self.alphabet.symbol(s)
                    )));
                }
                matched = Some(s);
            }
            match matched {
                Some(s) => {
                    pos += self.tables[cur].f[s].len();
                    cur = self.tau_index(cur, s);
                    out.push(s);
                }
                None => break,
            }
        }
        if c.len() - pos > self.k + self.max_codeword_len() {
            return Err(Error::CorruptInput { offset: pos });
        }
        Ok(out)
    }
}
