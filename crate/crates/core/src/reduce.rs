//! Reduction from a code tuple to a reduced code tuple of pairwise
//! inequivalent tables, without increasing the average codeword length.
//!
//! The pipeline is: restrict to the mutually reachable core; merge tables
//! whose prefix sets are identical by redirecting their incoming transitions
//! to the member with the smallest potential; re-index every surviving table
//! by its prefix set; then repeatedly pick an equivalent pair of indices,
//! redirect the whole class to its minimum-potential member, and restrict
//! again. The final reduced tuple keeps the codewords and the *pre-merge*
//! transition targets (as prefix-set values), so its prefix sets still equal
//! its indices. Every step's length change is recorded and checked exactly.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::codetuple::{CodeTable, CodeTuple, SourceDist, TableId};
use crate::error::{Error, Result};
use crate::orbit::{self, SubsetK};
use crate::rct::{Rct, RctTable};
use crate::Rational;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StepKind {
    CoreRestrict,
    Merge,
    Relabel,
    Finalize,
}

/// One pipeline event: what happened, which tables were folded into the
/// first entry of `merged`, the potential vector that justified it, the
/// exact length before and after, and whether the intermediate tuple is
/// still delay decodable (diagnostic only; intermediates are allowed to
/// lose decodability).
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub kind: StepKind,
    pub merged: Option<Vec<TableId>>,
    pub potentials: Option<BTreeMap<TableId, Rational>>,
    pub l_before: Rational,
    pub l_after: Rational,
    pub k_dec_after: bool,
}

#[derive(Clone, Debug, Default)]
pub struct ReductionTrace {
    pub steps: Vec<TraceStep>,
}

impl ReductionTrace {
    /// The length never increases across the recorded steps.
    pub fn monotone(&self) -> bool {
        self.steps.iter().all(|s| s.l_after <= s.l_before)
    }
}

fn avg(f: &CodeTuple, mu: &SourceDist) -> Result<Rational> {
    Ok(f.markov_analyze(mu)?.avg_len()?.clone())
}

fn push_step(
    trace: &mut ReductionTrace,
    kind: StepKind,
    merged: Option<Vec<TableId>>,
    potentials: Option<BTreeMap<TableId, Rational>>,
    l_before: Rational,
    l_after: Rational,
    after: &CodeTuple,
) {
    trace.steps.push(TraceStep {
        kind,
        merged,
        potentials,
        l_before,
        l_after,
        k_dec_after: after.is_k_dec().ok(),
    });
}

/// Redirects every transition whose target lies in `class` to `winner`.
fn redirect(f: &CodeTuple, class: &[TableId], winner: &TableId) -> Result<CodeTuple> {
    let entries: Vec<(TableId, CodeTable)> = f
        .domain()
        .iter()
        .map(|id| {
            let t = f.table(id).expect("id from the domain");
            let tau = t
                .tau
                .iter()
                .map(|target| {
                    if class.contains(target) {
                        winner.clone()
                    } else {
                        target.clone()
                    }
                })
                .collect();
            (id.clone(), CodeTable { f: t.f.clone(), tau })
        })
        .collect();
    CodeTuple::new(f.k(), f.alphabet().clone(), entries)
}

/// Minimum-potential member of `class`, ties broken by id order.
fn argmin_potential(
    h: &BTreeMap<TableId, Rational>,
    class: &[TableId],
) -> TableId {
    class
        .iter()
        .min_by(|a, b| h[*a].cmp(&h[*b]).then_with(|| a.cmp(b)))
        .expect("class is non-empty")
        .clone()
}

/// Merges tables with identical prefix sets and re-indexes every survivor by
/// its prefix set. The input must be regular; the output is irreducible,
/// indexed by distinct prefix-set values, and no longer on average.
pub fn relabel_by_prefsets(f: &CodeTuple, mu: &SourceDist) -> Result<CodeTuple> {
    let mut trace = ReductionTrace::default();
    relabel_core(f, mu, &mut trace)
}

fn relabel_core(
    f: &CodeTuple,
    mu: &SourceDist,
    trace: &mut ReductionTrace,
) -> Result<CodeTuple> {
    let l_start = avg(f, mu)?;
    let mut cur = f.core_restrict()?;
    push_step(
        trace,
        StepKind::CoreRestrict,
        None,
        None,
        l_start,
        avg(&cur, mu)?,
        &cur,
    );
    loop {
        let p = cur.pref_sets();
        let mut groups: BTreeMap<SubsetK, Vec<TableId>> = BTreeMap::new();
        for id in cur.domain() {
            groups.entry(p[id].clone()).or_default().push(id.clone());
        }
        let Some((_, class)) = groups.iter().find(|(_, ids)| ids.len() > 1) else {
            break;
        };
        let mut class = class.clone();
        class.sort();
        let l_before = avg(&cur, mu)?;
        let h = cur.potentials(mu)?;
        let winner = argmin_potential(&h, &class);
        let merged: Vec<TableId> = core::iter::once(winner.clone())
            .chain(class.iter().filter(|id| **id != winner).cloned())
            .collect();
        let redirected = redirect(&cur, &class, &winner)?;
        let next = redirected.core_restrict()?;
        if next.table_count() >= cur.table_count() {
            return Err(Error::Internal(
                "prefix-set merge failed to shrink the tuple".into(),
            ));
        }
        push_step(
            trace,
            StepKind::Merge,
            Some(merged),
            Some(h),
            l_before,
            avg(&next, mu)?,
            &next,
        );
        cur = next;
    }
    // Re-index by prefix set; injective now that all groups are singletons.
    let p = cur.pref_sets();
    let rename: BTreeMap<TableId, TableId> = cur
        .domain()
        .iter()
        .map(|id| (id.clone(), TableId::Subset(p[id].clone())))
        .collect();
    let entries: Vec<(TableId, CodeTable)> = cur
        .domain()
        .iter()
        .map(|id| {
            let t = cur.table(id).expect("id from the domain");
            let tau = t.tau.iter().map(|tg| rename[tg].clone()).collect();
            (rename[id].clone(), CodeTable { f: t.f.clone(), tau })
        })
        .collect();
    let l = avg(&cur, mu)?;
    let relabeled = CodeTuple::new(cur.k(), cur.alphabet().clone(), entries)?;
    if avg(&relabeled, mu)? != l {
        return Err(Error::Internal("re-indexing changed the average length".into()));
    }
    push_step(
        trace,
        StepKind::Relabel,
        None,
        None,
        l.clone(),
        l,
        &relabeled,
    );
    Ok(relabeled)
}

/// Redirects the whole equivalence class of `b` (within the domain) to its
/// minimum-potential member. The input must be irreducible with prefix-set
/// indices; `b` and `b2` are a witnessing equivalent pair. The result is
/// regular but usually reducible; restrict it afterwards.
pub fn merge_equivalent_step(
    f: &CodeTuple,
    mu: &SourceDist,
    b: &TableId,
    b2: &TableId,
) -> Result<CodeTuple> {
    if !f.is_irreducible() {
        return Err(Error::Domain("merge needs an irreducible tuple".into()));
    }
    if b == b2 {
        return Err(Error::Domain("merge needs two distinct tables".into()));
    }
    f.index_of(b)?;
    f.index_of(b2)?;
    let (Some(sb), Some(sb2)) = (b.subset(), b2.subset()) else {
        return Err(Error::Domain("merge needs prefix-set indices".into()));
    };
    if !orbit::equivalent(sb, sb2)? {
        return Err(Error::Domain(alloc::format!("{b} and {b2} are not equivalent")));
    }
    let class: Vec<TableId> = f
        .domain()
        .iter()
        .filter(|id| {
            id.subset()
                .map(|s| orbit::equivalent(s, sb).unwrap_or(false))
                .unwrap_or(false)
        })
        .cloned()
        .collect();
    let h = f.potentials(mu)?;
    let winner = argmin_potential(&h, &class);
    redirect(f, &class, &winner)
}

/// Full reduction: a reduced code tuple over pairwise inequivalent
/// prefix-set indices whose average length does not exceed the input's,
/// together with the step-by-step trace. The input must be regular,
/// extendable, and delay decodable.
pub fn to_rct(f: &CodeTuple, mu: &SourceDist) -> Result<(Rct, ReductionTrace)> {
    if f.reachable_core().is_empty() {
        return Err(Error::Domain("reduction needs a regular tuple".into()));
    }
    if !f.is_extendable() {
        return Err(Error::Domain("reduction needs an extendable tuple".into()));
    }
    if !f.is_k_dec().ok() {
        return Err(Error::Domain("reduction needs a delay-decodable tuple".into()));
    }
    let l_input = avg(f, mu)?;
    let mut trace = ReductionTrace::default();
    let base = relabel_core(f, mu, &mut trace)?;
    let mut cur = base.clone();
    for _ in 0..base.table_count() {
        let mut sorted: Vec<TableId> = cur.domain().to_vec();
        sorted.sort();
        let mut pair = None;
        'outer: for i in 0..sorted.len() {
            for j in i + 1..sorted.len() {
                let (Some(a), Some(b)) = (sorted[i].subset(), sorted[j].subset()) else {
                    continue;
                };
                if orbit::equivalent(a, b)? {
                    pair = Some((sorted[i].clone(), sorted[j].clone()));
                    break 'outer;
                }
            }
        }
        let Some((b, b2)) = pair else {
            break;
        };
        let l_before = avg(&cur, mu)?;
        let h = cur.potentials(mu)?;
        let class: Vec<TableId> = cur
            .domain()
            .iter()
            .filter(|id| {
                id.subset()
                    .map(|s| orbit::equivalent(s, b.subset().unwrap()).unwrap_or(false))
                    .unwrap_or(false)
            })
            .cloned()
            .collect();
        let winner = argmin_potential(&h, &class);
        let merged_ids: Vec<TableId> = core::iter::once(winner.clone())
            .chain(class.iter().filter(|x| **x != winner).cloned())
            .collect();
        let redirected = merge_equivalent_step(&cur, mu, &b, &b2)?;
        let next = redirected.core_restrict()?;
        if next.table_count() >= cur.table_count() {
            return Err(Error::Internal("class merge failed to shrink the tuple".into()));
        }
        push_step(
            &mut trace,
            StepKind::Merge,
            Some(merged_ids),
            Some(h),
            l_before,
            avg(&next, mu)?,
            &next,
        );
        cur = next;
    }

    // Assemble the reduced tuple: surviving indices, original codewords, and
    // the *pre-merge* transition targets as prefix-set values.
    let mut domain: Vec<SubsetK> = cur
        .domain()
        .iter()
        .map(|id| id.subset().expect("prefix-set indices").clone())
        .collect();
    domain.sort();
    let entries: Vec<(SubsetK, RctTable)> = domain
        .iter()
        .map(|a| {
            let t = base
                .table(&TableId::Subset(a.clone()))
                .expect("survivors come from the relabeled tuple");
            let tau = t
                .tau
                .iter()
                .map(|tg| tg.subset().expect("prefix-set indices").clone())
                .collect();
            (a.clone(), RctTable::new(t.f.clone(), tau))
        })
        .collect();
    let rct = Rct::new(f.k(), f.alphabet().clone(), entries)?;
    let report = rct.validate_with_dist(mu)?;
    if !report.all_ok() {
        return Err(Error::Internal(alloc::format!(
            "reduction produced an invalid tuple: compliant={} extendable={} k_dec={} regular={}",
            report.compliant,
            report.extendable,
            report.k_dec,
            report.regular
        )));
    }
    let l_final = report.avg_len.clone().ok_or(Error::NotRegular)?;
    if l_final > l_input {
        return Err(Error::Internal("reduction increased the average length".into()));
    }
    let k_dec_after = report.k_dec;
    trace.steps.push(TraceStep {
        kind: StepKind::Finalize,
        merged: None,
        potentials: None,
        l_before: avg(&cur, mu)?,
        l_after: l_final,
        k_dec_after,
    });
    if !trace.monotone() {
        return Err(Error::Internal("trace is not monotone".into()));
    }
    Ok((rct, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::codetuple::Alphabet;
    use crate::phi::PhiMap;
    use crate::rct::ExpandedIndex;
    use alloc::vec;

    fn bs(s: &str) -> BitString {
        BitString::parse(s).unwrap()
    }

    fn id(s: &str) -> TableId {
        TableId::label(s)
    }

    fn table(rows: &[(&str, &str)]) -> CodeTable {
        CodeTable {
            f: rows.iter().map(|(w, _)| bs(w)).collect(),
            tau: rows.iter().map(|(_, t)| id(t)).collect(),
        }
    }

    fn three_table_example() -> CodeTuple {
        let alphabet = Alphabet::new(["a", "b", "c", "d"]).unwrap();
        CodeTuple::new(
            2,
            alphabet,
            vec![
                (
                    id("0"),
                    table(&[("01", "0"), ("10", "1"), ("0100", "0"), ("01", "2")]),
                ),
                (
                    id("1"),
                    table(&[("00", "1"), ("", "0"), ("00111", "1"), ("00111", "2")]),
                ),
                (
                    id("2"),
                    table(&[("1100", "1"), ("1110", "2"), ("111000", "2"), ("110", "2")]),
                ),
            ],
        )
        .unwrap()
    }

    fn mirror_pair() -> CodeTuple {
        let alphabet = Alphabet::new(["a", "b"]).unwrap();
        CodeTuple::new(
            1,
            alphabet,
            vec![
                (id("0"), table(&[("00", "0"), ("01", "1")])),
                (id("1"), table(&[("11", "1"), ("10", "0")])),
            ],
        )
        .unwrap()
    }

    fn subset(k: usize, xs: &[&str]) -> SubsetK {
        SubsetK::new(k, xs.iter().map(|s| bs(s))).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn relabel_reindexes_distinct_prefix_sets() {
        let f = three_table_example();
        let mu = SourceDist::uniform(4).unwrap();
        let relabeled = relabel_by_prefsets(&f, &mu).unwrap();
        let want: Vec<TableId> = vec![
            TableId::Subset(subset(2, &["01", "10"])),
            TableId::Subset(subset(2, &["00", "01", "10"])),
            TableId::Subset(subset(2, &["11"])),
        ];
        assert_eq!(relabeled.domain(), &want[..]);
        assert_eq!(avg(&relabeled, &mu).unwrap(), q(85, 24));
        // Transition structure is preserved under the renaming.
        let t0 = relabeled.table(&want[0]).unwrap();
        assert_eq!(t0.tau, vec![want[0].clone(), want[1].clone(), want[0].clone(), want[2].clone()]);
    }

    #[test]
    fn relabel_merges_duplicate_tables() {
        // Clone table 1 as a fourth table and route one edge through the
        // clone; the merge folds it back without touching the length.
        let alphabet = Alphabet::new(["a", "b", "c", "d"]).unwrap();
        let f = CodeTuple::new(
            2,
            alphabet,
            vec![
                (
                    id("0"),
                    table(&[("01", "0"), ("10", "3"), ("0100", "0"), ("01", "2")]),
                ),
                (
                    id("1"),
                    table(&[("00", "1"), ("", "0"), ("00111", "1"), ("00111", "2")]),
                ),
                (
                    id("2"),
                    table(&[("1100", "1"), ("1110", "2"), ("111000", "2"), ("110", "2")]),
                ),
                (
                    id("3"),
                    table(&[("00", "1"), ("", "0"), ("00111", "1"), ("00111", "2")]),
                ),
            ],
        )
        .unwrap();
        let mu = SourceDist::uniform(4).unwrap();
        let relabeled = relabel_by_prefsets(&f, &mu).unwrap();
        assert_eq!(relabeled.table_count(), 3);
        assert_eq!(avg(&relabeled, &mu).unwrap(), q(85, 24));
    }

    #[test]
    fn merge_equivalent_pair_with_tie() {
        let mu = SourceDist::new(vec![q(1, 2), q(1, 2)]).unwrap();
        let base = relabel_by_prefsets(&mirror_pair(), &mu).unwrap();
        let b = TableId::Subset(subset(1, &["0"]));
        let b2 = TableId::Subset(subset(1, &["1"]));
        assert_eq!(base.domain(), &[b.clone(), b2.clone()]);
        // Symmetric potentials tie; the smaller label wins.
        let merged = merge_equivalent_step(&base, &mu, &b, &b2).unwrap();
        let t0 = merged.table(&b).unwrap();
        assert_eq!(t0.tau, vec![b.clone(), b.clone()]);
        let restricted = merged.core_restrict().unwrap();
        assert_eq!(restricted.domain(), &[b.clone()]);
        assert_eq!(avg(&restricted, &mu).unwrap(), q(2, 1));

        // A stale partner that is not in the domain is rejected.
        let gone = TableId::Subset(subset(1, &["0", "1"]));
        assert!(merge_equivalent_step(&restricted, &mu, &b, &gone).is_err());
        // Label indices are rejected.
        assert!(merge_equivalent_step(&mirror_pair(), &mu, &id("0"), &id("1")).is_err());
    }

    #[test]
    fn to_rct_on_three_table_example() {
        let f = three_table_example();
        let mu = SourceDist::uniform(4).unwrap();
        let (rct, trace) = to_rct(&f, &mu).unwrap();
        // Three tables of sizes 2, 3, 1: pairwise inequivalent, no merging.
        assert_eq!(rct.domain().len(), 3);
        assert_eq!(
            rct.domain(),
            &[
                subset(2, &["11"]),
                subset(2, &["01", "10"]),
                subset(2, &["00", "01", "10"]),
            ]
        );
        let report = rct.validate_with_dist(&mu).unwrap();
        assert!(report.all_ok());
        assert_eq!(report.avg_len.unwrap(), q(85, 24));
        assert!(trace.monotone());
        assert!(!trace.steps.is_empty());
        // Expansion of the result has the same exact length.
        let seed = ExpandedIndex::new(rct.domain()[0].clone(), PhiMap::identity(2));
        let expanded = rct.expand_minimal(&seed).unwrap();
        assert_eq!(
            expanded.markov_analyze(&mu).unwrap().avg_len().unwrap(),
            &q(85, 24)
        );
    }

    #[test]
    fn to_rct_merges_mirror_pair() {
        let f = mirror_pair();
        let mu = SourceDist::new(vec![q(1, 2), q(1, 2)]).unwrap();
        let l_before = avg(&f, &mu).unwrap();
        let (rct, trace) = to_rct(&f, &mu).unwrap();
        assert_eq!(rct.domain(), &[subset(1, &["0"])]);
        let report = rct.validate_with_dist(&mu).unwrap();
        assert!(report.all_ok());
        assert_eq!(report.avg_len.unwrap(), l_before);
        assert!(trace.monotone());
        // The surviving table keeps its pre-merge transition targets.
        let t = rct.table(&subset(1, &["0"])).unwrap();
        assert_eq!(t.tau, vec![subset(1, &["0"]), subset(1, &["1"])]);
        assert!(trace
            .steps
            .iter()
            .any(|s| s.kind == StepKind::Merge && s.potentials.is_some()));
    }

    #[test]
    fn to_rct_fixed_point_through_expansion() {
        let r = crate::rct::tests::worked_rct();
        let mu = SourceDist::uniform(4).unwrap();
        let l_tilde = crate::rct::avg_len(&r, &mu).unwrap();
        let seed = ExpandedIndex::new(r.domain()[2].clone(), PhiMap::identity(2));
        let expanded = r.expand_minimal(&seed).unwrap();
        let (again, trace) = to_rct(&expanded, &mu).unwrap();
        assert_eq!(again.domain().len(), 3);
        assert_eq!(crate::rct::avg_len(&again, &mu).unwrap(), l_tilde);
        assert!(trace.monotone());
        // Reducing the expansion once more changes neither the domain nor
        // the length.
        let seed2 = ExpandedIndex::new(again.domain()[0].clone(), PhiMap::identity(2));
        let (third, _) = to_rct(&again.expand_minimal(&seed2).unwrap(), &mu).unwrap();
        assert_eq!(third.domain(), again.domain());
        assert_eq!(crate::rct::avg_len(&third, &mu).unwrap(), l_tilde);
    }

    #[test]
    fn to_rct_rejects_bad_inputs() {
        let mu = SourceDist::new(vec![q(1, 2), q(1, 2)]).unwrap();
        // Not delay decodable: identical codewords, overlapping windows.
        let alphabet = Alphabet::new(["a", "b"]).unwrap();
        let f = CodeTuple::new(
            1,
            alphabet.clone(),
            vec![(id("0"), table(&[("0", "0"), ("0", "0")]))],
        )
        .unwrap();
        assert!(to_rct(&f, &mu).is_err());
        // Not extendable.
        let f = CodeTuple::new(
            1,
            alphabet.clone(),
            vec![(id("0"), table(&[("", "0"), ("", "0")]))],
        )
        .unwrap();
        assert!(to_rct(&f, &mu).is_err());
        // Not regular.
        let f = CodeTuple::new(
            1,
            alphabet,
            vec![
                (id("0"), table(&[("0", "0"), ("1", "0")])),
                (id("1"), table(&[("0", "1"), ("1", "1")])),
            ],
        )
        .unwrap();
        assert!(to_rct(&f, &mu).is_err());
    }
}
