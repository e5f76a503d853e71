//! Bounded exhaustive search for the best one-bit-delay reduced code tuple.
//!
//! With k = 1 there are only two usable table classes: the singleton subsets
//! and the full set {0, 1}. Up to the global bit-flip symmetry the domain can
//! be fixed to subsets of [{0}, {0,1}], so the search enumerates, per table,
//! every per-symbol assignment of a codeword (up to the length bound) and a
//! transition target, keeps the cheapest candidate per transition pattern,
//! and then combines tables, filtering by compliance, decodability, and
//! regularity. The resulting minimum average length is compared against the
//! Huffman optimum by the caller.

use delaycode_core::bits::BitString;
use delaycode_core::codetuple::{Alphabet, SourceDist};
use delaycode_core::orbit::SubsetK;
use delaycode_core::rct::{avg_len, Rct, RctTable};
use delaycode_core::Rational;
use std::collections::BTreeMap;

use crate::CliError;

/// Subsets of {0, 1} as two-bit masks.
const S0: u8 = 0b01;
const S01: u8 = 0b11;

fn mask_to_subset(mask: u8) -> SubsetK {
    let mut members = Vec::new();
    if mask & 0b01 != 0 {
        members.push(BitString::parse("0").unwrap());
    }
    if mask & 0b10 != 0 {
        members.push(BitString::parse("1").unwrap());
    }
    SubsetK::new(1, members).unwrap()
}

struct Candidate {
    rows: Vec<(usize, u8)>,
    len_sum: Rational,
}

/// Per-symbol codeword/target assignments for one table, filtered by the
/// per-table validity conditions and reduced to the cheapest candidate per
/// transition pattern.
fn table_candidates(
    a_mask: u8,
    targets: &[u8],
    words: &[BitString],
    mu: &SourceDist,
) -> BTreeMap<Vec<u8>, Candidate> {
    let nsym = mu.len();
    let options = words.len() * targets.len();
    let mut best: BTreeMap<Vec<u8>, Candidate> = BTreeMap::new();
    let total = options.pow(nsym as u32);
    for combo in 0..total {
        let mut c = combo;
        let mut rows = Vec::with_capacity(nsym);
        for _ in 0..nsym {
            let opt = c % options;
            c /= options;
            rows.push((opt / targets.len(), targets[opt % targets.len()]));
        }
        // Compliance: the union of one-step openings equals the index.
        let mut p = 0u8;
        for &(w, t) in &rows {
            p |= if words[w].is_empty() {
                t
            } else {
                1 << words[w].bit(0)
            };
        }
        if p != a_mask {
            continue;
        }
        // Equal codewords need disjoint targets.
        let mut ok = true;
        'pairs: for s in 0..nsym {
            for s2 in s + 1..nsym {
                if words[rows[s].0] == words[rows[s2].0] && rows[s].1 & rows[s2].1 != 0 {
                    ok = false;
                    break 'pairs;
                }
            }
        }
        if !ok {
            continue;
        }
        // A target may not meet the window opened by a longer codeword.
        for s in 0..nsym {
            let w = &words[rows[s].0];
            let mut bar = 0u8;
            for &(w2, _) in &rows {
                if w.is_strict_prefix_of(&words[w2]) {
                    bar |= 1 << words[w2].bit(w.len());
                }
            }
            if rows[s].1 & bar != 0 {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let len_sum: Rational = (0..nsym)
            .map(|s| Rational::from_integer((words[rows[s].0].len() as i64).into()) * mu.prob(s))
            .sum();
        // Transition pattern: which domain class each symbol lands in.
        let pattern: Vec<u8> = rows
            .iter()
            .map(|&(_, t)| if t == S01 { S01 } else { S0 })
            .collect();
        match best.get(&pattern) {
            Some(prev) if prev.len_sum <= len_sum => {}
            _ => {
                best.insert(pattern, Candidate { rows, len_sum });
            }
        }
    }
    best
}

/// Exhaustive one-bit-delay search. Bounds: at most three source symbols and
/// codewords of at most four bits, unless the guards are lifted.
pub fn micro_search(
    alphabet: &Alphabet,
    mu: &SourceDist,
    max_len: usize,
    lift_guards: bool,
) -> Result<(Rct, Rational), CliError> {
    if alphabet.len() != mu.len() {
        return Err(CliError::Semantic(
            "distribution does not match the alphabet".into(),
        ));
    }
    if !lift_guards {
        if mu.len() > 3 {
            return Err(CliError::Semantic(format!(
                "micro-search guard: at most 3 symbols (got {})",
                mu.len()
            )));
        }
        if max_len > 4 {
            return Err(CliError::Semantic(format!(
                "micro-search guard: codewords of at most 4 bits (got {max_len})"
            )));
        }
    }
    let words = BitString::all_up_to_len(max_len);
    let domains: [&[u8]; 3] = [&[S0], &[S01], &[S0, S01]];
    let mut best: Option<(Rct, Rational)> = None;
    for domain in domains {
        let targets: Vec<u8> = {
            let mut t = Vec::new();
            if domain.contains(&S0) {
                t.push(0b01);
                t.push(0b10);
            }
            if domain.contains(&S01) {
                t.push(S01);
            }
            t
        };
        let per_table: Vec<BTreeMap<Vec<u8>, Candidate>> = domain
            .iter()
            .map(|&a| table_candidates(a, &targets, &words, mu))
            .collect();
        if per_table.iter().any(BTreeMap::is_empty) {
            continue;
        }
        // Every combination of one candidate per table.
        let picks: Vec<Vec<(&Vec<u8>, &Candidate)>> = per_table
            .iter()
            .map(|m| m.iter().collect())
            .collect();
        let mut counters = vec![0usize; domain.len()];
        loop {
            let assignment: Vec<&Candidate> = counters
                .iter()
                .zip(&picks)
                .map(|(&c, p)| p[c].1)
                .collect();
            let entries: Vec<(SubsetK, RctTable)> = domain
                .iter()
                .zip(&assignment)
                .map(|(&a, cand)| {
                    let f = cand.rows.iter().map(|&(w, _)| words[w].clone()).collect();
                    let tau = cand.rows.iter().map(|&(_, t)| mask_to_subset(t)).collect();
                    (mask_to_subset(a), RctTable::new(f, tau))
                })
                .collect();
            let rct = Rct::new(1, alphabet.clone(), entries)
                .map_err(|e| CliError::Semantic(e.to_string()))?;
            if rct.validate().all_ok() {
                if let Ok(l) = avg_len(&rct, mu) {
                    if best.as_ref().map(|(_, bl)| &l < bl).unwrap_or(true) {
                        best = Some((rct, l));
                    }
                }
            }
            // Advance the mixed-radix counter.
            let mut i = 0;
            loop {
                if i == counters.len() {
                    break;
                }
                counters[i] += 1;
                if counters[i] < picks[i].len() {
                    break;
                }
                counters[i] = 0;
                i += 1;
            }
            if i == counters.len() {
                break;
            }
        }
    }
    best.ok_or_else(|| {
        CliError::Semantic("no valid one-bit-delay machine within the bounds".into())
    })
}
