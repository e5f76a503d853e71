//! Implementations of the `delaycode` subcommands. Every function returns
//! the process exit code: 0 on success, 1 on semantic failure; parse
//! failures surface as [`CliError::Parse`] and exit 2.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use delaycode_core::bits::BitString;
use delaycode_core::codec;
use delaycode_core::codetuple::{Alphabet, CodeTuple, SourceDist, TableId};
use delaycode_core::num_bigint::BigUint;
use delaycode_core::num_traits::ToPrimitive;
use delaycode_core::orbit::{self, SubsetK};
use delaycode_core::phi::PhiMap;
use delaycode_core::rct::{ExpandedIndex, Rct};
use delaycode_core::reduce;
use delaycode_core::{Error, Rational};
use serde_json::Value;

use crate::json::{self, Kind};
use crate::stream::{self, StreamFile};
use crate::{guards_lifted, huffman, micro, CliError};

fn load_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Semantic(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// "85/24 (~3.541667)"
fn fr(r: &Rational) -> String {
    match r.to_f64() {
        Some(x) => format!("{r} (~{x:.6})"),
        None => format!("{r}"),
    }
}

fn resolve_dist(
    embedded: Option<SourceDist>,
    mu_path: &Option<PathBuf>,
    alphabet: &Alphabet,
) -> Result<Option<SourceDist>, CliError> {
    if let Some(path) = mu_path {
        let v = load_json(path)?;
        return Ok(Some(json::parse_dist_file(&v, alphabet)?));
    }
    Ok(embedded)
}

fn require_dist(
    embedded: Option<SourceDist>,
    mu_path: &Option<PathBuf>,
    alphabet: &Alphabet,
) -> Result<SourceDist, CliError> {
    resolve_dist(embedded, mu_path, alphabet)?.ok_or_else(|| {
        CliError::Semantic(
            "no distribution: embed a \"mu\" field in the file or pass --mu".into(),
        )
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OrbitMode {
    Count,
    CountRestricted,
    Enumerate,
    Verify,
}

pub fn cmd_orbits(k: usize, mode: OrbitMode) -> Result<i32, CliError> {
    match mode {
        OrbitMode::Count => {
            if k > 20 && !guards_lifted() {
                return Err(CliError::Semantic(format!(
                    "guard: a_{k} has on the order of 2^{} digits; set DELAYCODE_GUARD_OVERRIDE=1",
                    k.saturating_sub(3)
                )));
            }
            println!("a_{k} = {}", orbit::count_classes(k));
            if k <= 10 {
                let subsets = BigUint::from(1u32) << (1usize << k);
                println!("subsets 2^(2^{k}) = {subsets}");
                if k >= 1 {
                    let improved =
                        &subsets - (BigUint::from(1u32) << ((1usize << (k - 1)) + 1)) + 1u32;
                    println!("improved subset bound = {improved}");
                }
            }
            Ok(0)
        }
        OrbitMode::CountRestricted => {
            let v = orbit::count_classes_restricted(k).map_err(CliError::from)?;
            println!("a'_{k} = {v}");
            Ok(0)
        }
        OrbitMode::Enumerate => {
            let reps = if guards_lifted() {
                orbit::enumerate_classes_unchecked(k)
            } else {
                orbit::enumerate_classes(k).map_err(CliError::from)?
            };
            println!("{} classes for k={k}", reps.len());
            for r in &reps {
                println!("{r}");
            }
            Ok(0)
        }
        OrbitMode::Verify => {
            let limit = if guards_lifted() { 4 } else { 3 };
            if k > limit {
                return Err(CliError::Semantic(format!(
                    "guard: verify enumerates 2^(2^{k}) subsets; limit is k <= {limit}"
                )));
            }
            let universe = BitString::all_of_len(k);
            let mut groups: BTreeMap<SubsetK, u64> = BTreeMap::new();
            for v in 0u64..(1u64 << (1usize << k)) {
                let a = SubsetK::new(
                    k,
                    universe
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| (v >> i) & 1 == 1)
                        .map(|(_, b)| b.clone()),
                )
                .map_err(CliError::from)?;
                let w = orbit::canonicalize(&a);
                if w.psi.apply_set(&w.canon).map_err(CliError::from)? != a {
                    return Err(CliError::Semantic(format!(
                        "witness failure on {a}"
                    )));
                }
                *groups.entry(w.canon).or_insert(0) += 1;
            }
            let expected = orbit::count_classes(k);
            if BigUint::from(groups.len()) != expected {
                return Err(CliError::Semantic(format!(
                    "verify failed: {} classes found, recurrence says {expected}",
                    groups.len()
                )));
            }
            let reps = orbit::enumerate_classes_unchecked(k);
            if reps != groups.keys().cloned().collect::<Vec<_>>() {
                return Err(CliError::Semantic(
                    "verify failed: enumerated representatives disagree with grouping".into(),
                ));
            }
            println!("OK: {} classes, brute-force agrees", groups.len());
            Ok(0)
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum KindArg {
    Auto,
    CodeTuple,
    Rct,
}

fn effective_kind(v: &Value, kind: KindArg) -> Result<Kind, CliError> {
    match kind {
        KindArg::Auto => json::detect_kind(v),
        KindArg::CodeTuple => Ok(Kind::CodeTuple),
        KindArg::Rct => Ok(Kind::Rct),
    }
}

pub fn cmd_validate(path: &Path, kind: KindArg) -> Result<i32, CliError> {
    let v = load_json(path)?;
    match effective_kind(&v, kind)? {
        Kind::CodeTuple => {
            let (f, _) = json::parse_codetuple(&v)?;
            let ext = f.is_extendable();
            let dec = f.is_k_dec();
            let regular = !f.reachable_core().is_empty();
            println!("kind: code tuple (k={}, {} tables)", f.k(), f.table_count());
            println!("extendable: {ext}");
            println!("k_dec: {}", dec.ok());
            for (i, s) in &dec.cond_a {
                println!(
                    "  window collision after table {i}, symbol {}",
                    f.alphabet().symbol(*s)
                );
            }
            for (i, s, s2) in &dec.cond_b {
                println!(
                    "  shared codeword with overlapping windows at table {i}: {} vs {}",
                    f.alphabet().symbol(*s),
                    f.alphabet().symbol(*s2)
                );
            }
            println!("regular: {regular}");
            Ok(if ext && dec.ok() && regular { 0 } else { 1 })
        }
        Kind::Rct => {
            let (r, mu) = json::parse_rct(&v)?;
            let report = match &mu {
                Some(mu) => r.validate_with_dist(mu).map_err(CliError::from)?,
                None => r.validate(),
            };
            println!(
                "kind: reduced code tuple (k={}, {} tables)",
                r.k(),
                r.domain().len()
            );
            println!("compliant: {}", report.compliant);
            for (a, p) in &report.compliance_failures {
                println!("  table {a} has prefix set {p}");
            }
            println!("extendable: {}", report.extendable);
            println!("k_dec: {}", report.k_dec);
            for (a, s) in &report.k_dec_a {
                println!(
                    "  window collision after table {a}, symbol {}",
                    r.alphabet().symbol(*s)
                );
            }
            for (a, s, s2) in &report.k_dec_b {
                println!(
                    "  shared codeword with overlapping targets at table {a}: {} vs {}",
                    r.alphabet().symbol(*s),
                    r.alphabet().symbol(*s2)
                );
            }
            println!("regular: {}", report.regular);
            if let Some(l) = &report.avg_len {
                println!("average length = {}", fr(l));
            }
            Ok(if report.all_ok() { 0 } else { 1 })
        }
    }
}

pub fn cmd_analyze(
    path: &Path,
    mu_path: &Option<PathBuf>,
    show_potentials: bool,
) -> Result<i32, CliError> {
    let v = load_json(path)?;
    match json::detect_kind(&v)? {
        Kind::CodeTuple => {
            let (f, embedded) = json::parse_codetuple(&v)?;
            let mu = require_dist(embedded, mu_path, f.alphabet())?;
            let report = f.markov_analyze(&mu).map_err(CliError::from)?;
            println!("tables: {}", f.table_count());
            for (i, id) in f.domain().iter().enumerate() {
                let row: Vec<String> = report.q[i].iter().map(|q| q.to_string()).collect();
                println!("Q[{id}] = [{}]", row.join(", "));
            }
            for (i, id) in f.domain().iter().enumerate() {
                println!("L_{id} = {}", fr(&report.l_tables[i]));
            }
            if !report.is_regular() {
                println!("not regular: no table is reachable from every table");
                return Ok(1);
            }
            let pi = report.stationary().map_err(CliError::from)?;
            for (i, id) in f.domain().iter().enumerate() {
                println!("pi_{id} = {}", fr(&pi[i]));
            }
            println!(
                "L = {}",
                fr(report.avg_len().map_err(CliError::from)?)
            );
            if show_potentials {
                let h = f.potentials(&mu).map_err(CliError::from)?;
                for (id, v) in &h {
                    println!("h_{id} = {}", fr(v));
                }
            }
            Ok(0)
        }
        Kind::Rct => {
            let (r, embedded) = json::parse_rct(&v)?;
            let mu = require_dist(embedded, mu_path, r.alphabet())?;
            let report = r.validate_with_dist(&mu).map_err(CliError::from)?;
            println!("tables: {}", r.domain().len());
            for a in r.domain() {
                println!("prefix set of {a} = {}", r.pref_set_rct(a).map_err(CliError::from)?);
            }
            if !report.regular {
                println!("not regular: the direct realization has no unique stationary distribution");
                return Ok(1);
            }
            let l = report
                .avg_len
                .as_ref()
                .ok_or_else(|| CliError::Semantic("average length unavailable".into()))?;
            println!("L~ = {}", fr(l));
            if show_potentials {
                let h = r
                    .direct_realization()
                    .potentials(&mu)
                    .map_err(CliError::from)?;
                for (id, v) in &h {
                    println!("h_{id} = {}", fr(v));
                }
            }
            Ok(0)
        }
    }
}

pub fn cmd_reduce(
    path: &Path,
    mu_path: &Option<PathBuf>,
    out: &Option<PathBuf>,
    trace_out: &Option<PathBuf>,
) -> Result<i32, CliError> {
    let v = load_json(path)?;
    let (f, embedded) = json::parse_codetuple(&v)?;
    let mu = require_dist(embedded, mu_path, f.alphabet())?;
    let l_before = f
        .markov_analyze(&mu)
        .map_err(CliError::from)?
        .avg_len()
        .map_err(|_| CliError::Semantic("input tuple is not regular".into()))?
        .clone();
    let (rct, trace) = reduce::to_rct(&f, &mu).map_err(CliError::from)?;
    let l_after = delaycode_core::rct::avg_len(&rct, &mu).map_err(CliError::from)?;
    eprintln!(
        "reduced {} tables to {}; L before = {}, L~ after = {}",
        f.table_count(),
        rct.domain().len(),
        fr(&l_before),
        fr(&l_after)
    );
    if let Some(tp) = trace_out {
        let text = serde_json::to_string_pretty(&json::trace_to_json(&trace))
            .expect("trace serializes");
        fs::write(tp, text + "\n")
            .map_err(|e| CliError::Semantic(format!("{}: {e}", tp.display())))?;
    }
    let text = serde_json::to_string_pretty(&json::rct_to_json(&rct, Some(&mu)))
        .expect("machine serializes");
    write_output(out, &(text + "\n"))?;
    Ok(0)
}

fn parse_seed(r: &Rct, seed: &Option<String>) -> Result<ExpandedIndex, CliError> {
    match seed {
        Some(s) => ExpandedIndex::parse_label(r.k(), s)
            .map_err(|e| CliError::Parse(format!("seed: {e}"))),
        None => Ok(ExpandedIndex::new(
            r.domain()[0].clone(),
            PhiMap::identity(r.k()),
        )),
    }
}

pub fn cmd_expand(
    path: &Path,
    seed: &Option<String>,
    mu_path: &Option<PathBuf>,
    out: &Option<PathBuf>,
) -> Result<i32, CliError> {
    let v = load_json(path)?;
    let (r, embedded) = json::parse_rct(&v)?;
    let seed = parse_seed(&r, seed)?;
    let expanded = r.expand_minimal(&seed).map_err(CliError::from)?;
    let mu = resolve_dist(embedded, mu_path, r.alphabet())?;
    eprintln!(
        "expanded {} tables into a {}-table machine from seed {}",
        r.domain().len(),
        expanded.table_count(),
        seed
    );
    if let Some(mu) = &mu {
        let l_tilde = delaycode_core::rct::avg_len(&r, mu).map_err(CliError::from)?;
        let l = expanded
            .markov_analyze(mu)
            .map_err(CliError::from)?
            .avg_len()
            .map_err(CliError::from)?
            .clone();
        eprintln!("L~ = {}, expanded L = {}", fr(&l_tilde), fr(&l));
        if l != l_tilde {
            return Err(CliError::Semantic(
                "expansion changed the average length".into(),
            ));
        }
    }
    let text = serde_json::to_string_pretty(&json::codetuple_to_json(&expanded, mu.as_ref()))
        .expect("machine serializes");
    write_output(out, &(text + "\n"))?;
    Ok(0)
}

pub fn cmd_encode(
    path: &Path,
    seed: &Option<String>,
    input: &Option<PathBuf>,
    text: &Option<String>,
    out: &Option<PathBuf>,
) -> Result<i32, CliError> {
    let v = load_json(path)?;
    let (r, _) = json::parse_rct(&v)?;
    let seed = parse_seed(&r, seed)?;
    let payload = match (input, text) {
        (Some(p), None) => fs::read_to_string(p)
            .map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?,
        (None, Some(t)) => t.clone(),
        _ => {
            return Err(CliError::Semantic(
                "encode needs exactly one of --input or --text".into(),
            ))
        }
    };
    let symbols = r
        .alphabet()
        .seq_from_text(&payload)
        .map_err(|e| CliError::Parse(e.to_string()))?;
    let mut enc = codec::Encoder::new(&r, seed.clone()).map_err(CliError::from)?;
    let mut bits = BitString::empty();
    for &s in &symbols {
        bits = bits.concat(&enc.encode_symbol(s).map_err(CliError::from)?);
    }
    let tail = enc.flush_tail().map_err(CliError::from)?;
    let payload_bits = bits.concat(&tail);
    eprintln!(
        "encoded {} symbols into {} bits (+{} flush)",
        symbols.len(),
        enc.bits_emitted(),
        r.k()
    );
    let file = StreamFile {
        k: r.k(),
        start: seed,
        payload: payload_bits,
    };
    write_output(out, &stream::write_stream(&file))?;
    Ok(0)
}

pub fn cmd_decode(
    path: &Path,
    input: &Path,
    out: &Option<PathBuf>,
) -> Result<i32, CliError> {
    let v = load_json(path)?;
    let (r, _) = json::parse_rct(&v)?;
    let text = fs::read_to_string(input)
        .map_err(|e| CliError::Parse(format!("{}: {e}", input.display())))?;
    let file = stream::parse_stream(&text)?;
    if file.k != r.k() {
        return Err(CliError::Semantic(format!(
            "stream has k={}, machine has k={}",
            file.k,
            r.k()
        )));
    }
    let symbols = match codec::decode(&r, &file.start, &file.payload) {
        Ok(s) => s,
        Err(Error::CorruptInput { offset }) => {
            return Err(CliError::Semantic(format!(
                "corrupt stream: undecodable bits remain at offset {offset}"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    let mut rendered = r.alphabet().seq_to_text(&symbols);
    rendered.push('\n');
    write_output(out, &rendered)?;
    Ok(0)
}

pub fn cmd_micro_search(
    mu_path: &Path,
    max_len: usize,
    out: &Option<PathBuf>,
) -> Result<i32, CliError> {
    let v = load_json(mu_path)?;
    let obj = v
        .as_object()
        .ok_or_else(|| CliError::Parse("$: expected an object of fractions".into()))?;
    let names: Vec<String> = obj.keys().cloned().collect();
    let alphabet = Alphabet::new(names).map_err(|e| CliError::Parse(e.to_string()))?;
    let mu = json::parse_dist_file(&v, &alphabet)?;
    let (rct, l) = micro::micro_search(&alphabet, &mu, max_len, guards_lifted())?;
    let reference = huffman::huffman_avg_len(&mu);
    println!("minimum L~ = {}", fr(&l));
    println!("Huffman length = {}", fr(&reference));
    println!("matches Huffman: {}", l == reference);
    let text = serde_json::to_string_pretty(&json::rct_to_json(&rct, Some(&mu)))
        .expect("machine serializes");
    write_output(out, &(text + "\n"))?;
    Ok(0)
}

/// Quick built-in sanity run over the bundled worked examples.
pub fn cmd_selftest() -> Result<i32, CliError> {
    let check = |name: &str, ok: bool| -> Result<(), CliError> {
        println!("selftest: {name} ... {}", if ok { "ok" } else { "FAILED" });
        if ok {
            Ok(())
        } else {
            Err(CliError::Semantic(format!("selftest failed at {name}")))
        }
    };

    let phi101 = PhiMap::parse("101").map_err(CliError::from)?;
    check(
        "control-table application",
        phi101.apply(&BitString::parse("1001").unwrap()) == BitString::parse("0101").unwrap(),
    )?;
    check(
        "class counts",
        orbit::count_classes(7) == BigUint::from(64449908476890321u64),
    )?;

    let (f, mu) = fixtures::three_table_tuple();
    let report = f.markov_analyze(&mu).map_err(CliError::from)?;
    check(
        "exact stationary analysis",
        report.avg_len().map_err(CliError::from)? == &Rational::new(85.into(), 24.into()),
    )?;

    let r = fixtures::worked_rct();
    let start = ExpandedIndex::new(r.domain()[2].clone(), PhiMap::identity(2));
    let x = r.alphabet().seq_from_text("acdb").map_err(CliError::from)?;
    let bits = codec::encode(&r, &start, &x).map_err(CliError::from)?;
    check(
        "streaming encode",
        bits == BitString::parse("10111101").unwrap(),
    )?;
    let decoded = codec::decode(&r, &start, &BitString::parse("1011110100").unwrap())
        .map_err(CliError::from)?;
    check("streaming decode", decoded == x)?;

    let (rct, trace) = reduce::to_rct(&f, &mu).map_err(CliError::from)?;
    let l = delaycode_core::rct::avg_len(&rct, &mu).map_err(CliError::from)?;
    check(
        "reduction",
        rct.domain().len() == 3 && l == Rational::new(85.into(), 24.into()) && trace.monotone(),
    )?;
    println!("selftest: all checks passed");
    Ok(0)
}

/// In-code copies of the bundled example machines, for the self test.
pub mod fixtures {
    use super::*;
    use delaycode_core::codetuple::CodeTable;
    use delaycode_core::rct::RctTable;

    fn bs(s: &str) -> BitString {
        BitString::parse(s).unwrap()
    }

    fn set(xs: &[&str]) -> SubsetK {
        SubsetK::new(2, xs.iter().map(|s| bs(s))).unwrap()
    }

    pub fn three_table_tuple() -> (CodeTuple, SourceDist) {
        let alphabet = Alphabet::new(["a", "b", "c", "d"]).unwrap();
        let id = |s: &str| TableId::label(s);
        let table = |rows: &[(&str, &str)]| CodeTable {
            f: rows.iter().map(|(w, _)| bs(w)).collect(),
            tau: rows.iter().map(|(_, t)| id(t)).collect(),
        };
        let f = CodeTuple::new(
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
        .unwrap();
        (f, SourceDist::uniform(4).unwrap())
    }

    pub fn worked_rct() -> Rct {
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
}
