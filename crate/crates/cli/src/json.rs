//! JSON file formats for code tuples, reduced code tuples, distributions,
//! and reduction traces.
//!
//! Probabilities are exact `[numerator, denominator]` pairs (integers or
//! decimal strings for big values); floating-point numbers are rejected.
//! Table ids are strings for opaque labels and sorted arrays of k-bit
//! strings for subset indices. The empty codeword is the empty string.

use std::collections::BTreeMap;

use delaycode_core::bits::{to_ascii, BitString};
use delaycode_core::codetuple::{Alphabet, CodeTable, CodeTuple, SourceDist, TableId};
use delaycode_core::num_bigint::BigInt;
use delaycode_core::orbit::SubsetK;
use delaycode_core::phi::PhiMap;
use delaycode_core::rct::{Rct, RctTable};
use delaycode_core::reduce::{ReductionTrace, StepKind};
use delaycode_core::Rational;
use serde_json::{json, Map, Value};

use crate::CliError;

fn parse_err(path: &str, msg: &str) -> CliError {
    CliError::Parse(format!("{path}: {msg}"))
}

fn as_object<'v>(v: &'v Value, path: &str) -> Result<&'v Map<String, Value>, CliError> {
    v.as_object()
        .ok_or_else(|| parse_err(path, "expected an object"))
}

fn as_array<'v>(v: &'v Value, path: &str) -> Result<&'v Vec<Value>, CliError> {
    v.as_array()
        .ok_or_else(|| parse_err(path, "expected an array"))
}

fn as_str<'v>(v: &'v Value, path: &str) -> Result<&'v str, CliError> {
    v.as_str()
        .ok_or_else(|| parse_err(path, "expected a string"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize, CliError> {
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| parse_err(path, "expected a non-negative integer"))
}

fn get<'v>(m: &'v Map<String, Value>, key: &str, path: &str) -> Result<&'v Value, CliError> {
    m.get(key)
        .ok_or_else(|| parse_err(path, &format!("missing field {key:?}")))
}

fn parse_bigint(v: &Value, path: &str) -> Result<BigInt, CliError> {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                return Err(parse_err(
                    path,
                    "decimal numbers are rejected; use [numerator, denominator]",
                ));
            }
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(parse_err(path, "integer out of range; use a string"))
            }
        }
        Value::String(s) => s
            .parse::<BigInt>()
            .map_err(|_| parse_err(path, "expected an integer")),
        _ => Err(parse_err(path, "expected an integer or integer string")),
    }
}

fn parse_fraction(v: &Value, path: &str) -> Result<Rational, CliError> {
    let arr = as_array(v, path)?;
    if arr.len() != 2 {
        return Err(parse_err(path, "expected [numerator, denominator]"));
    }
    let num = parse_bigint(&arr[0], &format!("{path}[0]"))?;
    let den = parse_bigint(&arr[1], &format!("{path}[1]"))?;
    if den == BigInt::from(0) {
        return Err(parse_err(path, "denominator must be non-zero"));
    }
    Ok(Rational::new(num, den))
}

fn bits(v: &Value, path: &str) -> Result<BitString, CliError> {
    BitString::parse(as_str(v, path)?).map_err(|e| parse_err(path, &e.to_string()))
}

fn parse_subset(v: &Value, k: usize, path: &str) -> Result<SubsetK, CliError> {
    let arr = as_array(v, path)?;
    let members: Result<Vec<BitString>, CliError> = arr
        .iter()
        .enumerate()
        .map(|(i, m)| bits(m, &format!("{path}[{i}]")))
        .collect();
    SubsetK::new(k, members?).map_err(|e| parse_err(path, &e.to_string()))
}

fn parse_table_id(v: &Value, k: usize, path: &str) -> Result<TableId, CliError> {
    match v {
        Value::String(s) => Ok(TableId::Label(s.clone())),
        Value::Array(_) => Ok(TableId::Subset(parse_subset(v, k, path)?)),
        _ => Err(parse_err(path, "expected a label string or a subset array")),
    }
}

fn parse_alphabet(m: &Map<String, Value>, path: &str) -> Result<Alphabet, CliError> {
    let arr = as_array(get(m, "alphabet", path)?, &format!("{path}.alphabet"))?;
    let symbols: Result<Vec<&str>, CliError> = arr
        .iter()
        .enumerate()
        .map(|(i, s)| as_str(s, &format!("{path}.alphabet[{i}]")))
        .collect();
    Alphabet::new(symbols?).map_err(|e| parse_err(&format!("{path}.alphabet"), &e.to_string()))
}

/// Parses a `{"sym": [num, den], ...}` object against an alphabet.
pub fn parse_dist(v: &Value, alphabet: &Alphabet, path: &str) -> Result<SourceDist, CliError> {
    let m = as_object(v, path)?;
    let mut probs = vec![None; alphabet.len()];
    for (key, val) in m {
        let s = alphabet
            .index(key)
            .ok_or_else(|| parse_err(path, &format!("unknown symbol {key:?}")))?;
        probs[s] = Some(parse_fraction(val, &format!("{path}.{key}"))?);
    }
    let probs: Result<Vec<Rational>, CliError> = probs
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| parse_err(path, &format!("missing symbol {:?}", alphabet.symbol(i)))))
        .collect();
    SourceDist::new(probs?).map_err(|e| parse_err(path, &e.to_string()))
}

/// Which machine description a file holds.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Kind {
    CodeTuple,
    Rct,
}

/// A file is a reduced code tuple when its tables carry an "A" index.
pub fn detect_kind(v: &Value) -> Result<Kind, CliError> {
    let m = as_object(v, "$")?;
    let tables = as_array(get(m, "tables", "$")?, "$.tables")?;
    let Some(first) = tables.first() else {
        return Err(parse_err("$.tables", "needs at least one table"));
    };
    let t = as_object(first, "$.tables[0]")?;
    if t.contains_key("A") {
        Ok(Kind::Rct)
    } else if t.contains_key("id") {
        Ok(Kind::CodeTuple)
    } else {
        Err(parse_err("$.tables[0]", "expected an \"id\" or \"A\" field"))
    }
}

fn per_symbol<'v>(
    m: &'v Map<String, Value>,
    field: &str,
    alphabet: &Alphabet,
    path: &str,
) -> Result<Vec<&'v Value>, CliError> {
    let obj = as_object(get(m, field, path)?, &format!("{path}.{field}"))?;
    let mut out = Vec::with_capacity(alphabet.len());
    for i in 0..alphabet.len() {
        let name = alphabet.symbol(i);
        out.push(obj.get(name).ok_or_else(|| {
            parse_err(&format!("{path}.{field}"), &format!("missing symbol {name:?}"))
        })?);
    }
    for key in obj.keys() {
        if alphabet.index(key).is_none() {
            return Err(parse_err(
                &format!("{path}.{field}"),
                &format!("unknown symbol {key:?}"),
            ));
        }
    }
    Ok(out)
}

/// Parses a code-tuple file; returns the machine and the embedded
/// distribution when present.
pub fn parse_codetuple(v: &Value) -> Result<(CodeTuple, Option<SourceDist>), CliError> {
    let m = as_object(v, "$")?;
    let k = as_usize(get(m, "k", "$")?, "$.k")?;
    let alphabet = parse_alphabet(m, "$")?;
    let tables = as_array(get(m, "tables", "$")?, "$.tables")?;
    let mut entries = Vec::with_capacity(tables.len());
    for (ti, tv) in tables.iter().enumerate() {
        let path = format!("$.tables[{ti}]");
        let t = as_object(tv, &path)?;
        let id = parse_table_id(get(t, "id", &path)?, k, &format!("{path}.id"))?;
        let f_vals = per_symbol(t, "f", &alphabet, &path)?;
        let tau_vals = per_symbol(t, "tau", &alphabet, &path)?;
        let mut f = Vec::with_capacity(alphabet.len());
        let mut tau = Vec::with_capacity(alphabet.len());
        for s in 0..alphabet.len() {
            f.push(bits(f_vals[s], &format!("{path}.f.{}", alphabet.symbol(s)))?);
            tau.push(parse_table_id(
                tau_vals[s],
                k,
                &format!("{path}.tau.{}", alphabet.symbol(s)),
            )?);
        }
        entries.push((id, CodeTable { f, tau }));
    }
    let mu = match m.get("mu") {
        Some(v) => Some(parse_dist(v, &alphabet, "$.mu")?),
        None => None,
    };
    let tuple = CodeTuple::new(k, alphabet, entries)
        .map_err(|e| parse_err("$", &e.to_string()))?;
    Ok((tuple, mu))
}

/// Parses a reduced-code-tuple file.
pub fn parse_rct(v: &Value) -> Result<(Rct, Option<SourceDist>), CliError> {
    let m = as_object(v, "$")?;
    let k = as_usize(get(m, "k", "$")?, "$.k")?;
    let alphabet = parse_alphabet(m, "$")?;
    let tables = as_array(get(m, "tables", "$")?, "$.tables")?;
    let mut entries = Vec::with_capacity(tables.len());
    for (ti, tv) in tables.iter().enumerate() {
        let path = format!("$.tables[{ti}]");
        let t = as_object(tv, &path)?;
        let a = parse_subset(get(t, "A", &path)?, k, &format!("{path}.A"))?;
        let f_vals = per_symbol(t, "f", &alphabet, &path)?;
        let tau_vals = per_symbol(t, "tau", &alphabet, &path)?;
        let mut f = Vec::with_capacity(alphabet.len());
        let mut tau = Vec::with_capacity(alphabet.len());
        for s in 0..alphabet.len() {
            f.push(bits(f_vals[s], &format!("{path}.f.{}", alphabet.symbol(s)))?);
            tau.push(parse_subset(
                tau_vals[s],
                k,
                &format!("{path}.tau.{}", alphabet.symbol(s)),
            )?);
        }
        let mut table = RctTable::new(f, tau);
        if let Some(psi_v) = t.get("psi") {
            let psi_obj = as_object(psi_v, &format!("{path}.psi"))?;
            for (key, val) in psi_obj {
                let s = alphabet
                    .index(key)
                    .ok_or_else(|| parse_err(&format!("{path}.psi"), &format!("unknown symbol {key:?}")))?;
                let p = PhiMap::parse(as_str(val, &format!("{path}.psi.{key}"))?)
                    .map_err(|e| parse_err(&format!("{path}.psi.{key}"), &e.to_string()))?;
                table.psi[s] = Some(p);
            }
        }
        entries.push((a, table));
    }
    let mu = match m.get("mu") {
        Some(v) => Some(parse_dist(v, &alphabet, "$.mu")?),
        None => None,
    };
    let rct = Rct::new(k, alphabet, entries).map_err(|e| parse_err("$", &e.to_string()))?;
    Ok((rct, mu))
}

fn fraction_json(r: &Rational) -> Value {
    let to_value = |b: &BigInt| -> Value {
        if let Ok(i) = i64::try_from(b.clone()) {
            json!(i)
        } else {
            json!(b.to_string())
        }
    };
    Value::Array(vec![to_value(r.numer()), to_value(r.denom())])
}

fn subset_json(a: &SubsetK) -> Value {
    Value::Array(a.members().iter().map(|m| json!(to_ascii(m))).collect())
}

fn table_id_json(id: &TableId) -> Value {
    match id {
        TableId::Label(s) => json!(s),
        TableId::Subset(a) => subset_json(a),
    }
}

fn dist_json(alphabet: &Alphabet, mu: &SourceDist) -> Value {
    let mut m = Map::new();
    for s in 0..alphabet.len() {
        m.insert(alphabet.symbol(s).to_string(), fraction_json(mu.prob(s)));
    }
    Value::Object(m)
}

pub fn codetuple_to_json(f: &CodeTuple, mu: Option<&SourceDist>) -> Value {
    let alphabet = f.alphabet();
    let tables: Vec<Value> = f
        .domain()
        .iter()
        .map(|id| {
            let t = f.table(id).expect("id from the domain");
            let mut fo = Map::new();
            let mut to = Map::new();
            for s in 0..alphabet.len() {
                fo.insert(alphabet.symbol(s).to_string(), json!(to_ascii(&t.f[s])));
                to.insert(alphabet.symbol(s).to_string(), table_id_json(&t.tau[s]));
            }
            json!({ "id": table_id_json(id), "f": fo, "tau": to })
        })
        .collect();
    let mut root = Map::new();
    root.insert("k".into(), json!(f.k()));
    root.insert(
        "alphabet".into(),
        Value::Array(alphabet.symbols().iter().map(|s| json!(s)).collect()),
    );
    if let Some(mu) = mu {
        root.insert("mu".into(), dist_json(alphabet, mu));
    }
    root.insert("tables".into(), Value::Array(tables));
    Value::Object(root)
}

pub fn rct_to_json(r: &Rct, mu: Option<&SourceDist>) -> Value {
    let alphabet = r.alphabet();
    let tables: Vec<Value> = r
        .domain()
        .iter()
        .map(|a| {
            let t = r.table(a).expect("a from the domain");
            let mut fo = Map::new();
            let mut to = Map::new();
            let mut po = Map::new();
            for s in 0..alphabet.len() {
                fo.insert(alphabet.symbol(s).to_string(), json!(to_ascii(&t.f[s])));
                to.insert(alphabet.symbol(s).to_string(), subset_json(&t.tau[s]));
                if let Some(p) = &t.psi[s] {
                    po.insert(
                        alphabet.symbol(s).to_string(),
                        json!(to_ascii(&p.table_bits())),
                    );
                }
            }
            let mut entry = Map::new();
            entry.insert("A".into(), subset_json(a));
            entry.insert("f".into(), Value::Object(fo));
            entry.insert("tau".into(), Value::Object(to));
            if !po.is_empty() {
                entry.insert("psi".into(), Value::Object(po));
            }
            Value::Object(entry)
        })
        .collect();
    let mut root = Map::new();
    root.insert("k".into(), json!(r.k()));
    root.insert(
        "alphabet".into(),
        Value::Array(alphabet.symbols().iter().map(|s| json!(s)).collect()),
    );
    if let Some(mu) = mu {
        root.insert("mu".into(), dist_json(alphabet, mu));
    }
    root.insert("tables".into(), Value::Array(tables));
    Value::Object(root)
}

/// Serializes a reduction trace for audit: one entry per step with exact
/// lengths as "n/d" strings.
pub fn trace_to_json(trace: &ReductionTrace) -> Value {
    let steps: Vec<Value> = trace
        .steps
        .iter()
        .map(|s| {
            let kind = match s.kind {
                StepKind::CoreRestrict => "core-restrict",
                StepKind::Merge => "merge",
                StepKind::Relabel => "relabel",
                StepKind::Finalize => "finalize",
            };
            let mut m = Map::new();
            m.insert("kind".into(), json!(kind));
            if let Some(ids) = &s.merged {
                m.insert(
                    "merged".into(),
                    Value::Array(ids.iter().map(|i| json!(i.to_string())).collect()),
                );
            }
            if let Some(h) = &s.potentials {
                let mut hm: BTreeMap<String, Value> = BTreeMap::new();
                for (id, v) in h {
                    hm.insert(id.to_string(), json!(v.to_string()));
                }
                m.insert("potentials".into(), json!(hm));
            }
            m.insert("l_before".into(), json!(s.l_before.to_string()));
            m.insert("l_after".into(), json!(s.l_after.to_string()));
            m.insert("k_dec_after".into(), json!(s.k_dec_after));
            Value::Object(m)
        })
        .collect();
    json!({ "steps": steps })
}

/// Reads a standalone distribution file `{"sym": [num, den], ...}`.
pub fn parse_dist_file(v: &Value, alphabet: &Alphabet) -> Result<SourceDist, CliError> {
    parse_dist(v, alphabet, "$")
}
