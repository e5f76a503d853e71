//! Streaming encoder and decoder driven directly by a reduced code tuple,
//! without materializing the expanded machine.
//!
//! The encoder walks expanded indexes `(A, φ)` and emits `φ(f̃_A(s))` per
//! symbol. After the last symbol it appends a `k`-bit flush so the decoder
//! can resolve the final codewords. The decoder inverts the current twist
//! lazily — only as many bits as a candidate needs — matches the unique
//! symbol whose codeword-plus-window fits, and stops on the flush.
//!
//! The flush tail is pinned to the smallest member of the state's exact
//! prefix set that no zero-length codeword can absorb; a tail inside the
//! image of a zero-length codeword's target set would make the decoder
//! append a phantom symbol, and streams differing only in such a phantom are
//! genuinely indistinguishable.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::bits::BitString;
use crate::codetuple::{Symbol, TableId};
use crate::error::{Error, Result};
use crate::rct::{ExpandedIndex, Rct};

/// Streaming encoder state.
#[derive(Clone, Debug)]
pub struct Encoder<'a> {
    rct: &'a Rct,
    state: ExpandedIndex,
    bits_emitted: u64,
}

impl<'a> Encoder<'a> {
    pub fn new(rct: &'a Rct, start: ExpandedIndex) -> Result<Self> {
        rct.index_of(&start.a)?;
        if start.phi.k() != rct.k() {
            return Err(Error::Domain("start control table does not match k".into()));
        }
        Ok(Encoder {
            rct,
            state: start,
            bits_emitted: 0,
        })
    }

    pub fn state(&self) -> &ExpandedIndex {
        &self.state
    }

    pub fn bits_emitted(&self) -> u64 {
        self.bits_emitted
    }

    /// Emits the twisted codeword for one symbol and advances the index.
    pub fn encode_symbol(&mut self, s: Symbol) -> Result<BitString> {
        let (emit, next) = self.rct.expand_index_step(&self.state, s)?;
        self.bits_emitted += emit.len() as u64;
        self.state = next;
        Ok(emit)
    }

    /// The flush tail for the current state.
    pub fn flush_tail(&self) -> Result<BitString> {
        flush(self.rct, &self.state)
    }
}

/// Encodes a whole sequence from `start`; no flush appended.
pub fn encode(rct: &Rct, start: &ExpandedIndex, x: &[Symbol]) -> Result<BitString> {
    let mut enc = Encoder::new(rct, start.clone())?;
    let mut out = BitString::empty();
    for &s in x {
        out = out.concat(&enc.encode_symbol(s)?);
    }
    Ok(out)
}

/// The `k`-bit tail appended after encoding stops in `state`: the smallest
/// member of the exact prefix set of the expanded machine at `state` that no
/// zero-length codeword can absorb. The prefix set is computed on the
/// lazily-expanded reachable machine.
pub fn flush(rct: &Rct, state: &ExpandedIndex) -> Result<BitString> {
    let machine = reachable_machine(rct, state)?;
    let own = &machine.pref_sets()[&TableId::Label(state.to_label())];
    if own.is_empty() {
        return Err(Error::Flush(alloc::format!(
            "state {state} has an empty {}-bit prefix set",
            rct.k()
        )));
    }
    let idx = rct.index_of(&state.a)?;
    let mut absorbed = BTreeSet::new();
    for s in 0..rct.alphabet().len() {
        if rct.table_at(idx).f[s].is_empty() {
            let image = state.phi.apply_set(&rct.table_at(idx).tau[s])?;
            absorbed.extend(image.members().iter().cloned());
        }
    }
    own.members()
        .iter()
        .find(|t| !absorbed.contains(*t))
        .cloned()
        .ok_or_else(|| {
            Error::Flush(alloc::format!(
                "every tail of state {state} re-enters a zero-length codeword"
            ))
        })
}

fn reachable_machine(rct: &Rct, state: &ExpandedIndex) -> Result<crate::codetuple::CodeTuple> {
    let (states, edges) = rct.expand_reachable(state)?;
    let entries: Vec<(TableId, crate::codetuple::CodeTable)> = states
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let f = edges[i].iter().map(|(w, _)| w.clone()).collect();
            let tau = edges[i]
                .iter()
                .map(|(_, p)| TableId::Label(states[*p].to_label()))
                .collect();
            (
                TableId::Label(st.to_label()),
                crate::codetuple::CodeTable { f, tau },
            )
        })
        .collect();
    crate::codetuple::CodeTuple::new(rct.k(), rct.alphabet().clone(), entries)
}

/// Streaming decoder state.
#[derive(Clone, Debug)]
pub struct Decoder<'a> {
    rct: &'a Rct,
    state: ExpandedIndex,
    inv_phi: crate::phi::PhiMap,
    buffer: BitString,
    consumed: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(rct: &'a Rct, start: ExpandedIndex) -> Result<Self> {
        rct.index_of(&start.a)?;
        if start.phi.k() != rct.k() {
            return Err(Error::Domain("start control table does not match k".into()));
        }
        let inv_phi = start.phi.invert();
        Ok(Decoder {
            rct,
            state: start,
            inv_phi,
            buffer: BitString::empty(),
            consumed: 0,
        })
    }

    pub fn state(&self) -> &ExpandedIndex {
        &self.state
    }

    /// Unconsumed bits currently buffered.
    pub fn pending(&self) -> &BitString {
        &self.buffer
    }

    pub fn push(&mut self, bits: &BitString) {
        self.buffer = self.buffer.concat(bits);
    }

    /// Untwisted view of the buffered input, computed only up to `n` bits.
    pub fn untwisted_prefix(&self, n: usize) -> BitString {
        self.inv_phi.apply_prefix(&self.buffer, n)
    }

    /// Tries to decode one symbol from the buffer. `Ok(None)` means no
    /// symbol fits, which is the normal stop on the flush tail.
    pub fn step(&mut self) -> Result<Option<Symbol>> {
        let k = self.rct.k();
        let idx = self.rct.index_of(&self.state.a)?;
        let mut matched: Option<Symbol> = None;
        for s in 0..self.rct.alphabet().len() {
            let word = &self.rct.table_at(idx).f[s];
            let need = word.len() + k;
            if self.buffer.len() < need {
                continue;
            }
            // Untwist exactly the bits this candidate inspects.
            let view = self.inv_phi.apply_prefix(&self.buffer, need);
            if !word.is_prefix_of(&view) {
                continue;
            }
            let window = view.drop_prefix(word.len())?;
            if !self.rct.table_at(idx).tau[s].contains(&window) {
                continue;
            }
            if let Some(prev) = matched {
                return Err(Error::InvalidCode(alloc::format!(
                    "symbols {} and {} both match at bit {}",
                    self.rct.alphabet().symbol(prev),
                    self.rct.alphabet().symbol(s),
                    self.consumed
                )));
            }
            matched = Some(s);
        }
        let Some(s) = matched else {
            return Ok(None);
        };
        let (emit, next) = self.rct.expand_index_step(&self.state, s)?;
        // The emitted word is the twisted codeword; the buffer starts with it
        // because the untwisted view started with the raw codeword.
        self.buffer = self.buffer.drop_prefix(emit.len())?;
        self.consumed += emit.len();
        self.state = next;
        self.inv_phi = self.state.phi.invert();
        Ok(Some(s))
    }

    /// Decodes as many symbols as the buffer allows.
    pub fn drain(&mut self) -> Result<Vec<Symbol>> {
        let mut out = Vec::new();
        while let Some(s) = self.step()? {
            out.push(s);
        }
        Ok(out)
    }

    /// End-of-stream check: anything longer than a flush tail plus one
    /// maximal codeword can only be corruption.
    pub fn finish(&self) -> Result<()> {
        if self.buffer.len() > self.rct.k() + self.rct.max_codeword_len() {
            return Err(Error::CorruptInput {
                offset: self.consumed,
            });
        }
        Ok(())
    }
}

/// Decodes a full stream (payload plus flush) from `start`.
pub fn decode(rct: &Rct, start: &ExpandedIndex, b: &BitString) -> Result<Vec<Symbol>> {
    let mut dec = Decoder::new(rct, start.clone())?;
    dec.push(b);
    let out = dec.drain()?;
    dec.finish()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codetuple::{Alphabet, SourceDist};
    use crate::orbit::SubsetK;
    use crate::phi::PhiMap;
    use crate::rct::tests::worked_rct;
    use crate::rct::RctTable;
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

    fn start_state() -> ExpandedIndex {
        ExpandedIndex::new(set(&["00", "01", "10", "11"]), phi("000"))
    }

    #[test]
    fn encode_worked_trace() {
        let r = worked_rct();
        let x = r.alphabet().seq_from_text("acdb").unwrap();
        assert_eq!(encode(&r, &start_state(), &x).unwrap(), bs("10111101"));
        // Per-symbol emissions and the index sequence.
        let mut enc = Encoder::new(&r, start_state()).unwrap();
        let expected = [
            ("1", ExpandedIndex::new(set(&["00", "10"]), phi("010"))),
            ("", ExpandedIndex::new(set(&["00"]), phi("010"))),
            ("011", ExpandedIndex::new(set(&["00", "10"]), phi("001"))),
            ("1101", start_state()),
        ];
        for (&s, (word, state)) in x.iter().zip(&expected) {
            assert_eq!(enc.encode_symbol(s).unwrap(), bs(word));
            assert_eq!(enc.state(), state);
        }
        assert_eq!(enc.bits_emitted(), 8);
    }

    #[test]
    fn encode_empty_and_single_steps() {
        let r = worked_rct();
        assert_eq!(
            encode(&r, &start_state(), &[]).unwrap(),
            BitString::empty()
        );
        let st = ExpandedIndex::new(set(&["00"]), phi("010"));
        let d = r.alphabet().index("d").unwrap();
        assert_eq!(encode(&r, &st, &[d]).unwrap(), bs("011"));
    }

    #[test]
    fn encode_agrees_with_explicit_folding() {
        let r = worked_rct();
        let x = r.alphabet().seq_from_text("badcabdc").unwrap();
        let folded = {
            let mut cur = start_state();
            let mut out = BitString::empty();
            for &s in &x {
                let (w, next) = r.expand_index_step(&cur, s).unwrap();
                out = out.concat(&w);
                cur = next;
            }
            out
        };
        assert_eq!(encode(&r, &start_state(), &x).unwrap(), folded);
    }

    /// Exhaustive short-input enumeration of the k-bit stream openers at a
    /// state, independent of the prefix-set machinery.
    fn stream_openers(r: &Rct, state: &ExpandedIndex) -> SubsetK {
        let nsym = r.alphabet().len();
        let mut found = alloc::collections::BTreeSet::new();
        let mut layer = vec![(state.clone(), BitString::empty())];
        for _ in 0..6 {
            let mut next_layer = Vec::new();
            for (st, emitted) in layer {
                if emitted.len() >= r.k() {
                    found.insert(emitted.take_prefix(r.k()).unwrap());
                    continue;
                }
                for s in 0..nsym {
                    let (w, next) = r.expand_index_step(&st, s).unwrap();
                    next_layer.push((next, emitted.concat(&w)));
                }
            }
            layer = next_layer;
        }
        for (_, emitted) in layer {
            if emitted.len() >= r.k() {
                found.insert(emitted.take_prefix(r.k()).unwrap());
            }
        }
        SubsetK::new(r.k(), found).unwrap()
    }

    #[test]
    fn flush_values() {
        let r = worked_rct();
        assert_eq!(flush(&r, &start_state()).unwrap(), bs("00"));
        // A state whose table has a zero-length codeword: the tail must
        // avoid its absorbed window but stay inside the true prefix set.
        let st = ExpandedIndex::new(set(&["00", "10"]), phi("001"));
        let tail = flush(&r, &st).unwrap();
        assert!(stream_openers(&r, &st).contains(&tail));
        assert_eq!(tail, bs("11"));
    }

    #[test]
    fn flush_on_trivial_single_table() {
        let alphabet = Alphabet::new(["a", "b"]).unwrap();
        let a = SubsetK::new(1, [bs("0")]).unwrap();
        let r = Rct::new(
            1,
            alphabet,
            vec![(
                a.clone(),
                RctTable::new(vec![bs("00"), bs("01")], vec![a.clone(), a.clone()]),
            )],
        )
        .unwrap();
        let st = ExpandedIndex::new(a, PhiMap::identity(1));
        assert_eq!(flush(&r, &st).unwrap(), bs("0"));
    }

    #[test]
    fn decode_worked_trace() {
        let r = worked_rct();
        let got = decode(&r, &start_state(), &bs("1011110100")).unwrap();
        assert_eq!(r.alphabet().seq_to_text(&got), "acdb");
    }

    #[test]
    fn decode_tracks_printed_iterations() {
        let r = worked_rct();
        let mut dec = Decoder::new(&r, start_state()).unwrap();
        dec.push(&bs("1011110100"));
        let states = [
            ExpandedIndex::new(set(&["00", "10"]), phi("010")),
            ExpandedIndex::new(set(&["00"]), phi("010")),
            ExpandedIndex::new(set(&["00", "10"]), phi("001")),
            start_state(),
        ];
        let symbols = ["a", "c", "d", "b"];
        for (want_s, want_state) in symbols.iter().zip(&states) {
            let s = dec.step().unwrap().unwrap();
            assert_eq!(r.alphabet().symbol(s), *want_s);
            assert_eq!(dec.state(), want_state);
        }
        assert_eq!(dec.step().unwrap(), None);
        assert_eq!(dec.pending(), &bs("00"));
        dec.finish().unwrap();
    }

    #[test]
    fn decode_fourth_iteration_untwists_lazily() {
        let r = worked_rct();
        let mut dec =
            Decoder::new(&r, ExpandedIndex::new(set(&["00", "10"]), phi("001"))).unwrap();
        dec.push(&bs("110100"));
        assert_eq!(dec.untwisted_prefix(6), bs("100100"));
        let s = dec.step().unwrap().unwrap();
        assert_eq!(r.alphabet().symbol(s), "b");
    }

    #[test]
    fn decode_flush_only_input() {
        let r = worked_rct();
        let st = start_state();
        let tail = flush(&r, &st).unwrap();
        assert_eq!(decode(&r, &st, &tail).unwrap(), Vec::<Symbol>::new());
    }

    #[test]
    fn roundtrip_on_worked_example() {
        let r = worked_rct();
        let mu = SourceDist::uniform(4).unwrap();
        let _ = mu;
        let mut state = 0xDEADBEEFCAFEF00Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for a in worked_domain() {
            for p in PhiMap::enumerate(2).unwrap() {
                let start = ExpandedIndex::new(a.clone(), p);
                for _ in 0..4 {
                    let len = (next() % 51) as usize;
                    let x: Vec<Symbol> = (0..len).map(|_| (next() % 4) as usize).collect();
                    let mut enc = Encoder::new(&r, start.clone()).unwrap();
                    let mut stream = BitString::empty();
                    for &s in &x {
                        stream = stream.concat(&enc.encode_symbol(s).unwrap());
                    }
                    let stream = stream.concat(&enc.flush_tail().unwrap());
                    assert_eq!(decode(&r, &start, &stream).unwrap(), x);
                }
            }
        }
    }

    fn worked_domain() -> Vec<SubsetK> {
        vec![
            set(&["00"]),
            set(&["00", "10"]),
            set(&["00", "01", "10", "11"]),
        ]
    }

    #[test]
    fn ambiguous_machine_is_reported() {
        // Two symbols share a codeword and overlapping targets; the decoder
        // refuses rather than guessing.
        let alphabet = Alphabet::new(["a", "b"]).unwrap();
        let a = SubsetK::new(1, [bs("0"), bs("1")]).unwrap();
        let r = Rct::new(
            1,
            alphabet,
            vec![(
                a.clone(),
                RctTable::new(vec![bs("0"), bs("0")], vec![a.clone(), a.clone()]),
            )],
        )
        .unwrap();
        let st = ExpandedIndex::new(a, PhiMap::identity(1));
        assert!(matches!(
            decode(&r, &st, &bs("00")),
            Err(Error::InvalidCode(_))
        ));
    }

    #[test]
    fn oversized_leftovers_are_corruption() {
        let r = worked_rct();
        let st = ExpandedIndex::new(set(&["00"]), phi("000"));
        // Nothing at table {00} opens with 1, so the whole stream is junk.
        assert!(matches!(
            decode(&r, &st, &bs("11111111")),
            Err(Error::CorruptInput { offset: 0 })
        ));
        // A truncated stream simply yields the decodable prefix.
        let x = r.alphabet().seq_from_text("badb").unwrap();
        let full = encode(&r, &st, &x).unwrap();
        let cut = full.take_prefix(full.len() - 1).unwrap();
        let got = decode(&r, &st, &cut).unwrap();
        assert!(got.len() < x.len());
        assert_eq!(got, x[..got.len()]);
    }
}
