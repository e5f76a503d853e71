//! Property tests over randomly generated bit strings, control tables, and
//! subsets.

use delaycode_core::bits::BitString;
use delaycode_core::codec;
use delaycode_core::codetuple::{Alphabet, SourceDist};
use delaycode_core::orbit::{self, SubsetK};
use delaycode_core::phi::PhiMap;
use delaycode_core::rct::{ExpandedIndex, Rct, RctTable};
use proptest::prelude::*;

fn bitstring(max_len: usize) -> impl Strategy<Value = BitString> {
    prop::collection::vec(0u8..2, 0..=max_len).prop_map(BitString::from_bits)
}

fn phi_map(k: usize) -> impl Strategy<Value = PhiMap> {
    prop::collection::vec(0u8..2, (1usize << k) - 1)
        .prop_map(move |t| PhiMap::from_table(k, t).unwrap())
}

fn subset(k: usize) -> impl Strategy<Value = SubsetK> {
    prop::collection::btree_set(
        prop::collection::vec(0u8..2, k).prop_map(BitString::from_bits),
        0..=(1usize << k),
    )
    .prop_map(move |members| SubsetK::new(k, members).unwrap())
}

proptest! {
    #[test]
    fn concat_take_drop_partition(x in bitstring(12), y in bitstring(12)) {
        let xy = x.concat(&y);
        prop_assert_eq!(xy.take_prefix(x.len()).unwrap(), x.clone());
        prop_assert_eq!(xy.drop_prefix(x.len()).unwrap(), y.clone());
        prop_assert_eq!(x.residual(&xy).unwrap(), y);
        prop_assert!(x.is_prefix_of(&xy));
    }

    #[test]
    fn phi_preserves_structure(p in phi_map(3), x in bitstring(8), y in bitstring(8)) {
        let px = p.apply(&x);
        prop_assert_eq!(px.len(), x.len());
        if x.len() >= 3 {
            prop_assert_eq!(px.drop_prefix(3).unwrap(), x.drop_prefix(3).unwrap());
        }
        prop_assert_eq!(x.is_prefix_of(&y), px.is_prefix_of(&p.apply(&y)));
        // Inversion is exact.
        prop_assert_eq!(p.invert().apply(&px), x);
    }

    #[test]
    fn phi_compose_and_quotient(p in phi_map(2), q in phi_map(2), d in bitstring(5), b in bitstring(5)) {
        prop_assert_eq!(p.compose(&q).unwrap().apply(&b), p.apply(&q.apply(&b)));
        prop_assert_eq!(
            p.apply(&d.concat(&b)),
            p.apply(&d).concat(&p.quotient(&d).apply(&b))
        );
    }

    #[test]
    fn canonical_form_is_a_class_invariant(a in subset(3), p in phi_map(3)) {
        let image = p.apply_set(&a).unwrap();
        prop_assert!(orbit::equivalent(&a, &image).unwrap());
        let w = orbit::canonicalize(&a);
        prop_assert_eq!(&orbit::canonicalize(&image).canon, &w.canon);
        prop_assert_eq!(w.psi.apply_set(&w.canon).unwrap(), a.clone());
        prop_assert_eq!(w.canon.len(), a.len());
        if !a.is_empty() {
            let t = orbit::transport(&a, &image).unwrap();
            prop_assert_eq!(t.apply_set(&a).unwrap(), image);
        }
    }

    #[test]
    fn stream_roundtrip_on_worked_machine(
        x in prop::collection::vec(0usize..4, 0..=50),
        start_phi in phi_map(2),
        which in 0usize..3,
    ) {
        let r = worked_rct();
        let start = ExpandedIndex::new(r.domain()[which].clone(), start_phi);
        let mut enc = codec::Encoder::new(&r, start.clone()).unwrap();
        let mut bits = BitString::empty();
        for &s in &x {
            bits = bits.concat(&enc.encode_symbol(s).unwrap());
        }
        let stream = bits.concat(&enc.flush_tail().unwrap());
        prop_assert_eq!(codec::decode(&r, &start, &stream).unwrap(), x);
    }
}

fn bs(s: &str) -> BitString {
    BitString::parse(s).unwrap()
}

fn set(xs: &[&str]) -> SubsetK {
    SubsetK::new(2, xs.iter().map(|s| bs(s))).unwrap()
}

fn worked_rct() -> Rct {
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
fn uniform_distribution_is_exactly_normalized() {
    for n in 2..=6 {
        let mu = SourceDist::uniform(n).unwrap();
        let sum: delaycode_core::Rational = mu.probs().iter().sum();
        assert!(delaycode_core::num_traits::One::is_one(&sum));
    }
}
