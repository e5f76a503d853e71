//! Exact Huffman average codeword length, used as the reference optimum for
//! the one-bit-delay micro search.

use delaycode_core::codetuple::SourceDist;
use delaycode_core::Rational;

/// Expected codeword length of a binary Huffman code for `mu`, computed
/// exactly: each merge of the two smallest weights adds their sum to the
/// total, which equals the weighted sum of leaf depths. Ties are broken by
/// insertion order; every Huffman tree attains the same expected length.
pub fn huffman_avg_len(mu: &SourceDist) -> Rational {
    let mut heap: Vec<(Rational, usize)> = mu
        .probs()
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, p)| (p, i))
        .collect();
    let mut next_id = heap.len();
    let mut total = Rational::new(0.into(), 1.into());
    while heap.len() > 1 {
        heap.sort();
        let (w1, _) = heap.remove(0);
        let (w2, _) = heap.remove(0);
        let merged = w1 + w2;
        total += merged.clone();
        heap.push((merged, next_id));
        next_id += 1;
    }
    total
}
