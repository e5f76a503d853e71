//! Finite-state variable-length source codes with bounded decoding delay.
//!
//! The crate models binary codes as *code tuples*: a finite family of code
//! tables, each mapping source symbols to bit strings, together with a
//! next-table map driven by the emitted symbol. A code tuple is `k`-bit delay
//! decodable when every symbol can be identified after reading at most `k`
//! bits beyond its own codeword.
//!
//! On top of that sit:
//!
//! * [`phi`] — the finite group of length-, prefix-, and tail-preserving
//!   bit-string bijections used to identify symmetric code tables;
//! * [`orbit`] — canonical forms and counting for subsets of `k`-bit strings
//!   under that group;
//! * [`codetuple`] — prefix-set computation, decodability predicates, and
//!   exact rational Markov analysis of the average codeword length;
//! * [`rct`] — reduced code tuples (one table per orbit), their validation,
//!   and expansion back to ordinary code tuples;
//! * [`codec`] — streaming encode/decode directly on a reduced code tuple;
//! * [`reduce`] — the length-non-increasing reduction from a code tuple to a
//!   reduced code tuple.
//!
//! The crate is `no_std` (requires `alloc`). All probabilities and average
//! lengths are exact big rationals; nothing is ever rounded.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bits;
pub mod codec;
pub mod codetuple;
pub mod error;
pub mod orbit;
pub mod phi;
pub mod rct;
pub mod reduce;

mod graph;
mod linalg;

pub use error::{Error, Result};

/// Exact rational scalar used for probabilities, lengths, and potentials.
pub type Rational = num_rational::BigRational;

pub use num_bigint;
pub use num_rational;
pub use num_traits;
