//! Finite, decidable models of the combinatorics behind forcing with
//! cofinitary groups: word evaluation over partial injections, the
//! group-adding poset and its variants, extension lemmas, a greedy generic
//! builder, two-sided templates, and σ-Suslin posets.

pub mod builder;
pub mod eval;
pub mod extension;
pub mod poset;
pub mod sample;
pub mod suites;
pub mod suslin;
pub mod templates;
pub mod words;
