//! Cardinality and determinacy analysis for pure Prolog with cut.
//!
//! The analyzer computes, per predicate and input pattern, an abstract
//! sequence `<β, m, M, t>`: a description `β` of every answer, bounds
//! `m..=M` on the number of answers, and a termination class. A bounded
//! concrete interpreter of the same semantics serves as the test oracle.

pub mod absdom;
pub mod ast;
pub mod cardseq;
pub mod cli;
pub mod concrete;
pub mod engine;
pub mod par;
pub mod report;
pub mod sahlin;
