//! Proportionally fair maximum-weight bipartite matching.
//!
//! The pipeline solves a linear relaxation with per-color proportionality
//! rows ([`lp`]), then rounds the fractional solution with a proposal and
//! contention-resolution pass ([`rounding`]) whose per-edge selection
//! probability is exactly half the fractional value. [`fairness`] certifies
//! the observed color shares, [`exact`] holds the one-sided exact mode and
//! the brute-force solver, [`baseline`] the greedy peeling comparator and
//! [`bench`] the synthetic experiment harness.

pub mod graph;
pub mod lp;
pub mod rounding;
pub mod fairness;
pub mod exact;
pub mod baseline;
pub mod bench;

pub use graph::{ColoredBipartiteGraph, Edge, FairnessSpec, Matching};
pub use lp::FractionalMatching;
