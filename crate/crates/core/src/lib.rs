//! Random sampling of distinct integers from `offset..offset+N` by
//! divide-and-conquer hypergeometric splitting.
//!
//! The crate provides the classical sequential samplers (selection, hashing,
//! Vitter's skip method, Bernoulli repair) alongside the recursive sampler,
//! its online and with-replacement variants, a communication-free parallel
//! sampler driven by hash-derived deviates, and a message-passing simulation
//! of the distributed reservoir protocol.

pub mod bench;
pub mod cli;
pub mod deviates;
pub mod distsim;
mod error;
pub mod graph;
pub mod io;
pub mod methods;
pub mod parallel;
pub mod samplers;
pub mod selftest;
pub mod stats;

pub use error::{Error, Result};
