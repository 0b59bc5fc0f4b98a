//! Desk-scale numerical laboratory for robust combiners and universal
//! constructions in quantum cryptography.
//!
//! The crate represents small-dimensional candidate schemes (canonical bit
//! commitments, one-way state generators, quantum-money mini-schemes,
//! unclonable encryption) as dense complex operators, applies the
//! correctness transforms and combiners to them, and evaluates every
//! statistically checkable quantity (fidelities, trace distances, game
//! values, concentration bounds) exactly or by seeded Monte Carlo.
//!
//! Everything here is pure and allocation-only; IO, file formats and the
//! experiment runner live in the companion `qclab-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod commit;
pub mod dqre;
pub mod money;
pub mod owsg;
pub mod qmath;
pub mod rng;
pub mod unclone;

pub use rng::SplitRng;
