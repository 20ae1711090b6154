//! Causal (Epstein-Glaser) distribution splitting for the self-energy of a
//! two-level atom coupled to the radiation field: decay rate, line shift,
//! normalization fixing, and independent numerical oracles.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod numerics;
pub mod observables;
pub mod report;
pub mod selfenergy;
pub mod splitting;
pub mod wavepacket;
pub mod wworacle;
