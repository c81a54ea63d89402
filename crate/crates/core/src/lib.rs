//! Hash-property code constructions over finite fields at desk scale.
//!
//! The crate covers sparse matrix ensembles and their collision profiles,
//! Slepian-Wolf syndrome coding, Marton-style broadcast coding and a linear
//! programming form of minimum-divergence decoding. Everything is exact
//! where enumeration is feasible, with Monte Carlo estimates elsewhere.

pub mod broadcast;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod gf;
pub mod lp_md;
pub mod mc;
pub mod seq;
pub mod slepian_wolf;
pub mod types;

pub use error::{Error, Result};
