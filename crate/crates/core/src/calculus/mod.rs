//! Integration, products, and pushforwards of tautological classes.

pub(crate) mod product;
pub mod psi;
pub mod pushforward;
pub mod taut;

pub use psi::{psi_integral, vertex_integral};
pub use pushforward::boundary_pushforward;
pub use taut::{pair_strata, stratum_integral, TautClass};
