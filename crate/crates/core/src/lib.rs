//! Tautological ring computations on moduli spaces of stable curves.

pub mod algebra;
pub mod audit;
pub mod cache;
pub mod calculus;
pub mod error;
pub mod graph;
pub mod master;
pub mod special;

pub use error::{Error, Result};
