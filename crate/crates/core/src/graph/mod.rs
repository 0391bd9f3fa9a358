//! Stable graphs, star trees, and decorated strata.

pub mod stable;
pub mod star;
pub mod strata;

pub use stable::{automorphism_count, canonical_form, Automorphism, Canonical, Contraction, StableGraph};
pub use star::{enumerate_pssrt, pssrt_count, Leaf, StarTree};
pub use strata::{enumerate_strata, stable_graphs, DecoratedStratum};
