//! Double ramification cycles and Hodge classes.

pub mod dr;
pub mod hodge;

pub use dr::{dr_cycle, dr_cycle_with, RSchedule};
pub use hodge::{hodge_poly, lambda_class, mumford_check};
