//! Exact scalars, polynomials in `a_1..a_n`, and Laurent polynomials in `u`.

pub mod apoly;
pub mod laurent;
pub mod rational;

pub use apoly::{monomials_up_to, poly_interpolate, simplex_degree, simplex_grid, APoly};
pub use laurent::{laurent_flip_u, laurent_negative_part, LaurentCoeff, ULaurent};
pub use rational::{binomial, factorial, Rational};
