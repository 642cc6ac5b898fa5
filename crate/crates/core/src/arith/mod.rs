//! Exact arithmetic over `Q` and quadratic fields, with heights.

mod quadratic;
mod rational;

pub use quadratic::{
    fundamental_discriminants, is_fundamental_discriminant, Field, Number, QuadField, QuadRational,
};
pub use rational::{is_square_int, lcm, normalize_rational, Rational};
