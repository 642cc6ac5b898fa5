//! Certification of the periods of rational points of `z^2 + c` over `Q` and
//! quadratic fields.

pub mod arith;
pub mod error;
pub mod ntheory;
pub mod oracle;
pub mod period;
pub mod residue;
pub mod search;
pub mod sieve;

pub use error::{Error, Result};
