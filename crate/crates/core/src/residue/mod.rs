//! Primes of `O_K`, residue-field arithmetic and reduction into `P^1`.

mod field;
mod prime;
mod reduce;

pub use field::{ProjPoint, ResidueElem, ResidueField};
pub use prime::{
    primes_above, primes_above_all, splitting_type, PrimeDesc, PrimeKind, Splitting, MAX_PRIME,
};
pub use reduce::{reduce_c, valuation};

pub(crate) use reduce::common_denominator_form;
