//! Exact-arithmetic laboratory for nested-interval refinement over enumerations
//! of the rationals and for digit-table diagonalization at finite scale.
//!
//! Every engine is generic over the integer type backing its rationals. The
//! crate root fixes the two instantiations used in practice:
//! [`ExactRational`] (arbitrary precision, the default everywhere) and
//! [`Rational64`] (machine integers for small, fast experiments; arithmetic
//! that would overflow panics instead of wrapping).

pub mod diagonal;
pub mod digits;
pub mod enumerate;
mod error;
pub mod exact;
pub mod nesting;
pub(crate) mod ser;

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, Signed, ToPrimitive};

pub use error::{Error, Result};

/// Integer scalar backing a rational.
pub trait Int:
    Integer
    + Signed
    + Clone
    + Hash
    + fmt::Debug
    + fmt::Display
    + FromPrimitive
    + ToPrimitive
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + FromStr
    + Send
    + Sync
    + 'static
{
}

impl<T> Int for T where
    T: Integer
        + Signed
        + Clone
        + Hash
        + fmt::Debug
        + fmt::Display
        + FromPrimitive
        + ToPrimitive
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + FromStr
        + Send
        + Sync
        + 'static
{
}

pub type ExactRational = Ratio<BigInt>;
pub type Rational64 = Ratio<i64>;

pub type Interval = exact::OpenInterval<BigInt>;
pub type Interval64 = exact::OpenInterval<i64>;
pub type Trace = nesting::NestingTrace<BigInt>;
pub type Trace64 = nesting::NestingTrace<i64>;
pub type SharedEnum = enumerate::SharedEnumeration<BigInt>;
pub type SharedEnum64 = enumerate::SharedEnumeration<i64>;
pub type Table = diagonal::TableSpec<BigInt>;

pub use diagonal::{
    antidiagonal, antidiagonal_family, build_table, count_avoiding_periods, diagonal,
    displacement_track, is_n_modular, modular_family, permute_dmodular,
};
pub use digits::{from_period, to_digit_stream, DigitStream, PeriodicDigits};
pub use enumerate::{Enumeration, ReorderSpec};
pub use exact::OpenInterval;
pub use nesting::{
    check_defining_index, check_exclusion, condition_probe, epilog_scan, gap_occupancy,
    run_nesting,
};
