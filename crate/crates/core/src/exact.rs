//! Exact rationals and open intervals.

use std::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedSub, One, Zero};
use serde::Serialize;

use crate::{Error, Int, Result};

/// Parses `"p/q"` or a bare integer `"p"`. Zero denominators are rejected.
pub fn parse_ratio<I: Int>(text: &str) -> Result<Ratio<I>> {
    let bad = || Error::ParseFraction(text.to_string());
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num = num.parse::<I>().map_err(|_| bad())?;
    let den = den.parse::<I>().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Ratio::new(num, den))
}

/// `"p/q"` in lowest terms; integers print without a denominator.
pub fn fmt_ratio<I: Int>(q: &Ratio<I>) -> String {
    q.to_string()
}

pub(crate) fn ten<I: Int>() -> I {
    I::from_u8(10).expect("10 fits every integer type")
}

pub(crate) fn two<I: Int>() -> I {
    I::one() + I::one()
}

// Overflow is a property of the backing type, never of the data model, so
// machine-integer instantiations fail loudly instead of wrapping.
pub(crate) fn add<I: Int>(a: &Ratio<I>, b: &Ratio<I>) -> Ratio<I> {
    a.checked_add(b).expect("rational addition overflowed the backing integer")
}

pub(crate) fn sub<I: Int>(a: &Ratio<I>, b: &Ratio<I>) -> Ratio<I> {
    a.checked_sub(b).expect("rational subtraction overflowed the backing integer")
}

pub(crate) fn midpoint<I: Int>(a: &Ratio<I>, b: &Ratio<I>) -> Ratio<I> {
    add(a, b)
        .checked_div(&Ratio::from_integer(two()))
        .expect("rational division overflowed the backing integer")
}

/// Open interval `(lo, hi)` with `lo < hi`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(bound(serialize = "I: Int"))]
pub struct OpenInterval<I: Int> {
    #[serde(serialize_with = "crate::ser::ratio")]
    lo: Ratio<I>,
    #[serde(serialize_with = "crate::ser::ratio")]
    hi: Ratio<I>,
}

impl<I: Int> OpenInterval<I> {
    pub fn new(lo: Ratio<I>, hi: Ratio<I>) -> Result<Self> {
        if lo >= hi {
            return Err(Error::EmptyInterval { lo: fmt_ratio(&lo), hi: fmt_ratio(&hi) });
        }
        Ok(OpenInterval { lo, hi })
    }

    /// `(0, 1)`.
    pub fn unit() -> Self {
        OpenInterval { lo: Ratio::zero(), hi: Ratio::one() }
    }

    /// Parses `"lo,hi"`, each side a fraction string.
    pub fn parse(text: &str) -> Result<Self> {
        let (lo, hi) = text
            .split_once(',')
            .ok_or_else(|| Error::ParseFraction(text.to_string()))?;
        Self::new(parse_ratio(lo)?, parse_ratio(hi)?)
    }

    pub fn lo(&self) -> &Ratio<I> {
        &self.lo
    }

    pub fn hi(&self) -> &Ratio<I> {
        &self.hi
    }

    pub fn contains(&self, q: &Ratio<I>) -> bool {
        &self.lo < q && q < &self.hi
    }

    pub fn width(&self) -> Ratio<I> {
        sub(&self.hi, &self.lo)
    }

    pub fn midpoint(&self) -> Ratio<I> {
        midpoint(&self.lo, &self.hi)
    }

    /// True when `other` lies inside `self` (endpoints may coincide).
    pub fn encloses(&self, other: &OpenInterval<I>) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

impl<I: Int> fmt::Display for OpenInterval<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}
