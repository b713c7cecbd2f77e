use num_rational::Ratio;

use crate::digits::PeriodicDigits;
use crate::{Error, Int, Result};

/// The repeating block `1234567890`, the diagonal of a fully modular table.
pub const MODULAR_BLOCK: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 0];

/// `r_i = 0.d_1…d_n 1…1` (`i` ones) for `i = 1..=k`. Every member keeps
/// `d_n` at position `n`.
pub fn modular_family<I: Int>(prefix: &[u8], k: usize) -> Result<Vec<Ratio<I>>> {
    if prefix.is_empty() {
        return Err(Error::Domain("family prefix needs at least one digit".into()));
    }
    if k == 0 {
        return Err(Error::Domain("family size must be positive".into()));
    }
    if let Some(&d) = prefix.iter().find(|&&d| d > 9) {
        return Err(Error::InvalidDigit(d));
    }
    (1..=k)
        .map(|i| {
            let mut digits = prefix.to_vec();
            digits.resize(prefix.len() + i, 1);
            PeriodicDigits::new(0, digits, vec![0])?.value()
        })
        .collect()
}

/// `0.(0123456789 × n)(45)`.
pub fn antidiagonal_family_digits(n: usize) -> Result<PeriodicDigits> {
    if n == 0 {
        return Err(Error::Domain("family index starts at 1".into()));
    }
    let block = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9];
    let pre = block.repeat(n);
    PeriodicDigits::new(0, pre, vec![4, 5])
}

pub fn antidiagonal_family<I: Int>(n: usize) -> Result<Ratio<I>> {
    antidiagonal_family_digits(n)?.value()
}

/// Number of length-`l` digit blocks that differ from `1234567890…` at every
/// position: `9^l`.
pub fn count_avoiding_periods(l: u32) -> Result<u64> {
    if !(1..=18).contains(&l) {
        return Err(Error::OutOfRange { value: l.to_string(), range: "[1, 18]" });
    }
    Ok(9u64.pow(l))
}
