//! Reference computations shared by the integration tests. None of them go
//! through the library's own digit or search code.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive};

/// `k`-th fractional digit of `q ≥ 0` by modular exponentiation:
/// `⌊10 · ((p · 10^(k−1)) mod d) / d⌋`.
pub fn digit(q: &Ratio<BigInt>, k: usize) -> u8 {
    assert!(!q.is_negative() && k >= 1);
    let d = q.denom();
    let p = q.numer().mod_floor(d);
    let shifted = (p * BigInt::from(10).modpow(&BigInt::from(k - 1), d)).mod_floor(d);
    let scaled: BigInt = shifted * 10;
    (scaled / d).to_u8().unwrap()
}

pub fn digit_i64(p: i64, q: i64, k: usize) -> u8 {
    digit(&Ratio::new(BigInt::from(p), BigInt::from(q)), k)
}

/// `min({b} ∪ {x ∈ prefix : a < x < b})`.
pub fn prefix_min(prefix: &[Ratio<BigInt>], a: &Ratio<BigInt>, b: &Ratio<BigInt>) -> Ratio<BigInt> {
    prefix.iter().filter(|x| a < *x && *x < b).chain(std::iter::once(b)).min().unwrap().clone()
}

/// Length-`l` blocks differing from `1234567890…` everywhere, by listing all
/// `10^l` of them.
pub fn brute_avoiding(l: u32) -> u64 {
    let reference: Vec<u64> = (1..=l as u64).map(|k| k % 10).collect();
    (0..10u64.pow(l))
        .filter(|&block| {
            let mut rest = block;
            let mut digits = vec![0; l as usize];
            for slot in digits.iter_mut().rev() {
                *slot = rest % 10;
                rest /= 10;
            }
            digits.iter().zip(&reference).all(|(a, b)| a != b)
        })
        .count() as u64
}

pub fn big(p: i64, q: i64) -> Ratio<BigInt> {
    Ratio::new(BigInt::from(p), BigInt::from(q))
}

