//! Decimal digit streams.
//!
//! Positions are 1-based: `digit_at(1)` is the first digit after the decimal
//! point. No stream ever ends in an all-9 tail; `0.0999…` is always written
//! `0.1000…`, which makes first-differing-digit comparison agree with the
//! order of the values.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Roots;
use num_rational::Ratio;
use num_traits::{checked_pow, One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exact::{fmt_ratio, ten};
use crate::{Error, Int, Result};

/// Eventually periodic expansion `whole.pre(period)` in canonical form:
/// shortest period, shortest preperiod, never an all-9 period.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PeriodicDigits {
    whole: u8,
    pre: Arc<[u8]>,
    period: Arc<[u8]>,
}

impl PeriodicDigits {
    /// Validates and canonicalizes. Rejects empty or all-9 periods.
    pub fn new(whole: u8, pre: Vec<u8>, period: Vec<u8>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::EmptyPeriod);
        }
        if let Some(&d) = pre.iter().chain(&period).find(|&&d| d > 9) {
            return Err(Error::InvalidDigit(d));
        }
        if period.iter().all(|&d| d == 9) {
            return Err(Error::NinesTail);
        }
        let (pre, period) = canonical(pre, period);
        Ok(Self::from_canonical(whole, pre, period))
    }

    fn from_canonical(whole: u8, pre: Vec<u8>, period: Vec<u8>) -> Self {
        PeriodicDigits { whole, pre: pre.into(), period: period.into() }
    }

    pub fn whole(&self) -> u8 {
        self.whole
    }

    pub fn preperiod(&self) -> &[u8] {
        &self.pre
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    pub fn digit_at(&self, n: usize) -> u8 {
        assert!(n >= 1, "digit positions start at 1");
        let n = n - 1;
        if n < self.pre.len() {
            self.pre[n]
        } else {
            self.period[(n - self.pre.len()) % self.period.len()]
        }
    }

    /// Exact value via the geometric-series closed form
    /// `whole + (pre·(10^k − 1) + period) / (10^m · (10^k − 1))`.
    pub fn value<I: Int>(&self) -> Result<Ratio<I>> {
        let m = self.pre.len();
        let k = self.period.len();
        let nines = pow10::<I>(k)? - I::one();
        let scale = pow10::<I>(m)?;
        let denom = scale.checked_mul(&nines).ok_or(Error::Overflow)?;
        let whole = I::from_u8(self.whole).ok_or(Error::Overflow)?;
        let pre = digits_to_int::<I>(&self.pre)?;
        let period = digits_to_int::<I>(&self.period)?;
        let numer = whole
            .checked_mul(&denom)
            .and_then(|w| pre.checked_mul(&nines)?.checked_add(&w))
            .and_then(|acc| acc.checked_add(&period))
            .ok_or(Error::Overflow)?;
        Ok(Ratio::new(numer, denom))
    }
}

impl fmt::Display for PeriodicDigits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.", self.whole)?;
        for d in self.pre.iter() {
            write!(f, "{d}")?;
        }
        f.write_str("(")?;
        for d in self.period.iter() {
            write!(f, "{d}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for PeriodicDigits {
    type Err = Error;

    /// Accepts `"0.(21)"`, `"0.5(0)"`, `"1.(0)"` and terminating `"0.25"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseDigits(s.to_string());
        let (whole, rest) = s.trim().split_once('.').ok_or_else(bad)?;
        let whole = whole.parse::<u8>().map_err(|_| bad())?;
        let (pre, period) = match rest.split_once('(') {
            Some((pre, tail)) => (pre, tail.strip_suffix(')').ok_or_else(bad)?),
            None => (rest, "0"),
        };
        let parse = |t: &str| -> Result<Vec<u8>> {
            t.chars()
                .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(bad))
                .collect()
        };
        PeriodicDigits::new(whole, parse(pre)?, parse(period)?)
    }
}

fn canonical(pre: Vec<u8>, mut period: Vec<u8>) -> (Vec<u8>, Vec<u8>) {
    let k = period.len();
    if let Some(d) = (1..=k).find(|&d| k.is_multiple_of(d) && (d..k).all(|i| period[i] == period[i - d])) {
        period.truncate(d);
    }
    let mut pre = pre;
    while pre.last().is_some() && pre.last() == period.last() {
        pre.pop();
        period.rotate_right(1);
    }
    (pre, period)
}

fn pow10<I: Int>(e: usize) -> Result<I> {
    checked_pow(ten::<I>(), e).ok_or(Error::Overflow)
}

fn digits_to_int<I: Int>(ds: &[u8]) -> Result<I> {
    let mut acc = I::zero();
    for chunk in ds.chunks(18) {
        let word = chunk.iter().fold(0u64, |w, &d| w * 10 + u64::from(d));
        let word = I::from_u64(word).ok_or(Error::Overflow)?;
        acc = acc
            .checked_mul(&pow10::<I>(chunk.len())?)
            .and_then(|a| a.checked_add(&word))
            .ok_or(Error::Overflow)?;
    }
    Ok(acc)
}

/// Long division of `q ∈ (0, 1]`; the period is found at the first repeated
/// remainder, so memory is bounded by the denominator.
pub fn to_digit_stream<I: Int>(q: &Ratio<I>) -> Result<PeriodicDigits> {
    if !(q > &Ratio::zero() && q <= &Ratio::one()) {
        return Err(Error::OutOfRange { value: fmt_ratio(q), range: "(0, 1]" });
    }
    if q.is_one() {
        return Ok(PeriodicDigits::from_canonical(1, Vec::new(), vec![0]));
    }
    Ok(fractional_digits(q))
}

/// Digits of `q − ⌊q⌋` for any non-negative `q`; the integer part is dropped.
pub fn fractional_digits<I: Int>(q: &Ratio<I>) -> PeriodicDigits {
    let den = q.denom().clone();
    let rem = q.numer().mod_floor(&den);
    let (pre, period) = match (rem.to_u64(), den.to_u64()) {
        (Some(r), Some(d)) if d < 1 << 59 => long_division_u64(r, d),
        _ => long_division(rem, den),
    };
    PeriodicDigits::from_canonical(0, pre, period)
}

fn long_division_u64(mut r: u64, den: u64) -> (Vec<u8>, Vec<u8>) {
    enum Seen {
        Dense(Vec<u32>),
        Sparse(HashMap<u64, u32>),
    }
    let mut seen = if den <= 1 << 20 {
        Seen::Dense(vec![0; den as usize])
    } else {
        Seen::Sparse(HashMap::new())
    };
    let mut digits = Vec::new();
    loop {
        if r == 0 {
            return (digits, vec![0]);
        }
        // positions are stored 1-based so 0 means unseen
        let slot = digits.len() as u32 + 1;
        let prev = match &mut seen {
            Seen::Dense(v) => std::mem::replace(&mut v[r as usize], slot),
            Seen::Sparse(m) => m.insert(r, slot).unwrap_or(0),
        };
        if prev != 0 {
            let period = digits.split_off(prev as usize - 1);
            return (digits, period);
        }
        r *= 10;
        digits.push((r / den) as u8);
        r %= den;
    }
}

fn long_division<I: Int>(mut r: I, den: I) -> (Vec<u8>, Vec<u8>) {
    let ten = ten::<I>();
    let mut seen: HashMap<I, usize> = HashMap::new();
    let mut digits = Vec::new();
    loop {
        if r.is_zero() {
            return (digits, vec![0]);
        }
        if let Some(&start) = seen.get(&r) {
            let period = digits.split_off(start);
            return (digits, period);
        }
        seen.insert(r.clone(), digits.len());
        let (d, next) = (r * ten.clone()).div_rem(&den);
        digits.push(d.to_u8().expect("quotient digit below 10"));
        r = next;
    }
}

/// Inverse of [`to_digit_stream`]: the exact value of `whole.pre(period)`,
/// which must lie in `(0, 1]`.
pub fn from_period<I: Int>(whole: u8, pre: &[u8], period: &[u8]) -> Result<Ratio<I>> {
    let digits = PeriodicDigits::new(whole, pre.to_vec(), period.to_vec())?;
    let value = digits.value::<I>()?;
    if value.is_zero() || value > Ratio::one() {
        return Err(Error::OutOfRange { value: digits.to_string(), range: "(0, 1]" });
    }
    Ok(value)
}

/// Computable digit generators standing in for irrational rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DigitRule {
    /// Fractional part of `√m` for a non-square `m`.
    SqrtFrac(u64),
    /// Concatenated decimals of `start, start + 1, start + 2, …`.
    Champernowne(u64),
}

impl DigitRule {
    pub fn sqrt(m: u64) -> Result<Self> {
        let r = m.sqrt();
        if r * r == m {
            return Err(Error::Domain(format!("{m} is a perfect square")));
        }
        Ok(DigitRule::SqrtFrac(m))
    }

    pub fn champernowne(start: u64) -> Result<Self> {
        if start == 0 {
            return Err(Error::Domain("champernowne start must be positive".into()));
        }
        Ok(DigitRule::Champernowne(start))
    }

    fn digit_at(&self, n: usize) -> u8 {
        match *self {
            DigitRule::SqrtFrac(m) => {
                let root = sqrt_scaled(m, n);
                (root % 10u32).to_u8().expect("remainder below 10")
            }
            DigitRule::Champernowne(start) => champernowne_digit(start, n as u64),
        }
    }

    fn prefix(&self, len: usize) -> Vec<u8> {
        match *self {
            DigitRule::SqrtFrac(m) => {
                let text = sqrt_scaled(m, len).to_str_radix(10);
                text.bytes().skip(text.len() - len).map(|b| b - b'0').collect()
            }
            DigitRule::Champernowne(_) => (1..=len).map(|n| self.digit_at(n)).collect(),
        }
    }
}

impl fmt::Display for DigitRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DigitRule::SqrtFrac(m) => write!(f, "sqrt({m})"),
            DigitRule::Champernowne(s) => write!(f, "champernowne({s})"),
        }
    }
}

/// `⌊√m · 10^n⌋`.
fn sqrt_scaled(m: u64, n: usize) -> BigUint {
    let scaled = BigUint::from(m) * BigUint::from(10u32).pow(2 * n as u32);
    scaled.sqrt()
}

fn champernowne_digit(start: u64, n: u64) -> u8 {
    let mut pos = n - 1;
    let mut x = start;
    let mut width = x.to_string().len() as u64;
    loop {
        let block_end = 10u64.pow(width as u32);
        let span = (block_end - x) * width;
        if pos < span {
            let num = x + pos / width;
            let offset = pos % width;
            let text = num.to_string();
            return text.as_bytes()[offset as usize] - b'0';
        }
        pos -= span;
        x = block_end;
        width += 1;
    }
}

/// A digit map `position → digit`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DigitStream {
    Periodic(PeriodicDigits),
    Rule(DigitRule),
    /// ChaCha8 word `n` of stream `index` under `seed`, reduced mod 10.
    /// Labeled "generic": no irrationality claim is attached.
    Seeded { seed: u64, index: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    EventuallyPeriodic,
    RuleBased,
    Seeded,
}

impl StreamKind {
    pub fn label(self) -> &'static str {
        match self {
            StreamKind::EventuallyPeriodic => "periodic",
            StreamKind::RuleBased => "rule",
            StreamKind::Seeded => "seeded",
        }
    }
}

pub const PROBE_LEN: usize = 64;

impl DigitStream {
    pub fn kind(&self) -> StreamKind {
        match self {
            DigitStream::Periodic(_) => StreamKind::EventuallyPeriodic,
            DigitStream::Rule(_) => StreamKind::RuleBased,
            DigitStream::Seeded { .. } => StreamKind::Seeded,
        }
    }

    pub fn as_periodic(&self) -> Option<&PeriodicDigits> {
        match self {
            DigitStream::Periodic(p) => Some(p),
            _ => None,
        }
    }

    pub fn digit_at(&self, n: usize) -> u8 {
        assert!(n >= 1, "digit positions start at 1");
        match self {
            DigitStream::Periodic(p) => p.digit_at(n),
            DigitStream::Rule(r) => r.digit_at(n),
            DigitStream::Seeded { seed, index } => {
                let mut rng = seeded_rng(*seed, *index);
                rng.set_word_pos(n as u128);
                (rng.next_u32() % 10) as u8
            }
        }
    }

    /// Digits at positions `1..=len`.
    pub fn prefix(&self, len: usize) -> Vec<u8> {
        match self {
            DigitStream::Periodic(p) => (1..=len).map(|n| p.digit_at(n)).collect(),
            DigitStream::Rule(r) => r.prefix(len),
            DigitStream::Seeded { seed, index } => {
                let mut rng = seeded_rng(*seed, *index);
                rng.set_word_pos(1);
                (0..len).map(|_| (rng.next_u32() % 10) as u8).collect()
            }
        }
    }

    /// Digits at positions `from..from + len`.
    pub fn window(&self, from: usize, len: usize) -> Vec<u8> {
        match self {
            DigitStream::Seeded { seed, index } => {
                let mut rng = seeded_rng(*seed, *index);
                rng.set_word_pos(from as u128);
                (0..len).map(|_| (rng.next_u32() % 10) as u8).collect()
            }
            DigitStream::Rule(DigitRule::SqrtFrac(_)) => {
                let full = self.prefix(from + len - 1);
                full[from - 1..].to_vec()
            }
            _ => (from..from + len).map(|n| self.digit_at(n)).collect(),
        }
    }

    /// The first [`PROBE_LEN`] digits, used as a row fingerprint.
    pub fn probe(&self) -> Vec<u8> {
        self.prefix(PROBE_LEN)
    }
}

impl fmt::Display for DigitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DigitStream::Periodic(p) => p.fmt(f),
            DigitStream::Rule(r) => r.fmt(f),
            DigitStream::Seeded { seed, index } => write!(f, "chacha8(seed={seed},index={index})"),
        }
    }
}

impl From<PeriodicDigits> for DigitStream {
    fn from(p: PeriodicDigits) -> Self {
        DigitStream::Periodic(p)
    }
}

fn seeded_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
