use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use num_integer::Roots;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::digits::{to_digit_stream, DigitRule, DigitStream};
use crate::enumerate::{unit_interval_adapter, CalkinWilf, SharedEnumeration};
use crate::exact::{fmt_ratio, OpenInterval};
use crate::{Error, Int, Result};

/// A family of digit generators; member `k` (0-based) is one stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum RowFamily {
    /// `√m` fractional parts over the non-squares `m = 2, 3, 5, 6, …`.
    /// Exact but costly at deep positions.
    Sqrt,
    /// Champernowne-style concatenation starting at `k + 1`.
    Champernowne,
    /// ChaCha8 stream `k` under `seed`.
    Seeded { seed: u64 },
}

impl RowFamily {
    pub fn member(self, k: usize) -> DigitStream {
        match self {
            RowFamily::Sqrt => {
                DigitStream::Rule(DigitRule::sqrt(nth_non_square(k as u64)).expect("non-square"))
            }
            RowFamily::Champernowne => {
                DigitStream::Rule(DigitRule::champernowne(k as u64 + 1).expect("positive start"))
            }
            RowFamily::Seeded { seed } => DigitStream::Seeded { seed, index: k as u64 },
        }
    }

    /// Parses `sqrt`, `champernowne`, or `seeded:<seed>`.
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "sqrt" => Ok(RowFamily::Sqrt),
            "champernowne" => Ok(RowFamily::Champernowne),
            other => other
                .strip_prefix("seeded:")
                .and_then(|s| s.trim().parse().ok())
                .map(|seed| RowFamily::Seeded { seed })
                .ok_or_else(|| Error::Domain(format!("unknown row family {other:?}"))),
        }
    }

    pub fn parse_list(text: &str) -> Result<Vec<Self>> {
        text.split(',').map(Self::parse).collect()
    }
}

impl fmt::Display for RowFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowFamily::Sqrt => f.write_str("sqrt"),
            RowFamily::Champernowne => f.write_str("champernowne"),
            RowFamily::Seeded { seed } => write!(f, "seeded:{seed}"),
        }
    }
}

/// `k`-th (0-based) integer `m ≥ 2` that is not a perfect square.
fn nth_non_square(k: u64) -> u64 {
    // m = n + round(√n) enumerates the non-squares for n = 1, 2, …
    let n = k + 1;
    let r = n.sqrt();
    n + if n - r * r > r { r + 1 } else { r }
}

/// Odd rows come from `g`, even rows from the `h` families in rotation.
#[derive(Clone)]
pub struct TableSpec<I: Int> {
    pub g: SharedEnumeration<I>,
    pub h: Vec<RowFamily>,
}

impl<I: Int> TableSpec<I> {
    pub fn new(g: SharedEnumeration<I>, h: Vec<RowFamily>) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::Domain("at least one generator family is required".into()));
        }
        Ok(TableSpec { g, h })
    }

    /// Calkin–Wilf restricted to `(0, 1)` against the given families.
    pub fn calkin_wilf(h: Vec<RowFamily>) -> Result<Self> {
        Self::new(unit_interval_adapter(Arc::new(CalkinWilf), OpenInterval::unit()), h)
    }

    /// Even row `2n` is member `(n − 1) / |h|` of family `h[(n − 1) mod |h|]`.
    pub fn h_row(&self, n: usize) -> (RowFamily, usize) {
        let family = self.h[(n - 1) % self.h.len()];
        (family, (n - 1) / self.h.len())
    }
}

impl<I: Int> fmt::Debug for TableSpec<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TableSpec").field("g", &self.g.id()).field("h", &self.h).finish()
    }
}

/// Where a row came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "origin", rename_all = "kebab-case")]
pub enum RowOrigin {
    Rational { g_index: usize, value: String },
    Generator { family: RowFamily, member: usize },
    Synthesized(Synthesized),
}

/// `0.0…0 d 1…1 000…` with `d` at `position` and `ones` trailing ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Synthesized {
    pub position: usize,
    pub digit: u8,
    pub ones: usize,
}

impl Synthesized {
    pub fn digits(&self) -> Vec<u8> {
        let mut pre = vec![0; self.position + self.ones];
        pre[self.position - 1] = self.digit;
        pre[self.position..].fill(1);
        pre
    }

    pub fn stream(&self) -> DigitStream {
        crate::digits::PeriodicDigits::new(0, self.digits(), vec![0])
            .expect("terminating expansion")
            .into()
    }

    pub fn value<I: Int>(&self) -> Result<Ratio<I>> {
        crate::digits::from_period(0, &self.digits(), &[0])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Row {
    pub stream: DigitStream,
    pub origin: RowOrigin,
}

impl Row {
    pub fn synthesized(s: Synthesized) -> Self {
        Row { stream: s.stream(), origin: RowOrigin::Synthesized(s) }
    }

    /// Exact fraction for rational rows, generator id otherwise.
    pub fn label(&self) -> String {
        match &self.origin {
            RowOrigin::Rational { value, .. } => value.clone(),
            RowOrigin::Generator { .. } => self.stream.to_string(),
            RowOrigin::Synthesized(s) => match s.value::<num_bigint::BigInt>() {
                Ok(v) => fmt_ratio(&v),
                Err(_) => self.stream.to_string(),
            },
        }
    }
}

/// A materialized window of the table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitTable {
    rows: Vec<Row>,
}

impl DigitTable {
    pub fn from_rows(rows: Vec<Row>) -> Self {
        DigitTable { rows }
    }

    pub fn window(&self) -> usize {
        self.rows.len()
    }

    /// Row `n ≥ 1`.
    pub fn row(&self, n: usize) -> &Row {
        &self.rows[n - 1]
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn digit(&self, row: usize, position: usize) -> u8 {
        self.row(row).stream.digit_at(position)
    }

    /// One line per row: `<position> <kind> <first 64 digits> <label>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, row) in self.rows.iter().enumerate() {
            let probe: String = row.stream.probe().iter().map(|d| char::from(b'0' + d)).collect();
            writeln!(out, "{} {} {} {}", k + 1, row.stream.kind().label(), probe, row.label())
                .expect("writing to a String");
        }
        out
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.rows.len() {
            return Err(Error::Window { requested: n, available: self.rows.len() });
        }
        Ok(())
    }
}

/// Materializes rows `1..=n`.
pub fn build_table<I: Int>(spec: &TableSpec<I>, n: usize) -> Result<DigitTable> {
    if n == 0 {
        return Err(Error::Domain("window must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(n);
    for k in 1..=n {
        let row = if k % 2 == 1 {
            let idx = k.div_ceil(2);
            let q = spec.g.nth(idx).ok_or(Error::RowsExhausted(k))?;
            if !(q > Ratio::zero() && q < Ratio::one()) {
                return Err(Error::OutOfRange { value: fmt_ratio(&q), range: "(0, 1)" });
            }
            Row {
                stream: to_digit_stream(&q)?.into(),
                origin: RowOrigin::Rational { g_index: idx, value: fmt_ratio(&q) },
            }
        } else {
            let (family, member) = spec.h_row(k / 2);
            Row { stream: family.member(member), origin: RowOrigin::Generator { family, member } }
        };
        rows.push(row);
    }
    check_distinct(&rows)?;
    Ok(DigitTable { rows })
}

/// Rows that share a probe are duplicates unless both are rational and
/// exactly different.
fn check_distinct(rows: &[Row]) -> Result<()> {
    let mut seen: HashMap<Vec<u8>, Vec<usize>> = HashMap::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        let bucket = seen.entry(row.stream.probe()).or_default();
        for &other in bucket.iter() {
            let both_exact = row.stream.as_periodic().is_some()
                && rows[other].stream.as_periodic().is_some();
            if !both_exact || rows[other].stream == row.stream {
                return Err(Error::DuplicateRows { first: other + 1, second: k + 1 });
            }
        }
        bucket.push(k);
    }
    Ok(())
}

/// `d_kk` for `k = 1..=n`.
pub fn diagonal(t: &DigitTable, n: usize) -> Result<Vec<u8>> {
    t.check(n)?;
    Ok((1..=n).map(|k| t.digit(k, k)).collect())
}

/// Digit substitution with no fixed points and no 9 in its image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AntidiagonalRule([u8; 10]);

impl AntidiagonalRule {
    pub fn new(map: [u8; 10]) -> Result<Self> {
        for (d, &m) in map.iter().enumerate() {
            if m as usize == d {
                return Err(Error::AntidiagonalRule(format!("{d} maps to itself")));
            }
            if m >= 9 {
                return Err(Error::AntidiagonalRule(format!("{d} maps to {m}; outputs must be 0..=8")));
            }
        }
        Ok(AntidiagonalRule(map))
    }

    pub fn apply(&self, d: u8) -> u8 {
        self.0[d as usize]
    }
}

impl Default for AntidiagonalRule {
    /// `d ↦ 5` for `d ≠ 5`, `5 ↦ 4`.
    fn default() -> Self {
        AntidiagonalRule([5, 5, 5, 5, 5, 4, 5, 5, 5, 5])
    }
}

pub fn antidiagonal(t: &DigitTable, n: usize, rule: &AntidiagonalRule) -> Result<Vec<u8>> {
    Ok(diagonal(t, n)?.into_iter().map(|d| rule.apply(d)).collect())
}

/// Row `n`'s `n`-th digit equals `n mod 10`.
pub fn is_n_modular(s: &DigitStream, n: usize) -> bool {
    s.digit_at(n) as usize == n % 10
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::{PeriodicDigits, PROBE_LEN};
    use crate::enumerate::FiniteList;

    fn cw_table(n: usize) -> DigitTable {
        let spec = TableSpec::<i64>::calkin_wilf(vec![RowFamily::Sqrt]).unwrap();
        build_table(&spec, n).unwrap()
    }

    fn constant(d: u8) -> Row {
        let s: DigitStream = PeriodicDigits::new(0, vec![d; 20], vec![0]).unwrap().into();
        Row { origin: RowOrigin::Generator { family: RowFamily::Sqrt, member: d as usize }, stream: s }
    }

    #[test]
    fn non_squares() {
        let got: Vec<u64> = (0..10).map(nth_non_square).collect();
        assert_eq!(got, vec![2, 3, 5, 6, 7, 8, 10, 11, 12, 13]);
    }

    #[test]
    fn interleave() {
        let t = cw_table(4);
        let half: Ratio<i64> = Ratio::new(1, 2);
        assert_eq!(t.row(1).stream, DigitStream::from(to_digit_stream(&half).unwrap()));
        assert_eq!(t.row(2).stream, DigitStream::Rule(DigitRule::sqrt(2).unwrap()));
        assert_eq!(t.row(3).stream, DigitStream::from(to_digit_stream(&Ratio::new(1i64, 3)).unwrap()));
        assert_eq!(t.row(4).stream, DigitStream::Rule(DigitRule::sqrt(3).unwrap()));
        assert_eq!(t.row(2).stream.prefix(5), vec![4, 1, 4, 2, 1]);
        let one = cw_table(1);
        assert_eq!(one.window(), 1);
        assert!(cw_table(21).rows().iter().step_by(2).all(|r| r.stream.as_periodic().is_some()));
    }

    #[test]
    fn rotation_over_families() {
        let spec =
            TableSpec::<i64>::calkin_wilf(vec![RowFamily::Champernowne, RowFamily::Seeded { seed: 3 }]).unwrap();
        let t = build_table(&spec, 8).unwrap();
        assert_eq!(t.row(2).origin, RowOrigin::Generator { family: RowFamily::Champernowne, member: 0 });
        assert_eq!(t.row(4).origin, RowOrigin::Generator { family: RowFamily::Seeded { seed: 3 }, member: 0 });
        assert_eq!(t.row(6).origin, RowOrigin::Generator { family: RowFamily::Champernowne, member: 1 });
        assert_eq!(t.row(6).stream.prefix(4), vec![2, 3, 4, 5]);
    }

    #[test]
    fn rows_outside_unit_interval_are_rejected() {
        let g = FiniteList::shared(vec![Ratio::new(3i64, 2)]).unwrap();
        let spec = TableSpec::new(g, vec![RowFamily::Sqrt]).unwrap();
        assert!(matches!(build_table(&spec, 1), Err(Error::OutOfRange { .. })));
        let g = FiniteList::shared(vec![Ratio::new(1i64, 2)]).unwrap();
        let spec = TableSpec::new(g, vec![RowFamily::Sqrt]).unwrap();
        assert_eq!(build_table(&spec, 3), Err(Error::RowsExhausted(3)));
    }

    #[test]
    fn duplicate_generator_rows_are_rejected() {
        let rows = vec![constant(3), constant(4), constant(3)];
        assert_eq!(check_distinct(&rows), Err(Error::DuplicateRows { first: 1, second: 3 }));
    }

    #[test]
    fn diagonal_of_constant_rows() {
        let rows = (1..=12).map(|k| constant((k % 10) as u8)).collect();
        let t = DigitTable::from_rows(rows);
        assert_eq!(diagonal(&t, 12).unwrap(), vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 0, 1, 2]);
        assert!(diagonal(&t, 13).is_err());
    }

    #[test]
    fn antidiagonal_default_rule() {
        let rule = AntidiagonalRule::default();
        let apply = |ds: &[u8]| ds.iter().map(|&d| rule.apply(d)).collect::<Vec<_>>();
        assert_eq!(apply(&[1, 2, 3]), vec![5, 5, 5]);
        assert_eq!(apply(&[5, 5, 0]), vec![4, 4, 5]);
        assert!(AntidiagonalRule::new([1, 0, 0, 0, 0, 0, 0, 0, 0, 0]).is_ok());
        assert!(AntidiagonalRule::new([1, 1, 0, 0, 0, 0, 0, 0, 0, 0]).is_err());
        assert!(AntidiagonalRule::new([9, 0, 0, 0, 0, 0, 0, 0, 0, 0]).is_err());

        let t = cw_table(200);
        let anti = antidiagonal(&t, 200, &rule).unwrap();
        for (k, d) in anti.iter().enumerate() {
            assert_ne!(*d, t.digit(k + 1, k + 1));
        }
    }

    #[test]
    fn n_modularity() {
        let r3: DigitStream = "0.003".parse::<PeriodicDigits>().unwrap().into();
        assert!(is_n_modular(&r3, 3));
        // an all-9 tail is not representable; a long 9 run keeps the digit
        assert!("0.12345678(9)".parse::<PeriodicDigits>().is_err());
        let r9: DigitStream = "0.1234567899999999".parse::<PeriodicDigits>().unwrap().into();
        assert!(is_n_modular(&r9, 9));
        let s: DigitStream = to_digit_stream(&Ratio::new(7i64, 33)).unwrap().into();
        assert!((1..=1000).all(|n| !is_n_modular(&s, n)));
    }

    #[test]
    fn dump_format() {
        let t = cw_table(2);
        let dump = t.dump();
        let lines: Vec<_> = dump.lines().collect();
        assert_eq!(lines.len(), 2);
        let first: Vec<_> = lines[0].split(' ').collect();
        assert_eq!(first[0], "1");
        assert_eq!(first[1], "periodic");
        assert_eq!(first[2].len(), PROBE_LEN);
        assert!(first[2].starts_with("5000"));
        assert_eq!(first[3], "1/2");
        assert!(lines[1].ends_with("sqrt(2)"));
    }
}
