//! Injective, indexable enumerations of positive rationals and adapters over
//! them.
//!
//! Positions are 1-based. Generators that can only be produced sequentially
//! memoize their prefix behind a mutex, so concurrent readers always observe
//! the same prefix.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Signed;

use crate::exact::{fmt_ratio, parse_ratio, OpenInterval};
use crate::{Error, Int, Result};

#[allow(clippy::len_without_is_empty)]
pub trait Enumeration<I: Int>: Send + Sync {
    /// Spec string that rebuilds this enumeration via [`parse_enumeration`].
    fn id(&self) -> String;

    /// Element at position `i ≥ 1`, or `None` past the end of a finite
    /// enumeration (and for `i = 0`).
    fn nth(&self, i: usize) -> Option<Ratio<I>>;

    /// Length for finite enumerations.
    fn len(&self) -> Option<usize> {
        None
    }

    /// Position of `q`, searching at most `budget` positions unless the
    /// enumeration can invert itself directly.
    fn index_of(&self, q: &Ratio<I>, budget: usize) -> Option<usize> {
        (1..=budget)
            .map_while(|i| self.nth(i).map(|v| (i, v)))
            .find(|(_, v)| v == q)
            .map(|(i, _)| i)
    }
}

pub type SharedEnumeration<I> = Arc<dyn Enumeration<I>>;

/// Collects `nth(1..=n)`, stopping early for finite enumerations.
pub fn prefix<I: Int>(e: &dyn Enumeration<I>, n: usize) -> Vec<Ratio<I>> {
    (1..=n).map_while(|i| e.nth(i)).collect()
}

/// Calkin–Wilf order: position `i` walks the binary digits of `i` below the
/// leading one, `0` taking `a/b → a/(a+b)` and `1` taking `a/b → (a+b)/b`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CalkinWilf;

impl CalkinWilf {
    pub fn at<I: Int>(i: usize) -> Option<Ratio<I>> {
        if i == 0 {
            return None;
        }
        let (mut a, mut b) = (I::one(), I::one());
        let depth = usize::BITS - 1 - i.leading_zeros();
        for bit in (0..depth).rev() {
            let sum = a.checked_add(&b).expect("Calkin-Wilf term overflowed the backing integer");
            if i >> bit & 1 == 0 {
                b = sum;
            } else {
                a = sum;
            }
        }
        Some(Ratio::new_raw(a, b))
    }

    /// Inverse via the run-length encoding of the continued fraction; `None`
    /// for non-positive input or positions beyond `usize`.
    pub fn position<I: Int>(q: &Ratio<I>) -> Option<usize> {
        if !q.is_positive() {
            return None;
        }
        let (mut a, mut b) = (q.numer().clone(), q.denom().clone());
        // path bits collected leaf → root as (bit, run length)
        let mut runs: Vec<(bool, usize)> = Vec::new();
        while !(a.is_one() && b.is_one()) {
            if a < b {
                let k = (b.clone() - I::one()) / a.clone();
                b = b - k.clone() * a.clone();
                runs.push((false, k.to_usize()?));
            } else {
                let k = (a.clone() - I::one()) / b.clone();
                a = a - k.clone() * b.clone();
                runs.push((true, k.to_usize()?));
            }
        }
        let mut index: usize = 1;
        for &(bit, run) in runs.iter().rev() {
            for _ in 0..run {
                index = index.checked_mul(2)?.checked_add(usize::from(bit))?;
            }
        }
        Some(index)
    }
}

impl<I: Int> Enumeration<I> for CalkinWilf {
    fn id(&self) -> String {
        "calkin-wilf".into()
    }

    fn nth(&self, i: usize) -> Option<Ratio<I>> {
        Self::at(i)
    }

    fn index_of(&self, q: &Ratio<I>, _budget: usize) -> Option<usize> {
        Self::position(q)
    }
}

/// Sequentially generated enumeration with a memoized prefix.
struct Memoized<I: Int, G> {
    id: &'static str,
    state: Mutex<(Vec<Ratio<I>>, G)>,
}

impl<I: Int, G: Iterator<Item = Ratio<I>>> Memoized<I, G> {
    fn new(id: &'static str, gen: G) -> Self {
        Memoized { id, state: Mutex::new((Vec::new(), gen)) }
    }
}

impl<I: Int, G: Iterator<Item = Ratio<I>> + Send> Enumeration<I> for Memoized<I, G> {
    fn id(&self) -> String {
        self.id.into()
    }

    fn nth(&self, i: usize) -> Option<Ratio<I>> {
        if i == 0 {
            return None;
        }
        let mut guard = self.state.lock().expect("enumeration memo poisoned");
        let (cache, gen) = &mut *guard;
        while cache.len() < i {
            cache.push(gen.next()?);
        }
        Some(cache[i - 1].clone())
    }
}

/// Cantor's zig-zag through the `p/q` grid by anti-diagonals `p + q = s`,
/// alternating direction, skipping non-reduced pairs:
/// `1/1, 1/2, 2/1, 3/1, 1/3, 1/4, 2/3, 3/2, 4/1, …`.
pub fn zigzag<I: Int>() -> SharedEnumeration<I> {
    let gen = (2u64..).flat_map(|s| {
        let ps: Box<dyn Iterator<Item = u64> + Send> =
            if s % 2 == 1 { Box::new(1..s) } else { Box::new((1..s).rev()) };
        ps.filter(move |&p| p.gcd(&(s - p)) == 1).map(move |p| pair(p, s - p))
    });
    Arc::new(Memoized::new("zigzag", gen))
}

/// Level `m` holds the reduced `p/q` with `max(p, q) = m`, ordered by
/// denominator then numerator: `m/1, m/2, …, m/(m−1), 1/m, 2/m, …, (m−1)/m`.
/// Small-denominator elements of every level come before the fine ones.
pub fn denominator_major<I: Int>() -> SharedEnumeration<I> {
    let gen = (1u64..).flat_map(|m| {
        let wide = (1..m.max(2)).filter(move |&q| m.gcd(&q) == 1).map(move |q| (m, q));
        let tall = (1..m).filter(move |&p| p.gcd(&m) == 1).map(move |p| (p, m));
        let first: Box<dyn Iterator<Item = (u64, u64)> + Send> =
            if m == 1 { Box::new(std::iter::once((1, 1))) } else { Box::new(wide.chain(tall)) };
        first.map(|(p, q)| pair(p, q))
    });
    Arc::new(Memoized::new("denominator-major", gen))
}

fn pair<I: Int>(p: u64, q: u64) -> Ratio<I> {
    let conv = |x: u64| I::from_u64(x).expect("grid coordinate fits the backing integer");
    Ratio::new_raw(conv(p), conv(q))
}

/// A finite, explicitly listed sequence.
pub struct FiniteList<I: Int> {
    items: Vec<Ratio<I>>,
}

impl<I: Int> FiniteList<I> {
    pub fn new(items: Vec<Ratio<I>>) -> Result<Self> {
        let mut seen = HashSet::new();
        if let Some(dup) = items.iter().find(|q| !seen.insert(*q)) {
            return Err(Error::DuplicateElement(fmt_ratio(dup)));
        }
        Ok(FiniteList { items })
    }

    pub fn shared(items: Vec<Ratio<I>>) -> Result<SharedEnumeration<I>> {
        Ok(Arc::new(Self::new(items)?))
    }
}

impl<I: Int> Enumeration<I> for FiniteList<I> {
    fn id(&self) -> String {
        let items: Vec<String> = self.items.iter().map(fmt_ratio).collect();
        format!("list={}", items.join(","))
    }

    fn nth(&self, i: usize) -> Option<Ratio<I>> {
        i.checked_sub(1).and_then(|k| self.items.get(k)).cloned()
    }

    fn len(&self) -> Option<usize> {
        Some(self.items.len())
    }
}

/// Default cap on how far an interval adapter scans its source.
pub const DEFAULT_SCAN_LIMIT: usize = 1 << 24;

/// The elements of `inner` lying strictly inside `window`, in order of
/// discovery. The scan frontier is memoized so `nth(i + 1)` resumes where
/// `nth(i)` stopped.
pub struct IntervalAdapter<I: Int> {
    inner: SharedEnumeration<I>,
    window: OpenInterval<I>,
    scan_limit: usize,
    state: Mutex<AdapterState<I>>,
}

struct AdapterState<I: Int> {
    found: Vec<(usize, Ratio<I>)>,
    next: usize,
    exhausted: bool,
}

impl<I: Int> IntervalAdapter<I> {
    pub fn new(inner: SharedEnumeration<I>, window: OpenInterval<I>) -> Self {
        Self::with_scan_limit(inner, window, DEFAULT_SCAN_LIMIT)
    }

    pub fn with_scan_limit(
        inner: SharedEnumeration<I>,
        window: OpenInterval<I>,
        scan_limit: usize,
    ) -> Self {
        let state = AdapterState { found: Vec::new(), next: 1, exhausted: false };
        IntervalAdapter { inner, window, scan_limit, state: Mutex::new(state) }
    }

    pub fn window(&self) -> &OpenInterval<I> {
        &self.window
    }

    /// Position in the source enumeration of this adapter's `i`-th element.
    pub fn source_position(&self, i: usize) -> Option<usize> {
        self.advance(i).map(|(pos, _)| pos)
    }

    fn advance(&self, i: usize) -> Option<(usize, Ratio<I>)> {
        if i == 0 {
            return None;
        }
        let mut st = self.state.lock().expect("adapter frontier poisoned");
        while st.found.len() < i && !st.exhausted {
            if st.next > self.scan_limit {
                return None;
            }
            let pos = st.next;
            st.next += 1;
            match self.inner.nth(pos) {
                Some(q) if self.window.contains(&q) => st.found.push((pos, q)),
                Some(_) => {}
                None => st.exhausted = true,
            }
        }
        st.found.get(i - 1).cloned()
    }
}

impl<I: Int> Enumeration<I> for IntervalAdapter<I> {
    fn id(&self) -> String {
        format!("{} | window={},{}", self.inner.id(), self.window.lo(), self.window.hi())
    }

    fn nth(&self, i: usize) -> Option<Ratio<I>> {
        self.advance(i).map(|(_, q)| q)
    }

    fn len(&self) -> Option<usize> {
        let total = self.inner.len()?;
        self.advance(total);
        let st = self.state.lock().expect("adapter frontier poisoned");
        Some(st.found.len())
    }
}

/// Restricts `inner` to the elements inside `window`.
pub fn unit_interval_adapter<I: Int>(
    inner: SharedEnumeration<I>,
    window: OpenInterval<I>,
) -> SharedEnumeration<I> {
    Arc::new(IntervalAdapter::new(inner, window))
}

/// Finite description of a bijection of positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReorderSpec {
    Identity,
    /// Disjoint swaps `(i, j)`; each position may appear at most once.
    Transpositions(Vec<(usize, usize)>),
    /// Consecutive blocks whose sizes cycle through the list; positions are
    /// reversed inside each block, so `[2]` maps `1, 2, 3, 4, …` to
    /// `2, 1, 4, 3, …`.
    BlockInterleave(Vec<usize>),
    /// Cyclic left shift by `shift` of positions `1..=len`.
    PrefixRotation { len: usize, shift: usize },
}

impl ReorderSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ReorderSpec::Identity => Ok(()),
            ReorderSpec::Transpositions(swaps) => {
                let mut seen = HashSet::new();
                for &(i, j) in swaps {
                    if i == 0 || j == 0 {
                        return Err(Error::Reorder("positions start at 1".into()));
                    }
                    if i == j {
                        return Err(Error::Reorder(format!("swap({i},{j}) is not a transposition")));
                    }
                    if !seen.insert(i) || !seen.insert(j) {
                        return Err(Error::Reorder(format!(
                            "swap({i},{j}) reuses a position; the list is not a bijection"
                        )));
                    }
                }
                Ok(())
            }
            ReorderSpec::BlockInterleave(sizes) => {
                if sizes.is_empty() || sizes.contains(&0) {
                    return Err(Error::Reorder("block sizes must be positive".into()));
                }
                Ok(())
            }
            ReorderSpec::PrefixRotation { len, .. } => {
                if *len == 0 {
                    return Err(Error::Reorder("rotation length must be positive".into()));
                }
                Ok(())
            }
        }
    }

    pub fn inverse(&self) -> ReorderSpec {
        match self {
            ReorderSpec::PrefixRotation { len, shift } => {
                ReorderSpec::PrefixRotation { len: *len, shift: (len - shift % len) % len }
            }
            other => other.clone(),
        }
    }

    /// Parses `identity`, `swap(1,2);swap(5,9)`, `block(2)` / `block(2,3)`,
    /// or `rotate(len,shift)`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Reorder(format!("cannot parse {text:?}"));
        let text = text.trim();
        if text == "identity" {
            return Ok(ReorderSpec::Identity);
        }
        let call = |t: &str| -> Result<(String, Vec<usize>)> {
            let (name, rest) = t.trim().split_once('(').ok_or_else(bad)?;
            let args = rest.strip_suffix(')').ok_or_else(bad)?;
            let args = args
                .split(',')
                .map(|a| a.trim().parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            Ok((name.trim().to_string(), args))
        };
        let spec = if text.starts_with("swap") {
            let swaps = text
                .split(';')
                .map(|part| match call(part)? {
                    (name, args) if name == "swap" && args.len() == 2 => Ok((args[0], args[1])),
                    _ => Err(bad()),
                })
                .collect::<Result<Vec<_>>>()?;
            ReorderSpec::Transpositions(swaps)
        } else {
            match call(text)? {
                (name, args) if name == "block" => ReorderSpec::BlockInterleave(args),
                (name, args) if name == "rotate" && args.len() == 2 => {
                    ReorderSpec::PrefixRotation { len: args[0], shift: args[1] }
                }
                _ => return Err(bad()),
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for ReorderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReorderSpec::Identity => f.write_str("identity"),
            ReorderSpec::Transpositions(swaps) => {
                let parts: Vec<String> = swaps.iter().map(|(i, j)| format!("swap({i},{j})")).collect();
                f.write_str(&parts.join(";"))
            }
            ReorderSpec::BlockInterleave(sizes) => {
                let parts: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
                write!(f, "block({})", parts.join(","))
            }
            ReorderSpec::PrefixRotation { len, shift } => write!(f, "rotate({len},{shift})"),
        }
    }
}

/// Position map compiled from a validated [`ReorderSpec`].
#[derive(Debug, Clone)]
pub struct Reordering {
    spec: ReorderSpec,
    swaps: HashMap<usize, usize>,
    cycle: usize,
}

impl Reordering {
    pub fn new(spec: ReorderSpec) -> Result<Self> {
        spec.validate()?;
        let mut swaps = HashMap::new();
        if let ReorderSpec::Transpositions(list) = &spec {
            for &(i, j) in list {
                swaps.insert(i, j);
                swaps.insert(j, i);
            }
        }
        let cycle = match &spec {
            ReorderSpec::BlockInterleave(sizes) => sizes.iter().sum(),
            _ => 0,
        };
        Ok(Reordering { spec, swaps, cycle })
    }

    /// Source position feeding output position `i`.
    pub fn map(&self, i: usize) -> usize {
        match &self.spec {
            ReorderSpec::Identity => i,
            ReorderSpec::Transpositions(_) => *self.swaps.get(&i).unwrap_or(&i),
            ReorderSpec::BlockInterleave(sizes) => {
                let base = (i - 1) / self.cycle * self.cycle;
                let mut t = (i - 1) % self.cycle;
                let mut start = base;
                for &size in sizes {
                    if t < size {
                        return start + (size - 1 - t) + 1;
                    }
                    t -= size;
                    start += size;
                }
                unreachable!("offset lies inside one cycle")
            }
            ReorderSpec::PrefixRotation { len, shift } => {
                if i <= *len {
                    (i - 1 + shift) % len + 1
                } else {
                    i
                }
            }
        }
    }
}

/// `nth(i) = inner.nth(spec(i))`.
pub struct Reordered<I: Int> {
    inner: SharedEnumeration<I>,
    reordering: Reordering,
}

impl<I: Int> Enumeration<I> for Reordered<I> {
    fn id(&self) -> String {
        format!("{} | reorder={}", self.inner.id(), self.reordering.spec)
    }

    fn nth(&self, i: usize) -> Option<Ratio<I>> {
        if i == 0 {
            return None;
        }
        let j = self.reordering.map(i);
        if let Some(len) = self.inner.len() {
            if i > len || j > len {
                return None;
            }
        }
        self.inner.nth(j)
    }

    fn len(&self) -> Option<usize> {
        self.inner.len()
    }
}

pub fn reorder<I: Int>(inner: SharedEnumeration<I>, spec: ReorderSpec) -> Result<SharedEnumeration<I>> {
    Ok(Arc::new(Reordered { inner, reordering: Reordering::new(spec)? }))
}

/// Builds an enumeration from its spec string: a base
/// (`calkin-wilf`, `zigzag`, `denominator-major`, or `list=1/2,1/4,…`)
/// followed by `| window=lo,hi` and `| reorder=…` stages applied left to
/// right.
pub fn parse_enumeration<I: Int>(text: &str) -> Result<SharedEnumeration<I>> {
    let mut stages = text.split('|').map(str::trim);
    let base = stages.next().unwrap_or_default();
    let mut e: SharedEnumeration<I> = match base {
        "calkin-wilf" => Arc::new(CalkinWilf),
        "zigzag" => zigzag(),
        "denominator-major" => denominator_major(),
        other => match other.strip_prefix("list=") {
            Some(items) => {
                let items = items
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(parse_ratio)
                    .collect::<Result<Vec<_>>>()?;
                FiniteList::shared(items)?
            }
            None => return Err(Error::EnumerationSpec(format!("unknown enumeration {other:?}"))),
        },
    };
    for stage in stages {
        let (key, value) = stage
            .split_once('=')
            .ok_or_else(|| Error::EnumerationSpec(format!("malformed stage {stage:?}")))?;
        e = match key.trim() {
            "window" => unit_interval_adapter(e, OpenInterval::parse(value)?),
            "reorder" => reorder(e, ReorderSpec::parse(value)?)?,
            other => return Err(Error::EnumerationSpec(format!("unknown stage {other:?}"))),
        };
    }
    Ok(e)
}

impl<I: Int> fmt::Debug for dyn Enumeration<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Enumeration({})", self.id())
    }
}
