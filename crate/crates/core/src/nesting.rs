//! Nested-interval refinement over an enumeration.
//!
//! Each step scans the enumeration from position 1 and takes the first two
//! elements strictly inside the current interval; the smaller becomes the new
//! left endpoint and the larger the new right endpoint. Limits of the endpoint
//! sequences are never represented as numbers, only through the last
//! bracketing pair.

use std::collections::{HashSet, BTreeSet};

use num_rational::Ratio;
use serde::Serialize;

use crate::digits::fractional_digits;
use crate::enumerate::Enumeration;
use crate::exact::{midpoint, OpenInterval};
use crate::Int;

/// An enumeration element together with its 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound(serialize = "I: Int"))]
pub struct Element<I: Int> {
    pub index: usize,
    #[serde(serialize_with = "crate::ser::ratio")]
    pub value: Ratio<I>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound(serialize = "I: Int"))]
pub struct Step<I: Int> {
    #[serde(serialize_with = "crate::ser::ratio")]
    pub a: Ratio<I>,
    #[serde(serialize_with = "crate::ser::ratio")]
    pub b: Ratio<I>,
    pub idx_a: usize,
    pub idx_b: usize,
    #[serde(serialize_with = "crate::ser::ratio")]
    pub width: Ratio<I>,
}

impl<I: Int> Step<I> {
    pub fn interval(&self) -> OpenInterval<I> {
        OpenInterval::new(self.a.clone(), self.b.clone()).expect("recorded steps are non-empty")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", bound(serialize = "I: Int"))]
pub enum Termination<I: Int> {
    BudgetExhausted,
    /// The (finite) sequence ran out with at most one element left inside
    /// `last`; `eta` lies in `last` and differs from that element.
    FiniteSequenceExhausted {
        last: OpenInterval<I>,
        remaining: Option<Element<I>>,
        #[serde(serialize_with = "crate::ser::ratio")]
        eta: Ratio<I>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound(serialize = "I: Int"))]
pub struct NestingTrace<I: Int> {
    pub base: OpenInterval<I>,
    pub steps: Vec<Step<I>>,
    /// Highest enumeration position examined.
    pub scan_budget_used: usize,
    pub termination: Termination<I>,
}

impl<I: Int> NestingTrace<I> {
    /// Interval after `k` steps; `0` is the base.
    pub fn interval(&self, k: usize) -> OpenInterval<I> {
        match k {
            0 => self.base.clone(),
            k => self.steps[k - 1].interval(),
        }
    }

    pub fn last_interval(&self) -> OpenInterval<I> {
        self.interval(self.steps.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanMode {
    /// Restart every scan at position 1, literally.
    Restart,
    /// Resume after the previous step's second hit. Everything before that
    /// point is outside the new interval, so the trace is identical.
    #[default]
    Frontier,
}

/// Runs the refinement over positions `1..=budget` of `seq`.
pub fn run_nesting<I: Int>(
    seq: &dyn Enumeration<I>,
    base: &OpenInterval<I>,
    budget: usize,
) -> NestingTrace<I> {
    run_nesting_with(seq, base, budget, ScanMode::Frontier)
}

pub fn run_nesting_with<I: Int>(
    seq: &dyn Enumeration<I>,
    base: &OpenInterval<I>,
    budget: usize,
    mode: ScanMode,
) -> NestingTrace<I> {
    enum Scan {
        Found,
        Budget,
        Exhausted,
    }

    let len = seq.len();
    let mut current = base.clone();
    let mut steps = Vec::new();
    let mut cursor = 1;
    let mut highest = 0;
    loop {
        let mut pos = match mode {
            ScanMode::Restart => 1,
            ScanMode::Frontier => cursor,
        };
        let mut hits: Vec<Element<I>> = Vec::with_capacity(2);
        let outcome = loop {
            if len.is_some_and(|l| pos > l) {
                break Scan::Exhausted;
            }
            if pos > budget {
                break Scan::Budget;
            }
            let Some(q) = seq.nth(pos) else {
                // an infinite source that stops answering has hit its own
                // scan cap, which is not evidence of finiteness
                break if len.is_some() { Scan::Exhausted } else { Scan::Budget };
            };
            highest = highest.max(pos);
            if current.contains(&q) {
                hits.push(Element { index: pos, value: q });
                if hits.len() == 2 {
                    break Scan::Found;
                }
            }
            pos += 1;
        };
        let termination = match outcome {
            Scan::Found => {
                let second = hits.pop().expect("two hits");
                let first = hits.pop().expect("two hits");
                let (lo, hi) = if first.value < second.value { (first, second) } else { (second, first) };
                current = OpenInterval::new(lo.value.clone(), hi.value.clone())
                    .expect("enumeration repeated an element");
                steps.push(Step {
                    width: current.width(),
                    a: lo.value,
                    b: hi.value,
                    idx_a: lo.index,
                    idx_b: hi.index,
                });
                cursor = pos + 1;
                continue;
            }
            Scan::Budget => Termination::BudgetExhausted,
            Scan::Exhausted => {
                let remaining = hits.pop();
                let eta = finite_witness(&current, remaining.as_ref().map(|e| &e.value));
                Termination::FiniteSequenceExhausted { last: current, remaining, eta }
            }
        };
        return NestingTrace { base: base.clone(), steps, scan_budget_used: highest, termination };
    }
}

/// Midpoint of `last`, or the midpoint of its left half when the midpoint is
/// the one element still inside.
fn finite_witness<I: Int>(last: &OpenInterval<I>, remaining: Option<&Ratio<I>>) -> Ratio<I> {
    let mid = last.midpoint();
    if remaining == Some(&mid) {
        midpoint(last.lo(), &mid)
    } else {
        mid
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexViolation {
    pub step: usize,
    pub element: usize,
}

/// Every element defining an endpoint of step `i` must sit at a position
/// `n ≥ i`.
pub fn check_defining_index<I: Int>(trace: &NestingTrace<I>) -> Vec<IndexViolation> {
    let mut out = Vec::new();
    for (k, s) in trace.steps.iter().enumerate() {
        let step = k + 1;
        for element in [s.idx_a, s.idx_b] {
            if element < step {
                out.push(IndexViolation { step, element });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExclusionViolation {
    pub element: usize,
    pub step: usize,
}

/// For each `v ≤ n` with at least `v` recorded steps, `q_v` must lie outside
/// the interval of step `v` and every later one.
pub fn check_exclusion<I: Int>(
    trace: &NestingTrace<I>,
    seq: &dyn Enumeration<I>,
    n: usize,
) -> Vec<ExclusionViolation> {
    let intervals: Vec<_> = trace.steps.iter().map(Step::interval).collect();
    let mut out = Vec::new();
    for v in 1..=n.min(intervals.len()) {
        let Some(q) = seq.nth(v) else { break };
        for (w, iv) in intervals.iter().enumerate().skip(v - 1) {
            if iv.contains(&q) {
                out.push(ExclusionViolation { element: v, step: w + 1 });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapSide {
    Left,
    Right,
}

/// A gap between consecutive endpoints on one side: `(a_i, a_{i+1})` or
/// `(b_{i+1}, b_i)`, with step `0` standing for the base endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound(serialize = "I: Int"))]
pub struct Gap<I: Int> {
    pub side: GapSide,
    pub outer_step: usize,
    pub inner_step: usize,
    #[serde(serialize_with = "crate::ser::ratio")]
    pub lo: Ratio<I>,
    #[serde(serialize_with = "crate::ser::ratio")]
    pub hi: Ratio<I>,
    /// Non-endpoint prefix elements strictly inside the gap.
    pub occupants: Vec<Element<I>>,
    /// Smallest-denominator rational in the gap that is absent from the
    /// scanned prefix. Prefix-relative: nothing is claimed about the rest of
    /// the enumeration.
    #[serde(serialize_with = "crate::ser::opt_ratio")]
    pub eta_candidate: Option<Ratio<I>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound(serialize = "I: Int"))]
pub struct GapReport<I: Int> {
    pub prefix: usize,
    pub denominator_bound: u64,
    /// Prefix positions inside the base interval that define an endpoint.
    pub endpoints: Vec<usize>,
    /// Prefix positions inside the base interval that do not.
    pub non_endpoints: Vec<usize>,
    pub gaps: Vec<Gap<I>>,
    pub note: Option<String>,
}

pub const DEFAULT_DENOMINATOR_BOUND: u64 = 1000;

/// Classifies `q_1..q_n` and reports, per endpoint gap, which non-endpoint
/// prefix elements occupy it plus a denominator-bounded candidate absent from
/// the prefix. The outer gaps `(a, a_1)` and `(b_1, b)` are included.
pub fn gap_occupancy<I: Int>(
    trace: &NestingTrace<I>,
    seq: &dyn Enumeration<I>,
    n: usize,
    denominator_bound: u64,
) -> GapReport<I> {
    let mut report = GapReport {
        prefix: n,
        denominator_bound,
        endpoints: Vec::new(),
        non_endpoints: Vec::new(),
        gaps: Vec::new(),
        note: None,
    };
    if trace.steps.len() < 2 {
        report.note = Some(format!(
            "{} recorded step(s); gap analysis needs at least 2",
            trace.steps.len()
        ));
        return report;
    }
    let defining: HashSet<usize> = trace.steps.iter().flat_map(|s| [s.idx_a, s.idx_b]).collect();
    let prefix: Vec<Element<I>> = (1..=n)
        .map_while(|i| seq.nth(i).map(|value| Element { index: i, value }))
        .collect();
    let seen: HashSet<&Ratio<I>> = prefix.iter().map(|e| &e.value).collect();
    let mut free = Vec::new();
    for e in prefix.iter().filter(|e| trace.base.contains(&e.value)) {
        if defining.contains(&e.index) {
            report.endpoints.push(e.index);
        } else {
            report.non_endpoints.push(e.index);
            free.push(e);
        }
    }

    let mut lefts = vec![(0, trace.base.lo().clone())];
    let mut rights = vec![(0, trace.base.hi().clone())];
    for (k, s) in trace.steps.iter().enumerate() {
        lefts.push((k + 1, s.a.clone()));
        rights.push((k + 1, s.b.clone()));
    }
    let mut push_gap = |side, outer: &(usize, Ratio<I>), inner: &(usize, Ratio<I>)| {
        let (lo, hi) = match side {
            GapSide::Left => (outer.1.clone(), inner.1.clone()),
            GapSide::Right => (inner.1.clone(), outer.1.clone()),
        };
        let occupants = free
            .iter()
            .filter(|e| lo < e.value && e.value < hi)
            .map(|e| (*e).clone())
            .collect();
        let eta_candidate = smallest_absent(&lo, &hi, denominator_bound, &seen);
        report.gaps.push(Gap {
            side,
            outer_step: outer.0,
            inner_step: inner.0,
            lo,
            hi,
            occupants,
            eta_candidate,
        });
    };
    for w in lefts.windows(2) {
        push_gap(GapSide::Left, &w[0], &w[1]);
    }
    for w in rights.windows(2) {
        push_gap(GapSide::Right, &w[0], &w[1]);
    }
    report
}

/// Smallest denominator first, then smallest value.
fn smallest_absent<I: Int>(
    lo: &Ratio<I>,
    hi: &Ratio<I>,
    bound: u64,
    exclude: &HashSet<&Ratio<I>>,
) -> Option<Ratio<I>> {
    for q in 1..=bound {
        let q = I::from_u64(q)?;
        let scaled = lo * Ratio::from_integer(q.clone());
        let mut p = scaled.floor().to_integer() + I::one();
        loop {
            let cand = Ratio::new_raw(p.clone(), q.clone());
            if &cand >= hi {
                break;
            }
            if p.gcd(&q).is_one() && !exclude.contains(&cand) {
                return Some(cand);
            }
            p = p + I::one();
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound(serialize = "I: Int"))]
pub struct EpilogReport<I: Int> {
    /// `min({b} ∪ {q_i ∈ (a, b) : i ≤ n})`.
    #[serde(serialize_with = "crate::ser::ratio")]
    pub x: Ratio<I>,
    /// `(a + x) / 2`.
    #[serde(serialize_with = "crate::ser::ratio")]
    pub eta: Ratio<I>,
    pub updates: Vec<Element<I>>,
    pub scanned: usize,
}

/// Running-minimum scan over the in-interval elements of `q_1..q_n`, starting
/// from `x = b`.
pub fn epilog_scan<I: Int>(
    seq: &dyn Enumeration<I>,
    base: &OpenInterval<I>,
    n: usize,
) -> EpilogReport<I> {
    let mut x = base.hi().clone();
    let mut updates = Vec::new();
    let mut scanned = 0;
    for i in 1..=n {
        let Some(q) = seq.nth(i) else { break };
        scanned = i;
        if base.contains(&q) && q < x {
            x = q.clone();
            updates.push(Element { index: i, value: q });
        }
    }
    let eta = midpoint(base.lo(), &x);
    EpilogReport { x, eta, updates, scanned }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", bound(serialize = "I: Int"))]
pub enum Witness<I: Int> {
    /// The nest stopped after `intervals` steps.
    FiniteNest {
        intervals: usize,
        last: OpenInterval<I>,
        #[serde(serialize_with = "crate::ser::ratio")]
        eta: Ratio<I>,
    },
    /// A non-endpoint element inside an endpoint gap. Only meaningful
    /// relative to the scanned prefix.
    GapOccupant {
        side: GapSide,
        #[serde(serialize_with = "crate::ser::ratio")]
        lo: Ratio<I>,
        #[serde(serialize_with = "crate::ser::ratio")]
        hi: Ratio<I>,
        element: Element<I>,
        prefix_relative: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case", bound(serialize = "I: Int"))]
pub enum ConditionStatus<I: Int> {
    Falsified { witness: Witness<I> },
    NotFalsifiedAtBudget,
}

/// Heuristic look at the decimal expansions of the last bracket. A long
/// shared prefix or short periods say nothing certain about the limit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeriodProbe {
    pub heuristic: bool,
    pub left_preperiod: usize,
    pub left_period: usize,
    pub right_preperiod: usize,
    pub right_period: usize,
    /// Leading fractional digits shared by both endpoints.
    pub agreeing_digits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound(serialize = "I: Int"))]
pub struct Evidence<I: Int> {
    pub steps: usize,
    pub scanned: usize,
    pub bracket: Option<OpenInterval<I>>,
    #[serde(serialize_with = "crate::ser::opt_ratio")]
    pub first_width: Option<Ratio<I>>,
    #[serde(serialize_with = "crate::ser::opt_ratio")]
    pub last_width: Option<Ratio<I>>,
    pub period_probe: Option<PeriodProbe>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound(serialize = "I: Int"))]
pub struct ConditionReport<I: Int> {
    pub condition: u8,
    #[serde(flatten)]
    pub status: ConditionStatus<I>,
    pub evidence: Evidence<I>,
}

impl<I: Int> ConditionReport<I> {
    pub fn is_falsified(&self) -> bool {
        matches!(self.status, ConditionStatus::Falsified { .. })
    }
}

/// Runs the refinement and reports on the four conditions.
pub fn condition_probe<I: Int>(
    seq: &dyn Enumeration<I>,
    base: &OpenInterval<I>,
    budget: usize,
) -> Vec<ConditionReport<I>> {
    let trace = run_nesting(seq, base, budget);
    condition_report(&trace, seq, DEFAULT_DENOMINATOR_BOUND)
}

/// Condition reports for an existing trace:
/// 1. the nest is infinite — falsified only by a finite nest;
/// 2. the endpoint limits coincide — not decidable from finite data;
/// 3. the common limit is irrational — not decidable from finite data;
/// 4. no non-endpoint element sits in an endpoint gap — checked on the
///    scanned prefix.
pub fn condition_report<I: Int>(
    trace: &NestingTrace<I>,
    seq: &dyn Enumeration<I>,
    denominator_bound: u64,
) -> Vec<ConditionReport<I>> {
    let steps = trace.steps.len();
    let base_evidence = Evidence {
        steps,
        scanned: trace.scan_budget_used,
        bracket: trace.steps.last().map(Step::interval),
        first_width: trace.steps.first().map(|s| s.width.clone()),
        last_width: trace.steps.last().map(|s| s.width.clone()),
        period_probe: None,
        notes: Vec::new(),
    };
    let with_note = |note: &str| {
        let mut e = base_evidence.clone();
        e.notes.push(note.to_string());
        e
    };
    let finite = matches!(trace.termination, Termination::FiniteSequenceExhausted { .. });

    let c1 = match &trace.termination {
        Termination::FiniteSequenceExhausted { last, eta, .. } => ConditionReport {
            condition: 1,
            status: ConditionStatus::Falsified {
                witness: Witness::FiniteNest { intervals: steps, last: last.clone(), eta: eta.clone() },
            },
            evidence: with_note("the input sequence is finite"),
        },
        Termination::BudgetExhausted => ConditionReport {
            condition: 1,
            status: ConditionStatus::NotFalsifiedAtBudget,
            evidence: with_note("budget exhausted; non-termination cannot be certified"),
        },
    };

    let vacuous = "finite nest: the endpoint sequences have no limits";
    let c2 = ConditionReport {
        condition: 2,
        status: ConditionStatus::NotFalsifiedAtBudget,
        evidence: with_note(if finite {
            vacuous
        } else {
            "not decidable from finite data; only the last bracket is known"
        }),
    };

    let mut c3_evidence = with_note(if finite {
        vacuous
    } else {
        "not decidable from finite data; period probe is heuristic"
    });
    if let Some(last) = trace.steps.last() {
        c3_evidence.period_probe = Some(period_probe(&last.a, &last.b));
    }
    let c3 = ConditionReport { condition: 3, status: ConditionStatus::NotFalsifiedAtBudget, evidence: c3_evidence };

    let gaps = gap_occupancy(trace, seq, trace.scan_budget_used, denominator_bound);
    let occupied = gaps.gaps.iter().find_map(|g| {
        g.occupants.first().map(|e| Witness::GapOccupant {
            side: g.side,
            lo: g.lo.clone(),
            hi: g.hi.clone(),
            element: e.clone(),
            prefix_relative: true,
        })
    });
    let mut c4_evidence = with_note("prefix-relative: only the scanned prefix is examined");
    if let Some(note) = &gaps.note {
        c4_evidence.notes.push(note.clone());
    }
    let c4 = ConditionReport {
        condition: 4,
        status: match occupied {
            Some(witness) => ConditionStatus::Falsified { witness },
            None => ConditionStatus::NotFalsifiedAtBudget,
        },
        evidence: c4_evidence,
    };
    vec![c1, c2, c3, c4]
}

fn period_probe<I: Int>(a: &Ratio<I>, b: &Ratio<I>) -> PeriodProbe {
    let left = fractional_digits(a);
    let right = fractional_digits(b);
    let agreeing_digits = if a.floor() == b.floor() {
        (1..=256).take_while(|&n| left.digit_at(n) == right.digit_at(n)).count()
    } else {
        0
    };
    PeriodProbe {
        heuristic: true,
        left_preperiod: left.preperiod().len(),
        left_period: left.period().len(),
        right_preperiod: right.preperiod().len(),
        right_period: right.period().len(),
        agreeing_digits,
    }
}

/// Every distinct prefix value, sorted; test helper for the η checks.
pub fn sorted_prefix<I: Int>(seq: &dyn Enumeration<I>, n: usize) -> BTreeSet<Ratio<I>> {
    (1..=n).map_while(|i| seq.nth(i)).collect()
}
