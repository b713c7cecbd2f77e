use std::collections::HashSet;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::table::{build_table, is_n_modular, DigitTable, Row, RowOrigin, Synthesized, TableSpec};
use crate::digits::{to_digit_stream, DigitStream, PeriodicDigits};
use crate::enumerate::{reorder, ReorderSpec};
use crate::{Error, Int, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PermuteMode {
    /// Only rows inside the window are available; a miss is recorded as a
    /// failure and the row stays put.
    StrictWindow,
    /// A miss pulls in a fresh modular rational from beyond the window and
    /// pushes the current row out.
    Synthesis,
}

impl std::str::FromStr for PermuteMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" | "strict-window" => Ok(PermuteMode::StrictWindow),
            "synthesis" => Ok(PermuteMode::Synthesis),
            other => Err(Error::Domain(format!("unknown permutation mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum TieBreak {
    First,
    /// Uniform choice among the first [`SEEDED_CANDIDATES`] hits.
    Seeded { seed: u64 },
}

pub const SEEDED_CANDIDATES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Partner {
    Position { j: usize },
    Synthesized(Synthesized),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Swap {
    pub i: usize,
    pub partner: Partner,
}

/// A row pushed out of the window by a synthesized one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Escape {
    pub position: usize,
    pub origin: RowOrigin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PermutationTrace {
    pub mode: PermuteMode,
    pub tie: TieBreak,
    pub window: usize,
    pub swaps: Vec<Swap>,
    /// Strict-window positions left non-modular.
    pub failures: Vec<usize>,
    pub escaped: Vec<Escape>,
}

/// One pass `i = 1..=n`: an `i`-modular row stays; otherwise it is exchanged
/// with a later `i`-modular row, or (synthesis mode, no such row) replaced by
/// a synthesized one.
pub fn permute_dmodular(
    t: &DigitTable,
    n: usize,
    mode: PermuteMode,
    tie: TieBreak,
) -> Result<(DigitTable, PermutationTrace)> {
    if n > t.window() {
        return Err(Error::Window { requested: n, available: t.window() });
    }
    let mut rows = t.rows()[..n].to_vec();
    let mut exact: HashSet<PeriodicDigits> = match mode {
        PermuteMode::Synthesis => rows.iter().filter_map(|r| r.stream.as_periodic().cloned()).collect(),
        PermuteMode::StrictWindow => HashSet::new(),
    };
    let (mut rng, limit) = match tie {
        TieBreak::First => (None, 1),
        TieBreak::Seeded { seed } => (Some(ChaCha8Rng::seed_from_u64(seed)), SEEDED_CANDIDATES),
    };
    let mut trace = PermutationTrace {
        mode,
        tie,
        window: n,
        swaps: Vec::new(),
        failures: Vec::new(),
        escaped: Vec::new(),
    };
    let mut hits = Vec::with_capacity(limit);
    for i in 1..=n {
        if is_n_modular(&rows[i - 1].stream, i) {
            continue;
        }
        hits.clear();
        hits.extend((i + 1..=n).filter(|&j| is_n_modular(&rows[j - 1].stream, i)).take(limit));
        if !hits.is_empty() {
            let j = match &mut rng {
                Some(rng) => hits[rng.gen_range(0..hits.len())],
                None => hits[0],
            };
            rows.swap(i - 1, j - 1);
            trace.swaps.push(Swap { i, partner: Partner::Position { j } });
            continue;
        }
        match mode {
            PermuteMode::StrictWindow => trace.failures.push(i),
            PermuteMode::Synthesis => {
                let s = synthesize(i, &exact);
                let fresh = Row::synthesized(s);
                exact.insert(fresh.stream.as_periodic().expect("terminating").clone());
                let displaced = std::mem::replace(&mut rows[i - 1], fresh);
                trace.escaped.push(Escape { position: i, origin: displaced.origin });
                trace.swaps.push(Swap { i, partner: Partner::Synthesized(s) });
            }
        }
    }
    Ok((DigitTable::from_rows(rows), trace))
}

/// Fewest trailing ones that keep the row away from every rational seen.
fn synthesize(i: usize, exact: &HashSet<PeriodicDigits>) -> Synthesized {
    let digit = (i % 10) as u8;
    (1..)
        .map(|ones| Synthesized { position: i, digit, ones })
        .find(|s| !exact.contains(s.stream().as_periodic().expect("terminating")))
        .expect("finitely many rows are excluded")
}

/// Applies the recorded swaps to `initial`.
pub fn replay(initial: &DigitTable, trace: &PermutationTrace) -> Result<DigitTable> {
    if trace.window > initial.window() {
        return Err(Error::Window { requested: trace.window, available: initial.window() });
    }
    let mut rows = initial.rows()[..trace.window].to_vec();
    for swap in &trace.swaps {
        let i = swap.i;
        match swap.partner {
            Partner::Position { j } if i < j && j <= trace.window => rows.swap(i - 1, j - 1),
            Partner::Synthesized(s) if s.position == i && i <= trace.window => {
                rows[i - 1] = Row::synthesized(s)
            }
            _ => return Err(Error::ReplayMismatch(i)),
        }
    }
    Ok(DigitTable::from_rows(rows))
}

/// Replays `trace` on `initial` and requires the result to equal `fin`.
pub fn verify_replay(initial: &DigitTable, trace: &PermutationTrace, fin: &DigitTable) -> Result<()> {
    let replayed = replay(initial, trace)?;
    if replayed.window() != fin.window() {
        return Err(Error::ReplayMismatch(replayed.window().min(fin.window()) + 1));
    }
    match replayed.rows().iter().zip(fin.rows()).position(|(a, b)| a != b) {
        Some(k) => Err(Error::ReplayMismatch(k + 1)),
        None => Ok(()),
    }
}

/// Position of the row starting at `start` after each swap, or `None` once
/// it has been pushed out.
pub fn follow(trace: &PermutationTrace, start: usize) -> Vec<Option<usize>> {
    let mut pos = Some(start);
    let mut path = Vec::new();
    for swap in &trace.swaps {
        let Some(p) = pos else { break };
        let next = match swap.partner {
            Partner::Position { j } if p == swap.i => Some(j),
            Partner::Position { j } if p == j => Some(swap.i),
            Partner::Synthesized(_) if p == swap.i => None,
            _ => continue,
        };
        pos = next;
        path.push(next);
    }
    path
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Fate {
    Final { position: usize },
    Escaped { at: usize },
    AbsentFromWindow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Displacement {
    pub window: usize,
    pub initial_position: Option<usize>,
    pub moves: usize,
    #[serde(flatten)]
    pub fate: Fate,
}

impl Displacement {
    pub fn escaped(&self) -> bool {
        matches!(self.fate, Fate::Escaped { .. })
    }
}

/// How far into `g` the target is searched for.
pub const TARGET_SCAN_BUDGET: usize = 1 << 20;

/// Runs a synthesis pass (first-hit ties) per window and reports where the
/// target's row ends up. With `placement = Some(p)` the target is first
/// exchanged with `g(p)`, putting it on row `2p − 1`.
pub fn displacement_track<I: Int>(
    target: &Ratio<I>,
    spec: &TableSpec<I>,
    windows: &[usize],
    placement: Option<usize>,
) -> Result<Vec<Displacement>> {
    let stream: DigitStream = to_digit_stream(target)?.into();
    let absent = |window| Displacement { window, initial_position: None, moves: 0, fate: Fate::AbsentFromWindow };
    let Some(found) = spec.g.index_of(target, TARGET_SCAN_BUDGET) else {
        return Ok(windows.iter().map(|&w| absent(w)).collect());
    };
    let (spec, g_pos) = match placement {
        Some(0) => return Err(Error::Domain("placement positions start at 1".into())),
        Some(p) if p != found => {
            let g = reorder(spec.g.clone(), ReorderSpec::Transpositions(vec![(p, found)]))?;
            (TableSpec { g, h: spec.h.clone() }, p)
        }
        _ => (spec.clone(), found),
    };
    let row = 2 * g_pos - 1;
    let mut out = Vec::with_capacity(windows.len());
    for &window in windows {
        if row > window {
            out.push(absent(window));
            continue;
        }
        let table = build_table(&spec, window)?;
        debug_assert_eq!(table.row(row).stream, stream);
        let (fin, trace) = permute_dmodular(&table, window, PermuteMode::Synthesis, TieBreak::First)?;
        let path = follow(&trace, row);
        let fate = match path.last() {
            None => Fate::Final { position: row },
            Some(Some(p)) => Fate::Final { position: *p },
            Some(None) => {
                let at = path.iter().rev().skip(1).find_map(|p| *p).unwrap_or(row);
                Fate::Escaped { at }
            }
        };
        if let Fate::Final { position } = fate {
            if fin.row(position).stream != stream {
                return Err(Error::ReplayMismatch(position));
            }
        }
        out.push(Displacement { window, initial_position: Some(row), moves: path.len(), fate });
    }
    Ok(out)
}
