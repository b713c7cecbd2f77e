//! Digit tables built by interleaving rational and generated rows, their
//! diagonals, and the single-pass modular permutation over a finite window.

mod family;
mod permute;
mod table;

pub use family::{
    antidiagonal_family, antidiagonal_family_digits, count_avoiding_periods, modular_family,
    MODULAR_BLOCK,
};
pub use permute::{
    displacement_track, follow, permute_dmodular, replay, verify_replay, Displacement, Escape, Fate,
    Partner, PermutationTrace, PermuteMode, Swap, TieBreak, SEEDED_CANDIDATES, TARGET_SCAN_BUDGET,
};
pub use table::{
    antidiagonal, build_table, diagonal, is_n_modular, AntidiagonalRule, DigitTable, Row,
    RowFamily, RowOrigin, Synthesized, TableSpec,
};
