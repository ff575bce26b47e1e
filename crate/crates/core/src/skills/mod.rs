//! Exact recognition and propagation of the four solving skills, plus a
//! backtracking completer used as an independent correctness oracle.
//!
//! Two families of finders live here. The grid-level finders
//! ([`find_naked_singles`] and friends) see the real board, distinguish
//! solved cells from empty ones, and filter out double patterns whose
//! application would change nothing. The pattern-presence finder
//! ([`find_patterns`]) sees only nine candidate lists, the same view the
//! networks get, and reports pure pattern occurrences; it is the ground
//! truth for training labels.

use std::fmt;

use thiserror::Error;

use crate::board::{CellRef, Digit, Unit};

mod apply;
mod backtrack;
mod find;

pub use apply::apply_skill;
pub use backtrack::backtracking_solve;
pub use find::{
    find_hidden_doubles, find_hidden_singles, find_in_unit, find_naked_doubles,
    find_naked_singles, find_patterns,
};

/// Errors from applying a skill instance to a grid.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SkillError {
    #[error("stale instance: {0} no longer holds on this grid")]
    StaleInstance(SkillInstance),
    #[error("applying a skill emptied the candidate list of {cell}")]
    ContradictionProduced { cell: CellRef },
}

/// The four skills, declared in the solver's scan order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SkillKind {
    NakedSingle,
    HiddenSingle,
    NakedDouble,
    HiddenDouble,
}

impl SkillKind {
    /// Scan order: simplest skill first.
    pub const ALL: [SkillKind; 4] = [
        SkillKind::NakedSingle,
        SkillKind::HiddenSingle,
        SkillKind::NakedDouble,
        SkillKind::HiddenDouble,
    ];

    pub fn is_single(self) -> bool {
        matches!(self, SkillKind::NakedSingle | SkillKind::HiddenSingle)
    }

    pub fn name(self) -> &'static str {
        match self {
            SkillKind::NakedSingle => "naked-single",
            SkillKind::HiddenSingle => "hidden-single",
            SkillKind::NakedDouble => "naked-double",
            SkillKind::HiddenDouble => "hidden-double",
        }
    }

    pub fn parse(s: &str) -> Option<SkillKind> {
        SkillKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for SkillKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A concrete occurrence of a skill: which unit, which cells, which digits.
///
/// Singles carry one cell and one digit; doubles carry two distinct cells
/// (in unit order) and two distinct digits (ascending).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SkillInstance {
    kind: SkillKind,
    unit: Unit,
    cells: Vec<CellRef>,
    digits: Vec<Digit>,
}

impl SkillInstance {
    pub fn single(kind: SkillKind, unit: Unit, cell: CellRef, digit: Digit) -> Option<SkillInstance> {
        if !kind.is_single() || !unit.contains(cell) {
            return None;
        }
        Some(SkillInstance {
            kind,
            unit,
            cells: vec![cell],
            digits: vec![digit],
        })
    }

    pub fn double(
        kind: SkillKind,
        unit: Unit,
        cells: (CellRef, CellRef),
        digits: (Digit, Digit),
    ) -> Option<SkillInstance> {
        if kind.is_single()
            || cells.0 == cells.1
            || digits.0 == digits.1
            || !unit.contains(cells.0)
            || !unit.contains(cells.1)
        {
            return None;
        }
        let (a, b) = cells;
        let mut cells = vec![a, b];
        cells.sort_by_key(|c| unit.position_of(*c));
        let mut digits = vec![digits.0, digits.1];
        digits.sort();
        Some(SkillInstance {
            kind,
            unit,
            cells,
            digits,
        })
    }

    pub fn kind(&self) -> SkillKind {
        self.kind
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn cells(&self) -> &[CellRef] {
        &self.cells
    }

    pub fn digits(&self) -> &[Digit] {
        &self.digits
    }

    /// Cell positions within the carrier unit, ascending.
    pub fn unit_positions(&self) -> Vec<usize> {
        let mut positions: Vec<usize> = self
            .cells
            .iter()
            .map(|c| self.unit.position_of(*c).expect("instance cell in unit"))
            .collect();
        positions.sort_unstable();
        positions
    }
}

impl fmt::Display for SkillInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {} at ", self.kind, self.unit)?;
        for (i, c) in self.cells.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, " on ")?;
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// A pattern occurrence inside a bare unit of nine candidate lists.
///
/// Positions are unit-relative (0..=8). This is what training labels are
/// verified against.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UnitPattern {
    pub kind: SkillKind,
    pub cells: Vec<usize>,
    pub digits: Vec<Digit>,
}
