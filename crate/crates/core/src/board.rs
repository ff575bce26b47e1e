//! The 9x9 Sudoku board: digits, candidate sets, units, and the grid itself.
//!
//! A [`Grid`] is a value type. Every operation either borrows it immutably or
//! returns a fresh copy, so grids can be shared freely across threads.

use std::fmt;

use thiserror::Error;

/// Errors produced while building or validating a grid.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoardError {
    #[error("malformed puzzle input: {0}")]
    MalformedInput(String),
    #[error("contradictory givens: digit {digit} appears twice in {unit}")]
    ContradictoryGivens { digit: Digit, unit: Unit },
    #[error("empty candidate list at {cell}: the position is unsolvable")]
    EmptyCandidateList { cell: CellRef },
}

/// A Sudoku digit, guaranteed to lie in `1..=9`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digit(u8);

impl Digit {
    /// All nine digits in ascending order.
    pub const ALL: [Digit; 9] = [
        Digit(1),
        Digit(2),
        Digit(3),
        Digit(4),
        Digit(5),
        Digit(6),
        Digit(7),
        Digit(8),
        Digit(9),
    ];

    pub fn new(value: u8) -> Option<Digit> {
        (1..=9).contains(&value).then_some(Digit(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Zero-based index used by bit masks and encodings: digit d maps to d-1.
    pub fn index(self) -> usize {
        usize::from(self.0) - 1
    }

    pub fn from_index(index: usize) -> Option<Digit> {
        (index < 9).then(|| Digit(index as u8 + 1))
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of candidate digits for one cell, stored as a 9-bit mask.
///
/// Bit `d-1` is set iff digit `d` is a member.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CandidateSet(u16);

impl CandidateSet {
    pub const EMPTY: CandidateSet = CandidateSet(0);
    pub const FULL: CandidateSet = CandidateSet(0x1ff);

    pub fn singleton(digit: Digit) -> CandidateSet {
        CandidateSet(1 << digit.index())
    }

    /// Builds a set from a raw 9-bit mask. Bits above the ninth are rejected.
    pub fn from_bits(bits: u16) -> Option<CandidateSet> {
        (bits <= 0x1ff).then_some(CandidateSet(bits))
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn contains(self, digit: Digit) -> bool {
        self.0 & (1 << digit.index()) != 0
    }

    pub fn insert(&mut self, digit: Digit) {
        self.0 |= 1 << digit.index();
    }

    pub fn remove(&mut self, digit: Digit) {
        self.0 &= !(1 << digit.index());
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// The sole member, if the set has exactly one.
    pub fn single(self) -> Option<Digit> {
        (self.len() == 1).then(|| Digit(self.0.trailing_zeros() as u8 + 1))
    }

    /// Members in ascending digit order.
    pub fn iter(self) -> impl Iterator<Item = Digit> {
        Digit::ALL.into_iter().filter(move |d| self.contains(*d))
    }
}

impl FromIterator<Digit> for CandidateSet {
    fn from_iter<I: IntoIterator<Item = Digit>>(iter: I) -> Self {
        let mut set = CandidateSet::EMPTY;
        for d in iter {
            set.insert(d);
        }
        set
    }
}

impl fmt::Debug for CandidateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for d in self.iter() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
            first = false;
        }
        write!(f, "}}")
    }
}

/// A cell position, zero-based `(row, col)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellRef {
    row: u8,
    col: u8,
}

impl CellRef {
    pub fn new(row: usize, col: usize) -> Option<CellRef> {
        (row < 9 && col < 9).then_some(CellRef {
            row: row as u8,
            col: col as u8,
        })
    }

    pub fn row(self) -> usize {
        usize::from(self.row)
    }

    pub fn col(self) -> usize {
        usize::from(self.col)
    }

    /// Boxes are numbered row-major: 3*(row/3) + col/3.
    pub fn box_index(self) -> usize {
        3 * (self.row() / 3) + self.col() / 3
    }

    /// Flat index into the 81-cell array, row-major.
    pub fn index(self) -> usize {
        self.row() * 9 + self.col()
    }

    pub fn from_index(index: usize) -> Option<CellRef> {
        (index < 81).then(|| CellRef {
            row: (index / 9) as u8,
            col: (index % 9) as u8,
        })
    }

    /// True if the two cells share a row, column, or box (and differ).
    pub fn sees(self, other: CellRef) -> bool {
        self != other
            && (self.row == other.row
                || self.col == other.col
                || self.box_index() == other.box_index())
    }
}

impl fmt::Display for CellRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}c{}", self.row, self.col)
    }
}

impl fmt::Debug for CellRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}c{}", self.row, self.col)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum UnitKind {
    Row,
    Column,
    Box,
}

impl UnitKind {
    pub fn name(self) -> &'static str {
        match self {
            UnitKind::Row => "row",
            UnitKind::Column => "column",
            UnitKind::Box => "box",
        }
    }
}

/// One of the 27 units: a row, column, or 3x3 box.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Unit {
    kind: UnitKind,
    index: u8,
}

impl Unit {
    pub fn new(kind: UnitKind, index: usize) -> Option<Unit> {
        (index < 9).then_some(Unit {
            kind,
            index: index as u8,
        })
    }

    pub fn kind(self) -> UnitKind {
        self.kind
    }

    pub fn index(self) -> usize {
        usize::from(self.index)
    }

    /// The unit's nine cells in canonical order: rows left to right, columns
    /// top to bottom, boxes row-major.
    pub fn cells(self) -> [CellRef; 9] {
        let i = self.index();
        std::array::from_fn(|k| match self.kind {
            UnitKind::Row => CellRef::new(i, k).unwrap(),
            UnitKind::Column => CellRef::new(k, i).unwrap(),
            UnitKind::Box => {
                CellRef::new(3 * (i / 3) + k / 3, 3 * (i % 3) + k % 3).unwrap()
            }
        })
    }

    /// Position of `cell` within this unit's canonical cell order.
    pub fn position_of(self, cell: CellRef) -> Option<usize> {
        self.cells().iter().position(|c| *c == cell)
    }

    pub fn contains(self, cell: CellRef) -> bool {
        match self.kind {
            UnitKind::Row => cell.row() == self.index(),
            UnitKind::Column => cell.col() == self.index(),
            UnitKind::Box => cell.box_index() == self.index(),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind.name(), self.index)
    }
}

impl fmt::Debug for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// All 27 units in canonical order: rows 0..9, columns 0..9, boxes 0..9.
pub fn all_units() -> [Unit; 27] {
    std::array::from_fn(|i| {
        let kind = match i / 9 {
            0 => UnitKind::Row,
            1 => UnitKind::Column,
            _ => UnitKind::Box,
        };
        Unit::new(kind, i % 9).unwrap()
    })
}

/// The three units a cell belongs to: its row, column, and box.
pub fn units_of(cell: CellRef) -> [Unit; 3] {
    [
        Unit::new(UnitKind::Row, cell.row()).unwrap(),
        Unit::new(UnitKind::Column, cell.col()).unwrap(),
        Unit::new(UnitKind::Box, cell.box_index()).unwrap(),
    ]
}

/// State of one grid cell.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Cell {
    Solved(Digit),
    Empty(CandidateSet),
}

impl Cell {
    pub fn digit(self) -> Option<Digit> {
        match self {
            Cell::Solved(d) => Some(d),
            Cell::Empty(_) => None,
        }
    }

    pub fn candidates(self) -> Option<CandidateSet> {
        match self {
            Cell::Solved(_) => None,
            Cell::Empty(set) => Some(set),
        }
    }

    pub fn is_solved(self) -> bool {
        matches!(self, Cell::Solved(_))
    }
}

/// A 9x9 Sudoku grid with per-cell candidate lists on the empty cells.
#[derive(Clone, PartialEq, Eq)]
pub struct Grid {
    cells: [Cell; 81],
}

impl Grid {
    /// A grid of 81 empty cells, each with the full candidate set.
    pub fn empty() -> Grid {
        Grid {
            cells: [Cell::Empty(CandidateSet::FULL); 81],
        }
    }

    /// Parses an 81-character puzzle string (row-major, `.` or `0` for empty
    /// cells, whitespace ignored), validates the givens against the unit
    /// constraints, and computes all candidate lists.
    pub fn parse(text: &str) -> Result<Grid, BoardError> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.chars().count() != 81 {
            return Err(BoardError::MalformedInput(format!(
                "expected 81 cells, got {}",
                compact.chars().count()
            )));
        }
        let mut cells = [Cell::Empty(CandidateSet::FULL); 81];
        for (i, ch) in compact.chars().enumerate() {
            cells[i] = match ch {
                '.' | '0' => Cell::Empty(CandidateSet::FULL),
                '1'..='9' => Cell::Solved(Digit::new(ch as u8 - b'0').unwrap()),
                other => {
                    return Err(BoardError::MalformedInput(format!(
                        "invalid character '{other}' at cell {i}"
                    )))
                }
            };
        }
        let grid = Grid { cells };
        grid.check_givens()?;
        grid.compute_candidates()
    }

    fn check_givens(&self) -> Result<(), BoardError> {
        for unit in all_units() {
            let mut seen = CandidateSet::EMPTY;
            for cell in unit.cells() {
                if let Cell::Solved(d) = self.cell(cell) {
                    if seen.contains(d) {
                        return Err(BoardError::ContradictoryGivens { digit: d, unit });
                    }
                    seen.insert(d);
                }
            }
        }
        Ok(())
    }

    /// Recomputes every empty cell's candidates as {1..9} minus the digits
    /// solved in its row, column, and box. Solved cells are untouched.
    ///
    /// This is the full propagation of the basic constraints; skill
    /// applications maintain candidates incrementally instead, so narrowing
    /// done by doubles is never widened back.
    pub fn compute_candidates(&self) -> Result<Grid, BoardError> {
        let mut out = self.clone();
        for index in 0..81 {
            let cell = CellRef::from_index(index).unwrap();
            if out.cells[index].is_solved() {
                continue;
            }
            let mut set = CandidateSet::FULL;
            for unit in units_of(cell) {
                for peer in unit.cells() {
                    if let Cell::Solved(d) = self.cell(peer) {
                        set.remove(d);
                    }
                }
            }
            if set.is_empty() {
                return Err(BoardError::EmptyCandidateList { cell });
            }
            out.cells[index] = Cell::Empty(set);
        }
        debug_assert!(out.invariants_ok());
        Ok(out)
    }

    pub fn cell(&self, cell: CellRef) -> Cell {
        self.cells[cell.index()]
    }

    pub(crate) fn set_cell(&mut self, cell: CellRef, value: Cell) {
        self.cells[cell.index()] = value;
    }

    pub fn solved_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_solved()).count()
    }

    /// Candidate lists of a unit's nine cells, with solved cells viewed as
    /// singleton sets. This is the view the encodings and networks see.
    pub fn candidate_view(&self, unit: Unit) -> [CandidateSet; 9] {
        let cells = unit.cells();
        std::array::from_fn(|k| match self.cell(cells[k]) {
            Cell::Solved(d) => CandidateSet::singleton(d),
            Cell::Empty(set) => set,
        })
    }

    /// Sum over empty cells of (candidate count - 1). Zero for a solved grid.
    pub fn degrees_of_freedom(&self) -> usize {
        self.cells
            .iter()
            .filter_map(|c| c.candidates())
            .map(|set| set.len().saturating_sub(1))
            .sum()
    }

    /// True iff all 81 cells are solved and every unit holds nine distinct
    /// digits.
    pub fn is_solved(&self) -> bool {
        if self.cells.iter().any(|c| !c.is_solved()) {
            return false;
        }
        all_units().iter().all(|unit| {
            let mut seen = CandidateSet::EMPTY;
            for cell in unit.cells() {
                match self.cell(cell) {
                    Cell::Solved(d) => seen.insert(d),
                    Cell::Empty(_) => return false,
                }
            }
            seen == CandidateSet::FULL
        })
    }

    /// Candidate soundness: no empty cell lists a digit already solved among
    /// its peers, no candidate set is empty, and givens are not duplicated.
    pub(crate) fn invariants_ok(&self) -> bool {
        if self.check_givens().is_err() {
            return false;
        }
        for index in 0..81 {
            let cell = CellRef::from_index(index).unwrap();
            let Cell::Empty(set) = self.cell(cell) else {
                continue;
            };
            if set.is_empty() {
                return false;
            }
            for unit in units_of(cell) {
                for peer in unit.cells() {
                    if let Cell::Solved(d) = self.cell(peer) {
                        if set.contains(d) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// 81-character line representation, `.` for empty cells.
    pub fn to_line(&self) -> String {
        self.cells
            .iter()
            .map(|c| match c {
                Cell::Solved(d) => char::from(b'0' + d.value()),
                Cell::Empty(_) => '.',
            })
            .collect()
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Grid({})", self.to_line())
    }
}

/// Reads puzzles from text: one 81-character line per puzzle, `#` comment
/// lines and blank lines ignored.
pub fn parse_puzzle_file(text: &str) -> Result<Vec<Grid>, BoardError> {
    text.lines()
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .map(Grid::parse)
        .collect()
}


#[cfg(test)]
mod tests {
    use super::fixtures::SOLVED_LINE as SOLVED;
    use super::*;

    #[test]
    fn digit_range_is_enforced() {
        assert!(Digit::new(0).is_none());
        assert!(Digit::new(10).is_none());
        assert_eq!(Digit::new(5).unwrap().value(), 5);
    }

    #[test]
    fn candidate_set_operations_are_exact() {
        let mut set = CandidateSet::EMPTY;
        set.insert(Digit::new(2).unwrap());
        set.insert(Digit::new(5).unwrap());
        assert_eq!(set.len(), 2);
        assert!(set.contains(Digit::new(2).unwrap()));
        assert!(!set.contains(Digit::new(3).unwrap()));
        set.remove(Digit::new(2).unwrap());
        assert_eq!(set.single(), Digit::new(5));
        assert_eq!(CandidateSet::FULL.len(), 9);
    }

    #[test]
    fn parse_all_dots_gives_full_candidates_everywhere() {
        let grid = Grid::parse(&".".repeat(81)).unwrap();
        for index in 0..81 {
            let cell = CellRef::from_index(index).unwrap();
            assert_eq!(grid.cell(cell), Cell::Empty(CandidateSet::FULL));
        }
        assert_eq!(grid.degrees_of_freedom(), 81 * 8);
    }

    #[test]
    fn parse_fully_solved_grid_has_no_empty_cells() {
        let grid = Grid::parse(SOLVED).unwrap();
        assert_eq!(grid.solved_count(), 81);
        assert!(grid.is_solved());
        assert_eq!(grid.degrees_of_freedom(), 0);
    }

    #[test]
    fn parse_rejects_duplicate_given_in_a_row() {
        let mut text = vec!['.'; 81];
        text[0] = '5';
        text[4] = '5';
        let err = Grid::parse(&text.iter().collect::<String>()).unwrap_err();
        assert!(matches!(err, BoardError::ContradictoryGivens { .. }));
    }

    #[test]
    fn parse_rejects_bad_length_and_bad_characters() {
        assert!(matches!(
            Grid::parse("123"),
            Err(BoardError::MalformedInput(_))
        ));
        let mut text = vec!['.'; 81];
        text[10] = 'x';
        assert!(matches!(
            Grid::parse(&text.iter().collect::<String>()),
            Err(BoardError::MalformedInput(_))
        ));
    }

    #[test]
    fn parse_accepts_whitespace_and_zeros() {
        let spaced = SOLVED
            .chars()
            .enumerate()
            .map(|(i, c)| if i % 9 == 0 { format!("\n{c}") } else { c.to_string() })
            .collect::<String>();
        assert!(Grid::parse(&spaced).unwrap().is_solved());
        let grid = Grid::parse(&"0".repeat(81)).unwrap();
        assert_eq!(grid.solved_count(), 0);
    }

    #[test]
    fn candidates_are_the_unit_complement() {
        // Row 0 holds 1,2,3; column 0 holds 4,5; box 0 holds 6,7 (via r1c1, r2c2).
        let mut text = vec!['.'; 81];
        text[1] = '1';
        text[2] = '2';
        text[3] = '3';
        text[9] = '4'; // r1c0
        text[18] = '5'; // r2c0
        text[10] = '6'; // r1c1
        text[20] = '7'; // r2c2
        let grid = Grid::parse(&text.iter().collect::<String>()).unwrap();
        let got = grid
            .cell(CellRef::new(0, 0).unwrap())
            .candidates()
            .unwrap();
        let want: CandidateSet = [8, 9].iter().map(|v| Digit::new(*v).unwrap()).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn compute_candidates_flags_unsolvable_cell() {
        // Cell (0,0) sees all nine digits: 1..5 in row, 6..9 in column.
        let mut text = vec!['.'; 81];
        for (i, d) in [(1, '1'), (2, '2'), (3, '3'), (4, '4'), (5, '5')] {
            text[i] = d;
        }
        for (r, d) in [(1, '6'), (2, '7'), (3, '8'), (4, '9')] {
            text[r * 9] = d;
        }
        let err = Grid::parse(&text.iter().collect::<String>()).unwrap_err();
        assert_eq!(
            err,
            BoardError::EmptyCandidateList {
                cell: CellRef::new(0, 0).unwrap()
            }
        );
    }

    #[test]
    fn degrees_of_freedom_counts_excess_candidates() {
        let mut grid = Grid::parse(SOLVED).unwrap();
        let cell = CellRef::new(4, 4).unwrap();
        let two: CandidateSet = [1, 2].iter().map(|v| Digit::new(*v).unwrap()).collect();
        grid.set_cell(cell, Cell::Empty(two));
        assert_eq!(grid.degrees_of_freedom(), 1);
    }

    #[test]
    fn there_are_27_canonical_units() {
        let units = all_units();
        assert_eq!(units.len(), 27);
        let center = CellRef::new(4, 4).unwrap();
        let holders: Vec<Unit> = units.iter().copied().filter(|u| u.contains(center)).collect();
        assert_eq!(
            holders,
            vec![
                Unit::new(UnitKind::Row, 4).unwrap(),
                Unit::new(UnitKind::Column, 4).unwrap(),
                Unit::new(UnitKind::Box, 4).unwrap(),
            ]
        );

        let mut coverage = [0usize; 81];
        for unit in units {
            for cell in unit.cells() {
                coverage[cell.index()] += 1;
            }
        }
        assert!(coverage.iter().all(|&n| n == 3));
    }

    #[test]
    fn box_cells_are_row_major() {
        let unit = Unit::new(UnitKind::Box, 4).unwrap();
        let cells = unit.cells();
        assert_eq!(cells[0], CellRef::new(3, 3).unwrap());
        assert_eq!(cells[8], CellRef::new(5, 5).unwrap());
    }

    #[test]
    fn is_solved_rejects_incomplete_and_duplicated_grids() {
        let solved = Grid::parse(SOLVED).unwrap();
        assert!(solved.is_solved());

        let mut one_empty = solved.clone();
        one_empty.set_cell(
            CellRef::new(0, 0).unwrap(),
            Cell::Empty(CandidateSet::FULL),
        );
        assert!(!one_empty.is_solved());

        // Duplicate a digit inside box 0.
        let mut duped = solved.clone();
        let d = duped.cell(CellRef::new(0, 0).unwrap()).digit().unwrap();
        duped.set_cell(CellRef::new(1, 1).unwrap(), Cell::Solved(d));
        assert!(!duped.is_solved());
    }

    #[test]
    fn puzzle_file_skips_comments_and_blank_lines() {
        let text = format!("# corpus\n\n{SOLVED}\n{}\n", ".".repeat(81));
        let grids = parse_puzzle_file(&text).unwrap();
        assert_eq!(grids.len(), 2);
        assert!(grids[0].is_solved());
    }
}
