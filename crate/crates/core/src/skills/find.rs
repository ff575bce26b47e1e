//! Skill finders: pattern presence on bare candidate lists, and grid-level
//! recognition with the solver's non-vacuity filters.

use crate::board::{all_units, CandidateSet, Cell, CellRef, Digit, Grid, Unit, UnitKind};

use super::{SkillInstance, SkillKind, UnitPattern};

/// Positions (as a 9-bit mask) whose candidate list contains `digit`.
fn digit_positions(lists: &[CandidateSet; 9], digit: Digit) -> u16 {
    let mut mask = 0u16;
    for (k, set) in lists.iter().enumerate() {
        if set.contains(digit) {
            mask |= 1 << k;
        }
    }
    mask
}

fn mask_positions(mask: u16) -> Vec<usize> {
    (0..9).filter(|k| mask & (1 << k) != 0).collect()
}

/// Pure pattern presence of `kind` in nine candidate lists.
///
/// No vacuity filtering: a naked double is reported even if no other list
/// holds its digits. Solved cells are indistinguishable from single-candidate
/// lists at this level, exactly as the networks see them.
pub fn find_patterns(kind: SkillKind, lists: &[CandidateSet; 9]) -> Vec<UnitPattern> {
    let mut found = Vec::new();
    match kind {
        SkillKind::NakedSingle => {
            for (k, set) in lists.iter().enumerate() {
                if let Some(d) = set.single() {
                    found.push(UnitPattern {
                        kind,
                        cells: vec![k],
                        digits: vec![d],
                    });
                }
            }
        }
        SkillKind::HiddenSingle => {
            for d in Digit::ALL {
                let mask = digit_positions(lists, d);
                if mask.count_ones() == 1 {
                    let k = mask.trailing_zeros() as usize;
                    if lists[k].len() >= 2 {
                        found.push(UnitPattern {
                            kind,
                            cells: vec![k],
                            digits: vec![d],
                        });
                    }
                }
            }
        }
        SkillKind::NakedDouble => {
            for i in 0..9 {
                if lists[i].len() != 2 {
                    continue;
                }
                for j in i + 1..9 {
                    if lists[j] == lists[i] {
                        found.push(UnitPattern {
                            kind,
                            cells: vec![i, j],
                            digits: lists[i].iter().collect(),
                        });
                    }
                }
            }
        }
        SkillKind::HiddenDouble => {
            for (pi, p) in Digit::ALL.into_iter().enumerate() {
                let mask_p = digit_positions(lists, p);
                if mask_p.count_ones() != 2 {
                    continue;
                }
                for q in Digit::ALL.into_iter().skip(pi + 1) {
                    if digit_positions(lists, q) != mask_p {
                        continue;
                    }
                    let cells = mask_positions(mask_p);
                    // With no extra candidate in either cell this is a naked
                    // double, not a hidden one.
                    if cells.iter().any(|&k| lists[k].len() > 2) {
                        found.push(UnitPattern {
                            kind,
                            cells,
                            digits: vec![p, q],
                        });
                    }
                }
            }
        }
    }
    found
}

/// Candidate lists of a unit's empty cells only; solved cells yield `None`.
fn empty_lists(grid: &Grid, unit: Unit) -> [Option<CandidateSet>; 9] {
    let cells = unit.cells();
    std::array::from_fn(|k| match grid.cell(cells[k]) {
        Cell::Solved(_) => None,
        Cell::Empty(set) => Some(set),
    })
}

/// All instances of `kind` recognizable inside one unit, in deterministic
/// order, carried by that unit.
///
/// This applies the grid-level semantics: only empty cells participate, and
/// doubles are reported only when applying them would change the grid.
pub fn find_in_unit(grid: &Grid, unit: Unit, kind: SkillKind) -> Vec<SkillInstance> {
    let lists = empty_lists(grid, unit);
    let cells = unit.cells();
    let mut found = Vec::new();
    match kind {
        SkillKind::NakedSingle => {
            for (k, set) in lists.iter().enumerate() {
                if let Some(d) = set.and_then(CandidateSet::single) {
                    found.push(SkillInstance::single(kind, unit, cells[k], d).unwrap());
                }
            }
        }
        SkillKind::HiddenSingle => {
            for d in Digit::ALL {
                let holders: Vec<usize> = (0..9)
                    .filter(|&k| lists[k].is_some_and(|set| set.contains(d)))
                    .collect();
                if let [k] = holders[..] {
                    if lists[k].unwrap().len() >= 2 {
                        found.push(SkillInstance::single(kind, unit, cells[k], d).unwrap());
                    }
                }
            }
        }
        SkillKind::NakedDouble => {
            for i in 0..9 {
                let Some(set) = lists[i].filter(|s| s.len() == 2) else {
                    continue;
                };
                for j in i + 1..9 {
                    if lists[j] != Some(set) {
                        continue;
                    }
                    let fruitful = (0..9).any(|k| {
                        k != i
                            && k != j
                            && lists[k]
                                .is_some_and(|other| set.iter().any(|d| other.contains(d)))
                    });
                    if fruitful {
                        let digits: Vec<Digit> = set.iter().collect();
                        found.push(
                            SkillInstance::double(
                                kind,
                                unit,
                                (cells[i], cells[j]),
                                (digits[0], digits[1]),
                            )
                            .unwrap(),
                        );
                    }
                }
            }
        }
        SkillKind::HiddenDouble => {
            for (pi, p) in Digit::ALL.into_iter().enumerate() {
                let holders_p: Vec<usize> = (0..9)
                    .filter(|&k| lists[k].is_some_and(|set| set.contains(p)))
                    .collect();
                let [a, b] = holders_p[..] else {
                    continue;
                };
                for q in Digit::ALL.into_iter().skip(pi + 1) {
                    let holders_q: Vec<usize> = (0..9)
                        .filter(|&k| lists[k].is_some_and(|set| set.contains(q)))
                        .collect();
                    if holders_q != holders_p {
                        continue;
                    }
                    let extras =
                        lists[a].unwrap().len() > 2 || lists[b].unwrap().len() > 2;
                    if extras {
                        found.push(
                            SkillInstance::double(kind, unit, (cells[a], cells[b]), (p, q))
                                .unwrap(),
                        );
                    }
                }
            }
        }
    }
    found
}

/// One instance per empty cell with a single candidate, row-major, carried by
/// the cell's row unit.
pub fn find_naked_singles(grid: &Grid) -> Vec<SkillInstance> {
    let mut found = Vec::new();
    for index in 0..81 {
        let cell = CellRef::from_index(index).unwrap();
        if let Cell::Empty(set) = grid.cell(cell) {
            if let Some(d) = set.single() {
                let row = Unit::new(UnitKind::Row, cell.row()).unwrap();
                found.push(SkillInstance::single(SkillKind::NakedSingle, row, cell, d).unwrap());
            }
        }
    }
    found
}

/// Hidden singles over all units in unit-then-digit order, deduplicated by
/// (cell, digit): the first carrying unit wins.
pub fn find_hidden_singles(grid: &Grid) -> Vec<SkillInstance> {
    let mut found: Vec<SkillInstance> = Vec::new();
    for unit in all_units() {
        for instance in find_in_unit(grid, unit, SkillKind::HiddenSingle) {
            let duplicate = found.iter().any(|prev| {
                prev.cells() == instance.cells() && prev.digits() == instance.digits()
            });
            if !duplicate {
                found.push(instance);
            }
        }
    }
    found
}

/// Naked doubles over all units in canonical unit order, fruitful ones only.
pub fn find_naked_doubles(grid: &Grid) -> Vec<SkillInstance> {
    all_units()
        .iter()
        .flat_map(|unit| find_in_unit(grid, *unit, SkillKind::NakedDouble))
        .collect()
}

/// Hidden doubles over all units in canonical unit order.
pub fn find_hidden_doubles(grid: &Grid) -> Vec<SkillInstance> {
    all_units()
        .iter()
        .flat_map(|unit| find_in_unit(grid, *unit, SkillKind::HiddenDouble))
        .collect()
}
