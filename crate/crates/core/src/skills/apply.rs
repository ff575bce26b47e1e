//! Applying a verified skill instance to a grid.

use crate::board::{units_of, Cell, CellRef, Digit, Grid};

use super::{find_in_unit, SkillError, SkillInstance, SkillKind};

/// Applies `instance` to a copy of `grid` and returns it.
///
/// The instance is re-verified first: the defining condition must still hold,
/// otherwise [`SkillError::StaleInstance`] is returned. Propagation that
/// empties some peer's candidate list aborts with
/// [`SkillError::ContradictionProduced`].
pub fn apply_skill(grid: &Grid, instance: &SkillInstance) -> Result<Grid, SkillError> {
    let current = find_in_unit(grid, instance.unit(), instance.kind());
    if !current.contains(instance) {
        return Err(SkillError::StaleInstance(instance.clone()));
    }

    let mut out = grid.clone();
    match instance.kind() {
        // A hidden single first collapses the cell's list to the digit, which
        // turns it into a naked single; the final grid is the same either way.
        SkillKind::NakedSingle | SkillKind::HiddenSingle => {
            solve_cell(&mut out, instance.cells()[0], instance.digits()[0])?;
        }
        SkillKind::NakedDouble => {
            let hosts = instance.cells();
            for cell in instance.unit().cells() {
                if hosts.contains(&cell) {
                    continue;
                }
                let Cell::Empty(mut set) = out.cell(cell) else {
                    continue;
                };
                for &d in instance.digits() {
                    set.remove(d);
                }
                if set.is_empty() {
                    return Err(SkillError::ContradictionProduced { cell });
                }
                out.set_cell(cell, Cell::Empty(set));
            }
        }
        // The hidden double becomes a naked double; no further propagation in
        // this step.
        SkillKind::HiddenDouble => {
            let pair = instance.digits().iter().copied().collect();
            for &cell in instance.cells() {
                out.set_cell(cell, Cell::Empty(pair));
            }
        }
    }
    debug_assert!(out.invariants_ok());
    Ok(out)
}

/// Solves a cell and removes its digit from the candidate lists of all peers
/// in the cell's three units.
fn solve_cell(grid: &mut Grid, cell: CellRef, digit: Digit) -> Result<(), SkillError> {
    grid.set_cell(cell, Cell::Solved(digit));
    for unit in units_of(cell) {
        for peer in unit.cells() {
            if peer == cell {
                continue;
            }
            if let Cell::Empty(mut set) = grid.cell(peer) {
                set.remove(digit);
                if set.is_empty() {
                    return Err(SkillError::ContradictionProduced { cell: peer });
                }
                grid.set_cell(peer, Cell::Empty(set));
            }
        }
    }
    Ok(())
}
