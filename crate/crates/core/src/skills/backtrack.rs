//! Depth-first completion with forward checking, used as the correctness
//! oracle for everything the skill solver does.

use crate::board::{units_of, Cell, CellRef, Digit, Grid};

/// Completes the grid by deterministic depth-first search, or returns `None`
/// if no completion exists.
///
/// Cell order is minimum-remaining-values (ties broken row-major), digits are
/// tried ascending, so the result is reproducible. On grids with a unique
/// solution this returns that solution.
pub fn backtracking_solve(grid: &Grid) -> Option<Grid> {
    solve_rec(grid.clone())
}

fn solve_rec(grid: Grid) -> Option<Grid> {
    let target = (0..81)
        .filter_map(CellRef::from_index)
        .filter_map(|cell| grid.cell(cell).candidates().map(|set| (cell, set)))
        .min_by_key(|(_, set)| set.len());

    let Some((cell, candidates)) = target else {
        return grid.is_solved().then_some(grid);
    };

    for digit in candidates.iter() {
        if let Some(next) = place(&grid, cell, digit) {
            if let Some(solution) = solve_rec(next) {
                return Some(solution);
            }
        }
    }
    None
}

/// Places a digit and prunes peers; `None` if some peer's list empties.
fn place(grid: &Grid, cell: CellRef, digit: Digit) -> Option<Grid> {
    let mut next = grid.clone();
    next.set_cell(cell, Cell::Solved(digit));
    for unit in units_of(cell) {
        for peer in unit.cells() {
            if peer == cell {
                continue;
            }
            if let Cell::Empty(mut set) = next.cell(peer) {
                set.remove(digit);
                if set.is_empty() {
                    return None;
                }
                next.set_cell(peer, Cell::Empty(set));
            }
        }
    }
    Some(next)
}
