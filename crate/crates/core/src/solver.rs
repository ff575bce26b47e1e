//! The hard-coded solving sequence with pluggable skill recognition.
//!
//! The sequence itself never changes: scan the four skills simplest-first
//! over the 27 units in canonical order, apply the first recognized
//! instance, and restart from the top. What varies is recognition — the
//! exact oracle, a detection network that gates on pattern existence, or a
//! localisation network whose fired cells must pin the pattern down.
//!
//! Every application passes through the exact oracle before it touches the
//! grid, so network mistakes can gate progress but can never corrupt the
//! board.

use thiserror::Error;

use crate::board::{all_units, CellRef, Digit, Grid, Unit};
use crate::encoding::encode_unit;
use crate::mlp::{classify_detection, classify_localisation, Mlp, MlpError};
use crate::skills::{apply_skill, find_in_unit, SkillError, SkillInstance, SkillKind};
use crate::trainset::TaskMode;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Skill(#[from] SkillError),
    #[error(transparent)]
    Model(#[from] MlpError),
}

/// One network per skill, in scan order.
#[derive(Clone, Debug)]
pub struct SkillModels {
    nets: [Mlp; 4],
}

impl SkillModels {
    pub fn new(naked_single: Mlp, hidden_single: Mlp, naked_double: Mlp, hidden_double: Mlp) -> SkillModels {
        SkillModels {
            nets: [naked_single, hidden_single, naked_double, hidden_double],
        }
    }

    pub fn get(&self, kind: SkillKind) -> &Mlp {
        &self.nets[kind_index(kind)]
    }

    fn validate(&self, task: TaskMode) -> Result<(), MlpError> {
        for kind in SkillKind::ALL {
            let net = self.get(kind);
            if net.shape.n_input != 81 || net.shape.n_output != task.n_outputs() {
                return Err(MlpError::ShapeMismatch(format!(
                    "{kind} net is {}x{}x{}, {task} needs 81x_x{}",
                    net.shape.n_input,
                    net.shape.n_hidden,
                    net.shape.n_output,
                    task.n_outputs()
                )));
            }
        }
        Ok(())
    }
}

pub fn kind_index(kind: SkillKind) -> usize {
    SkillKind::ALL.iter().position(|k| *k == kind).unwrap()
}

/// How skills are recognized during a solve.
#[derive(Clone, Debug)]
pub enum RecognizerMode {
    Exact,
    Detection(SkillModels),
    Localisation(SkillModels),
}

impl RecognizerMode {
    pub fn detection(models: SkillModels) -> Result<RecognizerMode, MlpError> {
        models.validate(TaskMode::Detection)?;
        Ok(RecognizerMode::Detection(models))
    }

    pub fn localisation(models: SkillModels) -> Result<RecognizerMode, MlpError> {
        models.validate(TaskMode::Localisation)?;
        Ok(RecognizerMode::Localisation(models))
    }

    pub fn name(&self) -> &'static str {
        match self {
            RecognizerMode::Exact => "exact",
            RecognizerMode::Detection(_) => "detection",
            RecognizerMode::Localisation(_) => "localisation",
        }
    }
}

/// One applied skill, with everything needed to replay it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StepRecord {
    pub kind: SkillKind,
    pub unit: Unit,
    pub cells: Vec<CellRef>,
    pub digits: Vec<Digit>,
    pub dof_after: usize,
}

impl StepRecord {
    /// Rebuilds the skill instance this record came from.
    pub fn instance(&self) -> SkillInstance {
        match self.cells.len() {
            1 => SkillInstance::single(self.kind, self.unit, self.cells[0], self.digits[0])
                .expect("valid single record"),
            2 => SkillInstance::double(
                self.kind,
                self.unit,
                (self.cells[0], self.cells[1]),
                (self.digits[0], self.digits[1]),
            )
            .expect("valid double record"),
            n => panic!("step record with {n} cells"),
        }
    }
}

/// Outcome of one solve: per-skill application counts, the applied steps in
/// order, and the degrees-of-freedom trajectory.
#[derive(Clone, PartialEq, Debug)]
pub struct SolveReport {
    counts: [usize; 4],
    pub final_dof: usize,
    pub solved: bool,
    pub steps: Vec<StepRecord>,
    /// Initial DOF followed by the DOF after each applied step.
    pub dof_curve: Vec<usize>,
}

impl SolveReport {
    pub fn count(&self, kind: SkillKind) -> usize {
        self.counts[kind_index(kind)]
    }

    pub fn total_applications(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Step rows plus a summary row; see the README for the exact layout.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step_index,skill,unit_kind,unit_index,cells,digits,dof_after\n");
        for (i, step) in self.steps.iter().enumerate() {
            let cells: Vec<String> = step.cells.iter().map(|c| c.to_string()).collect();
            let digits: Vec<String> = step.digits.iter().map(|d| d.to_string()).collect();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                i + 1,
                step.kind,
                step.unit.kind().name(),
                step.unit.index(),
                cells.join("+"),
                digits.join("+"),
                step.dof_after
            ));
        }
        let counts: Vec<String> = self.counts.iter().map(usize::to_string).collect();
        out.push_str(&format!(
            "summary,{},,,{},,{}\n",
            if self.solved { "solved" } else { "stalled" },
            counts.join("+"),
            self.final_dof
        ));
        out
    }
}

/// Recognizes an instance of `kind` in one unit, or `None`.
///
/// Detection gates on the network's verdict and leaves location to the exact
/// finder; a positive verdict with no verifiable instance is a false alarm
/// and yields `None`. Localisation requires the fired cells to match an
/// oracle instance's cells exactly; any mislocalisation yields `None`.
pub fn recognize_in_unit(
    grid: &Grid,
    unit: Unit,
    kind: SkillKind,
    mode: &RecognizerMode,
) -> Result<Option<SkillInstance>, SolverError> {
    match mode {
        RecognizerMode::Exact => Ok(find_in_unit(grid, unit, kind).into_iter().next()),
        RecognizerMode::Detection(models) => {
            let encoding = encode_unit(grid, unit);
            if !classify_detection(models.get(kind), &encoding)? {
                return Ok(None);
            }
            Ok(find_in_unit(grid, unit, kind).into_iter().next())
        }
        RecognizerMode::Localisation(models) => {
            let encoding = encode_unit(grid, unit);
            let fired = classify_localisation(models.get(kind), &encoding)?;
            if fired.is_empty() {
                return Ok(None);
            }
            Ok(find_in_unit(grid, unit, kind)
                .into_iter()
                .find(|instance| instance.unit_positions() == fired))
        }
    }
}

/// Runs the fixed solving sequence to exhaustion.
///
/// Terminates when the grid is solved or a full scan applies nothing. Every
/// applied instance came from the exact finder, so the grid stays sound no
/// matter what the networks say.
pub fn solve(grid: &Grid, mode: &RecognizerMode) -> Result<(Grid, SolveReport), SolverError> {
    if let RecognizerMode::Detection(models) = mode {
        models.validate(TaskMode::Detection)?;
    }
    if let RecognizerMode::Localisation(models) = mode {
        models.validate(TaskMode::Localisation)?;
    }

    let mut grid = grid.clone();
    let mut report = SolveReport {
        counts: [0; 4],
        final_dof: 0,
        solved: false,
        steps: Vec::new(),
        dof_curve: vec![grid.degrees_of_freedom()],
    };

    'sequence: loop {
        if grid.is_solved() {
            break;
        }
        for kind in SkillKind::ALL {
            for unit in all_units() {
                let Some(instance) = recognize_in_unit(&grid, unit, kind, mode)? else {
                    continue;
                };
                grid = apply_skill(&grid, &instance)?;
                let dof_after = grid.degrees_of_freedom();
                report.counts[kind_index(kind)] += 1;
                report.dof_curve.push(dof_after);
                report.steps.push(StepRecord {
                    kind,
                    unit: instance.unit(),
                    cells: instance.cells().to_vec(),
                    digits: instance.digits().to_vec(),
                    dof_after,
                });
                continue 'sequence;
            }
        }
        break;
    }

    report.final_dof = grid.degrees_of_freedom();
    report.solved = grid.is_solved();
    Ok((grid, report))
}

/// Side-by-side solve with trained and untrained models of one task mode.
#[derive(Clone, PartialEq, Debug)]
pub struct ExperimentReport {
    pub untrained: SolveReport,
    pub trained: SolveReport,
}

pub fn run_experiment(
    grid: &Grid,
    trained: SkillModels,
    untrained: SkillModels,
    task: TaskMode,
) -> Result<ExperimentReport, SolverError> {
    let build = |models: SkillModels| match task {
        TaskMode::Detection => RecognizerMode::detection(models),
        TaskMode::Localisation => RecognizerMode::localisation(models),
    };
    let (_, untrained_report) = solve(grid, &build(untrained)?)?;
    let (_, trained_report) = solve(grid, &build(trained)?)?;
    Ok(ExperimentReport {
        untrained: untrained_report,
        trained: trained_report,
    })
}

#[cfg(test)]
mod tests {
    use crate::board::{fixtures::SOLVED_LINE, CandidateSet, Cell, UnitKind};
    use crate::mlp::MlpShape;
    use crate::skills::backtracking_solve;

    use super::*;

    fn d(v: u8) -> Digit {
        Digit::new(v).unwrap()
    }

    fn cell(r: usize, c: usize) -> CellRef {
        CellRef::new(r, c).unwrap()
    }

    /// Zero-weight net whose output biases fix the verdict regardless of
    /// input; tanh keeps the bias sign.
    fn fixed_verdict_net(n_output: usize, fire_at: &[usize]) -> Mlp {
        let mut net = Mlp::new_random(
            MlpShape {
                n_input: 81,
                n_hidden: 2,
                n_output,
            },
            0,
            0.0,
        );
        net.b_o = (0..n_output)
            .map(|k| if fire_at.contains(&k) { 2.0 } else { -2.0 })
            .collect();
        net
    }

    fn fixed_models(n_output: usize, fire_at: &[usize]) -> SkillModels {
        SkillModels::new(
            fixed_verdict_net(n_output, fire_at),
            fixed_verdict_net(n_output, fire_at),
            fixed_verdict_net(n_output, fire_at),
            fixed_verdict_net(n_output, fire_at),
        )
    }

    #[test]
    fn solved_grid_yields_an_empty_report() {
        let grid = Grid::parse(SOLVED_LINE).unwrap();
        let (after, report) = solve(&grid, &RecognizerMode::Exact).unwrap();
        assert!(report.solved);
        assert_eq!(report.final_dof, 0);
        assert_eq!(report.total_applications(), 0);
        assert_eq!(report.dof_curve, vec![0]);
        assert_eq!(after, grid);
    }

    #[test]
    fn exact_solve_is_consistent_and_matches_backtracking_when_it_finishes() {
        let mut text: Vec<char> = SOLVED_LINE.chars().collect();
        for index in 0..81 {
            if (index * 7 + index / 9) % 3 != 0 {
                text[index] = '.';
            }
        }
        let puzzle = Grid::parse(&text.iter().collect::<String>()).unwrap();
        let (after, report) = solve(&puzzle, &RecognizerMode::Exact).unwrap();

        assert_eq!(report.total_applications(), report.steps.len());
        assert!(report.dof_curve.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(report.dof_curve.len(), report.steps.len() + 1);
        assert_eq!(report.final_dof, *report.dof_curve.last().unwrap());
        if report.solved {
            assert_eq!(after, backtracking_solve(&puzzle).unwrap());
        }
    }

    #[test]
    fn recognize_in_unit_exact_returns_none_without_a_pattern() {
        let grid = Grid::empty();
        for kind in SkillKind::ALL {
            let unit = Unit::new(UnitKind::Row, 0).unwrap();
            assert!(recognize_in_unit(&grid, unit, kind, &RecognizerMode::Exact)
                .unwrap()
                .is_none());
        }
    }

    #[test]
    fn detection_gates_existence_and_oracle_supplies_location() {
        let mut grid = Grid::empty();
        grid.set_cell(cell(0, 3), Cell::Empty(CandidateSet::singleton(d(7))));
        let unit = Unit::new(UnitKind::Row, 0).unwrap();

        // Always-firing net: the oracle resolves the concrete instance.
        let yes = RecognizerMode::detection(fixed_models(1, &[0])).unwrap();
        let hit = recognize_in_unit(&grid, unit, SkillKind::NakedSingle, &yes)
            .unwrap()
            .unwrap();
        assert_eq!(hit.cells(), &[cell(0, 3)]);
        assert_eq!(hit.digits(), &[d(7)]);

        // A firing net on a patternless unit is a false positive: no action.
        let other = Unit::new(UnitKind::Row, 5).unwrap();
        assert!(
            recognize_in_unit(&grid, other, SkillKind::NakedSingle, &yes)
                .unwrap()
                .is_none()
        );

        // A silent net hides the pattern entirely.
        let no = RecognizerMode::detection(fixed_models(1, &[])).unwrap();
        assert!(recognize_in_unit(&grid, unit, SkillKind::NakedSingle, &no)
            .unwrap()
            .is_none());
    }

    #[test]
    fn localisation_must_match_the_oracle_cells_exactly() {
        let mut grid = Grid::empty();
        grid.set_cell(cell(0, 2), Cell::Empty([d(2), d(3)].into_iter().collect()));
        grid.set_cell(cell(0, 7), Cell::Empty([d(2), d(3)].into_iter().collect()));
        let unit = Unit::new(UnitKind::Row, 0).unwrap();

        // Fires at {2,6} but the double sits at {2,7}: mislocalisation.
        let wrong = RecognizerMode::localisation(fixed_models(9, &[2, 6])).unwrap();
        assert!(
            recognize_in_unit(&grid, unit, SkillKind::NakedDouble, &wrong)
                .unwrap()
                .is_none()
        );

        let right = RecognizerMode::localisation(fixed_models(9, &[2, 7])).unwrap();
        let hit = recognize_in_unit(&grid, unit, SkillKind::NakedDouble, &right)
            .unwrap()
            .unwrap();
        assert_eq!(hit.cells(), &[cell(0, 2), cell(0, 7)]);
    }

    #[test]
    fn always_firing_detection_replays_the_exact_trace() {
        let mut text: Vec<char> = SOLVED_LINE.chars().collect();
        for index in 0..81 {
            if (index * 5 + index / 9) % 2 != 0 {
                text[index] = '.';
            }
        }
        let puzzle = Grid::parse(&text.iter().collect::<String>()).unwrap();
        let (exact_grid, exact_report) = solve(&puzzle, &RecognizerMode::Exact).unwrap();
        let mode = RecognizerMode::detection(fixed_models(1, &[0])).unwrap();
        let (nn_grid, nn_report) = solve(&puzzle, &mode).unwrap();
        assert_eq!(exact_grid, nn_grid);
        assert_eq!(exact_report, nn_report);
    }

    #[test]
    fn identical_model_sets_give_identical_experiment_arms() {
        let mut text: Vec<char> = SOLVED_LINE.chars().collect();
        for index in 0..81 {
            if index % 2 == 0 {
                text[index] = '.';
            }
        }
        let puzzle = Grid::parse(&text.iter().collect::<String>()).unwrap();
        let models = fixed_models(1, &[0]);
        let report =
            run_experiment(&puzzle, models.clone(), models, TaskMode::Detection).unwrap();
        assert_eq!(report.trained, report.untrained);
    }

    #[test]
    fn mode_constructors_reject_mismatched_shapes() {
        assert!(RecognizerMode::detection(fixed_models(9, &[0])).is_err());
        assert!(RecognizerMode::localisation(fixed_models(1, &[0])).is_err());
    }

    #[test]
    fn report_csv_has_step_and_summary_rows() {
        let mut grid = Grid::empty();
        grid.set_cell(cell(0, 0), Cell::Empty(CandidateSet::singleton(d(4))));
        let (_, report) = solve(&grid, &RecognizerMode::Exact).unwrap();
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "step_index,skill,unit_kind,unit_index,cells,digits,dof_after"
        );
        assert!(lines[1].starts_with("1,naked-single,row,0,r0c0,4,"));
        assert!(lines.last().unwrap().starts_with("summary,"));
    }
}
