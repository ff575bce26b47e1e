//! Synthetic training and target sets for the skill networks.
//!
//! For each skill the positive samples enumerate every possible placement of
//! the pattern inside one unit: 81 for singles (cell x digit) and
//! 36 x 36 = 1296 for doubles (cell pair x digit pair). Filler cells get
//! seeded random candidate lists of cardinality >= 3, rejection-sampled so no
//! confounding pattern sneaks in; the planted pattern is the only low-count
//! structure in a positive. Negatives are random unit configurations of the
//! same cardinality family, rejection-sampled so the target skill's pattern
//! is absent (for the hidden skills also so that no stray digit occurs just
//! once or twice). Other skills' patterns are permitted in negatives, since
//! each network learns one skill on its own.
//!
//! Detection targets are a single +/-1; localisation targets are nine +/-1
//! values that fire exactly at the pattern's cells.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::board::{CandidateSet, Digit};
use crate::encoding::UnitEncoding;
use crate::seeds;
use crate::skills::{find_patterns, SkillKind, UnitPattern};

/// Retries allowed while rejection-sampling one unit configuration.
const RETRY_BUDGET: usize = 10_000;

#[derive(Debug, Error)]
pub enum TrainsetError {
    #[error("exhausted {budget} retries generating a {kind} {stage} sample")]
    GenerationExhausted {
        kind: SkillKind,
        stage: &'static str,
        budget: usize,
    },
    #[error("malformed training-set file: {0}")]
    Malformed(String),
    #[error("training-set io: {0}")]
    Io(#[from] std::io::Error),
}

/// What the paired network is asked to produce.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum TaskMode {
    Detection,
    Localisation,
}

impl TaskMode {
    pub const ALL: [TaskMode; 2] = [TaskMode::Detection, TaskMode::Localisation];

    pub fn name(self) -> &'static str {
        match self {
            TaskMode::Detection => "detection",
            TaskMode::Localisation => "localisation",
        }
    }

    pub fn parse(s: &str) -> Option<TaskMode> {
        TaskMode::ALL.into_iter().find(|m| m.name() == s)
    }

    /// Output-layer width of the matching network.
    pub fn n_outputs(self) -> usize {
        match self {
            TaskMode::Detection => 1,
            TaskMode::Localisation => 9,
        }
    }
}

impl fmt::Display for TaskMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct DetectionSample {
    pub input: UnitEncoding,
    pub target: f64,
}

#[derive(Clone, Debug)]
pub struct LocalisationSample {
    pub input: UnitEncoding,
    pub target: [f64; 9],
}

#[derive(Clone, Debug)]
pub enum Samples {
    Detection(Vec<DetectionSample>),
    Localisation(Vec<LocalisationSample>),
}

/// Deterministic 0.70 / 0.15 / 0.15 partition of sample indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    /// Seeded permutation of `0..n`; floor-sized train and validation parts,
    /// remainder to test.
    pub fn seeded(n: usize, seed: u64) -> Split {
        let mut indices: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        indices.shuffle(&mut rng);
        let n_train = n * 70 / 100;
        let n_val = n * 15 / 100;
        let test = indices.split_off(n_train + n_val);
        let validation = indices.split_off(n_train);
        Split {
            train: indices,
            validation,
            test,
        }
    }
}

/// A complete labelled dataset for one (skill, mode) pair.
#[derive(Clone, Debug)]
pub struct TrainingSet {
    skill: SkillKind,
    mode: TaskMode,
    samples: Samples,
    split: Split,
    seed: u64,
}

impl TrainingSet {
    pub fn skill(&self) -> SkillKind {
        self.skill
    }

    pub fn mode(&self) -> TaskMode {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn split(&self) -> &Split {
        &self.split
    }

    pub fn len(&self) -> usize {
        match &self.samples {
            Samples::Detection(v) => v.len(),
            Samples::Localisation(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input(&self, i: usize) -> &UnitEncoding {
        match &self.samples {
            Samples::Detection(v) => &v[i].input,
            Samples::Localisation(v) => &v[i].input,
        }
    }

    /// Target values of sample `i`: one value for detection, nine for
    /// localisation.
    pub fn target(&self, i: usize) -> &[f64] {
        match &self.samples {
            Samples::Detection(v) => std::slice::from_ref(&v[i].target),
            Samples::Localisation(v) => &v[i].target,
        }
    }

    /// A sample is positive iff any target component fires.
    pub fn is_positive(&self, i: usize) -> bool {
        self.target(i).iter().any(|&t| t > 0.0)
    }
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Minimum candidate count of filler and negative cells. Everything that is
/// not part of a planted pattern carries at least this many candidates, so
/// the pattern's low counts are unambiguous.
const FILLER_MIN_LEN: usize = 3;

/// Uniform random subset of `allowed` with at least `min_len` members.
fn sample_subset(rng: &mut ChaCha8Rng, allowed: CandidateSet, min_len: usize) -> CandidateSet {
    loop {
        let bits = rng.random::<u16>() & allowed.bits();
        let set = CandidateSet::from_bits(bits).unwrap();
        if set.len() >= min_len {
            return set;
        }
    }
}

fn planted(kind: SkillKind, cells: Vec<usize>, digits: Vec<Digit>) -> UnitPattern {
    UnitPattern {
        kind,
        cells,
        digits,
    }
}

/// How often each digit occurs across the nine lists.
fn digit_counts(lists: &[CandidateSet; 9]) -> [usize; 9] {
    let mut counts = [0usize; 9];
    for set in lists {
        for d in set.iter() {
            counts[d.index()] += 1;
        }
    }
    counts
}

/// The hidden skills key on digit occurrence counts; a stray digit occurring
/// once or twice would blur the planted pattern's count signature.
fn has_stray_low_count(lists: &[CandidateSet; 9], pattern_digits: &[Digit]) -> bool {
    let counts = digit_counts(lists);
    Digit::ALL.into_iter().any(|d| {
        !pattern_digits.contains(&d) && (counts[d.index()] == 1 || counts[d.index()] == 2)
    })
}

/// True iff `lists` carries exactly the planted pattern for its own skill and
/// none of the patterns its generator must avoid.
fn is_clean_positive(lists: &[CandidateSet; 9], pattern: &UnitPattern) -> bool {
    let own = find_patterns(pattern.kind, lists);
    if own.len() != 1 || own[0] != *pattern {
        return false;
    }
    match pattern.kind {
        // Fillers must not form a single of the other kind.
        SkillKind::NakedSingle => find_patterns(SkillKind::HiddenSingle, lists).is_empty(),
        SkillKind::HiddenSingle => {
            find_patterns(SkillKind::NakedSingle, lists).is_empty()
                && !has_stray_low_count(lists, &pattern.digits)
        }
        // Doubles exclude stray singles and the sibling double as well.
        SkillKind::NakedDouble => [
            SkillKind::NakedSingle,
            SkillKind::HiddenSingle,
            SkillKind::HiddenDouble,
        ]
        .iter()
        .all(|&k| find_patterns(k, lists).is_empty()),
        SkillKind::HiddenDouble => {
            [SkillKind::NakedSingle, SkillKind::HiddenSingle, SkillKind::NakedDouble]
                .iter()
                .all(|&k| find_patterns(k, lists).is_empty())
                && !has_stray_low_count(lists, &pattern.digits)
        }
    }
}

type PositiveSample = ([CandidateSet; 9], UnitPattern);

fn gen_positive(
    kind: SkillKind,
    rng: &mut ChaCha8Rng,
    pattern: &UnitPattern,
) -> Result<[CandidateSet; 9], TrainsetError> {
    for _ in 0..RETRY_BUDGET {
        let lists = match kind {
            SkillKind::NakedSingle => {
                let k = pattern.cells[0];
                let d = pattern.digits[0];
                std::array::from_fn(|c| {
                    if c == k {
                        CandidateSet::singleton(d)
                    } else {
                        sample_subset(rng, CandidateSet::FULL, FILLER_MIN_LEN)
                    }
                })
            }
            SkillKind::HiddenSingle => {
                let k = pattern.cells[0];
                let d = pattern.digits[0];
                let mut others = CandidateSet::FULL;
                others.remove(d);
                std::array::from_fn(|c| {
                    if c == k {
                        let mut host = sample_subset(rng, others, 1);
                        host.insert(d);
                        host
                    } else {
                        sample_subset(rng, others, FILLER_MIN_LEN)
                    }
                })
            }
            SkillKind::NakedDouble => {
                let pair: CandidateSet = pattern.digits.iter().copied().collect();
                std::array::from_fn(|c| {
                    if pattern.cells.contains(&c) {
                        pair
                    } else {
                        sample_subset(rng, CandidateSet::FULL, FILLER_MIN_LEN)
                    }
                })
            }
            SkillKind::HiddenDouble => {
                let pair: CandidateSet = pattern.digits.iter().copied().collect();
                let mut others = CandidateSet::FULL;
                for d in pair.iter() {
                    others.remove(d);
                }
                std::array::from_fn(|c| {
                    if pattern.cells.contains(&c) {
                        let mut host = sample_subset(rng, others, 1);
                        for d in pair.iter() {
                            host.insert(d);
                        }
                        host
                    } else {
                        sample_subset(rng, others, FILLER_MIN_LEN)
                    }
                })
            }
        };
        if is_clean_positive(&lists, pattern) {
            return Ok(lists);
        }
    }
    Err(TrainsetError::GenerationExhausted {
        kind,
        stage: "positive",
        budget: RETRY_BUDGET,
    })
}

/// All 81 positive single-pattern placements (cell x digit), oracle-clean.
pub fn gen_positive_singles(
    kind: SkillKind,
    seed: u64,
) -> Result<Vec<PositiveSample>, TrainsetError> {
    assert!(kind.is_single(), "gen_positive_singles wants a single skill");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(81);
    for k in 0..9 {
        for d in Digit::ALL {
            let pattern = planted(kind, vec![k], vec![d]);
            let lists = gen_positive(kind, &mut rng, &pattern)?;
            out.push((lists, pattern));
        }
    }
    Ok(out)
}

/// All 1296 positive double-pattern placements (cell pair x digit pair).
pub fn gen_positive_doubles(
    kind: SkillKind,
    seed: u64,
) -> Result<Vec<PositiveSample>, TrainsetError> {
    assert!(!kind.is_single(), "gen_positive_doubles wants a double skill");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(1296);
    for a in 0..9 {
        for b in a + 1..9 {
            for (pi, p) in Digit::ALL.into_iter().enumerate() {
                for q in Digit::ALL.into_iter().skip(pi + 1) {
                    let pattern = planted(kind, vec![a, b], vec![p, q]);
                    let lists = gen_positive(kind, &mut rng, &pattern)?;
                    out.push((lists, pattern));
                }
            }
        }
    }
    Ok(out)
}

/// Seeded random unit configurations in which `kind`'s pattern is absent.
///
/// Cells draw from the same cardinality family as positive fillers. The
/// hidden skills additionally reject stray digits with counts of 1 or 2, so
/// their count signature stays unambiguous on both sides of the label.
pub fn gen_negatives(
    kind: SkillKind,
    count: usize,
    seed: u64,
) -> Result<Vec<[CandidateSet; 9]>, TrainsetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    'samples: for _ in 0..count {
        for _ in 0..RETRY_BUDGET {
            let lists: [CandidateSet; 9] =
                std::array::from_fn(|_| sample_subset(&mut rng, CandidateSet::FULL, FILLER_MIN_LEN));
            let count_rule = match kind {
                SkillKind::HiddenSingle | SkillKind::HiddenDouble => {
                    !has_stray_low_count(&lists, &[])
                }
                SkillKind::NakedSingle | SkillKind::NakedDouble => true,
            };
            if count_rule && find_patterns(kind, &lists).is_empty() {
                out.push(lists);
                continue 'samples;
            }
        }
        return Err(TrainsetError::GenerationExhausted {
            kind,
            stage: "negative",
            budget: RETRY_BUDGET,
        });
    }
    Ok(out)
}

/// Builds the full dataset: positives then negatives, targets attached, and
/// the seeded 0.70/0.15/0.15 split computed.
///
/// The inputs depend only on (skill, seed), so detection and localisation
/// sets built from the same seed share their sample matrix and differ only
/// in targets.
pub fn build_training_set(
    skill: SkillKind,
    mode: TaskMode,
    seed: u64,
) -> Result<TrainingSet, TrainsetError> {
    let pos_seed = seeds::derive(seed, seeds::stream_tag("positives"));
    let neg_seed = seeds::derive(seed, seeds::stream_tag("negatives"));
    let split_seed = seeds::derive(seed, seeds::stream_tag("split"));

    let positives = if skill.is_single() {
        gen_positive_singles(skill, pos_seed)?
    } else {
        gen_positive_doubles(skill, pos_seed)?
    };
    let negatives = gen_negatives(skill, positives.len(), neg_seed)?;
    let total = positives.len() + negatives.len();

    let samples = match mode {
        TaskMode::Detection => {
            let mut v = Vec::with_capacity(total);
            for (lists, _) in &positives {
                v.push(DetectionSample {
                    input: UnitEncoding::from_lists(lists),
                    target: 1.0,
                });
            }
            for lists in &negatives {
                v.push(DetectionSample {
                    input: UnitEncoding::from_lists(lists),
                    target: -1.0,
                });
            }
            Samples::Detection(v)
        }
        TaskMode::Localisation => {
            let mut v = Vec::with_capacity(total);
            for (lists, pattern) in &positives {
                let mut target = [-1.0; 9];
                for &cell in &pattern.cells {
                    target[cell] = 1.0;
                }
                v.push(LocalisationSample {
                    input: UnitEncoding::from_lists(lists),
                    target,
                });
            }
            for lists in &negatives {
                v.push(LocalisationSample {
                    input: UnitEncoding::from_lists(lists),
                    target: [-1.0; 9],
                });
            }
            Samples::Localisation(v)
        }
    };

    Ok(TrainingSet {
        skill,
        mode,
        samples,
        split: Split::seeded(total, split_seed),
        seed,
    })
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------
//
// Header line: skill,mode,n_samples,seed
// Sample line: 81 comma-separated bits, '|', then 1 or 9 comma-separated
// targets written as 1 / -1. UTF-8, LF line endings.

impl TrainingSet {
    pub fn write_to(&self, mut w: impl std::io::Write) -> Result<(), TrainsetError> {
        writeln!(
            w,
            "{},{},{},{}",
            self.skill.name(),
            self.mode.name(),
            self.len(),
            self.seed
        )?;
        for i in 0..self.len() {
            let bits: Vec<String> = self.input(i).bits().iter().map(u8::to_string).collect();
            let targets: Vec<String> = self
                .target(i)
                .iter()
                .map(|&t| if t > 0.0 { "1".into() } else { "-1".to_string() })
                .collect();
            writeln!(w, "{}|{}", bits.join(","), targets.join(","))?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), TrainsetError> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<TrainingSet, TrainsetError> {
        let text = fs::read_to_string(path)?;
        TrainingSet::parse(&text)
    }

    pub fn parse(text: &str) -> Result<TrainingSet, TrainsetError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| TrainsetError::Malformed("missing header".into()))?;
        let fields: Vec<&str> = header.split(',').collect();
        let [skill, mode, n_samples, seed] = fields[..] else {
            return Err(TrainsetError::Malformed(format!(
                "header needs 4 fields, got {}",
                fields.len()
            )));
        };
        let skill = SkillKind::parse(skill)
            .ok_or_else(|| TrainsetError::Malformed(format!("unknown skill '{skill}'")))?;
        let mode = TaskMode::parse(mode)
            .ok_or_else(|| TrainsetError::Malformed(format!("unknown mode '{mode}'")))?;
        let n_samples: usize = n_samples
            .parse()
            .map_err(|_| TrainsetError::Malformed(format!("bad sample count '{n_samples}'")))?;
        let seed: u64 = seed
            .parse()
            .map_err(|_| TrainsetError::Malformed(format!("bad seed '{seed}'")))?;

        let mut detection = Vec::new();
        let mut localisation = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let (bits_part, target_part) = line.split_once('|').ok_or_else(|| {
                TrainsetError::Malformed(format!("line {}: missing '|'", lineno + 2))
            })?;
            let bits: Vec<u8> = bits_part
                .split(',')
                .map(|b| match b {
                    "0" => Ok(0u8),
                    "1" => Ok(1u8),
                    other => Err(TrainsetError::Malformed(format!(
                        "line {}: bad bit '{other}'",
                        lineno + 2
                    ))),
                })
                .collect::<Result<_, _>>()?;
            let input = UnitEncoding::from_bits(&bits).map_err(|e| {
                TrainsetError::Malformed(format!("line {}: {e}", lineno + 2))
            })?;
            let targets: Vec<f64> = target_part
                .split(',')
                .map(|t| match t {
                    "1" => Ok(1.0),
                    "-1" => Ok(-1.0),
                    other => Err(TrainsetError::Malformed(format!(
                        "line {}: bad target '{other}'",
                        lineno + 2
                    ))),
                })
                .collect::<Result<_, _>>()?;
            match (mode, targets.len()) {
                (TaskMode::Detection, 1) => detection.push(DetectionSample {
                    input,
                    target: targets[0],
                }),
                (TaskMode::Localisation, 9) => {
                    let mut target = [0.0; 9];
                    target.copy_from_slice(&targets);
                    localisation.push(LocalisationSample { input, target });
                }
                (_, n) => {
                    return Err(TrainsetError::Malformed(format!(
                        "line {}: {n} targets for {mode} mode",
                        lineno + 2
                    )))
                }
            }
        }
        let samples = match mode {
            TaskMode::Detection => Samples::Detection(detection),
            TaskMode::Localisation => Samples::Localisation(localisation),
        };
        let set = TrainingSet {
            skill,
            mode,
            split: Split::seeded(n_samples, seeds::derive(seed, seeds::stream_tag("split"))),
            samples,
            seed,
        };
        if set.len() != n_samples {
            return Err(TrainsetError::Malformed(format!(
                "header says {n_samples} samples, file has {}",
                set.len()
            )));
        }
        Ok(set)
    }
}
