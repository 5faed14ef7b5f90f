//! Grid worlds with slippery moves and actuation attacks.
//!
//! A turn expands into three game states: the controller picks a direction,
//! the attacker either lets it through or replaces it, and chance resolves
//! the executed direction (intended with `p_intended`, each perpendicular
//! side with `p_side`; moves into a wall stay put). The stochastic state is
//! labeled `attack` when the two actions differ; landing anywhere other than
//! the cell the controller's action was expected to reach emits `anomaly`.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Deserialize;

use super::{GameError, Move, Outcome, Owner, StateSpec, StochasticGame};
use crate::automata::LabelSet;
use crate::ltl::{ANOMALY, ATTACK};

pub type Cell = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    North,
    South,
    East,
    West,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::North, Action::South, Action::East, Action::West];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::North => "North",
            Action::South => "South",
            Action::East => "East",
            Action::West => "West",
        }
    }

    pub fn from_name(s: &str) -> Option<Action> {
        Action::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s) || a.name()[..1].eq_ignore_ascii_case(s))
    }

    fn sides(self) -> [Action; 2] {
        match self {
            Action::North | Action::South => [Action::East, Action::West],
            Action::East | Action::West => [Action::North, Action::South],
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GridError {
    #[error("cell ({}, {}) is outside the grid", .0.0, .0.1)]
    OutOfBounds(Cell),
    #[error("invalid probabilities: {0}")]
    Probability(String),
    #[error("proposition {0:?} is not declared in ap")]
    UnknownLabel(String),
    #[error("proposition {0:?} is reserved for label events")]
    Reserved(String),
    #[error("grid document: {0}")]
    Schema(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub ap: Vec<String>,
    pub cell_labels: BTreeMap<Cell, BTreeSet<String>>,
    pub p_intended: f64,
    pub p_side: f64,
    /// Cell of the game's initial controller state.
    pub start: Cell,
}

impl GridSpec {
    pub fn new(
        rows: usize,
        cols: usize,
        ap: Vec<String>,
        cell_labels: BTreeMap<Cell, BTreeSet<String>>,
        p_intended: f64,
        p_side: f64,
    ) -> Result<Self, GridError> {
        let spec = Self {
            rows,
            cols,
            ap,
            cell_labels,
            p_intended,
            p_side,
            start: (0, 0),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_start(mut self, start: Cell) -> Result<Self, GridError> {
        self.check(start)?;
        self.start = start;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(GridError::Schema("rows and cols must be positive".into()));
        }
        let (p, q) = (self.p_intended, self.p_side);
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
            return Err(GridError::Probability(format!("p_intended={p}, p_side={q}")));
        }
        if (p + 2.0 * q - 1.0).abs() > 1e-9 {
            return Err(GridError::Probability(format!(
                "p_intended + 2*p_side = {} (must be 1)",
                p + 2.0 * q
            )));
        }
        for a in &self.ap {
            if a == ATTACK || a == ANOMALY {
                return Err(GridError::Reserved(a.clone()));
            }
        }
        for (&cell, labels) in &self.cell_labels {
            self.check(cell)?;
            if let Some(l) = labels.iter().find(|l| !self.ap.contains(l)) {
                return Err(GridError::UnknownLabel(l.clone()));
            }
        }
        self.check(self.start)
    }

    pub fn check(&self, (r, c): Cell) -> Result<(), GridError> {
        if r < self.rows && c < self.cols {
            Ok(())
        } else {
            Err(GridError::OutOfBounds((r, c)))
        }
    }

    pub fn num_cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn cell_index(&self, (r, c): Cell) -> usize {
        r * self.cols + c
    }

    pub fn cell_at(&self, i: usize) -> Cell {
        (i / self.cols, i % self.cols)
    }

    pub fn labels(&self, cell: Cell) -> BTreeSet<String> {
        self.cell_labels.get(&cell).cloned().unwrap_or_default()
    }

    /// Propositions of the generated game: the declared ones, then the two
    /// event propositions.
    pub fn game_ap(&self) -> Vec<String> {
        let mut ap = self.ap.clone();
        ap.push(ATTACK.to_string());
        ap.push(ANOMALY.to_string());
        ap
    }
}

fn neighbor(spec: &GridSpec, (r, c): Cell, a: Action) -> Cell {
    match a {
        Action::North if r > 0 => (r - 1, c),
        Action::South if r + 1 < spec.rows => (r + 1, c),
        Action::West if c > 0 => (r, c - 1),
        Action::East if c + 1 < spec.cols => (r, c + 1),
        _ => (r, c),
    }
}

/// The cell `action` leads to; moves into a wall stay in place.
pub fn expected_cell(spec: &GridSpec, cell: Cell, action: Action) -> Result<Cell, GridError> {
    spec.check(cell)?;
    Ok(neighbor(spec, cell, action))
}

/// Distribution of the destination when `executed` is carried out at `cell`.
/// Entries are in order of first appearance (intended, then the two sides)
/// with masses on a shared cell merged; zero masses are omitted.
pub fn transition_distribution(
    spec: &GridSpec,
    cell: Cell,
    executed: Action,
) -> Result<Vec<(Cell, f64)>, GridError> {
    spec.check(cell)?;
    let [s1, s2] = executed.sides();
    let mut out: Vec<(Cell, f64)> = Vec::with_capacity(3);
    for (a, p) in [(executed, spec.p_intended), (s1, spec.p_side), (s2, spec.p_side)] {
        if p == 0.0 {
            continue;
        }
        let to = neighbor(spec, cell, a);
        match out.iter_mut().find(|(c, _)| *c == to) {
            Some(e) => e.1 += p,
            None => out.push((to, p)),
        }
    }
    Ok(out)
}

/// One sampled turn of the grid world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub next_cell: Cell,
    /// `[attack event, anomaly event, destination labels]`.
    pub label_word: Vec<BTreeSet<String>>,
}

impl StepOutcome {
    /// All propositions emitted during the turn as a single set.
    pub fn turn_letter(&self) -> BTreeSet<String> {
        self.label_word.iter().flatten().cloned().collect()
    }
}

pub fn step_sample<R: Rng + ?Sized>(
    spec: &GridSpec,
    cell: Cell,
    a_ctrl: Action,
    a_att: Action,
    rng: &mut R,
) -> Result<StepOutcome, GridError> {
    let dist = transition_distribution(spec, cell, a_att)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut next = dist.last().expect("non-empty").0;
    for &(c, p) in &dist {
        acc += p;
        if u < acc {
            next = c;
            break;
        }
    }
    let expected = neighbor(spec, cell, a_ctrl);
    let event = |on: bool, name: &str| {
        if on {
            BTreeSet::from([name.to_string()])
        } else {
            BTreeSet::new()
        }
    };
    Ok(StepOutcome {
        next_cell: next,
        label_word: vec![
            event(a_att != a_ctrl, ATTACK),
            event(next != expected, ANOMALY),
            spec.labels(next),
        ],
    })
}

/// A grid world together with its expanded game and the state numbering:
/// controller states `0..n` by cell index, attacker states
/// `n + 4*cell + a`, chance states `5n + 16*cell + 4*a + b` for controller
/// action `a` and executed action `b`.
#[derive(Debug, Clone)]
pub struct GridGame {
    pub spec: GridSpec,
    pub game: StochasticGame,
}

impl GridGame {
    pub fn controller_state(&self, cell: Cell) -> usize {
        self.spec.cell_index(cell)
    }

    pub fn attacker_state(&self, cell: Cell, a: Action) -> usize {
        self.spec.num_cells() + 4 * self.spec.cell_index(cell) + a.index()
    }

    pub fn chance_state(&self, cell: Cell, a: Action, b: Action) -> usize {
        5 * self.spec.num_cells() + 16 * self.spec.cell_index(cell) + 4 * a.index() + b.index()
    }

    /// Cell a game state belongs to.
    pub fn cell_of(&self, s: usize) -> Cell {
        let n = self.spec.num_cells();
        let i = if s < n {
            s
        } else if s < 5 * n {
            (s - n) / 4
        } else {
            (s - 5 * n) / 16
        };
        self.spec.cell_at(i)
    }
}

pub fn build_grid_game(spec: &GridSpec) -> Result<GridGame, GridError> {
    spec.validate()?;
    let ap = spec.game_ap();
    let bit = |name: &str| ap.iter().position(|a| a == name).expect("declared");
    let (attack, anomaly) = (bit(ATTACK), bit(ANOMALY));
    let n = spec.num_cells();
    let letter = |cell: Cell| {
        spec.labels(cell)
            .iter()
            .fold(LabelSet::EMPTY, |l, name| l.with(bit(name)))
    };
    let mut states = Vec::with_capacity(21 * n);
    for i in 0..n {
        states.push(StateSpec {
            owner: Owner::Controller,
            label: letter(spec.cell_at(i)),
            moves: Action::ALL
                .iter()
                .map(|a| Move::det(a.name(), n + 4 * i + a.index()))
                .collect(),
            passive: None,
        });
    }
    for i in 0..n {
        for a in Action::ALL {
            states.push(StateSpec {
                owner: Owner::Attacker,
                label: LabelSet::EMPTY,
                moves: Action::ALL
                    .iter()
                    .map(|b| Move::det(b.name(), 5 * n + 16 * i + 4 * a.index() + b.index()))
                    .collect(),
                passive: Some(a.index()),
            });
        }
    }
    for i in 0..n {
        let cell = spec.cell_at(i);
        for a in Action::ALL {
            let expected = neighbor(spec, cell, a);
            for b in Action::ALL {
                let outcomes = transition_distribution(spec, cell, b)?
                    .into_iter()
                    .map(|(to, prob)| Outcome {
                        target: spec.cell_index(to),
                        prob,
                        event: if to != expected {
                            LabelSet::EMPTY.with(anomaly)
                        } else {
                            LabelSet::EMPTY
                        },
                    })
                    .collect();
                states.push(StateSpec {
                    owner: Owner::Chance,
                    label: if a != b {
                        LabelSet::EMPTY.with(attack)
                    } else {
                        LabelSet::EMPTY
                    },
                    moves: vec![Move {
                        name: "dummy".into(),
                        outcomes,
                    }],
                    passive: None,
                });
            }
        }
    }
    let game = StochasticGame::new(ap, states, spec.cell_index(spec.start))?;
    Ok(GridGame {
        spec: spec.clone(),
        game,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    rows: usize,
    cols: usize,
    #[serde(default)]
    ap: Vec<String>,
    #[serde(default)]
    labels: BTreeMap<String, Vec<String>>,
    p_intended: f64,
    p_side: f64,
    start: Option<String>,
}

fn parse_cell(key: &str) -> Result<Cell, GridError> {
    let bad = || GridError::Schema(format!("cell key {key:?} is not \"row,col\""));
    let (r, c) = key.split_once(',').ok_or_else(bad)?;
    Ok((
        r.trim().parse().map_err(|_| bad())?,
        c.trim().parse().map_err(|_| bad())?,
    ))
}

/// Parses a grid description (TOML).
pub fn load_grid(text: &str) -> Result<GridSpec, GridError> {
    let doc: GridDoc = toml::from_str(text).map_err(|e| GridError::Schema(e.message().to_string()))?;
    let mut cell_labels = BTreeMap::new();
    for (key, names) in doc.labels {
        let cell = parse_cell(&key)?;
        let set: BTreeSet<String> = names.into_iter().collect();
        if cell_labels.insert(cell, set).is_some() {
            return Err(GridError::Schema(format!("cell {key:?} listed twice")));
        }
    }
    let spec = GridSpec::new(doc.rows, doc.cols, doc.ap, cell_labels, doc.p_intended, doc.p_side)?;
    match doc.start {
        Some(s) => spec.with_start(parse_cell(&s)?),
        None => Ok(spec),
    }
}
