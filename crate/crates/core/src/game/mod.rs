//! Turn-based stochastic games and the grid-world generator.
//!
//! States are dense indices. Every state is owned by exactly one of the
//! controller, the attacker or chance; controller and attacker moves are
//! deterministic, chance states have a single dummy move with a proper
//! distribution over successors. Outcomes may carry a label *event* that is
//! emitted on the transition itself (used for the anomaly signal of grid
//! worlds, which the game does not materialize as a separate state).

mod grid;

use rand::Rng;

use crate::automata::{LabelSet, MAX_AP};

pub use grid::{
    build_grid_game, expected_cell, load_grid, step_sample, transition_distribution, Action,
    Cell, GridError, GridGame, GridSpec, StepOutcome,
};

/// Tolerance on distribution sums.
pub const PROB_EPS: f64 = 1e-12;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GameError {
    #[error("game has no states")]
    Empty,
    #[error("initial state {0} out of range")]
    BadInitial(usize),
    #[error("state {state}: {msg}")]
    BadState { state: usize, msg: String },
    #[error("{0} atomic propositions exceed the supported maximum of {MAX_AP}")]
    ApTooLarge(usize),
    #[error("duplicate proposition {0:?}")]
    DuplicateAp(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Owner {
    Controller,
    Attacker,
    Chance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub target: usize,
    pub prob: f64,
    /// Label event emitted on this transition (bits over the game's `ap`).
    pub event: LabelSet,
}

/// One available action of a state and its successor distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Move {
    pub name: String,
    pub outcomes: Vec<Outcome>,
}

impl Move {
    pub fn det(name: impl Into<String>, target: usize) -> Self {
        Self {
            name: name.into(),
            outcomes: vec![Outcome {
                target,
                prob: 1.0,
                event: LabelSet::EMPTY,
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpec {
    pub owner: Owner,
    pub label: LabelSet,
    pub moves: Vec<Move>,
    /// For attacker states: the move that leaves the controller's action
    /// untouched.
    pub passive: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticGame {
    ap: Vec<String>,
    states: Vec<StateSpec>,
    initial: usize,
}

impl StochasticGame {
    pub fn new(ap: Vec<String>, states: Vec<StateSpec>, initial: usize) -> Result<Self, GameError> {
        if ap.len() > MAX_AP {
            return Err(GameError::ApTooLarge(ap.len()));
        }
        for (i, a) in ap.iter().enumerate() {
            if ap[..i].contains(a) {
                return Err(GameError::DuplicateAp(a.clone()));
            }
        }
        if states.is_empty() {
            return Err(GameError::Empty);
        }
        if initial >= states.len() {
            return Err(GameError::BadInitial(initial));
        }
        let n = states.len();
        let mask = if ap.is_empty() { 0 } else { u32::MAX >> (32 - ap.len()) };
        for (s, st) in states.iter().enumerate() {
            let bad = |msg: String| GameError::BadState { state: s, msg };
            if st.label.0 & !mask != 0 {
                return Err(bad("label uses undeclared propositions".into()));
            }
            if st.moves.is_empty() {
                return Err(bad("no available action".into()));
            }
            if st.owner == Owner::Chance && st.moves.len() != 1 {
                return Err(bad("chance state must have exactly one dummy action".into()));
            }
            if let Some(p) = st.passive {
                if st.owner != Owner::Attacker || p >= st.moves.len() {
                    return Err(bad("passive action only for attacker states".into()));
                }
            }
            for m in &st.moves {
                if m.outcomes.is_empty() {
                    return Err(bad(format!("action {} has no outcome", m.name)));
                }
                if st.owner != Owner::Chance && (m.outcomes.len() != 1 || m.outcomes[0].prob != 1.0)
                {
                    return Err(bad(format!("action {} is not deterministic", m.name)));
                }
                let mut sum = 0.0;
                for o in &m.outcomes {
                    if o.target >= n {
                        return Err(bad(format!("successor {} out of range", o.target)));
                    }
                    if !(o.prob > 0.0 && o.prob <= 1.0) {
                        return Err(bad(format!("probability {} out of (0,1]", o.prob)));
                    }
                    if o.event.0 & !mask != 0 {
                        return Err(bad("event uses undeclared propositions".into()));
                    }
                    sum += o.prob;
                }
                if (sum - 1.0).abs() > PROB_EPS {
                    return Err(bad(format!("distribution sums to {sum}")));
                }
            }
        }
        Ok(Self { ap, states, initial })
    }

    pub fn ap(&self) -> &[String] {
        &self.ap
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn owner(&self, s: usize) -> Owner {
        self.states[s].owner
    }

    pub fn label(&self, s: usize) -> LabelSet {
        self.states[s].label
    }

    pub fn moves(&self, s: usize) -> &[Move] {
        &self.states[s].moves
    }

    pub fn passive(&self, s: usize) -> Option<usize> {
        self.states[s].passive
    }

    pub fn states_of(&self, owner: Owner) -> impl Iterator<Item = usize> + '_ {
        (0..self.states.len()).filter(move |&s| self.states[s].owner == owner)
    }

    /// Draws an outcome of action `m` at `s`.
    pub fn sample<R: Rng + ?Sized>(&self, s: usize, m: usize, rng: &mut R) -> &Outcome {
        let outs = &self.states[s].moves[m].outcomes;
        if outs.len() == 1 {
            return &outs[0];
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for o in outs {
            acc += o.prob;
            if u < acc {
                return o;
            }
        }
        outs.last().expect("non-empty")
    }

    /// Names of the propositions in `l`.
    pub fn label_names(&self, l: LabelSet) -> Vec<&str> {
        (0..self.ap.len())
            .filter(|&i| l.contains(i))
            .map(|i| self.ap[i].as_str())
            .collect()
    }
}
