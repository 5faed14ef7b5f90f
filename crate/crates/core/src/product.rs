//! Synchronous product of a stochastic game with a Rabin automaton, and the
//! state-based reward/discount shaping that turns Rabin acceptance into a
//! discounted objective.
//!
//! Product state `⟨s, q⟩` is numbered `s * |Q| + q`; ownership and actions
//! come from `s`, acceptance membership from `q`.

use std::collections::VecDeque;

use rand::Rng;

use crate::automata::{AutomataError, Dra, LabelSet};
use crate::game::{Owner, StochasticGame};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ProductError {
    #[error("game proposition {0:?} is unknown to the automaton")]
    ApMismatch(String),
    #[error("pair index {0} out of range")]
    NoSuchPair(usize),
    #[error("automaton state {0} is in both C and B of the designated pair")]
    Overlap(usize),
    #[error("invalid shaping parameters: {0}")]
    Shaping(String),
    #[error(transparent)]
    Automata(#[from] AutomataError),
}

/// When the automaton reads state labels and label events.
///
/// Turn-based games split one physical move into several structural
/// states; which of them advance the automaton decides what an LTL `X`
/// refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelTiming {
    /// Only the chance transition that completes a turn advances the
    /// automaton, reading one letter: the chance state's label, the
    /// transition's events and the destination label together. The initial
    /// automaton state has already read the initial state's label. One
    /// automaton step per turn.
    #[default]
    PerTurn,
    /// Like `PerTurn`, but the chance transition feeds three letters in
    /// order: chance-state label, transition events, destination label.
    PerEvent,
    /// Every transition reads the label of the state being left together
    /// with its events; the automaton starts in its initial state.
    OnLeave,
}

#[derive(Debug, Clone)]
pub struct ProductGame {
    game: StochasticGame,
    dra: Dra,
    timing: LabelTiming,
    letters: Vec<LabelSet>,
    nq: usize,
}

/// Product under the default [`LabelTiming::PerTurn`].
pub fn build_product(g: &StochasticGame, a: &Dra) -> Result<ProductGame, ProductError> {
    ProductGame::new(g.clone(), a.clone(), LabelTiming::default())
}

impl ProductGame {
    pub fn new(game: StochasticGame, dra: Dra, timing: LabelTiming) -> Result<Self, ProductError> {
        let map: Vec<usize> = game
            .ap()
            .iter()
            .map(|p| dra.ap_index(p).ok_or_else(|| ProductError::ApMismatch(p.clone())))
            .collect::<Result<_, _>>()?;
        let letters = (0..1u32 << game.ap().len())
            .map(|bits| {
                map.iter()
                    .enumerate()
                    .filter(|(i, _)| bits & (1 << i) != 0)
                    .fold(LabelSet::EMPTY, |l, (_, &j)| l.with(j))
            })
            .collect();
        let nq = dra.num_states();
        Ok(Self {
            game,
            dra,
            timing,
            letters,
            nq,
        })
    }

    pub fn game(&self) -> &StochasticGame {
        &self.game
    }

    pub fn dra(&self) -> &Dra {
        &self.dra
    }

    pub fn timing(&self) -> LabelTiming {
        self.timing
    }

    pub fn num_states(&self) -> usize {
        self.game.num_states() * self.nq
    }

    pub fn num_modes(&self) -> usize {
        self.nq
    }

    pub fn state(&self, s: usize, q: usize) -> usize {
        s * self.nq + q
    }

    pub fn split(&self, x: usize) -> (usize, usize) {
        (x / self.nq, x % self.nq)
    }

    pub fn owner(&self, x: usize) -> Owner {
        self.game.owner(x / self.nq)
    }

    pub fn num_actions(&self, x: usize) -> usize {
        self.game.moves(x / self.nq).len()
    }

    /// Game labels translated to the automaton's alphabet.
    pub fn letter(&self, game_label: LabelSet) -> LabelSet {
        self.letters[game_label.0 as usize]
    }

    /// Automaton state after placing the game in `s` with automaton state `q`
    /// (the label of `s` is read here unless labels are read on leaving).
    pub fn enter(&self, s: usize, q: usize) -> usize {
        match self.timing {
            LabelTiming::OnLeave => self.state(s, q),
            _ => self.state(s, self.dra.step(q, self.letter(self.game.label(s)))),
        }
    }

    pub fn initial(&self) -> usize {
        self.enter(self.game.initial(), self.dra.initial())
    }

    fn advance(&self, s: usize, q: usize, event: LabelSet, t: usize) -> usize {
        let g = &self.game;
        match self.timing {
            LabelTiming::OnLeave => self.dra.step(q, self.letter(g.label(s).union(event))),
            _ if g.owner(s) != Owner::Chance => q,
            LabelTiming::PerTurn => self
                .dra
                .step(q, self.letter(g.label(s).union(event).union(g.label(t)))),
            LabelTiming::PerEvent => {
                let q = self.dra.step(q, self.letter(g.label(s)));
                let q = self.dra.step(q, self.letter(event));
                self.dra.step(q, self.letter(g.label(t)))
            }
        }
    }

    /// Successors of `x` under action `m` with their probabilities (one
    /// entry per game outcome).
    pub fn successors(&self, x: usize, m: usize) -> Vec<(usize, f64)> {
        let (s, q) = self.split(x);
        self.game.moves(s)[m]
            .outcomes
            .iter()
            .map(|o| (self.state(o.target, self.advance(s, q, o.event, o.target)), o.prob))
            .collect()
    }

    pub fn step<R: Rng + ?Sized>(&self, x: usize, m: usize, rng: &mut R) -> usize {
        let (s, q) = self.split(x);
        let o = self.game.sample(s, m, rng);
        self.state(o.target, self.advance(s, q, o.event, o.target))
    }

    /// Forward closure from `from` under all actions, in BFS order.
    pub fn reachable_from(&self, from: usize) -> Vec<usize> {
        let mut seen = vec![false; self.num_states()];
        let mut order = vec![from];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            for m in 0..self.num_actions(x) {
                for (y, _) in self.successors(x, m) {
                    if !seen[y] {
                        seen[y] = true;
                        order.push(y);
                        queue.push_back(y);
                    }
                }
            }
        }
        order
    }

    pub fn reachable(&self) -> Vec<usize> {
        self.reachable_from(self.initial())
    }

    /// Whether every attacker deviation at attacker state `x` lands the
    /// automaton in `sink` (indexed by automaton state), judged from the
    /// automaton alone: for the per-turn reading, every letter containing an
    /// attack-labelled chance state's label must lead into the sink.
    pub fn deviation_is_fatal(&self, x: usize, sink: &[bool]) -> bool {
        let (s, q) = self.split(x);
        let g = &self.game;
        let Some(passive) = g.passive(s) else {
            return false;
        };
        let deviating: Vec<LabelSet> = g
            .moves(s)
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != passive)
            .map(|(_, m)| g.label(m.outcomes[0].target))
            .collect();
        if deviating.is_empty() {
            return false;
        }
        let width = self.dra.num_labels() as u32;
        deviating.iter().all(|&l| {
            let need = self.letter(l);
            match self.timing {
                LabelTiming::PerEvent => sink[self.dra.step(q, need)],
                LabelTiming::PerTurn => (0..width)
                    .filter(|bits| bits & need.0 == need.0)
                    .all(|bits| sink[self.dra.step(q, LabelSet(bits))]),
                LabelTiming::OnLeave => {
                    let q = self.dra.step(q, self.letter(g.label(s)));
                    (0..width)
                        .filter(|bits| bits & need.0 == need.0)
                        .all(|bits| sink[self.dra.step(q, LabelSet(bits))])
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapingParams {
    pub gamma: f64,
    pub exponent_b: f64,
    pub exponent_c: f64,
}

impl Default for ShapingParams {
    fn default() -> Self {
        Self {
            gamma: 0.999,
            exponent_b: 0.5,
            exponent_c: 0.25,
        }
    }
}

impl ShapingParams {
    pub fn with_gamma(gamma: f64) -> Self {
        Self {
            gamma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ProductError> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(ProductError::Shaping(format!("gamma {} not in (0,1)", self.gamma)));
        }
        if !(0.0 < self.exponent_c && self.exponent_c < self.exponent_b && self.exponent_b < 1.0) {
            return Err(ProductError::Shaping(format!(
                "exponents must satisfy 0 < c < b < 1 (b={}, c={})",
                self.exponent_b, self.exponent_c
            )));
        }
        Ok(())
    }
}

/// `1 − (1−γ)^exponent_b`.
pub fn gamma_b(p: &ShapingParams) -> f64 {
    1.0 - (1.0 - p.gamma).powf(p.exponent_b)
}

/// `1 − (1−γ)^exponent_c`.
pub fn gamma_c(p: &ShapingParams) -> f64 {
    1.0 - (1.0 - p.gamma).powf(p.exponent_c)
}

/// Reward and discount per automaton state for one designated pair.
#[derive(Debug, Clone)]
pub struct Shaping {
    in_b: Vec<bool>,
    in_c: Vec<bool>,
    sink: Vec<bool>,
    gamma: f64,
    gamma_b: f64,
    gamma_c: f64,
}

impl Shaping {
    pub fn new(dra: &Dra, pair: usize, params: &ShapingParams) -> Result<Self, ProductError> {
        params.validate()?;
        let p = dra.pairs().get(pair).ok_or(ProductError::NoSuchPair(pair))?;
        if let Some(&q) = p.fin.intersection(&p.inf).next() {
            return Err(ProductError::Overlap(q));
        }
        let n = dra.num_states();
        let member = |s: &std::collections::BTreeSet<usize>| (0..n).map(|q| s.contains(&q)).collect();
        let sink_set = dra.winning_sink(pair);
        Ok(Self {
            in_b: member(&p.inf),
            in_c: member(&p.fin),
            sink: (0..n).map(|q| sink_set.contains(&q)).collect(),
            gamma: params.gamma,
            gamma_b: gamma_b(params),
            gamma_c: gamma_c(params),
        })
    }

    /// Same memberships under another base discount.
    pub fn with_gamma(&self, params: &ShapingParams) -> Result<Self, ProductError> {
        params.validate()?;
        Ok(Self {
            gamma: params.gamma,
            gamma_b: gamma_b(params),
            gamma_c: gamma_c(params),
            ..self.clone()
        })
    }

    pub fn reward(&self, q: usize) -> f64 {
        if self.in_b[q] {
            1.0 - self.gamma_b
        } else {
            0.0
        }
    }

    pub fn discount(&self, q: usize) -> f64 {
        if self.in_b[q] {
            self.gamma_b
        } else if self.in_c[q] {
            self.gamma_c
        } else {
            self.gamma
        }
    }

    pub fn in_b(&self, q: usize) -> bool {
        self.in_b[q]
    }

    pub fn in_c(&self, q: usize) -> bool {
        self.in_c[q]
    }

    /// Automaton states of the closed, C-free accepting region, where the
    /// exact value is 1.
    pub fn sink(&self) -> &[bool] {
        &self.sink
    }

    pub fn max_discount(&self) -> f64 {
        (0..self.in_b.len())
            .map(|q| self.discount(q))
            .fold(0.0, f64::max)
    }
}
