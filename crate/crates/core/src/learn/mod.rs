//! Model-free minimax-Q learning on product games.
//!
//! The learner interacts with the product only through [`Environment`]:
//! episode resets and sampled steps. Rewards and discounts depend on the
//! automaton coordinate alone, so they are computed from the designated
//! pair without looking at transition probabilities.

mod pipeline;
mod strategy;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::AutomataError;
use crate::game::Owner;
use crate::ltl::LtlError;
use crate::product::{LabelTiming, ProductError, ProductGame, Shaping, ShapingParams};

pub use pipeline::{
    algorithm1, align_alphabet, multi_pair_learn, multi_pair_learn_observed, resolve_winning,
    sink_value, MultiPairOutcome, Synthesis, WinningCondition,
};
pub use strategy::{
    greedy_attacker, greedy_controller, uncovered_states, FiniteMemoryStrategy, StrategyError,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("invalid learning configuration: {0}")]
    Config(String),
    #[error("automaton has {0} acceptance pairs; use multi_pair_learn")]
    MultiPair(usize),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Ltl(#[from] LtlError),
}

/// Linear per-episode decay from `start` to `end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub start: f64,
    pub end: f64,
}

impl Schedule {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn constant(v: f64) -> Self {
        Self { start: v, end: v }
    }

    pub fn at(&self, episode: u64, episodes: u64) -> f64 {
        if episodes <= 1 {
            return self.start;
        }
        let t = episode as f64 / (episodes - 1) as f64;
        self.start + (self.end - self.start) * t
    }

    fn validate(&self, what: &str) -> Result<(), LearnError> {
        let ok = |v: f64| v > 0.0 && v <= 1.0;
        if !ok(self.start) || !ok(self.end) {
            return Err(LearnError::Config(format!("{what} values must lie in (0,1]")));
        }
        if self.end > self.start {
            return Err(LearnError::Config(format!("{what} schedule must be nonincreasing")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartDistribution {
    /// Uniform over product controller states `⟨s, q⟩`.
    #[default]
    UniformProduct,
    /// Uniform controller state `s`, automaton state `q0` advanced by the
    /// label of `s`.
    InitialDraOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnConfig {
    pub episodes: u64,
    /// Controller decisions per episode (an episode also stops after
    /// `TRANSITIONS_PER_STEP` times as many transitions).
    pub steps_per_episode: u64,
    pub epsilon: Schedule,
    pub alpha: Schedule,
    pub gamma: f64,
    /// Starting discount of the curriculum; the discount moves geometrically
    /// in `1−γ` from this value to `gamma` over the first half of training.
    pub gamma_curriculum: Option<f64>,
    pub exponent_b: f64,
    pub exponent_c: f64,
    pub seed: u64,
    pub skip_detected_attacks: bool,
    pub start: StartDistribution,
    pub timing: LabelTiming,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            episodes: 512_000,
            steps_per_episode: 1000,
            epsilon: Schedule::new(0.5, 0.05),
            alpha: Schedule::new(0.5, 0.05),
            gamma: 0.999,
            gamma_curriculum: Some(0.99),
            exponent_b: 0.5,
            exponent_c: 0.25,
            seed: 0,
            skip_detected_attacks: false,
            start: StartDistribution::default(),
            timing: LabelTiming::default(),
        }
    }
}

impl LearnConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        self.epsilon.validate("epsilon")?;
        self.alpha.validate("alpha")?;
        self.shaping(self.gamma).validate()?;
        if let Some(g0) = self.gamma_curriculum {
            if !(g0 > 0.0 && g0 < 1.0) {
                return Err(LearnError::Config(format!("curriculum start {g0} not in (0,1)")));
            }
        }
        Ok(())
    }

    pub fn shaping(&self, gamma: f64) -> ShapingParams {
        ShapingParams {
            gamma,
            exponent_b: self.exponent_b,
            exponent_c: self.exponent_c,
        }
    }

    /// Discount used during `episode`.
    pub fn gamma_at(&self, episode: u64) -> f64 {
        match self.gamma_curriculum {
            Some(g0) if g0 < self.gamma && self.episodes > 1 => {
                let half = (self.episodes as f64 / 2.0).max(1.0);
                let t = (episode as f64 / half).min(1.0);
                1.0 - (1.0 - g0).powf(1.0 - t) * (1.0 - self.gamma).powf(t)
            }
            _ => self.gamma,
        }
    }
}

/// Sampling interface of the learner.
pub trait Environment {
    fn num_states(&self) -> usize;
    fn owner(&self, x: usize) -> Owner;
    fn num_actions(&self, x: usize) -> usize;
    /// Automaton coordinate of `x`.
    fn mode(&self, x: usize) -> usize;
    fn reset<R: Rng + ?Sized>(&self, start: StartDistribution, rng: &mut R) -> usize;
    fn step<R: Rng + ?Sized>(&self, x: usize, action: usize, rng: &mut R) -> usize;
    /// Non-attacking action at attacker states.
    fn passive_action(&self, x: usize) -> Option<usize>;
    /// Whether every deviation at attacker state `x` ends in the sink.
    fn deviation_is_fatal(&self, x: usize, sink: &[bool]) -> bool;
}

impl Environment for ProductGame {
    fn num_states(&self) -> usize {
        ProductGame::num_states(self)
    }

    fn owner(&self, x: usize) -> Owner {
        ProductGame::owner(self, x)
    }

    fn num_actions(&self, x: usize) -> usize {
        ProductGame::num_actions(self, x)
    }

    fn mode(&self, x: usize) -> usize {
        self.split(x).1
    }

    fn reset<R: Rng + ?Sized>(&self, start: StartDistribution, rng: &mut R) -> usize {
        let g = self.game();
        let ctrl: Vec<usize> = g.states_of(Owner::Controller).collect();
        let pool: &[usize] = if ctrl.is_empty() { &[g.initial()] } else { &ctrl };
        let s = pool[rng.random_range(0..pool.len())];
        match start {
            StartDistribution::UniformProduct => self.state(s, rng.random_range(0..self.num_modes())),
            StartDistribution::InitialDraOnly => self.enter(s, self.dra().initial()),
        }
    }

    fn step<R: Rng + ?Sized>(&self, x: usize, action: usize, rng: &mut R) -> usize {
        ProductGame::step(self, x, action, rng)
    }

    fn passive_action(&self, x: usize) -> Option<usize> {
        self.game().passive(self.split(x).0)
    }

    fn deviation_is_fatal(&self, x: usize, sink: &[bool]) -> bool {
        ProductGame::deviation_is_fatal(self, x, sink)
    }
}

/// State-action values, stored row-wise per product state.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    offsets: Vec<usize>,
    values: Vec<f64>,
    visits: Vec<u64>,
}

impl QTable {
    pub fn zeros<E: Environment>(env: &E) -> Self {
        let mut offsets = Vec::with_capacity(env.num_states() + 1);
        offsets.push(0);
        for x in 0..env.num_states() {
            offsets.push(offsets[x] + env.num_actions(x));
        }
        let total = *offsets.last().expect("non-empty");
        Self {
            offsets,
            values: vec![0.0; total],
            visits: vec![0; env.num_states()],
        }
    }

    pub fn from_parts(offsets: Vec<usize>, values: Vec<f64>, visits: Vec<u64>) -> Option<Self> {
        let ok = !offsets.is_empty()
            && offsets[0] == 0
            && offsets.windows(2).all(|w| w[0] <= w[1])
            && *offsets.last()? == values.len()
            && visits.len() + 1 == offsets.len();
        ok.then_some(Self {
            offsets,
            values,
            visits,
        })
    }

    pub fn num_states(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.values[self.offsets[x]..self.offsets[x + 1]]
    }

    pub fn get(&self, x: usize, a: usize) -> f64 {
        self.row(x)[a]
    }

    pub fn set(&mut self, x: usize, a: usize, v: f64) {
        let i = self.offsets[x] + a;
        self.values[i] = v;
    }

    /// Number of updates applied at state `x`.
    pub fn visits(&self, x: usize) -> u64 {
        self.visits[x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn max(&self, x: usize) -> f64 {
        self.row(x).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self, x: usize) -> f64 {
        self.row(x).iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Value of `x` for its owner: max for the controller, min for the
    /// attacker, the dummy action's value for chance.
    pub fn state_value(&self, x: usize, owner: Owner) -> f64 {
        match owner {
            Owner::Controller => self.max(x),
            Owner::Attacker => self.min(x),
            Owner::Chance => self.get(x, 0),
        }
    }
}

/// Lowest-index maximizer (controller) or minimizer (attacker).
pub(crate) fn greedy_index(row: &[f64], owner: Owner) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        let better = match owner {
            Owner::Attacker => v < row[best],
            _ => v > row[best],
        };
        if better {
            best = i;
        }
    }
    best
}

/// Minimax-Q for an automaton with a single acceptance pair.
pub fn minimax_q(pg: &ProductGame, cfg: &LearnConfig) -> Result<QTable, LearnError> {
    let k = pg.dra().pairs().len();
    if k != 1 {
        return Err(LearnError::MultiPair(k));
    }
    minimax_q_pair(pg, 0, cfg)
}

/// Minimax-Q with pair `pair` of the automaton designated.
pub fn minimax_q_pair(pg: &ProductGame, pair: usize, cfg: &LearnConfig) -> Result<QTable, LearnError> {
    let shaping = Shaping::new(pg.dra(), pair, &cfg.shaping(cfg.gamma))?;
    train(pg, &shaping, cfg, |_, _| {})
}

/// Upper bound on transitions per counted controller step.
pub const TRANSITIONS_PER_STEP: u64 = 4;

/// The learning loop. `observe` is called after every episode with the
/// episode index and the current table.
pub fn train<E: Environment>(
    env: &E,
    shaping: &Shaping,
    cfg: &LearnConfig,
    mut observe: impl FnMut(u64, &QTable),
) -> Result<QTable, LearnError> {
    cfg.validate()?;
    let mut q = QTable::zeros(env);
    let n = env.num_states();
    let sink: Vec<bool> = shaping.sink().to_vec();
    let in_sink = |x: usize| sink[env.mode(x)];
    let skip: Vec<bool> = if cfg.skip_detected_attacks {
        (0..n)
            .map(|x| env.owner(x) == Owner::Attacker && env.deviation_is_fatal(x, &sink))
            .collect()
    } else {
        Vec::new()
    };
    let skipped = |x: usize| cfg.skip_detected_attacks && skip[x];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut gamma_now = f64::NAN;
    let mut sh = shaping.clone();
    for e in 0..cfg.episodes {
        let g = cfg.gamma_at(e);
        if g != gamma_now {
            sh = shaping.with_gamma(&cfg.shaping(g))?;
            gamma_now = g;
        }
        let eps = cfg.epsilon.at(e, cfg.episodes);
        let alpha = cfg.alpha.at(e, cfg.episodes);
        let mut x = env.reset(cfg.start, &mut rng);
        for _ in 0..64 {
            if !in_sink(x) {
                break;
            }
            x = env.reset(cfg.start, &mut rng);
        }
        let mut turns = 0;
        // Guard for cycles without controller states; grid turns take three
        // transitions and never reach it.
        let mut budget = cfg.steps_per_episode.saturating_mul(TRANSITIONS_PER_STEP);
        while !in_sink(x) && budget > 0 {
            budget -= 1;
            let owner = env.owner(x);
            if owner == Owner::Controller {
                if turns == cfg.steps_per_episode {
                    break;
                }
                turns += 1;
            }
            let a = match owner {
                Owner::Chance => 0,
                Owner::Attacker if skipped(x) => env.passive_action(x).expect("passive action"),
                _ => {
                    if rng.random::<f64>() < eps {
                        rng.random_range(0..env.num_actions(x))
                    } else {
                        greedy_index(q.row(x), owner)
                    }
                }
            };
            let y = env.step(x, a, &mut rng);
            let u = if in_sink(y) {
                1.0
            } else {
                match env.owner(y) {
                    Owner::Attacker if skipped(y) => {
                        q.get(y, env.passive_action(y).expect("passive action"))
                    }
                    o => q.state_value(y, o),
                }
            };
            let m = env.mode(x);
            let target = sh.reward(m) + sh.discount(m) * u;
            let old = q.get(x, a);
            let new = (old + alpha * (target - old)).clamp(0.0, 1.0);
            q.set(x, a, new);
            q.visits[x] += 1;
            x = y;
        }
        observe(e, &q);
    }
    Ok(q)
}
