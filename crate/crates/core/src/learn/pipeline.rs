//! Translate → product → learn → greedy extraction.

use super::{
    greedy_attacker, greedy_controller, train, FiniteMemoryStrategy, LearnConfig, LearnError, QTable,
};
use crate::automata::{dra_union, dra_union_cosafety, parse_hoa, translate_reachability, Dra};
use crate::game::{Owner, StochasticGame};
use crate::ltl::Formula;
use crate::product::{ProductGame, Shaping};

/// Source of the controller's winning condition.
#[derive(Debug, Clone)]
pub enum WinningCondition {
    /// Formula of the reachability fragment, translated natively.
    Ltl(Formula),
    /// HOA document.
    Hoa(String),
    /// Disjunction of a fragment formula (typically the IDS trigger) with a
    /// task automaton in HOA form.
    Union { ids: Formula, task_hoa: String },
    Dra(Dra),
}

/// Resolves the winning condition to a single automaton. A co-safety left
/// operand is merged into the task's pairs, keeping their number.
pub fn resolve_winning(w: &WinningCondition) -> Result<Dra, LearnError> {
    Ok(match w {
        WinningCondition::Ltl(f) => translate_reachability(f)?,
        WinningCondition::Hoa(text) => parse_hoa(text)?,
        WinningCondition::Union { ids, task_hoa } => {
            let a = translate_reachability(ids)?;
            let b = parse_hoa(task_hoa)?;
            if a.is_cosafety() {
                dra_union_cosafety(&a, &b)?
            } else {
                dra_union(&a, &b)?
            }
        }
        WinningCondition::Dra(d) => d.clone(),
    })
}

#[derive(Debug, Clone)]
pub struct MultiPairOutcome {
    pub pair: usize,
    pub controller: FiniteMemoryStrategy,
    pub attacker: FiniteMemoryStrategy,
    /// Learned initial-state value per pair.
    pub values: Vec<f64>,
    pub tables: Vec<QTable>,
}

/// Learned value of `x` under pair `pair`: 1 in its winning sink, else the
/// owner's backup of the table.
pub fn sink_value(pg: &ProductGame, pair: usize, q: &QTable, x: usize) -> f64 {
    let sink = pg.dra().winning_sink(pair);
    if sink.contains(&pg.split(x).1) {
        1.0
    } else {
        q.state_value(x, pg.owner(x))
    }
}

/// Learns once per acceptance pair and keeps the pair with the highest
/// learned initial-state value (lowest index on ties). Each value is a lower
/// bound on what the controller can guarantee.
pub fn multi_pair_learn(pg: &ProductGame, cfg: &LearnConfig) -> Result<MultiPairOutcome, LearnError> {
    multi_pair_learn_observed(pg, cfg, |_, _, _| {})
}

/// [`multi_pair_learn`] reporting `(pair, episode, table)` after every
/// episode.
pub fn multi_pair_learn_observed(
    pg: &ProductGame,
    cfg: &LearnConfig,
    mut observe: impl FnMut(usize, u64, &QTable),
) -> Result<MultiPairOutcome, LearnError> {
    let k = pg.dra().pairs().len();
    let mut tables = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    for i in 0..k {
        let shaping = Shaping::new(pg.dra(), i, &cfg.shaping(cfg.gamma))?;
        let q = train(pg, &shaping, cfg, |e, q| observe(i, e, q))?;
        values.push(sink_value(pg, i, &q, pg.initial()));
        tables.push(q);
    }
    let mut pair = 0;
    for i in 1..k {
        if values[i] > values[pair] {
            pair = i;
        }
    }
    Ok(MultiPairOutcome {
        pair,
        controller: greedy_controller(&tables[pair], pg),
        attacker: greedy_attacker(&tables[pair], pg),
        values,
        tables,
    })
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub product: ProductGame,
    pub pair: usize,
    pub qtable: QTable,
    pub controller: FiniteMemoryStrategy,
    pub attacker: FiniteMemoryStrategy,
    pub values: Vec<f64>,
}

impl Synthesis {
    pub fn initial_value(&self) -> f64 {
        self.values[self.pair]
    }
}

/// Widens the automaton's alphabet to include every game proposition.
pub fn align_alphabet(dra: &Dra, g: &StochasticGame) -> Result<Dra, LearnError> {
    let mut ap = dra.ap().to_vec();
    for p in g.ap() {
        if !ap.contains(p) {
            ap.push(p.clone());
        }
    }
    Ok(dra.reindex(&ap)?)
}

/// The full synthesis pipeline; returns the product it learned on together
/// with the extracted strategies.
pub fn algorithm1(
    phi_win: &WinningCondition,
    g: &StochasticGame,
    cfg: &LearnConfig,
) -> Result<Synthesis, LearnError> {
    cfg.validate()?;
    let dra = align_alphabet(&resolve_winning(phi_win)?, g)?;
    let product = ProductGame::new(g.clone(), dra, cfg.timing)?;
    let mp = multi_pair_learn(&product, cfg)?;
    debug_assert_eq!(mp.controller.owner(), Owner::Controller);
    let qtable = mp.tables[mp.pair].clone();
    Ok(Synthesis {
        pair: mp.pair,
        qtable,
        controller: mp.controller,
        attacker: mp.attacker,
        values: mp.values,
        product,
    })
}
