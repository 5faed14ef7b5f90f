use super::VerifyError;
use crate::game::Owner;
use crate::learn::FiniteMemoryStrategy;
use crate::product::{ProductGame, Shaping, ShapingParams};

/// Values per product state, with the sup-norm change of every sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueMap {
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl ValueMap {
    pub fn get(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn sweeps(&self) -> usize {
        self.residuals.len()
    }
}

// Successor lists in compressed form: action rows per state, outcome
// entries per action row.
struct Model {
    state_rows: Vec<usize>,
    row_entries: Vec<usize>,
    entries: Vec<(usize, f64)>,
}

impl Model {
    fn new(pg: &ProductGame) -> Self {
        let mut state_rows = vec![0];
        let mut row_entries = vec![0];
        let mut entries = Vec::new();
        for x in 0..pg.num_states() {
            for m in 0..pg.num_actions(x) {
                entries.extend(pg.successors(x, m));
                row_entries.push(entries.len());
            }
            state_rows.push(row_entries.len() - 1);
        }
        Self {
            state_rows,
            row_entries,
            entries,
        }
    }

    fn expect(&self, x: usize, m: usize, v: &[f64]) -> f64 {
        let r = self.state_rows[x] + m;
        self.entries[self.row_entries[r]..self.row_entries[r + 1]]
            .iter()
            .map(|&(y, p)| p * v[y])
            .sum()
    }
}

fn check_defined(
    pg: &ProductGame,
    strategies: &[&FiniteMemoryStrategy],
) -> Result<(), VerifyError> {
    // Reachability under the fixed choices, all actions elsewhere.
    let mut seen = vec![false; pg.num_states()];
    let start = pg.initial();
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        let owner = pg.owner(x);
        let fixed = strategies.iter().find(|s| s.owner() == owner);
        let actions: Vec<usize> = match fixed {
            Some(s) => match s.at_product(x) {
                Some(a) if a < pg.num_actions(x) => vec![a],
                _ => return Err(VerifyError::Undefined(x)),
            },
            None => (0..pg.num_actions(x)).collect(),
        };
        for a in actions {
            for (y, _) in pg.successors(x, a) {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    Ok(())
}

fn iterate(
    pg: &ProductGame,
    pair: usize,
    params: &ShapingParams,
    tol: f64,
    fixed: &[&FiniteMemoryStrategy],
) -> Result<ValueMap, VerifyError> {
    if !(tol > 0.0) {
        return Err(VerifyError::Tolerance(tol));
    }
    let shaping = Shaping::new(pg.dra(), pair, params)?;
    check_defined(pg, fixed)?;
    let model = Model::new(pg);
    let n = pg.num_states();
    let info: Vec<(Owner, usize, bool)> = (0..n)
        .map(|x| {
            let q = pg.split(x).1;
            (pg.owner(x), q, shaping.sink()[q])
        })
        .collect();
    let choice: Vec<Option<usize>> = (0..n)
        .map(|x| {
            fixed
                .iter()
                .find(|s| s.owner() == info[x].0)
                .and_then(|s| s.at_product(x))
                .filter(|&a| a < pg.num_actions(x))
        })
        .collect();
    let mut v: Vec<f64> = info.iter().map(|i| if i.2 { 1.0 } else { 0.0 }).collect();
    let mut next = v.clone();
    let mut residuals = Vec::new();
    loop {
        let mut delta: f64 = 0.0;
        for x in 0..n {
            let (owner, q, sink) = info[x];
            if sink {
                continue;
            }
            let op = match (owner, choice[x]) {
                (Owner::Chance, _) => model.expect(x, 0, &v),
                (_, Some(a)) => model.expect(x, a, &v),
                (Owner::Controller, None) => (0..pg.num_actions(x))
                    .map(|m| model.expect(x, m, &v))
                    .fold(f64::NEG_INFINITY, f64::max),
                (Owner::Attacker, None) => (0..pg.num_actions(x))
                    .map(|m| model.expect(x, m, &v))
                    .fold(f64::INFINITY, f64::min),
            };
            let nv = (shaping.reward(q) + shaping.discount(q) * op).clamp(0.0, 1.0);
            delta = delta.max((nv - v[x]).abs());
            next[x] = nv;
        }
        std::mem::swap(&mut v, &mut next);
        residuals.push(delta);
        if delta < tol {
            return Ok(ValueMap { values: v, residuals });
        }
    }
}

/// Optimal discounted values of the shaped game.
pub fn value_iteration(
    pg: &ProductGame,
    pair: usize,
    params: &ShapingParams,
    tol: f64,
) -> Result<ValueMap, VerifyError> {
    iterate(pg, pair, params, tol, &[])
}

/// Values with the controller frozen to `fixed_mu` and the attacker
/// minimizing.
pub fn best_response_value(
    pg: &ProductGame,
    pair: usize,
    params: &ShapingParams,
    fixed_mu: &FiniteMemoryStrategy,
    tol: f64,
) -> Result<ValueMap, VerifyError> {
    iterate(pg, pair, params, tol, &[fixed_mu])
}

/// Discounted values when both players are fixed.
pub fn policy_value(
    pg: &ProductGame,
    pair: usize,
    params: &ShapingParams,
    mu: &FiniteMemoryStrategy,
    nu: &FiniteMemoryStrategy,
    tol: f64,
) -> Result<ValueMap, VerifyError> {
    iterate(pg, pair, params, tol, &[mu, nu])
}
