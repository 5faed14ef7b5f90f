//! Finite-memory strategies whose modes are automaton states.

use std::fmt::Write as _;

use super::{greedy_index, QTable};
use crate::game::Owner;
use crate::product::ProductGame;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("strategy document line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A strategy for one player: in mode `m` at owned game state `s`, play
/// `α(m, s)`. Modes follow the automaton of the product the strategy was
/// extracted from, starting in `initial_mode`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMemoryStrategy {
    owner: Owner,
    num_modes: usize,
    num_states: usize,
    initial_mode: usize,
    choice: Vec<Option<usize>>,
}

impl FiniteMemoryStrategy {
    pub fn new(owner: Owner, num_modes: usize, num_states: usize, initial_mode: usize) -> Self {
        Self {
            owner,
            num_modes,
            num_states,
            initial_mode,
            choice: vec![None; num_modes * num_states],
        }
    }

    pub fn owner(&self) -> Owner {
        self.owner
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn initial_mode(&self) -> usize {
        self.initial_mode
    }

    pub fn action(&self, mode: usize, s: usize) -> Option<usize> {
        self.choice[s * self.num_modes + mode]
    }

    /// Action at product state `x` (numbered `s * modes + mode`).
    pub fn at_product(&self, x: usize) -> Option<usize> {
        self.choice[x]
    }

    pub fn set(&mut self, mode: usize, s: usize, action: usize) {
        self.choice[s * self.num_modes + mode] = Some(action);
    }

    /// Dense, unambiguous text form: header lines followed by one
    /// `state mode action` record per defined entry.
    pub fn to_text(&self) -> String {
        let mut out = String::from("specgame-strategy v1\n");
        let owner = match self.owner {
            Owner::Controller => "controller",
            Owner::Attacker => "attacker",
            Owner::Chance => "chance",
        };
        let _ = writeln!(out, "owner {owner}");
        let _ = writeln!(out, "modes {}", self.num_modes);
        let _ = writeln!(out, "states {}", self.num_states);
        let _ = writeln!(out, "initial-mode {}", self.initial_mode);
        out.push_str("# state mode action\n");
        for (x, c) in self.choice.iter().enumerate() {
            if let Some(a) = c {
                let _ = writeln!(out, "{} {} {a}", x / self.num_modes, x % self.num_modes);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, StrategyError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let err = |line, msg: &str| StrategyError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut next_header = |key: &str| -> Result<(usize, String), StrategyError> {
            let (n, l) = lines.next().ok_or_else(|| err(0, "truncated header"))?;
            let v = l
                .strip_prefix(key)
                .ok_or_else(|| err(n, &format!("expected {key}")))?;
            Ok((n, v.trim().to_string()))
        };
        let (n, v) = next_header("specgame-strategy")?;
        if v != "v1" {
            return Err(err(n, "unsupported version"));
        }
        let (n, owner) = next_header("owner")?;
        let owner = match owner.as_str() {
            "controller" => Owner::Controller,
            "attacker" => Owner::Attacker,
            "chance" => Owner::Chance,
            _ => return Err(err(n, "unknown owner")),
        };
        let mut num = |key: &str| -> Result<usize, StrategyError> {
            let (n, v) = next_header(key)?;
            v.parse().map_err(|_| err(n, "expected integer"))
        };
        let modes = num("modes")?;
        let states = num("states")?;
        let initial = num("initial-mode")?;
        if modes == 0 || initial >= modes {
            return Err(err(0, "bad mode count"));
        }
        let mut s = Self::new(owner, modes, states, initial);
        for (n, l) in lines {
            let f: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| err(n, "expected integers")))
                .collect::<Result<_, _>>()?;
            match f[..] {
                [st, m, a] if st < states && m < modes => s.set(m, st, a),
                _ => return Err(err(n, "bad record")),
            }
        }
        Ok(s)
    }
}

fn greedy(q: &QTable, pg: &ProductGame, owner: Owner) -> FiniteMemoryStrategy {
    let g = pg.game();
    let mut s = FiniteMemoryStrategy::new(owner, pg.num_modes(), g.num_states(), pg.dra().initial());
    for x in 0..pg.num_states() {
        if pg.owner(x) == owner {
            let (st, m) = pg.split(x);
            s.set(m, st, greedy_index(q.row(x), owner));
        }
    }
    s
}

/// Argmax of the table at every controller product state (lowest index on
/// ties).
pub fn greedy_controller(q: &QTable, pg: &ProductGame) -> FiniteMemoryStrategy {
    greedy(q, pg, Owner::Controller)
}

/// Argmin of the table at every attacker product state (lowest index on
/// ties).
pub fn greedy_attacker(q: &QTable, pg: &ProductGame) -> FiniteMemoryStrategy {
    greedy(q, pg, Owner::Attacker)
}

/// Reachable product states of `owner` that training never updated; the
/// greedy strategies fall back to the first action there.
pub fn uncovered_states(q: &QTable, pg: &ProductGame, owner: Owner) -> Vec<usize> {
    let mut v: Vec<usize> = pg
        .reachable()
        .into_iter()
        .filter(|&x| pg.owner(x) == owner && q.visits(x) == 0)
        .collect();
    v.sort_unstable();
    v
}
