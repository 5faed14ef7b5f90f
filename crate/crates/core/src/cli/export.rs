//! Text artifacts: Q-table dumps, learning curves and figure CSVs.

use std::fmt::Write as _;

use super::CliError;
use crate::game::{GridGame, Owner};
use crate::learn::{FiniteMemoryStrategy, QTable};
use crate::product::ProductGame;

pub const QTABLE_HEADER: &str = "specgame-qtable v1";
pub const HEATMAP_HEADER: &str = "row,col,dra_mode,value";
pub const ARROWS_HEADER: &str = "row,col,dra_mode,controller_action,attacker_action";
pub const CURVE_HEADER: &str = "episode,initial_value";

/// One line per product state: `state visits q_0 q_1 ...` (values in
/// shortest round-trip decimal form).
pub fn write_qtable(q: &QTable) -> String {
    let mut out = format!("{QTABLE_HEADER}\nstates {}\n# state visits values...\n", q.num_states());
    for x in 0..q.num_states() {
        let _ = write!(out, "{x} {}", q.visits(x));
        for v in q.row(x) {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

pub fn read_qtable(text: &str) -> Result<QTable, CliError> {
    let bad = |n: usize, m: &str| CliError::Usage(format!("qtable line {n}: {m}"));
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, l)) if l == QTABLE_HEADER => {}
        _ => return Err(bad(1, "missing header")),
    }
    let n: usize = match lines.next() {
        Some((i, l)) => l
            .strip_prefix("states ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(i, "expected state count"))?,
        None => return Err(bad(2, "truncated")),
    };
    let mut offsets = vec![0];
    let mut values = Vec::new();
    let mut visits = Vec::with_capacity(n);
    for (i, l) in lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('#')) {
        let mut f = l.split_whitespace();
        let x: usize = f.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(i, "state"))?;
        if x != visits.len() {
            return Err(bad(i, "states out of order"));
        }
        visits.push(f.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(i, "visits"))?);
        for t in f {
            values.push(t.parse::<f64>().map_err(|_| bad(i, "value"))?);
        }
        offsets.push(values.len());
    }
    if visits.len() != n {
        return Err(bad(0, "state count mismatch"));
    }
    QTable::from_parts(offsets, values, visits).ok_or_else(|| bad(0, "inconsistent table"))
}

pub fn write_curve(points: &[(u64, f64)]) -> String {
    let mut out = format!("{CURVE_HEADER}\n");
    for (e, v) in points {
        let _ = writeln!(out, "{e},{v}");
    }
    out
}

/// Learned value of `x`: 1 in the winning sink, else the owner's backup of
/// the table.
pub fn learned_value(q: &QTable, pg: &ProductGame, sink: &[bool], x: usize) -> f64 {
    if sink[pg.split(x).1] {
        1.0
    } else {
        q.state_value(x, pg.owner(x))
    }
}

fn reachable_controller_states(pg: &ProductGame, gg: &GridGame) -> Vec<(usize, usize, usize, usize)> {
    let mut rows: Vec<(usize, usize, usize, usize)> = pg
        .reachable()
        .into_iter()
        .filter(|&x| pg.owner(x) == Owner::Controller)
        .map(|x| {
            let (s, m) = pg.split(x);
            let (r, c) = gg.cell_of(s);
            (r, c, m, x)
        })
        .collect();
    rows.sort_unstable();
    rows
}

/// Value per reachable (cell, automaton mode).
pub fn heatmap(q: &QTable, pg: &ProductGame, gg: &GridGame, sink: &[bool]) -> String {
    let mut out = format!("{HEATMAP_HEADER}\n");
    for (r, c, m, x) in reachable_controller_states(pg, gg) {
        let _ = writeln!(out, "{r},{c},{m},{}", learned_value(q, pg, sink, x));
    }
    out
}

/// Controller action per reachable (cell, mode) and the attacker's answer
/// to it.
pub fn arrows(
    pg: &ProductGame,
    gg: &GridGame,
    mu: &FiniteMemoryStrategy,
    nu: &FiniteMemoryStrategy,
) -> String {
    let g = pg.game();
    let mut out = format!("{ARROWS_HEADER}\n");
    for (r, c, m, x) in reachable_controller_states(pg, gg) {
        let (s, _) = pg.split(x);
        let Some(a) = mu.at_product(x) else { continue };
        let ctrl = &g.moves(s)[a].name;
        let (y, _) = pg.successors(x, a)[0];
        let att = nu
            .at_product(y)
            .map(|b| g.moves(pg.split(y).0)[b].name.as_str())
            .unwrap_or("-");
        let _ = writeln!(out, "{r},{c},{m},{ctrl},{att}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qtable_round_trip() {
        let q = QTable::from_parts(vec![0, 2, 3], vec![0.25, 1.0 / 3.0, 0.0], vec![4, 0]).unwrap();
        let text = write_qtable(&q);
        assert_eq!(read_qtable(&text).unwrap(), q);
        assert!(read_qtable("nope").is_err());
    }
}
