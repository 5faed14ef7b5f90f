use std::collections::{HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::linear::solve_transient;
use super::VerifyError;
use crate::automata::RabinPair;
use crate::game::Owner;
use crate::learn::FiniteMemoryStrategy;
use crate::product::ProductGame;

/// A finite Markov chain whose states carry the automaton state they
/// project to (acceptance is decided on that coordinate).
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    pub rows: Vec<Vec<(usize, f64)>>,
    pub initial: usize,
    /// Automaton state of each chain state.
    pub mode: Vec<usize>,
    /// Product state each chain state came from (identity for hand-built
    /// chains).
    pub origin: Vec<usize>,
}

impl MarkovChain {
    pub fn new(rows: Vec<Vec<(usize, f64)>>, initial: usize, mode: Vec<usize>) -> Self {
        let origin = (0..rows.len()).collect();
        Self {
            rows,
            initial,
            mode,
            origin,
        }
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    /// Probability of being in each state after `k` steps from the initial
    /// state.
    pub fn distribution_after(&self, k: usize) -> Vec<f64> {
        let mut d = vec![0.0; self.rows.len()];
        d[self.initial] = 1.0;
        for _ in 0..k {
            let mut nd = vec![0.0; d.len()];
            for (i, &p) in d.iter().enumerate() {
                for &(j, q) in &self.rows[i] {
                    nd[j] += p * q;
                }
            }
            d = nd;
        }
        d
    }
}

/// [`induced_mc_from`] the product's initial state.
pub fn induced_mc(
    pg: &ProductGame,
    mu: &FiniteMemoryStrategy,
    nu: &FiniteMemoryStrategy,
) -> Result<MarkovChain, VerifyError> {
    induced_mc_from(pg, pg.initial(), mu, nu)
}

/// Chain over the product states reachable from `start` when the
/// controller follows `mu` and the attacker `nu`.
pub fn induced_mc_from(
    pg: &ProductGame,
    start: usize,
    mu: &FiniteMemoryStrategy,
    nu: &FiniteMemoryStrategy,
) -> Result<MarkovChain, VerifyError> {
    let mut index: HashMap<usize, usize> = HashMap::from([(start, 0)]);
    let mut origin = vec![start];
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        let a = match pg.owner(x) {
            Owner::Chance => 0,
            Owner::Controller => mu.at_product(x).ok_or(VerifyError::Undefined(x))?,
            Owner::Attacker => nu.at_product(x).ok_or(VerifyError::Undefined(x))?,
        };
        if a >= pg.num_actions(x) {
            return Err(VerifyError::Undefined(x));
        }
        let mut row: Vec<(usize, f64)> = Vec::new();
        for (y, p) in pg.successors(x, a) {
            let id = *index.entry(y).or_insert_with(|| {
                origin.push(y);
                queue.push_back(y);
                origin.len() - 1
            });
            match row.iter_mut().find(|(j, _)| *j == id) {
                Some(e) => e.1 += p,
                None => row.push((id, p)),
            }
        }
        rows.push(row);
    }
    let mode = origin.iter().map(|&x| pg.split(x).1).collect();
    Ok(MarkovChain {
        rows,
        initial: 0,
        mode,
        origin,
    })
}

/// Probability, from every chain state, of ending in a bottom SCC that
/// satisfies some pair.
pub fn rabin_sat_probs(mc: &MarkovChain, pairs: &[RabinPair]) -> Vec<f64> {
    let n = mc.num_states();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, n);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for (i, row) in mc.rows.iter().enumerate() {
        for &(j, p) in row {
            if p > 0.0 {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let sccs = tarjan_scc(&graph);
    let mut comp = vec![0; n];
    for (c, scc) in sccs.iter().enumerate() {
        for v in scc {
            comp[v.index()] = c;
        }
    }
    let mut accepting = vec![false; n];
    for (c, scc) in sccs.iter().enumerate() {
        let members: Vec<usize> = scc.iter().map(|v| v.index()).collect();
        let bottom = members
            .iter()
            .all(|&i| mc.rows[i].iter().all(|&(j, p)| p == 0.0 || comp[j] == c));
        if !bottom {
            continue;
        }
        let good = pairs.iter().any(|pair| {
            members.iter().all(|&i| !pair.fin.contains(&mc.mode[i]))
                && members.iter().any(|&i| pair.inf.contains(&mc.mode[i]))
        });
        if good {
            for &i in &members {
                accepting[i] = true;
            }
        }
    }
    // States that can reach an accepting bottom SCC.
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, row) in mc.rows.iter().enumerate() {
        for &(j, p) in row {
            if p > 0.0 {
                preds[j].push(i);
            }
        }
    }
    let mut live = accepting.clone();
    let mut stack: Vec<usize> = (0..n).filter(|&i| accepting[i]).collect();
    while let Some(j) = stack.pop() {
        for &i in &preds[j] {
            if !live[i] {
                live[i] = true;
                stack.push(i);
            }
        }
    }
    let unknown: Vec<usize> = (0..n).filter(|&i| live[i] && !accepting[i]).collect();
    let mut pos = vec![usize::MAX; n];
    for (k, &i) in unknown.iter().enumerate() {
        pos[i] = k;
    }
    let mut b = vec![0.0; unknown.len()];
    let rows: Vec<Vec<(usize, f64)>> = unknown
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let mut r = Vec::new();
            for &(j, p) in &mc.rows[i] {
                if accepting[j] {
                    b[k] += p;
                } else if pos[j] != usize::MAX {
                    r.push((pos[j], p));
                }
            }
            r
        })
        .collect();
    let x = solve_transient(&rows, &b);
    (0..n)
        .map(|i| {
            if accepting[i] {
                1.0
            } else if pos[i] != usize::MAX {
                x[pos[i]].clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect()
}

/// Acceptance probability from the chain's initial state.
pub fn rabin_sat_prob(mc: &MarkovChain, pairs: &[RabinPair]) -> f64 {
    rabin_sat_probs(mc, pairs)[mc.initial]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepting_self_loop() {
        let mc = MarkovChain::new(vec![vec![(0, 1.0)]], 0, vec![0]);
        assert_eq!(rabin_sat_prob(&mc, &[RabinPair::new([], [0])]), 1.0);
    }

    #[test]
    fn split_into_two_sinks() {
        let mc = MarkovChain::new(
            vec![vec![(1, 0.64), (2, 0.36)], vec![(1, 1.0)], vec![(2, 1.0)]],
            0,
            vec![0, 1, 2],
        );
        let p = rabin_sat_prob(&mc, &[RabinPair::new([], [1])]);
        assert!((p - 0.64).abs() < 1e-12);
    }

    #[test]
    fn bscc_hitting_fin_rejects() {
        let mc = MarkovChain::new(
            vec![vec![(1, 1.0)], vec![(0, 1.0)]],
            0,
            vec![0, 1],
        );
        let pairs = [RabinPair::new([1], [0]), RabinPair::new([0], [1])];
        assert_eq!(rabin_sat_prob(&mc, &pairs), 0.0);
    }

    #[test]
    fn transient_loop_then_choice() {
        // 0 loops w.p. 0.5, else 1 (accepting) or 2 (rejecting) evenly.
        let mc = MarkovChain::new(
            vec![vec![(0, 0.5), (1, 0.25), (2, 0.25)], vec![(1, 1.0)], vec![(2, 1.0)]],
            0,
            vec![0, 1, 2],
        );
        let p = rabin_sat_prob(&mc, &[RabinPair::new([], [1])]);
        assert!((p - 0.5).abs() < 1e-12);
    }
}
