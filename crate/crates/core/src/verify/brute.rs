use super::markov::{induced_mc, rabin_sat_prob};
use super::VerifyError;
use crate::game::Owner;
use crate::learn::FiniteMemoryStrategy;
use crate::product::ProductGame;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteLimits {
    /// Maximum number of product states reachable from the initial state.
    pub max_states: usize,
    /// Maximum number of strategy profiles enumerated.
    pub max_profiles: usize,
}

impl Default for BruteLimits {
    fn default() -> Self {
        Self {
            max_states: 30,
            max_profiles: 1 << 20,
        }
    }
}

// All assignments of one action per listed state, in odometer order.
fn assignments(states: &[usize], pg: &ProductGame) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &x in states {
        let k = pg.num_actions(x);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..k).map(move |a| {
                    let mut p = prefix.clone();
                    p.push(a);
                    p
                })
            })
            .collect();
    }
    out
}

fn strategy(pg: &ProductGame, owner: Owner, states: &[usize], acts: &[usize]) -> FiniteMemoryStrategy {
    let mut s = FiniteMemoryStrategy::new(owner, pg.num_modes(), pg.game().num_states(), pg.dra().initial());
    for (&x, &a) in states.iter().zip(acts) {
        let (st, m) = pg.split(x);
        s.set(m, st, a);
    }
    s
}

/// `max_μ min_ν Pr(acceptance)` over pure memoryless product strategies,
/// by exhaustive enumeration.
pub fn brute_force_maximin(pg: &ProductGame, limits: BruteLimits) -> Result<f64, VerifyError> {
    let reach = pg.reachable();
    if reach.len() > limits.max_states {
        return Err(VerifyError::TooLarge {
            what: "reachable product states",
            count: reach.len(),
            limit: limits.max_states,
        });
    }
    let of = |o| -> Vec<usize> { reach.iter().copied().filter(|&x| pg.owner(x) == o).collect() };
    let (ctrl, att) = (of(Owner::Controller), of(Owner::Attacker));
    let count = |xs: &[usize]| {
        xs.iter()
            .try_fold(1usize, |acc, &x| acc.checked_mul(pg.num_actions(x)))
            .unwrap_or(usize::MAX)
    };
    let profiles = count(&ctrl).saturating_mul(count(&att));
    if profiles > limits.max_profiles {
        return Err(VerifyError::TooLarge {
            what: "strategy profiles",
            count: profiles,
            limit: limits.max_profiles,
        });
    }
    let nus: Vec<FiniteMemoryStrategy> = assignments(&att, pg)
        .iter()
        .map(|a| strategy(pg, Owner::Attacker, &att, a))
        .collect();
    let pairs = pg.dra().pairs();
    let mut best = f64::NEG_INFINITY;
    for acts in assignments(&ctrl, pg) {
        let mu = strategy(pg, Owner::Controller, &ctrl, &acts);
        let mut worst = f64::INFINITY;
        for nu in &nus {
            let mc = induced_mc(pg, &mu, nu)?;
            worst = worst.min(rabin_sat_prob(&mc, pairs));
            if worst <= best {
                break;
            }
        }
        best = best.max(worst);
    }
    Ok(best)
}
