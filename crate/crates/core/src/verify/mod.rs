//! Model-based oracles: discounted minimax value iteration, exact
//! acceptance probabilities of induced Markov chains, brute-force maximin on
//! tiny games, and window-IDS statistics.

mod brute;
mod ids_stats;
mod linear;
mod markov;
mod value_iteration;

use crate::product::ProductError;

pub use brute::{brute_force_maximin, BruteLimits};
pub use ids_stats::{window_ids_analytics, IdsStats};
pub use linear::{solve_transient, DIRECT_LIMIT};
pub use markov::{induced_mc, induced_mc_from, rabin_sat_prob, rabin_sat_probs, MarkovChain};
pub use value_iteration::{best_response_value, policy_value, value_iteration, ValueMap};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("strategy undefined at reachable product state {0}")]
    Undefined(usize),
    #[error("{what}: {count} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        count: usize,
        limit: usize,
    },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Product(#[from] ProductError),
}
