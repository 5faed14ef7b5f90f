//! Random instances shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, RngCore};
use specgame::automata::{translate_reachability, Dra, LabelSet, RabinPair};
use specgame::game::{Move, Outcome, Owner, StateSpec, StochasticGame};
use specgame::ltl::{Formula, LassoWord};
use specgame::product::{LabelTiming, ProductGame};

pub fn atoms(n: usize) -> Vec<String> {
    ["p", "q", "r", "s"][..n].iter().map(|s| s.to_string()).collect()
}

/// Formula of the reachability fragment (literals, `&`, `|`, `X`, `F`,
/// `F<=k`) of depth at most `depth`.
pub fn fragment_formula<R: Rng>(rng: &mut R, depth: u32, ap: &[String]) -> Formula {
    let literal = |rng: &mut R| {
        let a = Formula::atom(ap[rng.random_range(0..ap.len())].clone());
        match rng.random_range(0..5) {
            0 => Formula::not(a),
            1 => Formula::True,
            _ => a,
        }
    };
    if depth == 0 {
        return literal(rng);
    }
    let sub = |rng: &mut R| fragment_formula(rng, depth - 1, ap);
    match rng.random_range(0..7) {
        0 => literal(rng),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::next(sub(rng)),
        4 => Formula::eventually(sub(rng)),
        _ => Formula::bounded(rng.random_range(0..4), sub(rng)),
    }
}

/// Arbitrary formula over every connective.
pub fn full_formula<R: Rng>(rng: &mut R, depth: u32, ap: &[String]) -> Formula {
    if depth == 0 {
        return match rng.random_range(0..6) {
            0 => Formula::True,
            1 => Formula::falsum(),
            _ => Formula::atom(ap[rng.random_range(0..ap.len())].clone()),
        };
    }
    let sub = |rng: &mut R| full_formula(rng, depth - 1, ap);
    match rng.random_range(0..10) {
        0 => full_formula(rng, 0, ap),
        1 => Formula::not(sub(rng)),
        2 => Formula::and(sub(rng), sub(rng)),
        3 => Formula::or(sub(rng), sub(rng)),
        4 => Formula::next(sub(rng)),
        5 => Formula::until(sub(rng), sub(rng)),
        6 => Formula::always(sub(rng)),
        7 => Formula::eventually(sub(rng)),
        _ => Formula::bounded(rng.random_range(0..4), sub(rng)),
    }
}

pub fn letter<R: Rng>(rng: &mut R, ap: &[String]) -> BTreeSet<String> {
    ap.iter().filter(|_| rng.random_bool(0.5)).cloned().collect()
}

pub fn lasso<R: Rng>(rng: &mut R, ap: &[String], max_stem: usize, max_cycle: usize) -> LassoWord {
    let stem = (0..rng.random_range(0..=max_stem)).map(|_| letter(rng, ap)).collect();
    let cycle = (0..rng.random_range(1..=max_cycle)).map(|_| letter(rng, ap)).collect();
    LassoWord::new(stem, cycle).expect("non-empty cycle")
}

/// Complete deterministic automaton with random transitions and `pairs`
/// random Rabin pairs with disjoint sets.
pub fn random_dra<R: Rng>(rng: &mut R, ap: &[String], states: usize, pairs: usize) -> Dra {
    let width = 1usize << ap.len();
    let delta = (0..states)
        .map(|_| (0..width).map(|_| rng.random_range(0..states)).collect())
        .collect();
    let pairs = (0..pairs)
        .map(|_| {
            let mut fin = Vec::new();
            let mut inf = Vec::new();
            for q in 0..states {
                match rng.random_range(0..3) {
                    0 => fin.push(q),
                    1 => inf.push(q),
                    _ => {}
                }
            }
            RabinPair::new(fin, inf)
        })
        .collect();
    Dra::new(ap.to_vec(), delta, 0, pairs).expect("well-formed")
}

fn random_label<R: Rng>(rng: &mut R, ap: usize) -> LabelSet {
    LabelSet(rng.random_range(0..1u32 << ap))
}

/// Random game with `n` states. State 0 is a controller state; every other
/// state's owner is drawn at random. Controller and attacker states get one
/// to `max_moves` deterministic moves, chance states one move with one to
/// three outcomes.
pub fn random_game<R: Rng>(rng: &mut R, ap: &[String], n: usize, max_moves: usize) -> StochasticGame {
    let states = (0..n)
        .map(|s| {
            let owner = if s == 0 {
                Owner::Controller
            } else {
                [Owner::Controller, Owner::Attacker, Owner::Chance][rng.random_range(0..3)]
            };
            let moves = match owner {
                Owner::Chance => {
                    let k = rng.random_range(1..=3);
                    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
                    let total: f64 = w.iter().sum();
                    let mut outcomes: Vec<Outcome> = Vec::new();
                    for wi in w {
                        let target = rng.random_range(0..n);
                        let event = if rng.random_bool(0.3) {
                            random_label(rng, ap.len())
                        } else {
                            LabelSet::EMPTY
                        };
                        outcomes.push(Outcome {
                            target,
                            prob: wi / total,
                            event,
                        });
                    }
                    // Exact normalisation on the last entry.
                    let head: f64 = outcomes[..outcomes.len() - 1].iter().map(|o| o.prob).sum();
                    outcomes.last_mut().expect("non-empty").prob = 1.0 - head;
                    vec![Move {
                        name: "dummy".into(),
                        outcomes,
                    }]
                }
                _ => (0..rng.random_range(1..=max_moves))
                    .map(|m| Move::det(format!("m{m}"), rng.random_range(0..n)))
                    .collect(),
            };
            StateSpec {
                owner,
                label: random_label(rng, ap.len()),
                moves,
                passive: None,
            }
        })
        .collect();
    StochasticGame::new(ap.to_vec(), states, 0).expect("well-formed")
}

/// Single-pair product with at most `max_states` product states. The
/// automaton is either the translation of a random fragment formula or a
/// random Rabin automaton.
pub fn small_product<R: Rng>(rng: &mut R, max_states: usize, timing: LabelTiming) -> ProductGame {
    loop {
        let ap = atoms(rng.random_range(1..=2));
        let dra = if rng.random_bool(0.5) {
            match translate_reachability(&fragment_formula(rng, 2, &ap))
                .ok()
                .and_then(|d| d.reindex(&ap).ok())
            {
                Some(d) => d,
                None => continue,
            }
        } else {
            let k = rng.random_range(2..=3);
            random_dra(rng, &ap, k, 1)
        };
        let nq = dra.num_states();
        if nq > max_states {
            continue;
        }
        let n = rng.random_range(2..=(max_states / nq).max(2).min(8));
        if n * nq > max_states {
            continue;
        }
        let g = random_game(rng, &ap, n, 2);
        return ProductGame::new(g, dra, timing).expect("matching alphabet");
    }
}

pub fn seeded(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

pub fn next_seed<R: RngCore>(rng: &mut R) -> u64 {
    rng.next_u64()
}
