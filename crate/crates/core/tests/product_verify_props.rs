mod common;

use common::{atoms, random_dra, random_game, seeded, small_product};
use rand::Rng;
use specgame::automata::LabelSet;
use specgame::game::{Move, Owner, StateSpec, StochasticGame};
use specgame::learn::FiniteMemoryStrategy;
use specgame::product::{LabelTiming, ProductError, ProductGame, Shaping, ShapingParams};
use specgame::verify::{
    best_response_value, induced_mc, policy_value, rabin_sat_prob, solve_transient, value_iteration,
    window_ids_analytics, DIRECT_LIMIT,
};

fn random_strategy<R: Rng>(rng: &mut R, pg: &ProductGame, owner: Owner) -> FiniteMemoryStrategy {
    let mut s = FiniteMemoryStrategy::new(owner, pg.num_modes(), pg.game().num_states(), pg.dra().initial());
    for x in 0..pg.num_states() {
        if pg.owner(x) == owner {
            let (st, q) = pg.split(x);
            s.set(q, st, rng.random_range(0..pg.num_actions(x)));
        }
    }
    s
}

fn expect(pg: &ProductGame, x: usize, m: usize, v: &[f64]) -> f64 {
    pg.successors(x, m).iter().map(|&(y, p)| p * v[y]).sum()
}

// Greedy strategy of `owner` with respect to the values `v`.
fn greedy(pg: &ProductGame, owner: Owner, v: &[f64]) -> FiniteMemoryStrategy {
    let mut s = FiniteMemoryStrategy::new(owner, pg.num_modes(), pg.game().num_states(), pg.dra().initial());
    for x in 0..pg.num_states() {
        if pg.owner(x) != owner {
            continue;
        }
        let mut best = 0;
        for m in 1..pg.num_actions(x) {
            let (a, b) = (expect(pg, x, m, v), expect(pg, x, best, v));
            if (owner == Owner::Controller && a > b) || (owner == Owner::Attacker && a < b) {
                best = m;
            }
        }
        let (st, q) = pg.split(x);
        s.set(q, st, best);
    }
    s
}

#[test]
fn product_rejects_unknown_propositions() {
    let ap = vec!["p".to_string(), "z".to_string()];
    let mut rng = seeded(1);
    let g = random_game(&mut rng, &ap, 3, 2);
    let dra = random_dra(&mut rng, &atoms(1), 2, 1);
    let err = ProductGame::new(g, dra, LabelTiming::PerTurn).unwrap_err();
    assert_eq!(err, ProductError::ApMismatch("z".into()));
}

#[test]
fn product_successors_are_distributions() {
    let mut rng = seeded(2);
    for timing in [LabelTiming::PerTurn, LabelTiming::PerEvent, LabelTiming::OnLeave] {
        for _ in 0..50 {
            let pg = small_product(&mut rng, 40, timing);
            assert_eq!(pg.num_states(), pg.game().num_states() * pg.num_modes());
            for x in 0..pg.num_states() {
                let (s, q) = pg.split(x);
                assert_eq!(pg.state(s, q), x);
                for m in 0..pg.num_actions(x) {
                    let succ = pg.successors(x, m);
                    let total: f64 = succ.iter().map(|p| p.1).sum();
                    assert!((total - 1.0).abs() < 1e-12);
                    for (y, _) in succ {
                        assert!(y < pg.num_states());
                        // Only chance transitions advance the automaton per turn.
                        if timing != LabelTiming::OnLeave && pg.owner(x) != Owner::Chance {
                            assert_eq!(pg.split(y).1, q);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn on_leave_reads_the_left_state_label() {
    let mut rng = seeded(3);
    for _ in 0..50 {
        let pg = small_product(&mut rng, 40, LabelTiming::OnLeave);
        let g = pg.game();
        assert_eq!(pg.initial(), pg.state(g.initial(), pg.dra().initial()));
        for x in 0..pg.num_states() {
            let (s, q) = pg.split(x);
            for (m, mv) in g.moves(s).iter().enumerate() {
                for (o, &(y, _)) in mv.outcomes.iter().zip(&pg.successors(x, m)) {
                    let want = pg.dra().step(q, pg.letter(g.label(s).union(o.event)));
                    assert_eq!(y, pg.state(o.target, want));
                }
            }
        }
    }
}

#[test]
fn value_iteration_residuals_contract() {
    let mut rng = seeded(4);
    for _ in 0..40 {
        let pg = small_product(&mut rng, 40, LabelTiming::OnLeave);
        let params = ShapingParams::with_gamma(rng.random_range(0.5..0.99));
        let d = Shaping::new(pg.dra(), 0, &params).unwrap().max_discount();
        let vm = value_iteration(&pg, 0, &params, 1e-12).unwrap();
        assert!(vm.values.iter().all(|v| (0.0..=1.0).contains(v)));
        for w in vm.residuals.windows(2) {
            assert!(w[1] <= d * w[0] * (1.0 + 1e-9) + 1e-15, "{} > {} * {}", w[1], d, w[0]);
        }
    }
}

#[test]
fn greedy_strategies_form_a_saddle_point() {
    let mut rng = seeded(5);
    let tol = 1e-12;
    let slack = 1e-6;
    for _ in 0..30 {
        let pg = small_product(&mut rng, 40, LabelTiming::OnLeave);
        let params = ShapingParams::with_gamma(0.9);
        let v = value_iteration(&pg, 0, &params, tol).unwrap().values;
        let mu_star = greedy(&pg, Owner::Controller, &v);
        let nu_star = greedy(&pg, Owner::Attacker, &v);
        let x0 = pg.initial();
        let br = best_response_value(&pg, 0, &params, &mu_star, tol).unwrap();
        assert!((br.get(x0) - v[x0]).abs() < slack);
        for _ in 0..5 {
            let mu = random_strategy(&mut rng, &pg, Owner::Controller);
            let nu = random_strategy(&mut rng, &pg, Owner::Attacker);
            let lo = policy_value(&pg, 0, &params, &mu, &nu_star, tol).unwrap().get(x0);
            let hi = policy_value(&pg, 0, &params, &mu_star, &nu, tol).unwrap().get(x0);
            assert!(lo <= v[x0] + slack, "{lo} > {}", v[x0]);
            assert!(hi >= v[x0] - slack, "{hi} < {}", v[x0]);
            let br_mu = best_response_value(&pg, 0, &params, &mu, tol).unwrap().get(x0);
            assert!(br_mu <= v[x0] + slack);
            assert!(br_mu <= policy_value(&pg, 0, &params, &mu, &nu, tol).unwrap().get(x0) + slack);
        }
    }
}

// Estimates acceptance by simulating a long run and judging the pair on its
// second half, where the run has settled into its recurrent class.
fn simulate_acceptance<R: Rng>(
    rng: &mut R,
    pg: &ProductGame,
    mu: &FiniteMemoryStrategy,
    nu: &FiniteMemoryStrategy,
    len: usize,
) -> bool {
    let pair = &pg.dra().pairs()[0];
    let mut x = pg.initial();
    let (mut saw_fin, mut saw_inf) = (false, false);
    for t in 0..len {
        let m = match pg.owner(x) {
            Owner::Controller => mu.at_product(x).unwrap(),
            Owner::Attacker => nu.at_product(x).unwrap(),
            Owner::Chance => 0,
        };
        x = pg.step(x, m, rng);
        if t >= len / 2 {
            let q = pg.split(x).1;
            saw_fin |= pair.fin.contains(&q);
            saw_inf |= pair.inf.contains(&q);
        }
    }
    saw_inf && !saw_fin
}

#[test]
fn bottom_scc_probability_matches_simulation() {
    let mut rng = seeded(6);
    let runs = 2000;
    for _ in 0..25 {
        let pg = small_product(&mut rng, 24, LabelTiming::OnLeave);
        let mu = random_strategy(&mut rng, &pg, Owner::Controller);
        let nu = random_strategy(&mut rng, &pg, Owner::Attacker);
        let mc = induced_mc(&pg, &mu, &nu).unwrap();
        let exact = rabin_sat_prob(&mc, pg.dra().pairs());
        assert!((0.0..=1.0 + 1e-12).contains(&exact));
        let hits = (0..runs)
            .filter(|_| simulate_acceptance(&mut rng, &pg, &mu, &nu, 600))
            .count();
        let est = hits as f64 / runs as f64;
        let sigma = (exact * (1.0 - exact) / runs as f64).sqrt();
        assert!((est - exact).abs() <= 5.0 * sigma + 0.01, "exact {exact}, simulated {est}");
    }
}

#[test]
fn window_ids_statistics_match_simulation() {
    let mut rng = seeded(7);
    for &(p, window, threshold) in &[(0.1, 4, 1), (0.3, 5, 2), (0.05, 3, 0), (0.5, 6, 4)] {
        let stats = window_ids_analytics(p, window, threshold).unwrap();
        let runs = 20_000;
        let mut total = 0u64;
        let mut alarms = 0u64;
        for _ in 0..runs {
            let mut hist = std::collections::VecDeque::new();
            let mut t = 0u64;
            loop {
                t += 1;
                hist.push_back(rng.random_bool(p));
                if hist.len() > window as usize {
                    hist.pop_front();
                }
                if hist.iter().filter(|&&b| b).count() > threshold as usize {
                    break;
                }
            }
            total += t;
            let one_window = (0..window).filter(|_| rng.random_bool(p)).count();
            alarms += (one_window > threshold as usize) as u64;
        }
        let mean = total as f64 / runs as f64;
        assert!(
            (mean - stats.expected_steps).abs() < 0.03 * stats.expected_steps,
            "p={p}: simulated {mean}, analytic {}",
            stats.expected_steps
        );
        let freq = alarms as f64 / runs as f64;
        let sigma = (stats.alarm_prob * (1.0 - stats.alarm_prob) / runs as f64).sqrt();
        assert!((freq - stats.alarm_prob).abs() <= 5.0 * sigma + 1e-9);
    }
}

#[test]
fn transient_solver_satisfies_its_equation() {
    let mut rng = seeded(8);
    for n in [1, 7, 60] {
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|_| {
                let k = rng.random_range(0..4);
                let leak = rng.random_range(0.05..0.5);
                let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
                let total: f64 = w.iter().sum();
                w.iter()
                    .map(|wi| (rng.random_range(0..n), (1.0 - leak) * wi / total))
                    .collect()
            })
            .collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        let x = solve_transient(&rows, &b);
        for i in 0..n {
            let mx: f64 = rows[i].iter().map(|&(j, p)| p * x[j]).sum();
            assert!((x[i] - mx - b[i]).abs() < 1e-9);
        }
    }
}

#[test]
fn transient_solver_handles_large_chains() {
    // Walk to the right with escape probability 1/2 at the far end: the
    // expected number of steps from i is (n − i) + 1.
    let n = DIRECT_LIMIT + 500;
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| if i + 1 < n { vec![(i + 1, 1.0)] } else { vec![(i, 0.5)] })
        .collect();
    let x = solve_transient(&rows, &vec![1.0; n]);
    for &i in &[0, n / 2, n - 1] {
        assert!((x[i] - ((n - i) as f64 + 1.0)).abs() < 1e-6, "x[{i}] = {}", x[i]);
    }
}

#[test]
fn absorbing_b_state_has_value_one() {
    // One controller state looping in an automaton state that is in B.
    let g = StochasticGame::new(
        vec!["p".into()],
        vec![StateSpec {
            owner: Owner::Controller,
            label: LabelSet::EMPTY,
            moves: vec![Move::det("stay", 0)],
            passive: None,
        }],
        0,
    )
    .unwrap();
    let dra = specgame::automata::Dra::new(
        vec!["p".into()],
        vec![vec![0, 0]],
        0,
        vec![specgame::automata::RabinPair::new(vec![], vec![0])],
    )
    .unwrap();
    let pg = ProductGame::new(g, dra, LabelTiming::OnLeave).unwrap();
    let v = value_iteration(&pg, 0, &ShapingParams::with_gamma(0.99), 1e-12).unwrap();
    assert!((v.get(pg.initial()) - 1.0).abs() < 1e-9);
}
