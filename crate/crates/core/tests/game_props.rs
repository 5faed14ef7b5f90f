mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use specgame::game::{
    build_grid_game, expected_cell, load_grid, step_sample, transition_distribution, Action, GridSpec, Owner,
};

fn small_grid(rows: usize, cols: usize, p: f64, seed: u64) -> GridSpec {
    let mut rng = common::seeded(seed);
    let ap: Vec<String> = vec!["g".into(), "h".into()];
    let mut labels = BTreeMap::new();
    for r in 0..rows {
        for c in 0..cols {
            let l = common::letter(&mut rng, &ap);
            if !l.is_empty() {
                labels.insert((r, c), l);
            }
        }
    }
    GridSpec::new(rows, cols, ap, labels, p, (1.0 - p) / 2.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampler_frequencies_match_distribution(seed in any::<u64>()) {
        let mut rng = common::seeded(seed);
        let ap = common::atoms(2);
        let g = common::random_game(&mut rng, &ap, 6, 2);
        for s in g.states_of(Owner::Chance) {
            let outs = &g.moves(s)[0].outcomes;
            let n = 20_000;
            let mut hits = vec![0usize; outs.len()];
            for _ in 0..n {
                let o = g.sample(s, 0, &mut rng);
                let i = outs.iter().position(|x| std::ptr::eq(x, o)).unwrap();
                hits[i] += 1;
            }
            for (o, h) in outs.iter().zip(&hits) {
                // Five standard deviations of a binomial proportion.
                let sd = (o.prob * (1.0 - o.prob) / n as f64).sqrt();
                prop_assert!((*h as f64 / n as f64 - o.prob).abs() <= 5.0 * sd + 1e-9);
            }
        }
    }

    #[test]
    fn grid_turn_structure_and_label_events(rows in 1usize..4, cols in 1usize..4, p in 0.5f64..1.0, seed in any::<u64>()) {
        let spec = small_grid(rows, cols, p, seed);
        let gg = build_grid_game(&spec).unwrap();
        let g = &gg.game;
        let ap = g.ap();
        let bit = |name: &str| ap.iter().position(|a| a == name).unwrap();
        let (attack, anomaly) = (bit("attack"), bit("anomaly"));
        prop_assert_eq!(g.num_states(), 21 * spec.num_cells());
        for i in 0..spec.num_cells() {
            let cell = spec.cell_at(i);
            let s = gg.controller_state(cell);
            prop_assert_eq!(g.owner(s), Owner::Controller);
            prop_assert_eq!(g.moves(s).len(), 4);
            for a in Action::ALL {
                let att = g.moves(s)[a.index()].outcomes[0].target;
                prop_assert_eq!(att, gg.attacker_state(cell, a));
                prop_assert_eq!(g.owner(att), Owner::Attacker);
                prop_assert_eq!(g.passive(att), Some(a.index()));
                let expected = expected_cell(&spec, cell, a).unwrap();
                for b in Action::ALL {
                    let ch = g.moves(att)[b.index()].outcomes[0].target;
                    prop_assert_eq!(ch, gg.chance_state(cell, a, b));
                    prop_assert_eq!(g.owner(ch), Owner::Chance);
                    prop_assert_eq!(g.label(ch).contains(attack), a != b);
                    let dist = transition_distribution(&spec, cell, b).unwrap();
                    let outs = &g.moves(ch)[0].outcomes;
                    prop_assert_eq!(outs.len(), dist.len());
                    for (o, (to, pr)) in outs.iter().zip(&dist) {
                        prop_assert_eq!(o.target, gg.controller_state(*to));
                        prop_assert!((o.prob - pr).abs() < 1e-12);
                        prop_assert_eq!(o.event.contains(anomaly), *to != expected);
                        prop_assert!(!o.event.contains(attack));
                    }
                }
            }
        }
    }

    #[test]
    fn distributions_are_normalised(rows in 1usize..5, cols in 1usize..5, p in 0.0f64..=1.0, r in 0usize..5, c in 0usize..5) {
        let spec = small_grid(rows, cols, p, 1);
        let cell = (r % rows, c % cols);
        for a in Action::ALL {
            let d = transition_distribution(&spec, cell, a).unwrap();
            let total: f64 = d.iter().map(|x| x.1).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(d.iter().all(|x| x.1 > 0.0));
            let cells: BTreeSet<_> = d.iter().map(|x| x.0).collect();
            prop_assert_eq!(cells.len(), d.len());
        }
    }
}

#[test]
fn step_sample_emits_three_label_sets() {
    let spec = small_grid(3, 3, 0.8, 9);
    let mut rng = common::seeded(2);
    let mut moved = 0;
    for _ in 0..2000 {
        let o = step_sample(&spec, (1, 1), Action::North, Action::East, &mut rng).unwrap();
        assert_eq!(o.label_word.len(), 3);
        assert!(o.label_word[0].contains("attack"));
        // East executed reaches the North neighbour only by slipping.
        assert_eq!(o.label_word[1].contains("anomaly"), o.next_cell != (0, 1));
        assert_eq!(o.label_word[2], spec.labels(o.next_cell));
        moved += (o.next_cell == (1, 2)) as usize;
    }
    let f = moved as f64 / 2000.0;
    assert!((f - 0.8).abs() < 0.04, "{f}");
    let o = step_sample(&spec, (0, 0), Action::North, Action::North, &mut rng).unwrap();
    assert!(o.label_word[0].is_empty());
}

#[test]
fn wall_stays_are_expected() {
    let spec = small_grid(2, 2, 0.8, 3);
    assert_eq!(expected_cell(&spec, (0, 0), Action::North).unwrap(), (0, 0));
    assert!(expected_cell(&spec, (5, 0), Action::North).is_err());
}

#[test]
fn grid_documents_validate() {
    let base = "rows = 2\ncols = 2\nap = [\"g\"]\np_intended = 0.8\np_side = 0.1\n";
    assert!(load_grid(&format!("{base}[labels]\n\"0,1\" = [\"g\"]\n")).is_ok());
    assert!(load_grid(&format!("{base}[labels]\n\"0,1\" = [\"zz\"]\n")).is_err());
    assert!(load_grid(&format!("{base}[labels]\n\"3,3\" = [\"g\"]\n")).is_err());
    assert!(load_grid("rows = 2\ncols = 2\nap = [\"attack\"]\np_intended = 0.8\np_side = 0.1\n").is_err());
    assert!(load_grid("rows = 2\ncols = 2\nap = []\np_intended = 0.8\np_side = 0.2\n").is_err());
    assert!(load_grid(&format!("{base}colour = 1\n")).is_err());
    for name in ["surveillance.grid", "sequence.grid"] {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
        let spec = load_grid(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!((spec.rows, spec.cols), (7, 9));
        assert!(build_grid_game(&spec).is_ok());
    }
}
