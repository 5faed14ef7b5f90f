//! Formula progression for the reachability fragment (atoms and negated
//! atoms, `&`, `|`, `X`, `F`, `F<=k`).
//!
//! An automaton state is a set of obligations kept in disjunctive normal
//! form; each clause is a conjunction of temporal literals. Reading a letter
//! rewrites every literal into the obligation left for the rest of the word.
//! The empty clause (obligation `true`) is the absorbing accepting state.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{AutomataError, Dra, LabelSet, RabinPair};
use crate::ltl::Formula;

type Clause = BTreeSet<Formula>;
type Dnf = BTreeSet<Clause>;

fn tt() -> Dnf {
    BTreeSet::from([Clause::new()])
}

fn ff() -> Dnf {
    Dnf::new()
}

fn literal(f: Formula) -> Dnf {
    BTreeSet::from([BTreeSet::from([f])])
}

fn is_false(f: &Formula) -> bool {
    matches!(f, Formula::Not(g) if **g == Formula::True)
}

fn check_fragment(f: &Formula) -> Result<(), AutomataError> {
    match f {
        Formula::True | Formula::Atom(_) => Ok(()),
        Formula::Not(g) => match g.as_ref() {
            Formula::Atom(_) | Formula::True => Ok(()),
            _ => Err(AutomataError::Fragment(
                "negation is only allowed directly on atoms".into(),
            )),
        },
        Formula::And(a, b) | Formula::Or(a, b) => {
            check_fragment(a)?;
            check_fragment(b)
        }
        Formula::Next(g) | Formula::Eventually(g) | Formula::BoundedEventually(_, g) => {
            check_fragment(g)
        }
        Formula::Until(..) => Err(AutomataError::Fragment("until (U)".into())),
        Formula::Always(_) => Err(AutomataError::Fragment("always (G)".into())),
    }
}

fn simplify(mut d: Dnf) -> Dnf {
    d.retain(|clause| {
        !clause.iter().any(|lit| match lit {
            Formula::Not(g) => clause.contains(g.as_ref()),
            _ => false,
        })
    });
    if d.contains(&Clause::new()) {
        return tt();
    }
    let clauses: Vec<Clause> = d.iter().cloned().collect();
    d.retain(|c| !clauses.iter().any(|o| o != c && o.is_subset(c)));
    d
}

fn or(a: Dnf, b: Dnf) -> Dnf {
    simplify(a.into_iter().chain(b).collect())
}

fn and(a: &Dnf, b: &Dnf) -> Dnf {
    let mut out = Dnf::new();
    for x in a {
        for y in b {
            out.insert(x.union(y).cloned().collect());
        }
    }
    simplify(out)
}

fn dnf(f: &Formula) -> Dnf {
    match f {
        Formula::True => tt(),
        g if is_false(g) => ff(),
        Formula::Atom(_) | Formula::Not(_) => literal(f.clone()),
        Formula::And(a, b) => and(&dnf(a), &dnf(b)),
        Formula::Or(a, b) => or(dnf(a), dnf(b)),
        Formula::Next(g) | Formula::Eventually(g) | Formula::BoundedEventually(_, g)
            if **g == Formula::True =>
        {
            tt()
        }
        Formula::Next(g) | Formula::Eventually(g) | Formula::BoundedEventually(_, g)
            if is_false(g) =>
        {
            ff()
        }
        Formula::BoundedEventually(0, g) => dnf(g),
        _ => literal(f.clone()),
    }
}

struct Progressor<'a> {
    ap: &'a [String],
}

impl Progressor<'_> {
    fn holds(&self, atom: &str, label: LabelSet) -> bool {
        self.ap
            .iter()
            .position(|a| a == atom)
            .is_some_and(|i| label.contains(i))
    }

    fn literal(&self, lit: &Formula, label: LabelSet) -> Dnf {
        match lit {
            Formula::Atom(a) => {
                if self.holds(a, label) {
                    tt()
                } else {
                    ff()
                }
            }
            Formula::Not(g) => match g.as_ref() {
                Formula::Atom(a) if self.holds(a, label) => ff(),
                _ => tt(),
            },
            Formula::Next(g) => dnf(g),
            Formula::Eventually(g) => or(self.dnf(&dnf(g), label), literal(lit.clone())),
            // F<=k g after one letter: g now or within k-1 further steps.
            Formula::BoundedEventually(k, g) => or(dnf(g), dnf(&Formula::bounded(k - 1, (**g).clone()))),
            other => unreachable!("not a temporal literal: {other:?}"),
        }
    }

    fn dnf(&self, d: &Dnf, label: LabelSet) -> Dnf {
        let mut out = ff();
        for clause in d {
            let mut acc = tt();
            for lit in clause {
                acc = and(&acc, &self.literal(lit, label));
                if acc.is_empty() {
                    break;
                }
            }
            out = or(out, acc);
        }
        out
    }
}

/// Builds a deterministic automaton for a reachability formula, presented
/// as a Rabin automaton with the single pair `(∅, {accept})` whose accepting
/// state is an absorbing sink. Propositions are the formula's atoms in
/// lexicographic order.
pub fn translate_reachability(f: &Formula) -> Result<Dra, AutomataError> {
    check_fragment(f)?;
    let ap: Vec<String> = f.atoms().into_iter().collect();
    if ap.len() > super::MAX_AP {
        return Err(AutomataError::ApTooLarge(ap.len()));
    }
    let prog = Progressor { ap: &ap };
    let width = 1u32 << ap.len();
    let start = dnf(f);
    let mut ids: HashMap<Dnf, usize> = HashMap::from([(start.clone(), 0)]);
    let mut states = vec![start.clone()];
    let mut delta: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(q) = queue.pop_front() {
        let mut row = Vec::with_capacity(width as usize);
        for bits in 0..width {
            let next = prog.dnf(&states[q], LabelSet(bits));
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = states.len();
                    ids.insert(next.clone(), id);
                    states.push(next);
                    queue.push_back(id);
                    id
                }
            };
            row.push(id);
        }
        if delta.len() <= q {
            delta.resize(q + 1, Vec::new());
        }
        delta[q] = row;
    }
    let accepting: Vec<usize> = ids
        .iter()
        .filter(|(d, _)| **d == tt())
        .map(|(_, &id)| id)
        .collect();
    Dra::new(ap, delta, 0, vec![RabinPair::new([], accepting)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::run_dra;
    use crate::ltl::{build_ids, eval_lasso, parse_ltl, LassoWord};

    #[test]
    fn eventually_two_states() {
        let a = translate_reachability(&parse_ltl("F a").unwrap()).unwrap();
        assert_eq!(a.num_states(), 2);
        let acc = *a.pairs()[0].inf.iter().next().unwrap();
        assert_ne!(acc, a.initial());
        assert_eq!(a.step(a.initial(), LabelSet(0)), a.initial());
        assert_eq!(a.step(a.initial(), LabelSet(1)), acc);
        assert_eq!(a.step(acc, LabelSet(0)), acc);
        assert_eq!(a.step(acc, LabelSet(1)), acc);
        assert!(a.pairs()[0].fin.is_empty());
    }

    #[test]
    fn fragment_errors_name_connective() {
        let err = translate_reachability(&parse_ltl("G a").unwrap()).unwrap_err();
        assert_eq!(err, AutomataError::Fragment("always (G)".into()));
        assert!(matches!(
            translate_reachability(&parse_ltl("a U b").unwrap()),
            Err(AutomataError::Fragment(_))
        ));
        assert!(matches!(
            translate_reachability(&parse_ltl("!F a").unwrap()),
            Err(AutomataError::Fragment(_))
        ));
    }

    #[test]
    fn accepting_sink_is_absorbing() {
        let a = translate_reachability(&build_ids(0, 1, true)).unwrap();
        assert!(a.is_cosafety());
        for &q in &a.pairs()[0].inf {
            assert!(a.transitions()[q].iter().all(|&t| t == q));
        }
    }

    #[test]
    fn trivial_formulas() {
        let t = translate_reachability(&Formula::True).unwrap();
        assert_eq!(t.num_states(), 1);
        assert!(run_dra(&t, &LassoWord::from_labels(&[], &[&[]]).unwrap()));
        let f = translate_reachability(&Formula::falsum()).unwrap();
        assert!(!run_dra(&f, &LassoWord::from_labels(&[], &[&[]]).unwrap()));
    }

    #[test]
    fn ids_dfa_matches_hand_words() {
        let f = build_ids(0, 1, true);
        let a = translate_reachability(&f).unwrap();
        let cases: [(&[&[&str]], &[&[&str]]); 4] = [
            (
                &[&["anomaly"], &["anomaly"], &[], &["attack"], &["attack"]],
                &[&[]],
            ),
            (&[&["anomaly"], &["anomaly"], &["attack"], &["attack"]], &[&[]]),
            (&[&["anomaly"], &["anomaly"], &[], &["attack"]], &[&[]]),
            (&[&["anomaly"], &[], &["anomaly"]], &[&["attack"]]),
        ];
        for (stem, cycle) in cases {
            let w = LassoWord::from_labels(stem, cycle).unwrap();
            assert_eq!(run_dra(&a, &w), eval_lasso(&f, &w), "{stem:?} {cycle:?}");
        }
    }
}
