//! Deterministic Rabin automata over the alphabet `2^AP`.
//!
//! States are dense indices `0..n`; the transition table is stored per state
//! as a vector indexed by the bit pattern of the label set, so totality and
//! determinism hold by construction and are re-checked by [`Dra::new`].

mod hoa;
mod progression;

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::ltl::LassoWord;

pub use hoa::{parse_hoa, write_hoa};
pub use progression::translate_reachability;

/// Upper bound on the number of atomic propositions of an automaton.
pub const MAX_AP: usize = 16;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum AutomataError {
    #[error("malformed HOA document (line {line}): {msg}")]
    Malformed { line: usize, msg: String },
    #[error("state {state} has several successors on label {label:#b}")]
    NonDeterministic { state: usize, label: u32 },
    #[error("state {state} has no successor on label {label:#b}")]
    Incomplete { state: usize, label: u32 },
    #[error("transition-based acceptance on an edge of state {state} is not supported")]
    TransitionAcceptance { state: usize },
    #[error("acceptance condition is not a disjunction of Fin&Inf pairs: {0}")]
    NonRabin(String),
    #[error("formula outside the reachability fragment: {0}")]
    Fragment(String),
    #[error("atomic propositions do not match: {0}")]
    ApMismatch(String),
    #[error("{0} atomic propositions exceed the supported maximum of {MAX_AP}")]
    ApTooLarge(usize),
    #[error("invalid automaton: {0}")]
    Invalid(String),
    #[error("left operand is not a co-safety automaton with a closed accepting region")]
    NotCoSafety,
}

/// A subset of the automaton's propositions, bit `i` standing for `ap[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LabelSet(pub u32);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn with(self, i: usize) -> LabelSet {
        LabelSet(self.0 | (1 << i))
    }

    pub fn union(self, other: LabelSet) -> LabelSet {
        LabelSet(self.0 | other.0)
    }

    pub fn bits(self) -> u32 {
        self.0
    }
}

/// One acceptance pair: accepted when `fin` is visited finitely often and
/// `inf` infinitely often.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RabinPair {
    pub fin: BTreeSet<usize>,
    pub inf: BTreeSet<usize>,
}

impl RabinPair {
    pub fn new(fin: impl IntoIterator<Item = usize>, inf: impl IntoIterator<Item = usize>) -> Self {
        Self {
            fin: fin.into_iter().collect(),
            inf: inf.into_iter().collect(),
        }
    }

    /// Rabin condition on a set of states visited infinitely often.
    pub fn accepts(&self, recurrent: &BTreeSet<usize>) -> bool {
        self.fin.is_disjoint(recurrent) && !self.inf.is_disjoint(recurrent)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dra {
    ap: Vec<String>,
    delta: Vec<Vec<usize>>,
    initial: usize,
    pairs: Vec<RabinPair>,
}

impl Dra {
    pub fn new(
        ap: Vec<String>,
        delta: Vec<Vec<usize>>,
        initial: usize,
        pairs: Vec<RabinPair>,
    ) -> Result<Self, AutomataError> {
        if ap.len() > MAX_AP {
            return Err(AutomataError::ApTooLarge(ap.len()));
        }
        let distinct: BTreeSet<&String> = ap.iter().collect();
        if distinct.len() != ap.len() {
            return Err(AutomataError::Invalid("duplicate proposition".into()));
        }
        let n = delta.len();
        if n == 0 {
            return Err(AutomataError::Invalid("no states".into()));
        }
        if initial >= n {
            return Err(AutomataError::Invalid(format!("initial state {initial} out of range")));
        }
        let width = 1usize << ap.len();
        for (q, row) in delta.iter().enumerate() {
            if row.len() != width {
                return Err(AutomataError::Incomplete {
                    state: q,
                    label: row.len() as u32,
                });
            }
            if let Some(t) = row.iter().find(|&&t| t >= n) {
                return Err(AutomataError::Invalid(format!("state {q} targets missing state {t}")));
            }
        }
        if pairs.is_empty() {
            return Err(AutomataError::Invalid("no acceptance pairs".into()));
        }
        for p in &pairs {
            if p.fin.iter().chain(&p.inf).any(|&q| q >= n) {
                return Err(AutomataError::Invalid("acceptance set names missing state".into()));
            }
        }
        Ok(Self {
            ap,
            delta,
            initial,
            pairs,
        })
    }

    /// Single-state automaton accepting every word.
    pub fn accept_all(ap: Vec<String>) -> Self {
        let width = 1usize << ap.len();
        Self::new(ap, vec![vec![0; width]], 0, vec![RabinPair::new([], [0])])
            .expect("valid trivial automaton")
    }

    /// Single-state automaton accepting no word.
    pub fn accept_none(ap: Vec<String>) -> Self {
        let width = 1usize << ap.len();
        Self::new(ap, vec![vec![0; width]], 0, vec![RabinPair::new([], [])])
            .expect("valid trivial automaton")
    }

    pub fn ap(&self) -> &[String] {
        &self.ap
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn pairs(&self) -> &[RabinPair] {
        &self.pairs
    }

    pub fn num_labels(&self) -> usize {
        1 << self.ap.len()
    }

    pub fn step(&self, q: usize, label: LabelSet) -> usize {
        self.delta[q][label.0 as usize]
    }

    pub fn transitions(&self) -> &[Vec<usize>] {
        &self.delta
    }

    pub fn ap_index(&self, name: &str) -> Option<usize> {
        self.ap.iter().position(|a| a == name)
    }

    /// Projects a set of proposition names onto this automaton's alphabet;
    /// names outside `ap` are dropped.
    pub fn letter<'a>(&self, names: impl IntoIterator<Item = &'a String>) -> LabelSet {
        names
            .into_iter()
            .filter_map(|n| self.ap_index(n))
            .fold(LabelSet::EMPTY, LabelSet::with)
    }

    /// Same automaton over a larger, reordered alphabet. Every current
    /// proposition must occur in `ap`.
    pub fn reindex(&self, ap: &[String]) -> Result<Dra, AutomataError> {
        if ap.len() > MAX_AP {
            return Err(AutomataError::ApTooLarge(ap.len()));
        }
        let map: Vec<usize> = self
            .ap
            .iter()
            .map(|a| {
                ap.iter()
                    .position(|b| b == a)
                    .ok_or_else(|| AutomataError::ApMismatch(format!("proposition {a:?} missing")))
            })
            .collect::<Result<_, _>>()?;
        let project = |bits: usize| -> usize {
            map.iter()
                .enumerate()
                .filter(|(_, &j)| bits & (1 << j) != 0)
                .fold(0, |acc, (i, _)| acc | (1 << i))
        };
        let width = 1usize << ap.len();
        let delta = self
            .delta
            .iter()
            .map(|row| (0..width).map(|bits| row[project(bits)]).collect())
            .collect();
        Dra::new(ap.to_vec(), delta, self.initial, self.pairs.clone())
    }

    pub fn reachable(&self) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([self.initial]);
        let mut queue = VecDeque::from([self.initial]);
        while let Some(q) = queue.pop_front() {
            for &t in &self.delta[q] {
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// Largest set of states closed under every transition that lies inside
    /// `inf \ fin` of the given pair: once entered, the pair is satisfied.
    pub fn winning_sink(&self, pair: usize) -> BTreeSet<usize> {
        let p = &self.pairs[pair];
        let mut region: BTreeSet<usize> = p.inf.difference(&p.fin).copied().collect();
        loop {
            let keep: BTreeSet<usize> = region
                .iter()
                .copied()
                .filter(|&q| self.delta[q].iter().all(|t| region.contains(t)))
                .collect();
            if keep.len() == region.len() {
                return keep;
            }
            region = keep;
        }
    }

    /// Returns `true` when the automaton has a single pair `(∅, B)` with `B`
    /// closed under all transitions, i.e. it is a finite automaton for a
    /// reachability property.
    pub fn is_cosafety(&self) -> bool {
        self.pairs.len() == 1
            && self.pairs[0].fin.is_empty()
            && self.pairs[0]
                .inf
                .iter()
                .all(|&q| self.delta[q].iter().all(|t| self.pairs[0].inf.contains(t)))
    }
}

/// Decides acceptance of `stem · cycle^ω` by simulating until a
/// (state, cycle position) pair repeats.
pub fn run_dra(a: &Dra, w: &LassoWord) -> bool {
    let letter = |s: &BTreeSet<String>| a.letter(s.iter());
    let mut q = a.initial();
    for l in w.stem() {
        q = a.step(q, letter(l));
    }
    let cycle: Vec<LabelSet> = w.cycle().iter().map(letter).collect();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut trace = Vec::new();
    let mut pos = 0;
    loop {
        if let Some(&start) = seen.get(&(q, pos)) {
            let recurrent: BTreeSet<usize> = trace[start..].iter().copied().collect();
            return a.pairs().iter().any(|p| p.accepts(&recurrent));
        }
        seen.insert((q, pos), trace.len());
        trace.push(q);
        q = a.step(q, cycle[pos]);
        pos = (pos + 1) % cycle.len();
    }
}

fn merged_ap(a: &Dra, b: &Dra) -> Result<Vec<String>, AutomataError> {
    let mut ap = a.ap.clone();
    for p in &b.ap {
        if !ap.contains(p) {
            ap.push(p.clone());
        }
    }
    if ap.len() > MAX_AP {
        return Err(AutomataError::ApMismatch(format!(
            "merged alphabet has {} propositions (max {MAX_AP})",
            ap.len()
        )));
    }
    Ok(ap)
}

fn product_delta(a: &Dra, b: &Dra) -> Vec<Vec<usize>> {
    let nb = b.num_states();
    let width = a.num_labels();
    let mut delta = Vec::with_capacity(a.num_states() * nb);
    for qa in 0..a.num_states() {
        for qb in 0..nb {
            delta.push(
                (0..width)
                    .map(|l| a.delta[qa][l] * nb + b.delta[qb][l])
                    .collect(),
            );
        }
    }
    delta
}

/// Automaton for the disjunction of two Rabin conditions.
///
/// States are pairs `(qa, qb)` encoded as `qa * |Qb| + qb`; the pairs of `a`
/// are lifted as `C × Qb, B × Qb` and those of `b` as `Qa × C, Qa × B`.
pub fn dra_union(a: &Dra, b: &Dra) -> Result<Dra, AutomataError> {
    let ap = merged_ap(a, b)?;
    let a = a.reindex(&ap)?;
    let b = b.reindex(&ap)?;
    let (na, nb) = (a.num_states(), b.num_states());
    let mut pairs = Vec::with_capacity(a.pairs.len() + b.pairs.len());
    for p in &a.pairs {
        let lift = |s: &BTreeSet<usize>| -> BTreeSet<usize> {
            s.iter().flat_map(|&qa| (0..nb).map(move |qb| qa * nb + qb)).collect()
        };
        pairs.push(RabinPair {
            fin: lift(&p.fin),
            inf: lift(&p.inf),
        });
    }
    for p in &b.pairs {
        let lift = |s: &BTreeSet<usize>| -> BTreeSet<usize> {
            (0..na).flat_map(|qa| s.iter().map(move |&qb| qa * nb + qb)).collect()
        };
        pairs.push(RabinPair {
            fin: lift(&p.fin),
            inf: lift(&p.inf),
        });
    }
    Dra::new(ap, product_delta(&a, &b), a.initial * nb + b.initial, pairs)
}

/// Disjunction of a co-safety automaton `a` (see [`Dra::is_cosafety`]) with
/// an arbitrary Rabin automaton `b`, keeping the pair count of `b`.
///
/// Pair `j` becomes `C' = {(x, y) : x ∉ B_a, y ∈ C_j}` and
/// `B' = {(x, y) : x ∈ B_a or y ∈ B_j}`: runs that reach the closed region
/// `B_a` satisfy every pair, all other runs are judged by `b` alone.
pub fn dra_union_cosafety(a: &Dra, b: &Dra) -> Result<Dra, AutomataError> {
    if !a.is_cosafety() {
        return Err(AutomataError::NotCoSafety);
    }
    let ap = merged_ap(a, b)?;
    let a = a.reindex(&ap)?;
    let b = b.reindex(&ap)?;
    let (na, nb) = (a.num_states(), b.num_states());
    let reached = &a.pairs[0].inf;
    let pairs = b
        .pairs
        .iter()
        .map(|p| {
            let mut fin = BTreeSet::new();
            let mut inf = BTreeSet::new();
            for qa in 0..na {
                for qb in 0..nb {
                    let id = qa * nb + qb;
                    if reached.contains(&qa) {
                        inf.insert(id);
                    } else {
                        if p.fin.contains(&qb) {
                            fin.insert(id);
                        }
                        if p.inf.contains(&qb) {
                            inf.insert(id);
                        }
                    }
                }
            }
            RabinPair { fin, inf }
        })
        .collect();
    Dra::new(ap, product_delta(&a, &b), a.initial * nb + b.initial, pairs)
}

/// Structural isomorphism of the reachable parts: same alphabet, a bijection
/// of reachable states preserving the initial state, transitions and every
/// pair (in order).
pub fn is_isomorphic(a: &Dra, b: &Dra) -> bool {
    if a.ap != b.ap || a.pairs.len() != b.pairs.len() {
        return false;
    }
    let mut fwd: HashMap<usize, usize> = HashMap::new();
    let mut bwd: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::from([(a.initial, b.initial)]);
    fwd.insert(a.initial, b.initial);
    bwd.insert(b.initial, a.initial);
    while let Some((qa, qb)) = queue.pop_front() {
        for l in 0..a.num_labels() {
            let (ta, tb) = (a.delta[qa][l], b.delta[qb][l]);
            match (fwd.get(&ta), bwd.get(&tb)) {
                (None, None) => {
                    fwd.insert(ta, tb);
                    bwd.insert(tb, ta);
                    queue.push_back((ta, tb));
                }
                (Some(&x), Some(&y)) if x == tb && y == ta => {}
                _ => return false,
            }
        }
    }
    a.pairs.iter().zip(&b.pairs).all(|(pa, pb)| {
        fwd.iter().all(|(&qa, &qb)| {
            pa.fin.contains(&qa) == pb.fin.contains(&qb)
                && pa.inf.contains(&qa) == pb.inf.contains(&qb)
        })
    })
}
