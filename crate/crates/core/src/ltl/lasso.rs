use std::collections::BTreeSet;

use super::{Formula, LtlError};

/// An ultimately periodic word `stem · cycle^ω` over label sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoWord {
    stem: Vec<BTreeSet<String>>,
    cycle: Vec<BTreeSet<String>>,
}

impl LassoWord {
    pub fn new(
        stem: Vec<BTreeSet<String>>,
        cycle: Vec<BTreeSet<String>>,
    ) -> Result<Self, LtlError> {
        if cycle.is_empty() {
            return Err(LtlError::EmptyLoop);
        }
        Ok(Self { stem, cycle })
    }

    /// Convenience constructor from nested string slices.
    pub fn from_labels(stem: &[&[&str]], cycle: &[&[&str]]) -> Result<Self, LtlError> {
        let conv = |xs: &[&[&str]]| {
            xs.iter()
                .map(|set| set.iter().map(|s| s.to_string()).collect())
                .collect()
        };
        Self::new(conv(stem), conv(cycle))
    }

    pub fn stem(&self) -> &[BTreeSet<String>] {
        &self.stem
    }

    pub fn cycle(&self) -> &[BTreeSet<String>] {
        &self.cycle
    }

    /// Number of distinct positions (`|stem| + |cycle|`).
    pub fn positions(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    /// Label set at a distinct position `i < positions()`.
    pub fn at(&self, i: usize) -> &BTreeSet<String> {
        if i < self.stem.len() {
            &self.stem[i]
        } else {
            &self.cycle[i - self.stem.len()]
        }
    }

    /// Successor of position `i` in the folded word.
    pub fn succ(&self, i: usize) -> usize {
        if i + 1 < self.positions() {
            i + 1
        } else {
            self.stem.len()
        }
    }
}

/// Decides whether the infinite word `w` satisfies `f`.
///
/// Every subformula is evaluated at every folded position. `U` and `F` are
/// least fixed points and `G` a greatest fixed point over the successor map;
/// each is iterated until stable.
pub fn eval_lasso(f: &Formula, w: &LassoWord) -> bool {
    eval_all(f, w)[0]
}

fn eval_all(f: &Formula, w: &LassoWord) -> Vec<bool> {
    let n = w.positions();
    match f {
        Formula::True => vec![true; n],
        Formula::Atom(a) => (0..n).map(|i| w.at(i).contains(a)).collect(),
        Formula::Not(g) => eval_all(g, w).into_iter().map(|b| !b).collect(),
        Formula::And(x, y) => {
            let (x, y) = (eval_all(x, w), eval_all(y, w));
            x.iter().zip(&y).map(|(a, b)| *a && *b).collect()
        }
        Formula::Or(x, y) => {
            let (x, y) = (eval_all(x, w), eval_all(y, w));
            x.iter().zip(&y).map(|(a, b)| *a || *b).collect()
        }
        Formula::Next(g) => {
            let g = eval_all(g, w);
            (0..n).map(|i| g[w.succ(i)]).collect()
        }
        Formula::Until(x, y) => {
            let (x, y) = (eval_all(x, w), eval_all(y, w));
            fixpoint(w, vec![false; n], |i, next| y[i] || (x[i] && next))
        }
        Formula::Eventually(g) => {
            let g = eval_all(g, w);
            fixpoint(w, vec![false; n], |i, next| g[i] || next)
        }
        Formula::Always(g) => {
            let g = eval_all(g, w);
            fixpoint(w, vec![true; n], |i, next| g[i] && next)
        }
        Formula::BoundedEventually(0, g) => eval_all(g, w),
        Formula::BoundedEventually(k, g) => {
            let g = eval_all(g, w);
            (0..n)
                .map(|i| {
                    let mut j = i;
                    (0..*k).any(|_| {
                        j = w.succ(j);
                        g[j]
                    })
                })
                .collect()
        }
    }
}

fn fixpoint(w: &LassoWord, mut v: Vec<bool>, step: impl Fn(usize, bool) -> bool) -> Vec<bool> {
    loop {
        let mut changed = false;
        for i in (0..v.len()).rev() {
            let nv = step(i, v[w.succ(i)]);
            if nv != v[i] {
                v[i] = nv;
                changed = true;
            }
        }
        if !changed {
            return v;
        }
    }
}
