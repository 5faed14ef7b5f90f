//! Linear temporal logic: syntax tree, text syntax, sugar expansion, the
//! intrusion-detection formula templates and a lasso-word evaluator.
//!
//! The text syntax uses `true false ! & | X F G U F<=k ( )` plus lowercase
//! atom identifiers. Unary operators bind tightest, then `U`
//! (right-associative), then `&`, then `|` (both left-associative).

mod ids;
mod lasso;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

pub use ids::{
    build_alarm, build_detect, build_ids, build_ids_nested, build_win, ANOMALY, ATTACK,
};
pub use lasso::{eval_lasso, LassoWord};
pub use parser::parse_ltl;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum LtlError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown token {found:?} at position {pos}")]
    UnknownToken { pos: usize, found: char },
    #[error("bound at position {pos} is not a non-negative integer")]
    BadBound { pos: usize },
    #[error("empty window list")]
    EmptyWindows,
    #[error("lasso loop must be nonempty")]
    EmptyLoop,
}

/// An LTL formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Always(Box<Formula>),
    Eventually(Box<Formula>),
    /// `F<=k φ`: φ holds at one of the next `k` positions (offsets `1..=k`).
    /// `F<=0 φ` is read as `φ`.
    BoundedEventually(u32, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn falsum() -> Self {
        Formula::Not(Box::new(Formula::True))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn always(f: Formula) -> Self {
        Formula::Always(Box::new(f))
    }

    pub fn eventually(f: Formula) -> Self {
        Formula::Eventually(Box::new(f))
    }

    pub fn bounded(k: u32, f: Formula) -> Self {
        Formula::BoundedEventually(k, Box::new(f))
    }

    /// Set of atom names occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True => {}
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(f)
            | Formula::Next(f)
            | Formula::Always(f)
            | Formula::Eventually(f)
            | Formula::BoundedEventually(_, f) => f.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::Atom(_) => 1,
            Formula::Not(f)
            | Formula::Next(f)
            | Formula::Always(f)
            | Formula::Eventually(f)
            | Formula::BoundedEventually(_, f) => 1 + f.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    /// Rewrites all derived operators into `true`, atoms, `!`, `&`, `X`, `U`.
    pub fn expand_sugar(&self) -> Formula {
        expand_sugar(self)
    }
}

/// Rewrites `F`, `G`, `F<=k` and `|` into the core connectives.
///
/// `F φ` becomes `true U φ`, `G φ` becomes `!(true U !φ)`, `F<=k φ` becomes
/// `X φ | X X φ | ... | X^k φ` (and `φ` for `k = 0`), and `a | b` becomes
/// `!(!a & !b)`.
pub fn expand_sugar(f: &Formula) -> Formula {
    match f {
        Formula::True => Formula::True,
        Formula::Atom(a) => Formula::Atom(a.clone()),
        Formula::Not(g) => Formula::not(expand_sugar(g)),
        Formula::And(a, b) => Formula::and(expand_sugar(a), expand_sugar(b)),
        Formula::Or(a, b) => core_or(expand_sugar(a), expand_sugar(b)),
        Formula::Next(g) => Formula::next(expand_sugar(g)),
        Formula::Until(a, b) => Formula::until(expand_sugar(a), expand_sugar(b)),
        Formula::Eventually(g) => Formula::until(Formula::True, expand_sugar(g)),
        Formula::Always(g) => Formula::not(Formula::until(
            Formula::True,
            Formula::not(expand_sugar(g)),
        )),
        Formula::BoundedEventually(0, g) => expand_sugar(g),
        Formula::BoundedEventually(k, g) => {
            let inner = expand_sugar(g);
            let mut shifted = Formula::next(inner);
            let mut acc = shifted.clone();
            for _ in 1..*k {
                shifted = Formula::next(shifted);
                acc = core_or(acc, shifted.clone());
            }
            acc
        }
    }
}

fn core_or(a: Formula, b: Formula) -> Formula {
    Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
}

// Binding strength used by the printer; larger binds tighter.
fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        Formula::Until(..) => 3,
        Formula::Not(_)
        | Formula::Next(_)
        | Formula::Always(_)
        | Formula::Eventually(_)
        | Formula::BoundedEventually(..) => 4,
        Formula::True | Formula::Atom(_) => 5,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Formula, min_prec: u8) -> fmt::Result {
    if precedence(child) < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => {
                write!(f, "!")?;
                write_child(f, g, 4)
            }
            Formula::Next(g) => {
                write!(f, "X ")?;
                write_child(f, g, 4)
            }
            Formula::Always(g) => {
                write!(f, "G ")?;
                write_child(f, g, 4)
            }
            Formula::Eventually(g) => {
                write!(f, "F ")?;
                write_child(f, g, 4)
            }
            Formula::BoundedEventually(k, g) => {
                write!(f, "F<={k} ")?;
                write_child(f, g, 4)
            }
            Formula::And(a, b) => {
                write_child(f, a, 2)?;
                write!(f, " & ")?;
                write_child(f, b, 3)
            }
            Formula::Or(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " | ")?;
                write_child(f, b, 2)
            }
            Formula::Until(a, b) => {
                write_child(f, a, 4)?;
                write!(f, " U ")?;
                write_child(f, b, 3)
            }
        }
    }
}

/// Renders a formula in the text syntax accepted by [`parse_ltl`].
pub fn format_ltl(f: &Formula) -> String {
    f.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Formula {
        Formula::atom(n)
    }

    #[test]
    fn format_examples() {
        assert_eq!(format_ltl(&a("b")), "b");
        assert_eq!(
            format_ltl(&Formula::always(Formula::eventually(a("b")))),
            "G F b"
        );
        assert_eq!(format_ltl(&Formula::bounded(2, a("a"))), "F<=2 a");
    }

    #[test]
    fn format_parenthesizes_by_precedence() {
        let f = Formula::and(Formula::or(a("a"), a("b")), a("c"));
        assert_eq!(format_ltl(&f), "(a | b) & c");
        let f = Formula::until(Formula::until(a("a"), a("b")), a("c"));
        assert_eq!(format_ltl(&f), "(a U b) U c");
        let f = Formula::until(a("a"), Formula::until(a("b"), a("c")));
        assert_eq!(format_ltl(&f), "a U b U c");
        let f = Formula::not(Formula::and(a("a"), a("b")));
        assert_eq!(format_ltl(&f), "!(a & b)");
    }

    #[test]
    fn expand_bounded_two() {
        let got = expand_sugar(&Formula::bounded(2, a("a")));
        let want = core_or(
            Formula::next(a("a")),
            Formula::next(Formula::next(a("a"))),
        );
        assert_eq!(got, want);
    }

    #[test]
    fn expand_bounded_zero_collapses() {
        assert_eq!(expand_sugar(&Formula::bounded(0, a("a"))), a("a"));
    }

    #[test]
    fn expand_always() {
        let got = expand_sugar(&Formula::always(a("d")));
        let want = Formula::not(Formula::until(Formula::True, Formula::not(a("d"))));
        assert_eq!(got, want);
    }

    fn is_core(f: &Formula) -> bool {
        match f {
            Formula::True | Formula::Atom(_) => true,
            Formula::Not(g) | Formula::Next(g) => is_core(g),
            Formula::And(x, y) | Formula::Until(x, y) => is_core(x) && is_core(y),
            _ => false,
        }
    }

    #[test]
    fn expansion_uses_core_connectives_only() {
        let f = parse_ltl("G F b & G F c & F G d | F<=3 (a U X b)").unwrap();
        assert!(is_core(&expand_sugar(&f)));
    }

    #[test]
    fn atoms_collected() {
        let f = parse_ltl("F (anomaly & X F<=1 attack)").unwrap();
        let got: Vec<_> = f.atoms().into_iter().collect();
        assert_eq!(got, vec!["anomaly".to_string(), "attack".to_string()]);
    }
}
