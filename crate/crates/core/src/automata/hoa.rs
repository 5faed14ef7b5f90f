//! Reader and writer for the subset of HOA v1 describing complete,
//! deterministic, state-based Rabin automata with explicit edge labels.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{AutomataError, Dra, RabinPair, MAX_AP};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Header(String),
    Ident(String),
    Str(String),
    Int(usize),
    Punct(char),
    Body,
    End,
}

fn malformed(line: usize, msg: impl Into<String>) -> AutomataError {
    AutomataError::Malformed {
        line,
        msg: msg.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, AutomataError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut line = 1;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                if chars[i] == '\n' {
                    line += 1;
                }
                i += 1;
            }
            if i >= chars.len() {
                return Err(malformed(line, "unterminated comment"));
            }
            i += 2;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(malformed(line, "unterminated string")),
                    Some('"') => break,
                    Some('\\') => {
                        if let Some(&e) = chars.get(i + 1) {
                            s.push(e);
                        }
                        i += 2;
                    }
                    Some(&ch) => {
                        if ch == '\n' {
                            line += 1;
                        }
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push((line, Tok::Str(s)));
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| malformed(line, "integer overflow"))?;
            out.push((line, Tok::Int(n)));
        } else if c == '-' && chars[i..].starts_with(&['-', '-', 'B', 'O', 'D', 'Y', '-', '-']) {
            out.push((line, Tok::Body));
            i += 8;
        } else if c == '-' && chars[i..].starts_with(&['-', '-', 'E', 'N', 'D', '-', '-']) {
            out.push((line, Tok::End));
            i += 7;
        } else if c.is_ascii_alphabetic() || c == '_' || c == '@' {
            let start = i;
            i += 1;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '-')
            {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if chars.get(i) == Some(&':') {
                i += 1;
                out.push((line, Tok::Header(word)));
            } else {
                out.push((line, Tok::Ident(word)));
            }
        } else if "()[]{}!&|".contains(c) {
            out.push((line, Tok::Punct(c)));
            i += 1;
        } else {
            return Err(malformed(line, format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

/// Boolean expression over proposition indices or acceptance atoms.
#[derive(Debug, Clone)]
enum Expr {
    Const(bool),
    Var(usize),
    Fin(usize),
    Inf(usize),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

impl Expr {
    fn eval_label(&self, bits: usize) -> bool {
        match self {
            Expr::Const(b) => *b,
            Expr::Var(i) => bits & (1 << i) != 0,
            Expr::Not(e) => !e.eval_label(bits),
            Expr::And(es) => es.iter().all(|e| e.eval_label(bits)),
            Expr::Or(es) => es.iter().any(|e| e.eval_label(bits)),
            Expr::Fin(_) | Expr::Inf(_) => false,
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::Not(e) => e.max_var(),
            Expr::And(es) | Expr::Or(es) => es.iter().filter_map(Expr::max_var).max(),
            _ => None,
        }
    }
}

struct Cursor {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(l, _)| *l)
            .unwrap_or(1)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect_punct(&mut self, c: char) -> Result<(), AutomataError> {
        match self.bump() {
            Some(Tok::Punct(p)) if p == c => Ok(()),
            other => Err(malformed(self.line(), format!("expected `{c}`, found {other:?}"))),
        }
    }

    fn int(&mut self) -> Result<usize, AutomataError> {
        match self.bump() {
            Some(Tok::Int(n)) => Ok(n),
            other => Err(malformed(self.line(), format!("expected integer, found {other:?}"))),
        }
    }

    fn int_set(&mut self) -> Result<BTreeSet<usize>, AutomataError> {
        self.expect_punct('{')?;
        let mut out = BTreeSet::new();
        loop {
            match self.bump() {
                Some(Tok::Int(n)) => {
                    out.insert(n);
                }
                Some(Tok::Punct('}')) => return Ok(out),
                other => {
                    return Err(malformed(self.line(), format!("bad set element {other:?}")))
                }
            }
        }
    }

    // or := and ('|' and)*; and := atom ('&' atom)*; atom := !atom | (or) | t | f | int | Fin(n) | Inf(n)
    fn expr(&mut self, acceptance: bool) -> Result<Expr, AutomataError> {
        let mut terms = vec![self.conj(acceptance)?];
        while self.peek() == Some(&Tok::Punct('|')) {
            self.bump();
            terms.push(self.conj(acceptance)?);
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Or(terms) })
    }

    fn conj(&mut self, acceptance: bool) -> Result<Expr, AutomataError> {
        let mut terms = vec![self.atom(acceptance)?];
        while self.peek() == Some(&Tok::Punct('&')) {
            self.bump();
            terms.push(self.atom(acceptance)?);
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::And(terms) })
    }

    fn atom(&mut self, acceptance: bool) -> Result<Expr, AutomataError> {
        let line = self.line();
        match self.bump() {
            Some(Tok::Punct('!')) => Ok(Expr::Not(Box::new(self.atom(acceptance)?))),
            Some(Tok::Punct('(')) => {
                let e = self.expr(acceptance)?;
                self.expect_punct(')')?;
                Ok(e)
            }
            Some(Tok::Ident(w)) if w == "t" => Ok(Expr::Const(true)),
            Some(Tok::Ident(w)) if w == "f" => Ok(Expr::Const(false)),
            Some(Tok::Int(n)) if !acceptance => Ok(Expr::Var(n)),
            Some(Tok::Ident(w)) if acceptance && (w == "Fin" || w == "Inf") => {
                self.expect_punct('(')?;
                if self.peek() == Some(&Tok::Punct('!')) {
                    return Err(AutomataError::NonRabin("complemented acceptance set".into()));
                }
                let n = self.int()?;
                self.expect_punct(')')?;
                Ok(if w == "Fin" { Expr::Fin(n) } else { Expr::Inf(n) })
            }
            other => Err(malformed(line, format!("unexpected {other:?} in expression"))),
        }
    }
}

// Accepts `(Fin(i) & Inf(j)) | ...` in either conjunct order.
fn rabin_pairs(e: &Expr) -> Result<Vec<(usize, usize)>, AutomataError> {
    let disjuncts: Vec<&Expr> = match e {
        Expr::Or(es) => es.iter().collect(),
        other => vec![other],
    };
    disjuncts
        .into_iter()
        .map(|d| match d {
            Expr::And(es) if es.len() == 2 => match (&es[0], &es[1]) {
                (Expr::Fin(f), Expr::Inf(i)) | (Expr::Inf(i), Expr::Fin(f)) => Ok((*f, *i)),
                _ => Err(AutomataError::NonRabin(format!("{d:?}"))),
            },
            _ => Err(AutomataError::NonRabin(format!("{d:?}"))),
        })
        .collect()
}

/// Parses a HOA v1 document into a [`Dra`]. Acceptance set `Fin(i)` of a
/// pair becomes its `fin` set and `Inf(j)` its `inf` set.
pub fn parse_hoa(text: &str) -> Result<Dra, AutomataError> {
    let mut cur = Cursor {
        toks: lex(text)?,
        pos: 0,
    };
    match (cur.bump(), cur.bump()) {
        (Some(Tok::Header(h)), Some(Tok::Ident(v))) if h == "HOA" && v == "v1" => {}
        _ => return Err(malformed(1, "document must start with `HOA: v1`")),
    }
    let mut states: Option<usize> = None;
    let mut start: Option<usize> = None;
    let mut ap: Option<Vec<String>> = None;
    let mut acc: Option<(usize, Vec<(usize, usize)>)> = None;
    let mut acc_name: Option<Vec<Tok>> = None;
    loop {
        let line = cur.line();
        match cur.bump() {
            Some(Tok::Body) => break,
            Some(Tok::Header(h)) => match h.as_str() {
                "States" => states = Some(cur.int()?),
                "Start" => {
                    if start.is_some() {
                        return Err(AutomataError::Invalid("multiple initial states".into()));
                    }
                    start = Some(cur.int()?);
                    if cur.peek() == Some(&Tok::Punct('&')) {
                        return Err(AutomataError::Invalid("alternating initial state".into()));
                    }
                }
                "AP" => {
                    let n = cur.int()?;
                    let mut names = Vec::with_capacity(n);
                    for _ in 0..n {
                        match cur.bump() {
                            Some(Tok::Str(s)) => names.push(s),
                            other => {
                                return Err(malformed(line, format!("expected AP name, found {other:?}")))
                            }
                        }
                    }
                    if n > MAX_AP {
                        return Err(AutomataError::ApTooLarge(n));
                    }
                    ap = Some(names);
                }
                "Acceptance" => {
                    let n = cur.int()?;
                    let e = cur.expr(true)?;
                    acc = Some((n, rabin_pairs(&e)?));
                }
                "acc-name" => {
                    let mut args = Vec::new();
                    while let Some(Tok::Ident(_) | Tok::Int(_)) = cur.peek() {
                        args.push(cur.bump().unwrap());
                    }
                    acc_name = Some(args);
                }
                _ => {
                    while let Some(t) = cur.peek() {
                        if matches!(t, Tok::Header(_) | Tok::Body) {
                            break;
                        }
                        cur.bump();
                    }
                }
            },
            other => return Err(malformed(line, format!("unexpected {other:?} in header"))),
        }
    }
    let n = states.ok_or_else(|| malformed(1, "missing States header"))?;
    let q0 = start.ok_or_else(|| AutomataError::Invalid("missing Start header".into()))?;
    let ap = ap.ok_or_else(|| malformed(1, "missing AP header"))?;
    let (num_sets, pairs) = acc.ok_or_else(|| malformed(1, "missing Acceptance header"))?;
    if let Some(args) = acc_name {
        match args.as_slice() {
            [Tok::Ident(name), Tok::Int(k)] if name == "Rabin" => {
                if *k != pairs.len() {
                    return Err(AutomataError::NonRabin(format!(
                        "acc-name declares {k} pairs, acceptance has {}",
                        pairs.len()
                    )));
                }
            }
            other => return Err(AutomataError::NonRabin(format!("acc-name {other:?}"))),
        }
    }
    if pairs.iter().any(|&(f, i)| f >= num_sets || i >= num_sets) {
        return Err(malformed(1, "acceptance references undeclared set"));
    }

    let width = 1usize << ap.len();
    let mut delta: Vec<Option<Vec<Option<usize>>>> = vec![None; n];
    let mut membership: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut current: Option<usize> = None;
    loop {
        let line = cur.line();
        match cur.bump() {
            Some(Tok::End) => break,
            None => return Err(malformed(line, "missing --END--")),
            Some(Tok::Header(h)) if h == "State" => {
                let q = cur.int()?;
                if q >= n {
                    return Err(malformed(line, format!("state {q} out of range")));
                }
                if delta[q].is_some() {
                    return Err(malformed(line, format!("state {q} declared twice")));
                }
                if let Some(Tok::Str(_)) = cur.peek() {
                    cur.bump();
                }
                if cur.peek() == Some(&Tok::Punct('{')) {
                    membership[q] = cur.int_set()?;
                }
                delta[q] = Some(vec![None; width]);
                current = Some(q);
            }
            Some(Tok::Punct('[')) => {
                let q = current.ok_or_else(|| malformed(line, "edge before State"))?;
                let label = cur.expr(false)?;
                cur.expect_punct(']')?;
                if label.max_var().is_some_and(|v| v >= ap.len()) {
                    return Err(malformed(line, "label references undeclared proposition"));
                }
                let t = cur.int()?;
                if t >= n {
                    return Err(malformed(line, format!("edge target {t} out of range")));
                }
                if cur.peek() == Some(&Tok::Punct('&')) {
                    return Err(AutomataError::Invalid("universal branching".into()));
                }
                if cur.peek() == Some(&Tok::Punct('{')) {
                    return Err(AutomataError::TransitionAcceptance { state: q });
                }
                let row = delta[q].as_mut().unwrap();
                for (bits, slot) in row.iter_mut().enumerate() {
                    if label.eval_label(bits) {
                        // Overlapping guards are rejected even when they agree.
                        if slot.is_some() {
                            return Err(AutomataError::NonDeterministic {
                                state: q,
                                label: bits as u32,
                            });
                        }
                        *slot = Some(t);
                    }
                }
            }
            Some(Tok::Int(_)) => {
                return Err(malformed(line, "implicit edge labels are not supported"));
            }
            other => return Err(malformed(line, format!("unexpected {other:?} in body"))),
        }
    }
    let mut table = Vec::with_capacity(n);
    for (q, row) in delta.into_iter().enumerate() {
        let row = row.ok_or_else(|| malformed(1, format!("state {q} not declared")))?;
        let row = row
            .into_iter()
            .enumerate()
            .map(|(bits, t)| {
                t.ok_or(AutomataError::Incomplete {
                    state: q,
                    label: bits as u32,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        table.push(row);
    }
    let pairs = pairs
        .into_iter()
        .map(|(f, i)| RabinPair {
            fin: (0..n).filter(|q| membership[*q].contains(&f)).collect(),
            inf: (0..n).filter(|q| membership[*q].contains(&i)).collect(),
        })
        .collect();
    Dra::new(ap, table, q0, pairs)
}

fn cube(bits: usize, n: usize) -> String {
    (0..n)
        .map(|i| {
            if bits & (1 << i) != 0 {
                format!("{i}")
            } else {
                format!("!{i}")
            }
        })
        .collect::<Vec<_>>()
        .join("&")
}

/// Writes a [`Dra`] as HOA v1. Pair `i` uses sets `Fin(2i)` and `Inf(2i+1)`;
/// each state has one edge per distinct target with a disjunction of full
/// minterms as label.
pub fn write_hoa(a: &Dra) -> String {
    let mut out = String::new();
    let k = a.pairs().len();
    let n_ap = a.ap().len();
    writeln!(out, "HOA: v1").unwrap();
    writeln!(out, "States: {}", a.num_states()).unwrap();
    writeln!(out, "Start: {}", a.initial()).unwrap();
    let names: Vec<String> = a.ap().iter().map(|s| format!("\"{s}\"")).collect();
    if names.is_empty() {
        writeln!(out, "AP: 0").unwrap();
    } else {
        writeln!(out, "AP: {} {}", n_ap, names.join(" ")).unwrap();
    }
    writeln!(out, "acc-name: Rabin {k}").unwrap();
    let cond: Vec<String> = (0..k)
        .map(|i| format!("(Fin({})&Inf({}))", 2 * i, 2 * i + 1))
        .collect();
    writeln!(out, "Acceptance: {} {}", 2 * k, cond.join(" | ")).unwrap();
    writeln!(
        out,
        "properties: trans-labels explicit-labels state-acc deterministic complete"
    )
    .unwrap();
    writeln!(out, "--BODY--").unwrap();
    for q in 0..a.num_states() {
        let sets: Vec<String> = a
            .pairs()
            .iter()
            .enumerate()
            .flat_map(|(i, p)| {
                let mut v = Vec::new();
                if p.fin.contains(&q) {
                    v.push(format!("{}", 2 * i));
                }
                if p.inf.contains(&q) {
                    v.push(format!("{}", 2 * i + 1));
                }
                v
            })
            .collect();
        if sets.is_empty() {
            writeln!(out, "State: {q}").unwrap();
        } else {
            writeln!(out, "State: {q} {{{}}}", sets.join(" ")).unwrap();
        }
        let row = &a.transitions()[q];
        let targets: BTreeSet<usize> = row.iter().copied().collect();
        for t in targets {
            let minterms: Vec<usize> = (0..row.len()).filter(|&b| row[b] == t).collect();
            let label = if minterms.len() == row.len() {
                "t".to_string()
            } else {
                minterms
                    .iter()
                    .map(|&b| format!("({})", cube(b, n_ap)))
                    .collect::<Vec<_>>()
                    .join(" | ")
            };
            writeln!(out, "[{label}] {t}").unwrap();
        }
    }
    writeln!(out, "--END--").unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{is_isomorphic, translate_reachability};
    use crate::ltl::parse_ltl;

    const ACCEPT_ALL: &str = r#"HOA: v1
States: 1
Start: 0
AP: 1 "a"
acc-name: Rabin 1
Acceptance: 2 Fin(1) & Inf(0)
--BODY--
State: 0 {0}
[t] 0
--END--
"#;

    #[test]
    fn trivial_accept_all() {
        let a = parse_hoa(ACCEPT_ALL).unwrap();
        assert_eq!(a.num_states(), 1);
        assert!(a.pairs()[0].fin.is_empty());
        assert_eq!(a.pairs()[0].inf, BTreeSet::from([0]));
        assert!(is_isomorphic(&a, &parse_hoa(&write_hoa(&a)).unwrap()));
    }

    #[test]
    fn nondeterminism_rejected() {
        let doc = r#"HOA: v1
States: 2
Start: 0
AP: 1 "a"
Acceptance: 2 Fin(0) & Inf(1)
--BODY--
State: 0
[0] 0
[0] 1
[!0] 0
State: 1 {1}
[t] 1
--END--
"#;
        assert_eq!(
            parse_hoa(doc).unwrap_err(),
            AutomataError::NonDeterministic { state: 0, label: 1 }
        );
    }

    #[test]
    fn incomplete_rejected() {
        let doc = ACCEPT_ALL.replace("[t] 0", "[0] 0");
        assert_eq!(
            parse_hoa(&doc).unwrap_err(),
            AutomataError::Incomplete { state: 0, label: 0 }
        );
    }

    #[test]
    fn transition_acceptance_rejected() {
        let doc = ACCEPT_ALL.replace("[t] 0", "[t] 0 {0}");
        assert_eq!(
            parse_hoa(&doc).unwrap_err(),
            AutomataError::TransitionAcceptance { state: 0 }
        );
    }

    #[test]
    fn non_rabin_rejected() {
        let doc = ACCEPT_ALL.replace("Acceptance: 2 Fin(1) & Inf(0)", "Acceptance: 1 Inf(0)");
        let doc = doc.replace("acc-name: Rabin 1\n", "acc-name: Buchi\n");
        assert!(matches!(parse_hoa(&doc), Err(AutomataError::NonRabin(_))));
        let doc = ACCEPT_ALL.replace("Acceptance: 2 Fin(1) & Inf(0)", "Acceptance: 1 Inf(0)");
        assert!(matches!(parse_hoa(&doc), Err(AutomataError::NonRabin(_))));
        let doc = ACCEPT_ALL.replace("acc-name: Rabin 1", "acc-name: parity min even 2");
        assert!(matches!(parse_hoa(&doc), Err(AutomataError::NonRabin(_))));
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(parse_hoa("HOA: v2"), Err(AutomataError::Malformed { .. })));
        assert!(matches!(
            parse_hoa(&ACCEPT_ALL.replace("--END--", "")),
            Err(AutomataError::Malformed { .. })
        ));
        assert!(matches!(
            parse_hoa(&ACCEPT_ALL.replace("[t] 0", "[t] 3")),
            Err(AutomataError::Malformed { .. })
        ));
        assert!(matches!(
            parse_hoa(&ACCEPT_ALL.replace("[t] 0", "0")),
            Err(AutomataError::Malformed { .. })
        ));
    }

    #[test]
    fn comments_and_names_ignored() {
        let doc = ACCEPT_ALL
            .replace("States: 1", "/* c */ States: 1\nname: \"x\"\ntool: \"hand\"")
            .replace("State: 0 {0}", "State: 0 \"only\" {0}");
        assert!(parse_hoa(&doc).is_ok());
    }

    #[test]
    fn two_pair_round_trip() {
        let a = crate::automata::dra_union(
            &translate_reachability(&parse_ltl("F a").unwrap()).unwrap(),
            &translate_reachability(&parse_ltl("X b").unwrap()).unwrap(),
        )
        .unwrap();
        let b = parse_hoa(&write_hoa(&a)).unwrap();
        assert_eq!(b.pairs().len(), 2);
        assert!(is_isomorphic(&a, &b));
    }
}
