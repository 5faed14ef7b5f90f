use super::{Formula, LtlError};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    True,
    False,
    Not,
    And,
    Or,
    Next,
    Finally,
    Globally,
    Until,
    Bounded(u32),
    LParen,
    RParen,
    Ident(String),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, LtlError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '!' => {
                out.push((start, Tok::Not));
                i += 1;
            }
            '&' => {
                out.push((start, Tok::And));
                i += 1;
            }
            '|' => {
                out.push((start, Tok::Or));
                i += 1;
            }
            '(' => {
                out.push((start, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((start, Tok::RParen));
                i += 1;
            }
            'X' => {
                out.push((start, Tok::Next));
                i += 1;
            }
            'G' => {
                out.push((start, Tok::Globally));
                i += 1;
            }
            'U' => {
                out.push((start, Tok::Until));
                i += 1;
            }
            'F' => {
                i += 1;
                let mut j = i;
                while j < chars.len() && chars[j].is_whitespace() {
                    j += 1;
                }
                if j + 1 < chars.len() && chars[j] == '<' && chars[j + 1] == '=' {
                    j += 2;
                    while j < chars.len() && chars[j].is_whitespace() {
                        j += 1;
                    }
                    let num_start = j;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    if num_start == j {
                        return Err(LtlError::BadBound { pos: num_start });
                    }
                    let digits: String = chars[num_start..j].iter().collect();
                    let k = digits
                        .parse::<u32>()
                        .map_err(|_| LtlError::BadBound { pos: num_start })?;
                    out.push((start, Tok::Bounded(k)));
                    i = j;
                } else if j < chars.len() && chars[j] == '<' {
                    return Err(LtlError::Syntax {
                        pos: j,
                        msg: "expected `<=` after `F`".into(),
                    });
                } else {
                    out.push((start, Tok::Finally));
                }
            }
            c if c.is_ascii_lowercase() => {
                let mut j = i;
                while j < chars.len()
                    && (chars[j].is_ascii_lowercase() || chars[j].is_ascii_digit() || chars[j] == '_')
                {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let tok = match word.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(word),
                };
                out.push((start, tok));
                i = j;
            }
            other => return Err(LtlError::UnknownToken { pos: start, found: other }),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn or(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.until()?;
        while self.peek() == Some(&Tok::And) {
            self.bump();
            let rhs = self.until()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.unary()?;
        if self.peek() == Some(&Tok::Until) {
            self.bump();
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LtlError> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Not) => Ok(Formula::not(self.unary()?)),
            Some(Tok::Next) => Ok(Formula::next(self.unary()?)),
            Some(Tok::Finally) => Ok(Formula::eventually(self.unary()?)),
            Some(Tok::Globally) => Ok(Formula::always(self.unary()?)),
            Some(Tok::Bounded(k)) => Ok(Formula::bounded(k, self.unary()?)),
            Some(Tok::True) => Ok(Formula::True),
            Some(Tok::False) => Ok(Formula::falsum()),
            Some(Tok::Ident(name)) => Ok(Formula::Atom(name)),
            Some(Tok::LParen) => {
                let inner = self.or()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(LtlError::Syntax {
                        pos: self.toks.get(self.pos - 1).map(|(p, _)| *p).unwrap_or(self.end),
                        msg: "expected `)`".into(),
                    }),
                }
            }
            Some(t) => Err(LtlError::Syntax {
                pos: at,
                msg: format!("unexpected {t:?}"),
            }),
            None => Err(LtlError::Syntax {
                pos: at,
                msg: "unexpected end of input".into(),
            }),
        }
    }
}

/// Parses a formula in the text syntax described in the module docs.
pub fn parse_ltl(text: &str) -> Result<Formula, LtlError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
    };
    let f = p.or()?;
    if p.pos < p.toks.len() {
        return Err(LtlError::Syntax {
            pos: p.offset(),
            msg: "trailing input".into(),
        });
    }
    Ok(f)
}
