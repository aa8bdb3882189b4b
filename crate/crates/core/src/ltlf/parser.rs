//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! formula  := implies
//! implies  := or ( "->" implies )?
//! or       := and ( "|" and )*
//! and      := until ( "&" until )*
//! until    := unary ( ("U" | "R") until )?
//! unary    := ("!" | "G" | "F" | "X" | "N") unary | primary
//! primary  := "true" | "false" | atom | "(" formula ")"
//! atom     := ident ( "#" (ident | digits) )?
//! ```
//!
//! `N` is the weak next operator. The single uppercase letters `G F X N U R`
//! are reserved and cannot be used as proposition names.

use thiserror::Error;

use super::formula::{Atom, Formula, Slot};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("formula `{formula}` is outside the obligation fragment: {reason}")]
    Fragment { formula: String, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Hash,
    Not,
    And,
    Or,
    Arrow,
    LParen,
    RParen,
}

struct Lexer;

impl Lexer {
    fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
        let bytes = text.as_bytes();
        let mut out = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            match c {
                ' ' | '\t' | '\n' | '\r' => i += 1,
                '(' => {
                    out.push((i, Tok::LParen));
                    i += 1;
                }
                ')' => {
                    out.push((i, Tok::RParen));
                    i += 1;
                }
                '!' => {
                    out.push((i, Tok::Not));
                    i += 1;
                }
                '&' => {
                    out.push((i, Tok::And));
                    i += 1;
                }
                '|' => {
                    out.push((i, Tok::Or));
                    i += 1;
                }
                '#' => {
                    out.push((i, Tok::Hash));
                    i += 1;
                }
                '-' if bytes.get(i + 1) == Some(&b'>') => {
                    out.push((i, Tok::Arrow));
                    i += 2;
                }
                c if c.is_ascii_alphanumeric() || c == '_' => {
                    let start = i;
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                    {
                        i += 1;
                    }
                    out.push((start, Tok::Ident(text[start..i].to_string())));
                }
                other => {
                    return Err(ParseError::Syntax {
                        pos: i,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

const UNARY_OPS: [&str; 4] = ["G", "F", "X", "N"];
const BINARY_OPS: [&str; 2] = ["U", "R"];

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.offset(),
            message: message.into(),
        })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.and()?];
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            items.push(self.and()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::Or(items)
        })
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.until()?];
        while self.peek() == Some(&Tok::And) {
            self.bump();
            items.push(self.until()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::And(items)
        })
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if let Some(Tok::Ident(op)) = self.peek() {
            if BINARY_OPS.contains(&op.as_str()) {
                let op = op.clone();
                self.bump();
                let rhs = self.until()?;
                return Ok(if op == "U" {
                    Formula::until(lhs, rhs)
                } else {
                    Formula::release(lhs, rhs)
                });
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Ident(op)) if UNARY_OPS.contains(&op.as_str()) => {
                let op = op.clone();
                self.bump();
                let inner = self.unary()?;
                Ok(match op.as_str() {
                    "G" => Formula::globally(inner),
                    "F" => Formula::finally(inner),
                    "X" => Formula::next(inner),
                    _ => Formula::weak_next(inner),
                })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.bump();
                let f = self.implies()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                self.bump();
                Ok(f)
            }
            Some(Tok::Ident(name)) => {
                if BINARY_OPS.contains(&name.as_str()) {
                    return self.err(format!("operator `{name}` needs a left operand"));
                }
                if name.starts_with(|c: char| c.is_ascii_digit()) {
                    return self.err(format!("proposition `{name}` must not start with a digit"));
                }
                self.bump();
                match name.as_str() {
                    "true" => return Ok(Formula::True),
                    "false" => return Ok(Formula::False),
                    _ => {}
                }
                let slot = if self.peek() == Some(&Tok::Hash) {
                    self.bump();
                    match self.bump() {
                        Some(Tok::Ident(s)) if s.chars().all(|c| c.is_ascii_digit()) => {
                            let id = s.parse().map_err(|_| ParseError::Syntax {
                                pos: self.toks[self.pos - 1].0,
                                message: format!("agent id `{s}` out of range"),
                            })?;
                            Some(Slot::Agent(id))
                        }
                        Some(Tok::Ident(s)) => Some(Slot::Var(s)),
                        _ => {
                            self.pos -= 1;
                            return self.err("expected agent slot after `#`");
                        }
                    }
                } else {
                    None
                };
                Ok(Formula::Atom(Atom { name, slot }))
            }
            Some(_) => self.err("expected a proposition, constant or `(`"),
            None => self.err("unexpected end of formula"),
        }
    }
}

/// Parses a formula of the full grammar without canonicalizing it.
pub fn parse_raw(text: &str) -> Result<Formula, ParseError> {
    let toks = Lexer::tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let f = p.implies()?;
    if p.pos < p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

/// Parses and canonicalizes a formula of the full grammar.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    Ok(parse_raw(text)?.canonicalize())
}

/// Parses a rule formula: canonicalized and restricted to `G p` / `F p` with
/// `p` built from propositions, boolean connectives and next operators.
pub fn parse_ltlf(text: &str) -> Result<Formula, ParseError> {
    let f = parse_formula(text)?;
    check_obligation(&f)?;
    Ok(f)
}

/// Verifies that a canonical formula belongs to the obligation fragment.
pub fn check_obligation(f: &Formula) -> Result<(), ParseError> {
    let fail = |reason: &str| ParseError::Fragment {
        formula: f.to_string(),
        reason: reason.to_string(),
    };
    match f {
        Formula::Globally(p) | Formula::Finally(p) => {
            if is_next_only(p) {
                Ok(())
            } else {
                Err(fail(
                    "the body may only use propositions, boolean connectives and X",
                ))
            }
        }
        _ => Err(fail("top level must be `G p` or `F p`")),
    }
}

fn is_next_only(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => true,
        Formula::Not(g) | Formula::Next(g) | Formula::WeakNext(g) => is_next_only(g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().all(is_next_only),
        Formula::Implies(a, b) => is_next_only(a) && is_next_only(b),
        Formula::Until(..) | Formula::Release(..) | Formula::Globally(_) | Formula::Finally(_) => {
            false
        }
    }
}
