//! Recursive-descent parser for the formula text syntax.
//!
//! ```text
//! iff     := implies ( "<->" iff )?
//! implies := or ( "->" implies )?
//! or      := and ( "|" and )*
//! and     := unary ( "&" unary )*
//! unary   := "~" unary | modal unary | atom
//! modal   := ("L" | "M") ("_" agent)? "[" rational "]" | "K" ("_" agent)?
//! atom    := "p" digits | "true" | "false" | "(" iff ")"
//! ```

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::{AgentId, Formula, ProbIndex};
use crate::exactnum::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    BadLetter,
    BadAgent,
    BadIndex(String),
    IndexOutOfRange(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character `{c}`"),
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected `{t}`"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::BadLetter => write!(f, "letters are `p` followed by a positive integer"),
            ParseErrorKind::BadAgent => write!(f, "agent subscripts are positive integers"),
            ParseErrorKind::BadIndex(s) => write!(f, "malformed index `{s}`"),
            ParseErrorKind::IndexOutOfRange(s) => write!(f, "index out of range: {s} is not in [0, 1]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Letter(u32),
    Top,
    Bottom,
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    L(AgentId, ProbIndex),
    M(AgentId, ProbIndex),
    K(AgentId),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Letter(p) => write!(f, "p{p}"),
            Tok::Top => write!(f, "true"),
            Tok::Bottom => write!(f, "false"),
            Tok::Not => write!(f, "~"),
            Tok::And => write!(f, "&"),
            Tok::Or => write!(f, "|"),
            Tok::Implies => write!(f, "->"),
            Tok::Iff => write!(f, "<->"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::L(a, r) => write!(f, "L_{a}[{r}]"),
            Tok::M(a, r) => write!(f, "M_{a}[{r}]"),
            Tok::K(a) => write!(f, "K_{a}"),
        }
    }
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            _src: src,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, line: usize, column: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { line, column, kind }
    }

    fn digits(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.bump();
        }
        s
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(|c| c.is_ascii_alphanumeric()) {
            s.push(c);
            self.bump();
        }
        s
    }

    fn agent(&mut self) -> Result<AgentId, ParseError> {
        if self.peek() != Some('_') {
            return Ok(1);
        }
        let (line, col) = (self.line, self.col);
        self.bump();
        match self.digits().parse::<AgentId>() {
            Ok(a) if a > 0 => Ok(a),
            _ => Err(self.err(line, col, ParseErrorKind::BadAgent)),
        }
    }

    fn index(&mut self) -> Result<ProbIndex, ParseError> {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
        let (line, col) = (self.line, self.col);
        if self.peek() != Some('[') {
            return Err(match self.peek() {
                Some(c) => self.err(line, col, ParseErrorKind::UnexpectedChar(c)),
                None => self.err(line, col, ParseErrorKind::UnexpectedEnd),
            });
        }
        self.bump();
        let mut body = String::new();
        loop {
            match self.bump() {
                Some(']') => break,
                Some(c) => body.push(c),
                None => return Err(self.err(self.line, self.col, ParseErrorKind::UnexpectedEnd)),
            }
        }
        let bad = || ParseError {
            line,
            column: col,
            kind: ParseErrorKind::BadIndex(body.clone()),
        };
        let (n, d) = match body.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (body.trim(), "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        ProbIndex::new(Rational::new(n, d)).map_err(|e| ParseError {
            line,
            column: col,
            kind: ParseErrorKind::IndexOutOfRange(e.0),
        })
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        while let Some(c) = self.peek() {
            let (line, col) = (self.line, self.col);
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            let tok = match c {
                '~' | '!' | '¬' => {
                    self.bump();
                    Tok::Not
                }
                '&' | '∧' => {
                    self.bump();
                    Tok::And
                }
                '|' | '∨' => {
                    self.bump();
                    Tok::Or
                }
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                '-' => {
                    self.bump();
                    if self.peek() == Some('>') {
                        self.bump();
                        Tok::Implies
                    } else {
                        return Err(self.err(line, col, ParseErrorKind::UnexpectedChar('-')));
                    }
                }
                '<' => {
                    self.bump();
                    if self.bump() == Some('-') && self.bump() == Some('>') {
                        Tok::Iff
                    } else {
                        return Err(self.err(line, col, ParseErrorKind::UnexpectedChar('<')));
                    }
                }
                'L' | 'M' => {
                    self.bump();
                    let agent = self.agent()?;
                    let r = self.index()?;
                    if c == 'L' {
                        Tok::L(agent, r)
                    } else {
                        Tok::M(agent, r)
                    }
                }
                'K' => {
                    self.bump();
                    Tok::K(self.agent()?)
                }
                'p' => {
                    self.bump();
                    let d = self.digits();
                    if self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
                        return Err(self.err(line, col, ParseErrorKind::BadLetter));
                    }
                    match d.parse::<u32>() {
                        Ok(id) if id > 0 => Tok::Letter(id),
                        _ => return Err(self.err(line, col, ParseErrorKind::BadLetter)),
                    }
                }
                c if c.is_ascii_alphabetic() => match self.word().as_str() {
                    "true" => Tok::Top,
                    "false" => Tok::Bottom,
                    _ => return Err(self.err(line, col, ParseErrorKind::UnexpectedChar(c))),
                },
                other => return Err(self.err(line, col, ParseErrorKind::UnexpectedChar(other))),
            };
            out.push((tok, line, col));
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self) -> ParseError {
        match self.toks.get(self.pos) {
            Some((t, line, column)) => ParseError {
                line: *line,
                column: *column,
                kind: ParseErrorKind::UnexpectedToken(t.to_string()),
            },
            None => ParseError {
                line: self.end.0,
                column: self.end.1,
                kind: ParseErrorKind::UnexpectedEnd,
            },
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.implies()?;
        if self.eat(&Tok::Iff) {
            Ok(lhs.iff(self.iff()?))
        } else {
            Ok(lhs)
        }
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            Ok(lhs.implies(self.implies()?))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            lhs = lhs.or(self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            lhs = lhs.and(self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.unexpected());
        };
        match tok {
            Tok::Not => {
                self.pos += 1;
                Ok(self.unary()?.not())
            }
            Tok::L(agent, r) => {
                self.pos += 1;
                Ok(Formula::l_of(agent, r, self.unary()?))
            }
            Tok::M(agent, r) => {
                self.pos += 1;
                Ok(Formula::m_of(agent, r, self.unary()?))
            }
            Tok::K(agent) => {
                self.pos += 1;
                Ok(Formula::k(agent, self.unary()?))
            }
            Tok::Letter(p) => {
                self.pos += 1;
                Ok(Formula::Letter(p))
            }
            Tok::Top => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Tok::Bottom => {
                self.pos += 1;
                Ok(Formula::Bottom)
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.iff()?;
                if self.eat(&Tok::RParen) {
                    Ok(inner)
                } else {
                    Err(self.unexpected())
                }
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Parses formula text. `M` nodes are kept; see [`Formula::desugar_m`].
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let lexer = Lexer::new(text);
    let toks = lexer.tokens()?;
    let end = {
        let mut l = Lexer::new(text);
        while l.bump().is_some() {}
        (l.line, l.col)
    };
    let mut p = Parser { toks, pos: 0, end };
    let f = p.iff()?;
    if p.pos != p.toks.len() {
        return Err(p.unexpected());
    }
    Ok(f)
}
