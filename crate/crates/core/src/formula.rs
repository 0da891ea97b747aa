//! Propositional formulas over named variables.
//!
//! Used for feature-model validity constraints, guards, and boolean fault
//! expressions. The grammar is the usual one with `!`, `&`, `|`, `->` and
//! `<->` in decreasing binding strength, plus `true`/`false` and parentheses.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    Var(String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("formula syntax error at offset {offset}: {message}")]
pub struct FormulaError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, FormulaError> {
    let mut tokens = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'!' | b'~' => {
                tokens.push((start, Token::Not));
                i += 1;
            }
            b'&' => {
                i += if bytes.get(i + 1) == Some(&b'&') { 2 } else { 1 };
                tokens.push((start, Token::And));
            }
            b'|' => {
                i += if bytes.get(i + 1) == Some(&b'|') { 2 } else { 1 };
                tokens.push((start, Token::Or));
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                tokens.push((start, Token::Implies));
                i += 2;
            }
            b'<' if text[i..].starts_with("<->") => {
                tokens.push((start, Token::Iff));
                i += 3;
            }
            b'(' => {
                tokens.push((start, Token::LParen));
                i += 1;
            }
            b')' => {
                tokens.push((start, Token::RParen));
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && is_ident_byte(bytes[i]) {
                    i += 1;
                }
                tokens.push((start, Token::Ident(text[start..i].to_string())));
            }
            _ => {
                return Err(FormulaError {
                    offset: start,
                    message: format!("unexpected character {:?}", text[start..].chars().next().unwrap()),
                })
            }
        }
    }
    Ok(tokens)
}

pub(crate) fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'.'
}

/// Returns whether `name` can be used as a variable name in a formula.
pub fn is_identifier(name: &str) -> bool {
    let bytes = name.as_bytes();
    !bytes.is_empty()
        && (bytes[0].is_ascii_alphabetic() || bytes[0] == b'_')
        && bytes.iter().all(|&b| is_ident_byte(b))
        && name != "true"
        && name != "false"
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn iff(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.implies()?;
        if self.peek() == Some(&Token::Iff) {
            self.pos += 1;
            let rhs = self.iff()?;
            return Ok(Formula::Iff(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Token::Implies) {
            self.pos += 1;
            let rhs = self.implies()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, FormulaError> {
        let mut parts = vec![self.and()?];
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().cloned() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.iff()?;
                if self.peek() != Some(&Token::RParen) {
                    return self.error("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                Ok(match name.as_str() {
                    "true" => Formula::Const(true),
                    "false" => Formula::Const(false),
                    _ => Formula::Var(name),
                })
            }
            Some(_) => self.error("expected a variable, constant, '!' or '('"),
            None => self.error("unexpected end of formula"),
        }
    }
}

impl Formula {
    pub fn parse(text: &str) -> Result<Formula, FormulaError> {
        let tokens = tokenize(text)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            end: text.len(),
        };
        let formula = parser.iff()?;
        if parser.pos != parser.tokens.len() {
            return parser.error("trailing input");
        }
        Ok(formula)
    }

    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    /// Evaluates the formula; `lookup` returns the value of a variable.
    pub fn eval(&self, lookup: &impl Fn(&str) -> bool) -> bool {
        match self {
            Formula::Const(b) => *b,
            Formula::Var(v) => lookup(v),
            Formula::Not(f) => !f.eval(lookup),
            Formula::And(fs) => fs.iter().all(|f| f.eval(lookup)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(lookup)),
            Formula::Implies(a, b) => !a.eval(lookup) || b.eval(lookup),
            Formula::Iff(a, b) => a.eval(lookup) == b.eval(lookup),
        }
    }

    /// Variables in order of first occurrence.
    pub fn variables(&self) -> Vec<&str> {
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a str>) {
            match f {
                Formula::Const(_) => {}
                Formula::Var(v) => {
                    if !out.contains(&v.as_str()) {
                        out.push(v);
                    }
                }
                Formula::Not(f) => walk(f, out),
                Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| walk(f, out)),
                Formula::Implies(a, b) | Formula::Iff(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Returns the first variable not accepted by `known`.
    pub fn unknown_variable(&self, known: impl Fn(&str) -> bool) -> Option<String> {
        self.variables()
            .into_iter()
            .find(|v| !known(v))
            .map(str::to_string)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn prec(f: &Formula) -> u8 {
            match f {
                Formula::Const(_) | Formula::Var(_) | Formula::Not(_) => 5,
                Formula::And(_) => 4,
                Formula::Or(_) => 3,
                Formula::Implies(..) => 2,
                Formula::Iff(..) => 1,
            }
        }
        fn write(out: &mut fmt::Formatter<'_>, f: &Formula, min: u8) -> fmt::Result {
            let p = prec(f);
            if p < min {
                write!(out, "(")?;
            }
            match f {
                Formula::Const(b) => write!(out, "{b}")?,
                Formula::Var(v) => write!(out, "{v}")?,
                Formula::Not(inner) => {
                    write!(out, "!")?;
                    write(out, inner, 5)?;
                }
                Formula::And(fs) | Formula::Or(fs) => {
                    let sep = if matches!(f, Formula::And(_)) { " & " } else { " | " };
                    for (i, part) in fs.iter().enumerate() {
                        if i > 0 {
                            write!(out, "{sep}")?;
                        }
                        write(out, part, p + 1)?;
                    }
                }
                Formula::Implies(a, b) | Formula::Iff(a, b) => {
                    let sep = if matches!(f, Formula::Implies(..)) { " -> " } else { " <-> " };
                    write(out, a, p + 1)?;
                    write!(out, "{sep}")?;
                    write(out, b, p)?;
                }
            }
            if p < min {
                write!(out, ")")?;
            }
            Ok(())
        }
        write(f, self, 0)
    }
}
