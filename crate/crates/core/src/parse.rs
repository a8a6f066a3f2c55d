//! Concrete syntax for formulas and default rules.
//!
//! ```text
//! rule    := iff "~>" iff
//! iff     := implies ("<->" implies)*
//! implies := or ("->" implies)?
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary | primary
//! primary := "true" | "false" | "(" iff ")" | NAME "@" index
//! index   := INT | "t" | "t" ("+" | "-") INT
//! ```
//!
//! The `t` index form is only accepted when parsing a [`Schema`]; schemas may
//! also leave the index off entirely, which reads as `@t`.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::formula::{Formula, Time, TimedAtom};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("time index {time} of `{name}` at offset {pos} is outside [0, {horizon}]")]
    TimeOutOfRange {
        name: String,
        time: i64,
        horizon: Time,
        pos: usize,
    },
    #[error("unknown variable `{name}` at offset {pos}")]
    UnknownVariable { name: String, pos: usize },
}

impl ParseError {
    fn syntax(pos: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    At,
    Bang,
    Amp,
    Pipe,
    Arrow,
    DoubleArrow,
    Leads,
    LParen,
    RParen,
    Plus,
    Minus,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '@' => Tok::At,
            '!' => Tok::Bang,
            '&' => Tok::Amp,
            '|' => Tok::Pipe,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '+' => Tok::Plus,
            '-' if src[i..].starts_with("->") => {
                i += 1;
                Tok::Arrow
            }
            '-' => Tok::Minus,
            '<' if src[i..].starts_with("<->") => {
                i += 2;
                Tok::DoubleArrow
            }
            '~' if src[i..].starts_with("~>") => {
                i += 1;
                Tok::Leads
            }
            c if c.is_ascii_digit() => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = src[start..i]
                    .parse()
                    .map_err(|_| ParseError::syntax(start, "integer too large"))?;
                out.push((Tok::Int(n), start));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            other => {
                return Err(ParseError::syntax(
                    start,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        i += 1;
        out.push((tok, start));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
enum IndexMode {
    Absolute,
    Bound { t: i64 },
}

/// Options shared by every parse entry point.
#[derive(Debug, Clone, Copy, Default)]
pub struct Vocabulary<'a> {
    pub horizon: Option<Time>,
    pub names: Option<&'a BTreeSet<String>>,
}

impl<'a> Vocabulary<'a> {
    pub fn new(horizon: Time, names: &'a BTreeSet<String>) -> Self {
        Vocabulary {
            horizon: Some(horizon),
            names: Some(names),
        }
    }

    pub fn horizon(horizon: Time) -> Self {
        Vocabulary {
            horizon: Some(horizon),
            names: None,
        }
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    mode: IndexMode,
    vocab: Vocabulary<'a>,
    check_range: bool,
    offsets: Vec<i64>,
    absolutes: Vec<i64>,
}

impl<'a> Parser<'a> {
    fn new(src: &str, mode: IndexMode, vocab: Vocabulary<'a>) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            end: src.len(),
            mode,
            vocab,
            check_range: true,
            offsets: Vec::new(),
            absolutes: Vec::new(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(ParseError::syntax(
                self.offset(),
                format!("unexpected {t:?}"),
            )),
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implies()?;
        while self.eat(&Tok::DoubleArrow) {
            let rhs = self.implies()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Tok::Bang) {
            return Ok(Formula::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.iff()?;
                if !self.eat(&Tok::RParen) {
                    return Err(ParseError::syntax(self.offset(), "expected `)`"));
                }
                Ok(inner)
            }
            Some(Tok::Ident(name)) if name == "true" => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Some(Tok::Ident(name)) if name == "false" => {
                self.pos += 1;
                Ok(Formula::Bottom)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(names) = self.vocab.names {
                    if !names.contains(&name) {
                        return Err(ParseError::UnknownVariable { name, pos: at });
                    }
                }
                let time = if self.eat(&Tok::At) {
                    self.index()?
                } else {
                    match self.mode {
                        IndexMode::Bound { t } => {
                            self.offsets.push(0);
                            t
                        }
                        IndexMode::Absolute => {
                            return Err(ParseError::syntax(
                                self.offset(),
                                format!("atom `{name}` needs a time index `@t`"),
                            ))
                        }
                    }
                };
                if self.check_range {
                    let horizon = self.vocab.horizon.map_or(i64::from(Time::MAX), i64::from);
                    if time < 0 || time > horizon {
                        return Err(ParseError::TimeOutOfRange {
                            name,
                            time,
                            horizon: self.vocab.horizon.unwrap_or(Time::MAX),
                            pos: at,
                        });
                    }
                }
                Ok(Formula::Atom(TimedAtom::new(name, time as Time)))
            }
            Some(t) => Err(ParseError::syntax(at, format!("unexpected {t:?}"))),
            None => Err(ParseError::syntax(at, "unexpected end of input")),
        }
    }

    fn index(&mut self) -> Result<i64, ParseError> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                self.absolutes.push(n);
                Ok(n)
            }
            Some(Tok::Ident(v)) if v == "t" => {
                let IndexMode::Bound { t } = self.mode else {
                    return Err(ParseError::syntax(
                        at,
                        "relative index `t` outside a schema",
                    ));
                };
                self.pos += 1;
                let sign = if self.eat(&Tok::Plus) {
                    1
                } else if self.eat(&Tok::Minus) {
                    -1
                } else {
                    self.offsets.push(0);
                    return Ok(t);
                };
                match self.peek().cloned() {
                    Some(Tok::Int(k)) => {
                        self.pos += 1;
                        self.offsets.push(sign * k);
                        Ok(t + sign * k)
                    }
                    _ => Err(ParseError::syntax(self.offset(), "expected integer offset")),
                }
            }
            _ => Err(ParseError::syntax(at, "expected time index")),
        }
    }
}

/// Parse a formula whose atoms all carry absolute time indices.
pub fn parse_formula(text: &str, vocab: Vocabulary<'_>) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text, IndexMode::Absolute, vocab)?;
    let f = p.iff()?;
    p.expect_end()?;
    Ok(f)
}

/// Parse with only a horizon check.
pub fn parse(text: &str, horizon: Time) -> Result<Formula, ParseError> {
    parse_formula(text, Vocabulary::horizon(horizon))
}

/// Parse `antecedent ~> consequent` with absolute indices.
pub fn parse_rule_parts(
    text: &str,
    vocab: Vocabulary<'_>,
) -> Result<(Formula, Formula), ParseError> {
    let mut p = Parser::new(text, IndexMode::Absolute, vocab)?;
    rule_parts(&mut p)
}

fn rule_parts(p: &mut Parser<'_>) -> Result<(Formula, Formula), ParseError> {
    let lhs = p.iff()?;
    if !p.eat(&Tok::Leads) {
        return Err(ParseError::syntax(p.offset(), "expected `~>`"));
    }
    let rhs = p.iff()?;
    p.expect_end()?;
    Ok((lhs, rhs))
}

/// What a schema text denotes once its `t` is bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaKind {
    Formula,
    Rule,
}

/// A formula or rule template over a symbolic time slot `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    source: String,
    kind: SchemaKind,
    relative: Option<(i64, i64)>,
    max_absolute: Option<i64>,
}

impl Schema {
    pub fn formula(source: &str, names: Option<&BTreeSet<String>>) -> Result<Self, ParseError> {
        Self::probe(source, SchemaKind::Formula, names)
    }

    pub fn rule(source: &str, names: Option<&BTreeSet<String>>) -> Result<Self, ParseError> {
        Self::probe(source, SchemaKind::Rule, names)
    }

    fn probe(
        source: &str,
        kind: SchemaKind,
        names: Option<&BTreeSet<String>>,
    ) -> Result<Self, ParseError> {
        let vocab = Vocabulary {
            horizon: None,
            names,
        };
        let mut p = Parser::new(source, IndexMode::Bound { t: 0 }, vocab)?;
        p.check_range = false;
        match kind {
            SchemaKind::Formula => {
                p.iff()?;
                p.expect_end()?;
            }
            SchemaKind::Rule => {
                rule_parts(&mut p)?;
            }
        }
        let relative = match (p.offsets.iter().min(), p.offsets.iter().max()) {
            (Some(lo), Some(hi)) => Some((*lo, *hi)),
            _ => None,
        };
        Ok(Schema {
            source: source.to_string(),
            kind,
            relative,
            max_absolute: p.absolutes.iter().max().copied(),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn kind(&self) -> SchemaKind {
        self.kind
    }

    /// True if the text mentions the time slot at all.
    pub fn is_schematic(&self) -> bool {
        self.relative.is_some()
    }

    /// Every `t` whose instantiation stays inside `[0, horizon]`.
    pub fn admissible_times(&self, horizon: Time) -> Vec<Time> {
        if self.max_absolute.is_some_and(|m| m > i64::from(horizon)) {
            return Vec::new();
        }
        match self.relative {
            None => vec![0],
            Some((lo, hi)) => {
                let first = (-lo).max(0);
                let last = i64::from(horizon) - hi.max(0);
                (first..=last).map(|t| t as Time).collect()
            }
        }
    }

    fn bound(&self, t: Time, vocab: Vocabulary<'_>) -> Result<Parser<'_>, ParseError> {
        // names were checked at probe time
        let vocab = Vocabulary {
            horizon: vocab.horizon,
            names: None,
        };
        Parser::new(&self.source, IndexMode::Bound { t: i64::from(t) }, vocab)
    }

    pub fn instantiate(&self, t: Time, horizon: Time) -> Result<Formula, ParseError> {
        debug_assert_eq!(self.kind, SchemaKind::Formula);
        let mut p = self.bound(t, Vocabulary::horizon(horizon))?;
        let f = p.iff()?;
        p.expect_end()?;
        Ok(f)
    }

    pub fn instantiate_rule(
        &self,
        t: Time,
        horizon: Time,
    ) -> Result<(Formula, Formula), ParseError> {
        debug_assert_eq!(self.kind, SchemaKind::Rule);
        let mut p = self.bound(t, Vocabulary::horizon(horizon))?;
        rule_parts(&mut p)
    }
}
