//! First-order formulas over a relational signature.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FOFormula {
    True,
    False,
    Eq(String, String),
    Rel(String, Vec<String>),
    Not(Box<FOFormula>),
    And(Box<FOFormula>, Box<FOFormula>),
    Or(Box<FOFormula>, Box<FOFormula>),
    Implies(Box<FOFormula>, Box<FOFormula>),
    Exists(String, Box<FOFormula>),
    Forall(String, Box<FOFormula>),
}

impl FOFormula {
    pub fn eq(x: &str, y: &str) -> Self {
        FOFormula::Eq(x.into(), y.into())
    }

    pub fn rel(r: &str, args: &[&str]) -> Self {
        FOFormula::Rel(r.into(), args.iter().map(|a| a.to_string()).collect())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: FOFormula) -> Self {
        FOFormula::Not(Box::new(f))
    }

    pub fn and(a: FOFormula, b: FOFormula) -> Self {
        FOFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: FOFormula, b: FOFormula) -> Self {
        FOFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: FOFormula, b: FOFormula) -> Self {
        FOFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(x: &str, f: FOFormula) -> Self {
        FOFormula::Exists(x.into(), Box::new(f))
    }

    pub fn forall(x: &str, f: FOFormula) -> Self {
        FOFormula::Forall(x.into(), Box::new(f))
    }

    /// Free variables in order of first occurrence.
    pub fn free_variables(&self) -> Vec<String> {
        fn go(f: &FOFormula, bound: &mut Vec<String>, out: &mut Vec<String>) {
            let mut note = |v: &String, bound: &Vec<String>| {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            };
            match f {
                FOFormula::True | FOFormula::False => {}
                FOFormula::Eq(a, b) => {
                    note(a, bound);
                    note(b, bound);
                }
                FOFormula::Rel(_, args) => args.iter().for_each(|a| note(a, bound)),
                FOFormula::Not(g) => go(g, bound, out),
                FOFormula::And(a, b) | FOFormula::Or(a, b) | FOFormula::Implies(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                FOFormula::Exists(x, g) | FOFormula::Forall(x, g) => {
                    bound.push(x.clone());
                    go(g, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            FOFormula::True | FOFormula::False | FOFormula::Eq(..) | FOFormula::Rel(..) => 0,
            FOFormula::Not(g) => g.quantifier_depth(),
            FOFormula::And(a, b) | FOFormula::Or(a, b) | FOFormula::Implies(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            FOFormula::Exists(_, g) | FOFormula::Forall(_, g) => 1 + g.quantifier_depth(),
        }
    }

    /// Relation symbols with the arities they are used at.
    pub fn relations(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        fn go(f: &FOFormula, out: &mut BTreeSet<(String, usize)>) {
            match f {
                FOFormula::Rel(r, args) => {
                    out.insert((r.clone(), args.len()));
                }
                FOFormula::Not(g) | FOFormula::Exists(_, g) | FOFormula::Forall(_, g) => go(g, out),
                FOFormula::And(a, b) | FOFormula::Or(a, b) | FOFormula::Implies(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                _ => {}
            }
        }
        go(self, &mut out);
        out
    }
}

fn fmt_operand(f: &FOFormula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f {
        FOFormula::And(..) | FOFormula::Or(..) | FOFormula::Implies(..) => write!(out, "({f})"),
        FOFormula::Exists(..) | FOFormula::Forall(..) => write!(out, "({f})"),
        _ => write!(out, "{f}"),
    }
}

impl fmt::Display for FOFormula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FOFormula::True => write!(out, "true"),
            FOFormula::False => write!(out, "false"),
            FOFormula::Eq(a, b) => write!(out, "{a} = {b}"),
            FOFormula::Rel(r, args) => write!(out, "{r}({})", args.join(",")),
            FOFormula::Not(g) => {
                write!(out, "~")?;
                match **g {
                    FOFormula::Eq(..) => write!(out, "({g})"),
                    _ => fmt_operand(g, out),
                }
            }
            FOFormula::And(a, b) | FOFormula::Or(a, b) | FOFormula::Implies(a, b) => {
                let op = match self {
                    FOFormula::And(..) => "&",
                    FOFormula::Or(..) => "|",
                    _ => "->",
                };
                fmt_operand(a, out)?;
                write!(out, " {op} ")?;
                fmt_operand(b, out)
            }
            FOFormula::Exists(x, g) => write!(out, "exists {x}. {g}"),
            FOFormula::Forall(x, g) => write!(out, "forall {x}. {g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {position}: {message}")]
pub struct FoParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Exists,
    Forall,
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Eq,
    LParen,
    RParen,
    Comma,
    Dot,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, FoParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '=' => Tok::Eq,
            '~' | '¬' | '!' => Tok::Not,
            '&' | '∧' => Tok::And,
            '|' | '∨' => Tok::Or,
            '→' => Tok::Implies,
            '∃' => Tok::Exists,
            '∀' => Tok::Forall,
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                Tok::Implies
            }
            c if c.is_alphanumeric() || c == '_' => {
                while i + 1 < chars.len() && (chars[i + 1].is_alphanumeric() || chars[i + 1] == '_') {
                    i += 1;
                }
                let word: String = chars[start..=i].iter().collect();
                match word.as_str() {
                    "exists" => Tok::Exists,
                    "forall" => Tok::Forall,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(word),
                }
            }
            other => {
                return Err(FoParseError {
                    position: start,
                    message: format!("unexpected character {other:?}"),
                })
            }
        };
        out.push((start, tok));
        i += 1;
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

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, FoParseError> {
        Err(FoParseError {
            position: self.here(),
            message: message.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), FoParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn ident(&mut self) -> Result<String, FoParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected an identifier"),
        }
    }

    fn implication(&mut self) -> Result<FOFormula, FoParseError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            let rhs = self.implication()?;
            return Ok(FOFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<FOFormula, FoParseError> {
        let mut f = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            f = FOFormula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<FOFormula, FoParseError> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            f = FOFormula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<FOFormula, FoParseError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(FOFormula::not(self.unary()?))
            }
            Some(Tok::Exists) | Some(Tok::Forall) => {
                let universal = self.peek() == Some(&Tok::Forall);
                self.pos += 1;
                let x = self.ident()?;
                self.expect(Tok::Dot, "'.' after the quantified variable")?;
                // The body extends as far to the right as possible.
                let body = self.implication()?;
                Ok(if universal {
                    FOFormula::Forall(x, Box::new(body))
                } else {
                    FOFormula::Exists(x, Box::new(body))
                })
            }
            Some(Tok::True) => {
                self.pos += 1;
                Ok(FOFormula::True)
            }
            Some(Tok::False) => {
                self.pos += 1;
                Ok(FOFormula::False)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.implication()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Some(Tok::Ident(_)) => {
                let name = self.ident()?;
                match self.peek() {
                    Some(Tok::Eq) => {
                        self.pos += 1;
                        Ok(FOFormula::Eq(name, self.ident()?))
                    }
                    Some(Tok::LParen) => {
                        self.pos += 1;
                        let mut args = Vec::new();
                        if self.peek() != Some(&Tok::RParen) {
                            args.push(self.ident()?);
                            while self.peek() == Some(&Tok::Comma) {
                                self.pos += 1;
                                args.push(self.ident()?);
                            }
                        }
                        self.expect(Tok::RParen, "')' closing the argument list")?;
                        Ok(FOFormula::Rel(name, args))
                    }
                    _ => self.err("expected '=' or an argument list"),
                }
            }
            _ => self.err("expected a formula"),
        }
    }
}

pub fn parse_fo_formula(src: &str) -> Result<FOFormula, FoParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.chars().count(),
    };
    let f = p.implication()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

impl FromStr for FOFormula {
    type Err = FoParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_fo_formula(s)
    }
}

impl Serialize for FOFormula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FOFormula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_fo_formula(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_quantifiers_and_atoms() {
        let f = parse_fo_formula("exists x. x = t & R(x, y)").unwrap();
        assert_eq!(
            f,
            FOFormula::exists("x", FOFormula::and(FOFormula::eq("x", "t"), FOFormula::rel("R", &["x", "y"])))
        );
        assert_eq!(f.free_variables(), vec!["t", "y"]);
        assert_eq!(f.quantifier_depth(), 1);
        assert_eq!(parse_fo_formula("∀x.∃y. R(x,y)").unwrap().quantifier_depth(), 2);
    }

    #[test]
    fn precedence() {
        let f = parse_fo_formula("~a = b & c = d | e = f -> g = h -> i = j").unwrap();
        let expected = FOFormula::implies(
            FOFormula::or(
                FOFormula::and(FOFormula::not(FOFormula::eq("a", "b")), FOFormula::eq("c", "d")),
                FOFormula::eq("e", "f"),
            ),
            FOFormula::implies(FOFormula::eq("g", "h"), FOFormula::eq("i", "j")),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "exists x. (x = t1 & x = t2)",
            "~(forall x. R(x,x)) | P()",
            "(exists x. R(x,y)) & y = y",
            "~~R(x,y) -> true",
            "(a = b -> c = d) -> false",
        ] {
            let f = parse_fo_formula(src).unwrap();
            assert_eq!(parse_fo_formula(&f.to_string()).unwrap(), f, "{src}");
        }
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_fo_formula("exists . x = y").unwrap_err();
        assert_eq!(e.position, 7);
        assert!(parse_fo_formula("R(x,").is_err());
        assert!(parse_fo_formula("x = y y").is_err());
        assert!(parse_fo_formula("x").is_err());
    }
}
