//! Propositional modal formulas: parsing, rendering, substitution and
//! subformula enumeration.
//!
//! Surface syntax is ASCII (`[]`, `<>`, `~`, `&`, `|`, `->`, `<->`, `true`,
//! `false`) with Unicode aliases (`□ ◇ ¬ ∧ ∨ → ↔ ⊤ ⊥`). Binding strength,
//! tightest first: unary operators, `&`, `|`, `->` (right associative),
//! `<->`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Var(String),
    Top,
    Bottom,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Box(Box<Formula>),
    Diamond(Box<Formula>),
}

// Smart constructors. These keep test fixtures and the axiom catalog readable.
pub fn var(name: &str) -> Formula {
    Formula::Var(name.to_string())
}
pub fn not(f: Formula) -> Formula {
    Formula::Not(Box::new(f))
}
pub fn and(a: Formula, b: Formula) -> Formula {
    Formula::And(Box::new(a), Box::new(b))
}
pub fn or(a: Formula, b: Formula) -> Formula {
    Formula::Or(Box::new(a), Box::new(b))
}
pub fn implies(a: Formula, b: Formula) -> Formula {
    Formula::Implies(Box::new(a), Box::new(b))
}
pub fn iff(a: Formula, b: Formula) -> Formula {
    Formula::Iff(Box::new(a), Box::new(b))
}
pub fn nec(f: Formula) -> Formula {
    Formula::Box(Box::new(f))
}
pub fn poss(f: Formula) -> Formula {
    Formula::Diamond(Box::new(f))
}

impl Formula {
    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Var(_) | Formula::Top | Formula::Bottom)
    }

    /// Direct children, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Var(_) | Formula::Top | Formula::Bottom => vec![],
            Formula::Not(a) | Formula::Box(a) | Formula::Diamond(a) => vec![a],
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => vec![a, b],
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// Maximum nesting of `[]` and `<>`.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Box(a) | Formula::Diamond(a) => 1 + a.modal_depth(),
            _ => self
                .children()
                .iter()
                .map(|c| c.modal_depth())
                .max()
                .unwrap_or(0),
        }
    }

    /// Variable names in order of first occurrence.
    pub fn variables(&self) -> Vec<String> {
        fn walk(f: &Formula, seen: &mut HashSet<String>, out: &mut Vec<String>) {
            if let Formula::Var(name) = f {
                if seen.insert(name.clone()) {
                    out.push(name.clone());
                }
            }
            for c in f.children() {
                walk(c, seen, out);
            }
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        walk(self, &mut seen, &mut out);
        out
    }

    /// Rebuild this node with new children (same arity).
    fn with_children(&self, mut kids: Vec<Formula>) -> Formula {
        let mut next = || Box::new(kids.remove(0));
        match self {
            Formula::Var(_) | Formula::Top | Formula::Bottom => self.clone(),
            Formula::Not(_) => Formula::Not(next()),
            Formula::Box(_) => Formula::Box(next()),
            Formula::Diamond(_) => Formula::Diamond(next()),
            Formula::And(..) => Formula::And(next(), next()),
            Formula::Or(..) => Formula::Or(next(), next()),
            Formula::Implies(..) => Formula::Implies(next(), next()),
            Formula::Iff(..) => Formula::Iff(next(), next()),
        }
    }

    /// Simultaneous substitution of variables. Variables absent from `map`
    /// are left in place.
    pub fn substitute_vars(&self, map: &BTreeMap<String, Formula>) -> Formula {
        match self {
            Formula::Var(name) => map.get(name).cloned().unwrap_or_else(|| self.clone()),
            _ => self.with_children(
                self.children()
                    .into_iter()
                    .map(|c| c.substitute_vars(map))
                    .collect(),
            ),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_formula(self))
    }
}

impl FromStr for Formula {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

impl Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&render_formula(self))
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_formula(&text).map_err(serde::de::Error::custom)
    }
}

/// Canonical text: unary operands are always parenthesized, binary operands
/// unless atomic.
pub fn render_formula(f: &Formula) -> String {
    fn operand(f: &Formula) -> String {
        if f.is_atomic() {
            render_formula(f)
        } else {
            format!("({})", render_formula(f))
        }
    }
    match f {
        Formula::Var(name) => name.clone(),
        Formula::Top => "true".into(),
        Formula::Bottom => "false".into(),
        Formula::Not(a) => format!("~({})", render_formula(a)),
        Formula::Box(a) => format!("[]({})", render_formula(a)),
        Formula::Diamond(a) => format!("<>({})", render_formula(a)),
        Formula::And(a, b) => format!("{} & {}", operand(a), operand(b)),
        Formula::Or(a, b) => format!("{} | {}", operand(a), operand(b)),
        Formula::Implies(a, b) => format!("{} -> {}", operand(a), operand(b)),
        Formula::Iff(a, b) => format!("{} <-> {}", operand(a), operand(b)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {position}: {message}")]
pub struct ParseError {
    /// Character offset into the input.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    True,
    False,
    Not,
    Box,
    Diamond,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
}

fn describe(tok: Option<&(usize, Token)>) -> String {
    match tok {
        None => "end of input".into(),
        Some((_, Token::Ident(s))) => format!("identifier `{s}`"),
        Some((_, t)) => format!("{t:?}"),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let starts = |i: usize, pat: &str| -> bool {
        let p: Vec<char> = pat.chars().collect();
        chars.len() >= i + p.len() && chars[i..i + p.len()] == p[..]
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let symbolic: &[(&str, Token)] = &[
            ("<->", Token::Iff),
            ("->", Token::Implies),
            ("[]", Token::Box),
            ("<>", Token::Diamond),
            ("~", Token::Not),
            ("&", Token::And),
            ("|", Token::Or),
            ("(", Token::LParen),
            (")", Token::RParen),
            ("¬", Token::Not),
            ("□", Token::Box),
            ("◇", Token::Diamond),
            ("∧", Token::And),
            ("∨", Token::Or),
            ("→", Token::Implies),
            ("↔", Token::Iff),
            ("⊤", Token::True),
            ("⊥", Token::False),
        ];
        if let Some((pat, tok)) = symbolic.iter().find(|(pat, _)| starts(i, pat)) {
            out.push((i, tok.clone()));
            i += pat.chars().count();
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.as_str() {
                "true" => Token::True,
                "false" => Token::False,
                _ => Token::Ident(word),
            };
            out.push((start, tok));
            continue;
        }
        return Err(ParseError {
            position: i,
            message: format!("unexpected character `{c}`"),
        });
    }
    Ok(out)
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
        self.tokens.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn eat(&mut self, tok: &Token) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            position: self.offset(),
            message: format!(
                "expected {expected}, found {}",
                describe(self.tokens.get(self.pos))
            ),
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.imp()?;
        while self.eat(&Token::Iff) {
            let rhs = self.imp()?;
            lhs = iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Token::Implies) {
            let rhs = self.imp()?;
            return Ok(implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.eat(&Token::Or) {
            let rhs = self.and()?;
            lhs = or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Token::And) {
            let rhs = self.unary()?;
            lhs = and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Token::Not) {
            return Ok(not(self.unary()?));
        }
        if self.eat(&Token::Box) {
            return Ok(nec(self.unary()?));
        }
        if self.eat(&Token::Diamond) {
            return Ok(poss(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().cloned() {
            Some(Token::True) => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Some(Token::False) => {
                self.pos += 1;
                Ok(Formula::Bottom)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                Ok(Formula::Var(name))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.iff()?;
                if !self.eat(&Token::RParen) {
                    return Err(self.error("`)`"));
                }
                Ok(inner)
            }
            _ => Err(self.error("a formula")),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.chars().count(),
    };
    let f = parser.iff()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.error("end of input"));
    }
    Ok(f)
}

/// A named template whose variables are metavariables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomScheme {
    pub name: String,
    pub template: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstitutionError {
    #[error("scheme `{scheme}` has no binding for metavariable `{var}`")]
    MissingBinding { scheme: String, var: String },
}

impl AxiomScheme {
    pub fn new(name: &str, template: Formula) -> Self {
        AxiomScheme {
            name: name.to_string(),
            template,
        }
    }

    pub fn metavariables(&self) -> Vec<String> {
        self.template.variables()
    }

    pub fn substitute(
        &self,
        map: &BTreeMap<String, Formula>,
    ) -> Result<Formula, SubstitutionError> {
        substitute(self, map)
    }

    /// Instance with each metavariable renamed to the matching entry of
    /// `names` (in order of first occurrence).
    pub fn instance_over(&self, names: &[&str]) -> Formula {
        let map = self
            .metavariables()
            .into_iter()
            .zip(names.iter())
            .map(|(m, n)| (m, var(n)))
            .collect();
        self.template.substitute_vars(&map)
    }
}

pub fn substitute(
    scheme: &AxiomScheme,
    map: &BTreeMap<String, Formula>,
) -> Result<Formula, SubstitutionError> {
    if let Some(missing) = scheme
        .metavariables()
        .into_iter()
        .find(|v| !map.contains_key(v))
    {
        return Err(SubstitutionError::MissingBinding {
            scheme: scheme.name.clone(),
            var: missing,
        });
    }
    Ok(scheme.template.substitute_vars(map))
}

/// Distinct subtrees in post-order, first occurrence wins.
pub fn subformulas(f: &Formula) -> Vec<Formula> {
    fn walk(f: &Formula, seen: &mut BTreeSet<Formula>, out: &mut Vec<Formula>) {
        for c in f.children() {
            walk(c, seen, out);
        }
        if seen.insert(f.clone()) {
            out.push(f.clone());
        }
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    walk(f, &mut seen, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Formula {
        var("p")
    }

    #[test]
    fn parses_maximality_scheme() {
        let f = parse_formula("<>[]p -> []p").unwrap();
        assert_eq!(f, implies(poss(nec(p())), nec(p())));
    }

    #[test]
    fn parses_atom() {
        assert_eq!(parse_formula("p").unwrap(), p());
        assert_eq!(parse_formula("  long_name2 ").unwrap(), var("long_name2"));
    }

    #[test]
    fn parses_grz_template() {
        let f = parse_formula("[]([](p -> []p) -> p) -> p").unwrap();
        let expected = implies(nec(implies(nec(implies(p(), nec(p()))), p())), p());
        assert_eq!(f, expected);
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse_formula("a & b | c -> d -> e <-> f").unwrap();
        let expected = iff(
            implies(
                or(and(var("a"), var("b")), var("c")),
                implies(var("d"), var("e")),
            ),
            var("f"),
        );
        assert_eq!(f, expected);
        assert_eq!(
            parse_formula("~[]p & q").unwrap(),
            and(not(nec(p())), var("q"))
        );
        assert_eq!(
            parse_formula("a <-> b <-> c").unwrap(),
            iff(iff(var("a"), var("b")), var("c"))
        );
    }

    #[test]
    fn unicode_aliases() {
        assert_eq!(
            parse_formula("◇□p → □◇p").unwrap(),
            parse_formula("<>[]p -> []<>p").unwrap()
        );
        assert_eq!(
            parse_formula("¬⊥ ∧ ⊤ ∨ p ↔ q").unwrap(),
            parse_formula("~false & true | p <-> q").unwrap()
        );
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_formula("p -> ").unwrap_err();
        assert_eq!(err.position, 5);
        let err = parse_formula("(p & q").unwrap_err();
        assert_eq!(err.position, 6);
        let err = parse_formula("p q").unwrap_err();
        assert_eq!(err.position, 2);
        let err = parse_formula("p # q").unwrap_err();
        assert_eq!(err.position, 2);
        assert!(parse_formula("").is_err());
        assert!(parse_formula("[]").is_err());
    }

    #[test]
    fn renders_canonically() {
        assert_eq!(render_formula(&p()), "p");
        assert_eq!(render_formula(&nec(poss(p()))), "[](<>(p))");
        let dot2 = implies(poss(nec(p())), nec(poss(p())));
        assert_eq!(render_formula(&dot2), "(<>([](p))) -> ([](<>(p)))");
        assert_eq!(render_formula(&and(Formula::Top, not(Formula::Bottom))), "true & (~(false))");
    }

    #[test]
    fn substitution_examples() {
        let s = AxiomScheme::new("S", implies(nec(p()), p()));
        let map = BTreeMap::from([("p".to_string(), var("q"))]);
        assert_eq!(
            substitute(&s, &map).unwrap(),
            parse_formula("[](q) -> q").unwrap()
        );

        let dot2 = AxiomScheme::new(".2", implies(poss(nec(p())), nec(poss(p()))));
        let ab = and(var("a"), var("b"));
        let map = BTreeMap::from([("p".to_string(), ab.clone())]);
        assert_eq!(
            substitute(&dot2, &map).unwrap(),
            implies(poss(nec(ab.clone())), nec(poss(ab)))
        );

        let lob = AxiomScheme::new("Löb", implies(nec(implies(nec(p()), p())), nec(p())));
        let map = BTreeMap::from([("p".to_string(), Formula::Bottom)]);
        assert_eq!(
            substitute(&lob, &map).unwrap(),
            parse_formula("[]([]false -> false) -> []false").unwrap()
        );
    }

    #[test]
    fn missing_binding_is_an_error() {
        let k = AxiomScheme::new(
            "K",
            implies(nec(implies(p(), var("q"))), implies(nec(p()), nec(var("q")))),
        );
        let map = BTreeMap::from([("p".to_string(), var("r"))]);
        assert_eq!(
            substitute(&k, &map),
            Err(SubstitutionError::MissingBinding {
                scheme: "K".into(),
                var: "q".into()
            })
        );
    }

    #[test]
    fn subformula_examples() {
        assert_eq!(subformulas(&p()), vec![p()]);
        let t = implies(nec(p()), p());
        assert_eq!(subformulas(&t), vec![p(), nec(p()), t.clone()]);
        let dot2 = parse_formula("<>[]p -> []<>p").unwrap();
        // p, []p, <>[]p, <>p, []<>p, whole; p is shared.
        let subs = subformulas(&dot2);
        assert_eq!(subs.len(), 6);
        let m5 = parse_formula("<>[]p -> p").unwrap();
        assert_eq!(subformulas(&m5).len(), 4);
    }

    #[test]
    fn depth_and_variables() {
        let f = parse_formula("[](p -> <>[]q) & r").unwrap();
        assert_eq!(f.modal_depth(), 3);
        assert_eq!(f.variables(), vec!["p", "q", "r"]);
        assert_eq!(f.node_count(), 8);
    }
}
