//! Principle language.
//!
//! ```text
//! spec    := "principle" IDENT ":" expr
//! expr    := term { "&" term }
//! term    := [ "!" ] atom
//! atom    := "swerve_required" | "crossing_illegal"
//!          | "all(" test ")" | "any(" test ")"
//!          | "count(" test ")" cmp INT
//!          | "type(" typename ")" | "pole(" polename ")"
//! test    := attr "=" value        attr := species|age|body|gender|status|kind
//! cmp     := "==" | ">=" | "<=" | ">" | "<"
//! ```
//!
//! A principle file holds any number of specs; `#` starts a line comment.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::scenario::{AgeGroup, BodyType, CharacterType, Gender, ProblemType, Species, Status, Taxonomy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttrTest {
    Species(Species),
    Age(AgeGroup),
    Body(BodyType),
    Gender(Gender),
    Status(Status),
    Kind(CharacterType),
}

impl AttrTest {
    pub fn matches(&self, taxonomy: &Taxonomy, c: CharacterType) -> bool {
        let a = taxonomy.attributes(c);
        match *self {
            AttrTest::Species(v) => a.species == v,
            AttrTest::Age(v) => a.age == v,
            AttrTest::Body(v) => a.body == v,
            AttrTest::Gender(v) => a.gender == v,
            AttrTest::Status(v) => a.status == v,
            AttrTest::Kind(v) => c == v,
        }
    }

    fn parse(attr: &str, value: &str) -> Option<AttrTest> {
        Some(match attr {
            "species" => AttrTest::Species(match value {
                "human" => Species::Human,
                "animal" => Species::Animal,
                _ => return None,
            }),
            "age" => AttrTest::Age(match value {
                "young" => AgeGroup::Young,
                "adult" => AgeGroup::Adult,
                "old" => AgeGroup::Old,
                "na" => AgeGroup::Na,
                _ => return None,
            }),
            "body" => AttrTest::Body(match value {
                "large" => BodyType::Large,
                "fit" => BodyType::Fit,
                "neutral" => BodyType::Neutral,
                "na" => BodyType::Na,
                _ => return None,
            }),
            "gender" => AttrTest::Gender(match value {
                "male" => Gender::Male,
                "female" => Gender::Female,
                "na" => Gender::Na,
                _ => return None,
            }),
            "status" => AttrTest::Status(match value {
                "high" => Status::High,
                "low" => Status::Low,
                "neutral" => Status::Neutral,
                "na" => Status::Na,
                _ => return None,
            }),
            "kind" => AttrTest::Kind(CharacterType::from_ident(value)?),
            _ => return None,
        })
    }
}

impl fmt::Display for AttrTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (attr, value) = match self {
            AttrTest::Species(v) => ("species", if *v == Species::Human { "human" } else { "animal" }),
            AttrTest::Age(v) => (
                "age",
                match v {
                    AgeGroup::Young => "young",
                    AgeGroup::Adult => "adult",
                    AgeGroup::Old => "old",
                    AgeGroup::Na => "na",
                },
            ),
            AttrTest::Body(v) => (
                "body",
                match v {
                    BodyType::Large => "large",
                    BodyType::Fit => "fit",
                    BodyType::Neutral => "neutral",
                    BodyType::Na => "na",
                },
            ),
            AttrTest::Gender(v) => (
                "gender",
                match v {
                    Gender::Male => "male",
                    Gender::Female => "female",
                    Gender::Na => "na",
                },
            ),
            AttrTest::Status(v) => (
                "status",
                match v {
                    Status::High => "high",
                    Status::Low => "low",
                    Status::Neutral => "neutral",
                    Status::Na => "na",
                },
            ),
            AttrTest::Kind(c) => ("kind", c.ident()),
        };
        write!(f, "{attr}={value}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cmp {
    Eq,
    Ge,
    Le,
    Gt,
    Lt,
}

impl Cmp {
    pub fn apply(self, lhs: u32, rhs: u32) -> bool {
        match self {
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Gt => lhs > rhs,
            Cmp::Lt => lhs < rhs,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "==",
            Cmp::Ge => ">=",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Lt => "<",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    /// Saving this side requires the car to swerve.
    SwerveRequired,
    /// This side crosses against the signal.
    CrossingIllegal,
    All(AttrTest),
    Any(AttrTest),
    Count(AttrTest, Cmp, u32),
    Type(ProblemType),
    /// `positive` selects the designated pole (humans, young, ...) rather
    /// than its opposite (animals, old, ...).
    Pole { problem_type: ProblemType, positive: bool },
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::SwerveRequired => f.write_str("swerve_required"),
            Atom::CrossingIllegal => f.write_str("crossing_illegal"),
            Atom::All(t) => write!(f, "all({t})"),
            Atom::Any(t) => write!(f, "any({t})"),
            Atom::Count(t, c, n) => write!(f, "count({t}) {} {n}", c.symbol()),
            Atom::Type(t) => write!(f, "type({})", t.ident()),
            Atom::Pole { problem_type, positive } => {
                let name = if *positive {
                    problem_type.pole_name()
                } else {
                    problem_type.counter_pole_name()
                };
                write!(f, "pole({name})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Term {
    pub negated: bool,
    pub atom: Atom,
}

/// Conjunction of possibly negated atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Expr {
    pub terms: Vec<Term>,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            if t.negated {
                f.write_str("!")?;
            }
            write!(f, "{}", t.atom)?;
        }
        Ok(())
    }
}

/// A named side-level boolean feature.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrincipleSpec {
    pub name: String,
    pub expr: Expr,
}

impl PrincipleSpec {
    pub fn parse(text: &str) -> Result<PrincipleSpec> {
        let mut p = Parser::new(text)?;
        let spec = p.spec()?;
        p.expect_end()?;
        Ok(spec)
    }

    /// Canonical source text; parses back to an equal spec.
    pub fn source(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PrincipleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "principle {}: {}", self.name, self.expr)
    }
}

/// Parse a bare expression (used for teacher override conditions).
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

/// Parse a file of principles. Names must be unique.
pub fn parse_principles(text: &str) -> Result<Vec<PrincipleSpec>> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    while !p.at_end() {
        let pos = p.peek_pos();
        let spec = p.spec()?;
        if !seen.insert(spec.name.clone()) {
            return Err(Error::Syntax {
                line: pos.0,
                column: pos.1,
                message: format!("duplicate principle name `{}`", spec.name),
            });
        }
        out.push(spec);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u32),
    Colon,
    Amp,
    Bang,
    LParen,
    RParen,
    Assign,
    Cmp(Cmp),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Assign => f.write_str("`=`"),
            Tok::Cmp(c) => write!(f, "`{}`", c.symbol()),
        }
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Token with its line and column.
type Spanned = (Tok, usize, usize);

fn tokenize(text: &str) -> Result<(Vec<Spanned>, (usize, usize))> {
    let mut toks = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            ':' => {
                toks.push((Tok::Colon, l0, c0));
                advance(1, &mut i, &mut col);
            }
            '&' => {
                toks.push((Tok::Amp, l0, c0));
                advance(1, &mut i, &mut col);
            }
            '(' => {
                toks.push((Tok::LParen, l0, c0));
                advance(1, &mut i, &mut col);
            }
            ')' => {
                toks.push((Tok::RParen, l0, c0));
                advance(1, &mut i, &mut col);
            }
            '!' => {
                toks.push((Tok::Bang, l0, c0));
                advance(1, &mut i, &mut col);
            }
            '=' | '>' | '<' => {
                let next_eq = chars.get(i + 1) == Some(&'=');
                let (tok, n) = match (c, next_eq) {
                    ('=', true) => (Tok::Cmp(Cmp::Eq), 2),
                    ('=', false) => (Tok::Assign, 1),
                    ('>', true) => (Tok::Cmp(Cmp::Ge), 2),
                    ('>', false) => (Tok::Cmp(Cmp::Gt), 1),
                    ('<', true) => (Tok::Cmp(Cmp::Le), 2),
                    _ => (Tok::Cmp(Cmp::Lt), 1),
                };
                toks.push((tok, l0, c0));
                advance(n, &mut i, &mut col);
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n = s.parse().map_err(|_| syntax(l0, c0, format!("integer `{s}` out of range")))?;
                col += i - start;
                toks.push((Tok::Int(n), l0, c0));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                toks.push((Tok::Ident(chars[start..i].iter().collect()), l0, c0));
            }
            other => return Err(syntax(l0, c0, format!("unexpected character `{other}`"))),
        }
    }
    Ok((toks, (line, col)))
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        let (toks, end) = tokenize(text)?;
        Ok(Self { toks, pos: 0, end })
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_pos(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |t| (t.1, t.2))
    }

    fn error_here(&self, expected: &str) -> Error {
        let (line, column) = self.peek_pos();
        match self.peek() {
            Some(t) => syntax(line, column, format!("expected {expected}, found {t}")),
            None => {
                let after = self.toks.last().map(|t| format!(" after {}", t.0)).unwrap_or_default();
                syntax(line, column, format!("expected {expected}, found end of input{after}"))
            }
        }
    }

    fn next(&mut self) -> Option<(Tok, usize, usize)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error_here(what))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize, usize)> {
        match self.peek() {
            Some(Tok::Ident(_)) => match self.next() {
                Some((Tok::Ident(s), l, c)) => Ok((s, l, c)),
                _ => unreachable!(),
            },
            _ => Err(self.error_here(what)),
        }
    }

    fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error_here("end of input"))
        }
    }

    fn spec(&mut self) -> Result<PrincipleSpec> {
        let (kw, l, c) = self.ident("`principle`")?;
        if kw != "principle" {
            return Err(syntax(l, c, format!("expected `principle`, found `{kw}`")));
        }
        let (name, _, _) = self.ident("principle name")?;
        self.expect(Tok::Colon, "`:`")?;
        let expr = self.expr()?;
        Ok(PrincipleSpec { name, expr })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            terms.push(self.term()?);
        }
        Ok(Expr { terms })
    }

    fn term(&mut self) -> Result<Term> {
        let negated = if self.peek() == Some(&Tok::Bang) {
            self.pos += 1;
            true
        } else {
            false
        };
        Ok(Term {
            negated,
            atom: self.atom()?,
        })
    }

    fn atom(&mut self) -> Result<Atom> {
        let (name, l, c) = self.ident("an atom")?;
        match name.as_str() {
            "swerve_required" => Ok(Atom::SwerveRequired),
            "crossing_illegal" => Ok(Atom::CrossingIllegal),
            "all" | "any" | "count" => {
                self.expect(Tok::LParen, "`(`")?;
                let test = self.test()?;
                self.expect(Tok::RParen, "`)`")?;
                match name.as_str() {
                    "all" => Ok(Atom::All(test)),
                    "any" => Ok(Atom::Any(test)),
                    _ => {
                        let cmp = match self.peek() {
                            Some(Tok::Cmp(cmp)) => *cmp,
                            _ => return Err(self.error_here("a comparison (==, >=, <=, >, <)")),
                        };
                        self.pos += 1;
                        let n = match self.peek() {
                            Some(Tok::Int(n)) => *n,
                            _ => return Err(self.error_here("an integer")),
                        };
                        self.pos += 1;
                        Ok(Atom::Count(test, cmp, n))
                    }
                }
            }
            "type" => {
                self.expect(Tok::LParen, "`(`")?;
                let (t, tl, tc) = self.ident("a problem type")?;
                let problem_type =
                    ProblemType::from_ident(&t).ok_or_else(|| syntax(tl, tc, format!("unknown problem type `{t}`")))?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Atom::Type(problem_type))
            }
            "pole" => {
                self.expect(Tok::LParen, "`(`")?;
                let (p, pl, pc) = self.ident("a pole name")?;
                let (problem_type, positive) =
                    ProblemType::from_pole_name(&p).ok_or_else(|| syntax(pl, pc, format!("unknown pole `{p}`")))?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Atom::Pole { problem_type, positive })
            }
            other => Err(syntax(l, c, format!("unknown atom `{other}`"))),
        }
    }

    fn test(&mut self) -> Result<AttrTest> {
        let (attr, al, ac) = self.ident("an attribute")?;
        if !matches!(attr.as_str(), "species" | "age" | "body" | "gender" | "status" | "kind") {
            return Err(syntax(al, ac, format!("unknown attribute `{attr}`")));
        }
        self.expect(Tok::Assign, "`=`")?;
        let (value, vl, vc) = self.ident("an attribute value")?;
        AttrTest::parse(&attr, &value).ok_or_else(|| syntax(vl, vc, format!("unknown value `{value}` for `{attr}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_atoms() {
        let p = PrincipleSpec::parse("principle intervention: swerve_required").unwrap();
        assert_eq!(p.name, "intervention");
        assert_eq!(p.expr.terms, vec![Term { negated: false, atom: Atom::SwerveRequired }]);
        let p = PrincipleSpec::parse("principle unlawful: crossing_illegal").unwrap();
        assert_eq!(p.expr.terms[0].atom, Atom::CrossingIllegal);
    }

    #[test]
    fn parses_conjunction() {
        let p = PrincipleSpec::parse("principle humans_pole: type(humans_vs_animals) & pole(humans)").unwrap();
        assert_eq!(
            p.expr.terms.iter().map(|t| t.atom).collect::<Vec<_>>(),
            vec![
                Atom::Type(ProblemType::HumansVsAnimals),
                Atom::Pole { problem_type: ProblemType::HumansVsAnimals, positive: true }
            ]
        );
    }

    #[test]
    fn parses_counts_negation_and_kinds() {
        let p = PrincipleSpec::parse("principle x: count(age=young) >= 2 & !any(kind=criminal) & all(species=human)")
            .unwrap();
        assert_eq!(p.expr.terms.len(), 3);
        assert_eq!(p.expr.terms[0].atom, Atom::Count(AttrTest::Age(AgeGroup::Young), Cmp::Ge, 2));
        assert!(p.expr.terms[1].negated);
        assert_eq!(p.expr.terms[1].atom, Atom::Any(AttrTest::Kind(CharacterType::Criminal)));
    }

    #[test]
    fn malformed_count_reports_end_position() {
        let err = PrincipleSpec::parse("principle bad: count(age=old) >").unwrap_err();
        match err {
            Error::Syntax { line, column, message } => {
                assert_eq!((line, column), (1, 32));
                assert!(message.contains("end of input"), "{message}");
                assert!(message.contains("`>`"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reports_unknown_names_with_position() {
        let e = PrincipleSpec::parse("principle p:\n  any(colour=red)").unwrap_err();
        assert!(matches!(e, Error::Syntax { line: 2, column: 7, .. }), "{e:?}");
        let e = PrincipleSpec::parse("principle p: any(age=ancient)").unwrap_err();
        assert!(matches!(e, Error::Syntax { line: 1, column: 22, .. }), "{e:?}");
        let e = PrincipleSpec::parse("principle p: flying").unwrap_err();
        assert!(e.to_string().contains("unknown atom"));
        assert!(PrincipleSpec::parse("principle p: type(cats_vs_dogs)").is_err());
        assert!(PrincipleSpec::parse("principle p: swerve_required |").is_err());
        assert!(PrincipleSpec::parse("").is_err());
    }

    #[test]
    fn principle_files() {
        let text = "# defaults\nprinciple a: swerve_required\n\nprinciple b: crossing_illegal # trailing\n";
        let ps = parse_principles(text).unwrap();
        assert_eq!(ps.iter().map(|p| p.name.as_str()).collect::<Vec<_>>(), vec!["a", "b"]);
        let dup = "principle a: swerve_required\nprinciple a: crossing_illegal";
        assert!(matches!(parse_principles(dup), Err(Error::Syntax { line: 2, .. })));
    }

    #[test]
    fn print_is_canonical() {
        let p = PrincipleSpec::parse("principle  z :count( kind = dog )<3&!pole(animals)").unwrap();
        assert_eq!(p.to_string(), "principle z: count(kind=dog) < 3 & !pole(animals)");
        assert_eq!(PrincipleSpec::parse(&p.to_string()).unwrap(), p);
    }
}
