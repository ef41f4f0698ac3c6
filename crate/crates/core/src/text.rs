//! The line-oriented presentation format.
//!
//! ```text
//! field Q
//! algebra A
//!   basis 1:0 x:0
//!   unit 1
//!   mul 1 1 = 1
//!   mul 1 x = x
//!   mul x 1 = x
//! module k over A
//!   basis m:0
//! morphism phi : A -> A
//!   1 -> 1
//!   x -> x
//! witness w for k
//!   tree (cone f leaf leaf)
//!   map f 0 = 1
//! ```
//!
//! Omitted `mul`, `act` and `d` lines are zero. `#` starts a comment.
//! Besides `module <name> over <alg> [right]` there is
//! `bimodule <name> over <left> <right>` with `lact <r> <m>` and
//! `ract <m> <s>` lines. Witness maps are written row by row, rows
//! separated by `;`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::dg::{Violation, AlgebraRules, DgAlgebra, DgModule, DgaMorphism, LinComb, ModuleRules, Side};
use crate::error::{Error, Result};
use crate::linalg::{FieldSpec, Matrix};
use crate::resolution::{BuildNode, BuildTreeWitness};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: expected {}, found {}", self.line, self.column, self.expected, self.found)
    }
}

impl std::error::Error for ParseError {}

/// A linear combination as written, before reduction into a field.
pub type Comb = Vec<(BigRational, String)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraDecl {
    pub name: String,
    pub basis: Vec<(String, i64)>,
    pub unit: Option<String>,
    pub mul: Vec<(String, String, Comb)>,
    pub d: Vec<(String, Comb)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Over {
    Left(String),
    Right(String),
    Both(String, String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleDecl {
    pub name: String,
    pub over: Over,
    pub basis: Vec<(String, i64)>,
    pub left_act: Vec<(String, String, Comb)>,
    pub right_act: Vec<(String, String, Comb)>,
    pub d: Vec<(String, Comb)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismDecl {
    pub name: String,
    pub source: String,
    pub target: String,
    pub images: Vec<(String, Comb)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tree {
    Leaf,
    Shift(i64, Box<Tree>),
    Cone(String, Box<Tree>, Box<Tree>),
    Sum(Vec<Tree>),
    Retract {
        include: String,
        project: String,
        homotopy: String,
        node: Box<Tree>,
        module: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapBlock {
    pub name: String,
    pub degree: i64,
    pub rows: Vec<Vec<BigRational>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessDecl {
    pub name: String,
    pub module: String,
    pub side: Option<Side>,
    pub tree: Tree,
    pub maps: Vec<MapBlock>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Algebra(AlgebraDecl),
    Module(ModuleDecl),
    Morphism(MorphismDecl),
    Witness(WitnessDecl),
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Algebra(a) => &a.name,
            Decl::Module(m) => &m.name,
            Decl::Morphism(m) => &m.name,
            Decl::Witness(w) => &w.name,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresentationFile {
    pub field: FieldSpec,
    pub decls: Vec<Decl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Token {
    text: String,
    column: usize,
}

fn lex(line: &str) -> Vec<Token> {
    let line = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            i += 2;
        } else if "()=+*;:-".contains(c) {
            i += 1;
        } else {
            while i < chars.len() && !chars[i].is_whitespace() && !"()=+*;:".contains(chars[i]) && chars[i] != '-' {
                i += 1;
            }
        }
        out.push(Token {
            text: chars[start..i].iter().collect(),
            column: start + 1,
        });
    }
    out
}

const KEYWORDS: [&str; 6] = ["field", "algebra", "module", "bimodule", "morphism", "witness"];
const RESERVED: [&str; 14] = [
    "field", "algebra", "module", "bimodule", "morphism", "witness", "over", "right", "for", "left", "leaf", "shift", "cone", "sum",
];

struct Cursor<'a> {
    line: usize,
    toks: &'a [Token],
    pos: usize,
    end_column: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, toks: &'a [Token], raw: &str) -> Cursor<'a> {
        Cursor {
            line,
            toks,
            pos: 0,
            end_column: raw.split('#').next().unwrap_or("").chars().count() + 1,
        }
    }

    fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.pos).map(|t| t.text.as_str())
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_column, |t| t.column)
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column(),
            expected: expected.into(),
            found: self.peek().map_or("end of line".to_string(), |t| format!("`{t}`")),
        }
    }

    fn next(&mut self, expected: &str) -> std::result::Result<&'a str, ParseError> {
        match self.peek() {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(self.error(expected)),
        }
    }

    fn expect(&mut self, tok: &str) -> std::result::Result<(), ParseError> {
        if self.peek() == Some(tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("`{tok}`")))
        }
    }

    fn name(&mut self, what: &str) -> std::result::Result<String, ParseError> {
        match self.peek() {
            Some(t) if is_word(t) && !RESERVED.contains(&t) => {
                self.pos += 1;
                Ok(t.to_string())
            }
            _ => Err(self.error(what)),
        }
    }

    fn label(&mut self) -> std::result::Result<String, ParseError> {
        match self.peek() {
            Some(t) if is_word(t) && !t.contains('/') => {
                self.pos += 1;
                Ok(t.to_string())
            }
            _ => Err(self.error("a basis label")),
        }
    }

    fn integer(&mut self, what: &str) -> std::result::Result<i64, ParseError> {
        let neg = self.peek() == Some("-");
        if neg {
            self.pos += 1;
        }
        match self.peek().and_then(|t| t.parse::<i64>().ok()) {
            Some(n) => {
                self.pos += 1;
                Ok(if neg { -n } else { n })
            }
            None => Err(self.error(what)),
        }
    }

    fn number(&mut self) -> std::result::Result<BigRational, ParseError> {
        let neg = self.peek() == Some("-");
        if neg {
            self.pos += 1;
        }
        let col = self.column();
        match self.peek().map(parse_number) {
            Some(Some(Ok(r))) => {
                self.pos += 1;
                Ok(if neg { -r } else { r })
            }
            Some(Some(Err(()))) => Err(ParseError {
                line: self.line,
                column: col,
                expected: "a nonzero denominator".into(),
                found: format!("`{}`", self.peek().unwrap_or("")),
            }),
            _ => Err(self.error("a coefficient")),
        }
    }

    fn done(&self) -> std::result::Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.error("end of line")),
        }
    }

    /// `0`, or terms `c*label`, `label`, joined by `+` and `-`.
    fn comb(&mut self) -> std::result::Result<Comb, ParseError> {
        if self.peek() == Some("0") && self.toks.get(self.pos + 1).is_none() {
            self.pos += 1;
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut first = true;
        loop {
            let mut sign = BigRational::one();
            match self.peek() {
                Some("+") if !first => self.pos += 1,
                Some("-") => {
                    self.pos += 1;
                    sign = -sign;
                }
                None if first => return Err(self.error("a linear combination")),
                None => break,
                _ if !first => return Err(self.error("`+`, `-` or end of line")),
                _ => {}
            }
            first = false;
            let starred = self.toks.get(self.pos + 1).is_some_and(|t| t.text == "*");
            let coeff = if starred && self.peek().and_then(parse_number).is_some() {
                let c = self.number()?;
                self.expect("*")?;
                c
            } else {
                BigRational::one()
            };
            let label = self.label()?;
            out.push((sign * coeff, label));
        }
        Ok(out)
    }

    fn tree(&mut self) -> std::result::Result<Tree, ParseError> {
        if self.peek() == Some("(") {
            self.pos += 1;
            let t = self.tree_body(true)?;
            self.expect(")")?;
            Ok(t)
        } else {
            self.tree_body(false)
        }
    }

    fn tree_body(&mut self, paren: bool) -> std::result::Result<Tree, ParseError> {
        let col = self.column();
        match self.next("a build tree node")? {
            "leaf" => Ok(Tree::Leaf),
            "shift" => {
                let t = self.integer("a shift amount")?;
                Ok(Tree::Shift(t, Box::new(self.tree()?)))
            }
            "cone" => {
                let map = self.name("a map name")?;
                let source = self.tree()?;
                let target = self.tree()?;
                Ok(Tree::Cone(map, Box::new(source), Box::new(target)))
            }
            "sum" => {
                let mut parts = vec![self.tree()?, self.tree()?];
                while paren && self.peek().is_some_and(|t| t != ")") {
                    parts.push(self.tree()?);
                }
                Ok(Tree::Sum(parts))
            }
            "retract" => {
                let include = self.name("a map name")?;
                let project = self.name("a map name")?;
                let homotopy = self.name("a map name")?;
                let node = Box::new(self.tree()?);
                let module = if paren && self.peek().is_some_and(|t| t != ")") {
                    Some(self.name("a module name")?)
                } else {
                    None
                };
                Ok(Tree::Retract {
                    include,
                    project,
                    homotopy,
                    node,
                    module,
                })
            }
            other => Err(ParseError {
                line: self.line,
                column: col,
                expected: "a build tree node (`leaf`, `shift`, `cone`, `sum` or `retract`)".into(),
                found: format!("`{other}`"),
            }),
        }
    }
}

fn is_word(t: &str) -> bool {
    !t.is_empty() && !"()=+*;:-".contains(t) && t != "->"
}

fn parse_number(t: &str) -> Option<std::result::Result<BigRational, ()>> {
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (t, None),
    };
    let digits = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_ascii_digit());
    if !digits(n) || d.is_some_and(|d| !digits(d)) {
        return None;
    }
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.map_or(Some(BigInt::one()), |d| d.parse().ok())?;
    if d.is_zero() {
        return Some(Err(()));
    }
    Some(Ok(BigRational::new(n, d)))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Algebra,
    Module,
    Morphism,
    Witness,
}

struct Block {
    decl: Decl,
    line: usize,
}

struct Parser {
    names: HashMap<String, Kind>,
    module_sides: HashMap<String, Over>,
}

impl Parser {
    fn reference(&self, c: &mut Cursor<'_>, kind: Kind, what: &str) -> std::result::Result<String, ParseError> {
        let col = c.column();
        let n = c.name(what)?;
        if self.names.get(&n) != Some(&kind) {
            return Err(ParseError {
                line: c.line,
                column: col,
                expected: format!("a declared {what}"),
                found: format!("`{n}`"),
            });
        }
        Ok(n)
    }

    fn declare(&mut self, c: &Cursor<'_>, col: usize, name: &str, kind: Kind) -> std::result::Result<(), ParseError> {
        if self.names.contains_key(name) {
            return Err(ParseError {
                line: c.line,
                column: col,
                expected: "a new name".into(),
                found: format!("`{name}`, which is already declared"),
            });
        }
        self.names.insert(name.to_string(), kind);
        Ok(())
    }

    fn header(&mut self, c: &mut Cursor<'_>) -> std::result::Result<Decl, ParseError> {
        let kw = c.next("a declaration")?;
        let col = c.column();
        let decl = match kw {
            "algebra" => {
                let name = c.name("an algebra name")?;
                c.done()?;
                self.declare(c, col, &name, Kind::Algebra)?;
                Decl::Algebra(AlgebraDecl {
                    name,
                    basis: Vec::new(),
                    unit: None,
                    mul: Vec::new(),
                    d: Vec::new(),
                })
            }
            "module" | "bimodule" => {
                let name = c.name("a module name")?;
                c.expect("over")?;
                let a = self.reference(c, Kind::Algebra, "algebra")?;
                let over = if kw == "bimodule" {
                    Over::Both(a, self.reference(c, Kind::Algebra, "algebra")?)
                } else if c.peek() == Some("right") {
                    c.pos += 1;
                    Over::Right(a)
                } else {
                    Over::Left(a)
                };
                c.done()?;
                self.declare(c, col, &name, Kind::Module)?;
                self.module_sides.insert(name.clone(), over.clone());
                Decl::Module(ModuleDecl {
                    name,
                    over,
                    basis: Vec::new(),
                    left_act: Vec::new(),
                    right_act: Vec::new(),
                    d: Vec::new(),
                })
            }
            "morphism" => {
                let name = c.name("a morphism name")?;
                c.expect(":")?;
                let source = self.reference(c, Kind::Algebra, "algebra")?;
                c.expect("->")?;
                let target = self.reference(c, Kind::Algebra, "algebra")?;
                c.done()?;
                self.declare(c, col, &name, Kind::Morphism)?;
                Decl::Morphism(MorphismDecl {
                    name,
                    source,
                    target,
                    images: Vec::new(),
                })
            }
            "witness" => {
                let name = c.name("a witness name")?;
                c.expect("for")?;
                let module = self.reference(c, Kind::Module, "module")?;
                let side = match c.peek() {
                    Some("left") => {
                        c.pos += 1;
                        Some(Side::Left)
                    }
                    Some("right") => {
                        c.pos += 1;
                        Some(Side::Right)
                    }
                    _ => None,
                };
                if side.is_none() && matches!(self.module_sides.get(&module), Some(Over::Both(..))) {
                    return Err(c.error("`left` or `right` for a witness of a bimodule"));
                }
                c.done()?;
                self.declare(c, col, &name, Kind::Witness)?;
                Decl::Witness(WitnessDecl {
                    name,
                    module,
                    side,
                    tree: Tree::Leaf,
                    maps: Vec::new(),
                })
            }
            "field" => {
                return Err(ParseError {
                    line: c.line,
                    column: 1,
                    expected: "a single `field` line at the top".into(),
                    found: "a second `field` line".into(),
                })
            }
            _ => unreachable!("header called on a keyword"),
        };
        Ok(decl)
    }

    fn body(&self, c: &mut Cursor<'_>, decl: &mut Decl, tree_seen: &mut bool) -> std::result::Result<(), ParseError> {
        match decl {
            Decl::Algebra(a) => match c.next("`basis`, `unit`, `mul` or `d`")? {
                "basis" => basis(c, &mut a.basis),
                "unit" => {
                    if a.unit.is_some() {
                        c.pos -= 1;
                        return Err(c.error("one `unit` line"));
                    }
                    a.unit = Some(c.label()?);
                    c.done()
                }
                "mul" => {
                    let x = c.label()?;
                    let y = c.label()?;
                    c.expect("=")?;
                    a.mul.push((x, y, c.comb()?));
                    Ok(())
                }
                "d" => {
                    let x = c.label()?;
                    c.expect("=")?;
                    a.d.push((x, c.comb()?));
                    Ok(())
                }
                _ => {
                    c.pos -= 1;
                    Err(c.error("`basis`, `unit`, `mul` or `d`"))
                }
            },
            Decl::Module(m) => {
                let both = matches!(m.over, Over::Both(..));
                let expected = if both { "`basis`, `lact`, `ract` or `d`" } else { "`basis`, `act` or `d`" };
                match c.next(expected)? {
                    "basis" => basis(c, &mut m.basis),
                    "act" if !both => {
                        let x = c.label()?;
                        let y = c.label()?;
                        c.expect("=")?;
                        let comb = c.comb()?;
                        match m.over {
                            Over::Left(_) => m.left_act.push((x, y, comb)),
                            _ => m.right_act.push((x, y, comb)),
                        }
                        Ok(())
                    }
                    kw @ ("lact" | "ract") if both => {
                        let x = c.label()?;
                        let y = c.label()?;
                        c.expect("=")?;
                        let comb = c.comb()?;
                        if kw == "lact" {
                            m.left_act.push((x, y, comb));
                        } else {
                            m.right_act.push((x, y, comb));
                        }
                        Ok(())
                    }
                    "d" => {
                        let x = c.label()?;
                        c.expect("=")?;
                        m.d.push((x, c.comb()?));
                        Ok(())
                    }
                    _ => {
                        c.pos -= 1;
                        Err(c.error(expected))
                    }
                }
            }
            Decl::Morphism(m) => {
                let x = c.label()?;
                c.expect("->")?;
                m.images.push((x, c.comb()?));
                Ok(())
            }
            Decl::Witness(w) => match c.next("`tree` or `map`")? {
                "tree" => {
                    if *tree_seen {
                        c.pos -= 1;
                        return Err(c.error("one `tree` line"));
                    }
                    w.tree = c.tree()?;
                    *tree_seen = true;
                    c.done()
                }
                "map" => {
                    let name = c.name("a map name")?;
                    let degree = c.integer("a degree")?;
                    c.expect("=")?;
                    let mut rows = vec![Vec::new()];
                    while c.peek().is_some() {
                        if c.peek() == Some(";") {
                            c.pos += 1;
                            rows.push(Vec::new());
                            continue;
                        }
                        rows.last_mut().expect("nonempty").push(c.number()?);
                    }
                    if rows.iter().any(|r| r.len() != rows[0].len()) || rows[0].is_empty() {
                        return Err(c.error("rows of equal, nonzero length"));
                    }
                    w.maps.push(MapBlock { name, degree, rows });
                    Ok(())
                }
                _ => {
                    c.pos -= 1;
                    Err(c.error("`tree` or `map`"))
                }
            },
        }
    }
}

fn basis(c: &mut Cursor<'_>, out: &mut Vec<(String, i64)>) -> std::result::Result<(), ParseError> {
    if c.peek().is_none() {
        return Err(c.error("`label:degree`"));
    }
    while c.peek().is_some() {
        let l = c.label()?;
        c.expect(":")?;
        out.push((l, c.integer("an integer degree")?));
    }
    Ok(())
}

fn finish(block: &Block, tree_seen: bool) -> std::result::Result<(), ParseError> {
    match &block.decl {
        Decl::Algebra(a) if a.unit.is_none() && !a.basis.is_empty() => Err(ParseError {
            line: block.line,
            column: 1,
            expected: format!("a `unit` line in algebra `{}`", a.name),
            found: "the end of the block".into(),
        }),
        Decl::Witness(w) if !tree_seen => Err(ParseError {
            line: block.line,
            column: 1,
            expected: format!("a `tree` line in witness `{}`", w.name),
            found: "the end of the block".into(),
        }),
        _ => Ok(()),
    }
}

pub fn parse(text: &str) -> std::result::Result<PresentationFile, ParseError> {
    let mut field = None;
    let mut parser = Parser {
        names: HashMap::new(),
        module_sides: HashMap::new(),
    };
    let mut decls = Vec::new();
    let mut current: Option<(Block, bool)> = None;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let toks = lex(raw);
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor::new(line, &toks, raw);
        if field.is_none() {
            if c.peek() != Some("field") {
                return Err(c.error("`field Q` or `field Fp <prime>`"));
            }
            c.pos += 1;
            let f = match c.next("`Q` or `Fp`")? {
                "Q" => FieldSpec::Rationals,
                "Fp" => {
                    let col = c.column();
                    let p = c.integer("a prime")?;
                    FieldSpec::prime(p.max(0) as u64).map_err(|_| ParseError {
                        line,
                        column: col,
                        expected: "a prime below 2^32".into(),
                        found: format!("`{p}`"),
                    })?
                }
                _ => {
                    c.pos -= 1;
                    return Err(c.error("`Q` or `Fp`"));
                }
            };
            c.done()?;
            field = Some(f);
            continue;
        }
        let first = c.peek().unwrap_or("");
        if first == "end" && toks.len() == 1 {
            if let Some((b, seen)) = current.take() {
                finish(&b, seen)?;
                decls.push(b.decl);
            }
            continue;
        }
        if KEYWORDS.contains(&first) {
            if let Some((b, seen)) = current.take() {
                finish(&b, seen)?;
                decls.push(b.decl);
            }
            let decl = parser.header(&mut c)?;
            current = Some((Block { decl, line }, false));
            continue;
        }
        match current.as_mut() {
            Some((b, seen)) => parser.body(&mut c, &mut b.decl, seen)?,
            None => return Err(c.error("a declaration")),
        }
    }
    if let Some((b, seen)) = current.take() {
        finish(&b, seen)?;
        decls.push(b.decl);
    }
    let field = field.ok_or(ParseError {
        line: last_line.max(1),
        column: 1,
        expected: "`field Q` or `field Fp <prime>`".into(),
        found: "end of input".into(),
    })?;
    Ok(PresentationFile { field, decls })
}

fn fmt_ratio(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_comb(c: &Comb) -> String {
    if c.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (k, (coeff, label)) in c.iter().enumerate() {
        let neg = coeff.is_negative();
        match (k, neg) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        let a = coeff.abs();
        if a.is_one() {
            s.push_str(label);
        } else {
            let _ = write!(s, "{}*{label}", fmt_ratio(&a));
        }
    }
    s
}

fn fmt_tree(t: &Tree) -> String {
    match t {
        Tree::Leaf => "leaf".into(),
        Tree::Shift(n, c) => format!("(shift {n} {})", fmt_tree(c)),
        Tree::Cone(m, a, b) => format!("(cone {m} {} {})", fmt_tree(a), fmt_tree(b)),
        Tree::Sum(cs) => format!("(sum {})", cs.iter().map(fmt_tree).collect::<Vec<_>>().join(" ")),
        Tree::Retract {
            include,
            project,
            homotopy,
            node,
            module,
        } => {
            let m = module.as_ref().map_or(String::new(), |m| format!(" {m}"));
            format!("(retract {include} {project} {homotopy} {}{m})", fmt_tree(node))
        }
    }
}

fn fmt_basis(out: &mut String, basis: &[(String, i64)]) {
    if basis.is_empty() {
        return;
    }
    let items: Vec<String> = basis.iter().map(|(l, d)| format!("{l}:{d}")).collect();
    let _ = writeln!(out, "  basis {}", items.join(" "));
}

/// Canonical text for a parsed file.
pub fn serialize(file: &PresentationFile) -> String {
    let mut out = String::new();
    match file.field {
        FieldSpec::Rationals => out.push_str("field Q\n"),
        FieldSpec::PrimeField(p) => {
            let _ = writeln!(out, "field Fp {p}");
        }
    }
    for d in &file.decls {
        out.push('\n');
        match d {
            Decl::Algebra(a) => {
                let _ = writeln!(out, "algebra {}", a.name);
                fmt_basis(&mut out, &a.basis);
                if let Some(u) = &a.unit {
                    let _ = writeln!(out, "  unit {u}");
                }
                for (x, y, c) in &a.mul {
                    let _ = writeln!(out, "  mul {x} {y} = {}", fmt_comb(c));
                }
                for (x, c) in &a.d {
                    let _ = writeln!(out, "  d {x} = {}", fmt_comb(c));
                }
            }
            Decl::Module(m) => {
                match &m.over {
                    Over::Left(a) => writeln!(out, "module {} over {a}", m.name),
                    Over::Right(a) => writeln!(out, "module {} over {a} right", m.name),
                    Over::Both(a, b) => writeln!(out, "bimodule {} over {a} {b}", m.name),
                }
                .expect("writing to a string");
                fmt_basis(&mut out, &m.basis);
                let both = matches!(m.over, Over::Both(..));
                for (x, y, c) in &m.left_act {
                    let _ = writeln!(out, "  {} {x} {y} = {}", if both { "lact" } else { "act" }, fmt_comb(c));
                }
                for (x, y, c) in &m.right_act {
                    let _ = writeln!(out, "  {} {x} {y} = {}", if both { "ract" } else { "act" }, fmt_comb(c));
                }
                for (x, c) in &m.d {
                    let _ = writeln!(out, "  d {x} = {}", fmt_comb(c));
                }
            }
            Decl::Morphism(m) => {
                let _ = writeln!(out, "morphism {} : {} -> {}", m.name, m.source, m.target);
                for (x, c) in &m.images {
                    let _ = writeln!(out, "  {x} -> {}", fmt_comb(c));
                }
            }
            Decl::Witness(w) => {
                let side = match w.side {
                    Some(Side::Left) => " left",
                    Some(Side::Right) => " right",
                    None => "",
                };
                let _ = writeln!(out, "witness {} for {}{side}", w.name, w.module);
                let _ = writeln!(out, "  tree {}", fmt_tree(&w.tree));
                for b in &w.maps {
                    let rows: Vec<String> = b.rows.iter().map(|r| r.iter().map(fmt_ratio).collect::<Vec<_>>().join(" ")).collect();
                    let _ = writeln!(out, "  map {} {} = {}", b.name, b.degree, rows.join(" ; "));
                }
            }
        }
    }
    out
}

/// The objects described by a file, built in declaration order.
#[derive(Clone, Debug)]
pub struct Session {
    pub field: FieldSpec,
    pub algebras: BTreeMap<String, Arc<DgAlgebra>>,
    pub modules: BTreeMap<String, Arc<DgModule>>,
    pub morphisms: BTreeMap<String, DgaMorphism>,
    /// Witness with the name of the module it is for.
    pub witnesses: BTreeMap<String, (String, BuildTreeWitness)>,
    /// Names in declaration order.
    pub order: Vec<String>,
}

fn reduce(field: FieldSpec, c: &Comb) -> Result<LinComb> {
    c.iter()
        .map(|(r, l)| Ok((field.from_ratio(r.numer(), r.denom())?, l.clone())))
        .collect()
}

fn reduce_all(field: FieldSpec, v: &[(String, String, Comb)]) -> Result<Vec<(String, String, LinComb)>> {
    v.iter().map(|(a, b, c)| Ok((a.clone(), b.clone(), reduce(field, c)?))).collect()
}

fn reduce_d(field: FieldSpec, v: &[(String, Comb)]) -> Result<Vec<(String, LinComb)>> {
    v.iter().map(|(a, c)| Ok((a.clone(), reduce(field, c)?))).collect()
}

impl Session {
    pub fn build(file: &PresentationFile) -> Result<Session> {
        let field = file.field;
        let ground = Arc::new(DgAlgebra::ground(field));
        let mut s = Session {
            field,
            algebras: BTreeMap::new(),
            modules: BTreeMap::new(),
            morphisms: BTreeMap::new(),
            witnesses: BTreeMap::new(),
            order: Vec::new(),
        };
        for d in &file.decls {
            s.order.push(d.name().to_string());
            match d {
                Decl::Algebra(a) => {
                    let alg = if a.basis.is_empty() {
                        DgAlgebra::new(a.name.clone(), crate::complex::Complex::zero(field), Vec::new(), Default::default())?
                    } else {
                        let rules = AlgebraRules {
                            name: a.name.clone(),
                            basis: a.basis.clone(),
                            unit: a.unit.clone(),
                            mul: reduce_all(field, &a.mul)?,
                            d: reduce_d(field, &a.d)?,
                        };
                        DgAlgebra::from_rules(field, &rules)?
                    };
                    s.algebras.insert(a.name.clone(), Arc::new(alg));
                }
                Decl::Module(m) => {
                    let alg = |n: &str| s.algebras[n].clone();
                    let (l, r) = match &m.over {
                        Over::Left(a) => (alg(a), ground.clone()),
                        Over::Right(a) => (ground.clone(), alg(a)),
                        Over::Both(a, b) => (alg(a), alg(b)),
                    };
                    let rules = ModuleRules {
                        name: m.name.clone(),
                        basis: m.basis.clone(),
                        left_act: reduce_all(field, &m.left_act)?,
                        right_act: reduce_all(field, &m.right_act)?,
                        d: reduce_d(field, &m.d)?,
                    };
                    let module = DgModule::from_rules(field, l, r, &rules)?;
                    s.modules.insert(m.name.clone(), Arc::new(module));
                }
                Decl::Morphism(m) => {
                    let images: Vec<(String, LinComb)> = m
                        .images
                        .iter()
                        .map(|(a, c)| Ok((a.clone(), reduce(field, c)?)))
                        .collect::<Result<_>>()?;
                    let phi = DgaMorphism::from_images(s.algebras[&m.source].clone(), s.algebras[&m.target].clone(), &images)?;
                    s.morphisms.insert(m.name.clone(), phi);
                }
                Decl::Witness(w) => {
                    let side = w.side.unwrap_or_else(|| {
                        if s.modules[&w.module].is_right_module() && !s.modules[&w.module].is_left_module() {
                            Side::Right
                        } else {
                            Side::Left
                        }
                    });
                    let mut maps: BTreeMap<String, BTreeMap<i64, Matrix>> = BTreeMap::new();
                    for b in &w.maps {
                        let rows = b
                            .rows
                            .iter()
                            .map(|r| r.iter().map(|x| field.from_ratio(x.numer(), x.denom())).collect::<std::result::Result<Vec<_>, _>>())
                            .collect::<std::result::Result<Vec<_>, _>>()?;
                        let blocks = maps.entry(b.name.clone()).or_default();
                        if blocks.insert(b.degree, Matrix::from_rows(field, rows)).is_some() {
                            return Err(Error::Invalid(format!("witness `{}` gives map `{}` twice in degree {}", w.name, b.name, b.degree)));
                        }
                    }
                    let root = s.node(&w.tree)?;
                    s.witnesses.insert(
                        w.name.clone(),
                        (
                            w.module.clone(),
                            BuildTreeWitness {
                                name: w.name.clone(),
                                side,
                                root,
                                maps,
                            },
                        ),
                    );
                }
            }
        }
        Ok(s)
    }

    fn node(&self, t: &Tree) -> Result<BuildNode> {
        Ok(match t {
            Tree::Leaf => BuildNode::Leaf,
            Tree::Shift(n, c) => BuildNode::Shift(*n, Box::new(self.node(c)?)),
            Tree::Cone(m, a, b) => BuildNode::Cone {
                map: m.clone(),
                source: Box::new(self.node(a)?),
                target: Box::new(self.node(b)?),
            },
            Tree::Sum(cs) => BuildNode::Sum(cs.iter().map(|c| self.node(c)).collect::<Result<_>>()?),
            Tree::Retract {
                include,
                project,
                homotopy,
                node,
                module,
            } => BuildNode::Retract {
                include: include.clone(),
                project: project.clone(),
                homotopy: homotopy.clone(),
                node: Box::new(self.node(node)?),
                module: match module {
                    Some(m) => Some(
                        self.modules
                            .get(m)
                            .cloned()
                            .ok_or_else(|| Error::Invalid(format!("retract names undeclared module `{m}`")))?,
                    ),
                    None => None,
                },
            },
        })
    }

    pub fn algebra(&self, name: &str) -> Result<Arc<DgAlgebra>> {
        self.algebras.get(name).cloned().ok_or_else(|| unknown("algebra", name))
    }

    pub fn module(&self, name: &str) -> Result<Arc<DgModule>> {
        self.modules.get(name).cloned().ok_or_else(|| unknown("module", name))
    }

    pub fn morphism(&self, name: &str) -> Result<&DgaMorphism> {
        self.morphisms.get(name).ok_or_else(|| unknown("morphism", name))
    }

    pub fn witness(&self, name: &str) -> Result<&(String, BuildTreeWitness)> {
        self.witnesses.get(name).ok_or_else(|| unknown("witness", name))
    }
}

/// A broken axiom in the named declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub decl: String,
    pub violation: Violation,
}

/// Builds every declaration and runs the axiom checks. Structural
/// violations (such as a bad degree) stop the build and are returned as
/// the only finding; other errors propagate.
pub fn validate_file(file: &PresentationFile) -> Result<(Option<Session>, Vec<Finding>)> {
    let s = match Session::build(file) {
        Ok(s) => s,
        Err(Error::Axiom(v)) => {
            let decl = file
                .decls
                .iter()
                .find(|d| !matches!(d, Decl::Witness(_)) && built_prefix_fails(file, d.name()))
                .map_or(String::new(), |d| d.name().to_string());
            return Ok((None, vec![Finding { decl, violation: v }]));
        }
        Err(e) => return Err(e),
    };
    let mut out = Vec::new();
    for name in &s.order {
        let found = if let Some(a) = s.algebras.get(name) {
            a.validate()
        } else if let Some(m) = s.modules.get(name) {
            m.validate()
        } else if let Some(phi) = s.morphisms.get(name) {
            phi.validate()
        } else {
            Vec::new()
        };
        out.extend(found.into_iter().map(|violation| Finding {
            decl: name.clone(),
            violation,
        }));
    }
    Ok((Some(s), out))
}

fn built_prefix_fails(file: &PresentationFile, name: &str) -> bool {
    let k = file.decls.iter().position(|d| d.name() == name).map_or(0, |i| i + 1);
    let prefix = PresentationFile {
        field: file.field,
        decls: file.decls[..k].to_vec(),
    };
    Session::build(&prefix).is_err()
}

fn unknown(kind: &str, name: &str) -> Error {
    Error::Invalid(format!("no {kind} named `{name}`"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DUAL: &str = "field Q
algebra R   # dual numbers
  basis 1:0 x:0
  unit 1
  mul 1 1 = 1
  mul 1 x = x
  mul x 1 = x
module k over R
  basis m:0
  act 1 m = m
";

    #[test]
    fn parses_and_builds() {
        let f = parse(DUAL).unwrap();
        assert_eq!(f.decls.len(), 2);
        let s = Session::build(&f).unwrap();
        assert!(s.algebra("R").unwrap().is_valid());
        assert!(s.module("k").unwrap().is_valid());
    }

    #[test]
    fn minimal_file() {
        let f = parse("field Q\nalgebra k\n").unwrap();
        let s = Session::build(&f).unwrap();
        assert_eq!(s.algebra("k").unwrap().space().total_dim(), 0);
    }

    #[test]
    fn missing_unit_names_the_block() {
        let e = parse("field Q\nalgebra A\n  basis 1:0\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.expected.contains("unit") && e.expected.contains("`A`"), "{e}");
    }

    #[test]
    fn positioned_errors() {
        let e = parse("field Q\nalgebra A\n  basis 1:0\n  unit 1\n  mul 1 1 = 2* \n").unwrap_err();
        assert_eq!((e.line, e.column), (5, 16));
        assert_eq!(e.expected, "a basis label");
        let e = parse("field Q\nmodule M over B\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 15));
        assert!(e.expected.contains("declared algebra"));
        let e = parse("algebra A\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse("field Fp 6\n").unwrap_err();
        assert_eq!(e.column, 10);
    }

    #[test]
    fn round_trip() {
        let text = "field Fp 5
algebra A
  basis 1:0 x:1 y:2
  unit 1
  mul 1 1 = 1
  mul x x = -1/2*y + 0*y
  d y = 3*x
bimodule M over A A
  basis m:0
  lact 1 m = m
  ract m 1 = m
morphism f : A -> A
  1 -> 1
  x -> -x
witness w for M right
  tree (retract i p h (sum leaf (shift -1 leaf) (cone c leaf leaf)) M)
  map i 0 = 1 0 ; 0 -2/3
";
        let f = parse(text).unwrap();
        let g = parse(&serialize(&f)).unwrap();
        assert_eq!(f, g);
        assert_eq!(serialize(&g), serialize(&f));
    }

    #[test]
    fn bare_prefix_trees() {
        let f = parse("field Q\nalgebra A\n basis 1:0\n unit 1\nmodule M over A\n basis m:0\nwitness w for M\n tree sum leaf shift 1 leaf\n").unwrap();
        let Decl::Witness(w) = &f.decls[2] else { panic!() };
        assert_eq!(w.tree, Tree::Sum(vec![Tree::Leaf, Tree::Shift(1, Box::new(Tree::Leaf))]));
    }

    #[test]
    fn mod_p_coefficients_reduce() {
        let f = parse("field Fp 3\nalgebra A\n basis 1:0\n unit 1\n mul 1 1 = 4*1\n").unwrap();
        let s = Session::build(&f).unwrap();
        assert!(s.algebra("A").unwrap().is_valid());
    }
}
