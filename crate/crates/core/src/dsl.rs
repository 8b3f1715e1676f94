//! Textual model language.
//!
//! ```text
//! model  := decl* "system" "=" expr
//! decl   := id "~" dist
//!         | "spare" id "~" dist "dormancy" number
//!         | "set" id "=" "{" id ("," id)* "}"
//! dist   := "exp(" rate ")" | "weibull(" shape "," scale ")"
//! expr   := expr "+" term | term
//! term   := term "*" factor | factor
//! factor := id | "always" | "never" | "(" expr ")"
//!         | ("wsp" | "csp" | "hsp") "(" expr "," id ")"
//!         | ("after" | "simult" | "incl_after") "(" expr "," expr ")"
//!         | ("series" | "parallel") "(" item ("," item)* ")"
//! item   := expr | set-id
//! ```
//!
//! `*` binds tighter than `+`, both associate to the left. `#` starts a
//! comment running to the end of the line. A set name inside `series(...)`
//! or `parallel(...)` stands for its members.

use std::collections::BTreeMap;
use std::fmt;

use crate::distribution::{Distribution, SpareSpec};
use crate::error::{Error, Position, Result};
use crate::expr::{BlockId, Expr};
use crate::model::{BlockLaw, DrbdModel};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DistSpec {
    Exp { rate: f64 },
    Weibull { shape: f64, scale: f64 },
}

impl DistSpec {
    pub fn to_distribution(self) -> Result<Distribution> {
        match self {
            DistSpec::Exp { rate } => Distribution::exponential(rate),
            DistSpec::Weibull { shape, scale } => Distribution::weibull(shape, scale),
        }
    }
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistSpec::Exp { rate } => write!(f, "exp({rate})"),
            DistSpec::Weibull { shape, scale } => write!(f, "weibull({shape}, {scale})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Block { id: BlockId, dist: DistSpec },
    Spare { id: BlockId, dist: DistSpec, dormancy: f64 },
    Set { name: String, ids: Vec<BlockId> },
}

impl fmt::Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decl::Block { id, dist } => write!(f, "{id} ~ {dist}"),
            Decl::Spare { id, dist, dormancy } => write!(f, "spare {id} ~ {dist} dormancy {dormancy}"),
            Decl::Set { name, ids } => write!(f, "set {name} = {{{}}}", ids.join(", ")),
        }
    }
}

/// A parsed model file. Parsing already checked ids for uniqueness and
/// every reference against the declarations.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelDocument {
    pub decls: Vec<Decl>,
    pub system: Expr,
}

/// Pretty-printed form; parses back to an equal document.
impl fmt::Display for ModelDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            writeln!(f, "{d}")?;
        }
        writeln!(f, "system = {}", self.system)
    }
}

/// Parameter overrides applied when building a model; the id `*` stands for
/// every block the override applies to.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    /// Exponential failure rates.
    pub rates: Vec<(String, f64)>,
    /// Dormancy factors of spares.
    pub dormancy: Vec<(String, f64)>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        self.rates.is_empty() && self.dormancy.is_empty()
    }

    fn lookup(list: &[(String, f64)], id: &str) -> Option<f64> {
        // later entries win; an explicit id beats `*` regardless of order
        list.iter().rev().find(|(k, _)| k == id).or_else(|| list.iter().rev().find(|(k, _)| k == "*")).map(|&(_, v)| v)
    }
}

/// Parses `id=value`, as used by the `--rate` and `--dormancy` flags.
pub fn parse_override(s: &str) -> Result<(String, f64)> {
    let (id, v) = s
        .split_once('=')
        .ok_or_else(|| Error::domain(format!("expected <id>=<value>, got `{s}`")))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::domain(format!("`{}` is not a number", v.trim())))?;
    Ok((id.trim().to_string(), v))
}

impl ModelDocument {
    pub fn block_ids(&self) -> impl Iterator<Item = &str> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Block { id, .. } | Decl::Spare { id, .. } => Some(id.as_str()),
            Decl::Set { .. } => None,
        })
    }

    /// Builds the model, after applying `overrides`.
    pub fn to_model(&self, name: &str, overrides: &Overrides) -> Result<DrbdModel> {
        let known: Vec<&str> = self.block_ids().collect();
        for (id, v) in &overrides.rates {
            if *v <= 0.0 || !v.is_finite() {
                return Err(Error::domain(format!("rate override for `{id}` must be positive, got {v}")));
            }
            if id != "*" && !known.contains(&id.as_str()) {
                return Err(Error::model(format!("rate override for unknown block `{id}`")));
            }
        }
        for (id, _) in &overrides.dormancy {
            let is_spare = self.decls.iter().any(|d| matches!(d, Decl::Spare { id: s, .. } if s == id));
            if id != "*" && !is_spare {
                return Err(Error::model(format!("dormancy override for `{id}`, which is not a spare")));
            }
        }
        let dist_of = |id: &str, dist: DistSpec| -> Result<Distribution> {
            match (dist, Overrides::lookup(&overrides.rates, id)) {
                (DistSpec::Exp { .. }, Some(rate)) => Distribution::exponential(rate),
                (DistSpec::Weibull { .. }, Some(_)) if overrides.rates.iter().any(|(k, _)| k == id) => Err(
                    Error::model(format!("rate override for `{id}`, which is not exponential")),
                ),
                (d, _) => d.to_distribution(),
            }
        };
        let mut blocks = BTreeMap::new();
        for d in &self.decls {
            match d {
                Decl::Block { id, dist } => {
                    blocks.insert(id.clone(), BlockLaw::Basic(dist_of(id, *dist)?));
                }
                Decl::Spare { id, dist, dormancy } => {
                    let alpha = Overrides::lookup(&overrides.dormancy, id).unwrap_or(*dormancy);
                    blocks.insert(id.clone(), BlockLaw::Spare(SpareSpec::with_dormancy(dist_of(id, *dist)?, alpha)?));
                }
                Decl::Set { .. } => {}
            }
        }
        DrbdModel::new(name, blocks, self.system.clone())
    }
}

/// Either a full model document or a bare structure expression.
#[derive(Clone, Debug, PartialEq)]
pub enum Input {
    Document(ModelDocument),
    Expr(Expr),
}

impl Input {
    pub fn system(&self) -> &Expr {
        match self {
            Input::Document(d) => &d.system,
            Input::Expr(e) => e,
        }
    }
}

pub fn parse(text: &str) -> Result<ModelDocument> {
    let mut p = Parser::new(text)?;
    p.scope = Some(Scope::default());
    p.document()
}

/// Parses a structure expression without declarations; identifiers are not
/// checked.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// A document if the text has a `system = ...` line, otherwise a bare
/// expression.
pub fn parse_input(text: &str) -> Result<Input> {
    let toks = lex(text)?;
    let is_doc = toks
        .windows(2)
        .any(|w| matches!(&w[0].tok, Tok::Ident(s) if s == "system") && w[1].tok == Tok::Sym('='));
    if is_doc {
        parse(text).map(Input::Document)
    } else {
        parse_expr(text).map(Input::Expr)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Sym(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: Position,
}

fn syntax(pos: Position, message: impl Into<String>) -> Error {
    Error::Syntax { position: pos, message: message.into() }
}

fn semantic(pos: Position, message: impl Into<String>) -> Error {
    Error::Semantic { position: pos, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let cs: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < cs.len() {
        let c = cs[i];
        let pos = Position { line, column: col };
        let start = i;
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            while i < cs.len() && cs[i] != '\n' {
                i += 1;
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(cs[start..i].iter().collect()), pos });
        } else if c.is_ascii_digit() || c == '.' || (c == '-' && cs.get(i + 1).is_some_and(char::is_ascii_digit)) {
            i += 1;
            while i < cs.len() {
                let d = cs[i];
                let sign_after_exp = (d == '-' || d == '+') && matches!(cs[i - 1], 'e' | 'E');
                if !(d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || sign_after_exp) {
                    break;
                }
                i += 1;
            }
            let lexeme: String = cs[start..i].iter().collect();
            let v: f64 = lexeme.parse().map_err(|_| syntax(pos, format!("malformed number `{lexeme}`")))?;
            out.push(Token { tok: Tok::Num(v), pos });
        } else if "~=(),+*{}".contains(c) {
            i += 1;
            out.push(Token { tok: Tok::Sym(c), pos });
        } else {
            return Err(syntax(pos, format!("unexpected character `{c}`")));
        }
        col += i - start;
    }
    out.push(Token { tok: Tok::Eof, pos: Position { line, column: col } });
    Ok(out)
}

const RESERVED: [&str; 5] = ["system", "spare", "set", "always", "never"];

#[derive(Default)]
struct Scope {
    /// Declared blocks; `true` for spares.
    blocks: BTreeMap<String, bool>,
    sets: BTreeMap<String, Vec<BlockId>>,
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    /// `None` when parsing a bare expression.
    scope: Option<Scope>,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser { toks: lex(text)?, i: 0, scope: None })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.i]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<Position> {
        let t = self.bump();
        if t.tok == Tok::Sym(c) {
            Ok(t.pos)
        } else {
            Err(syntax(t.pos, format!("expected `{c}`, found {}", t.tok)))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        let t = self.bump();
        match t.tok {
            Tok::Ident(ref s) if s == kw => Ok(()),
            other => Err(syntax(t.pos, format!("expected `{kw}`, found {other}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Position)> {
        let t = self.bump();
        match t.tok {
            Tok::Ident(s) => Ok((s, t.pos)),
            other => Err(syntax(t.pos, format!("expected {what}, found {other}"))),
        }
    }

    fn number(&mut self) -> Result<(f64, Position)> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok((v, t.pos)),
            other => Err(syntax(t.pos, format!("expected a number, found {other}"))),
        }
    }

    fn expect_eof(&mut self) -> Result<()> {
        let t = self.peek();
        if t.tok == Tok::Eof {
            Ok(())
        } else {
            Err(syntax(t.pos, format!("unexpected {} after the end of the expression", t.tok)))
        }
    }

    fn document(&mut self) -> Result<ModelDocument> {
        let mut decls = Vec::new();
        loop {
            let t = self.peek().clone();
            match t.tok {
                Tok::Ident(ref s) if s == "system" => break,
                Tok::Ident(ref s) if s == "spare" => {
                    self.bump();
                    let (id, pos) = self.new_name("spare id")?;
                    self.expect_sym('~')?;
                    let dist = self.dist()?;
                    self.expect_keyword("dormancy")?;
                    let (dormancy, npos) = self.number()?;
                    if !(0.0..=1.0).contains(&dormancy) {
                        return Err(semantic(npos, format!("dormancy factor must lie in [0, 1], got {dormancy}")));
                    }
                    self.declare(id.clone(), pos, true);
                    decls.push(Decl::Spare { id, dist, dormancy });
                }
                Tok::Ident(ref s) if s == "set" => {
                    self.bump();
                    let (name, _) = self.new_name("set name")?;
                    self.expect_sym('=')?;
                    self.expect_sym('{')?;
                    let mut ids = Vec::new();
                    loop {
                        let (id, pos) = self.ident("a block id")?;
                        self.check_basic_ref(&id, pos)?;
                        if ids.contains(&id) {
                            return Err(semantic(pos, format!("`{id}` is listed twice in set `{name}`")));
                        }
                        ids.push(id);
                        if self.peek().tok == Tok::Sym(',') {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.expect_sym('}')?;
                    if let Some(scope) = &mut self.scope {
                        scope.sets.insert(name.clone(), ids.clone());
                    }
                    decls.push(Decl::Set { name, ids });
                }
                Tok::Ident(_) => {
                    let (id, pos) = self.new_name("block id")?;
                    self.expect_sym('~')?;
                    let dist = self.dist()?;
                    self.declare(id.clone(), pos, false);
                    decls.push(Decl::Block { id, dist });
                }
                other => {
                    return Err(syntax(t.pos, format!("expected a declaration or `system`, found {other}")));
                }
            }
        }
        self.expect_keyword("system")?;
        self.expect_sym('=')?;
        let system = self.expr()?;
        self.expect_eof()?;
        Ok(ModelDocument { decls, system })
    }

    /// A fresh, non-reserved name.
    fn new_name(&mut self, what: &str) -> Result<(String, Position)> {
        let (id, pos) = self.ident(what)?;
        if RESERVED.contains(&id.as_str()) {
            return Err(semantic(pos, format!("`{id}` is a reserved word")));
        }
        if let Some(scope) = &self.scope {
            if scope.blocks.contains_key(&id) || scope.sets.contains_key(&id) {
                return Err(semantic(pos, format!("duplicate id `{id}`")));
            }
        }
        Ok((id, pos))
    }

    fn declare(&mut self, id: String, _pos: Position, spare: bool) {
        if let Some(scope) = &mut self.scope {
            scope.blocks.insert(id, spare);
        }
    }

    fn dist(&mut self) -> Result<DistSpec> {
        let (name, pos) = self.ident("a distribution")?;
        self.expect_sym('(')?;
        let spec = match name.as_str() {
            "exp" => {
                let (rate, _) = self.number()?;
                DistSpec::Exp { rate }
            }
            "weibull" => {
                let (shape, _) = self.number()?;
                self.expect_sym(',')?;
                let (scale, _) = self.number()?;
                DistSpec::Weibull { shape, scale }
            }
            other => return Err(syntax(pos, format!("unknown distribution `{other}`; expected exp or weibull"))),
        };
        self.expect_sym(')')?;
        spec.to_distribution().map_err(|e| semantic(pos, e.to_string()))?;
        Ok(spec)
    }

    fn check_basic_ref(&self, id: &str, pos: Position) -> Result<()> {
        let Some(scope) = &self.scope else { return Ok(()) };
        match scope.blocks.get(id) {
            Some(false) => Ok(()),
            Some(true) => Err(semantic(
                pos,
                format!("spare `{id}` can only appear as the second argument of wsp, csp or hsp"),
            )),
            None if scope.sets.contains_key(id) => Err(semantic(
                pos,
                format!("set `{id}` can only appear inside series(...) or parallel(...)"),
            )),
            None => Err(semantic(pos, format!("unknown block `{id}`"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        while self.peek().tok == Tok::Sym('+') {
            self.bump();
            e = Expr::or(e, self.term()?);
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.factor()?;
        while self.peek().tok == Tok::Sym('*') {
            self.bump();
            e = Expr::and(e, self.factor()?);
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<Expr> {
        let t = self.bump();
        match t.tok {
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(name) if *self.peek_at(0) == Tok::Sym('(') => {
                self.bump();
                let e = self.call(&name, t.pos)?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "always" => Ok(Expr::Always),
                "never" => Ok(Expr::Never),
                _ => {
                    self.check_basic_ref(&name, t.pos)?;
                    Ok(Expr::Var(name))
                }
            },
            other => Err(syntax(t.pos, format!("expected an expression, found {other}"))),
        }
    }

    /// Arguments of `name(`, up to but excluding the closing parenthesis.
    fn call(&mut self, name: &str, pos: Position) -> Result<Expr> {
        match name {
            "wsp" | "csp" | "hsp" => {
                let main = self.expr()?;
                self.expect_sym(',')?;
                let (spare, spos) = self.ident("a spare id")?;
                if let Some(scope) = &self.scope {
                    match scope.blocks.get(&spare) {
                        Some(true) => {}
                        Some(false) => {
                            return Err(semantic(spos, format!("block `{spare}` is not declared as a spare")))
                        }
                        None => return Err(semantic(spos, format!("unknown spare `{spare}`"))),
                    }
                }
                Ok(match name {
                    "wsp" => Expr::wsp(main, spare),
                    "csp" => Expr::csp(main, spare),
                    _ => Expr::hsp(main, spare),
                })
            }
            "after" | "simult" | "incl_after" => {
                let a = self.expr()?;
                self.expect_sym(',')?;
                let b = self.expr()?;
                Ok(match name {
                    "after" => Expr::after(a, b),
                    "simult" => Expr::simult(a, b),
                    _ => Expr::incl_after(a, b),
                })
            }
            "series" | "parallel" => {
                let mut items = Vec::new();
                loop {
                    let set = match (&self.peek().tok, self.peek_at(1)) {
                        (Tok::Ident(s), Tok::Sym(',') | Tok::Sym(')')) => {
                            self.scope.as_ref().and_then(|sc| sc.sets.get(s)).cloned()
                        }
                        _ => None,
                    };
                    match set {
                        Some(ids) => {
                            self.bump();
                            items.extend(ids.into_iter().map(Expr::Var));
                        }
                        None => items.push(self.expr()?),
                    }
                    if self.peek().tok == Tok::Sym(',') {
                        self.bump();
                    } else {
                        break;
                    }
                }
                Ok(if name == "series" { Expr::NaryAnd(items) } else { Expr::NaryOr(items) })
            }
            other => Err(syntax(pos, format!("unknown function `{other}`"))),
        }
    }
}
