//! A small language for two-variable functional equations.
//!
//! ```text
//! equation := expr "=" expr
//! expr     := term (("+" | "-") term)*
//! term     := unary ("*" unary)*
//! unary    := "-" unary | atom
//! atom     := "x" | "y" | integer | ident "(" expr ")" | ident | "(" expr ")"
//! ```
//!
//! Multiplication keeps operand order, so equations are meaningful over
//! noncommutative rings. A bare identifier is a scalar parameter whose value
//! is bound from outside; an applied identifier is an unknown function.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Elem, Ring};
use crate::maps::FnTable;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "error")]
pub enum EqError {
    #[error("syntax error at offset {offset}: {message}")]
    SyntaxError { offset: usize, message: String },
    #[error("{name:?} is used both as a function and as a parameter")]
    ArityError { name: String },
    #[error("no value bound for {name:?}")]
    UnboundName { name: String },
    #[error("integer literals need a unital ring")]
    LiteralInNonUnitalRing,
    #[error("function argument {elem} lies outside the domain")]
    ArgumentOutsideDomain { elem: Elem },
    #[error("table for {name:?} has {got} values, domain has {expected}")]
    TableLength { name: String, expected: usize, got: usize },
    #[error("value {value} bound to {name:?} is not a ring element")]
    ValueOutOfRange { name: String, value: Elem },
    #[error("equation is not reducible at y = 1: {reason}")]
    NotReducible { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Expr {
    X,
    Y,
    Int(u64),
    Param(String),
    App(String, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
}

impl Expr {
    pub fn app(name: &str, arg: Expr) -> Expr {
        Expr::App(name.to_string(), Box::new(arg))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(..) => 3,
            _ => 4,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.write_at(f, 1)?;
            return f.write_str(")");
        }
        match self {
            Expr::X => f.write_str("x"),
            Expr::Y => f.write_str("y"),
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Param(p) => f.write_str(p),
            Expr::App(name, arg) => {
                write!(f, "{name}(")?;
                arg.write_at(f, 1)?;
                f.write_str(")")
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write_at(f, 1)?;
                f.write_str(if matches!(self, Expr::Add(..)) { " + " } else { " - " })?;
                b.write_at(f, 2)
            }
            Expr::Mul(a, b) => {
                a.write_at(f, 2)?;
                f.write_str("*")?;
                b.write_at(f, 3)
            }
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_at(f, 3)
            }
        }
    }

    /// Replaces every `y` by `e`.
    pub fn substitute_y(&self, e: &Expr) -> Expr {
        self.map_leaves(&|leaf| match leaf {
            Expr::Y => Some(e.clone()),
            _ => None,
        })
    }

    fn map_leaves(&self, g: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
        if let Some(r) = g(self) {
            return r;
        }
        let bx = |e: &Expr| Box::new(e.map_leaves(g));
        match self {
            Expr::App(n, a) => Expr::App(n.clone(), bx(a)),
            Expr::Add(a, b) => Expr::Add(bx(a), bx(b)),
            Expr::Sub(a, b) => Expr::Sub(bx(a), bx(b)),
            Expr::Mul(a, b) => Expr::Mul(bx(a), bx(b)),
            Expr::Neg(a) => Expr::Neg(bx(a)),
            leaf => leaf.clone(),
        }
    }

    /// Whether the function `name` is applied anywhere in the expression.
    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Expr::App(n, a) => n == name || a.mentions(name),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.mentions(name) || b.mentions(name),
            Expr::Neg(a) => a.mentions(name),
            _ => false,
        }
    }

    fn collect_names(&self, funs: &mut BTreeSet<String>, params: &mut BTreeSet<String>) {
        match self {
            Expr::Param(p) => {
                params.insert(p.clone());
            }
            Expr::App(n, a) => {
                funs.insert(n.clone());
                a.collect_names(funs, params);
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_names(funs, params);
                b.collect_names(funs, params);
            }
            Expr::Neg(a) => a.collect_names(funs, params),
            _ => {}
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquationAst {
    pub lhs: Expr,
    pub rhs: Expr,
    pub functions: Vec<String>,
    pub params: Vec<String>,
}

impl EquationAst {
    pub fn new(lhs: Expr, rhs: Expr) -> Result<Self, EqError> {
        let mut funs = BTreeSet::new();
        let mut params = BTreeSet::new();
        lhs.collect_names(&mut funs, &mut params);
        rhs.collect_names(&mut funs, &mut params);
        if let Some(name) = funs.intersection(&params).next() {
            return Err(EqError::ArityError { name: name.clone() });
        }
        Ok(EquationAst {
            lhs,
            rhs,
            functions: funs.into_iter().collect(),
            params: params.into_iter().collect(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("AST serializes")
    }
}

impl fmt::Display for EquationAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

impl std::str::FromStr for EquationAst {
    type Err = EqError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_equation(s)
    }
}

pub fn parse_equation(text: &str) -> Result<EquationAst, EqError> {
    let mut p = Parser { src: text, pos: 0 };
    let lhs = p.expr()?;
    p.expect('=')?;
    let rhs = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    EquationAst::new(lhs, rhs)
}

/// Parses a single expression (no `=`).
pub fn parse_expr(text: &str) -> Result<Expr, EqError> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> EqError {
        let found = match self.peek() {
            Some(c) => format!("{message}, found {c:?}"),
            None => format!("{message}, found end of input"),
        };
        EqError::SyntaxError { offset: self.pos + 1, message: found }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), EqError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {c:?}")))
        }
    }

    fn expr(&mut self) -> Result<Expr, EqError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat('-') {
                acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, EqError> {
        let mut acc = self.unary()?;
        while self.eat('*') {
            acc = Expr::Mul(Box::new(acc), Box::new(self.unary()?));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, EqError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, EqError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                self.src[start..self.pos].parse().map(Expr::Int).map_err(|_| EqError::SyntaxError {
                    offset: start + 1,
                    message: "integer literal too large".into(),
                })
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                while let Some(c) = self.peek() {
                    if !(c.is_alphanumeric() || c == '_') {
                        break;
                    }
                    self.pos += c.len_utf8();
                }
                let name = &self.src[start..self.pos];
                match name {
                    "x" => Ok(Expr::X),
                    "y" => Ok(Expr::Y),
                    _ if self.eat('(') => {
                        let arg = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::app(name, arg))
                    }
                    _ => Ok(Expr::Param(name.to_string())),
                }
            }
            _ => Err(self.error("expected an operand")),
        }
    }
}

/// Values for the free names of an equation.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Binding {
    pub functions: BTreeMap<String, FnTable>,
    pub params: BTreeMap<String, Elem>,
}

impl Binding {
    pub fn with_function(mut self, name: &str, table: FnTable) -> Self {
        self.functions.insert(name.to_string(), table);
        self
    }

    pub fn with_param(mut self, name: &str, value: Elem) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }
}

/// An expression with names resolved: functions by slot index, parameters
/// and literals by ring element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    X,
    Y,
    Const(Elem),
    Apply(usize, Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Neg(Box<Node>),
}

/// Why a partial evaluation could not finish.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stuck {
    Unassigned,
    Outside(Elem),
}

impl Node {
    /// Resolves `expr`; `functions` gives the slot order of unknowns.
    pub fn compile(
        expr: &Expr,
        functions: &[String],
        params: &BTreeMap<String, Elem>,
        ring: &Ring,
    ) -> Result<Node, EqError> {
        let rec = |e: &Expr| Node::compile(e, functions, params, ring).map(Box::new);
        Ok(match expr {
            Expr::X => Node::X,
            Expr::Y => Node::Y,
            Expr::Int(0) => Node::Const(ring.zero()),
            Expr::Int(n) => {
                if !ring.is_unital() {
                    return Err(EqError::LiteralInNonUnitalRing);
                }
                let reduced = (*n % ring.characteristic() as u64) as i64;
                Node::Const(ring.integer(reduced).expect("unital"))
            }
            Expr::Param(p) => {
                let v = *params.get(p).ok_or_else(|| EqError::UnboundName { name: p.clone() })?;
                if v >= ring.size() {
                    return Err(EqError::ValueOutOfRange { name: p.clone(), value: v });
                }
                Node::Const(v)
            }
            Expr::App(name, arg) => {
                let slot = functions
                    .iter()
                    .position(|f| f == name)
                    .ok_or_else(|| EqError::UnboundName { name: name.clone() })?;
                Node::Apply(slot, rec(arg)?)
            }
            Expr::Add(a, b) => Node::Add(rec(a)?, rec(b)?),
            Expr::Sub(a, b) => Node::Sub(rec(a)?, rec(b)?),
            Expr::Mul(a, b) => Node::Mul(rec(a)?, rec(b)?),
            Expr::Neg(a) => Node::Neg(rec(a)?),
        })
    }

    /// Evaluates at `(x, y)`; `get(slot, position)` reads a table entry and
    /// returns `None` while it is unassigned.
    #[inline]
    pub fn eval<G>(&self, ring: &Ring, x: Elem, y: Elem, get: &G) -> Result<Elem, Stuck>
    where
        G: Fn(usize, usize) -> Option<Elem>,
    {
        Ok(match self {
            Node::X => x,
            Node::Y => y,
            Node::Const(c) => *c,
            Node::Apply(slot, arg) => {
                let a = arg.eval(ring, x, y, get)?;
                let pos = ring.domain_position(a).ok_or(Stuck::Outside(a))?;
                get(*slot, pos).ok_or(Stuck::Unassigned)?
            }
            Node::Add(a, b) => ring.add(a.eval(ring, x, y, get)?, b.eval(ring, x, y, get)?),
            Node::Sub(a, b) => ring.sub(a.eval(ring, x, y, get)?, b.eval(ring, x, y, get)?),
            Node::Mul(a, b) => ring.mul(a.eval(ring, x, y, get)?, b.eval(ring, x, y, get)?),
            Node::Neg(a) => ring.neg(a.eval(ring, x, y, get)?),
        })
    }

    /// Table entries `(slot, position)` read at `(x, y)`, or `Ok(None)` when
    /// some argument itself applies an unknown (the reads then depend on
    /// values, not just on the pair).
    pub fn static_deps(&self, ring: &Ring, x: Elem, y: Elem) -> Result<Option<Vec<(usize, usize)>>, EqError> {
        let mut out = Vec::new();
        if self.collect_deps(ring, x, y, &mut out)? {
            Ok(Some(out))
        } else {
            Ok(None)
        }
    }

    fn collect_deps(
        &self,
        ring: &Ring,
        x: Elem,
        y: Elem,
        out: &mut Vec<(usize, usize)>,
    ) -> Result<bool, EqError> {
        match self {
            Node::Apply(slot, arg) => {
                if arg.has_apply() {
                    return Ok(false);
                }
                let none = |_: usize, _: usize| None;
                let a = arg.eval(ring, x, y, &none).expect("argument has no applications");
                let pos = ring.domain_position(a).ok_or(EqError::ArgumentOutsideDomain { elem: a })?;
                out.push((*slot, pos));
                Ok(true)
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => {
                Ok(a.collect_deps(ring, x, y, out)? && b.collect_deps(ring, x, y, out)?)
            }
            Node::Neg(a) => a.collect_deps(ring, x, y, out),
            _ => Ok(true),
        }
    }

    fn has_apply(&self) -> bool {
        match self {
            Node::Apply(..) => true,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => a.has_apply() || b.has_apply(),
            Node::Neg(a) => a.has_apply(),
            _ => false,
        }
    }
}

/// Resolves `binding` into table slots ordered like `names`.
pub(crate) fn binding_tables<'b>(
    names: &[String],
    binding: &'b Binding,
    ring: &Ring,
) -> Result<Vec<&'b FnTable>, EqError> {
    names
        .iter()
        .map(|n| {
            let t = binding.functions.get(n).ok_or_else(|| EqError::UnboundName { name: n.clone() })?;
            if t.values.len() != ring.domain_len() {
                return Err(EqError::TableLength {
                    name: n.clone(),
                    expected: ring.domain_len(),
                    got: t.values.len(),
                });
            }
            if let Some(&v) = t.values.iter().find(|&&v| v >= ring.size()) {
                return Err(EqError::ValueOutOfRange { name: n.clone(), value: v });
            }
            Ok(t)
        })
        .collect()
}

pub(crate) fn stuck_to_error(s: Stuck) -> EqError {
    match s {
        Stuck::Outside(elem) => EqError::ArgumentOutsideDomain { elem },
        Stuck::Unassigned => unreachable!("complete bindings have no unassigned entries"),
    }
}

/// Value of one side at `(x, y)` under a complete binding.
pub fn eval_side(side: &Expr, binding: &Binding, x: Elem, y: Elem, ring: &Ring) -> Result<Elem, EqError> {
    let mut funs = BTreeSet::new();
    let mut params = BTreeSet::new();
    side.collect_names(&mut funs, &mut params);
    let names: Vec<String> = funs.into_iter().collect();
    let tables = binding_tables(&names, binding, ring)?;
    let node = Node::compile(side, &names, &binding.params, ring)?;
    let get = |slot: usize, pos: usize| Some(tables[slot].values[pos]);
    node.eval(ring, x, y, &get).map_err(stuck_to_error)
}

/// Outcome of setting `y := 1` in `pivot(x*y) = rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PivotResult {
    /// `pivot(x) = expr`, where `expr` does not mention the pivot.
    Definition(Expr),
    /// `expr = 0` must hold for every `x`.
    Constraint(Expr),
}

pub fn pivot_reduce(ast: &EquationAst, pivot: &str) -> Result<PivotResult, EqError> {
    let shaped = matches!(&ast.lhs, Expr::App(name, arg)
        if name == pivot && **arg == Expr::Mul(Box::new(Expr::X), Box::new(Expr::Y)));
    if !shaped {
        return Err(EqError::NotReducible { reason: format!("left side must be exactly {pivot}(x*y)") });
    }
    let rhs = ast.rhs.substitute_y(&Expr::Int(1));
    if !rhs.mentions(pivot) {
        return Ok(PivotResult::Definition(rhs));
    }
    let lhs = Expr::app(pivot, Expr::X);
    let diff = NcPoly::from_expr(&rhs).sub(&NcPoly::from_expr(&lhs));
    Ok(PivotResult::Constraint(diff.to_expr()))
}

/// Noncommutative integer polynomials used to tidy pivot constraints.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
struct NcPoly(BTreeMap<Vec<Factor>, i128>);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Factor {
    X,
    Y,
    Param(String),
    App(String, NcPoly),
}

impl NcPoly {
    fn constant(c: i128) -> Self {
        let mut p = NcPoly::default();
        p.add_term(Vec::new(), c);
        p
    }

    fn factor(f: Factor) -> Self {
        let mut p = NcPoly::default();
        p.add_term(vec![f], 1);
        p
    }

    fn add_term(&mut self, mono: Vec<Factor>, c: i128) {
        let entry = self.0.entry(mono).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.0.retain(|_, v| *v != 0);
        }
    }

    fn add(&self, other: &NcPoly) -> NcPoly {
        let mut out = self.clone();
        for (m, &c) in &other.0 {
            out.add_term(m.clone(), c);
        }
        out
    }

    fn scale(&self, k: i128) -> NcPoly {
        let mut out = NcPoly::default();
        for (m, &c) in &self.0 {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    fn sub(&self, other: &NcPoly) -> NcPoly {
        self.add(&other.scale(-1))
    }

    fn mul(&self, other: &NcPoly) -> NcPoly {
        let mut out = NcPoly::default();
        for (a, &ca) in &self.0 {
            for (b, &cb) in &other.0 {
                let mono: Vec<Factor> = a.iter().chain(b).cloned().collect();
                out.add_term(mono, ca * cb);
            }
        }
        out
    }

    fn from_expr(e: &Expr) -> NcPoly {
        match e {
            Expr::X => NcPoly::factor(Factor::X),
            Expr::Y => NcPoly::factor(Factor::Y),
            Expr::Int(n) => NcPoly::constant(*n as i128),
            Expr::Param(p) => NcPoly::factor(Factor::Param(p.clone())),
            Expr::App(n, a) => NcPoly::factor(Factor::App(n.clone(), NcPoly::from_expr(a))),
            Expr::Add(a, b) => NcPoly::from_expr(a).add(&NcPoly::from_expr(b)),
            Expr::Sub(a, b) => NcPoly::from_expr(a).sub(&NcPoly::from_expr(b)),
            Expr::Mul(a, b) => NcPoly::from_expr(a).mul(&NcPoly::from_expr(b)),
            Expr::Neg(a) => NcPoly::from_expr(a).scale(-1),
        }
    }

    fn to_expr(&self) -> Expr {
        let mut acc: Option<Expr> = None;
        for (mono, &c) in &self.0 {
            let mut factors: Vec<Expr> = mono
                .iter()
                .map(|f| match f {
                    Factor::X => Expr::X,
                    Factor::Y => Expr::Y,
                    Factor::Param(p) => Expr::Param(p.clone()),
                    Factor::App(n, a) => Expr::app(n, a.to_expr()),
                })
                .collect();
            let mag = c.unsigned_abs() as u64;
            if mag != 1 || factors.is_empty() {
                factors.insert(0, Expr::Int(mag));
            }
            let term =
                factors.into_iter().reduce(|a, b| Expr::Mul(Box::new(a), Box::new(b))).expect("nonempty");
            acc = Some(match (acc, c < 0) {
                (None, false) => term,
                (None, true) => Expr::Neg(Box::new(term)),
                (Some(a), false) => Expr::Add(Box::new(a), Box::new(term)),
                (Some(a), true) => Expr::Sub(Box::new(a), Box::new(term)),
            });
        }
        acc.unwrap_or(Expr::Int(0))
    }
}
