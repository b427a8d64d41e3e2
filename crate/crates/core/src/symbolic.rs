//! Polynomial identities for parametric solution families.
//!
//! A family writes each unknown as a sum of parameter coefficients times
//! products of generators: the identity, multiplicative maps `m`,
//! logarithmic maps `l` and Leibniz maps `d`. Substituting into an equation
//! and rewriting
//!
//! ```text
//! m(xy) = m_x m_y      l(xy) = l_x + l_y      d(xy) = d_x y + x d_y
//! ```
//!
//! gives polynomials in commuting indeterminates (`x`, `y`, `m_x`, ...) with
//! coefficients in the parameters. The family solves the equation for every
//! choice of generators iff each indeterminate coefficient of `lhs - rhs`
//! vanishes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{Elem, Ring};
use crate::eqdsl::{parse_equation, Binding, EquationAst, Expr};
use crate::maps::FnTable;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "error")]
pub enum SymError {
    #[error("unsupported argument {arg}: only x, y and x*y are allowed")]
    UnsupportedArgument { arg: String },
    #[error("family has no function {name:?}")]
    MissingFunction { name: String },
    #[error("no value for parameter {name:?}")]
    MissingParameter { name: String },
    #[error("no table for generator {name:?}")]
    MissingGenerator { name: String },
    #[error("{value} has no image in {ring}")]
    NotRepresentable { value: String, ring: String },
    #[error("cannot parse polynomial: {message}")]
    Parse { message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Parameter,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub kind: VarKind,
    pub name: String,
}

impl Var {
    pub fn param(name: &str) -> Var {
        Var { kind: VarKind::Parameter, name: name.to_string() }
    }

    pub fn indeterminate(name: &str) -> Var {
        Var { kind: VarKind::Indeterminate, name: name.to_string() }
    }

    /// `x`, `y` and names ending in `_x` or `_y` are indeterminates.
    pub fn named(name: &str) -> Var {
        if name == "x" || name == "y" || name.ends_with("_x") || name.ends_with("_y") {
            Var::indeterminate(name)
        } else {
            Var::param(name)
        }
    }
}

/// Power product, ordered by total degree then by its factors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Monomial(BTreeMap<Var, u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(v: Var) -> Self {
        Monomial(BTreeMap::from([(v, 1)]))
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn powers(&self) -> impl Iterator<Item = (&Var, u32)> {
        self.0.iter().map(|(v, &e)| (v, e))
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let mut out = self.clone();
        for (v, e) in &other.0 {
            *out.0.entry(v.clone()).or_insert(0) += e;
        }
        out
    }

    /// Splits into the parameter part and the indeterminate part.
    fn split(&self) -> (Monomial, Monomial) {
        let (p, i): (BTreeMap<_, _>, BTreeMap<_, _>) =
            self.0.iter().map(|(v, e)| (v.clone(), *e)).partition(|(v, _)| v.kind == VarKind::Parameter);
        (Monomial(p), Monomial(i))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.iter().cmp(other.0.iter()))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, &e)| if e == 1 { v.name.clone() } else { format!("{}^{e}", v.name) })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

/// Polynomial with rational coefficients; no zero coefficients are stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymExpr(BTreeMap<Monomial, BigRational>);

impl SymExpr {
    pub fn zero() -> Self {
        SymExpr::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut s = SymExpr::zero();
        s.add_term(Monomial::one(), c);
        s
    }

    pub fn int(n: i64) -> Self {
        SymExpr::constant(BigRational::from_integer(n.into()))
    }

    pub fn var(v: Var) -> Self {
        let mut s = SymExpr::zero();
        s.add_term(Monomial::var(v), BigRational::one());
        s
    }

    pub fn param(name: &str) -> Self {
        SymExpr::var(Var::param(name))
    }

    pub fn indeterminate(name: &str) -> Self {
        SymExpr::var(Var::indeterminate(name))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.0.iter()
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.0.entry(m.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&m);
        }
    }

    pub fn scale(&self, c: &BigRational) -> SymExpr {
        let mut out = SymExpr::zero();
        for (m, k) in &self.0 {
            out.add_term(m.clone(), k * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> SymExpr {
        (0..e).fold(SymExpr::int(1), |acc, _| &acc * self)
    }

    /// Parameter names occurring in the polynomial.
    pub fn parameters(&self) -> BTreeSet<String> {
        self.0
            .keys()
            .flat_map(|m| m.0.keys())
            .filter(|v| v.kind == VarKind::Parameter)
            .map(|v| v.name.clone())
            .collect()
    }

    /// Replaces parameters by rationals; the rest stays symbolic.
    pub fn evaluate_params(&self, values: &BTreeMap<String, BigRational>) -> Result<SymExpr, SymError> {
        let mut out = SymExpr::zero();
        for (m, c) in &self.0 {
            let mut coeff = c.clone();
            let mut rest = Monomial::one();
            for (v, &e) in &m.0 {
                if v.kind == VarKind::Parameter {
                    let val = values
                        .get(&v.name)
                        .ok_or_else(|| SymError::MissingParameter { name: v.name.clone() })?;
                    coeff *= num::pow(val.clone(), e as usize);
                } else {
                    rest.0.insert(v.clone(), e);
                }
            }
            out.add_term(rest, coeff);
        }
        Ok(out)
    }

    /// The coefficient (a parameter polynomial) of each indeterminate monomial.
    pub fn coefficients(&self) -> BTreeMap<Monomial, SymExpr> {
        let mut out: BTreeMap<Monomial, SymExpr> = BTreeMap::new();
        for (m, c) in &self.0 {
            let (p, i) = m.split();
            out.entry(i).or_default().add_term(p, c.clone());
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Scaled so the greatest monomial has coefficient 1.
    pub fn monic(&self) -> SymExpr {
        match self.0.iter().next_back() {
            Some((_, lead)) => self.scale(&lead.recip()),
            None => SymExpr::zero(),
        }
    }
}

impl std::ops::Add for &SymExpr {
    type Output = SymExpr;
    fn add(self, rhs: &SymExpr) -> SymExpr {
        let mut out = self.clone();
        for (m, c) in &rhs.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &SymExpr {
    type Output = SymExpr;
    fn sub(self, rhs: &SymExpr) -> SymExpr {
        self + &-rhs
    }
}

impl std::ops::Neg for &SymExpr {
    type Output = SymExpr;
    fn neg(self) -> SymExpr {
        self.scale(&-BigRational::one())
    }
}

impl std::ops::Mul for &SymExpr {
    type Output = SymExpr;
    fn mul(self, rhs: &SymExpr) -> SymExpr {
        let mut out = SymExpr::zero();
        for (a, ca) in &self.0 {
            for (b, cb) in &rhs.0 {
                out.add_term(a.times(b), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.0.iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = c.abs();
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for SymExpr {
    type Err = SymError;

    fn from_str(s: &str) -> Result<Self, SymError> {
        let mut p = PolyParser { src: s.as_bytes(), pos: 0 };
        let e = p.sum()?;
        p.ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }
}

impl Serialize for SymExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SymExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Reads the rendered form: sums of `c*v^e*...` with rationals `p/q`.
struct PolyParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl PolyParser<'_> {
    fn error(&self, message: &str) -> SymError {
        SymError::Parse { message: format!("{message} at offset {}", self.pos + 1) }
    }

    fn ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<SymExpr, SymError> {
        let mut acc = if self.eat(b'-') { -&self.product()? } else { self.product()? };
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.product()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.product()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<SymExpr, SymError> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn integer(&mut self) -> Option<BigInt> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).ok()?.parse().ok()
    }

    fn factor(&mut self) -> Result<SymExpr, SymError> {
        self.ws();
        if self.eat(b'(') {
            let e = self.sum()?;
            if !self.eat(b')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(e);
        }
        let c = *self.src.get(self.pos).ok_or_else(|| self.error("unexpected end"))?;
        if c.is_ascii_digit() {
            let n = self.integer().ok_or_else(|| self.error("bad integer"))?;
            let d = if self.eat(b'/') {
                self.ws();
                self.integer().ok_or_else(|| self.error("bad denominator"))?
            } else {
                BigInt::one()
            };
            if d.is_zero() {
                return Err(self.error("zero denominator"));
            }
            return Ok(SymExpr::constant(BigRational::new(n, d)));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            let v = SymExpr::var(Var::named(name));
            if self.eat(b'^') {
                self.ws();
                let e = self.integer().and_then(|e| e.to_u32()).ok_or_else(|| self.error("bad exponent"))?;
                return Ok(v.pow(e));
            }
            return Ok(v);
        }
        Err(self.error("expected a number, a name or '('"))
    }
}

/// A generator of a family: the identity or a named structured map.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Atom {
    Id,
    Mult(String),
    Log(String),
    Leib(String),
}

impl Atom {
    fn at_var(&self, var: &str) -> SymExpr {
        match self {
            Atom::Id => SymExpr::indeterminate(var),
            Atom::Mult(n) | Atom::Log(n) | Atom::Leib(n) => SymExpr::indeterminate(&format!("{n}_{var}")),
        }
    }

    /// Value at `x*y` after rewriting.
    fn at_product(&self) -> SymExpr {
        let x = SymExpr::indeterminate("x");
        let y = SymExpr::indeterminate("y");
        match self {
            Atom::Id => &x * &y,
            Atom::Mult(_) => &self.at_var("x") * &self.at_var("y"),
            Atom::Log(_) => &self.at_var("x") + &self.at_var("y"),
            Atom::Leib(_) => &(&self.at_var("x") * &y) + &(&x * &self.at_var("y")),
        }
    }
}

/// `coeff * Π atoms`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyTerm {
    pub coeff: SymExpr,
    pub atoms: Vec<Atom>,
}

pub type FormalFn = Vec<FamilyTerm>;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SolutionFamily {
    pub functions: BTreeMap<String, FormalFn>,
    /// Side conditions that are not polynomial identities, e.g. `b3 != 0`.
    #[serde(default)]
    pub annotations: Vec<String>,
}

impl SolutionFamily {
    pub fn with(mut self, name: &str, terms: Vec<(SymExpr, Vec<Atom>)>) -> Self {
        self.functions.insert(
            name.to_string(),
            terms.into_iter().map(|(coeff, atoms)| FamilyTerm { coeff, atoms }).collect(),
        );
        self
    }

    pub fn annotate(mut self, note: &str) -> Self {
        self.annotations.push(note.to_string());
        self
    }

    /// Parameters appearing in coefficients.
    pub fn parameters(&self) -> BTreeSet<String> {
        self.functions.values().flatten().flat_map(|t| t.coeff.parameters()).collect()
    }

    fn apply(&self, name: &str, arg: &Expr) -> Result<SymExpr, SymError> {
        let terms =
            self.functions.get(name).ok_or_else(|| SymError::MissingFunction { name: name.to_string() })?;
        let at = |a: &Atom| -> Result<SymExpr, SymError> {
            Ok(match arg {
                Expr::X => a.at_var("x"),
                Expr::Y => a.at_var("y"),
                Expr::Mul(l, r) if matches!((&**l, &**r), (Expr::X, Expr::Y) | (Expr::Y, Expr::X)) => {
                    a.at_product()
                }
                other => return Err(SymError::UnsupportedArgument { arg: other.to_string() }),
            })
        };
        let mut out = SymExpr::zero();
        for t in terms {
            let mut prod = t.coeff.clone();
            for a in &t.atoms {
                prod = &prod * &at(a)?;
            }
            out = &out + &prod;
        }
        Ok(out)
    }

    fn expand(&self, e: &Expr) -> Result<SymExpr, SymError> {
        Ok(match e {
            Expr::X => SymExpr::indeterminate("x"),
            Expr::Y => SymExpr::indeterminate("y"),
            Expr::Int(n) => SymExpr::constant(BigRational::from_integer((*n).into())),
            Expr::Param(p) => SymExpr::param(p),
            Expr::App(name, arg) => self.apply(name, arg)?,
            Expr::Add(a, b) => &self.expand(a)? + &self.expand(b)?,
            Expr::Sub(a, b) => &self.expand(a)? - &self.expand(b)?,
            Expr::Mul(a, b) => &self.expand(a)? * &self.expand(b)?,
            Expr::Neg(a) => -&self.expand(a)?,
        })
    }
}

/// Both sides of `ast` with the family substituted and rewritten.
pub fn family_substitute(family: &SolutionFamily, ast: &EquationAst) -> Result<(SymExpr, SymExpr), SymError> {
    Ok((family.expand(&ast.lhs)?, family.expand(&ast.rhs)?))
}

/// Monic coefficient polynomials of `lhs - rhs`, one per indeterminate
/// monomial, deduplicated.
pub fn derive_constraints(family: &SolutionFamily, ast: &EquationAst) -> Result<BTreeSet<SymExpr>, SymError> {
    let (l, r) = family_substitute(family, ast)?;
    Ok((&l - &r).coefficients().into_values().map(|c| c.monic()).collect())
}

/// Constraints rendered and sorted as strings.
pub fn render_constraints(constraints: &BTreeSet<SymExpr>) -> Vec<String> {
    let mut v: Vec<String> = constraints.iter().map(|c| c.to_string()).collect();
    v.sort();
    v
}

/// Whether `lhs - rhs` vanishes identically once parameters are fixed.
pub fn check_identity(
    family: &SolutionFamily,
    ast: &EquationAst,
    params: &BTreeMap<String, BigRational>,
) -> Result<bool, SymError> {
    let needed = family.parameters().into_iter().chain(ast.params.iter().cloned());
    for name in needed {
        if !params.contains_key(&name) {
            return Err(SymError::MissingParameter { name });
        }
    }
    let (l, r) = family_substitute(family, ast)?;
    Ok((&l - &r).evaluate_params(params)?.is_zero())
}

/// `n/d` as the element `n·d⁻¹` of a unital ring, if `d·1` is invertible.
pub fn rational_in_ring(q: &BigRational, ring: &Ring) -> Result<Elem, SymError> {
    let unrepresentable =
        || SymError::NotRepresentable { value: q.to_string(), ring: ring.label().to_string() };
    let ch = BigInt::from(ring.characteristic());
    let reduce = |n: &BigInt| -> Option<Elem> {
        let r = ((n % &ch) + &ch) % &ch;
        ring.integer(r.to_i64()?)
    };
    let num = reduce(q.numer()).ok_or_else(unrepresentable)?;
    let den = reduce(q.denom()).ok_or_else(unrepresentable)?;
    let inv = ring.inverse(den).ok_or_else(unrepresentable)?;
    Ok(ring.mul(num, inv))
}

/// Concrete tables of every family member for the given parameter values
/// and generator tables (`m`, `l`, `d` by name).
pub fn instantiate(
    family: &SolutionFamily,
    ring: &Ring,
    params: &BTreeMap<String, BigRational>,
    generators: &BTreeMap<String, FnTable>,
) -> Result<Binding, SymError> {
    let mut binding = Binding::default();
    for (name, terms) in &family.functions {
        let mut values = vec![ring.zero(); ring.domain_len()];
        for t in terms {
            let coeff = t.coeff.evaluate_params(params)?;
            let c = match coeff.0.iter().next() {
                None => ring.zero(),
                Some((m, q)) if m.is_one() && coeff.0.len() == 1 => rational_in_ring(q, ring)?,
                Some((m, _)) => {
                    let v = m.0.keys().next().expect("non-constant");
                    return Err(SymError::MissingParameter { name: v.name.clone() });
                }
            };
            for (pos, &x) in ring.domain().iter().enumerate() {
                let mut v = c;
                for a in &t.atoms {
                    let factor = match a {
                        Atom::Id => x,
                        Atom::Mult(g) | Atom::Log(g) | Atom::Leib(g) => {
                            generators
                                .get(g)
                                .ok_or_else(|| SymError::MissingGenerator { name: g.clone() })?
                                .values[pos]
                        }
                    };
                    v = ring.mul(v, factor);
                }
                values[pos] = ring.add(values[pos], v);
            }
        }
        binding.functions.insert(name.clone(), FnTable::new(values));
    }
    Ok(binding)
}

/// A named family together with the equation it is checked against.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub equation: &'static str,
    pub family: SolutionFamily,
}

impl Preset {
    pub fn ast(&self) -> EquationAst {
        parse_equation(self.equation).expect("preset equations parse")
    }
}

fn p(s: &str) -> SymExpr {
    s.parse().expect("preset coefficients parse")
}

fn id() -> Atom {
    Atom::Id
}

fn mult(n: &str) -> Atom {
    Atom::Mult(n.into())
}

fn log(n: &str) -> Atom {
    Atom::Log(n.into())
}

fn leib(n: &str) -> Atom {
    Atom::Leib(n.into())
}

const PEXIDER: &str = "f(x*y)=h(x)*h(y)+x*k(y)+k(x)*y";

/// Linear-in-logarithms ansatz `(a l + b) x + c m` for each unknown.
fn log_mult_ansatz(pre: [&str; 3]) -> Vec<(SymExpr, Vec<Atom>)> {
    vec![(p(pre[0]), vec![log("l"), id()]), (p(pre[1]), vec![id()]), (p(pre[2]), vec![mult("m")])]
}

fn two_log_terms(prefix: &str, quadratic: bool) -> Vec<(SymExpr, Vec<Atom>)> {
    let mut t = Vec::new();
    if quadratic {
        for (i, li) in ["l1", "l2"].iter().enumerate() {
            for (j, lj) in ["l1", "l2"].iter().enumerate() {
                t.push((p(&format!("{prefix}{}{}", i + 1, j + 1)), vec![log(li), log(lj), id()]));
            }
        }
    }
    t.push((p(&format!("{prefix}1")), vec![log("l1"), id()]));
    t.push((p(&format!("{prefix}2")), vec![log("l2"), id()]));
    t.push((p(prefix), vec![id()]));
    t
}

/// The built-in families.
pub fn presets() -> Vec<Preset> {
    vec![
        Preset {
            name: "thm5",
            equation: PEXIDER,
            family: SolutionFamily::default()
                .with(
                    "f",
                    vec![
                        (p("g1"), vec![log("l"), id()]),
                        (p("b2^2 + 2*g2"), vec![id()]),
                        (p("b3^2"), vec![mult("m")]),
                    ],
                )
                .with("h", vec![(p("b2"), vec![id()]), (p("b3"), vec![mult("m")])])
                .with(
                    "k",
                    vec![(p("g1"), vec![log("l"), id()]), (p("g2"), vec![id()]), (p("g3"), vec![mult("m")])],
                )
                .annotate("b3 != 0")
                .annotate("g1 != 0"),
        },
        Preset {
            name: "log-mult-ansatz",
            equation: PEXIDER,
            family: SolutionFamily::default()
                .with("f", log_mult_ansatz(["a1", "a2", "a3"]))
                .with("h", log_mult_ansatz(["b1", "b2", "b3"]))
                .with("k", log_mult_ansatz(["g1", "g2", "g3"])),
        },
        Preset {
            name: "two-log-ansatz",
            equation: PEXIDER,
            family: SolutionFamily::default()
                .with("f", two_log_terms("a", false))
                .with("h", two_log_terms("b", false))
                .with("k", two_log_terms("g", false)),
        },
        Preset {
            name: "two-log-quadratic-ansatz",
            equation: PEXIDER,
            family: SolutionFamily::default()
                .with("f", two_log_terms("a", true))
                .with("h", two_log_terms("b", true))
                .with("k", two_log_terms("g", true)),
        },
        Preset {
            name: "linear-leibniz",
            equation: "f(x*y)=lam*lam*x*y+x*k(y)+k(x)*y",
            family: SolutionFamily::default()
                .with("f", vec![(p("lam^2 + 2*k1"), vec![id()]), (p("1"), vec![leib("d")])])
                .with("k", vec![(p("k1"), vec![id()]), (p("1"), vec![leib("d")])]),
        },
        Preset {
            name: "multiplicative-square",
            equation: "f(x*y)=h(x)*h(y)+2*lam*x*y",
            family: SolutionFamily::default()
                .with("f", vec![(p("h1^2"), vec![mult("m")]), (p("2*lam"), vec![id()])])
                .with("h", vec![(p("h1"), vec![mult("m")])]),
        },
        Preset {
            name: "lambda-k",
            equation: PEXIDER,
            family: SolutionFamily::default()
                .with("f", vec![(p("c"), vec![id()]), (p("g^2*lam^2"), vec![mult("m")])])
                .with("h", vec![(p("c*lam"), vec![id()]), (p("g*lam"), vec![mult("m")])])
                .with("k", vec![(p("c"), vec![id()]), (p("g"), vec![mult("m")])])
                .annotate("c*lam^2 = -1"),
        },
        Preset {
            name: "sofy",
            equation: "h(x*y)=h(x)*y+x*h(y)+h(x)*h(y)",
            family: SolutionFamily::default()
                .with("h", vec![(p("1"), vec![mult("m")]), (p("-1"), vec![id()])]),
        },
        Preset {
            name: "zero",
            equation: PEXIDER,
            family: SolutionFamily::default().with("f", vec![]).with("h", vec![]).with("k", vec![]),
        },
        Preset {
            name: "not-strongly-alien",
            equation: "h(x*y)+k(x*y)=h(x)*h(y)+x*k(y)+k(x)*y",
            family: SolutionFamily::default()
                .with("h", vec![(p("b"), vec![id()]), (p("1 - b"), vec![mult("m")])])
                .with(
                    "k",
                    vec![
                        (p("g"), vec![log("l"), id()]),
                        (p("b - b^2"), vec![id()]),
                        (p("b^2 - b"), vec![mult("m")]),
                    ],
                )
                .annotate("b != 1")
                .annotate("g != 0"),
        },
    ]
}

pub fn preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn values(pairs: &[(&str, i64)]) -> BTreeMap<String, BigRational> {
        pairs.iter().map(|(k, v)| (k.to_string(), q(*v))).collect()
    }

    #[test]
    fn log_family_constraint() {
        let pre = preset("thm5").unwrap();
        let c = derive_constraints(&pre.family, &pre.ast()).unwrap();
        assert_eq!(render_constraints(&c), vec!["g3 + b2*b3"]);
    }

    #[test]
    fn log_family_identity_flips() {
        let pre = preset("thm5").unwrap();
        let ast = pre.ast();
        let mut v = values(&[("b2", 1), ("b3", 1), ("g3", -1), ("g1", 1), ("g2", 0)]);
        assert!(check_identity(&pre.family, &ast, &v).unwrap());
        v.insert("g3".into(), q(0));
        assert!(!check_identity(&pre.family, &ast, &v).unwrap());
        v.remove("g2");
        assert_eq!(
            check_identity(&pre.family, &ast, &v).unwrap_err(),
            SymError::MissingParameter { name: "g2".into() }
        );
    }

    #[test]
    fn unconditional_families() {
        for name in ["linear-leibniz", "multiplicative-square", "sofy", "zero", "not-strongly-alien"] {
            let pre = preset(name).unwrap();
            let c = derive_constraints(&pre.family, &pre.ast()).unwrap();
            assert!(c.is_empty(), "{name}: {:?}", render_constraints(&c));
        }
        let pre = preset("sofy").unwrap();
        let (l, r) = family_substitute(&pre.family, &pre.ast()).unwrap();
        assert_eq!(l, r);
        let pre = preset("zero").unwrap();
        assert_eq!(family_substitute(&pre.family, &pre.ast()).unwrap(), (SymExpr::zero(), SymExpr::zero()));
    }

    #[test]
    fn ansatz_constraints() {
        let pre = preset("log-mult-ansatz").unwrap();
        let c = render_constraints(&derive_constraints(&pre.family, &pre.ast()).unwrap());
        for must in ["b1^2", "g3 + b2*b3", "-a3 + b3^2"] {
            assert!(c.contains(&must.to_string()), "{must} missing from {c:?}");
        }
        let pre = preset("two-log-ansatz").unwrap();
        let c = render_constraints(&derive_constraints(&pre.family, &pre.ast()).unwrap());
        for must in ["b1^2", "b2^2", "b1*b2"] {
            assert!(c.contains(&must.to_string()), "{must} missing from {c:?}");
        }
    }

    #[test]
    fn lambda_k_needs_the_inverse_square() {
        let pre = preset("lambda-k").unwrap();
        let c = render_constraints(&derive_constraints(&pre.family, &pre.ast()).unwrap());
        assert_eq!(c, vec!["c + c^2*lam^2", "g + c*g*lam^2"]);
    }

    #[test]
    fn unsupported_arguments() {
        let pre = preset("thm5").unwrap();
        let ast = parse_equation("f(x+y)=h(x)").unwrap();
        assert!(matches!(derive_constraints(&pre.family, &ast), Err(SymError::UnsupportedArgument { .. })));
        let ast = parse_equation("q(x)=h(x)").unwrap();
        assert!(matches!(derive_constraints(&pre.family, &ast), Err(SymError::MissingFunction { .. })));
    }

    #[test]
    fn parse_and_render() {
        for s in ["g3 + b2*b3", "0", "-1/2*x + 3*b2^2", "1 - b"] {
            let e: SymExpr = s.parse().unwrap();
            assert_eq!(e.to_string().parse::<SymExpr>().unwrap(), e);
        }
        assert_eq!(p("(a + b)*(a - b)").to_string(), "a^2 - b^2");
        assert!("a +".parse::<SymExpr>().is_err());
    }

    #[test]
    fn family_json_round_trip() {
        let fam = preset("thm5").unwrap().family;
        let json = serde_json::to_string(&fam).unwrap();
        assert_eq!(serde_json::from_str::<SolutionFamily>(&json).unwrap(), fam);
    }

    #[test]
    fn rationals_in_prime_fields() {
        use crate::algebra::{build_ring, RingKind, RingSpec};
        let g5 = build_ring(&RingSpec::new(RingKind::GF { p: 5, k: 1, modulus: None })).unwrap();
        assert_eq!(rational_in_ring(&BigRational::new(1.into(), 2.into()), &g5).unwrap(), 3);
        assert_eq!(rational_in_ring(&q(-1), &g5).unwrap(), 4);
        assert!(rational_in_ring(&BigRational::new(1.into(), 5.into()), &g5).is_err());
    }
}
