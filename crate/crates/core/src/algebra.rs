//! Small finite rings given by explicit operation tables.
//!
//! Every element is a dense index `0..size`, and all arithmetic is a table
//! lookup. Constructors build the tables, then check the ring axioms
//! exhaustively before handing the ring out, so nothing downstream has to
//! trust the construction code.
//!
//! Carrier ordering is fixed per constructor:
//!
//! - `Zn(n)`: residues `0..n`.
//! - `GF(p, k)` and `PolyQuot(p, k)`: the coefficient vector `(c_0, .., c_{k-1})`
//!   of `c_0 + c_1 x + ..` sits at index `c_0 + c_1 p + .. + c_{k-1} p^{k-1}`.
//! - `Product(L, R)`: row-major, `(l, r)` at `l * |R| + r`.
//! - `UT2(p)`: `[[a, b], [0, c]]` at `a p^2 + b p + c`.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Index of a ring element.
pub type Elem = usize;

/// Largest carrier a constructor will build unless told otherwise.
pub const DEFAULT_SIZE_BUDGET: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("{0} is not prime")]
    NonPrimeModulus(usize),
    #[error("modulus {modulus:?} is reducible over F_{p}")]
    ReducibleModulus { p: usize, modulus: Vec<usize> },
    #[error("ring axiom violated: {0}")]
    AxiomViolation(String),
    #[error("ring of size {size} exceeds the size budget {budget}")]
    BudgetExceeded { size: u128, budget: usize },
    #[error("invalid ring spec: {0}")]
    InvalidSpec(String),
    #[error("invalid subring: {0}")]
    InvalidSubring(String),
}

/// The shape of a ring, as read from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RingKind {
    Zn {
        n: usize,
    },
    /// `F_p[x] / (modulus)`. The modulus is listed constant term first; when
    /// absent the first monic irreducible polynomial of degree `k` is used.
    GF {
        p: usize,
        k: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        modulus: Option<Vec<usize>>,
    },
    /// `F_p[x] / (x^k)`.
    PolyQuot {
        p: usize,
        k: usize,
    },
    Product {
        left: Box<RingKind>,
        right: Box<RingKind>,
    },
    /// Upper triangular 2x2 matrices over `F_p`.
    UT2 {
        p: usize,
    },
}

/// A ring kind plus an optional subring designation (the domain `P` of the
/// maps under study; the full ring plays the codomain `Q`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSpec {
    #[serde(flatten)]
    pub kind: RingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subring: Option<Vec<Elem>>,
}

impl RingSpec {
    pub fn new(kind: RingKind) -> Self {
        RingSpec { kind, subring: None }
    }

    pub fn with_subring(mut self, points: Vec<Elem>) -> Self {
        self.subring = Some(points);
        self
    }
}

impl From<RingKind> for RingSpec {
    fn from(kind: RingKind) -> Self {
        RingSpec::new(kind)
    }
}

/// A finite ring with total operation tables and cached structure.
#[derive(Clone, PartialEq, Eq)]
pub struct Ring {
    label: String,
    size: usize,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    neg: Vec<Elem>,
    zero: Elem,
    one: Option<Elem>,
    center: Vec<Elem>,
    units: Vec<Elem>,
    regular: Vec<Elem>,
    inverse: Vec<Option<Elem>>,
    characteristic: usize,
    domain: Vec<Elem>,
    domain_pos: Vec<Option<usize>>,
    has_subring: bool,
}

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ring")
            .field("label", &self.label)
            .field("size", &self.size)
            .field("one", &self.one)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// Build a ring from a spec with the default size budget.
pub fn build_ring(spec: &RingSpec) -> Result<Ring, RingError> {
    build_ring_with_budget(spec, DEFAULT_SIZE_BUDGET)
}

pub fn build_ring_with_budget(spec: &RingSpec, budget: usize) -> Result<Ring, RingError> {
    let size = predicted_size(&spec.kind)?;
    if size > budget as u128 {
        return Err(RingError::BudgetExceeded { size, budget });
    }
    let raw = raw_tables(&spec.kind)?;
    let ring = Ring::from_tables(raw.label, raw.add, raw.mul, raw.zero, raw.one)?;
    match &spec.subring {
        Some(points) => ring.with_subring(points.clone()),
        None => Ok(ring),
    }
}

impl Ring {
    /// Assemble a ring from raw tables (row-major, `size * size`), verifying
    /// every axiom. `one` may be `None` for non-unital rings.
    pub fn from_tables(
        label: impl Into<String>,
        add: Vec<Elem>,
        mul: Vec<Elem>,
        zero: Elem,
        one: Option<Elem>,
    ) -> Result<Ring, RingError> {
        let label = label.into();
        let size = (add.len() as f64).sqrt() as usize;
        if size == 0 || size * size != add.len() || mul.len() != add.len() {
            return Err(RingError::InvalidSpec(format!(
                "tables of length {} and {} are not square",
                add.len(),
                mul.len()
            )));
        }
        if add.iter().chain(mul.iter()).any(|&e| e >= size) || zero >= size {
            return Err(RingError::InvalidSpec("table entry out of range".into()));
        }
        if let Some(o) = one {
            if o >= size {
                return Err(RingError::InvalidSpec("one out of range".into()));
            }
        }

        let neg = verify_axioms(size, &add, &mul, zero, one)?;

        let mut ring = Ring {
            label,
            size,
            add,
            mul,
            neg,
            zero,
            one,
            center: Vec::new(),
            units: Vec::new(),
            regular: Vec::new(),
            inverse: vec![None; size],
            characteristic: 0,
            domain: (0..size).collect(),
            domain_pos: (0..size).map(Some).collect(),
            has_subring: false,
        };
        ring.fill_structure();
        Ok(ring)
    }

    fn fill_structure(&mut self) {
        let n = self.size;
        self.center = (0..n).filter(|&c| (0..n).all(|x| self.mul(c, x) == self.mul(x, c))).collect();

        if let Some(one) = self.one {
            for x in 0..n {
                self.inverse[x] = (0..n).find(|&y| self.mul(x, y) == one && self.mul(y, x) == one);
            }
        }
        self.units = (0..n).filter(|&x| self.inverse[x].is_some()).collect();

        self.regular = (0..n)
            .filter(|&r| r != self.zero)
            .filter(|&r| {
                (0..n)
                    .filter(|&x| x != self.zero)
                    .all(|x| self.mul(r, x) != self.zero && self.mul(x, r) != self.zero)
            })
            .collect();

        // additive order of one; for non-unital rings the exponent of (R, +)
        self.characteristic = match self.one {
            Some(one) => self.additive_order(one),
            None => (0..n).map(|x| self.additive_order(x)).fold(1, lcm),
        };
    }

    fn additive_order(&self, x: Elem) -> usize {
        let mut acc = x;
        let mut k = 1;
        while acc != self.zero {
            acc = self.add(acc, x);
            k += 1;
        }
        k
    }

    /// Restrict the domain to a subring `P` of this ring. The ring itself
    /// stays the codomain.
    pub fn with_subring(mut self, mut points: Vec<Elem>) -> Result<Ring, RingError> {
        points.sort_unstable();
        points.dedup();
        if points.iter().any(|&p| p >= self.size) {
            return Err(RingError::InvalidSubring("index out of range".into()));
        }
        let mut member = vec![false; self.size];
        for &p in &points {
            member[p] = true;
        }
        if !member[self.zero] {
            return Err(RingError::InvalidSubring("does not contain zero".into()));
        }
        for &a in &points {
            if !member[self.neg(a)] {
                return Err(RingError::InvalidSubring(format!("not closed under negation at {a}")));
            }
            for &b in &points {
                if !member[self.add(a, b)] {
                    return Err(RingError::InvalidSubring(format!(
                        "not closed under addition at ({a}, {b})"
                    )));
                }
                if !member[self.mul(a, b)] {
                    return Err(RingError::InvalidSubring(format!(
                        "not closed under multiplication at ({a}, {b})"
                    )));
                }
            }
        }
        self.domain_pos = vec![None; self.size];
        for (i, &p) in points.iter().enumerate() {
            self.domain_pos[p] = Some(i);
        }
        self.has_subring = points.len() != self.size;
        self.domain = points;
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Label of the domain: the ring label, with the subring points appended
    /// when a proper subring is designated.
    pub fn domain_label(&self) -> String {
        if self.has_subring {
            format!("{}{:?}", self.label, self.domain)
        } else {
            self.label.clone()
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.size
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.add[a * self.size + b]
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a * self.size + b]
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg[b])
    }

    pub fn zero(&self) -> Elem {
        self.zero
    }

    pub fn one(&self) -> Option<Elem> {
        self.one
    }

    pub fn is_unital(&self) -> bool {
        self.one.is_some()
    }

    /// `n · 1`, reduced by the characteristic. `None` for a nonzero multiple
    /// in a non-unital ring.
    pub fn integer(&self, n: i64) -> Option<Elem> {
        let c = self.characteristic as i64;
        let r = n.rem_euclid(c) as usize;
        if r == 0 {
            return Some(self.zero);
        }
        let one = self.one?;
        let mut acc = self.zero;
        for _ in 0..r {
            acc = self.add(acc, one);
        }
        Some(acc)
    }

    pub fn center(&self) -> &[Elem] {
        &self.center
    }

    pub fn is_central(&self, e: Elem) -> bool {
        self.center.binary_search(&e).is_ok()
    }

    pub fn units(&self) -> &[Elem] {
        &self.units
    }

    pub fn is_unit(&self, e: Elem) -> bool {
        self.inverse[e].is_some()
    }

    pub fn inverse(&self, e: Elem) -> Option<Elem> {
        self.inverse[e]
    }

    pub fn regular(&self) -> &[Elem] {
        &self.regular
    }

    /// Nonzero and not a one-sided zero divisor.
    pub fn is_regular(&self, e: Elem) -> bool {
        self.regular.binary_search(&e).is_ok()
    }

    pub fn has_zero_divisors(&self) -> bool {
        self.regular.len() + 1 != self.size
    }

    pub fn is_commutative(&self) -> bool {
        self.center.len() == self.size
    }

    pub fn is_field(&self) -> bool {
        self.is_commutative() && self.one.is_some() && self.units.len() + 1 == self.size
    }

    /// Additive order of one (the exponent of the additive group when the
    /// ring has no identity).
    pub fn characteristic(&self) -> usize {
        self.characteristic
    }

    /// Points of the domain: the designated subring, or every element.
    pub fn domain(&self) -> &[Elem] {
        &self.domain
    }

    pub fn domain_len(&self) -> usize {
        self.domain.len()
    }

    /// Position of an element inside `domain()`, if it lies there.
    #[inline]
    pub fn domain_position(&self, e: Elem) -> Option<usize> {
        self.domain_pos[e]
    }

    pub fn has_subring(&self) -> bool {
        self.has_subring
    }

    /// Units of the domain: domain elements whose inverse also lies in it.
    pub fn domain_units(&self) -> Vec<Elem> {
        self.domain
            .iter()
            .copied()
            .filter(|&x| matches!(self.inverse[x], Some(inv) if self.domain_pos[inv].is_some()))
            .collect()
    }

    /// SHA-256 over the size, both tables and the domain, hex encoded.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.size as u64).to_le_bytes());
        for table in [&self.add, &self.mul, &self.domain] {
            hasher.update((table.len() as u64).to_le_bytes());
            for &e in table.iter() {
                hasher.update((e as u32).to_le_bytes());
            }
        }
        hex::encode(hasher.finalize())
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

pub(crate) fn is_prime(p: usize) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Checks the abelian group, associativity, distributivity and identity
/// axioms; returns the negation table.
fn verify_axioms(
    n: usize,
    add: &[Elem],
    mul: &[Elem],
    zero: Elem,
    one: Option<Elem>,
) -> Result<Vec<Elem>, RingError> {
    let a = |x: Elem, y: Elem| add[x * n + y];
    let m = |x: Elem, y: Elem| mul[x * n + y];
    let bad = |what: &str, x: Elem, y: Elem, z: Elem| {
        Err(RingError::AxiomViolation(format!("{what} fails at ({x}, {y}, {z})")))
    };

    let mut neg = vec![usize::MAX; n];
    #[allow(clippy::needless_range_loop)]
    for x in 0..n {
        if a(x, zero) != x || a(zero, x) != x {
            return bad("additive identity", x, zero, zero);
        }
        match (0..n).find(|&y| a(x, y) == zero) {
            Some(y) => neg[x] = y,
            None => return bad("additive inverse", x, x, x),
        }
        if let Some(o) = one {
            if m(x, o) != x || m(o, x) != x {
                return bad("multiplicative identity", x, o, o);
            }
        }
        for y in 0..n {
            if a(x, y) != a(y, x) {
                return bad("commutativity of +", x, y, y);
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            let xy_add = a(x, y);
            let xy_mul = m(x, y);
            for z in 0..n {
                if a(xy_add, z) != a(x, a(y, z)) {
                    return bad("associativity of +", x, y, z);
                }
                if m(xy_mul, z) != m(x, m(y, z)) {
                    return bad("associativity of *", x, y, z);
                }
                if m(x, a(y, z)) != a(xy_mul, m(x, z)) {
                    return bad("left distributivity", x, y, z);
                }
                if m(xy_add, z) != a(m(x, z), m(y, z)) {
                    return bad("right distributivity", x, y, z);
                }
            }
        }
    }
    Ok(neg)
}

fn predicted_size(kind: &RingKind) -> Result<u128, RingError> {
    let pow = |p: usize, k: usize| -> Result<u128, RingError> {
        (p as u128).checked_pow(k as u32).ok_or_else(|| RingError::InvalidSpec("size overflow".into()))
    };
    match kind {
        RingKind::Zn { n } => Ok(*n as u128),
        RingKind::GF { p, k, .. } | RingKind::PolyQuot { p, k } => pow(*p, *k),
        RingKind::UT2 { p } => pow(*p, 3),
        RingKind::Product { left, right } => {
            let l = predicted_size(left)?;
            let r = predicted_size(right)?;
            l.checked_mul(r).ok_or_else(|| RingError::InvalidSpec("size overflow".into()))
        }
    }
}

struct RawTables {
    label: String,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    zero: Elem,
    one: Option<Elem>,
}

fn raw_tables(kind: &RingKind) -> Result<RawTables, RingError> {
    match kind {
        RingKind::Zn { n } => {
            let n = *n;
            if n < 2 {
                return Err(RingError::InvalidSpec(format!("Zn needs n >= 2, got {n}")));
            }
            Ok(RawTables {
                label: format!("Z{n}"),
                add: table(n, |a, b| (a + b) % n),
                mul: table(n, |a, b| (a * b) % n),
                zero: 0,
                one: Some(1),
            })
        }
        RingKind::GF { p, k, modulus } => {
            let (p, k) = (*p, *k);
            check_prime(p)?;
            if k == 0 {
                return Err(RingError::InvalidSpec("GF needs k >= 1".into()));
            }
            let modulus = match modulus {
                Some(coeffs) => normalize_modulus(p, k, coeffs)?,
                None => first_irreducible(p, k),
            };
            if !is_irreducible(p, &modulus) {
                return Err(RingError::ReducibleModulus { p, modulus });
            }
            let label = if k == 1 { format!("GF({p})") } else { format!("GF({p}^{k})") };
            Ok(poly_quotient(label, p, &modulus))
        }
        RingKind::PolyQuot { p, k } => {
            let (p, k) = (*p, *k);
            check_prime(p)?;
            if k == 0 {
                return Err(RingError::InvalidSpec("PolyQuot needs k >= 1".into()));
            }
            let mut modulus = vec![0; k + 1];
            modulus[k] = 1;
            Ok(poly_quotient(format!("F{p}[x]/(x^{k})"), p, &modulus))
        }
        RingKind::Product { left, right } => {
            let l = raw_tables(left)?;
            let r = raw_tables(right)?;
            let ls = (l.add.len() as f64).sqrt() as usize;
            let rs = (r.add.len() as f64).sqrt() as usize;
            let n = ls * rs;
            let split = |e: Elem| (e / rs, e % rs);
            let join = |a: Elem, b: Elem| a * rs + b;
            let op = |lt: &[Elem], rt: &[Elem]| {
                table(n, |x, y| {
                    let (x1, x2) = split(x);
                    let (y1, y2) = split(y);
                    join(lt[x1 * ls + y1], rt[x2 * rs + y2])
                })
            };
            Ok(RawTables {
                label: format!("{}x{}", l.label, r.label),
                add: op(&l.add, &r.add),
                mul: op(&l.mul, &r.mul),
                zero: join(l.zero, r.zero),
                one: l.one.zip(r.one).map(|(a, b)| join(a, b)),
            })
        }
        RingKind::UT2 { p } => {
            let p = *p;
            check_prime(p)?;
            let n = p * p * p;
            let split = |e: Elem| (e / (p * p), (e / p) % p, e % p);
            let join = |a: usize, b: usize, c: usize| (a * p + b) * p + c;
            Ok(RawTables {
                label: format!("UT2(F{p})"),
                add: table(n, |x, y| {
                    let (a, b, c) = split(x);
                    let (d, e, f) = split(y);
                    join((a + d) % p, (b + e) % p, (c + f) % p)
                }),
                mul: table(n, |x, y| {
                    let (a, b, c) = split(x);
                    let (d, e, f) = split(y);
                    join((a * d) % p, (a * e + b * f) % p, (c * f) % p)
                }),
                zero: 0,
                one: Some(join(1, 0, 1)),
            })
        }
    }
}

fn table(n: usize, op: impl Fn(Elem, Elem) -> Elem) -> Vec<Elem> {
    let mut t = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            t.push(op(a, b));
        }
    }
    t
}

fn check_prime(p: usize) -> Result<(), RingError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(RingError::NonPrimeModulus(p))
    }
}

// Dense polynomials over F_p, constant term first.

fn normalize_modulus(p: usize, k: usize, coeffs: &[usize]) -> Result<Vec<usize>, RingError> {
    let mut m: Vec<usize> = coeffs.iter().map(|&c| c % p).collect();
    while m.last() == Some(&0) {
        m.pop();
    }
    if m.len() != k + 1 {
        return Err(RingError::InvalidSpec(format!(
            "modulus {coeffs:?} does not have degree {k} over F_{p}"
        )));
    }
    let lead_inv = inv_mod(m[k], p);
    for c in m.iter_mut() {
        *c = *c * lead_inv % p;
    }
    Ok(m)
}

fn inv_mod(a: usize, p: usize) -> usize {
    (1..p).find(|&b| a * b % p == 1).expect("nonzero residue mod a prime")
}

/// Remainder of `a` modulo the monic polynomial `m`.
fn poly_rem(p: usize, a: &[usize], m: &[usize]) -> Vec<usize> {
    let d = m.len() - 1;
    let mut r = a.to_vec();
    while r.len() > d {
        let lead = r.pop().unwrap();
        if lead != 0 {
            let shift = r.len() - d;
            for (i, &mc) in m[..d].iter().enumerate() {
                r[shift + i] = (r[shift + i] + (p - lead) * mc) % p;
            }
        }
    }
    r
}

fn is_irreducible(p: usize, modulus: &[usize]) -> bool {
    let k = modulus.len() - 1;
    for deg in 1..=k / 2 {
        // every monic polynomial of this degree
        let count = p.pow(deg as u32);
        for code in 0..count {
            let mut divisor: Vec<usize> = (0..deg).map(|i| (code / p.pow(i as u32)) % p).collect();
            divisor.push(1);
            if poly_rem(p, modulus, &divisor).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn first_irreducible(p: usize, k: usize) -> Vec<usize> {
    let count = p.pow(k as u32);
    (0..count)
        .map(|code| {
            let mut m: Vec<usize> = (0..k).map(|i| (code / p.pow(i as u32)) % p).collect();
            m.push(1);
            m
        })
        .find(|m| is_irreducible(p, m))
        .expect("irreducible polynomials exist in every degree")
}

/// Tables of `F_p[x] / (modulus)` with `modulus` monic of degree `k`.
fn poly_quotient(label: String, p: usize, modulus: &[usize]) -> RawTables {
    let k = modulus.len() - 1;
    let n = p.pow(k as u32);
    let decode = |e: Elem| -> Vec<usize> { (0..k).map(|i| (e / p.pow(i as u32)) % p).collect() };
    let encode = |c: &[usize]| -> Elem { c.iter().rev().fold(0, |acc, &ci| acc * p + ci) };
    let add = table(n, |a, b| {
        let (ca, cb) = (decode(a), decode(b));
        let s: Vec<usize> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect();
        encode(&s)
    });
    let mul = table(n, |a, b| {
        let (ca, cb) = (decode(a), decode(b));
        let mut prod = vec![0; 2 * k - 1];
        for (i, x) in ca.iter().enumerate() {
            for (j, y) in cb.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        let mut r = poly_rem(p, &prod, modulus);
        r.resize(k, 0);
        encode(&r)
    });
    RawTables { label, add, mul, zero: 0, one: Some(1) }
}
