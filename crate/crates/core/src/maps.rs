//! Functions between rings stored as value tables, and the structured
//! function classes (additive, multiplicative, Leibniz, ...) built from them.
//!
//! A table's positions follow [`Ring::domain`]: `values[i]` is the image of
//! `ring.domain()[i]`, and every image is an element of the full ring.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Elem, Ring};

/// Default cap on the number of raw candidate tables an enumeration may visit.
pub const DEFAULT_MAP_BUDGET: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("enumeration needs {needed} candidates, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("scalar ring {0} is not a field")]
    NotAField(String),
    #[error("tables have {got} values, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// A total function from the domain of a ring into the ring.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FnTable {
    pub values: Vec<Elem>,
}

impl FnTable {
    pub fn new(values: Vec<Elem>) -> Self {
        FnTable { values }
    }

    pub fn zero(ring: &Ring) -> Self {
        FnTable::new(vec![ring.zero(); ring.domain_len()])
    }

    /// The inclusion of the domain into the ring.
    pub fn identity(ring: &Ring) -> Self {
        FnTable::new(ring.domain().to_vec())
    }

    pub fn constant(ring: &Ring, c: Elem) -> Self {
        FnTable::new(vec![c; ring.domain_len()])
    }

    /// Image of the domain element `x`.
    ///
    /// Panics if `x` is not in the domain.
    pub fn at(&self, ring: &Ring, x: Elem) -> Elem {
        self.values[ring.domain_position(x).expect("argument outside the domain")]
    }

    /// `x ↦ c·f(x)`.
    pub fn scaled(&self, ring: &Ring, c: Elem) -> Self {
        FnTable::new(self.values.iter().map(|&v| ring.mul(c, v)).collect())
    }

    pub fn plus(&self, ring: &Ring, other: &FnTable) -> Self {
        FnTable::new(self.values.iter().zip(&other.values).map(|(&a, &b)| ring.add(a, b)).collect())
    }

    pub fn minus(&self, ring: &Ring, other: &FnTable) -> Self {
        FnTable::new(self.values.iter().zip(&other.values).map(|(&a, &b)| ring.sub(a, b)).collect())
    }

    /// JSON-facing view carrying the domain and codomain labels.
    pub fn record(&self, ring: &Ring) -> TableRecord {
        TableRecord {
            domain: ring.domain_label(),
            codomain: ring.label().to_string(),
            values: self.values.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRecord {
    pub domain: String,
    pub codomain: String,
    pub values: Vec<Elem>,
}

/// Function classes named by the defining identities they satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "class")]
pub enum FunctionClass {
    Arbitrary,
    Additive,
    Multiplicative,
    Homomorphism,
    Leibniz,
    Derivation,
    /// `l(xy) = l(x) + l(y)` on the unit group of the domain; the table holds
    /// 0 at non-units.
    Logarithmic,
    /// Additive and `f(xy) = f(x)y + xf(y) + ε f(x)f(y)`.
    HomoDerivSofy {
        eps: Elem,
    },
    /// A homomorphism that also satisfies the Leibniz rule.
    HomoDerivMp,
}

impl FunctionClass {
    pub fn requires_additivity(self) -> bool {
        matches!(
            self,
            FunctionClass::Additive
                | FunctionClass::Homomorphism
                | FunctionClass::Derivation
                | FunctionClass::HomoDerivSofy { .. }
                | FunctionClass::HomoDerivMp
        )
    }
}

impl fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionClass::Arbitrary => f.write_str("arbitrary"),
            FunctionClass::Additive => f.write_str("additive"),
            FunctionClass::Multiplicative => f.write_str("multiplicative"),
            FunctionClass::Homomorphism => f.write_str("homomorphism"),
            FunctionClass::Leibniz => f.write_str("leibniz"),
            FunctionClass::Derivation => f.write_str("derivation"),
            FunctionClass::Logarithmic => f.write_str("logarithmic"),
            FunctionClass::HomoDerivSofy { eps } => write!(f, "sofy:{eps}"),
            FunctionClass::HomoDerivMp => f.write_str("mp"),
        }
    }
}

impl FromStr for FunctionClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        if let Some(eps) = lower.strip_prefix("sofy:") {
            let eps = eps.parse().map_err(|_| format!("bad epsilon in class {s:?}"))?;
            return Ok(FunctionClass::HomoDerivSofy { eps });
        }
        Ok(match lower.as_str() {
            "arbitrary" | "any" => FunctionClass::Arbitrary,
            "additive" => FunctionClass::Additive,
            "multiplicative" => FunctionClass::Multiplicative,
            "homomorphism" => FunctionClass::Homomorphism,
            "leibniz" => FunctionClass::Leibniz,
            "derivation" => FunctionClass::Derivation,
            "logarithmic" => FunctionClass::Logarithmic,
            "sofy" => FunctionClass::HomoDerivSofy { eps: 1 },
            "mp" | "homoderiv-mp" => FunctionClass::HomoDerivMp,
            _ => return Err(format!("unknown function class {s:?}")),
        })
    }
}

// Pointwise identity checks over all domain pairs.

fn pairs_hold(ring: &Ring, mut ok: impl FnMut(Elem, Elem) -> bool) -> bool {
    let dom = ring.domain();
    dom.iter().all(|&x| dom.iter().all(|&y| ok(x, y)))
}

pub fn is_additive(ring: &Ring, f: &FnTable) -> bool {
    pairs_hold(ring, |x, y| f.at(ring, ring.add(x, y)) == ring.add(f.at(ring, x), f.at(ring, y)))
}

pub fn is_multiplicative(ring: &Ring, f: &FnTable) -> bool {
    pairs_hold(ring, |x, y| f.at(ring, ring.mul(x, y)) == ring.mul(f.at(ring, x), f.at(ring, y)))
}

pub fn is_leibniz(ring: &Ring, f: &FnTable) -> bool {
    pairs_hold(ring, |x, y| {
        let rhs = ring.add(ring.mul(f.at(ring, x), y), ring.mul(x, f.at(ring, y)));
        f.at(ring, ring.mul(x, y)) == rhs
    })
}

/// `f(xy) = f(x)y + xf(y) + ε f(x)f(y)` at every pair (additivity not checked).
pub fn satisfies_sofy_identity(ring: &Ring, f: &FnTable, eps: Elem) -> bool {
    pairs_hold(ring, |x, y| {
        let (fx, fy) = (f.at(ring, x), f.at(ring, y));
        let rhs = ring.add(ring.add(ring.mul(fx, y), ring.mul(x, fy)), ring.mul(eps, ring.mul(fx, fy)));
        f.at(ring, ring.mul(x, y)) == rhs
    })
}

/// Logarithmic identity on the domain units; other entries are ignored.
pub fn is_logarithmic(ring: &Ring, f: &FnTable) -> bool {
    let units = ring.domain_units();
    units
        .iter()
        .all(|&x| units.iter().all(|&y| f.at(ring, ring.mul(x, y)) == ring.add(f.at(ring, x), f.at(ring, y))))
}

/// Whether `f` satisfies every identity defining `class`.
pub fn is_in_class(ring: &Ring, f: &FnTable, class: FunctionClass) -> bool {
    match class {
        FunctionClass::Arbitrary => true,
        FunctionClass::Additive => is_additive(ring, f),
        FunctionClass::Multiplicative => is_multiplicative(ring, f),
        FunctionClass::Homomorphism => is_additive(ring, f) && is_multiplicative(ring, f),
        FunctionClass::Leibniz => is_leibniz(ring, f),
        FunctionClass::Derivation => is_additive(ring, f) && is_leibniz(ring, f),
        FunctionClass::Logarithmic => is_logarithmic(ring, f),
        FunctionClass::HomoDerivSofy { eps } => {
            ring.is_central(eps)
                && eps != ring.zero()
                && is_additive(ring, f)
                && satisfies_sofy_identity(ring, f, eps)
        }
        FunctionClass::HomoDerivMp => {
            is_additive(ring, f) && is_multiplicative(ring, f) && is_leibniz(ring, f)
        }
    }
}

/// Every class whose identities `f` satisfies. `HomoDerivSofy` appears once
/// per witnessing central nonzero ε.
pub fn classify_map(ring: &Ring, f: &FnTable) -> BTreeSet<FunctionClass> {
    assert_eq!(f.values.len(), ring.domain_len(), "table does not match the domain");
    let additive = is_additive(ring, f);
    let multiplicative = is_multiplicative(ring, f);
    let leibniz = is_leibniz(ring, f);

    let mut tags = BTreeSet::from([FunctionClass::Arbitrary]);
    if additive {
        tags.insert(FunctionClass::Additive);
    }
    if multiplicative {
        tags.insert(FunctionClass::Multiplicative);
    }
    if leibniz {
        tags.insert(FunctionClass::Leibniz);
    }
    if additive && multiplicative {
        tags.insert(FunctionClass::Homomorphism);
    }
    if additive && leibniz {
        tags.insert(FunctionClass::Derivation);
    }
    if additive && multiplicative && leibniz {
        tags.insert(FunctionClass::HomoDerivMp);
    }
    if is_logarithmic(ring, f) {
        tags.insert(FunctionClass::Logarithmic);
    }
    if additive {
        for &eps in ring.center() {
            if eps != ring.zero() && satisfies_sofy_identity(ring, f, eps) {
                tags.insert(FunctionClass::HomoDerivSofy { eps });
            }
        }
    }
    tags
}

/// `ad_b(x) = xb − bx`.
pub fn inner_derivation(ring: &Ring, b: Elem) -> FnTable {
    FnTable::new(ring.domain().iter().map(|&x| ring.sub(ring.mul(x, b), ring.mul(b, x))).collect())
}

/// Rank over the field `scalars` of the matrix whose rows are the tables.
pub fn lin_rank(maps: &[FnTable], scalars: &Ring) -> Result<usize, MapError> {
    if !scalars.is_field() {
        return Err(MapError::NotAField(scalars.label().to_string()));
    }
    let width = scalars.domain_len();
    if let Some(bad) = maps.iter().find(|m| m.values.len() != width) {
        return Err(MapError::LengthMismatch { expected: width, got: bad.values.len() });
    }
    let zero = scalars.zero();
    let mut rows: Vec<Vec<Elem>> = maps.iter().map(|m| m.values.clone()).collect();
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != zero) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = scalars.inverse(rows[rank][col]).expect("nonzero field element");
        let pivot_row: Vec<Elem> = rows[rank].iter().map(|&v| scalars.mul(inv, v)).collect();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] != zero {
                let factor = row[col];
                for (c, &pv) in pivot_row.iter().enumerate() {
                    row[c] = scalars.sub(row[c], scalars.mul(factor, pv));
                }
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
    }
    Ok(rank)
}

/// Lazily yields tables in lexicographic order of the value vector.
pub enum MapStream {
    Odometer { radix: usize, current: Option<Vec<Elem>> },
    Listed(std::vec::IntoIter<FnTable>),
}

impl Iterator for MapStream {
    type Item = FnTable;

    fn next(&mut self) -> Option<FnTable> {
        match self {
            MapStream::Listed(it) => it.next(),
            MapStream::Odometer { radix, current } => {
                let out = current.clone()?;
                let mut next = out.clone();
                let mut carry = true;
                for v in next.iter_mut().rev() {
                    *v += 1;
                    if *v < *radix {
                        carry = false;
                        break;
                    }
                    *v = 0;
                }
                *current = if carry { None } else { Some(next) };
                Some(FnTable::new(out))
            }
        }
    }
}

fn checked_power(base: usize, exp: usize) -> u128 {
    (base as u128).checked_pow(exp as u32).unwrap_or(u128::MAX)
}

/// Number of raw candidates `enumerate_maps` would visit for `class`.
pub fn enumeration_size(ring: &Ring, class: FunctionClass) -> u128 {
    let q = ring.size();
    match class {
        FunctionClass::Logarithmic => checked_power(q, ring.domain_units().len()),
        c if c.requires_additivity() => checked_power(q, additive_generators(ring).len()),
        _ => checked_power(q, ring.domain_len()),
    }
}

/// Every table of `class`, each exactly once, in lexicographic order.
pub fn enumerate_maps(ring: &Ring, class: FunctionClass, budget: u128) -> Result<MapStream, MapError> {
    let needed = enumeration_size(ring, class);
    if needed > budget {
        return Err(MapError::BudgetExceeded { needed, budget });
    }
    let n = ring.domain_len();
    let stream = match class {
        FunctionClass::Arbitrary => MapStream::Odometer { radix: ring.size(), current: Some(vec![0; n]) },
        FunctionClass::Multiplicative => MapStream::Listed(
            backtrack_binary(ring, false, |r, f, x, y| Some(f(r.mul(x, y))? == r.mul(f(x)?, f(y)?)))
                .into_iter(),
        ),
        FunctionClass::Leibniz => MapStream::Listed(
            backtrack_binary(ring, false, |r, f, x, y| {
                let rhs = r.add(r.mul(f(x)?, y), r.mul(x, f(y)?));
                Some(f(r.mul(x, y))? == rhs)
            })
            .into_iter(),
        ),
        FunctionClass::Logarithmic => MapStream::Listed(
            backtrack_binary(ring, true, |r, f, x, y| Some(f(r.mul(x, y))? == r.add(f(x)?, f(y)?)))
                .into_iter(),
        ),
        additive => {
            let mut out: Vec<FnTable> =
                additive_maps(ring).filter(|f| is_in_class(ring, f, additive)).collect();
            out.sort();
            MapStream::Listed(out.into_iter())
        }
    };
    Ok(stream)
}

/// Greedy generating set of the domain's additive group: walk the domain in
/// order and keep each element not yet generated.
pub fn additive_generators(ring: &Ring) -> Vec<Elem> {
    let mut gens = Vec::new();
    let mut generated = vec![false; ring.size()];
    generated[ring.zero()] = true;
    let mut count = 1;
    for &e in ring.domain() {
        if count == ring.domain_len() {
            break;
        }
        if generated[e] {
            continue;
        }
        gens.push(e);
        // close the generated subgroup under adding the new generator set
        let mut queue: VecDeque<Elem> = (0..ring.size()).filter(|&x| generated[x]).collect();
        while let Some(x) = queue.pop_front() {
            for &g in &gens {
                let y = ring.add(x, g);
                if !generated[y] {
                    generated[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
    }
    gens
}

/// Additive maps from generator images: each assignment of images is pushed
/// along a spanning tree of the Cayley graph and kept if additive.
fn additive_maps(ring: &Ring) -> impl Iterator<Item = FnTable> + '_ {
    let gens = additive_generators(ring);
    let n = ring.domain_len();
    // parent[i] = (position of parent, generator index) with x_i = parent + g
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut order = Vec::with_capacity(n);
    let zero_pos = ring.domain_position(ring.zero()).expect("subrings contain zero");
    let mut seen = vec![false; n];
    seen[zero_pos] = true;
    let mut queue = VecDeque::from([zero_pos]);
    while let Some(i) = queue.pop_front() {
        order.push(i);
        for (gi, &g) in gens.iter().enumerate() {
            let y = ring.add(ring.domain()[i], g);
            let j = ring.domain_position(y).expect("subring closed under addition");
            if !seen[j] {
                seen[j] = true;
                parent[j] = Some((i, gi));
                queue.push_back(j);
            }
        }
    }
    let images = MapStream::Odometer { radix: ring.size(), current: Some(vec![0; gens.len()]) };
    images.filter_map(move |img| {
        let mut values = vec![ring.zero(); n];
        for &i in &order[1..] {
            let (p, gi) = parent[i].expect("reached from zero");
            values[i] = ring.add(values[p], img.values[gi]);
        }
        let f = FnTable::new(values);
        is_additive(ring, &f).then_some(f)
    })
}

/// Depth-first search over tables, position by position, checking a binary
/// identity at `(x, y)` as soon as every value it reads is assigned.
/// With `units_only`, only domain units are free and the identity is only
/// imposed between units; other entries are fixed to zero.
fn backtrack_binary<C>(ring: &Ring, units_only: bool, check: C) -> Vec<FnTable>
where
    C: Fn(&Ring, &dyn Fn(Elem) -> Option<Elem>, Elem, Elem) -> Option<bool>,
{
    let n = ring.domain_len();
    let points: Vec<Elem> = if units_only { ring.domain_units() } else { ring.domain().to_vec() };
    let free: Vec<usize> = points.iter().map(|&p| ring.domain_position(p).unwrap()).collect();
    let mut rank_of = vec![usize::MAX; n];
    for (r, &pos) in free.iter().enumerate() {
        rank_of[pos] = r;
    }
    // pairs grouped by the last free rank they depend on
    let mut ready: Vec<Vec<(Elem, Elem)>> = vec![Vec::new(); free.len()];
    for &x in &points {
        for &y in &points {
            let xy = ring.domain_position(ring.mul(x, y)).expect("subring closed under multiplication");
            let deps = [ring.domain_position(x).unwrap(), ring.domain_position(y).unwrap(), xy];
            let last = deps.iter().map(|&d| rank_of[d]).filter(|&r| r != usize::MAX).max();
            if let Some(last) = last {
                ready[last].push((x, y));
            }
        }
    }

    let mut values = vec![ring.zero(); n];
    let mut out = Vec::new();
    if free.is_empty() {
        out.push(FnTable::new(values));
        return out;
    }

    fn go<C>(
        ring: &Ring,
        depth: usize,
        free: &[usize],
        ready: &[Vec<(Elem, Elem)>],
        values: &mut Vec<Elem>,
        check: &C,
        out: &mut Vec<FnTable>,
    ) where
        C: Fn(&Ring, &dyn Fn(Elem) -> Option<Elem>, Elem, Elem) -> Option<bool>,
    {
        if depth == free.len() {
            out.push(FnTable::new(values.clone()));
            return;
        }
        for v in 0..ring.size() {
            values[free[depth]] = v;
            let ok = {
                let snapshot: &Vec<Elem> = values;
                let lookup = |e: Elem| ring.domain_position(e).map(|i| snapshot[i]);
                ready[depth].iter().all(|&(x, y)| check(ring, &lookup, x, y).unwrap_or(false))
            };
            if ok {
                go(ring, depth + 1, free, ready, values, check, out);
            }
        }
    }
    go(ring, 0, &free, &ready, &mut values, &check, &mut out);
    out
}
