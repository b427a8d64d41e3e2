//! Executable checks of the characterization results: brute-force solution
//! sets are compared with the predicted families in both directions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Elem, Ring};
use crate::eqdsl::{parse_equation, Binding, EqError, EquationAst};
use crate::maps::{
    enumerate_maps, is_leibniz, is_logarithmic, is_multiplicative, lin_rank, FnTable, FunctionClass, MapError,
};
use crate::solver::{residual, solve, SolveError, SolveTask, DEFAULT_BUDGET};

pub const EQ_SOFY: &str = "h(x*y)=h(x)*y+x*h(y)+eps*h(x)*h(y)";
pub const EQ_LEIBNIZ: &str = "f(x*y)=f(x)*y+x*f(y)";
pub const EQ_MULTIPLICATIVE: &str = "f(x*y)=f(x)*f(y)";
pub const EQ_PEXIDER: &str = "f(x*y)=h(x)*h(y)+x*k(y)+k(x)*y";
pub const EQ_ALIEN: &str = "lambda*(f(x*y)-f(x)*y-x*f(y))+mu*(f(x*y)-f(x)*f(y))=0";

/// Stored counterexamples per report; the total is always counted.
const MAX_LISTED: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "error")]
pub enum TheoremError {
    #[error("epsilon {eps} is not central")]
    NotCentral { eps: Elem },
    #[error("epsilon must be nonzero")]
    EpsilonZero,
    #[error("element {value} is not in a ring of size {size}")]
    OutOfRange { value: Elem, size: usize },
    #[error("lambda and mu are both zero")]
    BothZero,
    #[error("{0} is not a field")]
    NotAField(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Equation(#[from] EqError),
}

impl From<MapError> for TheoremError {
    fn from(e: MapError) -> Self {
        TheoremError::Solve(e.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "error")]
pub enum PexiderError {
    #[error("binding violates the equation at {pairs:?}")]
    ResidualNonzero { pairs: Vec<(Elem, Elem)> },
    #[error("{0} is not a field")]
    NotAField(String),
    #[error("characteristic 2 scalars are not supported")]
    CharacteristicTwo,
    #[error("no family reproduces the binding (rank {rank})")]
    Unclassifiable { rank: usize },
    #[error(transparent)]
    Equation(#[from] EqError),
}

/// Search limits shared by every check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Settings {
    pub budget: u128,
    pub workers: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { budget: DEFAULT_BUDGET, workers: 0 }
    }
}

fn equation(src: &str) -> EquationAst {
    parse_equation(src).expect("built-in equations parse")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSummary {
    pub label: String,
    pub size: usize,
    pub domain: String,
    pub hash: String,
}

impl RingSummary {
    pub fn of(ring: &Ring) -> Self {
        RingSummary {
            label: ring.label().to_string(),
            size: ring.size(),
            domain: ring.domain_label(),
            hash: ring.content_hash(),
        }
    }
}

/// Parameters of a solution family. Each reproduces its closed form exactly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum FamilyTag {
    /// `m = εh + id` is multiplicative.
    SofyShift {
        eps: Elem,
        m: FnTable,
    },
    /// `α f = f α = 0`.
    MpAnnihilated {
        alpha: Elem,
    },
    /// `h = λ₁ id`, `k = λ₂ id`, `f = (λ₁² + 2λ₂) id`.
    AllLinear {
        lambda1: Elem,
        lambda2: Elem,
    },
    /// `h = λ id`, `k = k1 id + δ`, `f = (λ² + 2k1) id + δ` with δ Leibniz.
    LinearPlusLeibniz {
        lambda: Elem,
        k1: Elem,
        delta: FnTable,
    },
    /// `h = h1 m`, `k = λ id`, `f = h1² m + 2λ id` with m multiplicative.
    MultiplicativeSquare {
        h1: Elem,
        m: FnTable,
        lambda: Elem,
    },
    /// `k = γ id`, `h = λ k`, `f = (λ²γ² + 2γ) id`.
    LambdaKFamilyA {
        gamma: Elem,
        lambda: Elem,
    },
    /// `k = −λ⁻² id + γ m`, `h = λ k`, `f = −λ⁻² id + γ²λ² m`, λ ≠ 0.
    LambdaKFamilyB {
        gamma: Elem,
        m: FnTable,
        lambda: Elem,
    },
    /// `h = β₁ id + β₂ m`, `k = γ₁ id − β₁β₂ m`, `f = (β₁² + 2γ₁) id + β₂² m`.
    LinearPlusMultiplicative {
        beta1: Elem,
        beta2: Elem,
        gamma1: Elem,
        m: FnTable,
    },
    /// `h = β₂ id + β₃ m`, `k = (γ₁ l + γ₂) id + γ₃ m`,
    /// `f = (γ₁ l + β₂² + 2γ₂) id + β₃² m`.
    NonDegenerate {
        beta2: Elem,
        beta3: Elem,
        gamma1: Elem,
        gamma2: Elem,
        gamma3: Elem,
        m: FnTable,
        l: FnTable,
    },
    /// λ = 0: f is multiplicative.
    AlienA,
    /// μ = 0: f is Leibniz.
    AlienB,
    AlienZero,
    /// `f = ((μ − λ)/μ) id`.
    AlienScaled {
        lambda: Elem,
        mu: Elem,
        scale: Elem,
    },
}

/// `Σ cᵢ tᵢ` pointwise.
fn combo(ring: &Ring, terms: &[(Elem, &FnTable)]) -> FnTable {
    let mut acc = FnTable::zero(ring);
    for (c, t) in terms {
        acc = acc.plus(ring, &t.scaled(ring, *c));
    }
    acc
}

fn pointwise_mul(ring: &Ring, a: &FnTable, b: &FnTable) -> FnTable {
    FnTable::new(a.values.iter().zip(&b.values).map(|(&x, &y)| ring.mul(x, y)).collect())
}

fn pexider_binding(f: FnTable, h: FnTable, k: FnTable) -> Binding {
    Binding::default().with_function("f", f).with_function("h", h).with_function("k", k)
}

impl FamilyTag {
    /// The `(f, h, k)` binding of a solution family of the Pexider equation,
    /// or `None` for tags of other equations.
    pub fn instantiate(&self, ring: &Ring) -> Option<Binding> {
        let id = FnTable::identity(ring);
        let two = ring.integer(2)?;
        let m_ = |a: Elem, b: Elem| ring.mul(a, b);
        let sq = |a: Elem| ring.mul(a, a);
        Some(match self {
            FamilyTag::AllLinear { lambda1, lambda2 } => pexider_binding(
                id.scaled(ring, ring.add(sq(*lambda1), m_(two, *lambda2))),
                id.scaled(ring, *lambda1),
                id.scaled(ring, *lambda2),
            ),
            FamilyTag::LinearPlusLeibniz { lambda, k1, delta } => pexider_binding(
                combo(ring, &[(ring.add(sq(*lambda), m_(two, *k1)), &id), (ring.one()?, delta)]),
                id.scaled(ring, *lambda),
                combo(ring, &[(*k1, &id), (ring.one()?, delta)]),
            ),
            FamilyTag::MultiplicativeSquare { h1, m, lambda } => pexider_binding(
                combo(ring, &[(sq(*h1), m), (m_(two, *lambda), &id)]),
                m.scaled(ring, *h1),
                id.scaled(ring, *lambda),
            ),
            FamilyTag::LambdaKFamilyA { gamma, lambda } => {
                let f = ring.add(m_(sq(*lambda), sq(*gamma)), m_(two, *gamma));
                pexider_binding(
                    id.scaled(ring, f),
                    id.scaled(ring, m_(*lambda, *gamma)),
                    id.scaled(ring, *gamma),
                )
            }
            FamilyTag::LambdaKFamilyB { gamma, m, lambda } => {
                let inv_sq = ring.neg(ring.inverse(sq(*lambda))?);
                let k = combo(ring, &[(inv_sq, &id), (*gamma, m)]);
                let f = combo(ring, &[(inv_sq, &id), (m_(sq(*gamma), sq(*lambda)), m)]);
                pexider_binding(f, k.scaled(ring, *lambda), k)
            }
            FamilyTag::LinearPlusMultiplicative { beta1, beta2, gamma1, m } => pexider_binding(
                combo(ring, &[(ring.add(sq(*beta1), m_(two, *gamma1)), &id), (sq(*beta2), m)]),
                combo(ring, &[(*beta1, &id), (*beta2, m)]),
                combo(ring, &[(*gamma1, &id), (ring.neg(m_(*beta1, *beta2)), m)]),
            ),
            FamilyTag::NonDegenerate { beta2, beta3, gamma1, gamma2, gamma3, m, l } => {
                let lx = pointwise_mul(ring, l, &id);
                pexider_binding(
                    combo(
                        ring,
                        &[(*gamma1, &lx), (ring.add(sq(*beta2), m_(two, *gamma2)), &id), (sq(*beta3), m)],
                    ),
                    combo(ring, &[(*beta2, &id), (*beta3, m)]),
                    combo(ring, &[(*gamma1, &lx), (*gamma2, &id), (*gamma3, m)]),
                )
            }
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    /// Failing an informational check does not fail the report.
    pub asserted: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub solution: BTreeMap<String, Vec<Elem>>,
    pub family: Option<FamilyTag>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub binding: BTreeMap<String, Vec<Elem>>,
    pub violations: Vec<(Elem, Elem)>,
    pub note: String,
}

fn tables_of(b: &Binding) -> BTreeMap<String, Vec<Elem>> {
    b.functions.iter().map(|(k, v)| (k.clone(), v.values.clone())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub ring: Option<RingSummary>,
    pub parameters: BTreeMap<String, Elem>,
    pub solutions_found: usize,
    pub predicted_count: usize,
    pub forward_ok: bool,
    pub backward_ok: bool,
    pub backward_asserted: bool,
    pub checks: Vec<Check>,
    pub witnesses: Vec<Witness>,
    pub counterexamples: Vec<Counterexample>,
    pub counterexample_count: usize,
}

impl TheoremReport {
    fn new(theorem: &str, ring: Option<&Ring>) -> Self {
        TheoremReport {
            theorem: theorem.to_string(),
            ring: ring.map(RingSummary::of),
            parameters: BTreeMap::new(),
            solutions_found: 0,
            predicted_count: 0,
            forward_ok: true,
            backward_ok: true,
            backward_asserted: true,
            checks: Vec::new(),
            witnesses: Vec::new(),
            counterexamples: Vec::new(),
            counterexample_count: 0,
        }
    }

    fn counterexample(&mut self, binding: &Binding, violations: Vec<(Elem, Elem)>, note: impl Into<String>) {
        self.counterexample_count += 1;
        if self.counterexamples.len() < MAX_LISTED {
            self.counterexamples.push(Counterexample {
                binding: tables_of(binding),
                violations,
                note: note.into(),
            });
        }
    }

    fn check(&mut self, name: &str, ok: bool, asserted: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), ok, asserted, detail: detail.into() });
    }

    /// Every asserted direction and check passed.
    pub fn holds(&self) -> bool {
        self.forward_ok
            && (self.backward_ok || !self.backward_asserted)
            && self.checks.iter().all(|c| c.ok || !c.asserted)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn render_text(&self) -> String {
        let mark = |ok: bool| if ok { "ok" } else { "FAILED" };
        let mut s = String::new();
        let _ = writeln!(s, "theorem: {}", self.theorem);
        if let Some(r) = &self.ring {
            let _ = writeln!(s, "ring: {} (size {}, domain {}, hash {})", r.label, r.size, r.domain, r.hash);
        }
        for (k, v) in &self.parameters {
            let _ = writeln!(s, "param {k} = {v}");
        }
        let _ = writeln!(s, "solutions found: {}", self.solutions_found);
        let _ = writeln!(s, "predicted: {}", self.predicted_count);
        let _ = writeln!(s, "forward: {}", mark(self.forward_ok));
        let _ = writeln!(
            s,
            "backward: {}{}",
            mark(self.backward_ok),
            if self.backward_asserted { "" } else { " (informational)" }
        );
        for c in &self.checks {
            let tag = if c.asserted { "" } else { " (informational)" };
            let _ = writeln!(s, "check {}: {}{} {}", c.name, mark(c.ok), tag, c.detail);
        }
        for w in &self.witnesses {
            let fam = w.family.as_ref().map(|f| format!("{f:?}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(s, "witness {:?} -> {fam}", w.solution);
        }
        if self.counterexample_count > 0 {
            let _ = writeln!(s, "counterexamples: {}", self.counterexample_count);
            for c in &self.counterexamples {
                let _ = writeln!(s, "  {:?} at {:?}: {}", c.binding, c.violations, c.note);
            }
        }
        let _ = writeln!(s, "verdict: {}", if self.holds() { "holds" } else { "fails" });
        s
    }
}

fn check_element(ring: &Ring, value: Elem) -> Result<(), TheoremError> {
    if value >= ring.size() {
        return Err(TheoremError::OutOfRange { value, size: ring.size() });
    }
    Ok(())
}

/// `x ↦ εh(x) + x`.
pub fn multiplicative_shift(h: &FnTable, eps: Elem, ring: &Ring) -> FnTable {
    FnTable::new(h.values.iter().zip(ring.domain()).map(|(&v, &x)| ring.add(ring.mul(eps, v), x)).collect())
}

/// Cartesian product of per-position choices, in lexicographic order.
fn product(choices: &[Vec<Elem>]) -> Vec<Vec<Elem>> {
    let mut out = vec![Vec::with_capacity(choices.len())];
    for c in choices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                c.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

/// Solutions `h` of `h(xy) = h(x)y + xh(y) + εh(x)h(y)` against the
/// multiplicative maps `m = εh + id`.
pub fn verify_sofy(ring: &Ring, eps: Elem, settings: &Settings) -> Result<TheoremReport, TheoremError> {
    check_element(ring, eps)?;
    if eps == ring.zero() {
        return Err(TheoremError::EpsilonZero);
    }
    if !ring.is_central(eps) {
        return Err(TheoremError::NotCentral { eps });
    }
    let ast = equation(EQ_SOFY);
    let task = SolveTask::new(ast.clone(), ring.clone())
        .param("eps", eps)
        .budget(settings.budget)
        .workers(settings.workers);
    let set = solve(&task)?;
    let mut rep = TheoremReport::new("thm4", Some(ring));
    rep.parameters.insert("eps".into(), eps);
    rep.solutions_found = set.len();

    let mut shifts = BTreeSet::new();
    for b in &set.solutions {
        let m = multiplicative_shift(&b.functions["h"], eps, ring);
        if is_multiplicative(ring, &m) {
            rep.witnesses.push(Witness {
                solution: tables_of(b),
                family: Some(FamilyTag::SofyShift { eps, m: m.clone() }),
            });
        } else {
            rep.forward_ok = false;
            let shifted = Binding::default().with_function("f", m.clone());
            let bad = residual(&equation(EQ_MULTIPLICATIVE), &shifted, ring)?;
            rep.counterexample(b, bad, "shift is not multiplicative");
        }
        shifts.insert(m);
    }

    // backward: every preimage of a multiplicative map under h ↦ εh + id
    let preimages: Vec<Vec<Elem>> =
        ring.elements().map(|t| ring.elements().filter(|&v| ring.mul(eps, v) == t).collect()).collect();
    let mults: Vec<FnTable> = enumerate_maps(ring, FunctionClass::Multiplicative, settings.budget)?.collect();
    let mut predicted = BTreeSet::new();
    let mut examined = 0u128;
    for m in &mults {
        let target = m.minus(ring, &FnTable::identity(ring));
        let choices: Vec<Vec<Elem>> = target.values.iter().map(|&t| preimages[t].clone()).collect();
        let size = choices.iter().fold(1u128, |a, c| a.saturating_mul(c.len() as u128));
        examined = examined.saturating_add(size);
        if examined > settings.budget {
            return Err(SolveError::BudgetExceeded { needed: examined, budget: settings.budget }.into());
        }
        for values in product(&choices) {
            let h = FnTable::new(values);
            let b = Binding::default().with_function("h", h.clone()).with_param("eps", eps);
            let bad = residual(&ast, &b, ring)?;
            if !bad.is_empty() {
                rep.backward_ok = false;
                rep.counterexample(&b, bad, "shift is multiplicative but h does not solve");
            }
            predicted.insert(h);
        }
    }
    rep.predicted_count = predicted.len();
    rep.backward_asserted = ring.is_unit(eps);
    let mult_count = mults.len();
    rep.check("multiplicative_maps", true, false, format!("{mult_count} multiplicative maps"));
    if ring.is_unit(eps) {
        let bijective = set.len() == mult_count && shifts.len() == set.len();
        rep.check(
            "bijection",
            bijective,
            true,
            format!(
                "{} solutions, {} distinct shifts, {mult_count} multiplicative maps",
                set.len(),
                shifts.len()
            ),
        );
    }
    Ok(rep)
}

/// Smallest nonzero `α` with `α f(x) = f(x) α = 0` for every `x`.
pub fn annihilator_witness(f: &FnTable, ring: &Ring) -> Option<Elem> {
    ring.elements()
        .filter(|&a| a != ring.zero())
        .find(|&a| f.values.iter().all(|&v| ring.mul(a, v) == ring.zero() && ring.mul(v, a) == ring.zero()))
}

/// Maps that are both multiplicative and Leibniz, and their annihilators.
pub fn verify_mp(ring: &Ring, settings: &Settings) -> Result<TheoremReport, TheoremError> {
    let task =
        SolveTask::new(equation(EQ_LEIBNIZ), ring.clone()).budget(settings.budget).workers(settings.workers);
    let leibniz = solve(&task)?;
    let solutions: Vec<&Binding> =
        leibniz.solutions.iter().filter(|b| is_multiplicative(ring, &b.functions["f"])).collect();
    let mut rep = TheoremReport::new("prop1", Some(ring));
    rep.solutions_found = solutions.len();
    rep.check(
        "search",
        true,
        false,
        format!("{} candidates, {} Leibniz maps", leibniz.candidate_space, leibniz.len()),
    );
    for b in &solutions {
        let f = &b.functions["f"];
        match annihilator_witness(f, ring) {
            Some(alpha) => rep
                .witnesses
                .push(Witness { solution: tables_of(b), family: Some(FamilyTag::MpAnnihilated { alpha }) }),
            None => {
                rep.forward_ok = false;
                rep.counterexample(b, Vec::new(), "no nonzero two-sided annihilator");
            }
        }
    }
    if !ring.has_zero_divisors() {
        let only_zero = solutions.len() == 1 && solutions[0].functions["f"] == FnTable::zero(ring);
        rep.check("zero_only", only_zero, true, "no zero divisors: the solution set must be {0}");
    }

    // converse, reported only
    rep.backward_asserted = false;
    let mp = [equation(EQ_LEIBNIZ), equation(EQ_MULTIPLICATIVE)];
    let mut predicted = 0;
    for f in enumerate_maps(ring, FunctionClass::Arbitrary, settings.budget)? {
        if annihilator_witness(&f, ring).is_none() {
            continue;
        }
        predicted += 1;
        let b = Binding::default().with_function("f", f);
        let mut bad = Vec::new();
        for eq in &mp {
            bad.extend(residual(eq, &b, ring)?);
        }
        if !bad.is_empty() {
            rep.backward_ok = false;
            bad.sort();
            bad.dedup();
            rep.counterexample(&b, bad, "annihilated but not a solution");
        }
    }
    rep.predicted_count = predicted;
    Ok(rep)
}

fn field_checks(ring: &Ring) -> Result<Elem, PexiderError> {
    if !ring.is_field() {
        return Err(PexiderError::NotAField(ring.label().to_string()));
    }
    if ring.characteristic() == 2 {
        return Err(PexiderError::CharacteristicTwo);
    }
    let one = ring.one().expect("fields are unital");
    if ring.domain_position(one).is_none() {
        return Err(PexiderError::NotAField(ring.domain_label()));
    }
    Ok(one)
}

/// Family of a solution `(f, h, k)` of `f(xy) = h(x)h(y) + xk(y) + k(x)y`,
/// split on the rank of `{id, h, k}`. Every tag is re-instantiated and must
/// reproduce the input exactly.
pub fn classify_pexider(
    f: &FnTable,
    h: &FnTable,
    k: &FnTable,
    ring: &Ring,
) -> Result<FamilyTag, PexiderError> {
    let one = field_checks(ring)?;
    let binding = pexider_binding(f.clone(), h.clone(), k.clone());
    let bad = residual(&equation(EQ_PEXIDER), &binding, ring)?;
    if !bad.is_empty() {
        return Err(PexiderError::ResidualNonzero { pairs: bad });
    }
    let id = FnTable::identity(ring);
    let rank = |ts: &[&FnTable]| {
        let owned: Vec<FnTable> = ts.iter().map(|t| (*t).clone()).collect();
        lin_rank(&owned, ring).expect("field scalars")
    };
    let at1 = |t: &FnTable| t.at(ring, one);
    let inv = |a: Elem| ring.inverse(a);
    let fits = |tag: FamilyTag| -> Option<FamilyTag> { (tag.instantiate(ring)? == binding).then_some(tag) };

    let r = rank(&[&id, h, k]);
    let found = match r {
        1 => fits(FamilyTag::AllLinear { lambda1: at1(h), lambda2: at1(k) }),
        2 => {
            let mut tag = None;
            if rank(&[&id, h]) == 1 {
                let k1 = at1(k);
                let delta = k.minus(ring, &id.scaled(ring, k1));
                if is_leibniz(ring, &delta) {
                    tag = fits(FamilyTag::LinearPlusLeibniz { lambda: at1(h), k1, delta });
                }
            }
            if tag.is_none() && rank(&[&id, k]) == 1 {
                if let Some(hi) = inv(at1(h)) {
                    let m = h.scaled(ring, hi);
                    if is_multiplicative(ring, &m) {
                        tag = fits(FamilyTag::MultiplicativeSquare { h1: at1(h), m, lambda: at1(k) });
                    }
                }
            }
            if tag.is_none() && rank(&[h, k]) == 1 {
                let lambda = k
                    .values
                    .iter()
                    .zip(&h.values)
                    .find(|(&kv, _)| kv != ring.zero())
                    .and_then(|(&kv, &hv)| Some(ring.mul(hv, inv(kv)?)));
                if let Some(lambda) = lambda.filter(|&l| l != ring.zero()) {
                    let inv_sq = inv(ring.mul(lambda, lambda)).expect("nonzero");
                    let gamma = ring.add(at1(k), inv_sq);
                    if let Some(gi) = inv(gamma) {
                        let m = k.plus(ring, &id.scaled(ring, inv_sq)).scaled(ring, gi);
                        if is_multiplicative(ring, &m) {
                            tag = fits(FamilyTag::LambdaKFamilyB { gamma, m, lambda });
                        }
                    }
                }
            }
            if tag.is_none() {
                tag = linear_plus_multiplicative(ring, h, k, &id, one).and_then(fits);
            }
            tag
        }
        _ => non_degenerate(ring, h, k, &id, one).and_then(fits),
    };
    found.ok_or(PexiderError::Unclassifiable { rank: r })
}

/// `k = c₁ id + c₂ h` with `id, h` independent gives `β₁ = −c₂`,
/// `γ₁ = c₁ − β₁²`, `β₂ = h(1) − β₁`, `m = β₂⁻¹(h − β₁ id)`.
fn linear_plus_multiplicative(
    ring: &Ring,
    h: &FnTable,
    k: &FnTable,
    id: &FnTable,
    one: Elem,
) -> Option<FamilyTag> {
    let field: Vec<Elem> = ring.elements().collect();
    let (c1, c2) = field
        .iter()
        .flat_map(|&a| field.iter().map(move |&b| (a, b)))
        .find(|&(a, b)| combo(ring, &[(a, id), (b, h)]) == *k)?;
    let beta1 = ring.neg(c2);
    let gamma1 = ring.sub(c1, ring.mul(beta1, beta1));
    let beta2 = ring.sub(h.at(ring, one), beta1);
    let m = h.minus(ring, &id.scaled(ring, beta1)).scaled(ring, ring.inverse(beta2)?);
    is_multiplicative(ring, &m).then_some(FamilyTag::LinearPlusMultiplicative { beta1, beta2, gamma1, m })
}

/// Searches `β₂` with `h − β₂ id = β₃ m`, then reads `γ₂`, `l` from
/// `k + β₂β₃ m = (l + γ₂) id` (normalized to `γ₁ = 1`).
fn non_degenerate(ring: &Ring, h: &FnTable, k: &FnTable, id: &FnTable, one: Elem) -> Option<FamilyTag> {
    for beta2 in ring.elements() {
        let g = h.minus(ring, &id.scaled(ring, beta2));
        let beta3 = g.at(ring, one);
        let Some(b3i) = ring.inverse(beta3) else { continue };
        let m = g.scaled(ring, b3i);
        if !is_multiplicative(ring, &m) {
            continue;
        }
        let gamma3 = ring.neg(ring.mul(beta2, beta3));
        let rest = k.minus(ring, &m.scaled(ring, gamma3));
        let gamma2 = rest.at(ring, one);
        let l = FnTable::new(
            ring.domain()
                .iter()
                .zip(&rest.values)
                .map(|(&x, &r)| match ring.inverse(x) {
                    Some(xi) => ring.sub(ring.mul(r, xi), gamma2),
                    None => ring.zero(),
                })
                .collect(),
        );
        if !is_logarithmic(ring, &l) {
            continue;
        }
        return Some(FamilyTag::NonDegenerate { beta2, beta3, gamma1: one, gamma2, gamma3, m, l });
    }
    None
}

/// Every instance of the degenerate Pexider families over `ring`, with
/// `δ` and `m` ranging over all Leibniz and multiplicative maps.
pub fn pexider_family_instances(ring: &Ring, settings: &Settings) -> Result<Vec<FamilyTag>, TheoremError> {
    if !ring.is_field() {
        return Err(TheoremError::NotAField(ring.label().to_string()));
    }
    let field: Vec<Elem> = ring.elements().collect();
    let leibniz: Vec<FnTable> = enumerate_maps(ring, FunctionClass::Leibniz, settings.budget)?.collect();
    let mults: Vec<FnTable> = enumerate_maps(ring, FunctionClass::Multiplicative, settings.budget)?.collect();
    let mut out = Vec::new();
    for &a in &field {
        for &b in &field {
            out.push(FamilyTag::AllLinear { lambda1: a, lambda2: b });
            out.push(FamilyTag::LambdaKFamilyA { gamma: a, lambda: b });
            for delta in &leibniz {
                out.push(FamilyTag::LinearPlusLeibniz { lambda: a, k1: b, delta: delta.clone() });
            }
            for m in &mults {
                out.push(FamilyTag::MultiplicativeSquare { h1: a, m: m.clone(), lambda: b });
                if b != ring.zero() {
                    out.push(FamilyTag::LambdaKFamilyB { gamma: a, m: m.clone(), lambda: b });
                }
                for &c in &field {
                    out.push(FamilyTag::LinearPlusMultiplicative {
                        beta1: a,
                        beta2: b,
                        gamma1: c,
                        m: m.clone(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Classifies every solution of the Pexider equation and checks that every
/// family instance solves it.
pub fn verify_pexider(ring: &Ring, settings: &Settings) -> Result<TheoremReport, TheoremError> {
    if !ring.is_field() {
        return Err(TheoremError::NotAField(ring.label().to_string()));
    }
    let ast = equation(EQ_PEXIDER);
    let set =
        solve(&SolveTask::new(ast.clone(), ring.clone()).budget(settings.budget).workers(settings.workers))?;
    let mut rep = TheoremReport::new("pexider", Some(ring));
    rep.solutions_found = set.len();
    let mut unclassified = 0;
    let mut by_family: BTreeMap<&'static str, usize> = BTreeMap::new();
    for b in &set.solutions {
        let (f, h, k) = (&b.functions["f"], &b.functions["h"], &b.functions["k"]);
        match classify_pexider(f, h, k, ring) {
            Ok(tag) => {
                *by_family.entry(family_name(&tag)).or_default() += 1;
                rep.witnesses.push(Witness { solution: tables_of(b), family: Some(tag) });
            }
            Err(e) => {
                unclassified += 1;
                rep.forward_ok = false;
                rep.counterexample(b, Vec::new(), e.to_string());
            }
        }
    }
    rep.check(
        "classified",
        unclassified == 0,
        true,
        format!("{unclassified} unclassifiable, by family {by_family:?}"),
    );

    let mut image = BTreeSet::new();
    for tag in pexider_family_instances(ring, settings)? {
        let Some(b) = tag.instantiate(ring) else { continue };
        let bad = residual(&ast, &b, ring)?;
        if !bad.is_empty() {
            rep.backward_ok = false;
            rep.counterexample(&b, bad, format!("{tag:?} does not solve"));
        }
        image.insert(b);
    }
    rep.predicted_count = image.len();
    let found: BTreeSet<Binding> = set.solutions.iter().cloned().collect();
    rep.check(
        "image_equals_solutions",
        found == image,
        true,
        format!("{} solutions, {} family members", found.len(), image.len()),
    );
    Ok(rep)
}

pub fn family_name(tag: &FamilyTag) -> &'static str {
    match tag {
        FamilyTag::SofyShift { .. } => "SofyShift",
        FamilyTag::MpAnnihilated { .. } => "MpAnnihilated",
        FamilyTag::AllLinear { .. } => "AllLinear",
        FamilyTag::LinearPlusLeibniz { .. } => "LinearPlusLeibniz",
        FamilyTag::MultiplicativeSquare { .. } => "MultiplicativeSquare",
        FamilyTag::LambdaKFamilyA { .. } => "LambdaKFamilyA",
        FamilyTag::LambdaKFamilyB { .. } => "LambdaKFamilyB",
        FamilyTag::LinearPlusMultiplicative { .. } => "LinearPlusMultiplicative",
        FamilyTag::NonDegenerate { .. } => "NonDegenerate",
        FamilyTag::AlienA => "AlienA",
        FamilyTag::AlienB => "AlienB",
        FamilyTag::AlienZero => "AlienZero",
        FamilyTag::AlienScaled { .. } => "AlienScaled",
    }
}

/// Predicted solutions of `λ[f(xy) − f(x)y − xf(y)] + μ[f(xy) − f(x)f(y)] = 0`.
pub fn alien_prediction(
    ring: &Ring,
    lambda: Elem,
    mu: Elem,
    settings: &Settings,
) -> Result<Vec<(FnTable, FamilyTag)>, TheoremError> {
    let z = ring.zero();
    let mut out: Vec<(FnTable, FamilyTag)> = if lambda == z {
        enumerate_maps(ring, FunctionClass::Multiplicative, settings.budget)?
            .map(|m| (m, FamilyTag::AlienA))
            .collect()
    } else if mu == z {
        enumerate_maps(ring, FunctionClass::Leibniz, settings.budget)?
            .map(|d| (d, FamilyTag::AlienB))
            .collect()
    } else {
        let scale = ring.mul(ring.sub(mu, lambda), ring.inverse(mu).expect("field"));
        let scaled = FnTable::identity(ring).scaled(ring, scale);
        let mut v = vec![(FnTable::zero(ring), FamilyTag::AlienZero)];
        if scaled != FnTable::zero(ring) {
            v.push((scaled, FamilyTag::AlienScaled { lambda, mu, scale }));
        }
        v
    };
    out.sort();
    Ok(out)
}

pub fn verify_alien(
    ring: &Ring,
    lambda: Elem,
    mu: Elem,
    settings: &Settings,
) -> Result<TheoremReport, TheoremError> {
    check_element(ring, lambda)?;
    check_element(ring, mu)?;
    if lambda == ring.zero() && mu == ring.zero() {
        return Err(TheoremError::BothZero);
    }
    if !ring.is_field() {
        return Err(TheoremError::NotAField(ring.label().to_string()));
    }
    let ast = equation(EQ_ALIEN);
    let set = solve(
        &SolveTask::new(ast.clone(), ring.clone())
            .param("lambda", lambda)
            .param("mu", mu)
            .budget(settings.budget)
            .workers(settings.workers),
    )?;
    let predicted = alien_prediction(ring, lambda, mu, settings)?;
    let mut rep = TheoremReport::new("alien", Some(ring));
    rep.parameters.insert("lambda".into(), lambda);
    rep.parameters.insert("mu".into(), mu);
    rep.solutions_found = set.len();
    rep.predicted_count = predicted.len();

    let predicted_map: BTreeMap<&FnTable, &FamilyTag> = predicted.iter().map(|(t, g)| (t, g)).collect();
    let found: BTreeSet<&FnTable> = set.solutions.iter().map(|b| &b.functions["f"]).collect();
    for b in &set.solutions {
        match predicted_map.get(&b.functions["f"]) {
            Some(tag) => rep.witnesses.push(Witness { solution: tables_of(b), family: Some((*tag).clone()) }),
            None => {
                rep.forward_ok = false;
                rep.counterexample(b, Vec::new(), "solution outside the predicted set");
            }
        }
    }
    for (t, tag) in &predicted {
        if !found.contains(t) {
            rep.backward_ok = false;
            let b = Binding::default()
                .with_function("f", t.clone())
                .with_param("lambda", lambda)
                .with_param("mu", mu);
            let bad = residual(&ast, &b, ring)?;
            rep.counterexample(&b, bad, format!("predicted {tag:?} is not a solution"));
        }
    }
    Ok(rep)
}

/// Coefficient comparison for the rank-three family: the constraint set must
/// be exactly `{g3 + b2*b3}` and the identity must follow it.
pub fn verify_thm5_symbolic() -> Result<TheoremReport, crate::symbolic::SymError> {
    use crate::symbolic::{check_identity, derive_constraints, preset, render_constraints};
    use num::BigRational;

    let pre = preset("thm5").expect("built-in preset");
    let ast = pre.ast();
    let constraints = render_constraints(&derive_constraints(&pre.family, &ast)?);
    let mut rep = TheoremReport::new("thm5-symbolic", None);
    let expected = vec!["g3 + b2*b3".to_string()];
    rep.solutions_found = constraints.len();
    rep.predicted_count = expected.len();
    rep.forward_ok = constraints == expected;
    rep.check("constraints", rep.forward_ok, true, format!("{constraints:?}"));

    let q = |n: i64| BigRational::from_integer(n.into());
    let mut values: BTreeMap<String, BigRational> = [("b2", 1), ("b3", 1), ("g1", 1), ("g2", 0), ("g3", -1)]
        .iter()
        .map(|(k, v)| (k.to_string(), q(*v)))
        .collect();
    let satisfied = check_identity(&pre.family, &ast, &values)?;
    values.insert("g3".into(), q(0));
    let violated = check_identity(&pre.family, &ast, &values)?;
    rep.backward_ok = satisfied && !violated;
    rep.check(
        "identity_flip",
        rep.backward_ok,
        true,
        format!("holds at g3 = -b2*b3: {satisfied}, holds at g3 = 0: {violated}"),
    );
    for note in &pre.family.annotations {
        rep.check("side_condition", true, false, note.clone());
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_ring, RingKind, RingSpec};

    fn ring(kind: RingKind) -> Ring {
        build_ring(&RingSpec::new(kind)).unwrap()
    }

    fn gf(p: usize, k: usize) -> Ring {
        ring(RingKind::GF { p, k, modulus: None })
    }

    fn z(n: usize) -> Ring {
        ring(RingKind::Zn { n })
    }

    #[test]
    fn shift_examples() {
        let z2 = z(2);
        assert_eq!(multiplicative_shift(&FnTable::zero(&z2), 1, &z2), FnTable::identity(&z2));
        let neg = FnTable::new(vec![0, 1]);
        assert_eq!(multiplicative_shift(&neg, 1, &z2), FnTable::zero(&z2));
        let z5 = z(5);
        let minus_id = FnTable::new(z5.elements().map(|x| z5.neg(x)).collect());
        assert_eq!(multiplicative_shift(&minus_id, 1, &z5), FnTable::zero(&z5));
    }

    #[test]
    fn sofy_on_z2_and_gf3() {
        let rep = verify_sofy(&z(2), 1, &Settings::default()).unwrap();
        assert_eq!(rep.solutions_found, 3);
        assert!(rep.holds() && rep.forward_ok && rep.backward_ok);
        let rep = verify_sofy(&gf(3, 1), 2, &Settings::default()).unwrap();
        assert!(rep.holds() && rep.backward_ok);
        assert_eq!(rep.solutions_found, 4);
    }

    #[test]
    fn sofy_zero_divisor_epsilon() {
        let rep = verify_sofy(&z(6), 3, &Settings::default()).unwrap();
        assert!(rep.forward_ok);
        assert!(!rep.backward_asserted);
        assert!(!rep.backward_ok);
        assert!(rep.holds());
        assert!(rep.counterexample_count >= rep.counterexamples.len());
        // 3·h + id is the identity, yet h fails at (1, 1)
        let r = z(6);
        let h = FnTable::new(vec![0, 2, 0, 0, 0, 0]);
        assert_eq!(multiplicative_shift(&h, 3, &r), FnTable::identity(&r));
        let b = Binding::default().with_function("h", h).with_param("eps", 3);
        assert!(residual(&equation(EQ_SOFY), &b, &r).unwrap().contains(&(1, 1)));
    }

    #[test]
    fn sofy_errors() {
        assert_eq!(verify_sofy(&z(4), 0, &Settings::default()).unwrap_err(), TheoremError::EpsilonZero);
        let ut = ring(RingKind::UT2 { p: 2 });
        assert_eq!(
            verify_sofy(&ut, 1, &Settings::default()).unwrap_err(),
            TheoremError::NotCentral { eps: 1 }
        );
    }

    #[test]
    fn annihilators() {
        let z6 = z(6);
        assert_eq!(annihilator_witness(&FnTable::zero(&z6), &z6), Some(1));
        assert_eq!(annihilator_witness(&FnTable::identity(&z6), &z6), None);
        assert_eq!(annihilator_witness(&FnTable::new(vec![0, 3, 0, 3, 3, 0]), &z6), Some(2));
    }

    #[test]
    fn mp_on_fields_and_z6() {
        let rep = verify_mp(&gf(5, 1), &Settings::default()).unwrap();
        assert_eq!(rep.solutions_found, 1);
        assert!(rep.holds());
        let rep = verify_mp(&z(6), &Settings::default()).unwrap();
        assert!(rep.forward_ok);
        assert!(rep.witnesses.iter().all(|w| matches!(w.family, Some(FamilyTag::MpAnnihilated { .. }))));
    }

    #[test]
    fn classify_examples() {
        let g3 = gf(3, 1);
        let tag = classify_pexider(
            &FnTable::new(vec![0, 2, 1]),
            &FnTable::new(vec![0, 1, 2]),
            &FnTable::new(vec![0, 2, 1]),
            &g3,
        )
        .unwrap();
        assert_eq!(tag, FamilyTag::AllLinear { lambda1: 1, lambda2: 2 });
        let zero = FnTable::zero(&g3);
        assert_eq!(
            classify_pexider(&zero, &zero, &zero, &g3).unwrap(),
            FamilyTag::AllLinear { lambda1: 0, lambda2: 0 }
        );
        let bad = classify_pexider(
            &FnTable::new(vec![1, 2, 1]),
            &FnTable::new(vec![0, 1, 2]),
            &FnTable::new(vec![0, 2, 1]),
            &g3,
        );
        assert!(matches!(bad, Err(PexiderError::ResidualNonzero { pairs }) if pairs.contains(&(0, 0))));
    }

    #[test]
    fn square_of_a_multiplicative_map() {
        let g5 = gf(5, 1);
        let m = FnTable::new(g5.elements().map(|x| g5.mul(x, x)).collect());
        let tag = classify_pexider(&m, &m, &FnTable::zero(&g5), &g5).unwrap();
        assert_eq!(tag, FamilyTag::MultiplicativeSquare { h1: 1, m, lambda: 0 });

        let g9 = gf(3, 2);
        let frob = FnTable::new(g9.elements().map(|x| g9.mul(x, g9.mul(x, x))).collect());
        let tag = classify_pexider(&frob, &frob, &FnTable::zero(&g9), &g9).unwrap();
        assert_eq!(tag, FamilyTag::MultiplicativeSquare { h1: 1, m: frob, lambda: 0 });
    }

    #[test]
    fn characteristic_two_is_rejected() {
        let g4 = gf(2, 2);
        let frob = FnTable::new(g4.elements().map(|x| g4.mul(x, x)).collect());
        assert_eq!(
            classify_pexider(&frob, &frob, &FnTable::zero(&g4), &g4).unwrap_err(),
            PexiderError::CharacteristicTwo
        );
    }

    #[test]
    fn pairwise_independent_rank_two() {
        let g3 = gf(3, 1);
        let chi = FnTable::new(vec![0, 1, 1]);
        let id = FnTable::identity(&g3);
        let h = id.plus(&g3, &chi);
        let k = chi.scaled(&g3, 2);
        let f = id.plus(&g3, &chi);
        let tag = classify_pexider(&f, &h, &k, &g3).unwrap();
        assert_eq!(tag, FamilyTag::LinearPlusMultiplicative { beta1: 1, beta2: 1, gamma1: 0, m: chi });
    }

    #[test]
    fn pexider_over_gf3() {
        let rep = verify_pexider(&gf(3, 1), &Settings::default()).unwrap();
        assert!(rep.holds(), "{}", rep.render_text());
        assert_eq!(rep.solutions_found, rep.predicted_count);
    }

    #[test]
    fn symbolic_family_report_holds() {
        let rep = verify_thm5_symbolic().unwrap();
        assert!(rep.holds(), "{}", rep.render_text());
    }

    #[test]
    fn alien_examples() {
        let g5 = gf(5, 1);
        let rep = verify_alien(&g5, 1, 2, &Settings::default()).unwrap();
        assert!(rep.holds());
        assert_eq!(rep.solutions_found, 2);
        let rep = verify_alien(&gf(3, 1), 1, 1, &Settings::default()).unwrap();
        assert_eq!(rep.solutions_found, 1);
        assert!(rep.holds());
        assert_eq!(verify_alien(&g5, 0, 0, &Settings::default()).unwrap_err(), TheoremError::BothZero);
        let rep = verify_alien(&g5, 0, 1, &Settings::default()).unwrap();
        assert_eq!(rep.solutions_found, 6);
        assert!(rep.holds());
    }
}
