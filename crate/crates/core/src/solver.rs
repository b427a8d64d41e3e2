//! Exhaustive search for every binding of unknown functions that satisfies
//! an equation at all pairs of the domain.
//!
//! Unknowns are assigned one step at a time: an unrestricted unknown is
//! filled entry by entry, a class-restricted one picks a whole table from
//! [`enumerate_maps`]. Each pair `(x, y)` is checked as soon as every entry it
//! reads is assigned. When the equation reads `f(x*y) = rhs` and setting
//! `y = 1` yields a definition of `f`, `f` is computed instead of searched.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Elem, Ring};
use crate::eqdsl::{
    binding_tables, pivot_reduce, stuck_to_error, Binding, EqError, EquationAst, Node, PivotResult,
};
use crate::maps::{enumerate_maps, is_in_class, FnTable, FunctionClass, MapError};

/// Default cap on the number of candidate bindings a search may cover.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

const UNSET: Elem = Elem::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "error")]
pub enum SolveError {
    #[error("search needs {needed} candidates, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error(transparent)]
    Equation(#[from] EqError),
    #[error("class {class} for {name:?} is invalid: {reason}")]
    InvalidClass { name: String, class: String, reason: String },
    #[error("{name:?} is not an unknown of the equation")]
    UnknownFunction { name: String },
}

impl From<MapError> for SolveError {
    fn from(e: MapError) -> Self {
        match e {
            MapError::BudgetExceeded { needed, budget } => SolveError::BudgetExceeded { needed, budget },
            other => SolveError::InvalidClass {
                name: String::new(),
                class: String::new(),
                reason: other.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveTask {
    pub ast: EquationAst,
    pub ring: Ring,
    pub classes: BTreeMap<String, FunctionClass>,
    pub params: BTreeMap<String, Elem>,
    pub budget: u128,
    /// Compute the left-hand unknown from a `y = 1` definition when possible.
    pub pivot: bool,
    /// Check pairs as soon as they are decidable instead of at the leaves.
    pub incremental: bool,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl SolveTask {
    pub fn new(ast: EquationAst, ring: Ring) -> Self {
        SolveTask {
            ast,
            ring,
            classes: BTreeMap::new(),
            params: BTreeMap::new(),
            budget: DEFAULT_BUDGET,
            pivot: true,
            incremental: true,
            workers: 0,
        }
    }

    pub fn class(mut self, name: &str, class: FunctionClass) -> Self {
        self.classes.insert(name.to_string(), class);
        self
    }

    pub fn param(mut self, name: &str, value: Elem) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    pub fn pivot(mut self, on: bool) -> Self {
        self.pivot = on;
        self
    }

    pub fn incremental(mut self, on: bool) -> Self {
        self.incremental = on;
        self
    }

    pub fn workers(mut self, n: usize) -> Self {
        self.workers = n;
        self
    }

    /// Class of every unknown, defaulting to `Arbitrary`.
    pub fn resolved_classes(&self) -> BTreeMap<String, FunctionClass> {
        self.ast
            .functions
            .iter()
            .map(|f| (f.clone(), self.classes.get(f).copied().unwrap_or(FunctionClass::Arbitrary)))
            .collect()
    }
}

/// The resolved task, as echoed in reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskEcho {
    pub equation: String,
    pub ring: String,
    pub ring_size: usize,
    pub ring_hash: String,
    pub domain: String,
    pub domain_size: usize,
    pub classes: BTreeMap<String, String>,
    pub params: BTreeMap<String, Elem>,
    pub budget: u128,
}

impl TaskEcho {
    fn of(task: &SolveTask) -> Self {
        TaskEcho {
            equation: task.ast.to_string(),
            ring: task.ring.label().to_string(),
            ring_size: task.ring.size(),
            ring_hash: task.ring.content_hash(),
            domain: task.ring.domain_label(),
            domain_size: task.ring.domain_len(),
            classes: task.resolved_classes().into_iter().map(|(k, v)| (k, v.to_string())).collect(),
            params: task.params.clone(),
            budget: task.budget,
        }
    }
}

/// One search step, as shown by a dry run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepInfo {
    pub function: String,
    pub class: String,
    /// Domain position for entry-wise steps, absent for whole-table steps.
    pub position: Option<usize>,
    pub choices: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolvePlan {
    pub task: TaskEcho,
    pub pivot: Option<String>,
    pub steps: Vec<StepInfo>,
    pub candidate_space: u128,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionSet {
    pub task: TaskEcho,
    pub candidate_space: u128,
    /// Complete bindings that reached final verification.
    pub enumerated_count: u64,
    pub pruned_by_pivot: bool,
    pub pivot: Option<String>,
    #[serde(serialize_with = "serialize_solutions")]
    pub solutions: Vec<Binding>,
}

fn serialize_solutions<S: serde::Serializer>(sols: &[Binding], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(sols.len()))?;
    for b in sols {
        let view: BTreeMap<&str, &Vec<Elem>> =
            b.functions.iter().map(|(k, v)| (k.as_str(), &v.values)).collect();
        seq.serialize_element(&view)?;
    }
    seq.end()
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// The tables of one unknown across all solutions.
    pub fn tables(&self, name: &str) -> Vec<FnTable> {
        self.solutions.iter().map(|b| b.functions[name].clone()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution sets serialize")
    }

    /// One row per solution; columns `name(e)` for each unknown and domain element.
    pub fn to_csv(&self, domain: &[Elem]) -> String {
        let names: Vec<&String> = self.task.classes.keys().collect();
        let mut out = String::new();
        let header: Vec<String> =
            names.iter().flat_map(|n| domain.iter().map(move |e| format!("{n}({e})"))).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for b in &self.solutions {
            let row: Vec<String> = names
                .iter()
                .flat_map(|n| b.functions[n.as_str()].values.iter().map(|v| v.to_string()))
                .collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

enum Step {
    Slot { fun: usize, pos: usize },
    Table { fun: usize, tables: Vec<FnTable> },
}

impl Step {
    fn choices(&self, q: usize) -> usize {
        match self {
            Step::Slot { .. } => q,
            Step::Table { tables, .. } => tables.len(),
        }
    }
}

struct Search<'a> {
    ring: &'a Ring,
    lhs: Node,
    rhs: Node,
    /// `(slot, definition)` of the computed unknown.
    pivot: Option<(usize, Node)>,
    one: Elem,
    steps: Vec<Step>,
    /// `checks[s]` holds the pairs decidable once steps `0..s` are assigned.
    checks: Vec<Vec<(Elem, Elem)>>,
    classes: Vec<FunctionClass>,
    nfun: usize,
}

struct Prepared<'a> {
    search: Search<'a>,
    plan: SolvePlan,
}

fn prepare(task: &SolveTask) -> Result<Prepared<'_>, SolveError> {
    let ring = &task.ring;
    let names = &task.ast.functions;
    for name in task.classes.keys() {
        if !names.contains(name) {
            return Err(SolveError::UnknownFunction { name: name.clone() });
        }
    }
    let resolved = task.resolved_classes();
    let classes: Vec<FunctionClass> = names.iter().map(|n| resolved[n]).collect();
    for (name, class) in names.iter().zip(&classes) {
        if let FunctionClass::HomoDerivSofy { eps } = class {
            if *eps >= ring.size() || !ring.is_central(*eps) || *eps == ring.zero() {
                return Err(SolveError::InvalidClass {
                    name: name.clone(),
                    class: class.to_string(),
                    reason: "epsilon must be a central nonzero element".into(),
                });
            }
        }
    }
    let lhs = Node::compile(&task.ast.lhs, names, &task.params, ring)?;
    let rhs = Node::compile(&task.ast.rhs, names, &task.params, ring)?;

    let one = ring.one().filter(|&o| ring.domain_position(o).is_some());
    let mut pivot = None;
    if let (true, Some(_), crate::eqdsl::Expr::App(name, _)) = (task.pivot, one, &task.ast.lhs) {
        if let Ok(PivotResult::Definition(def)) = pivot_reduce(&task.ast, name) {
            let slot = names.iter().position(|n| n == name).expect("lhs unknown is free");
            pivot = Some((slot, Node::compile(&def, names, &task.params, ring)?));
        }
    }
    let one = one.unwrap_or(ring.zero());

    let n = ring.domain_len();
    let q = ring.size();
    let mut steps = Vec::new();
    let mut infos = Vec::new();
    for (slot, name) in names.iter().enumerate() {
        if pivot.as_ref().is_some_and(|(p, _)| *p == slot) {
            continue;
        }
        match classes[slot] {
            FunctionClass::Arbitrary => {
                for pos in 0..n {
                    steps.push(Step::Slot { fun: slot, pos });
                    infos.push(StepInfo {
                        function: name.clone(),
                        class: classes[slot].to_string(),
                        position: Some(pos),
                        choices: q,
                    });
                }
            }
            class => {
                let tables: Vec<FnTable> = enumerate_maps(ring, class, task.budget)?.collect();
                infos.push(StepInfo {
                    function: name.clone(),
                    class: class.to_string(),
                    position: None,
                    choices: tables.len(),
                });
                steps.push(Step::Table { fun: slot, tables });
            }
        }
    }
    let candidate_space =
        steps.iter().try_fold(1u128, |acc, s| acc.checked_mul(s.choices(q) as u128)).unwrap_or(u128::MAX);

    // when each table entry becomes known
    let nsteps = steps.len();
    let mut avail = vec![vec![nsteps; n]; names.len()];
    for (i, s) in steps.iter().enumerate() {
        match s {
            Step::Slot { fun, pos } => avail[*fun][*pos] = i + 1,
            Step::Table { fun, .. } => avail[*fun].iter_mut().for_each(|a| *a = i + 1),
        }
    }
    if let Some((p, def)) = &pivot {
        for pos in 0..n {
            let x = ring.domain()[pos];
            avail[*p][pos] = match def.static_deps(ring, x, one)? {
                Some(deps) => deps.iter().map(|&(f, i)| avail[f][i]).max().unwrap_or(0),
                None => nsteps,
            };
        }
    }
    let mut checks = vec![Vec::new(); nsteps + 1];
    let dom = ring.domain();
    for &x in dom {
        for &y in dom {
            let mut at = 0;
            let mut dynamic = false;
            for side in [&lhs, &rhs] {
                match side.static_deps(ring, x, y)? {
                    Some(deps) => {
                        at = deps.iter().map(|&(f, i)| avail[f][i]).fold(at, usize::max);
                    }
                    None => dynamic = true,
                }
            }
            if dynamic || !task.incremental {
                at = nsteps;
            }
            checks[at].push((x, y));
        }
    }

    let plan = SolvePlan {
        task: TaskEcho::of(task),
        pivot: pivot.as_ref().map(|(p, _)| names[*p].clone()),
        steps: infos,
        candidate_space,
        pairs: n * n,
    };
    Ok(Prepared {
        search: Search { ring, lhs, rhs, pivot, one, steps, checks, classes, nfun: names.len() },
        plan,
    })
}

/// Resolves the search without running it.
pub fn plan(task: &SolveTask) -> Result<SolvePlan, SolveError> {
    Ok(prepare(task)?.plan)
}

type Tables = Vec<Vec<Elem>>;

impl Search<'_> {
    fn read(&self, vals: &Tables, slot: usize, pos: usize) -> Option<Elem> {
        if let Some((p, def)) = &self.pivot {
            if *p == slot {
                let base = |s: usize, i: usize| Some(vals[s][i]).filter(|&v| v != UNSET);
                return def.eval(self.ring, self.ring.domain()[pos], self.one, &base).ok();
            }
        }
        Some(vals[slot][pos]).filter(|&v| v != UNSET)
    }

    fn pairs_hold(&self, vals: &Tables, pairs: &[(Elem, Elem)]) -> bool {
        let get = |s: usize, i: usize| self.read(vals, s, i);
        pairs.iter().all(|&(x, y)| {
            match (self.lhs.eval(self.ring, x, y, &get), self.rhs.eval(self.ring, x, y, &get)) {
                (Ok(a), Ok(b)) => a == b,
                // undecidable here; the leaf verification settles it
                _ => true,
            }
        })
    }

    fn assign(&self, vals: &mut Tables, step: usize, choice: usize) {
        match &self.steps[step] {
            Step::Slot { fun, pos } => vals[*fun][*pos] = choice,
            Step::Table { fun, tables } => vals[*fun].copy_from_slice(&tables[choice].values),
        }
    }

    fn unassign(&self, vals: &mut Tables, step: usize) {
        match &self.steps[step] {
            Step::Slot { fun, pos } => vals[*fun][*pos] = UNSET,
            Step::Table { fun, .. } => vals[*fun].iter_mut().for_each(|v| *v = UNSET),
        }
    }

    fn dfs(
        &self,
        step: usize,
        vals: &mut Tables,
        out: &mut Vec<Tables>,
        count: &mut u64,
    ) -> Result<(), EqError> {
        if step == self.steps.len() {
            return self.leaf(vals, out, count);
        }
        for choice in 0..self.steps[step].choices(self.ring.size()) {
            self.assign(vals, step, choice);
            if self.pairs_hold(vals, &self.checks[step + 1]) {
                self.dfs(step + 1, vals, out, count)?;
            }
        }
        self.unassign(vals, step);
        Ok(())
    }

    fn leaf(&self, vals: &Tables, out: &mut Vec<Tables>, count: &mut u64) -> Result<(), EqError> {
        *count += 1;
        let mut full = vals.clone();
        if let Some((p, def)) = &self.pivot {
            let base = |s: usize, i: usize| Some(vals[s][i]);
            for (pos, &x) in self.ring.domain().iter().enumerate() {
                full[*p][pos] = def.eval(self.ring, x, self.one, &base).map_err(stuck_to_error)?;
            }
            let class = self.classes[*p];
            if class != FunctionClass::Arbitrary
                && !is_in_class(self.ring, &FnTable::new(full[*p].clone()), class)
            {
                return Ok(());
            }
        }
        if violations(self.ring, &self.lhs, &self.rhs, &full, true)?.is_empty() {
            out.push(full);
        }
        Ok(())
    }
}

/// Pairs where the two sides differ under complete tables.
fn violations(
    ring: &Ring,
    lhs: &Node,
    rhs: &Node,
    tables: &Tables,
    first_only: bool,
) -> Result<Vec<(Elem, Elem)>, EqError> {
    let get = |s: usize, i: usize| Some(tables[s][i]);
    let mut bad = Vec::new();
    for &x in ring.domain() {
        for &y in ring.domain() {
            let a = lhs.eval(ring, x, y, &get).map_err(stuck_to_error)?;
            let b = rhs.eval(ring, x, y, &get).map_err(stuck_to_error)?;
            if a != b {
                bad.push((x, y));
                if first_only {
                    return Ok(bad);
                }
            }
        }
    }
    Ok(bad)
}

/// Every pair `(x, y)` of the domain where the binding violates the equation.
pub fn residual(ast: &EquationAst, binding: &Binding, ring: &Ring) -> Result<Vec<(Elem, Elem)>, EqError> {
    let tables: Tables =
        binding_tables(&ast.functions, binding, ring)?.into_iter().map(|t| t.values.clone()).collect();
    let lhs = Node::compile(&ast.lhs, &ast.functions, &binding.params, ring)?;
    let rhs = Node::compile(&ast.rhs, &ast.functions, &binding.params, ring)?;
    violations(ring, &lhs, &rhs, &tables, false)
}

/// Every binding satisfying the task's equation, in canonical order.
pub fn solve(task: &SolveTask) -> Result<SolutionSet, SolveError> {
    let Prepared { search, plan } = prepare(task)?;
    if plan.candidate_space > task.budget {
        return Err(SolveError::BudgetExceeded { needed: plan.candidate_space, budget: task.budget });
    }
    let n = task.ring.domain_len();
    let fresh = || vec![vec![UNSET; n]; search.nfun];

    let (mut found, count) = if !search.pairs_hold(&fresh(), &search.checks[0]) {
        (Vec::new(), 0)
    } else if search.steps.is_empty() {
        let mut out = Vec::new();
        let mut count = 0;
        search.leaf(&fresh(), &mut out, &mut count)?;
        (out, count)
    } else {
        let branch = |choice: usize| -> Result<(Vec<Tables>, u64), EqError> {
            let mut vals = fresh();
            let mut out = Vec::new();
            let mut count = 0;
            search.assign(&mut vals, 0, choice);
            if search.pairs_hold(&vals, &search.checks[1]) {
                search.dfs(1, &mut vals, &mut out, &mut count)?;
            }
            Ok((out, count))
        };
        let choices = search.steps[0].choices(task.ring.size());
        let parts: Vec<Result<(Vec<Tables>, u64), EqError>> = if task.workers == 1 {
            (0..choices).map(branch).collect()
        } else if task.workers == 0 {
            (0..choices).into_par_iter().map(branch).collect()
        } else {
            let pool =
                rayon::ThreadPoolBuilder::new().num_threads(task.workers).build().expect("thread pool");
            pool.install(|| (0..choices).into_par_iter().map(branch).collect())
        };
        let mut all = Vec::new();
        let mut total = 0;
        for part in parts {
            let (sols, c) = part?;
            all.extend(sols);
            total += c;
        }
        (all, total)
    };

    found.sort_by_key(|a| a.concat());
    found.dedup();
    let names = &task.ast.functions;
    let solutions = found
        .into_iter()
        .map(|tables| Binding {
            functions: names.iter().cloned().zip(tables.into_iter().map(FnTable::new)).collect(),
            params: task.params.clone(),
        })
        .collect();
    Ok(SolutionSet {
        task: plan.task,
        candidate_space: plan.candidate_space,
        enumerated_count: count,
        pruned_by_pivot: plan.pivot.is_some(),
        pivot: plan.pivot,
        solutions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_ring, RingKind, RingSpec};
    use crate::eqdsl::parse_equation;

    fn ring(kind: RingKind) -> Ring {
        build_ring(&RingSpec::new(kind)).unwrap()
    }

    fn gf3() -> Ring {
        ring(RingKind::GF { p: 3, k: 1, modulus: None })
    }

    const GEN: &str = "f(x*y)=h(x)*h(y)+x*k(y)+k(x)*y";

    #[test]
    fn leibniz_over_gf3_is_zero_only() {
        let task = SolveTask::new(parse_equation("f(x*y)=f(x)*y+x*f(y)").unwrap(), gf3());
        let set = solve(&task).unwrap();
        assert_eq!(set.tables("f"), vec![FnTable::new(vec![0, 0, 0])]);
        assert_eq!(set.candidate_space, 27);
        assert!(!set.pruned_by_pivot);
    }

    #[test]
    fn sofy_over_z2_has_three_solutions() {
        let z2 = ring(RingKind::Zn { n: 2 });
        let task = SolveTask::new(parse_equation("f(x*y)=f(x)*y+x*f(y)+f(x)*f(y)").unwrap(), z2);
        assert_eq!(solve(&task).unwrap().len(), 3);
    }

    #[test]
    fn pexider_pivot_candidate_count() {
        let task = SolveTask::new(parse_equation(GEN).unwrap(), gf3());
        let p = plan(&task).unwrap();
        assert_eq!(p.pivot.as_deref(), Some("f"));
        assert_eq!(p.candidate_space, 729);
        let set = solve(&task).unwrap();
        assert!(set.pruned_by_pivot);
        let full = solve(&task.clone().pivot(false)).unwrap();
        assert_eq!(full.candidate_space, 27 * 729);
        assert_eq!(set.solutions, full.solutions);
    }

    #[test]
    fn residual_examples() {
        let r = gf3();
        let ast = parse_equation(GEN).unwrap();
        let mut b = Binding::default()
            .with_function("f", FnTable::new(vec![0, 2, 1]))
            .with_function("h", FnTable::new(vec![0, 1, 2]))
            .with_function("k", FnTable::new(vec![0, 2, 1]));
        assert!(residual(&ast, &b, &r).unwrap().is_empty());
        b.functions.get_mut("f").unwrap().values[0] = 1;
        assert!(residual(&ast, &b, &r).unwrap().contains(&(0, 0)));
    }

    #[test]
    fn budget_reports_needed_size() {
        let task = SolveTask::new(parse_equation(GEN).unwrap(), gf3()).budget(100);
        assert_eq!(solve(&task).unwrap_err(), SolveError::BudgetExceeded { needed: 729, budget: 100 });
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let task = SolveTask::new(parse_equation(GEN).unwrap(), gf3());
        let a = solve(&task.clone().workers(1)).unwrap().to_json();
        let b = solve(&task.clone().workers(3)).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn class_restricted_unknowns() {
        let z4 = ring(RingKind::Zn { n: 4 });
        let task = SolveTask::new(parse_equation("f(x*y)=f(x)*f(y)").unwrap(), z4)
            .class("f", FunctionClass::Additive)
            .pivot(false);
        let set = solve(&task).unwrap();
        // additive multiplicative maps of Z4: zero and identity
        assert_eq!(set.tables("f"), vec![FnTable::new(vec![0, 0, 0, 0]), FnTable::new(vec![0, 1, 2, 3])]);
        assert_eq!(set.candidate_space, 4);
    }

    #[test]
    fn pivot_class_is_checked() {
        let r = gf3();
        let task = SolveTask::new(parse_equation(GEN).unwrap(), r).class("f", FunctionClass::Multiplicative);
        let set = solve(&task).unwrap();
        assert!(set.pruned_by_pivot);
        let unrestricted = solve(&SolveTask::new(parse_equation(GEN).unwrap(), gf3())).unwrap();
        let expected: Vec<Binding> = unrestricted
            .solutions
            .into_iter()
            .filter(|b| crate::maps::is_multiplicative(&gf3(), &b.functions["f"]))
            .collect();
        assert_eq!(set.solutions, expected);
    }

    #[test]
    fn parameters_and_csv() {
        let r = ring(RingKind::GF { p: 5, k: 1, modulus: None });
        let ast = parse_equation("lambda*(f(x*y)-f(x)*y-x*f(y))+mu*(f(x*y)-f(x)*f(y))=0").unwrap();
        let set = solve(&SolveTask::new(ast.clone(), r.clone()).param("lambda", 1).param("mu", 2)).unwrap();
        assert_eq!(
            set.tables("f"),
            vec![FnTable::new(vec![0, 0, 0, 0, 0]), FnTable::new(vec![0, 3, 1, 4, 2])]
        );
        let csv = set.to_csv(r.domain());
        assert_eq!(csv.lines().next().unwrap(), "f(0),f(1),f(2),f(3),f(4)");
        assert_eq!(csv.lines().nth(2).unwrap(), "0,3,1,4,2");
        assert!(matches!(
            solve(&SolveTask::new(ast, r)),
            Err(SolveError::Equation(EqError::UnboundName { .. }))
        ));
    }
}
