mod common;

use std::collections::{BTreeMap, BTreeSet};

use fnq_core::algebra::{build_ring, Ring, RingSpec};
use fnq_core::eqdsl::{eval_side, parse_equation, pivot_reduce, Binding, EquationAst, Expr, PivotResult};
use fnq_core::maps::{enumerate_maps, lin_rank, FnTable, FunctionClass, DEFAULT_MAP_BUDGET};
use fnq_core::solver::{residual, solve, SolveTask};
use fnq_core::symbolic::{
    check_identity, derive_constraints, instantiate, presets, rational_in_ring, Atom, SolutionFamily, SymExpr,
};
use fnq_core::theorems::{EQ_ALIEN, EQ_LEIBNIZ, EQ_MULTIPLICATIVE, EQ_PEXIDER, EQ_SOFY};
use num::{BigInt, BigRational};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ring(json: &str) -> Ring {
    let spec: RingSpec = serde_json::from_str(json).unwrap();
    build_ring(&spec).unwrap()
}

fn ring_spec() -> impl Strategy<Value = String> {
    let zn = (2usize..=16).prop_map(|n| format!(r#"{{"kind":"Zn","n":{n}}}"#));
    let gf = prop_oneof![
        (Just(2usize), 1usize..=5),
        (Just(3usize), 1usize..=3),
        (Just(5usize), 1usize..=2),
        (Just(7usize), 1usize..=2),
    ]
    .prop_map(|(p, k)| format!(r#"{{"kind":"GF","p":{p},"k":{k}}}"#));
    let pq = prop_oneof![(Just(2usize), 1usize..=5), (Just(3usize), 1usize..=3)]
        .prop_map(|(p, k)| format!(r#"{{"kind":"PolyQuot","p":{p},"k":{k}}}"#));
    let ut = prop_oneof![Just(2usize), Just(3)].prop_map(|p| format!(r#"{{"kind":"UT2","p":{p}}}"#));
    let base = prop_oneof![zn, gf, pq, ut];
    let small = prop_oneof![
        (2usize..=4).prop_map(|n| format!(r#"{{"kind":"Zn","n":{n}}}"#)),
        Just(r#"{"kind":"GF","p":2,"k":2}"#.to_string()),
        Just(r#"{"kind":"UT2","p":2}"#.to_string()),
    ];
    let product =
        (small.clone(), small).prop_map(|(l, r)| format!(r#"{{"kind":"Product","left":{l},"right":{r}}}"#));
    prop_oneof![4 => base, 1 => product]
}

fn field_spec() -> impl Strategy<Value = String> {
    prop_oneof![
        (Just(2usize), 1usize..=5),
        (Just(3usize), 1usize..=3),
        (Just(5usize), 1usize..=2),
        (Just(7usize), 1usize..=2),
        (Just(11usize), Just(1usize)),
    ]
    .prop_map(|(p, k)| format!(r#"{{"kind":"GF","p":{p},"k":{k}}}"#))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms_hold_exhaustively(spec in ring_spec()) {
        let r = ring(&spec);
        let n = r.size();
        let one = r.one().unwrap();
        for a in 0..n {
            prop_assert_eq!(r.add(a, r.zero()), a);
            prop_assert_eq!(r.add(a, r.neg(a)), r.zero());
            prop_assert_eq!(r.mul(a, one), a);
            prop_assert_eq!(r.mul(one, a), a);
            for b in 0..n {
                prop_assert_eq!(r.add(a, b), r.add(b, a));
                for c in 0..n {
                    prop_assert_eq!(r.add(r.add(a, b), c), r.add(a, r.add(b, c)));
                    prop_assert_eq!(r.mul(r.mul(a, b), c), r.mul(a, r.mul(b, c)));
                    prop_assert_eq!(r.mul(a, r.add(b, c)), r.add(r.mul(a, b), r.mul(a, c)));
                    prop_assert_eq!(r.mul(r.add(a, b), c), r.add(r.mul(a, c), r.mul(b, c)));
                }
            }
        }
    }

    #[test]
    fn field_units_and_regulars_are_the_nonzero_elements(spec in field_spec()) {
        let r = ring(&spec);
        let nonzero: Vec<usize> = (1..r.size()).collect();
        prop_assert!(r.is_field());
        prop_assert_eq!(r.units(), &nonzero[..]);
        prop_assert_eq!(r.regular(), &nonzero[..]);
    }

    #[test]
    fn product_center_is_product_of_centers(l in ring_spec(), rr in ring_spec()) {
        let (a, b) = (ring(&l), ring(&rr));
        prop_assume!(a.size() * b.size() <= 256);
        let p = ring(&format!(r#"{{"kind":"Product","left":{l},"right":{rr}}}"#));
        let mut expected = Vec::new();
        for &x in a.center() {
            for &y in b.center() {
                expected.push(x * b.size() + y);
            }
        }
        prop_assert_eq!(p.center(), &expected[..]);
    }
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::X),
        Just(Expr::Y),
        (0u64..7).prop_map(Expr::Int),
        prop_oneof![Just("eps"), Just("lam")].prop_map(|p| Expr::Param(p.to_string())),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (prop_oneof![Just("f"), Just("h"), Just("k")], inner.clone()).prop_map(|(n, e)| Expr::app(n, e)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            inner.prop_map(|a| Expr::Neg(Box::new(a))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_equations_parse_back_identically(lhs in expr(), rhs in expr()) {
        let ast = EquationAst::new(lhs, rhs).unwrap();
        let text = ast.to_string();
        prop_assert_eq!(parse_equation(&text).unwrap(), ast, "{}", text);
    }

    #[test]
    fn multiplication_follows_textual_order_in_ut2(x in 0usize..8, y in 0usize..8) {
        let r = ring(r#"{"kind":"UT2","p":2}"#);
        let naive = common::Naive::UT2(2);
        let b = Binding::default();
        let xy = parse_equation("x*y = y*x").unwrap();
        prop_assert_eq!(eval_side(&xy.lhs, &b, x, y, &r).unwrap(), naive.mul(x, y));
        prop_assert_eq!(eval_side(&xy.rhs, &b, x, y, &r).unwrap(), naive.mul(y, x));
    }
}

#[test]
fn ut2_has_noncommuting_pairs() {
    let r = ring(r#"{"kind":"UT2","p":2}"#);
    let ast = parse_equation("x*y = y*x").unwrap();
    let b = Binding::default();
    let differ = (0..8).any(|x| {
        (0..8)
            .any(|y| eval_side(&ast.lhs, &b, x, y, &r).unwrap() != eval_side(&ast.rhs, &b, x, y, &r).unwrap())
    });
    assert!(differ);
    // e11 = [[1,0],[0,0]] at 4 and e12 = [[0,1],[0,0]] at 2: e11 e12 = e12, e12 e11 = 0
    assert_eq!(eval_side(&ast.lhs, &b, 4, 2, &r).unwrap(), 2);
    assert_eq!(eval_side(&ast.rhs, &b, 4, 2, &r).unwrap(), 0);
}

const EQUATIONS: &[&str] = &[
    EQ_LEIBNIZ,
    EQ_MULTIPLICATIVE,
    EQ_SOFY,
    EQ_ALIEN,
    EQ_PEXIDER,
    "f(x*y)=f(x)*f(y)+eps*x*y",
    "f(x+y)=f(x)+f(y)",
    "f(x*y)+f(x)=lam*f(y)*x",
    "h(x*y)=h(x)*k(y)",
];

fn small_rings() -> Vec<Ring> {
    [r#"{"kind":"GF","p":2,"k":1}"#, r#"{"kind":"GF","p":3,"k":1}"#, r#"{"kind":"Zn","n":4}"#]
        .iter()
        .map(|s| ring(s))
        .collect()
}

fn task_for(eq: &str, r: &Ring, eps: usize, lam: usize) -> SolveTask {
    let ast = parse_equation(eq).unwrap();
    let mut t = SolveTask::new(ast.clone(), r.clone());
    for p in &ast.params {
        t = t.param(p, if p == "eps" || p == "mu" { eps } else { lam });
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn pivoted_and_full_searches_agree(eq in 0..EQUATIONS.len(), ri in 0usize..3, eps in 0usize..4, lam in 0usize..4) {
        let r = &small_rings()[ri];
        let base = task_for(EQUATIONS[eq], r, eps % r.size(), lam % r.size());
        let pruned = solve(&base.clone().pivot(true)).unwrap();
        let full = solve(&base.clone().pivot(false)).unwrap();
        prop_assert_eq!(&pruned.solutions, &full.solutions);
        for b in &pruned.solutions {
            prop_assert!(residual(&base.ast, b, r).unwrap().is_empty());
        }
        let distinct: BTreeSet<_> = pruned.solutions.iter().collect();
        prop_assert_eq!(distinct.len(), pruned.len());
        prop_assert!(pruned.solutions.windows(2).all(|w| w[0] < w[1]) || pruned.len() < 2);
    }

    #[test]
    fn serialized_results_do_not_depend_on_worker_count(eq in 0..EQUATIONS.len(), ri in 0usize..3) {
        let r = &small_rings()[ri];
        let base = task_for(EQUATIONS[eq], r, 1, 1);
        let outs: Vec<String> = [1usize, 2, 8].iter().map(|&w| solve(&base.clone().workers(w)).unwrap().to_json()).collect();
        prop_assert_eq!(&outs[0], &outs[1]);
        prop_assert_eq!(&outs[0], &outs[2]);
    }
}

#[test]
fn pivot_definitions_hold_on_every_solution() {
    for r in small_rings() {
        for eq in EQUATIONS {
            let task = task_for(eq, &r, 1, 2 % r.size());
            let ast = &task.ast;
            let Expr::App(pivot, _) = &ast.lhs else { continue };
            let Ok(PivotResult::Definition(def)) = pivot_reduce(ast, pivot) else {
                continue;
            };
            for b in solve(&task.clone().pivot(false)).unwrap().solutions {
                let b = task.params.iter().fold(b, |b, (k, v)| b.with_param(k, *v));
                for &x in r.domain() {
                    let want = eval_side(&def, &b, x, x, &r).unwrap();
                    assert_eq!(b.functions[pivot].at(&r, x), want, "{eq} on {}", r.label());
                }
            }
        }
    }
}

#[test]
fn multiplicative_maps_are_linearly_independent() {
    for spec in [
        r#"{"kind":"GF","p":2,"k":1}"#,
        r#"{"kind":"GF","p":3,"k":1}"#,
        r#"{"kind":"GF","p":2,"k":2}"#,
        r#"{"kind":"GF","p":5,"k":1}"#,
        r#"{"kind":"GF","p":7,"k":1}"#,
        r#"{"kind":"GF","p":2,"k":3}"#,
    ] {
        let r = ring(spec);
        let nonzero: Vec<FnTable> = enumerate_maps(&r, FunctionClass::Multiplicative, DEFAULT_MAP_BUDGET)
            .unwrap()
            .filter(|t| t.values.iter().any(|&v| v != 0))
            .collect();
        assert_eq!(lin_rank(&nonzero, &r).unwrap(), nonzero.len(), "{spec}");
    }
}

#[test]
fn finite_fields_have_no_logarithms_or_derivations() {
    for (p, k) in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)] {
        let r = ring(&format!(r#"{{"kind":"GF","p":{p},"k":{k}}}"#));
        for class in [FunctionClass::Logarithmic, FunctionClass::Derivation] {
            let all: Vec<FnTable> = enumerate_maps(&r, class, DEFAULT_MAP_BUDGET).unwrap().collect();
            assert_eq!(all, vec![FnTable::zero(&r)], "{class} on GF({p}^{k})");
        }
    }
}

fn sym() -> impl Strategy<Value = SymExpr> {
    prop::collection::vec((-4i64..=4, 0u32..3, 0u32..3, 0u32..2), 0..5).prop_map(|terms| {
        terms.into_iter().fold(SymExpr::zero(), |acc, (c, i, j, k)| {
            let t = &(&SymExpr::int(c) * &SymExpr::param("a").pow(i)) * &SymExpr::param("b").pow(j);
            let t = &t * &SymExpr::indeterminate("x").pow(k);
            &acc + &t
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn polynomial_arithmetic_is_canonical(a in sym(), b in sym(), c in sym()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert!(a.terms().all(|(_, q)| *q != BigRational::from_integer(0.into())));
        let reparsed: SymExpr = a.to_string().parse().unwrap();
        prop_assert_eq!(reparsed, a);
    }
}

fn all_parameters(family: &SolutionFamily, ast: &EquationAst) -> BTreeSet<String> {
    let mut names = family.parameters();
    names.extend(ast.params.iter().cloned());
    names
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let n: i64 = rng.gen_range(-30..=30);
    let d: i64 = rng.gen_range(1..=7);
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn empty_constraints_iff_identity_holds_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for pre in presets() {
        let ast = pre.ast();
        let constraints = derive_constraints(&pre.family, &ast).unwrap();
        let names = all_parameters(&pre.family, &ast);
        let outcomes: Vec<bool> = (0..50)
            .map(|_| {
                let values: BTreeMap<String, BigRational> =
                    names.iter().map(|n| (n.clone(), random_rational(&mut rng))).collect();
                check_identity(&pre.family, &ast, &values).unwrap()
            })
            .collect();
        if constraints.is_empty() {
            assert!(outcomes.iter().all(|&ok| ok), "{}", pre.name);
        } else {
            assert!(outcomes.iter().any(|&ok| !ok), "{}", pre.name);
        }
    }
}

/// Every assignment of concrete generator tables the family mentions.
fn generator_choices(family: &SolutionFamily, r: &Ring) -> Vec<BTreeMap<String, FnTable>> {
    let mut gens: BTreeMap<String, FunctionClass> = BTreeMap::new();
    for terms in family.functions.values() {
        for t in terms {
            for a in &t.atoms {
                match a {
                    Atom::Id => {}
                    Atom::Mult(g) => {
                        gens.insert(g.clone(), FunctionClass::Multiplicative);
                    }
                    Atom::Log(g) => {
                        gens.insert(g.clone(), FunctionClass::Logarithmic);
                    }
                    Atom::Leib(g) => {
                        gens.insert(g.clone(), FunctionClass::Leibniz);
                    }
                }
            }
        }
    }
    let mut out = vec![BTreeMap::new()];
    for (name, class) in gens {
        let tables: Vec<FnTable> = enumerate_maps(r, class, DEFAULT_MAP_BUDGET).unwrap().collect();
        out = out
            .into_iter()
            .flat_map(|m| {
                let name = &name;
                tables.iter().map(move |t| {
                    let mut m = m.clone();
                    m.insert(name.clone(), t.clone());
                    m
                })
            })
            .collect();
    }
    out
}

fn has_log(family: &SolutionFamily) -> bool {
    family.functions.values().flatten().any(|t| t.atoms.iter().any(|a| matches!(a, Atom::Log(_))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbolic_verdicts_agree_with_concrete_tables(
        pi in 0usize..10,
        p in prop_oneof![Just(3usize), Just(5)],
        seed in any::<u64>(),
    ) {
        let pres = presets();
        let pre = &pres[pi % pres.len()];
        let r = ring(&format!(r#"{{"kind":"GF","p":{p},"k":1}}"#));
        let ast = pre.ast();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: BTreeMap<String, BigRational> = all_parameters(&pre.family, &ast)
            .into_iter()
            .map(|n| (n, BigRational::from_integer(rng.gen_range(0..p as i64).into())))
            .collect();
        let holds = check_identity(&pre.family, &ast, &values).unwrap();
        let concrete = |gens: &BTreeMap<String, FnTable>| -> bool {
            let mut b = instantiate(&pre.family, &r, &values, gens).unwrap();
            for name in &ast.params {
                b = b.with_param(name, rational_in_ring(&values[name], &r).unwrap());
            }
            residual(&ast, &b, &r).unwrap().is_empty()
        };
        let choices = generator_choices(&pre.family, &r);
        if holds {
            for g in &choices {
                prop_assert!(concrete(g), "{} over GF({}) {:?}", pre.name, p, values);
            }
        } else if !has_log(&pre.family) {
            // a constraint that survives reduction mod p must show up concretely
            let survives = derive_constraints(&pre.family, &ast)
                .unwrap()
                .iter()
                .any(|c| {
                    let v = c.evaluate_params(&values).unwrap();
                    let q = v.terms().next().map(|(_, q)| q.clone()).unwrap_or_default();
                    rational_in_ring(&q, &r).unwrap() != r.zero()
                });
            if survives {
                prop_assert!(choices.iter().any(|g| !concrete(g)), "{} over GF({}) {:?}", pre.name, p, values);
            }
        }
    }
}
