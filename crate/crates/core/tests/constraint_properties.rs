mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use strprop::constraints::{
    check_tree, desugar, layering, tree_property, DesugarOptions, Problem, SurfaceConstraint, Term, VarId,
};
use strprop::oracle::{oracle_sat, path_accepts, Bound, OracleVerdict};
use strprop::regex::{parse_regex, sigma_star, LengthOp};
use strprop::solver::{dump_refined, forward_prop, solve, SolveOptions, VerdictKind};
use strprop::word::Word;

use common::{alphabet, holds, random_acyclic_problem, rng, var};

const SURFACE_VARS: [&str; 3] = ["x", "y", "z"];
const REGEXES: [&str; 6] = ["a*", "(ab)+", "b|ab", "[ab]b?", "a?b*a", "()"];
const LITERALS: [&str; 4] = ["", "a", "b", "ab"];

fn random_term(r: &mut impl Rng) -> Term {
    if r.gen_bool(0.6) {
        Term::Var(VarId::new(*SURFACE_VARS.choose(r).unwrap()))
    } else {
        Term::Lit(Word::from(*LITERALS.choose(r).unwrap()))
    }
}

fn random_surface(r: &mut impl Rng, depth: u32) -> SurfaceConstraint {
    let x = VarId::new(*SURFACE_VARS.choose(r).unwrap());
    match r.gen_range(0..if depth == 0 { 9 } else { 10 }) {
        0..=2 => SurfaceConstraint::Membership(x, parse_regex(REGEXES.choose(r).unwrap()).unwrap()),
        3..=5 => {
            let n = r.gen_range(1..=3);
            SurfaceConstraint::Equation(x, (0..n).map(|_| random_term(r)).collect())
        }
        6..=7 => {
            let op = *[LengthOp::Lt, LengthOp::Le, LengthOp::Eq, LengthOp::Ge, LengthOp::Gt]
                .choose(r)
                .unwrap();
            SurfaceConstraint::Length(x, op, r.gen_range(0..=3))
        }
        8 => SurfaceConstraint::LiteralEquality(
            Word::from(*LITERALS.choose(r).unwrap()),
            Word::from(*LITERALS.choose(r).unwrap()),
        ),
        _ => SurfaceConstraint::Or(
            (0..2)
                .map(|_| (0..r.gen_range(1..=2)).map(|_| random_surface(r, depth - 1)).collect())
                .collect(),
        ),
    }
}

/// Direct bounded search over the surface variables.
fn surface_sat(cs: &[SurfaceConstraint], bound: &Bound) -> bool {
    let words = bound.words().unwrap();
    let mut m = BTreeMap::new();
    for x in &words {
        m.insert("x", x.clone());
        for y in &words {
            m.insert("y", y.clone());
            for z in &words {
                m.insert("z", z.clone());
                if cs.iter().all(|c| holds(c, &m)) {
                    return true;
                }
            }
        }
    }
    false
}

/// Any problem over `v0..v{n-1}` with arbitrary equations.
fn random_problem(r: &mut impl Rng) -> Problem {
    let n = r.gen_range(1..=5);
    let mut p = Problem::new();
    for i in 0..n {
        p.add_var(var(i), sigma_star());
    }
    for _ in 0..r.gen_range(0..=4) {
        p.add_equation(var(r.gen_range(0..n)), var(r.gen_range(0..n)), var(r.gen_range(0..n)));
    }
    p
}

/// Cycle detection by colored depth-first search.
fn has_cycle(p: &Problem) -> bool {
    fn visit<'a>(p: &'a Problem, v: &'a VarId, color: &mut BTreeMap<&'a VarId, u8>) -> bool {
        match color.get(v) {
            Some(1) => return true,
            Some(2) => return false,
            _ => {}
        }
        color.insert(v, 1);
        for (a, b) in p.equations_of(v) {
            if visit(p, a, color) || visit(p, b, color) {
                return true;
            }
        }
        color.insert(v, 2);
        false
    }
    let mut color = BTreeMap::new();
    p.vars().iter().any(|v| visit(p, v, &mut color))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn desugar_preserves_bounded_satisfiability(seed in any::<u64>()) {
        let mut r = rng(seed);
        let cs: Vec<SurfaceConstraint> = (0..r.gen_range(1..=4)).map(|_| random_surface(&mut r, 1)).collect();
        let bound = Bound::new(3, &alphabet(97, 98)).unwrap();
        let problems = desugar(&cs, &DesugarOptions::default()).unwrap();
        let mut lowered = false;
        for p in &problems {
            match oracle_sat(p, &bound).unwrap() {
                OracleVerdict::Sat(m) => {
                    prop_assert!(strprop::constraints::sat_str(p, &m).unwrap());
                    lowered = true;
                    break;
                }
                OracleVerdict::UnsatWithin => {}
            }
        }
        prop_assert_eq!(surface_sat(&cs, &bound), lowered, "{:?}", cs);
    }

    #[test]
    fn layering_succeeds_iff_acyclic(seed in any::<u64>()) {
        let p = random_problem(&mut rng(seed));
        match layering(&p) {
            Ok(layers) => {
                prop_assert!(!has_cycle(&p));
                let flat: BTreeSet<&VarId> = layers.iter().flatten().collect();
                prop_assert_eq!(flat.len(), p.vars().len());
                let depth: BTreeMap<&VarId, usize> =
                    layers.iter().enumerate().flat_map(|(i, l)| l.iter().map(move |v| (v, i))).collect();
                for (v, a, b) in p.equations() {
                    prop_assert!(depth[v] < depth[a] && depth[v] < depth[b]);
                }
            }
            Err(e) => {
                prop_assert!(has_cycle(&p));
                prop_assert!(!e.residual.is_empty());
            }
        }
    }

    #[test]
    fn check_tree_implies_tree_predicate(seed in any::<u64>()) {
        let p = random_problem(&mut rng(seed));
        if check_tree(&p) {
            prop_assert!(tree_property(&p));
        }
    }

    #[test]
    fn unsat_is_sound(seed in any::<u64>()) {
        let p = random_acyclic_problem(&mut rng(seed), 4, false);
        let v = solve(&p, &SolveOptions::default()).unwrap();
        if let VerdictKind::Unsat(w) = &v.kind {
            prop_assert!(v.refined[w].is_empty());
            let bound = Bound::new(5, &alphabet(97, 99)).unwrap();
            let oracle = oracle_sat(&p, &bound);
            prop_assume!(oracle.is_ok());
            prop_assert_eq!(oracle.unwrap(), OracleVerdict::UnsatWithin);
        }
    }

    #[test]
    fn tree_verdicts_match_oracle(seed in any::<u64>()) {
        let p = random_acyclic_problem(&mut rng(seed), 5, true);
        let v = solve(&p, &SolveOptions::default()).unwrap();
        let bound = Bound::new(6, &alphabet(97, 99)).unwrap();
        let oracle = oracle_sat(&p, &bound).unwrap();
        match &v.kind {
            VerdictKind::Sat(m) => {
                prop_assert!(strprop::constraints::sat_str(&p, m).unwrap());
                prop_assert!(oracle.is_sat());
            }
            VerdictKind::Unsat(_) => prop_assert!(!oracle.is_sat()),
            k => prop_assert!(false, "tree-shaped problem gave {:?}", k),
        }
    }

    #[test]
    fn forward_prop_contract(seed in any::<u64>()) {
        let p = random_acyclic_problem(&mut rng(seed), 4, false);
        let prop = forward_prop(&p, &SolveOptions::default()).unwrap();
        prop_assert!(prop.iterations() <= p.vars().len());
        let bound = Bound::new(4, &alphabet(97, 99)).unwrap();
        for v in p.vars() {
            prop_assert!(prop.reg[v].check_invariants().is_ok());
            for w in bound.words().unwrap() {
                let refined = path_accepts(&prop.reg[v], &w);
                let contract = path_accepts(p.reg(v), &w)
                    && p.equations_of(v).all(|(a, b)| {
                        (0..=w.len()).any(|k| path_accepts(&prop.reg[a], &w[..k]) && path_accepts(&prop.reg[b], &w[k..]))
                    });
                prop_assert_eq!(refined, contract, "variable {} word {}", v, w);
            }
        }
    }

    #[test]
    fn optimized_propagation_preserves_languages(seed in any::<u64>()) {
        let p = random_acyclic_problem(&mut rng(seed), 4, false);
        let plain = forward_prop(&p, &SolveOptions::default()).unwrap();
        let opts = SolveOptions { optimize: true, ..SolveOptions::default() };
        let fast = forward_prop(&p, &opts).unwrap();
        let bound = Bound::new(4, &alphabet(97, 99)).unwrap();
        for v in p.vars() {
            for w in bound.words().unwrap() {
                prop_assert_eq!(plain.reg[v].accepts(&w), fast.reg[v].accepts(&w));
            }
        }
        prop_assert_eq!(dump_refined(&fast.reg), dump_refined(&forward_prop(&p, &opts).unwrap().reg));
    }
}
