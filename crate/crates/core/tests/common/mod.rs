//! Seeded generators shared by the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use strprop::constraints::{Problem, SurfaceConstraint, Term, VarId};
use strprop::interval::{CodePoint, Interval, IntervalSet};
use strprop::regex::matches_reference;
use strprop::snfa::{SNfa, StateId, Transition};
use strprop::word::Word;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn alphabet(lo: u32, hi: u32) -> IntervalSet {
    IntervalSet::from_interval(Interval::from_u32(lo, hi).unwrap())
}

pub fn cp(v: u32) -> CodePoint {
    CodePoint::new(v).unwrap()
}

/// A random reachable automaton with 1..=`max_states` states whose labels are
/// sub-intervals of `[lo, hi]`.
pub fn random_snfa(rng: &mut impl Rng, max_states: u32, lo: u32, hi: u32) -> SNfa {
    let n = rng.gen_range(1..=max_states);
    let states: Vec<StateId> = (0..n).map(|i| StateId::new(i, 0)).collect();
    let density = rng.gen_range(0.15..0.6);
    let mut transitions = Vec::new();
    for &src in &states {
        for &dst in &states {
            if rng.gen_bool(density) {
                let a = rng.gen_range(lo..=hi);
                let b = rng.gen_range(a..=hi);
                transitions.push(Transition {
                    src,
                    label: Interval::new(cp(a), cp(b)),
                    dst,
                });
            }
        }
    }
    let mut initial: Vec<StateId> = states.iter().copied().filter(|_| rng.gen_bool(0.3)).collect();
    if initial.is_empty() {
        initial.push(states[0]);
    }
    let mut accepting: Vec<StateId> = states.iter().copied().filter(|_| rng.gen_bool(0.4)).collect();
    if accepting.is_empty() {
        accepting.push(*states.choose(rng).unwrap());
    }
    SNfa::new(states, transitions, initial, accepting)
        .expect("generated automaton is well-formed")
        .remove_unreachable()
}

pub fn var(i: usize) -> VarId {
    VarId::new(format!("v{i}"))
}

/// A random acyclic problem over `v0..v{n-1}`: equations only point from a
/// variable to variables with a larger index. With `tree`, every variable
/// occurs at most once on a right-hand side.
pub fn random_acyclic_problem(rng: &mut impl Rng, max_vars: usize, tree: bool) -> Problem {
    let n = rng.gen_range(1..=max_vars);
    let mut p = Problem::new();
    for i in 0..n {
        let a = if rng.gen_bool(0.25) {
            strprop::regex::sigma_star()
        } else {
            random_snfa(rng, 4, 97, 99)
        };
        p.add_var(var(i), a);
    }
    let mut used = BTreeSet::new();
    for i in 0..n {
        let eqs = match rng.gen_range(0..10) {
            0..=3 => 0,
            4..=8 => 1,
            _ => 2,
        };
        for _ in 0..eqs {
            let mut later: Vec<usize> = (i + 1..n).filter(|j| !tree || !used.contains(j)).collect();
            if tree {
                if later.len() < 2 {
                    break;
                }
                later.shuffle(rng);
                let (a, b) = (later[0], later[1]);
                used.insert(a);
                used.insert(b);
                p.add_equation(var(i), var(a), var(b));
            } else {
                if later.is_empty() {
                    break;
                }
                let a = *later.choose(rng).unwrap();
                let b = *later.choose(rng).unwrap();
                p.add_equation(var(i), var(a), var(b));
            }
        }
    }
    p
}

/// Evaluates a surface constraint directly under `m`, which must bind every
/// variable it mentions.
pub fn holds(c: &SurfaceConstraint, m: &BTreeMap<&str, Word>) -> bool {
    match c {
        SurfaceConstraint::Membership(x, ast) => matches_reference(ast, &m[x.name()]),
        SurfaceConstraint::Equation(x, terms) => {
            let rhs = terms.iter().fold(Word::empty(), |acc, t| match t {
                Term::Var(v) => acc.concat(&m[v.name()]),
                Term::Lit(w) => acc.concat(w),
            });
            m[x.name()] == rhs
        }
        SurfaceConstraint::Length(x, op, n) => op.holds(m[x.name()].len() as u64, *n),
        SurfaceConstraint::Or(branches) => branches.iter().any(|b| b.iter().all(|c| holds(c, m))),
        SurfaceConstraint::LiteralEquality(a, b) => a == b,
    }
}
