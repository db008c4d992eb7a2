mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use strprop::constraints::{SurfaceConstraint, Term, VarId};
use strprop::driver::{model_lines, solve_source, DriverError};
use strprop::interval::{CodePoint, Interval, IntervalSet};
use strprop::regex::{LengthOp, RegexAst};
use strprop::smt::{parse_smt, print_smt, SmtScript};
use strprop::solver::{SolveOptions, VerdictKind};
use strprop::word::Word;

use common::{cp, holds, rng};

/// Symbols that need `|quoting|` and code points that need escapes are
/// over-represented.
const NAMES: [&str; 4] = ["x", "a b", "y.1", "0z"];
const CODE_POINTS: [u32; 8] = [0x61, 0x62, 0x22, 0x5C, 0x00, 0x7F, 0x1F600, 0x10FFFF];

fn random_cp(r: &mut impl Rng) -> CodePoint {
    cp(*CODE_POINTS.choose(r).unwrap())
}

fn random_word(r: &mut impl Rng, max: usize) -> Word {
    Word::from_code_points((0..r.gen_range(0..=max)).map(|_| random_cp(r)).collect())
}

fn random_regex(r: &mut impl Rng, depth: u32) -> RegexAst {
    let leaf = depth == 0 || r.gen_bool(0.3);
    if leaf {
        return match r.gen_range(0..5) {
            0 => RegexAst::Epsilon,
            1 => RegexAst::AnyChar,
            2 => RegexAst::Empty,
            3 => RegexAst::Literal(random_cp(r)),
            _ => {
                let parts = (0..r.gen_range(1..=2)).map(|_| {
                    let a = random_cp(r);
                    let b = random_cp(r);
                    Interval::new(a.min(b), a.max(b))
                });
                RegexAst::Class(IntervalSet::normalize(parts))
            }
        };
    }
    let n = r.gen_range(2..=3);
    match r.gen_range(0..5) {
        0 => RegexAst::Concat((0..n).map(|_| random_regex(r, depth - 1)).collect()),
        1 => RegexAst::Union((0..n).map(|_| random_regex(r, depth - 1)).collect()),
        2 => RegexAst::Star(Box::new(random_regex(r, depth - 1))),
        3 => RegexAst::Plus(Box::new(random_regex(r, depth - 1))),
        _ => RegexAst::Opt(Box::new(random_regex(r, depth - 1))),
    }
}

fn random_constraint(r: &mut impl Rng, depth: u32) -> SurfaceConstraint {
    let x = VarId::new(*NAMES.choose(r).unwrap());
    match r.gen_range(0..if depth == 0 { 4 } else { 5 }) {
        0 => SurfaceConstraint::Membership(x, random_regex(r, 3)),
        1 => {
            let terms = (0..r.gen_range(1..=3))
                .map(|_| {
                    if r.gen_bool(0.5) {
                        Term::Var(VarId::new(*NAMES.choose(r).unwrap()))
                    } else {
                        Term::Lit(random_word(r, 3))
                    }
                })
                .collect();
            SurfaceConstraint::Equation(x, terms)
        }
        2 => {
            let op = *[LengthOp::Lt, LengthOp::Le, LengthOp::Eq, LengthOp::Ge, LengthOp::Gt]
                .choose(r)
                .unwrap();
            SurfaceConstraint::Length(x, op, r.gen_range(0..=4))
        }
        3 => SurfaceConstraint::LiteralEquality(random_word(r, 2), random_word(r, 2)),
        _ => SurfaceConstraint::Or(
            (0..r.gen_range(2..=3))
                .map(|_| {
                    (0..r.gen_range(1..=2))
                        .map(|_| random_constraint(r, depth - 1))
                        .collect()
                })
                .collect(),
        ),
    }
}

fn random_script(r: &mut impl Rng) -> SmtScript {
    SmtScript {
        declarations: NAMES.iter().map(|n| VarId::new(*n)).collect(),
        assertions: (0..r.gen_range(0..=4)).map(|_| random_constraint(r, 1)).collect(),
        has_check_sat: r.gen_bool(0.8),
    }
}

fn script_holds(s: &SmtScript, m: &BTreeMap<&str, Word>) -> bool {
    s.assertions.iter().all(|c| holds(c, m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_then_parsing_is_a_fixpoint(seed in any::<u64>()) {
        let s = random_script(&mut rng(seed));
        let printed = print_smt(&s);
        let once = parse_smt(&printed).map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
        prop_assert_eq!(&once.declarations, &s.declarations);
        prop_assert_eq!(once.has_check_sat, s.has_check_sat);
        let reprinted = print_smt(&once);
        prop_assert_eq!(&parse_smt(&reprinted).unwrap(), &once);
        prop_assert_eq!(print_smt(&parse_smt(&reprinted).unwrap()), reprinted);
    }

    #[test]
    fn parsed_script_has_the_same_models(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_script(&mut r);
        let parsed = parse_smt(&print_smt(&s)).unwrap();
        for _ in 0..64 {
            let m: BTreeMap<&str, Word> = NAMES.iter().map(|n| (*n, random_word(&mut r, 3))).collect();
            prop_assert_eq!(script_holds(&s, &m), script_holds(&parsed, &m));
        }
    }
}

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/mini_corpus")
}

fn corpus_files(group: &str) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(corpus().join(group))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "smt2"))
        .collect();
    files.sort();
    assert!(!files.is_empty(), "no files in {group}");
    files
}

#[test]
fn corpus_files_round_trip() {
    for group in ["sat", "unsat", "unknown", "timeout"] {
        for f in corpus_files(group) {
            let s = parse_smt(&fs::read_to_string(&f).unwrap()).unwrap();
            assert_eq!(parse_smt(&print_smt(&s)).unwrap(), s, "{}", f.display());
        }
    }
}

#[test]
fn corpus_verdict_labels_match_their_directory() {
    for group in ["sat", "unsat", "unknown"] {
        for f in corpus_files(group) {
            let src = fs::read_to_string(&f).unwrap();
            let (script, solved) = solve_source(&src, &SolveOptions::default()).unwrap();
            assert_eq!(solved.kind.label(), group, "{}", f.display());
            if let VerdictKind::Sat(m) = &solved.kind {
                let lines = model_lines(&script, m);
                assert_eq!(lines.lines().count(), script.declarations.len());
                assert!(lines
                    .lines()
                    .all(|l| l.starts_with("(define-fun ") && l.ends_with("\")")));
            }
        }
    }
    for f in corpus_files("timeout") {
        let src = fs::read_to_string(&f).unwrap();
        match solve_source(&src, &SolveOptions::default()) {
            Err(e @ DriverError::Solve(_)) => assert_eq!(e.exit_code(), 2),
            other => panic!("{}: {:?}", f.display(), other.map(|(_, s)| s.kind)),
        }
    }
}

#[test]
fn verdict_and_model_lines_are_exact() {
    let src = "(declare-fun x () String)(declare-fun |a b| () String)(declare-fun unused () String)\
               (assert (= x (str.++ \"q\" |a b|)))(assert (str.in_re |a b| (str.to_re \"\"\"\\u{1F600}\")))(check-sat)";
    let (script, solved) = solve_source(src, &SolveOptions::default()).unwrap();
    assert_eq!(solved.kind.label(), "sat");
    let VerdictKind::Sat(m) = &solved.kind else {
        unreachable!()
    };
    assert_eq!(
        model_lines(&script, m),
        "(define-fun x () String \"q\"\"\\u{1f600}\")\n\
         (define-fun |a b| () String \"\"\"\\u{1f600}\")\n\
         (define-fun unused () String \"\")\n"
    );

    let (_, solved) = solve_source(
        "(declare-fun x () String)(assert (str.in_re x (re.+ (str.to_re \"a\"))))(assert (= (str.len x) 0))",
        &SolveOptions::default(),
    )
    .unwrap();
    assert_eq!(solved.kind.label(), "unsat");
}

#[test]
fn unsupported_input_is_reported_as_such() {
    for src in [
        "(declare-fun n () Int)",
        "(declare-fun x () String)(assert (str.contains x \"a\"))",
        "(declare-fun x () String)(assert (not (= x \"a\")))",
    ] {
        match solve_source(src, &SolveOptions::default()) {
            Err(DriverError::Parse(e)) => assert!(e.is_unsupported(), "{src}: {e}"),
            other => panic!("{src}: {:?}", other.map(|(_, s)| s.kind)),
        }
    }
    match solve_source("(assert (= x", &SolveOptions::default()) {
        Err(e @ DriverError::Parse(_)) => assert_eq!(e.exit_code(), 1),
        other => panic!("{:?}", other.map(|(_, s)| s.kind)),
    }
}
