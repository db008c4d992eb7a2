//! Forward propagation, verdict classification and model extraction.
//!
//! Propagation visits the dependency layers innermost first. Each variable's
//! automaton is intersected with the concatenation of its operands' already
//! refined automata, once per equation. Afterwards an empty refined language
//! proves unsatisfiability; when all are non-empty and every variable occurs
//! at most once on a right-hand side, a model can be read back top-down.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::Instant;

use thiserror::Error;

use crate::constraints::{check_tree, layering, ready_set, sat_str, Assignment, CyclicError, Problem, VarId};
use crate::regex::sigma_star;
use crate::snfa::{LimitError, Limits, SNfa};

/// Transition budget applied to every constructed automaton.
pub const DEFAULT_MAX_TRANSITIONS: usize = 5_000_000;

/// The refined constraint map.
pub type RefinedReg = BTreeMap<VarId, SNfa>;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub limits: Limits,
    /// Enables the `Σ*` absorption rewrites for product and concatenation.
    pub optimize: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            limits: Limits::unbounded().with_max_transitions(DEFAULT_MAX_TRANSITIONS),
            optimize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropError {
    #[error(transparent)]
    Cyclic(#[from] CyclicError),
    #[error(transparent)]
    Resource(#[from] LimitError),
}

/// Output of a completed propagation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Propagation {
    pub reg: RefinedReg,
    /// Ready sets in the order they were refined.
    pub rounds: Vec<BTreeSet<VarId>>,
}

impl Propagation {
    pub fn iterations(&self) -> usize {
        self.rounds.len()
    }

    /// First variable with an empty refined language, in refinement order.
    pub fn first_empty(&self) -> Option<&VarId> {
        self.rounds.iter().flatten().find(|v| self.reg[*v].is_empty())
    }
}

fn product(a: &SNfa, b: &SNfa, opts: &SolveOptions) -> Result<SNfa, LimitError> {
    if opts.optimize {
        if a.is_sigma_star() {
            return Ok(b.clone());
        }
        if b.is_sigma_star() {
            return Ok(a.clone());
        }
    }
    SNfa::product_bounded(a, b, &opts.limits)
}

fn concat(a: &SNfa, b: &SNfa, opts: &SolveOptions) -> Result<SNfa, LimitError> {
    if opts.optimize && a.is_sigma_star() && b.is_sigma_star() {
        return Ok(sigma_star());
    }
    SNfa::concat_bounded(a, b, &opts.limits)
}

/// Refines every variable of `c` against its equations.
///
/// Once a variable's automaton is empty its remaining equations are skipped,
/// since the language can shrink no further.
pub fn var_lang(c: &BTreeSet<VarId>, p: &Problem, reg: &mut RefinedReg, opts: &SolveOptions) -> Result<(), LimitError> {
    for v in c {
        let mut a = reg[v].clone();
        for (v1, v2) in p.equations_of(v) {
            if a.is_empty() {
                break;
            }
            opts.limits.check_time()?;
            let cat = concat(&reg[v1], &reg[v2], opts)?;
            a = product(&a, &cat, opts)?;
        }
        reg.insert(v.clone(), a);
    }
    Ok(())
}

/// Refines all constraints of an acyclic problem.
pub fn forward_prop(p: &Problem, opts: &SolveOptions) -> Result<Propagation, PropError> {
    let mut reg: RefinedReg = p.reg_map().clone();
    let mut pending = p.vars().clone();
    let mut done = BTreeSet::new();
    let mut rounds = Vec::new();
    while !pending.is_empty() {
        let ready = ready_set(&pending, p, &done);
        if ready.is_empty() {
            return Err(CyclicError { residual: pending }.into());
        }
        var_lang(&ready, p, &mut reg, opts)?;
        for v in &ready {
            pending.remove(v);
            done.insert(v.clone());
        }
        rounds.push(ready);
    }
    Ok(Propagation { reg, rounds })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnknownReason {
    NotTree,
    Cyclic,
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnknownReason::NotTree => "not-tree",
            UnknownReason::Cyclic => "cyclic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerdictKind {
    Sat(Assignment),
    Unsat(VarId),
    Unknown(UnknownReason),
}

impl VerdictKind {
    /// The bit-exact verdict line.
    pub fn label(&self) -> &'static str {
        match self {
            VerdictKind::Sat(_) => "sat",
            VerdictKind::Unsat(_) => "unsat",
            VerdictKind::Unknown(_) => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stats {
    /// `(states, transitions)` of each refined automaton.
    pub sizes: BTreeMap<VarId, (usize, usize)>,
    pub iterations: usize,
    pub millis: u128,
}

impl Stats {
    pub fn max_states(&self) -> usize {
        self.sizes.values().map(|s| s.0).max().unwrap_or(0)
    }

    pub fn max_transitions(&self) -> usize {
        self.sizes.values().map(|s| s.1).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub stats: Stats,
    /// Refined constraints; empty when propagation stopped on a cycle.
    pub refined: RefinedReg,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractionError {
    #[error("refined language of {0} is empty")]
    EmptyLanguage(VarId),
    #[error("no split of the word for {head} into {left} and {right}")]
    NoSplit { head: VarId, left: VarId, right: VarId },
    #[error("{0} occurs on more than one right-hand side")]
    SharedOperand(VarId),
    #[error("extracted assignment violates the constraints")]
    Invalid,
    #[error(transparent)]
    Cyclic(#[from] CyclicError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("resource limit: {0}")]
    Resource(#[from] LimitError),
    #[error("model extraction failed: {0}")]
    Extraction(#[from] ExtractionError),
}

/// Maps a propagation outcome to a verdict.
pub fn classify(p: &Problem, result: &Result<Propagation, CyclicError>) -> Result<VerdictKind, ExtractionError> {
    let prop = match result {
        Err(_) => return Ok(VerdictKind::Unknown(UnknownReason::Cyclic)),
        Ok(prop) => prop,
    };
    if let Some(v) = prop.first_empty() {
        return Ok(VerdictKind::Unsat(v.clone()));
    }
    if check_tree(p) {
        Ok(VerdictKind::Sat(extract_model(p, &prop.reg)?))
    } else {
        Ok(VerdictKind::Unknown(UnknownReason::NotTree))
    }
}

/// Builds a model top-down from the refined constraints.
///
/// Requires an acyclic tree-shaped problem whose refined languages are all
/// non-empty; the result is checked with `sat_str` before it is returned.
pub fn extract_model(p: &Problem, reg: &RefinedReg) -> Result<Assignment, ExtractionError> {
    let mut m = Assignment::new();
    for layer in layering(p)? {
        for v in &layer {
            if m.get(v).is_none() {
                let w = reg[v]
                    .some_word()
                    .ok_or_else(|| ExtractionError::EmptyLanguage(v.clone()))?;
                m.insert(v.clone(), w);
            }
            let w = m.get(v).expect("assigned above").clone();
            for (a, b) in p.equations_of(v) {
                let (wa, wb) =
                    SNfa::split_word(&reg[a], &reg[b], None, &w).ok_or_else(|| ExtractionError::NoSplit {
                        head: v.clone(),
                        left: a.clone(),
                        right: b.clone(),
                    })?;
                for (x, wx) in [(a, wa), (b, wb)] {
                    if m.insert(x.clone(), wx).is_some() {
                        return Err(ExtractionError::SharedOperand(x.clone()));
                    }
                }
            }
        }
    }
    match sat_str(p, &m) {
        Ok(true) => Ok(m),
        _ => Err(ExtractionError::Invalid),
    }
}

/// Propagates, classifies and collects statistics.
pub fn solve(p: &Problem, opts: &SolveOptions) -> Result<Verdict, SolveError> {
    let start = Instant::now();
    let outcome = match forward_prop(p, opts) {
        Ok(prop) => Ok(prop),
        Err(PropError::Cyclic(e)) => Err(e),
        Err(PropError::Resource(e)) => return Err(e.into()),
    };
    let kind = classify(p, &outcome)?;
    let mut stats = Stats::default();
    match &outcome {
        Ok(prop) => {
            stats.iterations = prop.iterations();
            stats.sizes = prop
                .reg
                .iter()
                .map(|(v, a)| (v.clone(), (a.state_count(), a.transition_count())))
                .collect();
        }
        Err(_) => {
            stats.sizes = p
                .reg_map()
                .iter()
                .map(|(v, a)| (v.clone(), (a.state_count(), a.transition_count())))
                .collect();
        }
    }
    stats.millis = start.elapsed().as_millis();
    let refined = outcome.map(|prop| prop.reg).unwrap_or_default();
    Ok(Verdict { kind, stats, refined })
}

/// Stable textual form of a refined map: a header line per variable
/// followed by the automaton dump.
pub fn dump_refined(reg: &RefinedReg) -> String {
    let mut out = String::new();
    for (v, a) in reg {
        out.push_str(&format!("== {v}\n"));
        out.push_str(&a.dump());
    }
    out
}
