//! Constraint IR and desugaring.
//!
//! A [`Problem`] is the triple `(S, Concat, Reg)`: a variable set, a map from
//! variables to the binary equations `v = v1 + v2` they head, and one
//! automaton per variable. [`desugar`] lowers surface constraints (n-ary
//! equations with literals, length bounds, repeated memberships,
//! disjunction) into that fragment.
//!
//! # Dump format
//!
//! [`Problem::dump`] writes one line per variable in name order:
//!
//! ```text
//! <var> : states <n> transitions <m> initial <i> accepting <f> ; deps: (<a>,<b>),(<c>,<d>)
//! ```
//!
//! A variable heading no equation prints `deps: -`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::regex::{self, compile, length_automaton, word_automaton, LengthBoundTooLarge, LengthOp, RegexAst};
use crate::snfa::SNfa;
use crate::word::Word;

/// Prefix reserved for variables introduced by desugaring.
pub const FRESH_PREFIX: &str = "_t";

/// Default cap on the number of problems a disjunction may expand into.
pub const DEFAULT_DISJUNCT_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(String);

impl VarId {
    pub fn new(name: impl Into<String>) -> VarId {
        VarId(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_fresh(&self) -> bool {
        self.0.starts_with(FRESH_PREFIX)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VarId {
    fn from(s: &str) -> VarId {
        VarId::new(s)
    }
}

/// Violations of the well-formedness predicate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WfError {
    #[error("equation head {0} is not a declared variable")]
    UnknownHead(VarId),
    #[error("equation operand {0} is not a declared variable")]
    UnknownOperand(VarId),
    #[error("regular constraint given for undeclared variable {0}")]
    UnknownRegVar(VarId),
    #[error("variable {0} has no regular constraint")]
    MissingReg(VarId),
}

/// The intermediate representation `(S, Concat, Reg)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Problem {
    vars: BTreeSet<VarId>,
    concat: BTreeMap<VarId, BTreeSet<(VarId, VarId)>>,
    reg: BTreeMap<VarId, SNfa>,
}

impl Problem {
    pub fn new() -> Problem {
        Problem::default()
    }

    /// Builds a problem from raw parts, enforcing well-formedness.
    pub fn from_parts(
        vars: BTreeSet<VarId>,
        concat: BTreeMap<VarId, BTreeSet<(VarId, VarId)>>,
        reg: BTreeMap<VarId, SNfa>,
    ) -> Result<Problem, WfError> {
        for (v, pairs) in &concat {
            if !vars.contains(v) {
                return Err(WfError::UnknownHead(v.clone()));
            }
            for (a, b) in pairs {
                for x in [a, b] {
                    if !vars.contains(x) {
                        return Err(WfError::UnknownOperand(x.clone()));
                    }
                }
            }
        }
        if let Some(v) = reg.keys().find(|v| !vars.contains(*v)) {
            return Err(WfError::UnknownRegVar(v.clone()));
        }
        if let Some(v) = vars.iter().find(|v| !reg.contains_key(*v)) {
            return Err(WfError::MissingReg(v.clone()));
        }
        let concat = concat.into_iter().filter(|(_, pairs)| !pairs.is_empty()).collect();
        Ok(Problem { vars, concat, reg })
    }

    /// Declares `v` with constraint `nfa`, replacing any previous one.
    pub fn add_var(&mut self, v: VarId, nfa: SNfa) -> &mut Problem {
        self.vars.insert(v.clone());
        self.reg.insert(v, nfa);
        self
    }

    /// Declares `v` constrained to `Σ*` unless it already exists.
    pub fn ensure_var(&mut self, v: VarId) -> &mut Problem {
        if !self.vars.contains(&v) {
            self.add_var(v, regex::sigma_star());
        }
        self
    }

    /// Adds `v = v1 + v2`, declaring missing variables with `Σ*`.
    pub fn add_equation(&mut self, v: VarId, v1: VarId, v2: VarId) -> &mut Problem {
        self.ensure_var(v.clone());
        self.ensure_var(v1.clone());
        self.ensure_var(v2.clone());
        self.concat.entry(v).or_default().insert((v1, v2));
        self
    }

    pub fn vars(&self) -> &BTreeSet<VarId> {
        &self.vars
    }

    pub fn reg(&self, v: &VarId) -> &SNfa {
        &self.reg[v]
    }

    pub fn reg_map(&self) -> &BTreeMap<VarId, SNfa> {
        &self.reg
    }

    pub fn concat_map(&self) -> &BTreeMap<VarId, BTreeSet<(VarId, VarId)>> {
        &self.concat
    }

    /// The pairs `(v1, v2)` with `v = v1 + v2`, in sorted order.
    pub fn equations_of<'a>(&'a self, v: &VarId) -> impl Iterator<Item = &'a (VarId, VarId)> + 'a {
        self.concat.get(v).into_iter().flatten()
    }

    /// Every equation as `(v, v1, v2)`.
    pub fn equations(&self) -> impl Iterator<Item = (&VarId, &VarId, &VarId)> + '_ {
        self.concat
            .iter()
            .flat_map(|(v, pairs)| pairs.iter().map(move |(a, b)| (v, a, b)))
    }

    pub fn equation_count(&self) -> usize {
        self.concat.values().map(|p| p.len()).sum()
    }

    /// Variables `v` depends on through its equations.
    pub fn dependencies(&self, v: &VarId) -> BTreeSet<&VarId> {
        self.equations_of(v).flat_map(|(a, b)| [a, b]).collect()
    }

    /// Stable textual dump; see the module docs for the format.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for v in &self.vars {
            let a = &self.reg[v];
            write!(
                out,
                "{v} : states {} transitions {} initial {} accepting {} ; deps: ",
                a.state_count(),
                a.transition_count(),
                a.initial_count(),
                a.accepting_count()
            )
            .unwrap();
            let deps: Vec<String> = self.equations_of(v).map(|(x, y)| format!("({x},{y})")).collect();
            if deps.is_empty() {
                out.push('-');
            } else {
                out.push_str(&deps.join(","));
            }
            out.push('\n');
        }
        out
    }
}

/// A map from variables to words.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment(BTreeMap<VarId, Word>);

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn insert(&mut self, v: VarId, w: Word) -> Option<Word> {
        self.0.insert(v, w)
    }

    pub fn get(&self, v: &VarId) -> Option<&Word> {
        self.0.get(v)
    }

    pub fn remove(&mut self, v: &VarId) -> Option<Word> {
        self.0.remove(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarId, &Word)> {
        self.0.iter()
    }

    /// Drops every variable introduced by desugaring.
    pub fn without_fresh(&self) -> Assignment {
        Assignment(
            self.0
                .iter()
                .filter(|(v, _)| !v.is_fresh())
                .map(|(v, w)| (v.clone(), w.clone()))
                .collect(),
        )
    }
}

impl FromIterator<(VarId, Word)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (VarId, Word)>>(iter: T) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("assignment has no value for variable {0}")]
pub struct PartialAssignment(pub VarId);

/// `sat_str`: every variable's word is in its language and every equation
/// holds literally.
pub fn sat_str(p: &Problem, m: &Assignment) -> Result<bool, PartialAssignment> {
    let value = |v: &VarId| m.get(v).ok_or_else(|| PartialAssignment(v.clone()));
    for v in &p.vars {
        value(v)?;
    }
    for v in &p.vars {
        if !p.reg[v].accepts(value(v)?) {
            return Ok(false);
        }
    }
    for (v, a, b) in p.equations() {
        let (wv, wa, wb) = (value(v)?, value(a)?, value(b)?);
        if wv.len() != wa.len() + wb.len() || wv[..wa.len()] != wa[..] || wv[wa.len()..] != wb[..] {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cyclic concatenation dependencies among {}", display_vars(.residual))]
pub struct CyclicError {
    /// Variables that could not be placed in any layer.
    pub residual: BTreeSet<VarId>,
}

fn display_vars(vs: &BTreeSet<VarId>) -> String {
    let names: Vec<&str> = vs.iter().map(|v| v.name()).collect();
    format!("{{{}}}", names.join(","))
}

/// Variables of `pending` whose every dependency lies in `done`.
pub fn ready_set(pending: &BTreeSet<VarId>, p: &Problem, done: &BTreeSet<VarId>) -> BTreeSet<VarId> {
    pending
        .iter()
        .filter(|v| p.equations_of(v).all(|(a, b)| done.contains(a) && done.contains(b)))
        .cloned()
        .collect()
}

/// Dependency layering witnessing acyclicity, outermost layer first: every
/// dependency of a variable lies in a strictly later layer.
pub fn layering(p: &Problem) -> Result<Vec<BTreeSet<VarId>>, CyclicError> {
    let mut pending = p.vars.clone();
    let mut done = BTreeSet::new();
    let mut rounds = Vec::new();
    while !pending.is_empty() {
        let ready = ready_set(&pending, p, &done);
        if ready.is_empty() {
            return Err(CyclicError { residual: pending });
        }
        for v in &ready {
            pending.remove(v);
            done.insert(v.clone());
        }
        rounds.push(ready);
    }
    rounds.reverse();
    Ok(rounds)
}

/// Tree check: the list of all right-hand-side occurrences is duplicate
/// free.
pub fn check_tree(p: &Problem) -> bool {
    let mut seen = BTreeSet::new();
    p.equations().all(|(_, a, b)| seen.insert(a) && seen.insert(b))
}

/// Direct evaluation of the three conjuncts of the tree predicate.
pub fn tree_property(p: &Problem) -> bool {
    let eqs: Vec<_> = p.equations().collect();
    let distinct_operands = eqs.iter().all(|(_, a, b)| a != b);
    let disjoint = |x: (&VarId, &VarId), y: (&VarId, &VarId)| x.0 != y.0 && x.0 != y.1 && x.1 != y.0 && x.1 != y.1;
    let same_head = eqs.iter().all(|e| {
        eqs.iter()
            .filter(|f| f.0 == e.0 && (f.1, f.2) != (e.1, e.2))
            .all(|f| disjoint((e.1, e.2), (f.1, f.2)))
    });
    let different_heads = eqs.iter().all(|e| {
        eqs.iter()
            .filter(|f| f.0 != e.0)
            .all(|f| disjoint((e.1, e.2), (f.1, f.2)))
    });
    distinct_operands && same_head && different_heads
}

/// Operand of a surface equation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(VarId),
    Lit(Word),
}

/// Constraints as written in the input, before lowering.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SurfaceConstraint {
    /// `x ∈ r`
    Membership(VarId, RegexAst),
    /// `x = t1 + ... + tn` with `n >= 1`
    Equation(VarId, Vec<Term>),
    /// `|x| op n`
    Length(VarId, LengthOp, u64),
    /// A disjunction of conjunctions.
    Or(Vec<Vec<SurfaceConstraint>>),
    /// An equality between two ground words.
    LiteralEquality(Word, Word),
}

impl SurfaceConstraint {
    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            SurfaceConstraint::Membership(v, _) | SurfaceConstraint::Length(v, _, _) => {
                out.insert(v.name());
            }
            SurfaceConstraint::Equation(v, terms) => {
                out.insert(v.name());
                for t in terms {
                    if let Term::Var(x) = t {
                        out.insert(x.name());
                    }
                }
            }
            SurfaceConstraint::Or(branches) => {
                for c in branches.iter().flatten() {
                    c.collect_vars(out);
                }
            }
            SurfaceConstraint::LiteralEquality(..) => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesugarError {
    #[error("disjunction expands into more than {cap} problems")]
    TooManyDisjuncts { cap: usize },
    #[error("empty right-hand side in equation for {0}")]
    EmptyEquation(VarId),
    #[error(transparent)]
    LengthCap(#[from] LengthBoundTooLarge),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesugarOptions {
    pub length_cap: u64,
    pub disjunct_cap: usize,
}

impl Default for DesugarOptions {
    fn default() -> Self {
        DesugarOptions {
            length_cap: regex::DEFAULT_LENGTH_CAP,
            disjunct_cap: DEFAULT_DISJUNCT_CAP,
        }
    }
}

/// Lowers surface constraints into one [`Problem`] per disjunct.
pub fn desugar(cs: &[SurfaceConstraint], opts: &DesugarOptions) -> Result<Vec<Problem>, DesugarError> {
    let mut surface = BTreeSet::new();
    for c in cs {
        c.collect_vars(&mut surface);
    }
    let disjuncts = expand(cs, opts.disjunct_cap)?;
    disjuncts.into_iter().map(|conj| lower(&conj, &surface, opts)).collect()
}

/// Cartesian expansion of nested disjunctions into flat conjunctions.
fn expand(cs: &[SurfaceConstraint], cap: usize) -> Result<Vec<Vec<&SurfaceConstraint>>, DesugarError> {
    let mut acc: Vec<Vec<&SurfaceConstraint>> = vec![Vec::new()];
    for c in cs {
        match c {
            SurfaceConstraint::Or(branches) => {
                let mut options = Vec::new();
                for branch in branches {
                    options.extend(expand(branch, cap)?);
                }
                if acc.len().saturating_mul(options.len()) > cap {
                    return Err(DesugarError::TooManyDisjuncts { cap });
                }
                acc = acc
                    .iter()
                    .flat_map(|prefix| {
                        options.iter().map(move |opt| {
                            let mut v = prefix.clone();
                            v.extend(opt.iter().copied());
                            v
                        })
                    })
                    .collect();
            }
            other => {
                for conj in &mut acc {
                    conj.push(other);
                }
            }
        }
    }
    Ok(acc)
}

struct Lowering<'a> {
    surface: &'a BTreeSet<&'a str>,
    next_fresh: usize,
    memberships: BTreeMap<VarId, Vec<SNfa>>,
    problem: Problem,
}

impl Lowering<'_> {
    fn fresh(&mut self, nfa: Option<SNfa>) -> VarId {
        let v = loop {
            self.next_fresh += 1;
            let name = format!("{FRESH_PREFIX}{}", self.next_fresh);
            if !self.surface.contains(name.as_str()) {
                break VarId::new(name);
            }
        };
        self.problem.ensure_var(v.clone());
        if let Some(nfa) = nfa {
            self.memberships.entry(v.clone()).or_default().push(nfa);
        }
        v
    }

    fn term_var(&mut self, t: &Term) -> VarId {
        match t {
            Term::Var(v) => {
                self.problem.ensure_var(v.clone());
                v.clone()
            }
            Term::Lit(w) => self.fresh(Some(word_automaton(w))),
        }
    }
}

fn lower(
    conj: &[&SurfaceConstraint],
    surface: &BTreeSet<&str>,
    opts: &DesugarOptions,
) -> Result<Problem, DesugarError> {
    let mut lw = Lowering {
        surface,
        next_fresh: 0,
        memberships: BTreeMap::new(),
        problem: Problem::new(),
    };
    for c in conj {
        match c {
            SurfaceConstraint::Membership(v, ast) => {
                lw.problem.ensure_var(v.clone());
                lw.memberships.entry(v.clone()).or_default().push(compile(ast));
            }
            SurfaceConstraint::Length(v, op, n) => {
                let nfa = length_automaton(*op, *n, opts.length_cap)?;
                lw.problem.ensure_var(v.clone());
                lw.memberships.entry(v.clone()).or_default().push(nfa);
            }
            SurfaceConstraint::LiteralEquality(a, b) => {
                if a != b {
                    // a contradiction becomes a variable with the empty language
                    lw.fresh(Some(SNfa::empty()));
                }
            }
            SurfaceConstraint::Equation(x, terms) => {
                lw.problem.ensure_var(x.clone());
                let mut operands: Vec<VarId> = terms.iter().map(|t| lw.term_var(t)).collect();
                match operands.len() {
                    0 => return Err(DesugarError::EmptyEquation(x.clone())),
                    1 => {
                        let eps = lw.fresh(Some(word_automaton(&[])));
                        let y = operands.pop().unwrap();
                        lw.problem.add_equation(x.clone(), y, eps);
                    }
                    n => {
                        let last = operands.pop().unwrap();
                        let mut acc = operands[0].clone();
                        for next in &operands[1..] {
                            let t = lw.fresh(None);
                            lw.problem.add_equation(t.clone(), acc, next.clone());
                            acc = t;
                        }
                        debug_assert_eq!(operands.len(), n - 1);
                        lw.problem.add_equation(x.clone(), acc, last);
                    }
                }
            }
            SurfaceConstraint::Or(_) => unreachable!("disjunctions are expanded first"),
        }
    }
    let mut problem = lw.problem;
    for (v, nfas) in lw.memberships {
        let combined = nfas
            .into_iter()
            .reduce(|a, b| SNfa::product(&a, &b))
            .expect("membership lists are non-empty");
        problem.add_var(v, combined);
    }
    Ok(problem)
}
