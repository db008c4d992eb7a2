//! Bounded brute-force checkers, independent of the production matcher.
//!
//! Membership is decided by naive recursive path search over the raw
//! transition list. Satisfiability is decided by backtracking over
//! assignments whose words are drawn from a small alphabet up to a length
//! bound. An `UnsatWithin` answer only means the bounded space is exhausted.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use crate::constraints::{Assignment, Problem, VarId};
use crate::interval::{CodePoint, IntervalSet};
use crate::snfa::{SNfa, StateId, Transition};
use crate::word::Word;

pub const MAX_BOUND_LEN: usize = 8;
pub const MAX_BOUND_ALPHABET: u64 = 8;
pub const DEFAULT_SEARCH_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("max_len {0} exceeds {MAX_BOUND_LEN}")]
    TooLong(usize),
    #[error("alphabet of size {0} exceeds {MAX_BOUND_ALPHABET}")]
    AlphabetTooLarge(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("oracle search exceeded {cap} steps")]
pub struct SearchCapExceeded {
    pub cap: u64,
}

/// Word length cap and test alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bound {
    max_len: usize,
    alphabet: Vec<CodePoint>,
    cap: u64,
}

impl Bound {
    pub fn new(max_len: usize, alphabet: &IntervalSet) -> Result<Bound, BoundError> {
        if max_len > MAX_BOUND_LEN {
            return Err(BoundError::TooLong(max_len));
        }
        if alphabet.len() > MAX_BOUND_ALPHABET {
            return Err(BoundError::AlphabetTooLarge(alphabet.len()));
        }
        let alphabet = alphabet
            .parts()
            .iter()
            .flat_map(|i| (i.lo().value()..=i.hi().value()).filter_map(CodePoint::new))
            .collect();
        Ok(Bound {
            max_len,
            alphabet,
            cap: DEFAULT_SEARCH_CAP,
        })
    }

    /// Same bound with a different step cap.
    pub fn with_cap(mut self, cap: u64) -> Bound {
        self.cap = cap;
        self
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn alphabet(&self) -> &[CodePoint] {
        &self.alphabet
    }

    /// Every word over the alphabet up to `max_len`, shortest first, then
    /// lexicographic.
    pub fn words(&self) -> Result<Vec<Word>, SearchCapExceeded> {
        let k = self.alphabet.len() as u64;
        let total: u64 = (0..=self.max_len as u32)
            .map(|i| k.saturating_pow(i))
            .fold(0, u64::saturating_add);
        if total > self.cap {
            return Err(SearchCapExceeded { cap: self.cap });
        }
        let mut out = vec![Word::empty()];
        let mut layer = vec![Word::empty()];
        for _ in 0..self.max_len {
            let mut next = Vec::with_capacity(layer.len() * self.alphabet.len());
            for w in &layer {
                for &c in &self.alphabet {
                    let mut w2 = w.clone();
                    w2.push(c);
                    next.push(w2);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        Ok(out)
    }
}

/// Membership by naive recursive path search.
pub fn path_accepts(a: &SNfa, w: &[CodePoint]) -> bool {
    let trans: Vec<Transition> = a.transitions().collect();
    let accepting: Vec<StateId> = a.accepting().collect();
    fn go(trans: &[Transition], accepting: &[StateId], q: StateId, w: &[CodePoint]) -> bool {
        match w.split_first() {
            None => accepting.contains(&q),
            Some((c, rest)) => trans
                .iter()
                .any(|t| t.src == q && t.label.contains(*c) && go(trans, accepting, t.dst, rest)),
        }
    }
    a.initial().any(|q| go(&trans, &accepting, q, w))
}

/// The bounded language of `a`, shortest first.
pub fn oracle_lang(a: &SNfa, b: &Bound) -> Result<Vec<Word>, SearchCapExceeded> {
    Ok(b.words()?.into_iter().filter(|w| path_accepts(a, w)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    Sat(Assignment),
    UnsatWithin,
}

impl OracleVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, OracleVerdict::Sat(_))
    }
}

/// Searches for a bounded model of `p`.
///
/// Connected components of the equation graph are solved independently.
/// Inside a component, a variable whose value is forced by an equation with
/// the other two sides assigned is derived rather than enumerated.
pub fn oracle_sat(p: &Problem, b: &Bound) -> Result<OracleVerdict, SearchCapExceeded> {
    let words = b.words()?;
    let mut domains: BTreeMap<&VarId, Vec<Word>> = BTreeMap::new();
    for v in p.vars() {
        let d: Vec<Word> = words.iter().filter(|w| path_accepts(p.reg(v), w)).cloned().collect();
        if d.is_empty() {
            return Ok(OracleVerdict::UnsatWithin);
        }
        domains.insert(v, d);
    }
    let eqs: Vec<(&VarId, &VarId, &VarId)> = p.equations().collect();
    let mut steps = 0u64;
    let mut model = Assignment::new();
    for comp in components(p) {
        let comp_eqs: Vec<_> = eqs.iter().copied().filter(|e| comp.contains(e.0)).collect();
        let mut search = Search {
            vars: comp.iter().copied().collect(),
            eqs: comp_eqs,
            domains: &domains,
            members: comp
                .iter()
                .map(|v| (*v, domains[v].iter().collect::<HashSet<_>>()))
                .collect(),
            values: BTreeMap::new(),
            max_len: b.max_len,
            steps: &mut steps,
            cap: b.cap,
        };
        if !search.run()? {
            return Ok(OracleVerdict::UnsatWithin);
        }
        for (v, w) in search.values {
            model.insert(v.clone(), w);
        }
    }
    Ok(OracleVerdict::Sat(model))
}

fn components(p: &Problem) -> Vec<BTreeSet<&VarId>> {
    let vars: Vec<&VarId> = p.vars().iter().collect();
    let index = |v: &VarId| vars.binary_search(&v).expect("declared variable");
    let mut parent: Vec<usize> = (0..vars.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (v, a, b) in p.equations() {
        let rv = find(&mut parent, index(v));
        for x in [a, b] {
            let rx = find(&mut parent, index(x));
            parent[rx] = rv;
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<&VarId>> = BTreeMap::new();
    for (i, v) in vars.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().insert(v);
    }
    groups.into_values().collect()
}

struct Search<'a, 's> {
    vars: Vec<&'a VarId>,
    eqs: Vec<(&'a VarId, &'a VarId, &'a VarId)>,
    domains: &'a BTreeMap<&'a VarId, Vec<Word>>,
    members: BTreeMap<&'a VarId, HashSet<&'a Word>>,
    values: BTreeMap<&'a VarId, Word>,
    max_len: usize,
    steps: &'s mut u64,
    cap: u64,
}

impl<'a> Search<'a, '_> {
    fn run(&mut self) -> Result<bool, SearchCapExceeded> {
        if self.values.len() == self.vars.len() {
            return Ok(true);
        }
        if let Some((v, w)) = self.forced() {
            return match w {
                Some(w) if self.members[v].contains(&w) => self.try_value(v, w),
                _ => Ok(false),
            };
        }
        let v = *self
            .vars
            .iter()
            .find(|v| !self.values.contains_key(*v))
            .expect("unassigned variable");
        let limit = self.length_limit(v);
        for w in &self.domains[v] {
            if w.len() > limit {
                break;
            }
            if self.try_value(v, w.clone())? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn try_value(&mut self, v: &'a VarId, w: Word) -> Result<bool, SearchCapExceeded> {
        *self.steps += 1;
        if *self.steps > self.cap {
            return Err(SearchCapExceeded { cap: self.cap });
        }
        self.values.insert(v, w);
        if self.consistent() && self.run()? {
            return Ok(true);
        }
        self.values.remove(v);
        Ok(false)
    }

    /// An unassigned variable fixed by one equation, with its value when
    /// the equation admits one.
    fn forced(&self) -> Option<(&'a VarId, Option<Word>)> {
        let get = |x: &VarId| self.values.get(x);
        for &(v, a, b) in &self.eqs {
            match (get(v), get(a), get(b)) {
                (None, Some(wa), Some(wb)) => return Some((v, Some(wa.concat(wb)))),
                (Some(wv), None, Some(wb)) if a != b => {
                    let w = wv.strip_suffix(&wb[..]).map(|p| Word::from(p.to_vec()));
                    return Some((a, w));
                }
                (Some(wv), Some(wa), None) if a != b => {
                    let w = wv.strip_prefix(&wa[..]).map(|s| Word::from(s.to_vec()));
                    return Some((b, w));
                }
                _ => {}
            }
        }
        None
    }

    /// Longest admissible word for `v` given assigned equation partners.
    fn length_limit(&self, v: &VarId) -> usize {
        let mut limit = self.max_len;
        for &(h, a, b) in &self.eqs {
            if let Some(wh) = self.values.get(h) {
                if a == v || b == v {
                    limit = limit.min(wh.len());
                }
            } else if a == v {
                if let Some(wb) = self.values.get(b) {
                    limit = limit.min(self.max_len.saturating_sub(wb.len()));
                }
            } else if b == v {
                if let Some(wa) = self.values.get(a) {
                    limit = limit.min(self.max_len.saturating_sub(wa.len()));
                }
            }
        }
        limit
    }

    fn consistent(&self) -> bool {
        self.eqs.iter().all(
            |&(v, a, b)| match (self.values.get(v), self.values.get(a), self.values.get(b)) {
                (Some(wv), Some(wa), Some(wb)) => {
                    wv.len() == wa.len() + wb.len() && wv.starts_with(wa) && wv.ends_with(wb)
                }
                (Some(wv), Some(wx), None) | (Some(wv), None, Some(wx)) => wx.len() <= wv.len(),
                (None, Some(wa), Some(wb)) => wa.len() + wb.len() <= self.max_len,
                _ => true,
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::sat_str;
    use crate::interval::Interval;
    use crate::regex::{compile_str, sigma_star, word_automaton};

    fn alpha(lo: char, hi: char) -> IntervalSet {
        IntervalSet::from_interval(Interval::new(lo.into(), hi.into()))
    }

    fn words(ws: &[&str]) -> Vec<Word> {
        ws.iter().map(|w| Word::from(*w)).collect()
    }

    #[test]
    fn bound_validation() {
        assert_eq!(Bound::new(9, &alpha('a', 'b')).unwrap_err(), BoundError::TooLong(9));
        assert_eq!(
            Bound::new(2, &alpha('a', 'i')).unwrap_err(),
            BoundError::AlphabetTooLarge(9)
        );
        let b = Bound::new(2, &alpha('a', 'b')).unwrap();
        assert_eq!(b.words().unwrap(), words(&["", "a", "b", "aa", "ab", "ba", "bb"]));
        assert!(Bound::new(8, &alpha('a', 'h')).unwrap().with_cap(1000).words().is_err());
    }

    #[test]
    fn oracle_lang_examples() {
        let b = Bound::new(2, &alpha('a', 'a')).unwrap();
        assert_eq!(oracle_lang(&sigma_star(), &b).unwrap(), words(&["", "a", "aa"]));
        let b = Bound::new(3, &alpha('a', 'c')).unwrap();
        assert_eq!(
            oracle_lang(&word_automaton(&Word::from("ab")), &b).unwrap(),
            words(&["ab"])
        );
        let ab = SNfa::concat(&compile_str("a").unwrap(), &compile_str("b").unwrap());
        assert_eq!(
            oracle_lang(&ab, &Bound::new(2, &alpha('a', 'c')).unwrap()).unwrap(),
            words(&["ab"])
        );
    }

    #[test]
    fn oracle_sat_examples() {
        let b = Bound::new(4, &alpha('a', 'b')).unwrap();
        let mut p = Problem::new();
        p.add_var(VarId::new("x"), compile_str("a").unwrap());
        match oracle_sat(&p, &b).unwrap() {
            OracleVerdict::Sat(m) => assert_eq!(m.get(&VarId::new("x")), Some(&Word::from("a"))),
            v => panic!("{v:?}"),
        }

        let mut p = Problem::new();
        p.add_var(
            VarId::new("x"),
            SNfa::product(&compile_str("a").unwrap(), &compile_str("b").unwrap()),
        );
        assert_eq!(oracle_sat(&p, &b).unwrap(), OracleVerdict::UnsatWithin);

        let mut p = Problem::new();
        p.add_var(VarId::new("y"), compile_str("ab").unwrap());
        p.add_var(VarId::new("x"), compile_str("a|b").unwrap());
        p.add_equation(VarId::new("y"), VarId::new("x"), VarId::new("x"));
        assert_eq!(
            oracle_sat(&p, &Bound::new(2, &alpha('a', 'b')).unwrap()).unwrap(),
            OracleVerdict::UnsatWithin
        );
        assert_eq!(oracle_sat(&p, &b).unwrap(), OracleVerdict::UnsatWithin);
    }

    #[test]
    fn oracle_sat_models_pass_sat_str() {
        let v = VarId::new;
        let mut p = Problem::new();
        p.add_var(v("v"), compile_str("a*b+").unwrap());
        p.add_var(v("c"), compile_str("b").unwrap());
        p.add_equation(v("v"), v("a"), v("b"));
        p.add_equation(v("v"), v("b"), v("c"));
        p.add_var(v("lonely"), compile_str("ba").unwrap());
        let b = Bound::new(6, &alpha('a', 'c')).unwrap();
        match oracle_sat(&p, &b).unwrap() {
            OracleVerdict::Sat(m) => assert_eq!(sat_str(&p, &m), Ok(true)),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn search_cap_is_reported() {
        let v = VarId::new;
        let mut p = Problem::new();
        p.add_var(v("v"), compile_str("(a|b)*").unwrap());
        p.add_equation(v("v"), v("a"), v("b"));
        p.add_equation(v("w"), v("b"), v("a"));
        p.add_var(v("w"), compile_str("aaa").unwrap());
        p.add_var(v("a"), compile_str("b+").unwrap());
        let b = Bound::new(3, &alpha('a', 'b')).unwrap().with_cap(20);
        assert_eq!(oracle_sat(&p, &b).unwrap_err(), SearchCapExceeded { cap: 20 });
    }
}
