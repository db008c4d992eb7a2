//! Symbolic NFAs whose transitions carry code-point intervals.
//!
//! An [`SNfa`] is the tuple `(Q, Δ, I, F)`. Automata are epsilon-free and
//! never store a transition with an empty label. States are identified by
//! [`StateId`]s, which pair an index with a small tag; renaming an automaton
//! rewrites every state to `(index, tag)`, so two automata renamed with
//! distinct tags have disjoint state sets.
//!
//! Internally states are kept sorted and transitions are stored in a
//! compressed adjacency layout indexed by each state's position. All
//! iteration happens in sorted order, so every construction is
//! deterministic.
//!
//! # Dump format
//!
//! [`SNfa::dump`] writes one header line followed by one line per state and
//! one line per transition, all in sorted order:
//!
//! ```text
//! snfa states <n> transitions <m>
//! state <tag>:<id>[ initial][ accepting]
//! trans <tag>:<id> <lo>-<hi> <tag>:<id>
//! ```
//!
//! `lo` and `hi` are decimal code points.

use std::collections::{HashMap, VecDeque};
use std::fmt::{self, Write as _};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::interval::{CodePoint, Interval};
use crate::word::Word;

/// Tag carried by the left operand's states inside a concatenation.
pub const CONCAT_LEFT_TAG: u32 = 1;
/// Tag carried by the right operand's states inside a concatenation.
pub const CONCAT_RIGHT_TAG: u32 = 2;

/// Default state cap for [`SNfa::isomorphic`].
pub const DEFAULT_ISOMORPHISM_CAP: usize = 12;

/// A state name. Ordered by tag first, then id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateId {
    pub id: u32,
    pub tag: u32,
}

impl StateId {
    pub const fn new(id: u32, tag: u32) -> StateId {
        StateId { id, tag }
    }
}

impl Ord for StateId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.tag, self.id).cmp(&(other.tag, other.id))
    }
}

impl PartialOrd for StateId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.tag, self.id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub src: StateId,
    pub label: Interval,
    pub dst: StateId,
}

/// Transition over local state indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Edge {
    src: u32,
    label: Interval,
    dst: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MalformedError {
    #[error("duplicate state {0}")]
    DuplicateState(StateId),
    #[error("{role} state {state} is not in the state set")]
    UnknownState { role: &'static str, state: StateId },
}

/// Resource failures raised while constructing an automaton.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LimitError {
    #[error("automaton exceeds the transition budget ({count} > {limit})")]
    TooManyTransitions { count: usize, limit: usize },
    #[error("deadline reached during automaton construction")]
    Deadline,
    #[error("construction cancelled")]
    Cancelled,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("automaton has {states} states, above the isomorphism cap {cap}")]
pub struct TooLarge {
    pub states: usize,
    pub cap: usize,
}

/// Budget consulted by the bounded constructions.
#[derive(Debug, Clone, Default)]
pub struct Limits {
    pub max_transitions: Option<usize>,
    pub deadline: Option<Instant>,
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Limits {
    pub fn unbounded() -> Limits {
        Limits::default()
    }

    pub fn with_max_transitions(mut self, max: usize) -> Limits {
        self.max_transitions = Some(max);
        self
    }

    pub fn with_deadline(mut self, deadline: Instant) -> Limits {
        self.deadline = Some(deadline);
        self
    }

    pub fn with_cancel(mut self, flag: Arc<AtomicBool>) -> Limits {
        self.cancel = Some(flag);
        self
    }

    /// Deadline and cancellation check.
    pub fn check_time(&self) -> Result<(), LimitError> {
        if let Some(flag) = &self.cancel {
            if flag.load(Ordering::Relaxed) {
                return Err(LimitError::Cancelled);
            }
        }
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(LimitError::Deadline),
            _ => Ok(()),
        }
    }

    fn check_size(&self, count: usize) -> Result<(), LimitError> {
        match self.max_transitions {
            Some(limit) if count > limit => Err(LimitError::TooManyTransitions { count, limit }),
            _ => Ok(()),
        }
    }
}

// how many generated transitions between two clock reads
const TIME_CHECK_INTERVAL: usize = 1 << 14;

/// A symbolic NFA `(Q, Δ, I, F)` with interval labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SNfa {
    states: Vec<StateId>,
    edges: Vec<Edge>,
    // edges[offsets[s]..offsets[s + 1]] leave state s
    offsets: Vec<u32>,
    initial: Vec<u32>,
    accepting: Vec<u32>,
    trim: bool,
}

impl SNfa {
    /// Builds an automaton from explicit parts, checking well-formedness.
    ///
    /// Transitions with an empty label are dropped and duplicates collapse.
    pub fn new(
        states: impl IntoIterator<Item = StateId>,
        transitions: impl IntoIterator<Item = Transition>,
        initial: impl IntoIterator<Item = StateId>,
        accepting: impl IntoIterator<Item = StateId>,
    ) -> Result<SNfa, MalformedError> {
        let mut states: Vec<StateId> = states.into_iter().collect();
        states.sort_unstable();
        if let Some(w) = states.windows(2).find(|w| w[0] == w[1]) {
            return Err(MalformedError::DuplicateState(w[0]));
        }
        let index = |role: &'static str, s: StateId| -> Result<u32, MalformedError> {
            states
                .binary_search(&s)
                .map(|i| i as u32)
                .map_err(|_| MalformedError::UnknownState { role, state: s })
        };
        let mut edges = Vec::new();
        for t in transitions {
            let src = index("source", t.src)?;
            let dst = index("target", t.dst)?;
            if t.label.is_nonempty() {
                edges.push(Edge {
                    src,
                    label: t.label,
                    dst,
                });
            }
        }
        let initial = initial
            .into_iter()
            .map(|s| index("initial", s))
            .collect::<Result<Vec<_>, _>>()?;
        let accepting = accepting
            .into_iter()
            .map(|s| index("accepting", s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SNfa::from_dense(states, edges, initial, accepting, false))
    }

    /// `states` must be sorted and unique; everything else is normalized here.
    fn from_dense(
        states: Vec<StateId>,
        mut edges: Vec<Edge>,
        mut initial: Vec<u32>,
        mut accepting: Vec<u32>,
        trim: bool,
    ) -> SNfa {
        debug_assert!(states.windows(2).all(|w| w[0] < w[1]));
        edges.sort_unstable();
        edges.dedup();
        initial.sort_unstable();
        initial.dedup();
        accepting.sort_unstable();
        accepting.dedup();
        let mut offsets = vec![0u32; states.len() + 1];
        for e in &edges {
            offsets[e.src as usize + 1] += 1;
        }
        for i in 0..states.len() {
            offsets[i + 1] += offsets[i];
        }
        let nfa = SNfa {
            states,
            edges,
            offsets,
            initial,
            accepting,
            trim,
        };
        debug_assert!(nfa.check_invariants().is_ok(), "{:?}", nfa.check_invariants());
        nfa
    }

    /// The automaton with no states; its language is empty.
    pub fn empty() -> SNfa {
        SNfa::from_dense(Vec::new(), Vec::new(), Vec::new(), Vec::new(), true)
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn transition_count(&self) -> usize {
        self.edges.len()
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn transitions(&self) -> impl Iterator<Item = Transition> + '_ {
        self.edges.iter().map(|e| self.resolve(e))
    }

    pub fn initial(&self) -> impl Iterator<Item = StateId> + '_ {
        self.initial.iter().map(|&i| self.states[i as usize])
    }

    pub fn accepting(&self) -> impl Iterator<Item = StateId> + '_ {
        self.accepting.iter().map(|&i| self.states[i as usize])
    }

    pub fn initial_count(&self) -> usize {
        self.initial.len()
    }

    pub fn accepting_count(&self) -> usize {
        self.accepting.len()
    }

    /// Whether the automaton is known to contain only reachable states.
    pub fn is_trim(&self) -> bool {
        self.trim
    }

    fn resolve(&self, e: &Edge) -> Transition {
        Transition {
            src: self.states[e.src as usize],
            label: e.label,
            dst: self.states[e.dst as usize],
        }
    }

    fn out(&self, s: u32) -> &[Edge] {
        let s = s as usize;
        &self.edges[self.offsets[s] as usize..self.offsets[s + 1] as usize]
    }

    fn is_accepting_index(&self, s: u32) -> bool {
        self.accepting.binary_search(&s).is_ok()
    }

    /// Well-formedness plus the storage invariants. Cheap enough to run after
    /// every construction in debug builds.
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.states.len() as u32;
        if self.states.windows(2).any(|w| w[0] >= w[1]) {
            return Err("states not sorted and unique".into());
        }
        if self.initial.iter().chain(&self.accepting).any(|&s| s >= n) {
            return Err("initial or accepting state outside Q".into());
        }
        for e in &self.edges {
            if e.src >= n || e.dst >= n {
                return Err(format!("transition {e:?} leaves Q"));
            }
            if e.label.is_empty() {
                return Err(format!("transition {e:?} has an empty label"));
            }
        }
        if self.offsets.len() != self.states.len() + 1 {
            return Err("bad adjacency offsets".into());
        }
        if self.trim {
            let seen = self.reachable_mask();
            if seen.iter().any(|r| !r) {
                return Err("trim flag set but some state is unreachable".into());
            }
        }
        Ok(())
    }

    /// Whether `w` labels a path from an initial to an accepting state.
    pub fn accepts(&self, w: &[CodePoint]) -> bool {
        let n = self.states.len();
        let mut current = vec![false; n];
        let mut frontier: Vec<u32> = self.initial.clone();
        for &s in &frontier {
            current[s as usize] = true;
        }
        let mut next = vec![false; n];
        let mut next_frontier = Vec::new();
        for &c in w {
            if frontier.is_empty() {
                return false;
            }
            for &s in &frontier {
                for e in self.out(s) {
                    if e.label.contains(c) && !next[e.dst as usize] {
                        next[e.dst as usize] = true;
                        next_frontier.push(e.dst);
                    }
                }
            }
            for &s in &frontier {
                current[s as usize] = false;
            }
            std::mem::swap(&mut current, &mut next);
            std::mem::swap(&mut frontier, &mut next_frontier);
            next_frontier.clear();
        }
        frontier.iter().any(|&s| self.is_accepting_index(s))
    }

    /// Isomorphic copy whose states are `(position, tag)`.
    pub fn rename(&self, tag: u32) -> SNfa {
        let states = (0..self.states.len() as u32).map(|i| StateId::new(i, tag)).collect();
        SNfa {
            states,
            edges: self.edges.clone(),
            offsets: self.offsets.clone(),
            initial: self.initial.clone(),
            accepting: self.accepting.clone(),
            trim: self.trim,
        }
    }

    fn reachable_mask(&self) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut queue: VecDeque<u32> = VecDeque::new();
        for &s in &self.initial {
            if !seen[s as usize] {
                seen[s as usize] = true;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            for e in self.out(s) {
                if !seen[e.dst as usize] {
                    seen[e.dst as usize] = true;
                    queue.push_back(e.dst);
                }
            }
        }
        seen
    }

    /// Drops every state not reachable from an initial state.
    pub fn remove_unreachable(&self) -> SNfa {
        if self.trim {
            return self.clone();
        }
        let seen = self.reachable_mask();
        let mut remap = vec![u32::MAX; self.states.len()];
        let mut states = Vec::new();
        for (i, &keep) in seen.iter().enumerate() {
            if keep {
                remap[i] = states.len() as u32;
                states.push(self.states[i]);
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| seen[e.src as usize])
            .map(|e| Edge {
                src: remap[e.src as usize],
                label: e.label,
                dst: remap[e.dst as usize],
            })
            .collect();
        let pick = |v: &[u32]| -> Vec<u32> {
            v.iter()
                .filter(|&&s| seen[s as usize])
                .map(|&s| remap[s as usize])
                .collect()
        };
        SNfa::from_dense(states, edges, pick(&self.initial), pick(&self.accepting), true)
    }

    /// Language emptiness, decided as accepting-set emptiness after trimming.
    pub fn is_empty(&self) -> bool {
        if self.trim {
            self.accepting.is_empty()
        } else {
            self.remove_unreachable().accepting.is_empty()
        }
    }

    /// A shortest accepted word, choosing each label's lower bound.
    pub fn some_word(&self) -> Option<Word> {
        let n = self.states.len();
        // parent[s] = (predecessor, character) on the BFS tree
        let mut parent: Vec<Option<(u32, CodePoint)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for &s in &self.initial {
            if !seen[s as usize] {
                seen[s as usize] = true;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            if self.is_accepting_index(s) {
                let mut chars = Vec::new();
                let mut cur = s;
                while let Some((prev, c)) = parent[cur as usize] {
                    chars.push(c);
                    cur = prev;
                }
                chars.reverse();
                return Some(Word::from_code_points(chars));
            }
            for e in self.out(s) {
                if !seen[e.dst as usize] {
                    seen[e.dst as usize] = true;
                    parent[e.dst as usize] = Some((s, e.label.lo()));
                    queue.push_back(e.dst);
                }
            }
        }
        None
    }

    /// Structural test for the canonical one-state `Σ*` automaton.
    pub fn is_sigma_star(&self) -> bool {
        self.states.len() == 1
            && self.initial == [0]
            && self.accepting == [0]
            && self.edges.len() == 1
            && self.edges[0].label == Interval::FULL
    }

    /// Concatenation `L(a1)·L(a2)` without a budget.
    pub fn concat(a1: &SNfa, a2: &SNfa) -> SNfa {
        SNfa::concat_bounded(a1, a2, &Limits::unbounded()).expect("unbounded concat cannot fail")
    }

    /// Worklist concatenation producing only reachable states.
    ///
    /// The operands are renamed apart with tags 1 and 2. The transition
    /// relation is `Δ1 ∪ Δ2` plus a bridge `(q, α, q'')` for every
    /// `(q, α, q') ∈ Δ1` with `q' ∈ F1` and every `q'' ∈ I2`. The initial set
    /// is `I1`, widened by `I2` when `a1` accepts the empty word; the
    /// accepting set is `F2`.
    pub fn concat_bounded(a1: &SNfa, a2: &SNfa, limits: &Limits) -> Result<SNfa, LimitError> {
        let n1 = a1.states.len() as u32;
        let total = a1.states.len() + a2.states.len();
        let left = a1.rename(CONCAT_LEFT_TAG);
        let right = a2.rename(CONCAT_RIGHT_TAG);
        // combined index space: left states 0..n1, right states n1..
        let mut combined_states = left.states;
        combined_states.extend(right.states);

        let accepts_empty = left.initial.iter().any(|&s| a1.is_accepting_index(s));
        let mut initial: Vec<u32> = a1.initial.clone();
        if accepts_empty {
            initial.extend(a2.initial.iter().map(|&s| s + n1));
        }

        let mut seen = vec![false; total];
        let mut worklist: VecDeque<u32> = VecDeque::new();
        for &s in &initial {
            if !seen[s as usize] {
                seen[s as usize] = true;
                worklist.push_back(s);
            }
        }
        let mut edges: Vec<Edge> = Vec::new();
        let mut since_check = 0usize;
        let mut visit = |e: Edge, seen: &mut Vec<bool>, worklist: &mut VecDeque<u32>| {
            if e.label.is_nonempty() {
                if !seen[e.dst as usize] {
                    seen[e.dst as usize] = true;
                    worklist.push_back(e.dst);
                }
                edges.push(e);
            }
        };
        while let Some(s) = worklist.pop_front() {
            if s < n1 {
                for e in a1.out(s) {
                    visit(*e, &mut seen, &mut worklist);
                    if a1.is_accepting_index(e.dst) {
                        for &i2 in &a2.initial {
                            visit(
                                Edge {
                                    src: s,
                                    label: e.label,
                                    dst: i2 + n1,
                                },
                                &mut seen,
                                &mut worklist,
                            );
                        }
                    }
                }
            } else {
                for e in a2.out(s - n1) {
                    visit(
                        Edge {
                            src: s,
                            label: e.label,
                            dst: e.dst + n1,
                        },
                        &mut seen,
                        &mut worklist,
                    );
                }
            }
            since_check += 1;
            if since_check >= 256 {
                since_check = 0;
                limits.check_time()?;
            }
        }

        // compact to the reachable states, which keeps them in sorted order
        let mut remap = vec![u32::MAX; total];
        let mut states = Vec::new();
        for (i, &keep) in seen.iter().enumerate() {
            if keep {
                remap[i] = states.len() as u32;
                states.push(combined_states[i]);
            }
        }
        for e in &mut edges {
            e.src = remap[e.src as usize];
            e.dst = remap[e.dst as usize];
        }
        let initial = initial.iter().map(|&s| remap[s as usize]).collect();
        let accepting = a2
            .accepting
            .iter()
            .map(|&s| s + n1)
            .filter(|&s| seen[s as usize])
            .map(|s| remap[s as usize])
            .collect();
        let nfa = SNfa::from_dense(states, edges, initial, accepting, true);
        limits.check_size(nfa.transition_count())?;
        Ok(nfa)
    }

    /// Product automaton recognizing `L(a1) ∩ L(a2)`, without a budget.
    pub fn product(a1: &SNfa, a2: &SNfa) -> SNfa {
        SNfa::product_bounded(a1, a2, &Limits::unbounded()).expect("unbounded product cannot fail")
    }

    /// Pair construction explored breadth-first from `I1 × I2`.
    ///
    /// Result states are numbered in discovery order with tag 0. A pair
    /// transition is kept only when the label intersection is non-empty.
    pub fn product_bounded(a1: &SNfa, a2: &SNfa, limits: &Limits) -> Result<SNfa, LimitError> {
        let n2 = a2.states.len();
        let pair_space = a1.states.len() * n2;
        let mut index = PairIndex::new(pair_space);
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let mut initial = Vec::new();
        for &p in &a1.initial {
            for &q in &a2.initial {
                let (id, fresh) = index.get_or_insert(p, q, n2, pairs.len() as u32);
                if fresh {
                    pairs.push((p, q));
                }
                initial.push(id);
            }
        }
        let mut edges: Vec<Edge> = Vec::new();
        let mut next_check = TIME_CHECK_INTERVAL;
        let mut cursor = 0usize;
        while cursor < pairs.len() {
            let (p, q) = pairs[cursor];
            let src = cursor as u32;
            cursor += 1;
            let out2 = a2.out(q);
            for e1 in a1.out(p) {
                for e2 in out2 {
                    let label = e1.label.intersection(e2.label);
                    if label.is_empty() {
                        continue;
                    }
                    let (dst, fresh) = index.get_or_insert(e1.dst, e2.dst, n2, pairs.len() as u32);
                    if fresh {
                        pairs.push((e1.dst, e2.dst));
                    }
                    edges.push(Edge { src, label, dst });
                }
            }
            if edges.len() >= next_check {
                next_check = edges.len() + TIME_CHECK_INTERVAL;
                limits.check_size(edges.len())?;
                limits.check_time()?;
            }
        }
        let accepting = pairs
            .iter()
            .enumerate()
            .filter(|(_, &(p, q))| a1.is_accepting_index(p) && a2.is_accepting_index(q))
            .map(|(i, _)| i as u32)
            .collect();
        let states = (0..pairs.len() as u32).map(|i| StateId::new(i, 0)).collect();
        let nfa = SNfa::from_dense(states, edges, initial, accepting, true);
        limits.check_size(nfa.transition_count())?;
        Ok(nfa)
    }

    /// Splits `w` into `(w1, w2)` with `w1 ∈ L(a1)` and `w2 ∈ L(a2)`,
    /// preferring the shortest `w1`. When `concat` is given it is used as a
    /// membership pre-check.
    pub fn split_word(a1: &SNfa, a2: &SNfa, concat: Option<&SNfa>, w: &[CodePoint]) -> Option<(Word, Word)> {
        if let Some(c) = concat {
            if !c.accepts(w) {
                return None;
            }
        }
        // prefix lengths accepted by a1, in one forward pass
        let n = a1.states.len();
        let mut current = vec![false; n];
        for &s in &a1.initial {
            current[s as usize] = true;
        }
        let mut cuts = Vec::new();
        for i in 0..=w.len() {
            if current
                .iter()
                .enumerate()
                .any(|(s, &on)| on && a1.is_accepting_index(s as u32))
            {
                cuts.push(i);
            }
            if i == w.len() {
                break;
            }
            let mut next = vec![false; n];
            let mut any = false;
            for (s, &on) in current.iter().enumerate() {
                if on {
                    for e in a1.out(s as u32) {
                        if e.label.contains(w[i]) {
                            next[e.dst as usize] = true;
                            any = true;
                        }
                    }
                }
            }
            current = next;
            if !any {
                break;
            }
        }
        cuts.into_iter().find(|&i| a2.accepts(&w[i..])).map(|i| {
            (
                Word::from_code_points(w[..i].to_vec()),
                Word::from_code_points(w[i..].to_vec()),
            )
        })
    }

    /// Exact structural isomorphism by backtracking search.
    ///
    /// Refuses automata with more than `cap` states.
    pub fn isomorphic(a: &SNfa, b: &SNfa, cap: usize) -> Result<bool, TooLarge> {
        for x in [a, b] {
            if x.states.len() > cap {
                return Err(TooLarge {
                    states: x.states.len(),
                    cap,
                });
            }
        }
        if a.states.len() != b.states.len()
            || a.edges.len() != b.edges.len()
            || a.initial.len() != b.initial.len()
            || a.accepting.len() != b.accepting.len()
        {
            return Ok(false);
        }
        let profile = |x: &SNfa, s: u32| {
            let indeg = x.edges.iter().filter(|e| e.dst == s).count();
            (
                x.initial.binary_search(&s).is_ok(),
                x.is_accepting_index(s),
                x.out(s).len(),
                indeg,
            )
        };
        let n = a.states.len();
        let pa: Vec<_> = (0..n as u32).map(|s| profile(a, s)).collect();
        let pb: Vec<_> = (0..n as u32).map(|s| profile(b, s)).collect();
        let mut map = vec![u32::MAX; n];
        let mut used = vec![false; n];
        Ok(iso_search(a, b, &pa, &pb, 0, &mut map, &mut used))
    }

    /// Line-based dump; see the module docs for the grammar.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "snfa states {} transitions {}",
            self.states.len(),
            self.edges.len()
        )
        .unwrap();
        for (i, s) in self.states.iter().enumerate() {
            let i = i as u32;
            write!(out, "state {s}").unwrap();
            if self.initial.binary_search(&i).is_ok() {
                out.push_str(" initial");
            }
            if self.is_accepting_index(i) {
                out.push_str(" accepting");
            }
            out.push('\n');
        }
        for t in self.transitions() {
            writeln!(out, "trans {} {}-{} {}", t.src, t.label.lo(), t.label.hi(), t.dst).unwrap();
        }
        out
    }

    /// Graphviz rendering with `lo-hi` edge labels.
    pub fn to_dot(&self, name: &str) -> String {
        let node = |s: StateId| format!("s{}_{}", s.tag, s.id);
        let mut out = String::new();
        writeln!(out, "digraph \"{}\" {{", name.replace('"', "\\\"")).unwrap();
        writeln!(out, "  rankdir=LR;").unwrap();
        for (i, &s) in self.states.iter().enumerate() {
            let shape = if self.is_accepting_index(i as u32) {
                "doublecircle"
            } else {
                "circle"
            };
            writeln!(out, "  {} [label=\"{}\", shape={}];", node(s), s, shape).unwrap();
        }
        for (k, s) in self.initial().enumerate() {
            writeln!(out, "  init{k} [shape=point];").unwrap();
            writeln!(out, "  init{k} -> {};", node(s)).unwrap();
        }
        for t in self.transitions() {
            writeln!(
                out,
                "  {} -> {} [label=\"{}-{}\"];",
                node(t.src),
                node(t.dst),
                t.label.lo(),
                t.label.hi()
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }
}

fn iso_search(
    a: &SNfa,
    b: &SNfa,
    pa: &[(bool, bool, usize, usize)],
    pb: &[(bool, bool, usize, usize)],
    next: usize,
    map: &mut Vec<u32>,
    used: &mut Vec<bool>,
) -> bool {
    let n = pa.len();
    if next == n {
        return true;
    }
    for cand in 0..n {
        if used[cand] || pa[next] != pb[cand] {
            continue;
        }
        map[next] = cand as u32;
        used[cand] = true;
        if edges_consistent(a, b, next as u32, map) && iso_search(a, b, pa, pb, next + 1, map, used) {
            return true;
        }
        used[cand] = false;
        map[next] = u32::MAX;
    }
    false
}

/// Every edge of `a` touching `s` whose endpoints are both mapped must have
/// an image in `b`.
fn edges_consistent(a: &SNfa, b: &SNfa, s: u32, map: &[u32]) -> bool {
    a.edges.iter().filter(|e| e.src == s || e.dst == s).all(|e| {
        let (ms, md) = (map[e.src as usize], map[e.dst as usize]);
        if ms == u32::MAX || md == u32::MAX {
            return true;
        }
        b.out(ms)
            .binary_search(&Edge {
                src: ms,
                label: e.label,
                dst: md,
            })
            .is_ok()
    })
}

/// Pair-to-index map; dense when the pair space is small.
enum PairIndex {
    Dense(Vec<u32>),
    Sparse(HashMap<(u32, u32), u32>),
}

impl PairIndex {
    const DENSE_LIMIT: usize = 1 << 24;

    fn new(space: usize) -> PairIndex {
        if space <= Self::DENSE_LIMIT {
            PairIndex::Dense(vec![u32::MAX; space])
        } else {
            PairIndex::Sparse(HashMap::new())
        }
    }

    fn get_or_insert(&mut self, p: u32, q: u32, n2: usize, fresh_id: u32) -> (u32, bool) {
        match self {
            PairIndex::Dense(v) => {
                let slot = &mut v[p as usize * n2 + q as usize];
                if *slot == u32::MAX {
                    *slot = fresh_id;
                    (fresh_id, true)
                } else {
                    (*slot, false)
                }
            }
            PairIndex::Sparse(m) => match m.entry((p, q)) {
                std::collections::hash_map::Entry::Occupied(o) => (*o.get(), false),
                std::collections::hash_map::Entry::Vacant(v) => {
                    v.insert(fresh_id);
                    (fresh_id, true)
                }
            },
        }
    }
}
