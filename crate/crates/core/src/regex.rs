//! A PCRE-style regex subset compiled to epsilon-free automata.
//!
//! Membership is full-match: a word belongs to `/r/` when the whole word
//! matches, with no implicit `.*` around the pattern. The accepted grammar:
//!
//! ```text
//! regex    ::= branch ( '|' branch )*
//! branch   ::= piece*
//! piece    ::= atom ( '*' | '+' | '?' )*
//! atom     ::= '(' regex ')' | '(?:' regex ')' | class | '.' | escape | char
//! class    ::= '[' '^'? item+ ']'          (']' first is a literal)
//! item     ::= cchar ( '-' cchar )?
//! escape   ::= '\' ( meta | 'n' | 't' | 'r' | 'f' | 'v' | '0'
//!                   | 'x' HEX HEX | 'u{' HEX+ '}' | 'd' | 'D' | 'w' | 'W' | 's' | 'S' )
//! meta     ::= any of  \ / . | * + ? ( ) [ ] { } ^ $ -
//! ```
//!
//! Backreferences, lookaround, lazy or possessive quantifiers, bounded
//! repetition `{m,n}` and anchors are rejected with
//! [`RegexError::Unsupported`].
//!
//! Compilation uses the position (Glushkov) construction: one initial state
//! plus one state per literal, class or `.` occurrence. Each part of a
//! class becomes its own interval-labeled transition.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::interval::{CodePoint, Interval, IntervalSet};
use crate::snfa::{SNfa, StateId, Transition};

/// Default cap on the bound of a length constraint.
pub const DEFAULT_LENGTH_CAP: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RegexAst {
    /// The empty language (`re.none`).
    Empty,
    Epsilon,
    Literal(CodePoint),
    /// A normalized, non-empty set of code points.
    Class(IntervalSet),
    AnyChar,
    Concat(Vec<RegexAst>),
    Union(Vec<RegexAst>),
    Star(Box<RegexAst>),
    Plus(Box<RegexAst>),
    Opt(Box<RegexAst>),
}

impl RegexAst {
    /// Flattening constructor: nested concatenations are spliced, a single
    /// child is returned as is, no child means epsilon.
    pub fn concat(children: Vec<RegexAst>) -> RegexAst {
        let mut flat = Vec::with_capacity(children.len());
        for c in children {
            match c {
                RegexAst::Concat(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => RegexAst::Epsilon,
            1 => flat.pop().unwrap(),
            _ => RegexAst::Concat(flat),
        }
    }

    /// Flattening constructor for unions; no child means the empty language.
    pub fn union(children: Vec<RegexAst>) -> RegexAst {
        let mut flat = Vec::with_capacity(children.len());
        for c in children {
            match c {
                RegexAst::Union(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => RegexAst::Empty,
            1 => flat.pop().unwrap(),
            _ => RegexAst::Union(flat),
        }
    }

    /// A class node, or [`RegexAst::Empty`] when the set is empty.
    pub fn class(set: IntervalSet) -> RegexAst {
        if set.is_empty() {
            RegexAst::Empty
        } else {
            RegexAst::Class(set)
        }
    }

    /// The literal word as a concatenation of literals.
    pub fn word(w: &[CodePoint]) -> RegexAst {
        RegexAst::concat(w.iter().map(|&c| RegexAst::Literal(c)).collect())
    }

    pub fn star(child: RegexAst) -> RegexAst {
        RegexAst::Star(Box::new(child))
    }

    pub fn plus(child: RegexAst) -> RegexAst {
        RegexAst::Plus(Box::new(child))
    }

    pub fn opt(child: RegexAst) -> RegexAst {
        RegexAst::Opt(Box::new(child))
    }
}

impl fmt::Display for RegexAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn lit(f: &mut fmt::Formatter<'_>, c: CodePoint, in_class: bool) -> fmt::Result {
            let v = c.value();
            match c.to_char() {
                Some(ch) if ch.is_ascii_alphanumeric() || (ch == ' ') => write!(f, "{ch}"),
                Some(ch) if ch.is_ascii_punctuation() => {
                    let meta = if in_class { "\\]^-[" } else { "\\/.|*+?()[]{}^$-" };
                    if meta.contains(ch) {
                        write!(f, "\\{ch}")
                    } else {
                        write!(f, "{ch}")
                    }
                }
                _ => write!(f, "\\u{{{v:x}}}"),
            }
        }
        fn atom(f: &mut fmt::Formatter<'_>, r: &RegexAst) -> fmt::Result {
            match r {
                RegexAst::Concat(_)
                | RegexAst::Union(_)
                | RegexAst::Epsilon
                | RegexAst::Star(_)
                | RegexAst::Plus(_)
                | RegexAst::Opt(_) => write!(f, "({r})"),
                _ => write!(f, "{r}"),
            }
        }
        match self {
            RegexAst::Empty => f.write_str("[^\\u{0}-\\u{10ffff}]"),
            RegexAst::Epsilon => f.write_str("()"),
            RegexAst::Literal(c) => lit(f, *c, false),
            RegexAst::AnyChar => f.write_str("."),
            RegexAst::Class(set) => {
                f.write_str("[")?;
                for part in set.parts() {
                    lit(f, part.lo(), true)?;
                    if part.hi() != part.lo() {
                        f.write_str("-")?;
                        lit(f, part.hi(), true)?;
                    }
                }
                f.write_str("]")
            }
            RegexAst::Concat(xs) => {
                for x in xs {
                    match x {
                        RegexAst::Union(_) => write!(f, "({x})")?,
                        _ => write!(f, "{x}")?,
                    }
                }
                Ok(())
            }
            RegexAst::Union(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("|")?;
                    }
                    match x {
                        RegexAst::Epsilon => f.write_str("()")?,
                        _ => write!(f, "{x}")?,
                    }
                }
                Ok(())
            }
            RegexAst::Star(x) => {
                atom(f, x)?;
                f.write_str("*")
            }
            RegexAst::Plus(x) => {
                atom(f, x)?;
                f.write_str("+")
            }
            RegexAst::Opt(x) => {
                atom(f, x)?;
                f.write_str("?")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegexError {
    #[error("regex syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unsupported regex feature at byte {offset}: {feature}")]
    Unsupported { offset: usize, feature: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("length bound {bound} exceeds the cap {cap}")]
pub struct LengthBoundTooLarge {
    pub bound: u64,
    pub cap: u64,
}

pub fn parse_regex(src: &str) -> Result<RegexAst, RegexError> {
    let mut p = RegexParser { src, pos: 0 };
    let ast = p.alternation()?;
    if p.pos < src.len() {
        return Err(p.syntax("unbalanced ')'"));
    }
    Ok(ast)
}

/// Parses and compiles in one step.
pub fn compile_str(src: &str) -> Result<SNfa, RegexError> {
    parse_regex(src).map(|ast| compile(&ast))
}

struct RegexParser<'a> {
    src: &'a str,
    pos: usize,
}

impl RegexParser<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn syntax(&self, message: &str) -> RegexError {
        RegexError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn unsupported(&self, feature: &'static str) -> RegexError {
        RegexError::Unsupported {
            offset: self.pos,
            feature,
        }
    }

    fn alternation(&mut self) -> Result<RegexAst, RegexError> {
        let mut branches = vec![self.branch()?];
        while self.eat('|') {
            branches.push(self.branch()?);
        }
        if branches.len() == 1 {
            Ok(branches.pop().unwrap())
        } else {
            Ok(RegexAst::Union(branches))
        }
    }

    fn branch(&mut self) -> Result<RegexAst, RegexError> {
        let mut pieces = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            pieces.push(self.piece()?);
        }
        Ok(RegexAst::concat(pieces))
    }

    fn piece(&mut self) -> Result<RegexAst, RegexError> {
        let mut node = self.atom()?;
        loop {
            let wrap: fn(RegexAst) -> RegexAst = match self.peek() {
                Some('*') => RegexAst::star,
                Some('+') => RegexAst::plus,
                Some('?') => RegexAst::opt,
                Some('{') => return Err(self.unsupported("bounded repetition {m,n}")),
                _ => return Ok(node),
            };
            self.bump();
            // a quantifier directly followed by '?' or '+' is lazy or possessive
            match self.peek() {
                Some('?') => return Err(self.unsupported("lazy quantifier")),
                Some('+') => return Err(self.unsupported("possessive quantifier")),
                _ => {}
            }
            node = wrap(node);
        }
    }

    fn atom(&mut self) -> Result<RegexAst, RegexError> {
        let start = self.pos;
        let c = self.bump().ok_or_else(|| self.syntax("unexpected end of pattern"))?;
        match c {
            '(' => {
                if self.eat('?') && !self.eat(':') {
                    self.pos = start;
                    return Err(self.unsupported("lookaround or group flags"));
                }
                let inner = self.alternation()?;
                if !self.eat(')') {
                    return Err(self.syntax("missing ')'"));
                }
                Ok(inner)
            }
            '[' => self.class(),
            '.' => Ok(RegexAst::AnyChar),
            '\\' => match self.escape(false)? {
                Escaped::Char(cp) => Ok(RegexAst::Literal(cp)),
                Escaped::Set(set) => Ok(RegexAst::class(set)),
            },
            '*' | '+' | '?' => {
                self.pos = start;
                Err(self.syntax("quantifier without operand"))
            }
            '{' => {
                self.pos = start;
                Err(self.unsupported("bounded repetition {m,n}"))
            }
            '^' | '$' => {
                self.pos = start;
                Err(self.unsupported("anchor"))
            }
            ']' | '}' => {
                self.pos = start;
                Err(self.syntax("unescaped closing bracket"))
            }
            other => Ok(RegexAst::Literal(CodePoint::from(other))),
        }
    }

    fn class(&mut self) -> Result<RegexAst, RegexError> {
        let negated = self.eat('^');
        let mut parts: Vec<Interval> = Vec::new();
        let mut first = true;
        loop {
            let item_start = self.pos;
            let c = self.bump().ok_or_else(|| self.syntax("missing ']'"))?;
            let lo = match c {
                ']' if !first => break,
                '\\' => match self.escape(true)? {
                    Escaped::Char(cp) => cp,
                    Escaped::Set(set) => {
                        parts.extend_from_slice(set.parts());
                        first = false;
                        continue;
                    }
                },
                '[' if self.peek() == Some(':') => {
                    self.pos = item_start;
                    return Err(self.unsupported("POSIX character class"));
                }
                other => CodePoint::from(other),
            };
            first = false;
            // a '-' followed by ']' is a literal dash
            if self.peek() == Some('-') && self.src[self.pos + 1..].chars().next().is_some_and(|n| n != ']') {
                self.bump();
                let hi = match self.bump().ok_or_else(|| self.syntax("missing ']'"))? {
                    '\\' => match self.escape(true)? {
                        Escaped::Char(cp) => cp,
                        Escaped::Set(_) => return Err(self.syntax("class shorthand as range bound")),
                    },
                    other => CodePoint::from(other),
                };
                if hi < lo {
                    self.pos = item_start;
                    return Err(self.syntax("reversed range in class"));
                }
                parts.push(Interval::new(lo, hi));
            } else {
                parts.push(Interval::singleton(lo));
            }
        }
        let set = IntervalSet::normalize(parts);
        Ok(RegexAst::class(if negated { set.complement() } else { set }))
    }

    fn escape(&mut self, in_class: bool) -> Result<Escaped, RegexError> {
        let at = self.pos;
        let c = self.bump().ok_or_else(|| self.syntax("dangling '\\'"))?;
        let cp = |c: char| Ok(Escaped::Char(CodePoint::from(c)));
        let set = |ranges: &[(u32, u32)]| {
            IntervalSet::normalize(ranges.iter().map(|&(lo, hi)| Interval::from_u32(lo, hi).unwrap()))
        };
        let digits = set(&[(0x30, 0x39)]);
        let word = set(&[(0x30, 0x39), (0x41, 0x5A), (0x5F, 0x5F), (0x61, 0x7A)]);
        let space = set(&[(0x09, 0x0D), (0x20, 0x20)]);
        match c {
            'n' => cp('\n'),
            't' => cp('\t'),
            'r' => cp('\r'),
            'f' => cp('\u{c}'),
            'v' => cp('\u{b}'),
            '0' => cp('\0'),
            'd' => Ok(Escaped::Set(digits)),
            'D' => Ok(Escaped::Set(digits.complement())),
            'w' => Ok(Escaped::Set(word)),
            'W' => Ok(Escaped::Set(word.complement())),
            's' => Ok(Escaped::Set(space)),
            'S' => Ok(Escaped::Set(space.complement())),
            'x' => {
                let hex = self
                    .src
                    .get(self.pos..self.pos + 2)
                    .ok_or_else(|| self.syntax("short \\x escape"))?;
                let v = u32::from_str_radix(hex, 16).map_err(|_| self.syntax("bad \\x escape"))?;
                self.pos += 2;
                Ok(Escaped::Char(CodePoint::new(v).unwrap()))
            }
            'u' => {
                if !self.eat('{') {
                    return Err(self.syntax("expected '{' after \\u"));
                }
                let end = self.src[self.pos..]
                    .find('}')
                    .ok_or_else(|| self.syntax("unterminated \\u{"))?;
                let hex = &self.src[self.pos..self.pos + end];
                let v = u32::from_str_radix(hex, 16)
                    .ok()
                    .and_then(CodePoint::new)
                    .ok_or_else(|| self.syntax("bad \\u{} escape"))?;
                self.pos += end + 1;
                Ok(Escaped::Char(v))
            }
            '1'..='9' if !in_class => {
                self.pos = at - 1;
                Err(self.unsupported("backreference"))
            }
            'b' | 'B' | 'A' | 'z' | 'Z' if !in_class => {
                self.pos = at - 1;
                Err(self.unsupported("anchor"))
            }
            c if c.is_ascii_punctuation() => cp(c),
            _ => {
                self.pos = at - 1;
                Err(self.syntax("unknown escape"))
            }
        }
    }
}

enum Escaped {
    Char(CodePoint),
    Set(IntervalSet),
}

/// The canonical one-state automaton for `Σ*`.
pub fn sigma_star() -> SNfa {
    let q = StateId::new(0, 0);
    SNfa::new(
        [q],
        [Transition {
            src: q,
            label: Interval::FULL,
            dst: q,
        }],
        [q],
        [q],
    )
    .expect("sigma_star is well-formed")
    .remove_unreachable()
}

/// Chain automaton with `|w| + 1` states accepting exactly `w`.
pub fn word_automaton(w: &[CodePoint]) -> SNfa {
    let states: Vec<StateId> = (0..=w.len() as u32).map(|i| StateId::new(i, 0)).collect();
    let transitions = w.iter().enumerate().map(|(i, &c)| Transition {
        src: states[i],
        label: Interval::singleton(c),
        dst: states[i + 1],
    });
    SNfa::new(
        states.clone(),
        transitions.collect::<Vec<_>>(),
        [states[0]],
        [states[w.len()]],
    )
    .expect("word automaton is well-formed")
    .remove_unreachable()
}

/// Comparison operator of a length constraint `|x| op n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LengthOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl LengthOp {
    pub fn holds(self, len: u64, n: u64) -> bool {
        match self {
            LengthOp::Lt => len < n,
            LengthOp::Le => len <= n,
            LengthOp::Eq => len == n,
            LengthOp::Ge => len >= n,
            LengthOp::Gt => len > n,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            LengthOp::Lt => "<",
            LengthOp::Le => "<=",
            LengthOp::Eq => "=",
            LengthOp::Ge => ">=",
            LengthOp::Gt => ">",
        }
    }

    /// The operator with its operands swapped (`n op |x|` to `|x| op' n`).
    pub fn flipped(self) -> LengthOp {
        match self {
            LengthOp::Lt => LengthOp::Gt,
            LengthOp::Le => LengthOp::Ge,
            LengthOp::Eq => LengthOp::Eq,
            LengthOp::Ge => LengthOp::Le,
            LengthOp::Gt => LengthOp::Lt,
        }
    }
}

impl fmt::Display for LengthOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Counting automaton for `{ w | |w| op n }`.
pub fn length_automaton(op: LengthOp, n: u64, cap: u64) -> Result<SNfa, LengthBoundTooLarge> {
    if n > cap {
        return Err(LengthBoundTooLarge { bound: n, cap });
    }
    // chain of `len + 1` states over the whole alphabet
    let chain = |len: u64, accept: &dyn Fn(u64) -> bool, loop_last: bool| -> SNfa {
        let states: Vec<StateId> = (0..=len as u32).map(|i| StateId::new(i, 0)).collect();
        let mut transitions: Vec<Transition> = (0..len as usize)
            .map(|i| Transition {
                src: states[i],
                label: Interval::FULL,
                dst: states[i + 1],
            })
            .collect();
        if loop_last {
            let last = states[len as usize];
            transitions.push(Transition {
                src: last,
                label: Interval::FULL,
                dst: last,
            });
        }
        let accepting: Vec<StateId> = (0..=len).filter(|&i| accept(i)).map(|i| states[i as usize]).collect();
        SNfa::new(states.clone(), transitions, [states[0]], accepting)
            .expect("length automaton is well-formed")
            .remove_unreachable()
    };
    Ok(match op {
        LengthOp::Le => chain(n, &|_| true, false),
        LengthOp::Lt if n == 0 => chain(0, &|_| false, false),
        LengthOp::Lt => chain(n - 1, &|_| true, false),
        LengthOp::Eq => chain(n, &|i| i == n, false),
        LengthOp::Ge => chain(n, &|i| i == n, true),
        LengthOp::Gt => chain(n + 1, &|i| i == n + 1, true),
    })
}

/// Glushkov construction.
pub fn compile(ast: &RegexAst) -> SNfa {
    let mut g = Glushkov::default();
    let info = g.visit(ast);
    let initial = StateId::new(0, 0);
    let pos_state = |p: usize| StateId::new(p as u32 + 1, 0);
    let mut transitions = Vec::new();
    let mut push_into = |src: StateId, p: usize, labels: &[IntervalSet]| {
        for part in labels[p].parts() {
            transitions.push(Transition {
                src,
                label: *part,
                dst: pos_state(p),
            });
        }
    };
    for &p in &info.first {
        push_into(initial, p, &g.labels);
    }
    for (q, follow) in g.follow.iter().enumerate() {
        for &p in follow {
            push_into(pos_state(q), p, &g.labels);
        }
    }
    let mut accepting: Vec<StateId> = info.last.iter().map(|&p| pos_state(p)).collect();
    if info.nullable {
        accepting.push(initial);
    }
    let states = std::iter::once(initial).chain((0..g.labels.len()).map(pos_state));
    SNfa::new(states, transitions, [initial], accepting)
        .expect("position automaton is well-formed")
        .remove_unreachable()
}

#[derive(Default)]
struct Glushkov {
    labels: Vec<IntervalSet>,
    follow: Vec<BTreeSet<usize>>,
}

struct NodeInfo {
    nullable: bool,
    first: BTreeSet<usize>,
    last: BTreeSet<usize>,
}

impl Glushkov {
    fn position(&mut self, set: IntervalSet) -> NodeInfo {
        let p = self.labels.len();
        self.labels.push(set);
        self.follow.push(BTreeSet::new());
        NodeInfo {
            nullable: false,
            first: BTreeSet::from([p]),
            last: BTreeSet::from([p]),
        }
    }

    fn link(&mut self, from: &BTreeSet<usize>, to: &BTreeSet<usize>) {
        for &q in from {
            self.follow[q].extend(to.iter().copied());
        }
    }

    fn visit(&mut self, ast: &RegexAst) -> NodeInfo {
        match ast {
            RegexAst::Empty => NodeInfo {
                nullable: false,
                first: BTreeSet::new(),
                last: BTreeSet::new(),
            },
            RegexAst::Epsilon => NodeInfo {
                nullable: true,
                first: BTreeSet::new(),
                last: BTreeSet::new(),
            },
            RegexAst::Literal(c) => self.position(IntervalSet::from_interval(Interval::singleton(*c))),
            RegexAst::Class(set) => self.position(set.clone()),
            RegexAst::AnyChar => self.position(IntervalSet::full()),
            RegexAst::Concat(children) => {
                let mut acc = NodeInfo {
                    nullable: true,
                    first: BTreeSet::new(),
                    last: BTreeSet::new(),
                };
                for child in children {
                    let info = self.visit(child);
                    self.link(&acc.last, &info.first);
                    if acc.nullable {
                        acc.first.extend(info.first.iter().copied());
                    }
                    if info.nullable {
                        acc.last.extend(info.last);
                    } else {
                        acc.last = info.last;
                    }
                    acc.nullable &= info.nullable;
                }
                acc
            }
            RegexAst::Union(children) => {
                let mut acc = NodeInfo {
                    nullable: false,
                    first: BTreeSet::new(),
                    last: BTreeSet::new(),
                };
                for child in children {
                    let info = self.visit(child);
                    acc.nullable |= info.nullable;
                    acc.first.extend(info.first);
                    acc.last.extend(info.last);
                }
                acc
            }
            RegexAst::Star(child) | RegexAst::Plus(child) => {
                let mut info = self.visit(child);
                self.link(&info.last, &info.first);
                if matches!(ast, RegexAst::Star(_)) {
                    info.nullable = true;
                }
                info
            }
            RegexAst::Opt(child) => {
                let mut info = self.visit(child);
                info.nullable = true;
                info
            }
        }
    }
}

/// Reference matcher by structural recursion; shares nothing with the
/// automaton path and is used by tests.
pub fn matches_reference(ast: &RegexAst, w: &[CodePoint]) -> bool {
    fn char_ok(ast: &RegexAst, c: CodePoint) -> Option<bool> {
        match ast {
            RegexAst::Literal(x) => Some(*x == c),
            RegexAst::Class(set) => Some(set.contains(c)),
            RegexAst::AnyChar => Some(true),
            _ => None,
        }
    }
    fn m(ast: &RegexAst, w: &[CodePoint]) -> bool {
        if let Some(ok) = char_ok(ast, w.first().copied().unwrap_or(CodePoint::MIN)) {
            return w.len() == 1 && ok;
        }
        match ast {
            RegexAst::Empty => false,
            RegexAst::Epsilon => w.is_empty(),
            RegexAst::Concat(xs) => concat(xs, w),
            RegexAst::Union(xs) => xs.iter().any(|x| m(x, w)),
            RegexAst::Opt(x) => w.is_empty() || m(x, w),
            RegexAst::Star(x) => w.is_empty() || (1..=w.len()).any(|i| m(x, &w[..i]) && m(ast, &w[i..])),
            RegexAst::Plus(x) => {
                m(x, w) || (1..w.len()).any(|i| m(x, &w[..i]) && m(&RegexAst::Plus(x.clone()), &w[i..]))
            }
            _ => unreachable!(),
        }
    }
    fn concat(xs: &[RegexAst], w: &[CodePoint]) -> bool {
        match xs.split_first() {
            None => w.is_empty(),
            Some((head, rest)) => (0..=w.len()).any(|i| m(head, &w[..i]) && concat(rest, &w[i..])),
        }
    }
    m(ast, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Word;
    use proptest::prelude::*;

    fn cp(c: char) -> CodePoint {
        CodePoint::from(c)
    }

    fn iv(lo: char, hi: char) -> Interval {
        Interval::new(cp(lo), cp(hi))
    }

    fn words(alphabet: &[char], max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        let mut layer = vec![Word::empty()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for base in &layer {
                for &c in alphabet {
                    let mut x = base.clone();
                    x.push(cp(c));
                    next.push(x);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    #[test]
    fn parse_examples() {
        let expected = RegexAst::Plus(Box::new(RegexAst::Class(IntervalSet::normalize([
            iv('.', '.'),
            iv('A', 'Z'),
            iv('a', 'z'),
        ]))));
        assert_eq!(parse_regex("[a-zA-Z.]+").unwrap(), expected);
        assert_eq!(
            parse_regex("a|b").unwrap(),
            RegexAst::Union(vec![RegexAst::Literal(cp('a')), RegexAst::Literal(cp('b'))])
        );
        let script = parse_regex(".*<script>.*").unwrap();
        let RegexAst::Concat(xs) = script else {
            panic!("expected concat");
        };
        assert_eq!(xs.first(), Some(&RegexAst::star(RegexAst::AnyChar)));
        assert_eq!(xs.last(), Some(&RegexAst::star(RegexAst::AnyChar)));
        assert_eq!(xs.len(), 10);
        assert!(xs[1..9].iter().all(|x| matches!(x, RegexAst::Literal(_))));
    }

    #[test]
    fn parse_escapes_and_classes() {
        assert_eq!(parse_regex("\\/").unwrap(), RegexAst::Literal(cp('/')));
        assert_eq!(parse_regex("\\x41").unwrap(), RegexAst::Literal(cp('A')));
        assert_eq!(
            parse_regex("\\u{1F600}").unwrap(),
            RegexAst::Literal(CodePoint::new(0x1F600).unwrap())
        );
        assert_eq!(
            parse_regex("[]a]").unwrap(),
            RegexAst::Class(IntervalSet::normalize([iv(']', ']'), iv('a', 'a')]))
        );
        assert_eq!(
            parse_regex("[a-]").unwrap(),
            RegexAst::Class(IntervalSet::normalize([iv('-', '-'), iv('a', 'a')]))
        );
        let neg = parse_regex("[^a-z]").unwrap();
        assert_eq!(
            neg,
            RegexAst::Class(IntervalSet::from_interval(iv('a', 'z')).complement())
        );
        assert_eq!(parse_regex("").unwrap(), RegexAst::Epsilon);
        assert_eq!(parse_regex("(?:ab)").unwrap(), parse_regex("ab").unwrap());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_regex("(a"), Err(RegexError::Syntax { .. })));
        assert!(matches!(parse_regex("a)"), Err(RegexError::Syntax { offset: 1, .. })));
        assert!(matches!(parse_regex("*a"), Err(RegexError::Syntax { offset: 0, .. })));
        assert!(matches!(parse_regex("[z-a]"), Err(RegexError::Syntax { .. })));
        for (src, feature) in [
            ("(a)\\1", "backreference"),
            ("(?=a)", "lookaround or group flags"),
            ("a*?", "lazy quantifier"),
            ("a{2,3}", "bounded repetition {m,n}"),
            ("^a", "anchor"),
            ("a++", "possessive quantifier"),
        ] {
            match parse_regex(src) {
                Err(RegexError::Unsupported { feature: f, .. }) => assert_eq!(f, feature, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn compile_examples() {
        let eps = compile(&RegexAst::Epsilon);
        assert_eq!((eps.state_count(), eps.transition_count()), (1, 0));
        assert_eq!(eps.initial().collect::<Vec<_>>(), eps.accepting().collect::<Vec<_>>());

        // oracle: (ab)* over {a,b}, length <= 4
        let ab = compile_str("(ab)*").unwrap();
        for word in words(&['a', 'b'], 4) {
            let expected = word.len() % 2 == 0 && word.chunks(2).all(|ch| ch == [cp('a'), cp('b')]);
            assert_eq!(ab.accepts(&word), expected, "{word}");
        }

        let class = compile_str("[a-c]").unwrap();
        let labels: Vec<Interval> = class.transitions().map(|t| t.label).collect();
        assert_eq!(labels, vec![iv('a', 'c')]);

        let split = compile_str("[a-cx]").unwrap();
        assert_eq!(split.transition_count(), 2);
        assert!(compile(&RegexAst::Empty).is_empty());
        assert!(compile(&RegexAst::concat(vec![RegexAst::Literal(cp('a')), RegexAst::Empty])).is_empty());
    }

    #[test]
    fn sigma_star_is_canonical() {
        let s = sigma_star();
        assert_eq!((s.state_count(), s.transition_count()), (1, 1));
        assert!(s.accepts(&[]));
        assert!(s.accepts(&Word::from("hello \u{10FFFF}")));
        assert!(s.is_sigma_star());
    }

    #[test]
    fn word_automaton_examples() {
        let e = word_automaton(&[]);
        assert_eq!((e.state_count(), e.transition_count()), (1, 0));
        assert!(e.accepts(&[]));
        let ab = word_automaton(&Word::from("ab"));
        assert_eq!((ab.state_count(), ab.transition_count()), (3, 2));
        for word in words(&['a', 'b'], 3) {
            assert_eq!(ab.accepts(&word), word == Word::from("ab"));
        }
        assert!(word_automaton(&Word::from("/")).accepts(&Word::from("/")));
    }

    #[test]
    fn length_automaton_examples() {
        let le6 = length_automaton(LengthOp::Le, 6, DEFAULT_LENGTH_CAP).unwrap();
        assert_eq!(le6.state_count(), 7);
        assert_eq!(le6.accepting_count(), 7);
        assert!(le6.transitions().all(|t| t.label == Interval::FULL));
        let eq0 = length_automaton(LengthOp::Eq, 0, DEFAULT_LENGTH_CAP).unwrap();
        assert!(eq0.accepts(&[]) && !eq0.accepts(&Word::from("a")));
        let gt2 = length_automaton(LengthOp::Gt, 2, DEFAULT_LENGTH_CAP).unwrap();
        for word in words(&['a'], 4) {
            assert_eq!(gt2.accepts(&word), word.len() > 2);
        }
        assert!(length_automaton(LengthOp::Lt, 0, DEFAULT_LENGTH_CAP)
            .unwrap()
            .is_empty());
        assert_eq!(
            length_automaton(LengthOp::Le, 10_001, DEFAULT_LENGTH_CAP).unwrap_err(),
            LengthBoundTooLarge {
                bound: 10_001,
                cap: DEFAULT_LENGTH_CAP
            }
        );
        // every operator against brute-force length comparison
        for op in [LengthOp::Lt, LengthOp::Le, LengthOp::Eq, LengthOp::Ge, LengthOp::Gt] {
            for n in 0..4 {
                let a = length_automaton(op, n, DEFAULT_LENGTH_CAP).unwrap();
                for word in words(&['a', 'b'], 5) {
                    assert_eq!(a.accepts(&word), op.holds(word.len() as u64, n), "{op} {n} {word}");
                }
            }
        }
    }

    #[test]
    fn display_reparses() {
        for src in [
            "[a-zA-Z.]+",
            "a|b",
            "(ab)*c?",
            "\\/x\\.",
            "[^a]",
            "(a|())b",
            ".*<script>.*",
        ] {
            let ast = parse_regex(src).unwrap();
            assert_eq!(parse_regex(&ast.to_string()).unwrap(), ast, "{src} -> {ast}");
        }
    }

    fn arb_ast() -> impl Strategy<Value = RegexAst> {
        let leaf = prop_oneof![
            (97u32..=99).prop_map(|c| RegexAst::Literal(CodePoint::new(c).unwrap())),
            (97u32..=99, 97u32..=99).prop_map(|(a, b)| RegexAst::Class(IntervalSet::from_interval(
                Interval::from_u32(a.min(b), a.max(b)).unwrap()
            ))),
            Just(RegexAst::AnyChar),
            Just(RegexAst::Epsilon),
            Just(RegexAst::Empty),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 1..4).prop_map(RegexAst::Concat),
                prop::collection::vec(inner.clone(), 1..4).prop_map(RegexAst::Union),
                inner.clone().prop_map(RegexAst::star),
                inner.clone().prop_map(RegexAst::plus),
                inner.prop_map(RegexAst::opt),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn compile_agrees_with_reference_matcher(ast in arb_ast()) {
            let a = compile(&ast);
            prop_assert!(a.check_invariants().is_ok());
            prop_assert!(a.is_trim());
            for word in words(&['a', 'b', 'c'], 5) {
                prop_assert_eq!(a.accepts(&word), matches_reference(&ast, &word), "{} on {}", ast, word);
            }
        }

        #[test]
        fn negated_class_is_exact_complement(lo in 0u32..300, len in 0u32..40, probe in 0u32..400) {
            let hi = lo + len;
            let src = format!("[^\\u{{{lo:x}}}-\\u{{{hi:x}}}]");
            let a = compile_str(&src).unwrap();
            let c = CodePoint::new(probe).unwrap();
            prop_assert_eq!(a.accepts(&[c]), !(lo <= probe && probe <= hi));
            prop_assert!(a.accepts(&[CodePoint::MAX]));
        }
    }
}
