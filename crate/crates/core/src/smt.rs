//! SMT-LIB reader and printer for the string fragment.
//!
//! Grammar accepted (after s-expression parsing):
//!
//! ```text
//! script     ::= command*
//! command    ::= (declare-fun <sym> () String) | (declare-const <sym> String)
//!              | (assert <formula>) | (check-sat) | (get-model)
//!              | (set-logic ..) | (set-option ..) | (set-info ..) | (exit)
//! formula    ::= (and <formula>*) | (or <formula>*)
//!              | (str.in_re <sym> <re>) | (str.in.re <sym> <re>)
//!              | (= <sym> <strterm>) | (= <lit-term> <lit-term>)
//!              | (<cmp> (str.len <sym>) <num>) | (<cmp> <num> (str.len <sym>))
//! cmp        ::= < | <= | = | >= | >
//! strterm    ::= <sym> | <string> | (str.++ <strterm>+)
//! re         ::= (str.to_re <lit-term>) | (str.to.re <lit-term>)
//!              | (re.++ <re>+) | (re.union <re>+) | (re.* <re>) | (re.+ <re>)
//!              | (re.opt <re>) | (re.range <string> <string>)
//!              | re.allchar | re.all | re.none
//! ```
//!
//! String literals use the 2.6 escapes: `""` for a quote, `\u{h..}` and
//! `\uhhhh`. Braced escapes take up to six hex digits so that every code point
//! up to `10FFFF` has a spelling. Any other backslash is literal.
//! `get-model` and the `set-*`/`exit` commands are accepted and ignored.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::constraints::{SurfaceConstraint, Term, VarId};
use crate::interval::{CodePoint, Interval, IntervalSet};
use crate::regex::{LengthOp, RegexAst};
use crate::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmtError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unsupported construct at byte {offset}: {what}")]
    Unsupported { offset: usize, what: String },
    #[error("variable {name} has sort {sort}, only String is supported")]
    NonStringSort { name: String, sort: String },
    #[error("duplicate declaration of {0}")]
    DuplicateDeclaration(String),
    #[error("undeclared variable {name} at byte {offset}")]
    Undeclared { offset: usize, name: String },
}

impl SmtError {
    /// Whether the input is well formed but outside the fragment.
    pub fn is_unsupported(&self) -> bool {
        matches!(self, SmtError::Unsupported { .. } | SmtError::NonStringSort { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SmtScript {
    pub declarations: Vec<VarId>,
    pub assertions: Vec<SurfaceConstraint>,
    pub has_check_sat: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sexp {
    Symbol(usize, String),
    Numeral(usize, u64),
    Str(usize, Word),
    List(usize, Vec<Sexp>),
}

impl Sexp {
    fn offset(&self) -> usize {
        match self {
            Sexp::Symbol(o, _) | Sexp::Numeral(o, _) | Sexp::Str(o, _) | Sexp::List(o, _) => *o,
        }
    }

    fn head(&self) -> Option<(&str, &[Sexp])> {
        match self {
            Sexp::List(_, items) => match items.split_first() {
                Some((Sexp::Symbol(_, s), rest)) => Some((s, rest)),
                _ => None,
            },
            _ => None,
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> SmtError {
    SmtError::Syntax {
        offset,
        message: message.into(),
    }
}

fn unsupported(offset: usize, what: impl Into<String>) -> SmtError {
    SmtError::Unsupported {
        offset,
        what: what.into(),
    }
}

struct Reader<'a> {
    src: &'a str,
    pos: usize,
}

impl Reader<'_> {
    fn skip_ws(&mut self) {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() {
            match bytes[self.pos] {
                b';' => {
                    while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn read_all(&mut self) -> Result<Vec<Sexp>, SmtError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            if self.pos >= self.src.len() {
                return Ok(out);
            }
            out.push(self.read()?);
        }
    }

    fn read(&mut self) -> Result<Sexp, SmtError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(syntax(start, "unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        None => return Err(syntax(start, "unclosed parenthesis")),
                        Some(')') => {
                            self.pos += 1;
                            return Ok(Sexp::List(start, items));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(')') => Err(syntax(start, "unexpected ')'")),
            Some('"') => self.read_string(),
            Some('|') => {
                let end = self.src[start + 1..]
                    .find('|')
                    .ok_or_else(|| syntax(start, "unterminated quoted symbol"))?;
                self.pos = start + 1 + end + 1;
                Ok(Sexp::Symbol(start, self.src[start + 1..start + 1 + end].to_string()))
            }
            Some(_) => {
                let len = self.src[start..]
                    .find(|c: char| c.is_whitespace() || "()\";|".contains(c))
                    .unwrap_or(self.src.len() - start);
                self.pos = start + len;
                let tok = &self.src[start..self.pos];
                if tok.bytes().all(|b| b.is_ascii_digit()) {
                    if tok.len() > 1 && tok.starts_with('0') {
                        return Err(syntax(start, "numeral with leading zero"));
                    }
                    let n = tok.parse().map_err(|_| syntax(start, "numeral out of range"))?;
                    Ok(Sexp::Numeral(start, n))
                } else {
                    Ok(Sexp::Symbol(start, tok.to_string()))
                }
            }
        }
    }

    fn read_string(&mut self) -> Result<Sexp, SmtError> {
        let start = self.pos;
        self.pos += 1;
        let mut raw = String::new();
        loop {
            let rest = &self.src[self.pos..];
            let q = rest
                .find('"')
                .ok_or_else(|| syntax(start, "unterminated string literal"))?;
            raw.push_str(&rest[..q]);
            self.pos += q + 1;
            if self.src[self.pos..].starts_with('"') {
                raw.push('"');
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(Sexp::Str(start, unescape(&raw)))
    }
}

/// Decodes the `\u` escapes of a string literal body whose quotes are
/// already undoubled.
pub fn unescape(raw: &str) -> Word {
    let chars: Vec<char> = raw.chars().collect();
    let mut out = Vec::with_capacity(chars.len());
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '\\' && chars.get(i + 1) == Some(&'u') {
            if let Some((cp, used)) = decode_u(&chars[i + 2..]) {
                out.push(cp);
                i += 2 + used;
                continue;
            }
        }
        out.push(CodePoint::from(chars[i]));
        i += 1;
    }
    Word::from(out)
}

fn decode_u(rest: &[char]) -> Option<(CodePoint, usize)> {
    let hex = |cs: &[char]| -> Option<u32> {
        if cs.is_empty() || !cs.iter().all(|c| c.is_ascii_hexdigit()) {
            return None;
        }
        u32::from_str_radix(&cs.iter().collect::<String>(), 16).ok()
    };
    if rest.first() == Some(&'{') {
        let close = rest.iter().take(8).position(|&c| c == '}')?;
        let v = hex(&rest[1..close])?;
        Some((CodePoint::new(v)?, close + 1))
    } else if rest.len() >= 4 {
        Some((CodePoint::new(hex(&rest[..4])?)?, 4))
    } else {
        None
    }
}

struct Converter {
    declared: BTreeSet<String>,
}

impl Converter {
    fn var(&self, e: &Sexp) -> Result<VarId, SmtError> {
        match e {
            Sexp::Symbol(o, name) => {
                if self.declared.contains(name) {
                    Ok(VarId::new(name.clone()))
                } else {
                    Err(SmtError::Undeclared {
                        offset: *o,
                        name: name.clone(),
                    })
                }
            }
            other => Err(unsupported(other.offset(), "expected a string variable")),
        }
    }

    fn is_var(&self, e: &Sexp) -> bool {
        matches!(e, Sexp::Symbol(_, name) if self.declared.contains(name))
    }

    fn str_terms(&self, e: &Sexp, out: &mut Vec<Term>) -> Result<(), SmtError> {
        match e {
            Sexp::Str(_, w) => out.push(Term::Lit(w.clone())),
            Sexp::Symbol(..) => out.push(Term::Var(self.var(e)?)),
            _ => match e.head() {
                Some(("str.++", args)) if !args.is_empty() => {
                    for a in args {
                        self.str_terms(a, out)?;
                    }
                }
                Some((op, _)) => return Err(unsupported(e.offset(), format!("string operator {op}"))),
                None => return Err(unsupported(e.offset(), "string term")),
            },
        }
        Ok(())
    }

    /// A ground string term, concatenated.
    fn ground(&self, e: &Sexp) -> Result<Option<Word>, SmtError> {
        let mut terms = Vec::new();
        self.str_terms(e, &mut terms)?;
        let mut w = Word::empty();
        for t in terms {
            match t {
                Term::Lit(l) => w = w.concat(&l),
                Term::Var(_) => return Ok(None),
            }
        }
        Ok(Some(w))
    }

    fn length_of<'e>(&self, e: &'e Sexp) -> Option<&'e Sexp> {
        match e.head() {
            Some(("str.len", [x])) => Some(x),
            _ => None,
        }
    }

    fn formula(&self, e: &Sexp, out: &mut Vec<SurfaceConstraint>) -> Result<(), SmtError> {
        let (op, args) = e
            .head()
            .ok_or_else(|| unsupported(e.offset(), "non-application formula"))?;
        match (op, args) {
            ("and", _) => {
                for a in args {
                    self.formula(a, out)?;
                }
            }
            ("or", _) => {
                let mut branches = Vec::new();
                for a in args {
                    let mut conj = Vec::new();
                    self.formula(a, &mut conj)?;
                    branches.push(conj);
                }
                out.push(SurfaceConstraint::Or(branches));
            }
            ("str.in_re" | "str.in.re", [x, r]) => {
                out.push(SurfaceConstraint::Membership(self.var(x)?, self.regex(r)?));
            }
            ("<" | "<=" | "=" | ">=" | ">", [lhs, rhs])
                if self.length_of(lhs).is_some() || self.length_of(rhs).is_some() =>
            {
                let base = match op {
                    "<" => LengthOp::Lt,
                    "<=" => LengthOp::Le,
                    "=" => LengthOp::Eq,
                    ">=" => LengthOp::Ge,
                    _ => LengthOp::Gt,
                };
                let (x, n, op) = match (self.length_of(lhs), lhs, self.length_of(rhs), rhs) {
                    (Some(x), _, None, Sexp::Numeral(_, n)) => (x, *n, base),
                    (None, Sexp::Numeral(_, n), Some(x), _) => (x, *n, base.flipped()),
                    _ => {
                        return Err(unsupported(
                            e.offset(),
                            "length constraint must compare with an integer constant",
                        ))
                    }
                };
                out.push(SurfaceConstraint::Length(self.var(x)?, op, n));
            }
            ("=", [lhs, rhs]) => {
                if self.is_var(lhs) {
                    let mut terms = Vec::new();
                    self.str_terms(rhs, &mut terms)?;
                    out.push(SurfaceConstraint::Equation(self.var(lhs)?, terms));
                } else {
                    match (self.ground(lhs)?, self.ground(rhs)?) {
                        (Some(a), Some(b)) => out.push(SurfaceConstraint::LiteralEquality(a, b)),
                        _ => {
                            return Err(unsupported(
                                e.offset(),
                                "equation whose left-hand side is not a variable",
                            ))
                        }
                    }
                }
            }
            _ => return Err(unsupported(e.offset(), format!("formula operator {op}/{}", args.len()))),
        }
        Ok(())
    }

    fn regex(&self, e: &Sexp) -> Result<RegexAst, SmtError> {
        match e {
            Sexp::Symbol(_, s) if s == "re.allchar" => return Ok(RegexAst::AnyChar),
            Sexp::Symbol(_, s) if s == "re.all" => return Ok(RegexAst::star(RegexAst::AnyChar)),
            Sexp::Symbol(_, s) if s == "re.none" => return Ok(RegexAst::Empty),
            _ => {}
        }
        let (op, args) = e
            .head()
            .ok_or_else(|| unsupported(e.offset(), "regular expression term"))?;
        let many = |args: &[Sexp]| args.iter().map(|a| self.regex(a)).collect::<Result<Vec<_>, _>>();
        Ok(match (op, args) {
            ("str.to_re" | "str.to.re", [s]) => match self.ground(s)? {
                Some(w) => RegexAst::word(&w),
                None => return Err(unsupported(s.offset(), "non-constant argument of str.to_re")),
            },
            ("re.++", [_, ..]) => RegexAst::concat(many(args)?),
            ("re.union", [_, ..]) => {
                let children = many(args)?;
                if children.iter().all(|c| matches!(c, RegexAst::Class(_))) {
                    let set = children.iter().fold(IntervalSet::empty(), |acc, c| match c {
                        RegexAst::Class(s) => acc.union(s),
                        _ => acc,
                    });
                    RegexAst::class(set)
                } else {
                    RegexAst::union(children)
                }
            }
            ("re.*", [r]) => RegexAst::star(self.regex(r)?),
            ("re.+", [r]) => RegexAst::plus(self.regex(r)?),
            ("re.opt", [r]) => RegexAst::opt(self.regex(r)?),
            ("re.range", [Sexp::Str(_, lo), Sexp::Str(_, hi)]) => match (&lo[..], &hi[..]) {
                // non-singleton bounds denote the empty language
                ([lo], [hi]) if lo <= hi => RegexAst::class(IntervalSet::from_interval(Interval::new(*lo, *hi))),
                _ => RegexAst::Empty,
            },
            _ => {
                return Err(unsupported(
                    e.offset(),
                    format!("regular expression operator {op}/{}", args.len()),
                ))
            }
        })
    }
}

/// Parses a script in the supported fragment.
pub fn parse_smt(src: &str) -> Result<SmtScript, SmtError> {
    let commands = Reader { src, pos: 0 }.read_all()?;
    let mut conv = Converter {
        declared: BTreeSet::new(),
    };
    let mut script = SmtScript::default();
    for cmd in &commands {
        let (name, args) = cmd.head().ok_or_else(|| syntax(cmd.offset(), "expected a command"))?;
        match (name, args) {
            ("declare-fun", [Sexp::Symbol(_, v), Sexp::List(_, params), sort]) if params.is_empty() => {
                declare(&mut conv, &mut script, v, sort)?;
            }
            ("declare-const", [Sexp::Symbol(_, v), sort]) => declare(&mut conv, &mut script, v, sort)?,
            ("declare-fun", _) => return Err(unsupported(cmd.offset(), "declare-fun with parameters")),
            ("assert", [f]) => conv.formula(f, &mut script.assertions)?,
            ("check-sat", []) => script.has_check_sat = true,
            ("get-model" | "exit" | "set-logic" | "set-option" | "set-info", _) => {}
            _ => return Err(unsupported(cmd.offset(), format!("command {name}"))),
        }
    }
    Ok(script)
}

fn declare(conv: &mut Converter, script: &mut SmtScript, name: &str, sort: &Sexp) -> Result<(), SmtError> {
    match sort {
        Sexp::Symbol(_, s) if s == "String" => {}
        other => {
            return Err(SmtError::NonStringSort {
                name: name.to_string(),
                sort: render_sexp(other),
            })
        }
    }
    if !conv.declared.insert(name.to_string()) {
        return Err(SmtError::DuplicateDeclaration(name.to_string()));
    }
    script.declarations.push(VarId::new(name));
    Ok(())
}

fn render_sexp(e: &Sexp) -> String {
    match e {
        Sexp::Symbol(_, s) => s.clone(),
        Sexp::Numeral(_, n) => n.to_string(),
        Sexp::Str(_, w) => format!("\"{}\"", w.to_smt_literal()),
        Sexp::List(_, items) => format!("({})", items.iter().map(render_sexp).collect::<Vec<_>>().join(" ")),
    }
}

/// A variable name as an SMT-LIB symbol, `|quoted|` unless simple.
pub fn print_symbol(v: &VarId) -> String {
    let simple = !v.name().is_empty()
        && !v.name().starts_with(|c: char| c.is_ascii_digit())
        && v.name()
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        v.name().to_string()
    } else {
        format!("|{}|", v.name())
    }
}

fn literal(w: &[CodePoint]) -> String {
    format!("\"{}\"", Word::from(w.to_vec()).to_smt_literal())
}

/// Prints a regular expression as an SMT-LIB term.
pub fn print_regex(r: &RegexAst) -> String {
    fn go(r: &RegexAst, out: &mut String) {
        let list = |out: &mut String, op: &str, xs: &[RegexAst]| {
            write!(out, "({op}").unwrap();
            for x in xs {
                out.push(' ');
                go(x, out);
            }
            out.push(')');
        };
        match r {
            RegexAst::Empty => out.push_str("re.none"),
            RegexAst::Epsilon => out.push_str("(str.to_re \"\")"),
            RegexAst::Literal(c) => write!(out, "(str.to_re {})", literal(&[*c])).unwrap(),
            RegexAst::AnyChar => out.push_str("re.allchar"),
            RegexAst::Class(set) => {
                let ranges: Vec<String> = set
                    .parts()
                    .iter()
                    .map(|i| format!("(re.range {} {})", literal(&[i.lo()]), literal(&[i.hi()])))
                    .collect();
                if ranges.len() == 1 {
                    out.push_str(&ranges[0]);
                } else {
                    write!(out, "(re.union {})", ranges.join(" ")).unwrap();
                }
            }
            RegexAst::Concat(xs) => list(out, "re.++", xs),
            RegexAst::Union(xs) => list(out, "re.union", xs),
            RegexAst::Star(x) => list(out, "re.*", std::slice::from_ref(x)),
            RegexAst::Plus(x) => list(out, "re.+", std::slice::from_ref(x)),
            RegexAst::Opt(x) => list(out, "re.opt", std::slice::from_ref(x)),
        }
    }
    let mut out = String::new();
    go(r, &mut out);
    out
}

fn print_term(t: &Term) -> String {
    match t {
        Term::Var(v) => print_symbol(v),
        Term::Lit(w) => literal(w),
    }
}

/// Prints one surface constraint as a formula.
pub fn print_constraint(c: &SurfaceConstraint) -> String {
    match c {
        SurfaceConstraint::Membership(x, r) => format!("(str.in_re {} {})", print_symbol(x), print_regex(r)),
        SurfaceConstraint::Equation(x, terms) => {
            let rhs = match terms.as_slice() {
                [t] => print_term(t),
                ts => format!("(str.++ {})", ts.iter().map(print_term).collect::<Vec<_>>().join(" ")),
            };
            format!("(= {} {rhs})", print_symbol(x))
        }
        SurfaceConstraint::Length(x, op, n) => format!("({} (str.len {}) {n})", op.symbol(), print_symbol(x)),
        SurfaceConstraint::Or(branches) => {
            let parts: Vec<String> = branches
                .iter()
                .map(|conj| match conj.as_slice() {
                    [single] if !matches!(single, SurfaceConstraint::Or(_)) => print_constraint(single),
                    cs => format!(
                        "(and{})",
                        cs.iter()
                            .map(|c| format!(" {}", print_constraint(c)))
                            .collect::<String>()
                    ),
                })
                .collect();
            format!("(or{})", parts.iter().map(|p| format!(" {p}")).collect::<String>())
        }
        SurfaceConstraint::LiteralEquality(a, b) => format!("(= {} {})", literal(a), literal(b)),
    }
}

/// Prints a whole script, one command per line.
pub fn print_smt(s: &SmtScript) -> String {
    let mut out = String::new();
    for v in &s.declarations {
        writeln!(out, "(declare-fun {} () String)", print_symbol(v)).unwrap();
    }
    for c in &s.assertions {
        writeln!(out, "(assert {})", print_constraint(c)).unwrap();
    }
    if s.has_check_sat {
        out.push_str("(check-sat)\n");
    }
    out
}
