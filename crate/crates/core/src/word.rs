use std::fmt;
use std::ops::Deref;

use crate::interval::CodePoint;

/// A finite sequence of code points. The empty word is allowed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<CodePoint>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn from_code_points(chars: Vec<CodePoint>) -> Word {
        Word(chars)
    }

    pub fn chars(&self) -> &[CodePoint] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<CodePoint> {
        self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut chars = Vec::with_capacity(self.0.len() + other.0.len());
        chars.extend_from_slice(&self.0);
        chars.extend_from_slice(&other.0);
        Word(chars)
    }

    pub fn push(&mut self, c: CodePoint) {
        self.0.push(c);
    }

    /// Splits at `mid` code points.
    pub fn split_at(&self, mid: usize) -> (Word, Word) {
        let (a, b) = self.0.split_at(mid);
        (Word(a.to_vec()), Word(b.to_vec()))
    }

    /// Renders as an SMT-LIB 2.6 string literal body (without quotes).
    ///
    /// Printable ASCII other than `"` and `\` is emitted verbatim, `"` is
    /// doubled, everything else becomes `\u{..}`.
    pub fn to_smt_literal(&self) -> String {
        let mut out = String::new();
        for c in &self.0 {
            let v = c.value();
            match v {
                0x22 => out.push_str("\"\""),
                0x20..=0x7E if v != 0x5C => out.push(v as u8 as char),
                _ => out.push_str(&format!("\\u{{{v:x}}}")),
            }
        }
        out
    }
}

impl Deref for Word {
    type Target = [CodePoint];

    fn deref(&self) -> &[CodePoint] {
        &self.0
    }
}

impl From<&str> for Word {
    fn from(s: &str) -> Word {
        Word(s.chars().map(CodePoint::from).collect())
    }
}

impl From<Vec<CodePoint>> for Word {
    fn from(chars: Vec<CodePoint>) -> Word {
        Word(chars)
    }
}

impl FromIterator<CodePoint> for Word {
    fn from_iter<T: IntoIterator<Item = CodePoint>>(iter: T) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            match c.to_char() {
                Some(ch) if !ch.is_control() => write!(f, "{ch}")?,
                _ => write!(f, "\\u{{{:x}}}", c.value())?,
            }
        }
        Ok(())
    }
}
