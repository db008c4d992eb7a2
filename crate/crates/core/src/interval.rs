//! Closed code-point intervals, the label algebra of the symbolic automata.
//!
//! The alphabet is the integer range `[0, 0x10FFFF]`. Surrogate code points
//! are ordinary members of the alphabet; nothing here distinguishes them.
//!
//! An [`Interval`] may be empty. Empty intervals are values, not errors, and
//! are always stored as the canonical `[1,0]` so that equality is structural.
//! [`IntervalSet`] is the normalized union form used when compiling regex
//! character classes.

use std::fmt;

use thiserror::Error;

/// Largest code point of the alphabet.
pub const MAX_CODE_POINT: u32 = 0x10FFFF;

/// Default cap for [`Interval::enumerate`].
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 16;

/// A single alphabet element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CodePoint(u32);

impl CodePoint {
    pub const MIN: CodePoint = CodePoint(0);
    pub const MAX: CodePoint = CodePoint(MAX_CODE_POINT);

    /// Returns `None` above `0x10FFFF`.
    pub const fn new(value: u32) -> Option<CodePoint> {
        if value <= MAX_CODE_POINT {
            Some(CodePoint(value))
        } else {
            None
        }
    }

    pub const fn value(self) -> u32 {
        self.0
    }

    /// The matching `char`, or `None` for surrogates.
    pub fn to_char(self) -> Option<char> {
        char::from_u32(self.0)
    }
}

impl From<char> for CodePoint {
    fn from(c: char) -> Self {
        CodePoint(c as u32)
    }
}

impl fmt::Display for CodePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("interval {interval} has {size} elements, above the enumeration cap {cap}")]
pub struct EnumerationTooLarge {
    pub interval: Interval,
    pub size: u64,
    pub cap: u64,
}

/// The closed range `{n | lo <= n <= hi}`; empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    lo: CodePoint,
    hi: CodePoint,
}

impl Interval {
    /// The canonical empty interval `[1,0]`.
    pub const EMPTY: Interval = Interval {
        lo: CodePoint(1),
        hi: CodePoint(0),
    };

    /// The whole alphabet.
    pub const FULL: Interval = Interval {
        lo: CodePoint::MIN,
        hi: CodePoint::MAX,
    };

    pub fn new(lo: CodePoint, hi: CodePoint) -> Interval {
        if lo > hi {
            Interval::EMPTY
        } else {
            Interval { lo, hi }
        }
    }

    /// Builds from raw integers, clamping `hi` to the alphabet. Returns `None`
    /// if `lo` is outside the alphabet.
    pub fn from_u32(lo: u32, hi: u32) -> Option<Interval> {
        let lo = CodePoint::new(lo)?;
        let hi = CodePoint(hi.min(MAX_CODE_POINT));
        Some(Interval::new(lo, hi))
    }

    pub fn singleton(c: CodePoint) -> Interval {
        Interval { lo: c, hi: c }
    }

    pub fn lo(self) -> CodePoint {
        self.lo
    }

    pub fn hi(self) -> CodePoint {
        self.hi
    }

    /// `[max(lo, lo'), min(hi, hi')]`.
    pub fn intersection(self, other: Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn is_nonempty(self) -> bool {
        self.lo <= self.hi
    }

    pub fn is_empty(self) -> bool {
        !self.is_nonempty()
    }

    pub fn contains(self, e: CodePoint) -> bool {
        self.lo <= e && e <= self.hi
    }

    /// Number of code points in the interval.
    pub fn len(self) -> u64 {
        if self.is_empty() {
            0
        } else {
            u64::from(self.hi.0 - self.lo.0) + 1
        }
    }

    /// Lists every member, refusing intervals larger than `cap`.
    pub fn enumerate(self, cap: u64) -> Result<Vec<CodePoint>, EnumerationTooLarge> {
        let size = self.len();
        if size > cap {
            return Err(EnumerationTooLarge {
                interval: self,
                size,
                cap,
            });
        }
        if size == 0 {
            return Ok(Vec::new());
        }
        Ok((self.lo.0..=self.hi.0).map(CodePoint).collect())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo.0, self.hi.0)
    }
}

/// A finite union of intervals in normal form: parts are non-empty, sorted,
/// pairwise disjoint and separated by at least one missing code point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> IntervalSet {
        IntervalSet::default()
    }

    pub fn full() -> IntervalSet {
        IntervalSet {
            parts: vec![Interval::FULL],
        }
    }

    pub fn from_interval(i: Interval) -> IntervalSet {
        IntervalSet::normalize(vec![i])
    }

    /// Sorts and merges arbitrary (possibly empty, overlapping) intervals.
    pub fn normalize(raw: impl IntoIterator<Item = Interval>) -> IntervalSet {
        let mut parts: Vec<Interval> = raw.into_iter().filter(|i| i.is_nonempty()).collect();
        parts.sort_unstable();
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for part in parts {
            match merged.last_mut() {
                Some(last) if part.lo.0 <= last.hi.0.saturating_add(1) => {
                    if part.hi > last.hi {
                        last.hi = part.hi;
                    }
                }
                _ => merged.push(part),
            }
        }
        IntervalSet { parts: merged }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, e: CodePoint) -> bool {
        // parts are sorted and disjoint
        let idx = self.parts.partition_point(|p| p.hi < e);
        self.parts.get(idx).is_some_and(|p| p.contains(e))
    }

    /// Total number of code points.
    pub fn len(&self) -> u64 {
        self.parts.iter().map(|p| p.len()).sum()
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::normalize(self.parts.iter().chain(other.parts.iter()).copied())
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() && j < other.parts.len() {
            let (a, b) = (self.parts[i], other.parts[j]);
            let meet = a.intersection(b);
            if meet.is_nonempty() {
                out.push(meet);
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet { parts: out }
    }

    /// Complement relative to `[0, 0x10FFFF]`.
    pub fn complement(&self) -> IntervalSet {
        let mut out = Vec::with_capacity(self.parts.len() + 1);
        let mut next = 0u32;
        for part in &self.parts {
            if part.lo.0 > next {
                out.push(Interval::new(CodePoint(next), CodePoint(part.lo.0 - 1)));
            }
            next = part.hi.0 + 1;
        }
        if next <= MAX_CODE_POINT {
            out.push(Interval::new(CodePoint(next), CodePoint::MAX));
        }
        IntervalSet { parts: out }
    }
}

impl FromIterator<Interval> for IntervalSet {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        IntervalSet::normalize(iter)
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, part) in self.parts.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{part}")?;
        }
        f.write_str("}")
    }
}
