//! Finite multisets over named elements.
//!
//! A [`Multiset`] is kept in canonical form: an element is either absent or
//! stored with a positive count. Equality, ordering and hashing all work on
//! that canonical form, so two multisets with the same multiplicities are
//! indistinguishable.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Token reserved for the built-in empty rule; never usable as a name.
pub const RESERVED_EPS: &str = "eps";

/// Returns true for a non-empty token over `[A-Za-z0-9_]`.
pub fn is_valid_token(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// A named element of a system's universe.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(Arc<str>);

impl Element {
    pub fn new(name: &str) -> Result<Self, MultisetError> {
        if !is_valid_token(name) {
            return Err(MultisetError::InvalidName(name.to_string()));
        }
        if name == RESERVED_EPS {
            return Err(MultisetError::ReservedName);
        }
        Ok(Element(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MultisetError {
    #[error("multiset does not contain the subtracted multiset")]
    NotContained,
    #[error("invalid element name `{0}`")]
    InvalidName(String),
    #[error("`eps` is reserved for the empty rule")]
    ReservedName,
    #[error("malformed multiset literal at column {column}: {message}")]
    Syntax { column: usize, message: String },
}

/// A finite multiset in canonical form (no zero counts stored).
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multiset {
    counts: BTreeMap<Element, u32>,
}

impl Multiset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a multiset where each listed element contributes one occurrence.
    pub fn from_elements<I: IntoIterator<Item = Element>>(items: I) -> Self {
        let mut m = Multiset::new();
        for e in items {
            m.add(e, 1);
        }
        m
    }

    /// Convenience constructor from raw names; panics on an invalid name.
    pub fn of(names: &[&str]) -> Self {
        Self::from_elements(
            names
                .iter()
                .map(|n| Element::new(n).expect("valid element name")),
        )
    }

    pub fn add(&mut self, e: Element, count: u32) {
        if count > 0 {
            *self.counts.entry(e).or_insert(0) += count;
        }
    }

    pub fn multiplicity(&self, a: &Element) -> u32 {
        self.counts.get(a).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total number of occurrences.
    pub fn size(&self) -> u64 {
        self.counts.values().map(|&c| u64::from(c)).sum()
    }

    /// Distinct elements with their counts, in element order.
    pub fn iter(&self) -> impl Iterator<Item = (&Element, u32)> + '_ {
        self.counts.iter().map(|(e, &c)| (e, c))
    }

    pub fn support(&self) -> impl Iterator<Item = &Element> + '_ {
        self.counts.keys()
    }

    /// `self ⊆ other`: every multiplicity in `self` is bounded by `other`.
    pub fn is_subset(&self, other: &Multiset) -> bool {
        self.counts.iter().all(|(e, &c)| other.multiplicity(e) >= c)
    }

    /// Additive union: multiplicities are summed.
    pub fn sum(&self, other: &Multiset) -> Multiset {
        let mut out = self.clone();
        for (e, &c) in &other.counts {
            out.add(e.clone(), c);
        }
        out
    }

    /// `self ∖ other`, defined only when `other ⊆ self`.
    pub fn difference(&self, other: &Multiset) -> Result<Multiset, MultisetError> {
        if !other.is_subset(self) {
            return Err(MultisetError::NotContained);
        }
        let mut out = self.clone();
        for (e, &c) in &other.counts {
            let slot = out.counts.get_mut(e).expect("checked by subset");
            *slot -= c;
            if *slot == 0 {
                out.counts.remove(e);
            }
        }
        Ok(out)
    }

    /// True if the two multisets share at least one element.
    pub fn intersects(&self, other: &Multiset) -> bool {
        self.counts.keys().any(|e| other.counts.contains_key(e))
    }

    /// Parses a literal such as `{A, A, B}` or `{}`. Element names are checked
    /// for well-formedness only; universe membership is the caller's concern.
    pub fn parse_literal(text: &str) -> Result<Multiset, MultisetError> {
        let syntax = |column: usize, message: &str| MultisetError::Syntax {
            column,
            message: message.to_string(),
        };
        let trimmed_start = text.len() - text.trim_start().len();
        let t = text.trim();
        if !t.starts_with('{') {
            return Err(syntax(trimmed_start + 1, "expected `{`"));
        }
        if !t.ends_with('}') || t.len() < 2 {
            return Err(syntax(trimmed_start + t.len(), "expected `}`"));
        }
        let inner = &t[1..t.len() - 1];
        let mut m = Multiset::new();
        if inner.trim().is_empty() {
            return Ok(m);
        }
        let mut offset = trimmed_start + 2;
        for part in inner.split(',') {
            let name = part.trim();
            let col = offset + (part.len() - part.trim_start().len());
            if name.is_empty() {
                return Err(syntax(col, "empty element in multiset literal"));
            }
            let e = Element::new(name).map_err(|e| match e {
                MultisetError::ReservedName => MultisetError::ReservedName,
                _ => syntax(col, &format!("invalid element name `{name}`")),
            })?;
            m.add(e, 1);
            offset += part.len() + 1;
        }
        Ok(m)
    }
}

impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for (e, &c) in &self.counts {
            for _ in 0..c {
                if !first {
                    f.write_str(", ")?;
                }
                first = false;
                write!(f, "{e}")?;
            }
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
