//! DNS names, name patterns and finite sets of patterns.
//!
//! Three pattern forms are supported:
//!
//! | text            | pattern    | denotes                                  |
//! |-----------------|------------|------------------------------------------|
//! | `example.com`   | `Exact`    | exactly that name                        |
//! | `*.example.com` | `Wildcard` | one extra label: `foo.example.com`       |
//! | `.example.com`  | `Subtree`  | proper subdomains at any depth           |
//!
//! A wildcard never matches more than one label, so `*.example.com` does not
//! match `bar.foo.example.com`. A subtree excludes its own suffix, so
//! `.example.com` does not match `example.com`.
//!
//! [`NameSet`] is either universal or a finite, normalized set of patterns.
//! Intersection of two patterns is always empty or one of the two operands,
//! which is what keeps the set algebra closed and finite.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cert::Certificate;
use crate::Error;

/// A lowercase ASCII DNS name, stored leftmost label first.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DnsName {
    labels: Vec<String>,
}

impl DnsName {
    pub fn from_labels<I, S>(labels: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let labels: Vec<String> = labels
            .into_iter()
            .map(|l| l.as_ref().to_ascii_lowercase())
            .collect();
        if labels.is_empty() {
            return Err(Error::InvalidName("empty name".into()));
        }
        for label in &labels {
            let ok = !label.is_empty()
                && label.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-');
            if !ok {
                return Err(Error::InvalidName(format!("bad label {label:?}")));
            }
        }
        Ok(DnsName { labels })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn depth(&self) -> usize {
        self.labels.len()
    }

    /// True when `self` ends with all labels of `suffix`, and has more.
    pub fn is_proper_subdomain_of(&self, suffix: &DnsName) -> bool {
        self.labels.len() > suffix.labels.len() && self.labels.ends_with(&suffix.labels)
    }

    /// True when `self` is exactly one label below `suffix`.
    pub fn is_child_of(&self, suffix: &DnsName) -> bool {
        self.labels.len() == suffix.labels.len() + 1 && self.labels.ends_with(&suffix.labels)
    }

    /// Prepends a label.
    pub fn child(&self, label: &str) -> Result<DnsName, Error> {
        DnsName::from_labels(std::iter::once(label).chain(self.labels.iter().map(String::as_str)))
    }
}

impl FromStr for DnsName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s.is_empty() {
            return Err(Error::InvalidName("empty name".into()));
        }
        DnsName::from_labels(s.split('.'))
            .map_err(|e| Error::InvalidName(format!("{s:?}: {e}")))
    }
}

impl fmt::Display for DnsName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.labels.join("."))
    }
}

impl fmt::Debug for DnsName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DnsName({self})")
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NamePattern {
    Exact(DnsName),
    /// `*.suffix`
    Wildcard(DnsName),
    /// `.suffix`
    Subtree(DnsName),
}

impl NamePattern {
    pub fn matches(&self, name: &DnsName) -> bool {
        match self {
            NamePattern::Exact(n) => n == name,
            NamePattern::Wildcard(suffix) => name.is_child_of(suffix),
            NamePattern::Subtree(suffix) => name.is_proper_subdomain_of(suffix),
        }
    }

    /// Denotational containment: every name matched by `self` is matched by
    /// `other`.
    pub fn is_subsumed_by(&self, other: &NamePattern) -> bool {
        use NamePattern::*;
        match (self, other) {
            (Exact(x), p) => p.matches(x),
            (Wildcard(s), Wildcard(t)) => s == t,
            (Wildcard(s), Subtree(t)) => s == t || s.is_proper_subdomain_of(t),
            (Subtree(s), Subtree(t)) => s == t || s.is_proper_subdomain_of(t),
            (Wildcard(_), Exact(_)) | (Subtree(_), Exact(_)) | (Subtree(_), Wildcard(_)) => false,
        }
    }

    /// Intersection of two patterns, which is either empty or one of them.
    pub fn intersect(&self, other: &NamePattern) -> Option<NamePattern> {
        use NamePattern::*;
        match (self, other) {
            (Exact(x), Exact(y)) => (x == y).then(|| self.clone()),
            (Exact(x), p) | (p, Exact(x)) => p.matches(x).then(|| Exact(x.clone())),
            (Wildcard(s), Wildcard(t)) => (s == t).then(|| self.clone()),
            (Wildcard(s), Subtree(t)) | (Subtree(t), Wildcard(s)) => {
                (s == t || s.is_proper_subdomain_of(t)).then(|| Wildcard(s.clone()))
            }
            (Subtree(s), Subtree(t)) => {
                if s == t || s.is_proper_subdomain_of(t) {
                    Some(self.clone())
                } else if t.is_proper_subdomain_of(s) {
                    Some(other.clone())
                } else {
                    None
                }
            }
        }
    }

    pub fn is_subtree(&self) -> bool {
        matches!(self, NamePattern::Subtree(_))
    }

    /// The name itself, for exact patterns.
    pub fn as_exact(&self) -> Option<&DnsName> {
        match self {
            NamePattern::Exact(n) => Some(n),
            _ => None,
        }
    }
}

impl FromStr for NamePattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if let Some(rest) = s.strip_prefix("*.") {
            if rest.contains('*') {
                return Err(Error::InvalidName(format!("{s:?}: wildcard only allowed as leftmost label")));
            }
            Ok(NamePattern::Wildcard(rest.parse()?))
        } else if let Some(rest) = s.strip_prefix('.') {
            Ok(NamePattern::Subtree(rest.parse()?))
        } else if s.contains('*') {
            Err(Error::InvalidName(format!("{s:?}: wildcard only allowed as entire leftmost label")))
        } else {
            Ok(NamePattern::Exact(s.parse()?))
        }
    }
}

impl fmt::Display for NamePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamePattern::Exact(n) => write!(f, "{n}"),
            NamePattern::Wildcard(s) => write!(f, "*.{s}"),
            NamePattern::Subtree(s) => write!(f, ".{s}"),
        }
    }
}

impl fmt::Debug for NamePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for NamePattern {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for NamePattern {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Either every name, or a finite union of patterns with no member subsumed
/// by another.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum NameSet {
    Universal,
    Finite(BTreeSet<NamePattern>),
}

impl NameSet {
    pub fn empty() -> Self {
        NameSet::Finite(BTreeSet::new())
    }

    /// Builds a normalized finite set.
    pub fn finite<I: IntoIterator<Item = NamePattern>>(patterns: I) -> Self {
        NameSet::Finite(normalize(patterns.into_iter().collect()))
    }

    pub fn single(pattern: NamePattern) -> Self {
        NameSet::Finite(BTreeSet::from([pattern]))
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, NameSet::Finite(s) if s.is_empty())
    }

    pub fn is_universal(&self) -> bool {
        matches!(self, NameSet::Universal)
    }

    pub fn patterns(&self) -> Option<&BTreeSet<NamePattern>> {
        match self {
            NameSet::Universal => None,
            NameSet::Finite(s) => Some(s),
        }
    }

    pub fn member(&self, name: &DnsName) -> bool {
        match self {
            NameSet::Universal => true,
            NameSet::Finite(s) => s.iter().any(|p| p.matches(name)),
        }
    }

    pub fn intersect(&self, other: &NameSet) -> NameSet {
        match (self, other) {
            (NameSet::Universal, s) | (s, NameSet::Universal) => s.clone(),
            (NameSet::Finite(a), NameSet::Finite(b)) => {
                let meet = a
                    .iter()
                    .flat_map(|p| b.iter().filter_map(move |q| p.intersect(q)))
                    .collect();
                NameSet::Finite(normalize(meet))
            }
        }
    }

    pub fn union(&self, other: &NameSet) -> NameSet {
        match (self, other) {
            (NameSet::Universal, _) | (_, NameSet::Universal) => NameSet::Universal,
            (NameSet::Finite(a), NameSet::Finite(b)) => {
                NameSet::Finite(normalize(a.union(b).cloned().collect()))
            }
        }
    }

    /// Denotational containment. For finite sets a pattern is covered by a
    /// union only if a single member covers it, because wildcards and
    /// subtrees denote infinitely many names.
    pub fn is_subset_of(&self, other: &NameSet) -> bool {
        match (self, other) {
            (_, NameSet::Universal) => true,
            (NameSet::Universal, NameSet::Finite(_)) => false,
            (NameSet::Finite(a), NameSet::Finite(b)) => {
                a.iter().all(|p| b.iter().any(|q| p.is_subsumed_by(q)))
            }
        }
    }

    /// Parses a comma-separated list of patterns; `*` alone is the universal set.
    pub fn parse_list(s: &str) -> Result<NameSet, Error> {
        let s = s.trim();
        if s == "*" {
            return Ok(NameSet::Universal);
        }
        if s.is_empty() {
            return Ok(NameSet::empty());
        }
        let patterns = s
            .split(',')
            .map(|p| p.trim().parse())
            .collect::<Result<Vec<NamePattern>, _>>()?;
        Ok(NameSet::finite(patterns))
    }
}

impl fmt::Display for NameSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NameSet::Universal => f.write_str("*"),
            NameSet::Finite(s) => {
                let parts: Vec<String> = s.iter().map(ToString::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl fmt::Debug for NameSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl Serialize for NameSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            NameSet::Universal => s.serialize_str("*"),
            NameSet::Finite(set) => s.collect_seq(set.iter()),
        }
    }
}

impl<'de> Deserialize<'de> for NameSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Star(String),
            List(Vec<NamePattern>),
        }
        match Repr::deserialize(d)? {
            Repr::Star(s) if s == "*" => Ok(NameSet::Universal),
            Repr::Star(s) => Err(serde::de::Error::custom(format!("expected \"*\" or a list, found {s:?}"))),
            Repr::List(patterns) => Ok(NameSet::finite(patterns)),
        }
    }
}

fn normalize(patterns: BTreeSet<NamePattern>) -> BTreeSet<NamePattern> {
    patterns
        .iter()
        .filter(|p| !patterns.iter().any(|q| q != *p && p.is_subsumed_by(q)))
        .cloned()
        .collect()
}

/// The certificate's common name together with its subject alternative
/// names, normalized.
pub fn union_san_cn(cert: &Certificate) -> NameSet {
    let tbs = cert.tbs();
    NameSet::finite(
        std::iter::once(tbs.subject_common_name.clone())
            .chain(tbs.extensions.subject_alt_names.iter().cloned()),
    )
}
