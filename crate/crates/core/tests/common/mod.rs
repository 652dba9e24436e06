//! Shared test oracles. Everything here works on plain strings and sets so it
//! does not lean on the code under test.

#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;

pub const ALPHABET: [&str; 5] = ["a", "b", "c", "d", "e"];
pub const MAX_DEPTH: usize = 4;

/// Every name of depth 1..=4 over the alphabet, as dotted strings.
pub fn universe() -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut layer: Vec<String> = ALPHABET.iter().map(|s| s.to_string()).collect();
    for _ in 0..MAX_DEPTH {
        out.extend(layer.iter().cloned());
        layer = layer
            .iter()
            .flat_map(|n| ALPHABET.iter().map(move |l| format!("{l}.{n}")))
            .collect();
    }
    out
}

fn depth(name: &str) -> usize {
    name.split('.').count()
}

/// Brute-force denotation of one pattern string.
pub fn pattern_matches(pattern: &str, name: &str) -> bool {
    if let Some(suffix) = pattern.strip_prefix("*.") {
        depth(name) == depth(suffix) + 1 && name.ends_with(&format!(".{suffix}"))
    } else if let Some(suffix) = pattern.strip_prefix('.') {
        name.ends_with(&format!(".{suffix}"))
    } else {
        pattern == name
    }
}

/// `None` is the universal set.
pub fn denote(set: Option<&[String]>, universe: &[String]) -> BTreeSet<String> {
    universe
        .iter()
        .filter(|n| match set {
            None => true,
            Some(ps) => ps.iter().any(|p| pattern_matches(p, n)),
        })
        .cloned()
        .collect()
}

/// Suffixes of depth 1..=3 (patterns over them reach depth 4).
pub fn suffixes() -> Vec<String> {
    universe().into_iter().filter(|n| depth(n) <= 3).collect()
}

pub fn pattern_strategy() -> impl Strategy<Value = String> {
    let names = universe();
    let sufs = suffixes();
    prop_oneof![
        proptest::sample::select(names),
        proptest::sample::select(sufs.clone()).prop_map(|s| format!("*.{s}")),
        proptest::sample::select(sufs).prop_map(|s| format!(".{s}")),
    ]
}

/// A finite set of 0..=4 patterns, or (rarely) the universal set.
pub fn set_strategy() -> impl Strategy<Value = Option<Vec<String>>> {
    prop_oneof![
        1 => Just(None),
        12 => proptest::collection::vec(pattern_strategy(), 0..=4).prop_map(Some),
    ]
}

/// 30 hand-picked patterns covering nesting, siblings and depth edges.
pub const CURATED: [&str; 30] = [
    "a", "b", "a.b", "b.a", "c.a.b", "d.c.a.b", "a.a.a.a", "e.d.c.b", "*.a", "*.b", "*.a.b", "*.b.a", "*.c.a.b",
    "*.a.a.a", "*.e", ".a", ".b", ".a.b", ".b.a", ".c.a.b", ".a.a.a", ".e.d", ".d", "*.d", "d", "e.d", "*.e.d",
    "b.e.d", ".c", "c",
];
