mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use proxycert::{DnsName, NamePattern, NameSet};

use common::{denote, set_strategy, universe, CURATED};

fn to_set(spec: &Option<Vec<String>>) -> NameSet {
    match spec {
        None => NameSet::Universal,
        Some(ps) => NameSet::finite(ps.iter().map(|p| p.parse::<NamePattern>().unwrap())),
    }
}

fn names() -> Vec<(String, DnsName)> {
    universe().into_iter().map(|n| (n.clone(), n.parse().unwrap())).collect()
}

fn denotation(set: &NameSet, names: &[(String, DnsName)]) -> BTreeSet<String> {
    names.iter().filter(|(_, n)| set.member(n)).map(|(s, _)| s.clone()).collect()
}

#[test]
fn literal_examples() {
    let subtree: NamePattern = ".example.com".parse().unwrap();
    let wildcard: NamePattern = "*.example.com".parse().unwrap();
    let n = |s: &str| s.parse::<DnsName>().unwrap();
    assert!(subtree.matches(&n("host.example.com")));
    assert!(subtree.matches(&n("my.host.example.com")));
    assert!(!subtree.matches(&n("example.com")));
    assert!(wildcard.matches(&n("foo.example.com")));
    assert!(!wildcard.matches(&n("bar.foo.example.com")));
}

#[test]
fn curated_pool_pairs_match_oracle() {
    let u = universe();
    let names = names();
    for a in CURATED {
        for b in CURATED {
            let sa = Some(vec![a.to_string()]);
            let sb = Some(vec![b.to_string()]);
            let got = denotation(&to_set(&sa).intersect(&to_set(&sb)), &names);
            let want: BTreeSet<String> = denote(sa.as_deref(), &u).intersection(&denote(sb.as_deref(), &u)).cloned().collect();
            assert_eq!(got, want, "{a} ∩ {b}");
        }
    }
}

#[test]
fn rejects_malformed_patterns() {
    for bad in ["", "a..b", "*", "a.*.b", "**.a", "*a.b", "a_b.c", ".", "*."] {
        assert!(bad.parse::<NamePattern>().is_err(), "{bad:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn member_matches_oracle(spec in set_strategy()) {
        let u = universe();
        prop_assert_eq!(denotation(&to_set(&spec), &names()), denote(spec.as_deref(), &u));
    }

    #[test]
    fn intersect_matches_oracle(a in set_strategy(), b in set_strategy()) {
        let u = universe();
        let want: BTreeSet<String> = denote(a.as_deref(), &u).intersection(&denote(b.as_deref(), &u)).cloned().collect();
        prop_assert_eq!(denotation(&to_set(&a).intersect(&to_set(&b)), &names()), want);
    }

    #[test]
    fn intersect_commutes(a in set_strategy(), b in set_strategy()) {
        let (a, b) = (to_set(&a), to_set(&b));
        prop_assert_eq!(a.intersect(&b), b.intersect(&a));
    }

    #[test]
    fn intersect_associates(a in set_strategy(), b in set_strategy(), c in set_strategy()) {
        let (a, b, c) = (to_set(&a), to_set(&b), to_set(&c));
        let names = names();
        prop_assert_eq!(
            denotation(&a.intersect(&b).intersect(&c), &names),
            denotation(&a.intersect(&b.intersect(&c)), &names)
        );
    }

    #[test]
    fn intersect_idempotent(a in set_strategy()) {
        let a = to_set(&a);
        prop_assert_eq!(a.intersect(&a), a);
    }

    #[test]
    fn normalization_preserves_membership(a in set_strategy()) {
        let u = universe();
        let raw = denote(a.as_deref(), &u);
        prop_assert_eq!(denotation(&to_set(&a), &names()), raw);
    }

    #[test]
    fn intersection_never_extends(a in set_strategy(), b in set_strategy()) {
        let names = names();
        let (a, b) = (to_set(&a), to_set(&b));
        let i = denotation(&a.intersect(&b), &names);
        prop_assert!(i.is_subset(&denotation(&a, &names)));
        prop_assert!(i.is_subset(&denotation(&b, &names)));
    }

    #[test]
    fn syntactic_subset_is_sound(a in set_strategy(), b in set_strategy()) {
        let names = names();
        let (a, b) = (to_set(&a), to_set(&b));
        if a.is_subset_of(&b) {
            prop_assert!(denotation(&a, &names).is_subset(&denotation(&b, &names)));
        }
    }

    #[test]
    fn display_round_trips(a in set_strategy()) {
        let a = to_set(&a);
        if !a.is_empty() {
            prop_assert_eq!(NameSet::parse_list(&a.to_string()).unwrap(), a);
        }
    }
}
