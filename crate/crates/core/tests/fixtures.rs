use proxycert::fixtures::{generate, FixtureSpec, Shape};
use proxycert::{validate, DnsName};

#[test]
fn generation_is_deterministic() {
    let a = generate(&FixtureSpec::with_seed(7)).unwrap();
    let b = generate(&FixtureSpec::with_seed(7)).unwrap();
    assert_eq!(a.files, b.files);
    let c = generate(&FixtureSpec::with_seed(8)).unwrap();
    assert_ne!(a.get("roots/root.pcert"), c.get("roots/root.pcert"));
}

#[test]
fn written_tree_matches_memory() {
    let set = generate(&FixtureSpec::with_seed(1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    set.write_to(dir.path()).unwrap();
    for (path, bytes) in &set.files {
        assert_eq!(&std::fs::read(dir.path().join(path)).unwrap(), bytes, "{path}");
    }
}

#[test]
fn expectations_hold_for_several_seeds() {
    for seed in [0, 1, 42] {
        let set = generate(&FixtureSpec::with_seed(seed)).unwrap();
        let anchors = set.certificates("roots/root.pcert").unwrap();
        let expectations = set.expectations().unwrap();
        assert!(expectations.len() >= 30);
        for e in expectations {
            let chain = set.certificates(&e.chain).unwrap();
            let target: DnsName = e.target.parse().unwrap();
            assert_eq!(validate(&chain, &anchors, e.at, &target).reason, e.expected, "seed {seed}: {e}");
        }
    }
}

#[test]
fn spec_file_round_trip_and_subsets() {
    let spec = FixtureSpec::parse("# demo\nseed 9\nshapes regular proxy\n").unwrap();
    assert_eq!(spec.seed, 9);
    assert_eq!(spec.topology, vec![Shape::Regular, Shape::Proxy]);
    let set = generate(&spec).unwrap();
    assert!(set.get("chains/proxy.pcert").is_some());
    assert!(set.get("dc/credential.pdc").is_none());
    for bad in ["", "seed x", "seed 1\nshapes wobbly", "colour blue"] {
        assert!(FixtureSpec::parse(bad).is_err(), "{bad:?}");
    }
}
