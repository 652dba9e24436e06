use std::path::Path;

use proxycert::cli::{run, EXIT_OK, EXIT_REJECT, EXIT_USAGE};
use proxycert::fixtures::{generate, FixtureSpec};

fn fixtures() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    generate(&FixtureSpec::with_seed(1)).unwrap().write_to(dir.path()).unwrap();
    dir
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("proxycert").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(dir: &Path, rel: &str) -> String {
    dir.join(rel).to_str().unwrap().to_owned()
}

#[test]
fn validate_chain_exit_codes() {
    let dir = fixtures();
    let d = dir.path();
    let chain = p(d, "chains/regular.pcert");
    let anchors = p(d, "roots");
    let ok = call(&["validate-chain", &chain, "--anchors", &anchors, "--target", "www.example.com", "--at", "1000"]);
    assert_eq!(ok.0, EXIT_OK, "{ok:?}");
    assert!(ok.1.starts_with("ACCEPT"));
    let late = call(&["validate-chain", &chain, "--anchors", &anchors, "--target", "www.example.com", "--at", "999999999999"]);
    assert_eq!((late.0, late.1.trim()), (EXIT_REJECT, "REJECT Expired"));
    let missing = call(&["validate-chain", &p(d, "chains/nope.pcert"), "--anchors", &anchors, "--target", "a.b", "--at", "0"]);
    assert_eq!(missing.0, EXIT_USAGE);
    assert_eq!(call(&["validate-chain"]).0, EXIT_USAGE);
    assert_eq!(call(&["no-such-command"]).0, EXIT_USAGE);
}

#[test]
fn every_fixture_expectation_through_the_cli() {
    let dir = fixtures();
    let d = dir.path();
    let set = generate(&FixtureSpec::with_seed(1)).unwrap();
    for e in set.expectations().unwrap() {
        let at = e.at.secs().to_string();
        let (code, out, _) =
            call(&["validate-chain", &p(d, &e.chain), "--anchors", &p(d, "roots"), "--target", &e.target, "--at", &at]);
        match e.expected {
            None => assert_eq!(code, EXIT_OK, "{e}: {out}"),
            Some(r) => {
                assert_eq!(code, EXIT_REJECT, "{e}");
                assert_eq!(out.trim(), format!("REJECT {r}"), "{e}");
            }
        }
    }
}

#[test]
fn matrix_commands() {
    let (code, out, _) = call(&["matrix", "combine", "p", "s"]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('R')).collect();
    assert_eq!(rows.len(), 19);
    assert!(out.contains("R1\tsatisfied\nR2\tsatisfied"));
    assert!(rows.iter().any(|l| l.starts_with("A3\tYes")));
    let (code, out, _) = call(&["matrix", "check"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.trim_end().ends_with("CHECK PASS"));
    assert_eq!(call(&["matrix", "show", "zz"]).0, EXIT_USAGE);
}

#[test]
fn keygen_issue_and_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let f = |rel: &str| p(d, rel);
    let ok = |args: &[&str]| {
        let r = call(args);
        assert_eq!(r.0, EXIT_OK, "{args:?}: {r:?}");
    };
    for label in ["root", "ee", "proxy"] {
        ok(&["keygen", "--seed", "3", "--label", label, "--out", &f(&format!("{label}.pkey"))]);
    }
    ok(&["issue-root", "--key", &f("root.pkey"), "--subject", "root.test", "--not-before", "0", "--not-after", "100000", "--out", &f("root.pcert")]);
    ok(&[
        "issue-ee", "--issuer", &f("root.pcert"), "--issuer-key", &f("root.pkey"), "--key", &f("ee.pkey"),
        "--subject", "*.example.com", "--not-before", "0", "--not-after", "50000", "--out", &f("ee.pcert"),
    ]);
    ok(&["csr", "--key", &f("proxy.pkey"), "--names", "s1.example.com", "--out", &f("proxy.pcsr")]);
    ok(&[
        "issue-proxy", "--parent", &f("ee.pcert"), "--parent-key", &f("ee.pkey"), "--csr", &f("proxy.pcsr"),
        "--not-before", "0", "--not-after", "3600", "--out", &f("proxy.pcert"),
    ]);
    let chain = std::fs::read_to_string(f("ee.pcert")).unwrap() + &std::fs::read_to_string(f("proxy.pcert")).unwrap();
    std::fs::write(f("chain.pcert"), chain).unwrap();
    let validate = |at: &str, target: &str| {
        call(&["validate-chain", &f("chain.pcert"), "--anchors", &f("root.pcert"), "--target", target, "--at", at])
    };
    assert_eq!(validate("10", "s1.example.com").0, EXIT_OK);
    assert_eq!(validate("10", "s2.example.com").1.trim(), "REJECT TargetNameMismatch");
    assert_eq!(validate("3600", "s1.example.com").1.trim(), "REJECT Expired");

    let escalate = call(&["csr", "--key", &f("proxy.pkey"), "--names", "evil.org", "--out", &f("bad.pcsr")]);
    assert_eq!(escalate.0, EXIT_OK);
    let r = call(&[
        "issue-proxy", "--parent", &f("ee.pcert"), "--parent-key", &f("ee.pkey"), "--csr", &f("bad.pcsr"),
        "--not-before", "0", "--not-after", "3600", "--out", &f("bad.pcert"),
    ]);
    assert_eq!((r.0, r.1.trim()), (EXIT_REJECT, "REJECT NameEscalation"));
}

#[test]
fn server_run_with_inline_schedule() {
    let dir = fixtures();
    let d = dir.path();
    let out = tempfile::tempdir().unwrap();
    let r = call(&[
        "server", "run", "--parent", &p(d, "server/parent.pcert"), "--parent-key", &p(d, "server/parent.pkey"),
        "--csr", &p(d, "server/edge.pcsr"), "--start", "0", "--period", "3600", "--validity", "5400",
        "--until", "36000", "--out", out.path().to_str().unwrap(),
    ]);
    assert_eq!(r.0, EXIT_OK, "{r:?}");
    let bad = call(&[
        "server", "run", "--parent", &p(d, "server/parent.pcert"), "--parent-key", &p(d, "server/parent.pkey"),
        "--csr", &p(d, "server/edge.pcsr"), "--period", "3600", "--validity", "3600",
        "--until", "36000", "--out", out.path().to_str().unwrap(),
    ]);
    assert_eq!(bad.0, EXIT_USAGE);
}

#[test]
fn simulate_matches_golden_trace() {
    let dir = fixtures();
    let d = dir.path();
    let (code, out, _) = call(&["simulate", "--anchors", &p(d, "roots"), &p(d, "scripts/chaining-allow.script")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, include_str!("golden/chaining-allow.tsv"));
}
