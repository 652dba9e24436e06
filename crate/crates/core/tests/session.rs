use proptest::prelude::*;
use proxycert::crypto::derive_seed;
use proxycert::fixtures::{generate, CertBuilder, FixtureSpec};
use proxycert::session::{
    parse_script, run_scenario, Event, EventKind, Presented, ResumeReject, ScenarioContext, ServerBehavior, Simulator,
    MAX_PSK_LIFETIME,
};
use proxycert::time::{DAY, HOUR, WEEK};
use proxycert::{Certificate, DnsName, Instant, KeyPair, ResumptionPolicy, SignatureScheme};

fn key(label: &str) -> KeyPair {
    KeyPair::from_seed(SignatureScheme::Ed25519, derive_seed(12, label))
}

struct World {
    root: Certificate,
    /// name → chain; leaf validity given by the name.
    short: Vec<Certificate>,
    day: Vec<Certificate>,
}

fn world(policy: Option<ResumptionPolicy>) -> World {
    let rk = key("root");
    let root = CertBuilder::new("root.pki.test", &rk, 0, 1000 * DAY).ca(None).self_signed(&rk).unwrap();
    let ck = key("ca");
    let ca = CertBuilder::new("ca.pki.test", &ck, 0, 1000 * DAY).ca(None).issued_by(&root, &rk).unwrap();
    let ek = key("ee");
    let ee = CertBuilder::new("*.example.com", &ek, 0, 1000 * DAY).issued_by(&ca, &ck).unwrap();
    let proxy = |len: u64, serial: u64| {
        let mut b = CertBuilder::new("s1.example.com", &key("edge"), 0, len).serial(serial);
        if let Some(p) = policy {
            b = b.resumption_policy(p);
        }
        vec![ca.clone(), ee.clone(), b.issued_by(&ee, &ek).unwrap()]
    };
    World { short: proxy(HOUR, 1), day: proxy(DAY, 2), root }
}

fn ctx(w: &World) -> ScenarioContext<KeyPair> {
    let mut ctx = ScenarioContext::new(vec![w.root.clone()]);
    ctx.chains.insert("short".into(), w.short.clone());
    ctx.chains.insert("day".into(), w.day.clone());
    ctx
}

fn target() -> DnsName {
    "s1.example.com".parse().unwrap()
}

fn policy_strategy() -> impl Strategy<Value = ResumptionPolicy> {
    prop_oneof![
        Just(ResumptionPolicy::Allow),
        Just(ResumptionPolicy::BoundToCredentialExpiry),
        Just(ResumptionPolicy::Disallow)
    ]
}

/// Random scripts: handshakes on either chain and resumptions at
/// increasing times.
fn script_strategy(policy: ResumptionPolicy) -> impl Strategy<Value = Vec<Event>> {
    proptest::collection::vec((0u64..(3 * DAY), any::<bool>(), 0u8..4, any::<bool>()), 1..20).prop_map(move |steps| {
        let mut t = 0;
        let mut events = vec![Event {
            at: Instant(0),
            kind: EventKind::Handshake {
                chain: "short".into(),
                policy,
                behavior: ServerBehavior::MaliciousChainer,
                target: None,
            },
        }];
        for (gap, day_chain, kind, malicious) in steps {
            t += gap;
            let kind = if kind == 0 {
                EventKind::Handshake {
                    chain: if day_chain { "day" } else { "short" }.into(),
                    policy,
                    behavior: if malicious { ServerBehavior::MaliciousChainer } else { ServerBehavior::Honest },
                    target: None,
                }
            } else {
                EventKind::Resume
            };
            events.push(Event { at: Instant(t), kind });
        }
        events
    })
}

#[test]
fn malicious_chaining_outlives_the_credential() {
    let w = world(None);
    let mut sim = Simulator::new(vec![w.root.clone()]);
    let t = target();
    let (_, psk) = sim
        .full_handshake(Presented::Chain { chain: &w.short, target: &t }, Instant(0), ResumptionPolicy::Allow, ServerBehavior::MaliciousChainer)
        .unwrap();
    let mut psk = psk.unwrap();
    for day in [6, 12, 18] {
        let (conn, next) =
            sim.resume(&psk, Instant(day * DAY), ResumptionPolicy::Allow, ServerBehavior::MaliciousChainer).unwrap();
        assert_eq!(conn.credential_expiry, Instant(HOUR));
        let next = next.unwrap();
        assert!(next.lifetime <= MAX_PSK_LIFETIME);
        // Single use.
        assert_eq!(
            sim.resume(&psk, Instant(day * DAY + 1), ResumptionPolicy::Allow, ServerBehavior::MaliciousChainer).unwrap_err(),
            ResumeReject::PskConsumed
        );
        psk = next;
    }
    assert_eq!(psk.lineage_depth, 3);
}

#[test]
fn bound_policy_stops_at_credential_expiry() {
    let w = world(None);
    let mut sim = Simulator::new(vec![w.root.clone()]);
    let t = target();
    let (_, psk) = sim
        .full_handshake(
            Presented::Chain { chain: &w.short, target: &t },
            Instant(0),
            ResumptionPolicy::BoundToCredentialExpiry,
            ServerBehavior::MaliciousChainer,
        )
        .unwrap();
    let psk = psk.unwrap();
    assert_eq!(psk.effective_expiry(), Instant(HOUR));
    let r = sim.resume(&psk, Instant(6 * DAY), ResumptionPolicy::BoundToCredentialExpiry, ServerBehavior::MaliciousChainer);
    assert_eq!(r.unwrap_err(), ResumeReject::CredentialExpired);
    let r = sim.resume(&psk, Instant(HOUR - 1), ResumptionPolicy::BoundToCredentialExpiry, ServerBehavior::MaliciousChainer);
    assert!(r.is_ok());
}

#[test]
fn disallow_issues_no_psk_and_expired_chains_get_no_connection() {
    let w = world(None);
    let mut sim = Simulator::new(vec![w.root.clone()]);
    let t = target();
    let (_, psk) = sim
        .full_handshake(Presented::Chain { chain: &w.short, target: &t }, Instant(0), ResumptionPolicy::Disallow, ServerBehavior::MaliciousChainer)
        .unwrap();
    assert!(psk.is_none());
    assert!(sim
        .full_handshake(Presented::Chain { chain: &w.short, target: &t }, Instant(HOUR), ResumptionPolicy::Allow, ServerBehavior::Honest)
        .is_err());
}

#[test]
fn psk_lifetime_bounds() {
    let w = world(None);
    let mut sim = Simulator::new(vec![w.root.clone()]);
    let t = target();
    let (_, psk) = sim
        .full_handshake(Presented::Chain { chain: &w.day, target: &t }, Instant(0), ResumptionPolicy::Allow, ServerBehavior::Honest)
        .unwrap();
    let psk = psk.unwrap();
    assert_eq!(psk.lifetime, DAY);
    let err = sim.resume(&psk, Instant(DAY), ResumptionPolicy::Allow, ServerBehavior::Honest).unwrap_err();
    assert_eq!(err, ResumeReject::PskExpired);
}

#[test]
fn malformed_scripts_are_reported() {
    assert!(parse_script("AT 1 RESUME\nAT 0 RESUME\n").is_err());
    let w = world(None);
    let mut c = ctx(&w);
    let resume_first = parse_script("AT 0 RESUME\n").unwrap();
    assert!(run_scenario(&resume_first, &mut c).is_err());
    let unknown = parse_script("AT 0 HANDSHAKE nowhere POLICY allow\n").unwrap();
    assert!(run_scenario(&unknown, &mut c).is_err());
}

#[test]
fn golden_traces() {
    let set = generate(&FixtureSpec::with_seed(1)).unwrap();
    for name in [
        "chaining-allow",
        "chaining-bound",
        "chaining-disallow",
        "chaining-cert-disallow",
        "chaining-honest",
        "refresh",
        "server-lease",
    ] {
        let (events, mut ctx) = set.scenario(&format!("scripts/{name}.script")).unwrap();
        let trace = run_scenario(&events, &mut ctx).unwrap();
        let golden = std::fs::read_to_string(format!("{}/tests/golden/{name}.tsv", env!("CARGO_MANIFEST_DIR"))).unwrap();
        assert_eq!(trace.to_tsv(), golden, "trace for {name} drifted");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chaining_is_unbounded_under_allow(horizon_days in 1u64..400) {
        let w = world(None);
        let mut text = String::from("AT 0 HANDSHAKE short POLICY allow BEHAVIOR malicious\n");
        let mut t = 0;
        while t <= horizon_days * DAY {
            t += 6 * DAY;
            text.push_str(&format!("AT {t} RESUME\n"));
        }
        let trace = run_scenario(&parse_script(&text).unwrap(), &mut ctx(&w)).unwrap();
        prop_assert_eq!(trace.full_handshakes(), 1);
        prop_assert!(trace.max_connection_instant().unwrap() > Instant(horizon_days * DAY));
        for e in trace.entries.iter().filter(|e| e.psk_expiry.is_some()) {
            prop_assert!(e.psk_expiry.unwrap().since(e.at) <= WEEK);
        }
    }

    #[test]
    fn bound_never_connects_after_expiry(events in script_strategy(ResumptionPolicy::BoundToCredentialExpiry)) {
        let w = world(None);
        let trace = run_scenario(&events, &mut ctx(&w)).unwrap();
        for c in trace.credentials.values() {
            prop_assert!(c.last_connection < c.expiry);
        }
    }

    #[test]
    fn disallow_means_one_connection_per_handshake(events in script_strategy(ResumptionPolicy::Disallow)) {
        let w = world(None);
        let trace = run_scenario(&events, &mut ctx(&w)).unwrap();
        prop_assert_eq!(trace.connections(), trace.full_handshakes());
    }

    #[test]
    fn certificate_policy_only_tightens(client in policy_strategy(), domain in policy_strategy()) {
        let w = world(Some(domain));
        let mut sim = Simulator::new(vec![w.root.clone()]);
        let t = target();
        let (conn, psk) = sim
            .full_handshake(Presented::Chain { chain: &w.day, target: &t }, Instant(0), client, ServerBehavior::MaliciousChainer)
            .unwrap();
        prop_assert_eq!(conn.policy_in_effect, client.max(domain));
        prop_assert!(conn.policy_in_effect >= domain);
        prop_assert_eq!(psk.is_some(), client.max(domain) != ResumptionPolicy::Disallow);
    }

    #[test]
    fn consumed_psks_stay_consumed(later in 1u64..(6 * DAY)) {
        let w = world(None);
        let mut sim = Simulator::new(vec![w.root.clone()]);
        let t = target();
        let (_, psk) = sim
            .full_handshake(Presented::Chain { chain: &w.day, target: &t }, Instant(0), ResumptionPolicy::Allow, ServerBehavior::MaliciousChainer)
            .unwrap();
        let psk = psk.unwrap();
        sim.resume(&psk, Instant(0), ResumptionPolicy::Allow, ServerBehavior::MaliciousChainer).unwrap();
        prop_assert!(sim.is_consumed(&psk));
        let err = sim.resume(&psk, Instant(later), ResumptionPolicy::Allow, ServerBehavior::MaliciousChainer).unwrap_err();
        prop_assert_eq!(err, ResumeReject::PskConsumed);
    }
}
