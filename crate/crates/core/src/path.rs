//! Certification-path validation with proxy certificates.
//!
//! A chain is split at its first non-CA certificate (the end-entity
//! certificate). The part up to and including it is the *regular path* and is
//! validated RFC 5280 style against the trust anchors. The remainder is the
//! *proxy path*. It is validated as a second path whose trust anchor is the
//! end-entity certificate, with three differences:
//!
//! * the CA flag on proxy certificates is ignored;
//! * the permitted-name state starts at the end-entity certificate's names and
//!   is narrowed at every step by the certificate's name constraints and its
//!   own names, so a proxy can never widen the set it inherited;
//! * `path_len` on the end-entity or on a proxy bounds the number of proxy
//!   certificates that may follow it (the count restarts at the end entity).

use std::fmt;

use crate::cert::{verify_signature, within_validity, Certificate};
use crate::names::{union_san_cn, DnsName, NameSet};
use crate::time::Instant;
use crate::Error;

/// A prospective certification path: anchor-adjacent certificate first,
/// leaf last, trust anchor excluded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain(Vec<Certificate>);

impl Chain {
    pub fn new(certs: Vec<Certificate>) -> Result<Chain, Error> {
        if certs.is_empty() {
            return Err(Error::Malformed("empty certificate chain".into()));
        }
        Ok(Chain(certs))
    }

    pub fn certs(&self) -> &[Certificate] {
        &self.0
    }

    pub fn leaf(&self) -> &Certificate {
        self.0.last().expect("chain is non-empty")
    }

    /// Earliest `not_after` over all certificates: the instant from which the
    /// chain can no longer validate.
    pub fn expiry(&self) -> Instant {
        self.0.iter().map(Certificate::not_after).min().expect("chain is non-empty")
    }

    pub fn push(&mut self, cert: Certificate) {
        self.0.push(cert);
    }

    pub fn into_certs(self) -> Vec<Certificate> {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reason {
    NoEndEntity,
    UntrustedAnchor,
    IssuerMismatch,
    BadSignature,
    Expired,
    NotYetValid,
    CaBitMissing,
    PathLenExceeded,
    NameConstraintViolation,
    NameEscalation,
    EmptyPermittedSet,
    ProxyPathLenExceeded,
    TargetNameMismatch,
}

impl Reason {
    pub fn code(self) -> &'static str {
        match self {
            Reason::NoEndEntity => "NoEndEntity",
            Reason::UntrustedAnchor => "UntrustedAnchor",
            Reason::IssuerMismatch => "IssuerMismatch",
            Reason::BadSignature => "BadSignature",
            Reason::Expired => "Expired",
            Reason::NotYetValid => "NotYetValid",
            Reason::CaBitMissing => "CaBitMissing",
            Reason::PathLenExceeded => "PathLenExceeded",
            Reason::NameConstraintViolation => "NameConstraintViolation",
            Reason::NameEscalation => "NameEscalation",
            Reason::EmptyPermittedSet => "EmptyPermittedSet",
            Reason::ProxyPathLenExceeded => "ProxyPathLenExceeded",
            Reason::TargetNameMismatch => "TargetNameMismatch",
        }
    }

    pub const ALL: [Reason; 13] = [
        Reason::NoEndEntity,
        Reason::UntrustedAnchor,
        Reason::IssuerMismatch,
        Reason::BadSignature,
        Reason::Expired,
        Reason::NotYetValid,
        Reason::CaBitMissing,
        Reason::PathLenExceeded,
        Reason::NameConstraintViolation,
        Reason::NameEscalation,
        Reason::EmptyPermittedSet,
        Reason::ProxyPathLenExceeded,
        Reason::TargetNameMismatch,
    ];

    pub fn from_code(code: &str) -> Option<Reason> {
        Reason::ALL.into_iter().find(|r| r.code() == code)
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationOutcome {
    pub verdict: Verdict,
    pub reason: Option<Reason>,
    /// Names the chain is valid for; empty on rejection.
    pub effective_names: NameSet,
    /// Permitted-name state along the proxy path: the end entity's names
    /// first, then one entry per proxy certificate processed.
    pub pst_trace: Vec<NameSet>,
    /// Index of the end-entity certificate in the validated chain.
    pub path_split: usize,
}

impl ValidationOutcome {
    fn accept(effective_names: NameSet, pst_trace: Vec<NameSet>, path_split: usize) -> Self {
        ValidationOutcome { verdict: Verdict::Accept, reason: None, effective_names, pst_trace, path_split }
    }

    fn reject(reason: Reason, pst_trace: Vec<NameSet>, path_split: usize) -> Self {
        ValidationOutcome {
            verdict: Verdict::Reject,
            reason: Some(reason),
            effective_names: NameSet::empty(),
            pst_trace,
            path_split,
        }
    }

    pub fn is_accept(&self) -> bool {
        self.verdict == Verdict::Accept
    }

    /// `ACCEPT effective=[...]` or `REJECT <Reason>`.
    pub fn report_line(&self) -> String {
        match self.reason {
            None => format!("ACCEPT effective=[{}]", self.effective_names),
            Some(r) => format!("REJECT {r}"),
        }
    }
}

/// Splits at the first certificate without the CA flag. Returns the regular
/// path (ending in the end entity) and the proxy path (possibly empty).
pub fn split_path(chain: &[Certificate]) -> Result<(&[Certificate], &[Certificate]), Reason> {
    let ee = chain.iter().position(|c| !c.is_ca()).ok_or(Reason::NoEndEntity)?;
    Ok(chain.split_at(ee + 1))
}

fn check_time(cert: &Certificate, t: Instant) -> Result<(), Reason> {
    if within_validity(cert, t) {
        Ok(())
    } else if t < cert.validity().not_before() {
        Err(Reason::NotYetValid)
    } else {
        Err(Reason::Expired)
    }
}

fn check_link(issuer: &Certificate, cert: &Certificate) -> Result<(), Reason> {
    if cert.issuer() != issuer.subject_label() {
        return Err(Reason::IssuerMismatch);
    }
    if !verify_signature(cert, issuer.public_key()) {
        return Err(Reason::BadSignature);
    }
    Ok(())
}

fn run_regular(regular: &[Certificate], anchors: &[Certificate], t: Instant) -> Result<(), Reason> {
    let Some(first) = regular.first() else {
        return Err(Reason::NoEndEntity);
    };
    let anchored = anchors
        .iter()
        .any(|a| a.subject_label() == first.issuer() && verify_signature(first, a.public_key()));
    if !anchored {
        return Err(Reason::UntrustedAnchor);
    }

    let last = regular.len() - 1;
    let mut remaining_ca: Option<u32> = None;
    let mut permitted = NameSet::Universal;
    for (i, cert) in regular.iter().enumerate() {
        if i > 0 {
            check_link(&regular[i - 1], cert)?;
        }
        check_time(cert, t)?;
        if !union_san_cn(cert).is_subset_of(&permitted) {
            return Err(Reason::NameConstraintViolation);
        }
        if i < last {
            if !cert.is_ca() {
                return Err(Reason::CaBitMissing);
            }
            // RFC 5280 6.1.4 (l), (m): every intermediate consumes one unit
            // of the tightest path length seen so far.
            if i > 0 {
                match remaining_ca {
                    Some(0) => return Err(Reason::PathLenExceeded),
                    Some(n) => remaining_ca = Some(n - 1),
                    None => {}
                }
            }
            if let Some(k) = cert.extensions().path_len() {
                remaining_ca = Some(remaining_ca.map_or(k, |r| r.min(k)));
            }
        }
        if let Some(nc) = &cert.extensions().name_constraints {
            permitted = permitted.intersect(nc);
        }
    }
    Ok(())
}

/// Validates the regular path (CA certificates followed by the end entity).
pub fn validate_regular(regular: &[Certificate], anchors: &[Certificate], t: Instant) -> ValidationOutcome {
    let split = regular.len().saturating_sub(1);
    match run_regular(regular, anchors, t) {
        Ok(()) => {
            let names = union_san_cn(&regular[split]);
            ValidationOutcome::accept(names.clone(), vec![names], split)
        }
        Err(reason) => ValidationOutcome::reject(reason, Vec::new(), split),
    }
}

fn run_proxy(proxy: &[Certificate], ee: &Certificate, t: Instant, trace: &mut Vec<NameSet>) -> Result<NameSet, Reason> {
    let mut pst = union_san_cn(ee);
    trace.push(pst.clone());
    let mut remaining = ee.extensions().path_len();
    let mut issuer = ee;
    for cert in proxy {
        match remaining {
            Some(0) => return Err(Reason::ProxyPathLenExceeded),
            Some(n) => remaining = Some(n - 1),
            None => {}
        }
        check_link(issuer, cert)?;
        check_time(cert, t)?;

        let own = union_san_cn(cert);
        if !own.is_subset_of(&pst) {
            return Err(Reason::NameEscalation);
        }
        let constraints = cert.extensions().name_constraints.clone().unwrap_or(NameSet::Universal);
        let next = pst.intersect(&constraints).intersect(&own);
        if next.is_empty() {
            return Err(Reason::EmptyPermittedSet);
        }
        if !own.is_subset_of(&constraints) {
            return Err(Reason::NameEscalation);
        }
        pst = next;
        trace.push(pst.clone());

        if let Some(k) = cert.extensions().path_len() {
            remaining = Some(remaining.map_or(k, |r| r.min(k)));
        }
        issuer = cert;
    }
    Ok(pst)
}

/// Validates the proxy path with `ee` as its trust anchor. Assumes the
/// regular path ending in `ee` has already been accepted.
pub fn validate_proxy(proxy: &[Certificate], ee: &Certificate, t: Instant) -> ValidationOutcome {
    let mut trace = Vec::new();
    match run_proxy(proxy, ee, t, &mut trace) {
        Ok(names) => ValidationOutcome::accept(names, trace, 0),
        Err(reason) => ValidationOutcome::reject(reason, trace, 0),
    }
}

/// Full validation of `chain` for `target` at time `t`.
pub fn validate(chain: &[Certificate], anchors: &[Certificate], t: Instant, target: &DnsName) -> ValidationOutcome {
    let (regular, proxy) = match split_path(chain) {
        Ok(parts) => parts,
        Err(reason) => return ValidationOutcome::reject(reason, Vec::new(), chain.len()),
    };
    let split = regular.len() - 1;
    let regular_outcome = validate_regular(regular, anchors, t);
    if !regular_outcome.is_accept() {
        return regular_outcome;
    }
    let ee = &regular[split];
    let mut outcome = validate_proxy(proxy, ee, t);
    outcome.path_split = split;
    if outcome.is_accept() && !outcome.effective_names.member(target) {
        return ValidationOutcome::reject(Reason::TargetNameMismatch, outcome.pst_trace, split);
    }
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::{sign_certificate, BasicConstraints, Extensions, KeyUsage, TbsCertificate};
    use crate::crypto::{derive_seed, KeyPair, SignatureScheme};
    use crate::time::ValidityPeriod;

    struct Pki {
        root: Certificate,
        root_key: KeyPair,
    }

    fn key(label: &str) -> KeyPair {
        KeyPair::from_seed(SignatureScheme::Ed25519, derive_seed(11, label))
    }

    fn make(
        cn: &str,
        issuer: &Certificate,
        issuer_key: &KeyPair,
        subject_key: &KeyPair,
        is_ca: bool,
        path_len: Option<u32>,
        window: (u64, u64),
    ) -> Certificate {
        let tbs = TbsCertificate {
            subject_common_name: cn.parse().unwrap(),
            issuer: issuer.subject_label(),
            serial: 1,
            validity: ValidityPeriod::new(Instant(window.0), Instant(window.1)).unwrap(),
            public_key: subject_key.public_key().clone(),
            extensions: Extensions {
                basic_constraints: BasicConstraints { is_ca, path_len },
                key_usage: [KeyUsage::DigitalSignature].into(),
                ..Extensions::default()
            },
            signature_scheme: SignatureScheme::Ed25519,
        };
        sign_certificate(tbs, issuer_key).unwrap()
    }

    fn pki() -> Pki {
        let root_key = key("root");
        let tbs = TbsCertificate {
            subject_common_name: "root.pki.test".parse().unwrap(),
            issuer: "root.pki.test".into(),
            serial: 0,
            validity: ValidityPeriod::new(Instant(0), Instant(1_000_000)).unwrap(),
            public_key: root_key.public_key().clone(),
            extensions: Extensions {
                basic_constraints: BasicConstraints { is_ca: true, path_len: None },
                ..Extensions::default()
            },
            signature_scheme: SignatureScheme::Ed25519,
        };
        let root = sign_certificate(tbs, &root_key).unwrap();
        Pki { root, root_key }
    }

    const LONG: (u64, u64) = (0, 100_000);

    fn target(s: &str) -> DnsName {
        s.parse().unwrap()
    }

    #[test]
    fn split_shapes() {
        let p = pki();
        let ca = make("ca.pki.test", &p.root, &p.root_key, &key("ca"), true, Some(0), LONG);
        let ee = make("*.ex.com", &ca, &key("ca"), &key("ee"), false, None, LONG);
        let p1 = make("s1.ex.com", &ee, &key("ee"), &key("p1"), false, None, LONG);

        let two = [ca.clone(), ee.clone()];
        let (r, x) = split_path(&two).unwrap();
        assert_eq!((r.len(), x.len()), (2, 0));

        let four = [ca.clone(), ee.clone(), p1.clone(), p1.clone()];
        let (r, x) = split_path(&four).unwrap();
        assert_eq!((r.len(), x.len()), (2, 2));

        assert_eq!(split_path(&[ca.clone(), ca]).unwrap_err(), Reason::NoEndEntity);
    }

    #[test]
    fn minimal_chain_and_expiry() {
        let p = pki();
        let ca = make("ca.pki.test", &p.root, &p.root_key, &key("ca"), true, Some(0), LONG);
        let ee = make("www.ex.com", &ca, &key("ca"), &key("ee"), false, None, (0, 500));
        let chain = [ca, ee];
        let anchors = [p.root.clone()];
        assert!(validate_regular(&chain, &anchors, Instant(10)).is_accept());
        assert_eq!(validate_regular(&chain, &anchors, Instant(500)).reason, Some(Reason::Expired));
    }

    #[test]
    fn regular_path_len_counting() {
        let p = pki();
        let ca = make("ca.pki.test", &p.root, &p.root_key, &key("ca"), true, Some(0), LONG);
        let ca2 = make("ca2.pki.test", &ca, &key("ca"), &key("ca2"), true, None, LONG);
        let ee = make("www.ex.com", &ca2, &key("ca2"), &key("ee"), false, None, LONG);
        let out = validate_regular(&[ca.clone(), ca2.clone(), ee.clone()], std::slice::from_ref(&p.root), Instant(1));
        assert_eq!(out.reason, Some(Reason::PathLenExceeded));

        // path_len = 1 leaves room for exactly one more CA.
        let ca = make("ca.pki.test", &p.root, &p.root_key, &key("ca"), true, Some(1), LONG);
        let ca2 = make("ca2.pki.test", &ca, &key("ca"), &key("ca2"), true, None, LONG);
        let ee = make("www.ex.com", &ca2, &key("ca2"), &key("ee"), false, None, LONG);
        assert!(validate_regular(&[ca, ca2, ee], &[p.root], Instant(1)).is_accept());
    }

    #[test]
    fn untrusted_anchor() {
        let p = pki();
        let rogue = key("rogue");
        let ca = make("ca.pki.test", &p.root, &rogue, &key("ca"), true, None, LONG);
        let ee = make("www.ex.com", &ca, &key("ca"), &key("ee"), false, None, LONG);
        let out = validate(&[ca, ee], &[p.root], Instant(1), &target("www.ex.com"));
        assert_eq!(out.reason, Some(Reason::UntrustedAnchor));
    }

    #[test]
    fn ca_bit_missing_in_regular_path() {
        let p = pki();
        let ca = make("ca.pki.test", &p.root, &p.root_key, &key("ca"), false, None, LONG);
        let ee = make("www.ex.com", &ca, &key("ca"), &key("ee"), false, None, LONG);
        // validate would split after `ca`; validate_regular on the raw pair sees the gap.
        let out = validate_regular(&[ca, ee], &[p.root], Instant(1));
        assert_eq!(out.reason, Some(Reason::CaBitMissing));
    }

    #[test]
    fn proxy_narrowing_and_escalation() {
        let p = pki();
        let ca = make("ca.pki.test", &p.root, &p.root_key, &key("ca"), true, None, LONG);
        let ee = make("*.example.com", &ca, &key("ca"), &key("ee"), false, None, LONG);
        let www = make("www.example.com", &ee, &key("ee"), &key("p1"), false, None, LONG);
        let anchors = [p.root.clone()];

        let out = validate(&[ca.clone(), ee.clone(), www.clone()], &anchors, Instant(1), &target("www.example.com"));
        assert!(out.is_accept(), "{out:?}");
        assert_eq!(out.effective_names, NameSet::parse_list("www.example.com").unwrap());
        assert_eq!(out.path_split, 1);
        assert_eq!(out.pst_trace.len(), 2);

        let admin = make("admin.example.com", &www, &key("p1"), &key("p2"), false, None, LONG);
        let out = validate(&[ca, ee, www, admin], &anchors, Instant(1), &target("admin.example.com"));
        assert_eq!(out.reason, Some(Reason::NameEscalation));
    }

    #[test]
    fn expired_middle_proxy_rejects() {
        let p = pki();
        let ca = make("ca.pki.test", &p.root, &p.root_key, &key("ca"), true, None, LONG);
        let ee = make("*.example.com", &ca, &key("ca"), &key("ee"), false, None, LONG);
        let p1 = make("www.example.com", &ee, &key("ee"), &key("p1"), false, None, (0, 100));
        let p2 = make("www.example.com", &p1, &key("p1"), &key("p2"), false, None, LONG);
        let out = validate(&[ca, ee, p1, p2], &[p.root], Instant(150), &target("www.example.com"));
        assert_eq!(out.reason, Some(Reason::Expired));
    }

    #[test]
    fn proxy_path_len_restarts_at_end_entity() {
        let p = pki();
        let ca = make("ca.pki.test", &p.root, &p.root_key, &key("ca"), true, Some(0), LONG);
        let ee = make("*.example.com", &ca, &key("ca"), &key("ee"), false, Some(1), LONG);
        let p1 = make("www.example.com", &ee, &key("ee"), &key("p1"), false, None, LONG);
        let p2 = make("www.example.com", &p1, &key("p1"), &key("p2"), false, None, LONG);
        let anchors = [p.root.clone()];
        // The CA's path_len = 0 says nothing about proxies.
        let ok = validate(&[ca.clone(), ee.clone(), p1.clone()], &anchors, Instant(1), &target("www.example.com"));
        assert!(ok.is_accept());
        let out = validate(&[ca, ee, p1, p2], &anchors, Instant(1), &target("www.example.com"));
        assert_eq!(out.reason, Some(Reason::ProxyPathLenExceeded));
    }

    #[test]
    fn ca_flag_on_proxy_is_ignored() {
        let p = pki();
        let ca = make("ca.pki.test", &p.root, &p.root_key, &key("ca"), true, None, LONG);
        let ee = make("*.example.com", &ca, &key("ca"), &key("ee"), false, None, LONG);
        let p1 = make("www.example.com", &ee, &key("ee"), &key("p1"), true, None, LONG);
        let out = validate(&[ca, ee, p1], &[p.root], Instant(1), &target("www.example.com"));
        assert!(out.is_accept());
    }

    #[test]
    fn target_checks() {
        let p = pki();
        let ca = make("ca.pki.test", &p.root, &p.root_key, &key("ca"), true, None, LONG);
        let ee = make("*.ex.com", &ca, &key("ca"), &key("ee"), false, None, LONG);
        let chain = [ca.clone(), ee.clone()];
        let anchors = [p.root.clone()];
        assert!(validate(&chain, &anchors, Instant(1), &target("foo.ex.com")).is_accept());
        assert_eq!(
            validate(&chain, &anchors, Instant(1), &target("bar.foo.ex.com")).reason,
            Some(Reason::TargetNameMismatch)
        );
        let s1 = make("s1.ex.com", &ee, &key("ee"), &key("s1"), false, None, LONG);
        let out = validate(&[ca, ee, s1], &anchors, Instant(1), &target("s1.ex.com"));
        assert_eq!(out.report_line(), "ACCEPT effective=[s1.ex.com]");
    }

    #[test]
    fn reason_codes_round_trip() {
        for r in Reason::ALL {
            assert_eq!(Reason::from_code(r.code()), Some(r));
        }
    }
}
