//! Deterministic test PKI.
//!
//! [`generate`] builds an in-memory file tree (relative path → bytes) from a
//! seed and a list of shapes. All keys come from
//! `SHA-256("proxycert-key-v1" || seed_be64 || label)`, and every time is
//! fixed, so the same spec always yields byte-identical output.
//!
//! Layout:
//!
//! ```text
//! roots/root.pcert           trust anchor
//! keys/*.pkey                private keys
//! chains/*.pcert             certification paths (leaf last)
//! expectations.txt           <chain> <target> <at> ACCEPT | REJECT <Reason>
//! dc/*                       delegated-credential pair
//! server/*                   parent chain, key, CSR and schedule
//! scripts/*.script           session scenarios
//! ```
//!
//! Everything except the short-lived material is valid at t = 1000.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Component, Path};
use std::str::FromStr;

use crate::cert::{
    sign_certificate, write_certificates, BasicConstraints, Certificate, Extensions, KeyUsage, ResumptionPolicy,
    TbsCertificate,
};
use crate::crypto::{derive_seed, KeyPair, SignatureScheme};
use crate::dc::issue_dc;
use crate::issuance::{CertificateServer, IssuanceSchedule, ProxyCsr};
use crate::session::{self, Event, EventKind, ScenarioContext};
use crate::keyfile;
use crate::names::{NamePattern, NameSet};
use crate::path::Reason;
use crate::time::{Instant, ValidityPeriod, DAY, HOUR};
use crate::Error;

/// Instant at which the long-lived fixtures are checked.
pub const CHECK_AT: u64 = 1000;
pub const ROOT_LABEL: &str = "root.pki.test";

const LONG: u64 = 3650 * DAY;
const EE_LIFETIME: u64 = 90 * DAY;

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("malformed fixture spec: {0}")]
    MalformedSpec(String),
    #[error(transparent)]
    Other(#[from] Error),
}

fn fail<E: fmt::Display>(e: E) -> FixtureError {
    FixtureError::Other(Error::InvalidCertificate(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Shape {
    Regular,
    NameConstrained,
    ShortLived,
    Proxy,
    Negative,
    Delegated,
    Chaining,
    Server,
}

impl Shape {
    pub const ALL: [Shape; 8] = [
        Shape::Regular,
        Shape::NameConstrained,
        Shape::ShortLived,
        Shape::Proxy,
        Shape::Negative,
        Shape::Delegated,
        Shape::Chaining,
        Shape::Server,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Shape::Regular => "regular",
            Shape::NameConstrained => "name-constrained",
            Shape::ShortLived => "short-lived",
            Shape::Proxy => "proxy",
            Shape::Negative => "negative",
            Shape::Delegated => "delegated",
            Shape::Chaining => "chaining",
            Shape::Server => "server",
        }
    }
}

impl FromStr for Shape {
    type Err = FixtureError;

    fn from_str(s: &str) -> Result<Self, FixtureError> {
        Shape::ALL
            .into_iter()
            .find(|shape| shape.as_str() == s)
            .ok_or_else(|| FixtureError::MalformedSpec(format!("unknown shape {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixtureSpec {
    pub seed: u64,
    pub topology: Vec<Shape>,
}

impl FixtureSpec {
    /// All shapes.
    pub fn with_seed(seed: u64) -> Self {
        FixtureSpec { seed, topology: Shape::ALL.to_vec() }
    }

    /// Parses
    ///
    /// ```text
    /// seed 7
    /// shapes regular proxy negative
    /// ```
    ///
    /// `shapes` may be omitted (meaning all); `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, FixtureError> {
        let mut seed = None;
        let mut topology = None;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            let mut words = line.split_whitespace();
            match words.next() {
                None => {}
                Some("seed") if seed.is_none() => {
                    let value = words.next().ok_or_else(|| FixtureError::MalformedSpec("seed needs a value".into()))?;
                    seed = Some(value.parse().map_err(|_| FixtureError::MalformedSpec(format!("bad seed {value:?}")))?);
                    if words.next().is_some() {
                        return Err(FixtureError::MalformedSpec("trailing words after seed".into()));
                    }
                }
                Some("shapes") if topology.is_none() => {
                    let shapes = words.map(Shape::from_str).collect::<Result<Vec<_>, _>>()?;
                    if shapes.is_empty() {
                        return Err(FixtureError::MalformedSpec("shapes needs at least one shape".into()));
                    }
                    topology = Some(shapes);
                }
                Some(other) => return Err(FixtureError::MalformedSpec(format!("unexpected directive {other:?}"))),
            }
        }
        Ok(FixtureSpec {
            seed: seed.ok_or_else(|| FixtureError::MalformedSpec("missing seed".into()))?,
            topology: topology.unwrap_or_else(|| Shape::ALL.to_vec()),
        })
    }

    fn has(&self, shape: Shape) -> bool {
        self.topology.contains(&shape)
    }
}

/// One line of `expectations.txt`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectation {
    pub chain: String,
    pub target: String,
    pub at: Instant,
    pub expected: Option<Reason>,
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} ", self.chain, self.target, self.at)?;
        match self.expected {
            None => f.write_str("ACCEPT"),
            Some(r) => write!(f, "REJECT {r}"),
        }
    }
}

impl FromStr for Expectation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Malformed(format!("bad expectation line {s:?}"));
        let w: Vec<&str> = s.split_whitespace().collect();
        let expected = match w.get(3..) {
            Some(["ACCEPT"]) => None,
            Some(["REJECT", code]) => Some(Reason::from_code(code).ok_or_else(bad)?),
            _ => return Err(bad()),
        };
        Ok(Expectation {
            chain: w[0].to_owned(),
            target: w[1].to_owned(),
            at: Instant(w[2].parse().map_err(|_| bad())?),
            expected,
        })
    }
}

pub fn parse_expectations(text: &str) -> Result<Vec<Expectation>, Error> {
    text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).map(str::parse).collect()
}

/// Fluent certificate construction for fixtures and tests.
#[derive(Clone, Debug)]
pub struct CertBuilder {
    subject: String,
    public_key: crate::crypto::PublicKey,
    validity: (u64, u64),
    serial: u64,
    ext: Extensions,
    sans: Vec<String>,
    nc: Option<String>,
}

impl CertBuilder {
    pub fn new(subject: &str, key: &KeyPair, not_before: u64, not_after: u64) -> Self {
        CertBuilder {
            subject: subject.to_owned(),
            public_key: key.public_key().clone(),
            validity: (not_before, not_after),
            serial: 1,
            ext: Extensions { key_usage: [KeyUsage::DigitalSignature].into(), ..Extensions::default() },
            sans: Vec::new(),
            nc: None,
        }
    }

    pub fn ca(mut self, path_len: Option<u32>) -> Self {
        self.ext.basic_constraints = BasicConstraints { is_ca: true, path_len };
        self.ext.key_usage = [KeyUsage::KeyCertSign].into();
        self
    }

    /// Sets the CA bit without touching anything else (e.g. on a proxy).
    pub fn ca_bit(mut self) -> Self {
        self.ext.basic_constraints.is_ca = true;
        self
    }

    pub fn path_len(mut self, path_len: u32) -> Self {
        self.ext.basic_constraints.path_len = Some(path_len);
        self
    }

    pub fn serial(mut self, serial: u64) -> Self {
        self.serial = serial;
        self
    }

    pub fn sans(mut self, sans: &[&str]) -> Self {
        self.sans = sans.iter().map(|s| s.to_string()).collect();
        self
    }

    /// Comma-separated permitted subtrees.
    pub fn name_constraints(mut self, nc: &str) -> Self {
        self.nc = Some(nc.to_owned());
        self
    }

    pub fn delegation_usage(mut self) -> Self {
        self.ext.delegation_usage = true;
        self
    }

    pub fn without_digital_signature(mut self) -> Self {
        self.ext.key_usage.remove(&KeyUsage::DigitalSignature);
        self
    }

    pub fn resumption_policy(mut self, p: ResumptionPolicy) -> Self {
        self.ext.resumption_policy = Some(p);
        self
    }

    pub fn tbs(self, issuer: &str, scheme: SignatureScheme) -> Result<TbsCertificate, Error> {
        let mut ext = self.ext;
        ext.subject_alt_names = self.sans.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
        ext.name_constraints = self.nc.as_deref().map(NameSet::parse_list).transpose()?;
        Ok(TbsCertificate {
            subject_common_name: self.subject.parse::<NamePattern>()?,
            issuer: issuer.to_owned(),
            serial: self.serial,
            validity: ValidityPeriod::new(Instant(self.validity.0), Instant(self.validity.1))?,
            public_key: self.public_key,
            extensions: ext,
            signature_scheme: scheme,
        })
    }

    /// Signs as `issuer_label` with `issuer_key`.
    pub fn sign(self, issuer_label: &str, issuer_key: &KeyPair) -> Result<Certificate, Error> {
        sign_certificate(self.tbs(issuer_label, issuer_key.scheme())?, issuer_key)
    }

    pub fn issued_by(self, issuer: &Certificate, issuer_key: &KeyPair) -> Result<Certificate, Error> {
        self.sign(&issuer.subject_label(), issuer_key)
    }

    pub fn self_signed(self, key: &KeyPair) -> Result<Certificate, Error> {
        let label = self.subject.clone();
        self.sign(&label, key)
    }
}

/// Generated files keyed by relative path.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FixtureSet {
    pub files: BTreeMap<String, Vec<u8>>,
}

impl FixtureSet {
    fn put(&mut self, path: &str, contents: impl Into<Vec<u8>>) {
        self.files.insert(path.to_owned(), contents.into());
    }

    pub fn get(&self, path: &str) -> Option<&[u8]> {
        self.files.get(path).map(Vec::as_slice)
    }

    pub fn text(&self, path: &str) -> Option<&str> {
        self.get(path).and_then(|b| std::str::from_utf8(b).ok())
    }

    pub fn certificates(&self, path: &str) -> Result<Vec<Certificate>, Error> {
        let text = self.text(path).ok_or_else(|| Error::Malformed(format!("no fixture {path}")))?;
        crate::cert::parse_certificates(text)
    }

    pub fn expectations(&self) -> Result<Vec<Expectation>, Error> {
        parse_expectations(self.text("expectations.txt").unwrap_or(""))
    }

    /// Parses `scripts/<name>` and loads everything it refers to: the anchors,
    /// each chain (paths are relative to the script) and, if the script uses
    /// `@server`, the certificate server described under `server/`.
    pub fn scenario(&self, script: &str) -> Result<(Vec<Event>, ScenarioContext<KeyPair>), FixtureError> {
        let text = self.text(script).ok_or_else(|| FixtureError::MalformedSpec(format!("no script {script}")))?;
        let events = session::parse_script(text).map_err(fail)?;
        let mut ctx = ScenarioContext::new(self.certificates("roots/root.pcert")?);
        let dir = Path::new(script).parent().unwrap_or(Path::new(""));
        for name in session::referenced_chains(&events) {
            let resolved = normalize(&dir.join(&name));
            ctx.chains.insert(name, self.certificates(&resolved)?);
        }
        let uses_server = events.iter().any(|e| match &e.kind {
            EventKind::Handshake { chain, .. } | EventKind::Refresh { chain, .. } => chain == session::SERVER_CHAIN,
            _ => false,
        });
        if uses_server {
            let parent_chain = self.certificates("server/parent.pcert")?;
            let parent = parent_chain.last().cloned().ok_or_else(|| fail("empty parent chain"))?;
            let key = keyfile::parse_private_key(self.text("server/parent.pkey").unwrap_or(""))?;
            let csr = ProxyCsr::from_document(self.text("server/edge.pcsr").unwrap_or(""))?;
            let schedule = IssuanceSchedule::from_document(self.text("server/schedule.psched").unwrap_or(""))?;
            let server = CertificateServer::new(parent, key, schedule, csr).map_err(fail)?;
            ctx.server = Some((parent_chain, server));
        }
        Ok((events, ctx))
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), Error> {
        for (rel, bytes) in &self.files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| crate::Error::io(parent, e))?;
            }
            std::fs::write(&path, bytes).map_err(|e| crate::Error::io(&path, e))?;
        }
        Ok(())
    }
}

struct Gen {
    seed: u64,
    out: FixtureSet,
    expectations: Vec<String>,
}

impl Gen {
    fn key(&self, label: &str) -> KeyPair {
        self.key_with(SignatureScheme::Ed25519, label)
    }

    fn key_with(&self, scheme: SignatureScheme, label: &str) -> KeyPair {
        KeyPair::from_seed(scheme, derive_seed(self.seed, label))
    }

    fn save_key(&mut self, name: &str, key: &KeyPair) {
        self.out.put(&format!("keys/{name}.pkey"), keyfile::private_key_document(key));
    }

    fn chain(&mut self, name: &str, certs: &[&Certificate]) -> String {
        let path = format!("chains/{name}.pcert");
        self.out.put(&path, write_certificates(certs.iter().copied()));
        path
    }

    fn expect(&mut self, chain: &str, target: &str, at: u64, expected: Option<Reason>) {
        let e = Expectation { chain: chain.to_owned(), target: target.to_owned(), at: Instant(at), expected };
        self.expectations.push(e.to_string());
    }
}

/// Long-lived hierarchy shared by most shapes.
struct Base {
    root: Certificate,
    root_key: KeyPair,
    ca: Certificate,
    ca_key: KeyPair,
    wildcard: Certificate,
    wildcard_key: KeyPair,
}

fn base(g: &mut Gen) -> Result<Base, Error> {
    let root_key = g.key("root");
    let root = CertBuilder::new(ROOT_LABEL, &root_key, 0, LONG).ca(None).self_signed(&root_key)?;
    let ca_key = g.key("ca");
    let ca = CertBuilder::new("ca.pki.test", &ca_key, 0, LONG).ca(Some(0)).serial(2).issued_by(&root, &root_key)?;
    let wildcard_key = g.key("ee-wildcard");
    let wildcard = CertBuilder::new("*.example.com", &wildcard_key, 0, EE_LIFETIME)
        .serial(10)
        .delegation_usage()
        .issued_by(&ca, &ca_key)?;
    g.out.put("roots/root.pcert", root.to_document());
    g.save_key("root", &root_key);
    g.save_key("ca", &ca_key);
    g.save_key("ee-wildcard", &wildcard_key);
    g.chain("ee-wildcard", &[&ca, &wildcard]);
    Ok(Base { root, root_key, ca, ca_key, wildcard, wildcard_key })
}

pub fn generate(spec: &FixtureSpec) -> Result<FixtureSet, FixtureError> {
    if spec.topology.is_empty() {
        return Err(FixtureError::MalformedSpec("empty topology".into()));
    }
    let mut g = Gen { seed: spec.seed, out: FixtureSet::default(), expectations: Vec::new() };
    let b = base(&mut g)?;
    let at = CHECK_AT;
    let edge_key = g.key_with(SignatureScheme::EcdsaP256Sha256, "edge");
    g.save_key("edge", &edge_key);

    if spec.has(Shape::Regular) {
        let key = g.key("ee-www");
        let www = CertBuilder::new("www.example.com", &key, 0, EE_LIFETIME)
            .serial(11)
            .sans(&["api.example.com"])
            .issued_by(&b.ca, &b.ca_key)?;
        g.save_key("ee-www", &key);
        let c = g.chain("regular", &[&b.ca, &www]);
        g.expect(&c, "www.example.com", at, None);
        g.expect(&c, "api.example.com", at, None);
        g.expect(&c, "www.example.com", EE_LIFETIME, Some(Reason::Expired));
        g.expect(&c, "mail.example.com", at, Some(Reason::TargetNameMismatch));
    }

    if spec.has(Shape::NameConstrained) {
        let nc_key = g.key("nc-ca");
        let nc_ca = CertBuilder::new("ca.example.com", &nc_key, 0, LONG)
            .ca(None)
            .serial(3)
            .name_constraints(".example.com")
            .issued_by(&b.root, &b.root_key)?;
        g.save_key("nc-ca", &nc_key);
        let good = CertBuilder::new("shop.example.com", &g.key("nc-good"), 0, EE_LIFETIME)
            .serial(12)
            .issued_by(&nc_ca, &nc_key)?;
        let bad = CertBuilder::new("shop.example.org", &g.key("nc-bad"), 0, EE_LIFETIME)
            .serial(13)
            .issued_by(&nc_ca, &nc_key)?;
        let c = g.chain("nc-good", &[&nc_ca, &good]);
        g.expect(&c, "shop.example.com", at, None);
        let c = g.chain("nc-bad", &[&nc_ca, &bad]);
        g.expect(&c, "shop.example.org", at, Some(Reason::NameConstraintViolation));
    }

    if spec.has(Shape::ShortLived) {
        let key = g.key("ee-short");
        let short = CertBuilder::new("short.example.com", &key, 0, HOUR)
            .serial(14)
            .issued_by(&b.ca, &b.ca_key)?;
        g.save_key("ee-short", &key);
        let c = g.chain("short-lived", &[&b.ca, &short]);
        g.expect(&c, "short.example.com", at, None);
        g.expect(&c, "short.example.com", HOUR, Some(Reason::Expired));
    }

    if spec.has(Shape::Proxy) {
        let w = &b.wildcard;
        let wk = &b.wildcard_key;
        let proxy = CertBuilder::new("www.example.com", &edge_key, 0, DAY).serial(100).issued_by(w, wk)?;
        let c = g.chain("proxy", &[&b.ca, w, &proxy]);
        g.expect(&c, "www.example.com", at, None);
        g.expect(&c, "mail.example.com", at, Some(Reason::TargetNameMismatch));

        let one_level = CertBuilder::new("foo.example.com", &edge_key, 0, DAY).serial(101).issued_by(w, wk)?;
        let c = g.chain("wildcard-depth-ok", &[&b.ca, w, &one_level]);
        g.expect(&c, "foo.example.com", at, None);

        let ca_bit = CertBuilder::new("www.example.com", &edge_key, 0, DAY)
            .serial(102)
            .ca_bit()
            .issued_by(w, wk)?;
        let c = g.chain("proxy-ca-bit", &[&b.ca, w, &ca_bit]);
        g.expect(&c, "www.example.com", at, None);

        // Two-level delegation: an intermediate wildcard proxy narrowed to a
        // single name.
        let mid_key = g.key("proxy-mid");
        let mid = CertBuilder::new("*.example.com", &mid_key, 0, DAY).serial(103).issued_by(w, wk)?;
        let leaf = CertBuilder::new("s1.example.com", &edge_key, 0, DAY).serial(104).issued_by(&mid, &mid_key)?;
        let c = g.chain("proxy-two-level", &[&b.ca, w, &mid, &leaf]);
        g.expect(&c, "s1.example.com", at, None);

        let san = CertBuilder::new("api.example.com", &edge_key, 0, DAY)
            .serial(105)
            .sans(&["cdn.example.com"])
            .issued_by(w, wk)?;
        let c = g.chain("proxy-san", &[&b.ca, w, &san]);
        g.expect(&c, "cdn.example.com", at, None);

        let pl_key = g.key("ee-pathlen");
        let pl = CertBuilder::new("*.example.com", &pl_key, 0, EE_LIFETIME)
            .serial(15)
            .path_len(1)
            .issued_by(&b.ca, &b.ca_key)?;
        let one = CertBuilder::new("www.example.com", &edge_key, 0, DAY).serial(106).issued_by(&pl, &pl_key)?;
        let c = g.chain("proxy-pathlen-ok", &[&b.ca, &pl, &one]);
        g.expect(&c, "www.example.com", at, None);
        let mid = CertBuilder::new("*.example.com", &mid_key, 0, DAY).serial(107).issued_by(&pl, &pl_key)?;
        let two = CertBuilder::new("www.example.com", &edge_key, 0, DAY).serial(108).issued_by(&mid, &mid_key)?;
        let c = g.chain("proxy-pathlen-exceeded", &[&b.ca, &pl, &mid, &two]);
        g.expect(&c, "www.example.com", at, Some(Reason::ProxyPathLenExceeded));
    }

    if spec.has(Shape::Negative) {
        let w = &b.wildcard;
        let wk = &b.wildcard_key;

        let www_key = g.key("ee-www-only");
        let www = CertBuilder::new("www.example.com", &www_key, 0, EE_LIFETIME)
            .serial(16)
            .issued_by(&b.ca, &b.ca_key)?;
        let admin = CertBuilder::new("admin.example.com", &edge_key, 0, DAY).serial(200).issued_by(&www, &www_key)?;
        let c = g.chain("escalation", &[&b.ca, &www, &admin]);
        g.expect(&c, "admin.example.com", at, Some(Reason::NameEscalation));

        let deep = CertBuilder::new("bar.foo.example.com", &edge_key, 0, DAY).serial(201).issued_by(w, wk)?;
        let c = g.chain("wildcard-depth-bad", &[&b.ca, w, &deep]);
        g.expect(&c, "bar.foo.example.com", at, Some(Reason::NameEscalation));

        // A proxy outliving its short-lived parent does not extend the
        // parent's lifetime.
        let short_key = g.key("ee-short-parent");
        let short = CertBuilder::new("www.example.com", &short_key, 0, HOUR)
            .serial(17)
            .delegation_usage()
            .issued_by(&b.ca, &b.ca_key)?;
        let long = CertBuilder::new("www.example.com", &edge_key, 0, EE_LIFETIME).serial(202).issued_by(&short, &short_key)?;
        let c = g.chain("deferred-expiry", &[&b.ca, &short, &long]);
        g.expect(&c, "www.example.com", at, None);
        g.expect(&c, "www.example.com", HOUR, Some(Reason::Expired));
        g.expect(&c, "www.example.com", 30 * DAY, Some(Reason::Expired));

        let mid_key = g.key("proxy-mid-short");
        let mid = CertBuilder::new("*.example.com", &mid_key, 0, 2000).serial(203).issued_by(w, wk)?;
        let leaf = CertBuilder::new("www.example.com", &edge_key, 0, EE_LIFETIME).serial(204).issued_by(&mid, &mid_key)?;
        let c = g.chain("expired-mid-proxy", &[&b.ca, w, &mid, &leaf]);
        g.expect(&c, "www.example.com", at, None);
        g.expect(&c, "www.example.com", 2000, Some(Reason::Expired));
        g.expect(&c, "www.example.com", 60 * DAY, Some(Reason::Expired));

        let later = CertBuilder::new("www.example.com", &edge_key, 5000, 9000).serial(205).issued_by(w, wk)?;
        let c = g.chain("proxy-not-yet-valid", &[&b.ca, w, &later]);
        g.expect(&c, "www.example.com", at, Some(Reason::NotYetValid));
        g.expect(&c, "www.example.com", 5000, None);

        let empty = CertBuilder::new("www.example.com", &edge_key, 0, DAY)
            .serial(206)
            .name_constraints(".example.net")
            .issued_by(w, wk)?;
        let c = g.chain("empty-permitted", &[&b.ca, w, &empty]);
        g.expect(&c, "www.example.com", at, Some(Reason::EmptyPermittedSet));

        let ca2_key = g.key("ca2");
        let ca2 = CertBuilder::new("ca2.pki.test", &ca2_key, 0, LONG).ca(None).serial(4).issued_by(&b.ca, &b.ca_key)?;
        let deep_ee = CertBuilder::new("deep.example.com", &g.key("ee-deep"), 0, EE_LIFETIME)
            .serial(18)
            .issued_by(&ca2, &ca2_key)?;
        let c = g.chain("regular-pathlen-exceeded", &[&b.ca, &ca2, &deep_ee]);
        g.expect(&c, "deep.example.com", at, Some(Reason::PathLenExceeded));

        let rogue_key = g.key("rogue-root");
        let rogue = CertBuilder::new(ROOT_LABEL, &rogue_key, 0, LONG).ca(None).self_signed(&rogue_key)?;
        let rogue_ee = CertBuilder::new("www.example.com", &g.key("ee-rogue"), 0, EE_LIFETIME)
            .serial(19)
            .issued_by(&rogue, &rogue_key)?;
        let c = g.chain("untrusted-anchor", &[&rogue_ee]);
        g.expect(&c, "www.example.com", at, Some(Reason::UntrustedAnchor));

        let forged = CertBuilder::new("www.example.com", &g.key("ee-forged"), 0, EE_LIFETIME)
            .serial(20)
            .sign("ca.pki.test", &rogue_key)?;
        let c = g.chain("bad-signature", &[&b.ca, &forged]);
        g.expect(&c, "www.example.com", at, Some(Reason::BadSignature));

        let misissued = CertBuilder::new("www.example.com", &g.key("ee-other"), 0, EE_LIFETIME)
            .serial(21)
            .sign("other.pki.test", &b.ca_key)?;
        let c = g.chain("issuer-mismatch", &[&b.ca, &misissued]);
        g.expect(&c, "www.example.com", at, Some(Reason::IssuerMismatch));

        let c = g.chain("no-end-entity", &[&b.ca]);
        g.expect(&c, "www.example.com", at, Some(Reason::NoEndEntity));
    }

    if spec.has(Shape::Delegated) {
        let dc_key = g.key_with(SignatureScheme::EcdsaP256Sha256, "dc");
        let now = Instant(at);
        let dc = issue_dc(&b.wildcard, &b.wildcard_key, dc_key.public_key().clone(), DAY, SignatureScheme::EcdsaP256Sha256, now)
            .map_err(fail)?;
        g.out.put("dc/ee.pcert", write_certificates([&b.ca, &b.wildcard]));
        g.out.put("dc/credential.pdc", dc.to_document(&b.wildcard));
        g.out.put("dc/credential.pkey", keyfile::private_key_document(&dc_key));
        let plain_key = g.key("ee-no-du");
        let plain = CertBuilder::new("*.example.com", &plain_key, 0, EE_LIFETIME)
            .serial(22)
            .issued_by(&b.ca, &b.ca_key)?;
        g.out.put("dc/ee-no-delegation-usage.pcert", write_certificates([&b.ca, &plain]));
    }

    if spec.has(Shape::Chaining) {
        let w = &b.wildcard;
        let wk = &b.wildcard_key;
        let first = CertBuilder::new("s1.example.com", &edge_key, 0, HOUR).serial(300).issued_by(w, wk)?;
        g.chain("chaining-1h", &[&b.ca, w, &first]);
        let next = CertBuilder::new("s1.example.com", &edge_key, 2700, 2700 + HOUR).serial(301).issued_by(w, wk)?;
        g.chain("chaining-1h-next", &[&b.ca, w, &next]);
        let pinned = CertBuilder::new("s1.example.com", &edge_key, 0, HOUR)
            .serial(302)
            .resumption_policy(ResumptionPolicy::Disallow)
            .issued_by(w, wk)?;
        g.chain("chaining-1h-disallow", &[&b.ca, w, &pinned]);

        let resumes = "AT 518400 RESUME\nAT 1036800 RESUME\nAT 1555200 RESUME\n";
        for (name, chain, policy) in [
            ("chaining-allow", "chaining-1h", "allow"),
            ("chaining-bound", "chaining-1h", "bound"),
            ("chaining-disallow", "chaining-1h", "disallow"),
            ("chaining-cert-disallow", "chaining-1h-disallow", "allow"),
        ] {
            let script = format!(
                "# 1-hour credential, malicious server, resumption every 6 days\n\
                 AT 0 HANDSHAKE ../chains/{chain}.pcert POLICY {policy} BEHAVIOR malicious\n{resumes}"
            );
            g.out.put(&format!("scripts/{name}.script"), script);
        }
        g.out.put(
            "scripts/chaining-honest.script",
            format!("# honest server caps PSKs at credential expiry\nAT 0 HANDSHAKE ../chains/chaining-1h.pcert POLICY allow\n{resumes}"),
        );
        g.out.put(
            "scripts/refresh.script",
            "# out-of-band refresh extends the bound; a full handshake is the alternative\n\
             AT 0 HANDSHAKE ../chains/chaining-1h.pcert POLICY bound BEHAVIOR malicious\n\
             AT 1800 RESUME\n\
             AT 3000 REFRESH ../chains/chaining-1h-next.pcert\n\
             AT 5000 RESUME\n\
             AT 6000 HANDSHAKE ../chains/chaining-1h-next.pcert POLICY bound\n\
             AT 6300 RESUME\n",
        );
    }

    if spec.has(Shape::Server) {
        let csr = ProxyCsr::new(edge_key.public_key().clone(), NameSet::parse_list("s1.example.com,s2.example.com")?)?;
        let schedule = IssuanceSchedule::new(Instant(at), HOUR, 90 * 60)?;
        g.out.put("server/parent.pcert", write_certificates([&b.ca, &b.wildcard]));
        g.out.put("server/parent.pkey", keyfile::private_key_document(&b.wildcard_key));
        g.out.put("server/edge.pcsr", csr.to_document());
        g.out.put("server/schedule.psched", schedule.to_document());
        g.out.put(
            "scripts/server-lease.script",
            "# pull model: certificates reissued hourly, 90-minute validity\n\
             AT 1000 TICK\n\
             AT 1000 HANDSHAKE @server POLICY bound TARGET s1.example.com\n\
             AT 4600 TICK\n\
             AT 5000 RESUME\n\
             AT 6400 RESUME\n\
             AT 8200 TICK\n\
             AT 8200 HANDSHAKE @server POLICY bound TARGET s2.example.com\n\
             AT 9000 TERMINATE-LEASE\n\
             AT 11800 TICK\n\
             AT 13599 HANDSHAKE @server POLICY bound TARGET s1.example.com\n\
             AT 13600 HANDSHAKE @server POLICY bound TARGET s1.example.com\n",
        );
    }

    let mut manifest = String::from("# <chain> <target> <at> ACCEPT | REJECT <reason>\n");
    for line in &g.expectations {
        manifest.push_str(line);
        manifest.push('\n');
    }
    g.out.put("expectations.txt", manifest);
    g.out.put("fixture.spec", spec_text(spec));
    Ok(g.out)
}

/// Lexically resolves `.` and `..` components into a `/`-separated path.
fn normalize(path: &Path) -> String {
    let mut parts: Vec<String> = Vec::new();
    for c in path.components() {
        match c {
            Component::ParentDir => {
                parts.pop();
            }
            Component::Normal(p) => parts.push(p.to_string_lossy().into_owned()),
            _ => {}
        }
    }
    parts.join("/")
}

fn spec_text(spec: &FixtureSpec) -> String {
    let shapes: Vec<&str> = spec.topology.iter().map(|s| s.as_str()).collect();
    format!("seed {}\nshapes {}\n", spec.seed, shapes.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing() {
        let spec = FixtureSpec::parse("# x\nseed 7\nshapes regular proxy\n").unwrap();
        assert_eq!(spec, FixtureSpec { seed: 7, topology: vec![Shape::Regular, Shape::Proxy] });
        assert_eq!(FixtureSpec::parse(&spec_text(&spec)).unwrap(), spec);
        assert_eq!(FixtureSpec::parse("seed 3").unwrap().topology, Shape::ALL.to_vec());
        for bad in ["", "seed x", "seed 1\nshapes circle", "seed 1\nshapes", "colour blue", "seed 1 2"] {
            assert!(matches!(FixtureSpec::parse(bad), Err(FixtureError::MalformedSpec(_))), "{bad:?}");
        }
        assert!(matches!(
            generate(&FixtureSpec { seed: 1, topology: vec![] }),
            Err(FixtureError::MalformedSpec(_))
        ));
    }

    #[test]
    fn expectation_round_trip() {
        for line in ["chains/a.pcert a.example.com 1000 ACCEPT", "chains/b.pcert b.example.com 5 REJECT Expired"] {
            assert_eq!(line.parse::<Expectation>().unwrap().to_string(), line);
        }
        assert!("x y 1 REJECT Bogus".parse::<Expectation>().is_err());
    }

    #[test]
    fn seeds_change_keys() {
        let a = generate(&FixtureSpec { seed: 1, topology: vec![Shape::Regular] }).unwrap();
        let b = generate(&FixtureSpec { seed: 2, topology: vec![Shape::Regular] }).unwrap();
        assert_ne!(a.get("roots/root.pcert"), b.get("roots/root.pcert"));
    }
}
