//! Deterministic simulation of TLS sessions, PSK resumption and the policies
//! that keep resumption from outliving a short-lived credential.
//!
//! A full handshake validates the presented credential and may provision a
//! single-use PSK. Each resumption consumes the PSK and may provision a new
//! one, so a server that always hands out maximum-lifetime PSKs can keep a
//! session alive indefinitely. The client-side policy decides whether that
//! is allowed:
//!
//! * `Allow`: resumption is only limited by PSK lifetimes;
//! * `BoundToCredentialExpiry`: no resumption at or after the expiry of the
//!   credential validated in the full handshake;
//! * `Disallow`: no resumption at all.
//!
//! The policy in force is the stricter of the client default and the
//! `resumption_policy` extension of the validated leaf certificate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::cert::{Certificate, ResumptionPolicy};
use crate::crypto::SignatureScheme;
use crate::dc::{validate_dc, DcReject, DelegatedCredential};
use crate::issuance::{CertificateServer, IssuanceError};
use crate::names::DnsName;
use crate::path::{self, Reason};
use crate::time::{Instant, WEEK};
use crate::{Error, Signer};

/// Upper bound on any PSK lifetime.
pub const MAX_PSK_LIFETIME: u64 = WEEK;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ServerBehavior {
    /// Issues PSKs that expire no later than the credential it authenticated
    /// with.
    Honest,
    /// Always issues maximum-lifetime PSKs and reissues on every resumption.
    MaliciousChainer,
}

impl FromStr for ServerBehavior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "honest" => Ok(ServerBehavior::Honest),
            "malicious" => Ok(ServerBehavior::MaliciousChainer),
            other => Err(Error::Malformed(format!("unknown server behavior {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Psk {
    pub id: u64,
    pub session: u64,
    pub issued_at: Instant,
    /// Seconds from `issued_at`, at most [`MAX_PSK_LIFETIME`].
    pub lifetime: u64,
    pub issuer_credential_expiry: Instant,
    pub lineage_depth: u32,
    pub policy: ResumptionPolicy,
}

impl Psk {
    pub fn expiry(&self) -> Instant {
        self.issued_at + self.lifetime
    }

    /// Last usable instant plus one, taking the policy into account: under
    /// `BoundToCredentialExpiry` the PSK dies with the credential.
    pub fn effective_expiry(&self) -> Instant {
        match self.policy {
            ResumptionPolicy::BoundToCredentialExpiry => self.expiry().min(self.issuer_credential_expiry),
            _ => self.expiry(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConnectionKind {
    Full,
    Resumed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection {
    pub session: u64,
    pub established_at: Instant,
    pub kind: ConnectionKind,
    pub policy_in_effect: ResumptionPolicy,
    pub credential_expiry: Instant,
    /// Fingerprint prefix of the leaf certificate (or credential key) that
    /// authenticated the session.
    pub credential: String,
}

/// What the server presents in a full handshake.
#[derive(Clone, Copy, Debug)]
pub enum Presented<'a> {
    Chain {
        chain: &'a [Certificate],
        target: &'a DnsName,
    },
    Delegated {
        chain: &'a [Certificate],
        target: &'a DnsName,
        dc: &'a DelegatedCredential,
        handshake_scheme: SignatureScheme,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HandshakeReject {
    Chain(Reason),
    Credential(DcReject),
}

impl fmt::Display for HandshakeReject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HandshakeReject::Chain(r) => write!(f, "{r}"),
            HandshakeReject::Credential(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResumeReject {
    PskExpired,
    PskConsumed,
    PolicyForbidsResumption,
    CredentialExpired,
    NoPsk,
}

impl ResumeReject {
    pub fn code(self) -> &'static str {
        match self {
            ResumeReject::PskExpired => "PskExpired",
            ResumeReject::PskConsumed => "PskConsumed",
            ResumeReject::PolicyForbidsResumption => "PolicyForbidsResumption",
            ResumeReject::CredentialExpired => "CredentialExpired",
            ResumeReject::NoPsk => "NoPsk",
        }
    }
}

impl fmt::Display for ResumeReject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

fn short_fingerprint(cert: &Certificate) -> String {
    cert.fingerprint_hex()[..16].to_owned()
}

/// Client and server session state for one simulation.
#[derive(Debug, Default)]
pub struct Simulator {
    anchors: Vec<Certificate>,
    consumed: BTreeSet<u64>,
    next_psk: u64,
    next_session: u64,
}

impl Simulator {
    pub fn new(anchors: Vec<Certificate>) -> Self {
        Simulator { anchors, ..Simulator::default() }
    }

    fn fresh_psk(
        &mut self,
        session: u64,
        t: Instant,
        credential_expiry: Instant,
        lineage_depth: u32,
        policy: ResumptionPolicy,
        behavior: ServerBehavior,
    ) -> Option<Psk> {
        if policy == ResumptionPolicy::Disallow {
            return None;
        }
        let lifetime = match behavior {
            ServerBehavior::MaliciousChainer => MAX_PSK_LIFETIME,
            ServerBehavior::Honest => MAX_PSK_LIFETIME.min(credential_expiry.since(t)),
        };
        if lifetime == 0 {
            return None;
        }
        self.next_psk += 1;
        Some(Psk {
            id: self.next_psk,
            session,
            issued_at: t,
            lifetime,
            issuer_credential_expiry: credential_expiry,
            lineage_depth,
            policy,
        })
    }

    /// Runs a full handshake at `t`. `client_policy` is the client's default;
    /// a stricter policy in the validated leaf certificate takes precedence.
    pub fn full_handshake(
        &mut self,
        presented: Presented<'_>,
        t: Instant,
        client_policy: ResumptionPolicy,
        behavior: ServerBehavior,
    ) -> Result<(Connection, Option<Psk>), HandshakeReject> {
        let (chain, target) = match presented {
            Presented::Chain { chain, target } | Presented::Delegated { chain, target, .. } => (chain, target),
        };
        let outcome = path::validate(chain, &self.anchors, t, target);
        if let Some(reason) = outcome.reason {
            return Err(HandshakeReject::Chain(reason));
        }
        let leaf = chain.last().expect("validated chain is non-empty");
        let mut credential_expiry = chain.iter().map(Certificate::not_after).min().expect("non-empty");
        let mut credential = short_fingerprint(leaf);
        if let Presented::Delegated { dc, handshake_scheme, .. } = presented {
            validate_dc(dc, leaf, t, handshake_scheme).map_err(HandshakeReject::Credential)?;
            credential_expiry = credential_expiry.min(dc.expiry(leaf));
            credential = dc.public_key.fingerprint();
        }
        let policy = match leaf.extensions().resumption_policy {
            Some(domain) => client_policy.strictest(domain),
            None => client_policy,
        };
        self.next_session += 1;
        let session = self.next_session;
        let conn = Connection {
            session,
            established_at: t,
            kind: ConnectionKind::Full,
            policy_in_effect: policy,
            credential_expiry,
            credential,
        };
        let psk = self.fresh_psk(session, t, credential_expiry, 0, policy, behavior);
        Ok((conn, psk))
    }

    /// Attempts PSK resumption at `t`. On success the PSK is consumed and a
    /// successor may be provisioned.
    pub fn resume(
        &mut self,
        psk: &Psk,
        t: Instant,
        client_policy: ResumptionPolicy,
        behavior: ServerBehavior,
    ) -> Result<(Connection, Option<Psk>), ResumeReject> {
        if self.consumed.contains(&psk.id) {
            return Err(ResumeReject::PskConsumed);
        }
        let policy = client_policy.strictest(psk.policy);
        match policy {
            ResumptionPolicy::Disallow => return Err(ResumeReject::PolicyForbidsResumption),
            ResumptionPolicy::BoundToCredentialExpiry if t >= psk.issuer_credential_expiry => {
                return Err(ResumeReject::CredentialExpired)
            }
            _ => {}
        }
        if t >= psk.expiry() {
            return Err(ResumeReject::PskExpired);
        }
        self.consumed.insert(psk.id);
        let conn = Connection {
            session: psk.session,
            established_at: t,
            kind: ConnectionKind::Resumed,
            policy_in_effect: policy,
            credential_expiry: psk.issuer_credential_expiry,
            credential: String::new(),
        };
        let next = self.fresh_psk(psk.session, t, psk.issuer_credential_expiry, psk.lineage_depth + 1, policy, behavior);
        Ok((conn, next))
    }

    pub fn is_consumed(&self, psk: &Psk) -> bool {
        self.consumed.contains(&psk.id)
    }
}

/// Chain reference in a script: a named chain file, or `@server` for the
/// certificate server's current proxy certificate appended to its parent
/// chain.
pub const SERVER_CHAIN: &str = "@server";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventKind {
    Handshake {
        chain: String,
        policy: ResumptionPolicy,
        behavior: ServerBehavior,
        target: Option<String>,
    },
    Resume,
    /// Out-of-band delivery of a fresher certificate for the current session.
    Refresh {
        chain: String,
        target: Option<String>,
    },
    Tick,
    TerminateLease,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub at: Instant,
    pub kind: EventKind,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AT {} ", self.at)?;
        match &self.kind {
            EventKind::Handshake { chain, policy, behavior, target } => {
                write!(f, "HANDSHAKE {chain} POLICY {policy}")?;
                if *behavior == ServerBehavior::MaliciousChainer {
                    f.write_str(" BEHAVIOR malicious")?;
                }
                if let Some(t) = target {
                    write!(f, " TARGET {t}")?;
                }
                Ok(())
            }
            EventKind::Resume => f.write_str("RESUME"),
            EventKind::Refresh { chain, target } => {
                write!(f, "REFRESH {chain}")?;
                if let Some(t) = target {
                    write!(f, " TARGET {t}")?;
                }
                Ok(())
            }
            EventKind::Tick => f.write_str("TICK"),
            EventKind::TerminateLease => f.write_str("TERMINATE-LEASE"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScriptError {
    #[error("line {line}: {message}")]
    MalformedScript { line: usize, message: String },
    #[error(transparent)]
    Issuance(#[from] IssuanceError),
}

fn malformed(line: usize, message: impl Into<String>) -> ScriptError {
    ScriptError::MalformedScript { line, message: message.into() }
}

/// Optional trailing `KEY value` pairs after the fixed part of an event.
fn options<'a>(line: usize, rest: &[&'a str], allowed: &[&str]) -> Result<BTreeMap<String, &'a str>, ScriptError> {
    if !rest.len().is_multiple_of(2) {
        return Err(malformed(line, "options must be KEY value pairs"));
    }
    let mut out = BTreeMap::new();
    for pair in rest.chunks(2) {
        if !allowed.contains(&pair[0]) {
            return Err(malformed(line, format!("unexpected option {}", pair[0])));
        }
        if out.insert(pair[0].to_owned(), pair[1]).is_some() {
            return Err(malformed(line, format!("duplicate option {}", pair[0])));
        }
    }
    Ok(out)
}

/// Parses a scenario script. Blank lines and `#` comments are ignored;
/// events must be in non-decreasing time order.
pub fn parse_script(text: &str) -> Result<Vec<Event>, ScriptError> {
    let mut events: Vec<Event> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        if words.len() < 3 || words[0] != "AT" {
            return Err(malformed(line, "expected `AT <t> <EVENT> ...`"));
        }
        let at = Instant(words[1].parse().map_err(|_| malformed(line, format!("bad time {:?}", words[1])))?);
        if let Some(prev) = events.last() {
            if at < prev.at {
                return Err(malformed(line, "events are not in time order"));
            }
        }
        let kind = match words[2] {
            "HANDSHAKE" => {
                if words.len() < 4 {
                    return Err(malformed(line, "HANDSHAKE needs a chain"));
                }
                let opts = options(line, &words[4..], &["POLICY", "BEHAVIOR", "TARGET"])?;
                let policy = opts
                    .get("POLICY")
                    .ok_or_else(|| malformed(line, "HANDSHAKE needs POLICY"))?
                    .parse()
                    .map_err(|e: Error| malformed(line, e.to_string()))?;
                let behavior = match opts.get("BEHAVIOR") {
                    Some(b) => b.parse().map_err(|e: Error| malformed(line, e.to_string()))?,
                    None => ServerBehavior::Honest,
                };
                EventKind::Handshake {
                    chain: words[3].to_owned(),
                    policy,
                    behavior,
                    target: opts.get("TARGET").map(|s| s.to_string()),
                }
            }
            "RESUME" if words.len() == 3 => EventKind::Resume,
            "REFRESH" => {
                if words.len() < 4 {
                    return Err(malformed(line, "REFRESH needs a chain"));
                }
                let opts = options(line, &words[4..], &["TARGET"])?;
                EventKind::Refresh { chain: words[3].to_owned(), target: opts.get("TARGET").map(|s| s.to_string()) }
            }
            "TICK" if words.len() == 3 => EventKind::Tick,
            "TERMINATE-LEASE" if words.len() == 3 => EventKind::TerminateLease,
            other => return Err(malformed(line, format!("unknown or malformed event {other}"))),
        };
        events.push(Event { at, kind });
    }
    Ok(events)
}

pub fn write_script(events: &[Event]) -> String {
    events.iter().map(|e| format!("{e}\n")).collect()
}

/// Chain files a script refers to, excluding `@server`.
pub fn referenced_chains(events: &[Event]) -> BTreeSet<String> {
    events
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::Handshake { chain, .. } | EventKind::Refresh { chain, .. } => Some(chain.clone()),
            _ => None,
        })
        .filter(|c| c != SERVER_CHAIN)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub at: Instant,
    pub event: &'static str,
    pub accepted: bool,
    pub detail: String,
    pub session: Option<u64>,
    pub lineage: Option<u32>,
    pub psk_expiry: Option<Instant>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CredentialSummary {
    pub expiry: Instant,
    pub last_connection: Instant,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
    /// Per credential: its expiry and the latest instant any connection
    /// authenticated by it existed.
    pub credentials: BTreeMap<String, CredentialSummary>,
}

impl Trace {
    pub fn full_handshakes(&self) -> usize {
        self.entries.iter().filter(|e| e.event == "HANDSHAKE" && e.accepted).count()
    }

    pub fn connections(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| (e.event == "HANDSHAKE" || e.event == "RESUME") && e.accepted)
            .count()
    }

    pub fn max_connection_instant(&self) -> Option<Instant> {
        self.credentials.values().map(|c| c.last_connection).max()
    }

    pub fn max_lineage(&self) -> Option<u32> {
        self.entries.iter().filter(|e| e.accepted).filter_map(|e| e.lineage).max()
    }

    /// Tab-separated rendering: a header, one line per event, then one
    /// `#credential` line per credential.
    pub fn to_tsv(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        let mut out = String::from("t\tevent\tverdict\tdetail\tsession\tlineage\tpsk_expiry\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                e.at,
                e.event,
                if e.accepted { "ACCEPT" } else { "REJECT" },
                if e.detail.is_empty() { "-" } else { &e.detail },
                opt(e.session.map(|s| s.to_string())),
                opt(e.lineage.map(|l| l.to_string())),
                opt(e.psk_expiry.map(|t| t.to_string())),
            ));
        }
        for (id, c) in &self.credentials {
            out.push_str(&format!(
                "#credential\t{id}\texpiry\t{}\tlast_connection\t{}\n",
                c.expiry, c.last_connection
            ));
        }
        out
    }
}

/// Everything a script needs besides its events.
pub struct ScenarioContext<S: Signer> {
    pub anchors: Vec<Certificate>,
    pub chains: BTreeMap<String, Vec<Certificate>>,
    /// Parent chain (ending in the certificate the server issues under)
    /// together with the server.
    pub server: Option<(Vec<Certificate>, CertificateServer<S>)>,
}

impl<S: Signer> ScenarioContext<S> {
    pub fn new(anchors: Vec<Certificate>) -> Self {
        ScenarioContext { anchors, chains: BTreeMap::new(), server: None }
    }
}

struct ClientState {
    psk: Option<Psk>,
    policy: ResumptionPolicy,
    behavior: ServerBehavior,
    credential: String,
}

fn default_target(chain: &[Certificate]) -> Option<DnsName> {
    let leaf = chain.last()?;
    let tbs = leaf.tbs();
    std::iter::once(&tbs.subject_common_name)
        .chain(tbs.extensions.subject_alt_names.iter())
        .find_map(|p| p.as_exact().cloned())
}

fn resolve_chain<S: Signer>(ctx: &ScenarioContext<S>, name: &str, at: Instant) -> Option<Vec<Certificate>> {
    if name == SERVER_CHAIN {
        let (parent_chain, server) = ctx.server.as_ref()?;
        let mut chain = parent_chain.clone();
        chain.push(server.current(at)?.clone());
        Some(chain)
    } else {
        ctx.chains.get(name).cloned()
    }
}

/// Runs a script. A single client is modeled; `RESUME` uses the PSK of the
/// most recent session.
pub fn run_scenario<S: Signer>(events: &[Event], ctx: &mut ScenarioContext<S>) -> Result<Trace, ScriptError> {
    let mut sim = Simulator::new(ctx.anchors.clone());
    let mut trace = Trace::default();
    let mut client: Option<ClientState> = None;
    let mut last_at = Instant(0);

    for (i, event) in events.iter().enumerate() {
        if event.at < last_at {
            return Err(malformed(i + 1, "events are not in time order"));
        }
        last_at = event.at;
        let at = event.at;
        let mut entry = TraceEntry {
            at,
            event: "",
            accepted: true,
            detail: String::new(),
            session: None,
            lineage: None,
            psk_expiry: None,
        };
        match &event.kind {
            EventKind::Handshake { chain, policy, behavior, target } => {
                entry.event = "HANDSHAKE";
                match resolve_chain(ctx, chain, at) {
                    None if chain == SERVER_CHAIN => {
                        entry.accepted = false;
                        entry.detail = "NoCurrentCertificate".into();
                    }
                    None => return Err(malformed(i + 1, format!("unknown chain {chain}"))),
                    Some(certs) => {
                        let target = match target {
                            Some(t) => t.parse().map_err(|e: Error| malformed(i + 1, e.to_string()))?,
                            None => default_target(&certs)
                                .ok_or_else(|| malformed(i + 1, "no TARGET and the leaf has no exact name"))?,
                        };
                        match sim.full_handshake(Presented::Chain { chain: &certs, target: &target }, at, *policy, *behavior) {
                            Ok((conn, psk)) => {
                                entry.session = Some(conn.session);
                                entry.lineage = psk.as_ref().map(|p| p.lineage_depth);
                                entry.psk_expiry = psk.as_ref().map(Psk::effective_expiry);
                                entry.detail = format!("policy={}", conn.policy_in_effect);
                                let summary = trace.credentials.entry(conn.credential.clone()).or_default();
                                summary.expiry = conn.credential_expiry;
                                summary.last_connection = summary.last_connection.max(at);
                                client = Some(ClientState {
                                    psk,
                                    policy: conn.policy_in_effect,
                                    behavior: *behavior,
                                    credential: conn.credential,
                                });
                            }
                            Err(reason) => {
                                entry.accepted = false;
                                entry.detail = reason.to_string();
                            }
                        }
                    }
                }
            }
            EventKind::Resume => {
                entry.event = "RESUME";
                let Some(state) = client.as_mut() else {
                    return Err(malformed(i + 1, "RESUME before any successful handshake"));
                };
                let result = match &state.psk {
                    Some(psk) => sim.resume(psk, at, state.policy, state.behavior),
                    None if state.policy == ResumptionPolicy::Disallow => Err(ResumeReject::PolicyForbidsResumption),
                    None => Err(ResumeReject::NoPsk),
                };
                match result {
                    Ok((conn, next)) => {
                        entry.session = Some(conn.session);
                        entry.lineage = next.as_ref().map(|p| p.lineage_depth);
                        entry.psk_expiry = next.as_ref().map(Psk::effective_expiry);
                        let summary = trace.credentials.entry(state.credential.clone()).or_default();
                        summary.last_connection = summary.last_connection.max(at);
                        state.psk = next;
                    }
                    Err(reason) => {
                        entry.accepted = false;
                        entry.detail = reason.to_string();
                        entry.session = state.psk.as_ref().map(|p| p.session);
                    }
                }
            }
            EventKind::Refresh { chain, target } => {
                entry.event = "REFRESH";
                let Some(state) = client.as_mut() else {
                    return Err(malformed(i + 1, "REFRESH before any successful handshake"));
                };
                let certs = match resolve_chain(ctx, chain, at) {
                    Some(c) => c,
                    None if chain == SERVER_CHAIN => {
                        entry.accepted = false;
                        entry.detail = "NoCurrentCertificate".into();
                        trace.entries.push(entry);
                        continue;
                    }
                    None => return Err(malformed(i + 1, format!("unknown chain {chain}"))),
                };
                let target = match target {
                    Some(t) => t.parse().map_err(|e: Error| malformed(i + 1, e.to_string()))?,
                    None => default_target(&certs)
                        .ok_or_else(|| malformed(i + 1, "no TARGET and the leaf has no exact name"))?,
                };
                let outcome = path::validate(&certs, &ctx.anchors, at, &target);
                match outcome.reason {
                    Some(reason) => {
                        entry.accepted = false;
                        entry.detail = reason.to_string();
                    }
                    None => {
                        let expiry = certs.iter().map(Certificate::not_after).min().expect("non-empty");
                        if let Some(psk) = state.psk.as_mut() {
                            psk.issuer_credential_expiry = psk.issuer_credential_expiry.max(expiry);
                            entry.session = Some(psk.session);
                        }
                        if let Some(summary) = trace.credentials.get_mut(&state.credential) {
                            summary.expiry = summary.expiry.max(expiry);
                        }
                        entry.detail = format!("credential_expiry={expiry}");
                    }
                }
            }
            EventKind::Tick => {
                entry.event = "TICK";
                let Some((_, server)) = ctx.server.as_mut() else {
                    return Err(malformed(i + 1, "TICK without a certificate server"));
                };
                match server.tick(at)? {
                    Some(cert) => {
                        entry.detail = format!(
                            "issued serial={} window=[{},{})",
                            cert.tbs().serial,
                            cert.validity().not_before(),
                            cert.validity().not_after()
                        )
                    }
                    None => entry.detail = "idle".into(),
                }
            }
            EventKind::TerminateLease => {
                entry.event = "TERMINATE-LEASE";
                let Some((_, server)) = ctx.server.as_mut() else {
                    return Err(malformed(i + 1, "TERMINATE-LEASE without a certificate server"));
                };
                server.terminate_lease();
            }
        }
        trace.entries.push(entry);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print_round_trip() {
        let text = "\
# comment
AT 0 HANDSHAKE chain.pcert POLICY allow BEHAVIOR malicious
AT 10 RESUME
AT 20 REFRESH next.pcert TARGET s1.example.com
AT 30 TICK
AT 40 TERMINATE-LEASE
";
        let events = parse_script(text).unwrap();
        assert_eq!(events.len(), 5);
        assert_eq!(parse_script(&write_script(&events)).unwrap(), events);
        assert_eq!(
            referenced_chains(&events).into_iter().collect::<Vec<_>>(),
            vec!["chain.pcert".to_owned(), "next.pcert".to_owned()]
        );
    }

    #[test]
    fn malformed_scripts() {
        for bad in [
            "AT x RESUME",
            "AT 5 RESUME\nAT 4 RESUME",
            "AT 0 HANDSHAKE c POLICY sometimes",
            "AT 0 HANDSHAKE c",
            "AT 0 HANDSHAKE c POLICY allow EXTRA",
            "AT 0 FLY",
            "RESUME",
            "AT 0 RESUME now",
        ] {
            assert!(
                matches!(parse_script(bad), Err(ScriptError::MalformedScript { .. })),
                "{bad:?} should be rejected"
            );
        }
    }

    #[test]
    fn empty_script_empty_trace() {
        let mut ctx: ScenarioContext<crate::KeyPair> = ScenarioContext::new(Vec::new());
        let trace = run_scenario(&[], &mut ctx).unwrap();
        assert_eq!(trace, Trace::default());
    }
}
