//! Proxy CSRs, proxy-certificate issuance and the certificate server that
//! keeps reissuing short-lived proxy certificates until its lease is
//! terminated.

use serde::{Deserialize, Serialize};

use crate::cert::{
    sign_certificate, BasicConstraints, Certificate, Extensions, FailureMode, KeyUsage, ResumptionPolicy,
    TbsCertificate,
};
use crate::crypto::{PublicKey, Signer, SignerError};
use crate::encoding::{self, Block};
use crate::names::{union_san_cn, NameSet};
use crate::time::{Instant, ValidityPeriod};
use crate::Error;

const CSR_LABEL: &str = "PROXY CSR";
const SCHEDULE_LABEL: &str = "ISSUANCE SCHEDULE";

#[derive(Debug, thiserror::Error)]
pub enum IssuanceError {
    #[error("requested names {requested} exceed the parent's permitted names {permitted}")]
    NameEscalation { requested: NameSet, permitted: NameSet },
    #[error("signer is unavailable")]
    SignerUnavailable,
    #[error("signer key does not match the parent certificate's key")]
    SignerKeyMismatch,
    #[error(transparent)]
    Other(#[from] Error),
}

impl From<SignerError> for IssuanceError {
    fn from(e: SignerError) -> Self {
        match e {
            SignerError::Unavailable => IssuanceError::SignerUnavailable,
        }
    }
}

/// An unsigned request for proxy certificates. Carries the edge server's
/// public key, the names it asks for and the policy extensions it should
/// carry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProxyCsr {
    pub public_key: PublicKey,
    pub requested_names: NameSet,
    pub resumption_policy: Option<ResumptionPolicy>,
    pub failure_mode: Option<FailureMode>,
    pub path_len: Option<u32>,
}

impl ProxyCsr {
    pub fn new(public_key: PublicKey, requested_names: NameSet) -> Result<Self, Error> {
        let csr = ProxyCsr {
            public_key,
            requested_names,
            resumption_policy: None,
            failure_mode: None,
            path_len: None,
        };
        csr.check()?;
        Ok(csr)
    }

    fn check(&self) -> Result<(), Error> {
        match &self.requested_names {
            NameSet::Universal => Err(Error::Malformed("a proxy CSR must request a finite set of names".into())),
            NameSet::Finite(s) if s.is_empty() => Err(Error::Malformed("a proxy CSR must request at least one name".into())),
            NameSet::Finite(s) => match s.iter().find(|p| p.is_subtree()) {
                Some(p) => Err(Error::Malformed(format!("requested name {p} must be exact or wildcard"))),
                None => Ok(()),
            },
        }
    }

    pub fn to_document(&self) -> String {
        encoding::write_blocks(&[Block::new(CSR_LABEL, encoding::canonical_string(self))])
    }

    pub fn from_document(text: &str) -> Result<Self, Error> {
        let blocks = encoding::parse_blocks(text)?;
        let block = encoding::expect_block(&mut blocks.iter(), CSR_LABEL)?;
        let csr: ProxyCsr = encoding::decode_canonical(block.body.as_bytes())?;
        csr.check()?;
        Ok(csr)
    }
}

/// Emission `k` has window `[start + k*period, start + k*period + validity)`.
/// `validity > period` so consecutive certificates overlap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssuanceSchedule {
    start: Instant,
    period: u64,
    validity: u64,
}

impl IssuanceSchedule {
    pub fn new(start: Instant, period: u64, validity: u64) -> Result<Self, Error> {
        if period == 0 {
            return Err(Error::Malformed("issuance period must be positive".into()));
        }
        if validity <= period {
            return Err(Error::Malformed(format!(
                "validity {validity}s must exceed period {period}s so consecutive certificates overlap"
            )));
        }
        Ok(IssuanceSchedule { start, period, validity })
    }

    pub fn start(&self) -> Instant {
        self.start
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn validity(&self) -> u64 {
        self.validity
    }

    pub fn window_of(&self, k: u64) -> ValidityPeriod {
        let not_before = self.start + k * self.period;
        ValidityPeriod::starting_at(not_before, self.validity).expect("validity > 0")
    }

    pub fn to_document(&self) -> String {
        encoding::write_blocks(&[Block::new(SCHEDULE_LABEL, encoding::canonical_string(self))])
    }

    pub fn from_document(text: &str) -> Result<Self, Error> {
        let blocks = encoding::parse_blocks(text)?;
        let block = encoding::expect_block(&mut blocks.iter(), SCHEDULE_LABEL)?;
        let raw: IssuanceSchedule = encoding::decode_canonical(block.body.as_bytes())?;
        IssuanceSchedule::new(raw.start, raw.period, raw.validity)
    }
}

pub fn window_of(schedule: &IssuanceSchedule, k: u64) -> ValidityPeriod {
    schedule.window_of(k)
}

/// Names the parent may delegate: its own names, cut down by its name
/// constraints.
pub fn delegable_names(parent: &Certificate) -> NameSet {
    let own = union_san_cn(parent);
    match &parent.extensions().name_constraints {
        Some(nc) => own.intersect(nc),
        None => own,
    }
}

fn check_names(parent: &Certificate, csr: &ProxyCsr) -> Result<(), IssuanceError> {
    let permitted = delegable_names(parent);
    if permitted.intersect(&csr.requested_names) != csr.requested_names {
        return Err(IssuanceError::NameEscalation {
            requested: csr.requested_names.clone(),
            permitted,
        });
    }
    Ok(())
}

/// Issues one proxy certificate below `parent`, signed by `signer` (which
/// must hold the parent's key).
pub fn issue_proxy(
    parent: &Certificate,
    signer: &dyn Signer,
    csr: &ProxyCsr,
    window: ValidityPeriod,
    serial: u64,
) -> Result<Certificate, IssuanceError> {
    check_names(parent, csr)?;
    if signer.public_key() != *parent.public_key() {
        return Err(IssuanceError::SignerKeyMismatch);
    }
    let mut names = csr.requested_names.patterns().expect("checked finite").iter().cloned();
    let common_name = names.next().expect("checked non-empty");
    let tbs = TbsCertificate {
        subject_common_name: common_name,
        issuer: parent.subject_label(),
        serial,
        validity: window,
        public_key: csr.public_key.clone(),
        extensions: Extensions {
            basic_constraints: BasicConstraints { is_ca: false, path_len: csr.path_len },
            key_usage: [KeyUsage::DigitalSignature].into(),
            name_constraints: None,
            subject_alt_names: names.collect(),
            delegation_usage: false,
            resumption_policy: csr.resumption_policy,
            failure_mode: csr.failure_mode,
            logged: false,
        },
        signature_scheme: signer.public_key().scheme(),
    };
    sign_certificate(tbs, signer).map_err(|e| match e {
        Error::Signer(s) => s.into(),
        other => IssuanceError::Other(other),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lease {
    Active,
    Terminated,
}

/// Reissues proxy certificates on a fixed schedule from one CSR. Each
/// emission only moves the validity window (and the serial); a rollover swaps
/// the CSR for subsequent emissions.
pub struct CertificateServer<S: Signer> {
    parent: Certificate,
    signer: S,
    schedule: IssuanceSchedule,
    csr: ProxyCsr,
    lease: Lease,
    issued_count: u64,
    issued: Vec<Certificate>,
}

impl<S: Signer> CertificateServer<S> {
    pub fn new(parent: Certificate, signer: S, schedule: IssuanceSchedule, csr: ProxyCsr) -> Result<Self, IssuanceError> {
        check_names(&parent, &csr)?;
        if signer.public_key() != *parent.public_key() {
            return Err(IssuanceError::SignerKeyMismatch);
        }
        Ok(CertificateServer {
            parent,
            signer,
            schedule,
            csr,
            lease: Lease::Active,
            issued_count: 0,
            issued: Vec::new(),
        })
    }

    pub fn lease(&self) -> Lease {
        self.lease
    }

    pub fn issued_count(&self) -> u64 {
        self.issued_count
    }

    pub fn schedule(&self) -> &IssuanceSchedule {
        &self.schedule
    }

    pub fn parent(&self) -> &Certificate {
        &self.parent
    }

    pub fn signer(&self) -> &S {
        &self.signer
    }

    pub fn issued(&self) -> &[Certificate] {
        &self.issued
    }

    /// Instant at which the next emission becomes due.
    pub fn next_due(&self) -> Instant {
        self.schedule.start + self.issued_count * self.schedule.period
    }

    /// Emits the next certificate if the lease is active and it is due.
    /// At most one certificate per call.
    pub fn tick(&mut self, t: Instant) -> Result<Option<Certificate>, IssuanceError> {
        if self.lease == Lease::Terminated || t < self.next_due() {
            return Ok(None);
        }
        let k = self.issued_count;
        let cert = issue_proxy(&self.parent, &self.signer, &self.csr, self.schedule.window_of(k), k)?;
        self.issued_count += 1;
        self.issued.push(cert.clone());
        Ok(Some(cert))
    }

    /// Retrieval for the pull model: the most recently issued certificate
    /// whose window contains `t`.
    pub fn current(&self, t: Instant) -> Option<&Certificate> {
        self.issued.iter().rev().find(|c| c.validity().contains(t))
    }

    pub fn latest(&self) -> Option<&Certificate> {
        self.issued.last()
    }

    /// Stops issuance for good. Certificates already handed out stay valid
    /// until their own `not_after`.
    pub fn terminate_lease(&mut self) {
        self.lease = Lease::Terminated;
    }

    /// Replaces the CSR used for subsequent emissions.
    pub fn rollover(&mut self, new_csr: ProxyCsr) -> Result<(), IssuanceError> {
        check_names(&self.parent, &new_csr)?;
        self.csr = new_csr;
        Ok(())
    }
}
