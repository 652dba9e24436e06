//! Semantic certificate model: fields, extensions, signing and the `.pcert`
//! document format.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::crypto::{PublicKey, SignatureScheme, SignatureValue, Signer};
use crate::encoding::{self, Block};
use crate::names::{NamePattern, NameSet};
use crate::time::{Instant, ValidityPeriod};
use crate::Error;

const TBS_LABEL: &str = "PROXYCERT TBS";
const SIG_LABEL: &str = "PROXYCERT SIGNATURE";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasicConstraints {
    pub is_ca: bool,
    /// On a CA: maximum number of CA certificates that may follow it.
    /// On an end-entity or proxy certificate: maximum number of proxy
    /// certificates that may follow it.
    pub path_len: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyUsage {
    DigitalSignature,
    KeyCertSign,
}

/// Per-domain session-resumption policy carried in a certificate. The order
/// of variants is the strictness order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResumptionPolicy {
    Allow,
    BoundToCredentialExpiry,
    Disallow,
}

impl ResumptionPolicy {
    /// The stricter of two policies. A domain policy can tighten a client
    /// default but never loosen it.
    pub fn strictest(self, other: ResumptionPolicy) -> ResumptionPolicy {
        self.max(other)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ResumptionPolicy::Allow => "allow",
            ResumptionPolicy::BoundToCredentialExpiry => "bound",
            ResumptionPolicy::Disallow => "disallow",
        }
    }
}

impl FromStr for ResumptionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "allow" => Ok(ResumptionPolicy::Allow),
            "disallow" => Ok(ResumptionPolicy::Disallow),
            "bound" => Ok(ResumptionPolicy::BoundToCredentialExpiry),
            other => Err(Error::Malformed(format!("unknown resumption policy {other:?}"))),
        }
    }
}

impl fmt::Display for ResumptionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureMode {
    HardFail,
    SoftFail,
}

impl FromStr for FailureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "hard" | "hard_fail" => Ok(FailureMode::HardFail),
            "soft" | "soft_fail" => Ok(FailureMode::SoftFail),
            other => Err(Error::Malformed(format!("unknown failure mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Extensions {
    pub basic_constraints: BasicConstraints,
    pub key_usage: BTreeSet<KeyUsage>,
    /// Permitted subtrees; only `.suffix` patterns are allowed.
    pub name_constraints: Option<NameSet>,
    pub subject_alt_names: Vec<NamePattern>,
    pub delegation_usage: bool,
    pub resumption_policy: Option<ResumptionPolicy>,
    pub failure_mode: Option<FailureMode>,
    pub logged: bool,
}

impl Extensions {
    pub fn is_ca(&self) -> bool {
        self.basic_constraints.is_ca
    }

    pub fn path_len(&self) -> Option<u32> {
        self.basic_constraints.path_len
    }

    pub fn has_digital_signature(&self) -> bool {
        self.key_usage.contains(&KeyUsage::DigitalSignature)
    }
}

/// Everything a certificate signature covers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TbsCertificate {
    pub subject_common_name: NamePattern,
    pub issuer: String,
    pub serial: u64,
    pub validity: ValidityPeriod,
    pub public_key: PublicKey,
    pub extensions: Extensions,
    /// Scheme of the issuer's signature over this structure.
    pub signature_scheme: SignatureScheme,
}

impl TbsCertificate {
    /// Structural checks: subject names are exact or wildcard, name
    /// constraints are finite and made of subtrees only.
    pub fn check(&self) -> Result<(), Error> {
        let subject_ok = |p: &NamePattern| !p.is_subtree();
        if !subject_ok(&self.subject_common_name) {
            return Err(Error::InvalidCertificate(format!(
                "common name {} must be an exact or wildcard name",
                self.subject_common_name
            )));
        }
        if let Some(bad) = self.extensions.subject_alt_names.iter().find(|p| !subject_ok(p)) {
            return Err(Error::InvalidCertificate(format!(
                "subject alternative name {bad} must be an exact or wildcard name"
            )));
        }
        match &self.extensions.name_constraints {
            None => {}
            Some(NameSet::Universal) => {
                return Err(Error::InvalidCertificate("name constraints may not be universal".into()))
            }
            Some(NameSet::Finite(set)) => {
                if let Some(bad) = set.iter().find(|p| !p.is_subtree()) {
                    return Err(Error::InvalidCertificate(format!(
                        "name constraint {bad} must be written with a leading dot"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The label subsequent certificates name as their issuer.
    pub fn subject_label(&self) -> String {
        self.subject_common_name.to_string()
    }

    pub fn canonical_encode(&self) -> Vec<u8> {
        encoding::canonical_bytes(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Certificate {
    tbs: TbsCertificate,
    signature: SignatureValue,
}

impl Certificate {
    /// Assembles a certificate without checking the signature. Used when
    /// loading documents and to model tampered or forged certificates.
    pub fn from_parts(tbs: TbsCertificate, signature: SignatureValue) -> Self {
        Certificate { tbs, signature }
    }

    pub fn tbs(&self) -> &TbsCertificate {
        &self.tbs
    }

    pub fn signature(&self) -> &SignatureValue {
        &self.signature
    }

    pub fn public_key(&self) -> &PublicKey {
        &self.tbs.public_key
    }

    pub fn validity(&self) -> ValidityPeriod {
        self.tbs.validity
    }

    pub fn not_after(&self) -> Instant {
        self.tbs.validity.not_after()
    }

    pub fn extensions(&self) -> &Extensions {
        &self.tbs.extensions
    }

    pub fn is_ca(&self) -> bool {
        self.tbs.extensions.is_ca()
    }

    pub fn subject_label(&self) -> String {
        self.tbs.subject_label()
    }

    pub fn issuer(&self) -> &str {
        &self.tbs.issuer
    }

    pub fn is_self_signed(&self) -> bool {
        self.tbs.issuer == self.subject_label() && verify_signature(self, &self.tbs.public_key)
    }

    /// SHA-256 over the canonical TBS encoding.
    pub fn fingerprint(&self) -> [u8; 32] {
        Sha256::digest(self.tbs.canonical_encode()).into()
    }

    pub fn fingerprint_hex(&self) -> String {
        hex::encode(self.fingerprint())
    }

    pub fn to_blocks(&self) -> Vec<Block> {
        vec![
            Block::new(TBS_LABEL, encoding::canonical_string(&self.tbs)),
            Block::new(SIG_LABEL, self.signature.to_string()),
        ]
    }

    /// `.pcert` document text.
    pub fn to_document(&self) -> String {
        encoding::write_blocks(&self.to_blocks())
    }

    pub fn from_document(text: &str) -> Result<Certificate, Error> {
        let mut certs = parse_certificates(text)?;
        if certs.len() != 1 {
            return Err(Error::Malformed(format!("expected one certificate, found {}", certs.len())));
        }
        Ok(certs.remove(0))
    }
}

/// Parses a concatenation of `.pcert` documents, preserving order.
pub fn parse_certificates(text: &str) -> Result<Vec<Certificate>, Error> {
    let blocks = encoding::parse_blocks(text)?;
    if blocks.len() % 2 != 0 {
        return Err(Error::Malformed("certificate document has an odd number of blocks".into()));
    }
    let mut iter = blocks.iter();
    let mut certs = Vec::new();
    while let Ok(tbs_block) = encoding::expect_block(&mut iter, TBS_LABEL) {
        let sig_block = encoding::expect_block(&mut iter, SIG_LABEL)?;
        let tbs: TbsCertificate = encoding::decode_canonical(tbs_block.body.as_bytes())?;
        tbs.check()?;
        let signature = sig_block.body.parse()?;
        certs.push(Certificate::from_parts(tbs, signature));
    }
    if certs.len() * 2 != blocks.len() {
        return Err(Error::Malformed("unexpected block in certificate document".into()));
    }
    Ok(certs)
}

pub fn write_certificates<'a, I: IntoIterator<Item = &'a Certificate>>(certs: I) -> String {
    certs.into_iter().map(Certificate::to_document).collect()
}

pub fn canonical_encode(tbs: &TbsCertificate) -> Vec<u8> {
    tbs.canonical_encode()
}

/// Signs `tbs` with the issuer's signer.
pub fn sign_certificate(tbs: TbsCertificate, issuer: &dyn Signer) -> Result<Certificate, Error> {
    tbs.check()?;
    let key_scheme = issuer.public_key().scheme();
    if key_scheme != tbs.signature_scheme {
        return Err(Error::SchemeMismatch { declared: tbs.signature_scheme, key: key_scheme });
    }
    let signature = issuer.sign(&tbs.canonical_encode())?;
    Ok(Certificate { tbs, signature })
}

/// True iff the signature is valid over the canonical TBS bytes under
/// `issuer_key` and the declared scheme matches the key.
pub fn verify_signature(cert: &Certificate, issuer_key: &PublicKey) -> bool {
    cert.tbs.signature_scheme == issuer_key.scheme()
        && issuer_key.verify(&cert.tbs.canonical_encode(), &cert.signature)
}

pub fn within_validity(cert: &Certificate, t: Instant) -> bool {
    cert.tbs.validity.contains(t)
}
