//! Delegated credentials.
//!
//! A credential is a public key, a validity time counted from the end-entity
//! certificate's `not_before`, the signature scheme the handshake must use,
//! and the end-entity key's signature over all of that plus the certificate's
//! fingerprint. The fingerprint ties a credential to exactly one
//! certificate.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cert::Certificate;
use crate::crypto::{PublicKey, SignatureScheme, SignatureValue, Signer};
use crate::encoding::{self, Block};
use crate::time::{Instant, WEEK};
use crate::Error;

/// Longest permitted credential lifetime, in seconds.
pub const MAX_DC_LIFETIME: u64 = WEEK;

const BINDING_LABEL: &str = "DELEGATED CREDENTIAL BINDING";
const SIG_LABEL: &str = "DELEGATED CREDENTIAL SIGNATURE";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DcReject {
    MissingDelegationUsage,
    MissingDigitalSignatureBit,
    TtlTooLong,
    EeExpired,
    DcExpired,
    DcLifetimeTooLong,
    SchemeMismatch,
    BadDcSignature,
}

impl DcReject {
    pub fn code(self) -> &'static str {
        match self {
            DcReject::MissingDelegationUsage => "MissingDelegationUsage",
            DcReject::MissingDigitalSignatureBit => "MissingDigitalSignatureBit",
            DcReject::TtlTooLong => "TtlTooLong",
            DcReject::EeExpired => "EeExpired",
            DcReject::DcExpired => "DcExpired",
            DcReject::DcLifetimeTooLong => "DcLifetimeTooLong",
            DcReject::SchemeMismatch => "SchemeMismatch",
            DcReject::BadDcSignature => "BadDcSignature",
        }
    }
}

impl fmt::Display for DcReject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl std::error::Error for DcReject {}

#[derive(Debug, thiserror::Error)]
pub enum DcIssueError {
    #[error("{0}")]
    Rejected(DcReject),
    #[error(transparent)]
    Other(#[from] Error),
}

impl From<DcReject> for DcIssueError {
    fn from(r: DcReject) -> Self {
        DcIssueError::Rejected(r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelegatedCredential {
    pub public_key: PublicKey,
    /// Seconds after the end-entity certificate's `not_before` at which the
    /// credential expires.
    pub relative_ttl: u64,
    pub handshake_scheme: SignatureScheme,
    pub signature: SignatureValue,
}

/// The signed content of a delegated credential.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DcBinding {
    pub ee_fingerprint: String,
    pub public_key: PublicKey,
    pub relative_ttl: u64,
    pub handshake_scheme: SignatureScheme,
}

impl DcBinding {
    pub fn for_certificate(ee: &Certificate, public_key: PublicKey, relative_ttl: u64, handshake_scheme: SignatureScheme) -> Self {
        DcBinding { ee_fingerprint: ee.fingerprint_hex(), public_key, relative_ttl, handshake_scheme }
    }

    pub fn canonical_encode(&self) -> Vec<u8> {
        encoding::canonical_bytes(self)
    }

    /// Signs without any of the issuance checks. This is what a careless or
    /// malicious issuer would do; validators must not rely on issuance
    /// having been checked.
    pub fn sign(self, signer: &dyn Signer) -> Result<(DelegatedCredential, String), Error> {
        let signature = signer.sign(&self.canonical_encode())?;
        let dc = DelegatedCredential {
            public_key: self.public_key,
            relative_ttl: self.relative_ttl,
            handshake_scheme: self.handshake_scheme,
            signature,
        };
        Ok((dc, self.ee_fingerprint))
    }
}

impl DelegatedCredential {
    pub fn binding(&self, ee: &Certificate) -> DcBinding {
        DcBinding::for_certificate(ee, self.public_key.clone(), self.relative_ttl, self.handshake_scheme)
    }

    /// `ee.not_before + relative_ttl`: first instant the credential is no
    /// longer valid.
    pub fn expiry(&self, ee: &Certificate) -> Instant {
        ee.validity().not_before() + self.relative_ttl
    }

    /// `.pdc` document; the binding (including the fingerprint of `ee`)
    /// followed by the signature.
    pub fn to_document(&self, ee: &Certificate) -> String {
        encoding::write_blocks(&[
            Block::new(BINDING_LABEL, encoding::canonical_string(&self.binding(ee))),
            Block::new(SIG_LABEL, self.signature.to_string()),
        ])
    }

    /// Parses a `.pdc` document, returning the credential and the
    /// fingerprint of the certificate it claims to be bound to.
    pub fn from_document(text: &str) -> Result<(DelegatedCredential, String), Error> {
        let blocks = encoding::parse_blocks(text)?;
        let mut iter = blocks.iter();
        let binding: DcBinding =
            encoding::decode_canonical(encoding::expect_block(&mut iter, BINDING_LABEL)?.body.as_bytes())?;
        let signature = encoding::expect_block(&mut iter, SIG_LABEL)?.body.parse()?;
        if iter.next().is_some() {
            return Err(Error::Malformed("trailing blocks after delegated credential".into()));
        }
        let dc = DelegatedCredential {
            public_key: binding.public_key,
            relative_ttl: binding.relative_ttl,
            handshake_scheme: binding.handshake_scheme,
            signature,
        };
        Ok((dc, binding.ee_fingerprint))
    }
}

fn check_ee_extensions(ee: &Certificate) -> Result<(), DcReject> {
    if !ee.extensions().delegation_usage {
        return Err(DcReject::MissingDelegationUsage);
    }
    if !ee.extensions().has_digital_signature() {
        return Err(DcReject::MissingDigitalSignatureBit);
    }
    Ok(())
}

/// Issues a credential valid for `ttl_from_now` seconds from `now`.
pub fn issue_dc(
    ee: &Certificate,
    ee_signer: &dyn Signer,
    dc_public_key: PublicKey,
    ttl_from_now: u64,
    handshake_scheme: SignatureScheme,
    now: Instant,
) -> Result<DelegatedCredential, DcIssueError> {
    check_ee_extensions(ee)?;
    if !ee.validity().contains(now) {
        return Err(DcReject::EeExpired.into());
    }
    if ttl_from_now == 0 {
        return Err(Error::Malformed("credential ttl must be positive".into()).into());
    }
    if ttl_from_now > MAX_DC_LIFETIME {
        return Err(DcReject::TtlTooLong.into());
    }
    if ee_signer.public_key() != *ee.public_key() {
        return Err(Error::Malformed("signer does not hold the end-entity key".into()).into());
    }
    let relative_ttl = (now + ttl_from_now).since(ee.validity().not_before());
    let binding = DcBinding::for_certificate(ee, dc_public_key, relative_ttl, handshake_scheme);
    Ok(binding.sign(ee_signer)?.0)
}

/// Validates `dc` against the end-entity certificate `ee` for a handshake
/// signed with `handshake_scheme` at time `t`.
///
/// The lifetime ceiling is applied to the remaining validity at `t`
/// (`expiry - t <= 7 days`); issuance time is not part of the credential.
pub fn validate_dc(
    dc: &DelegatedCredential,
    ee: &Certificate,
    t: Instant,
    handshake_scheme: SignatureScheme,
) -> Result<(), DcReject> {
    check_ee_extensions(ee)?;
    if !ee.public_key().verify(&dc.binding(ee).canonical_encode(), &dc.signature) {
        return Err(DcReject::BadDcSignature);
    }
    if handshake_scheme != dc.handshake_scheme {
        return Err(DcReject::SchemeMismatch);
    }
    if !ee.validity().contains(t) {
        return Err(DcReject::EeExpired);
    }
    let expiry = dc.expiry(ee);
    if t >= expiry {
        return Err(DcReject::DcExpired);
    }
    if expiry.since(t) > MAX_DC_LIFETIME {
        return Err(DcReject::DcLifetimeTooLong);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Served {
    DelegatedCredential,
    FullChainOnly,
}

/// A server presents its credential only to clients that advertised support
/// with an (empty) extension in their hello.
pub fn negotiate(client_sent_dc_extension: bool, server_has_dc: bool) -> Served {
    if client_sent_dc_extension && server_has_dc {
        Served::DelegatedCredential
    } else {
        Served::FullChainOnly
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::{sign_certificate, Extensions, KeyUsage, TbsCertificate};
    use crate::crypto::{derive_seed, KeyPair};
    use crate::time::{ValidityPeriod, DAY};

    fn key(label: &str) -> KeyPair {
        KeyPair::from_seed(SignatureScheme::Ed25519, derive_seed(31, label))
    }

    fn ee(du: bool, ds: bool, label: &str) -> (Certificate, KeyPair) {
        let k = key(label);
        let mut ext = Extensions { delegation_usage: du, ..Extensions::default() };
        if ds {
            ext.key_usage.insert(KeyUsage::DigitalSignature);
        }
        let tbs = TbsCertificate {
            subject_common_name: "www.ex.com".parse().unwrap(),
            issuer: "ca.pki.test".into(),
            serial: 3,
            validity: ValidityPeriod::new(Instant(1000), Instant(1000 + 90 * DAY)).unwrap(),
            public_key: k.public_key().clone(),
            extensions: ext,
            signature_scheme: SignatureScheme::Ed25519,
        };
        (sign_certificate(tbs, &key("ca")).unwrap(), k)
    }

    #[test]
    fn issue_and_validate() {
        let (cert, k) = ee(true, true, "ee");
        let now = Instant(1000 + 10 * DAY);
        let dc = issue_dc(&cert, &k, key("dc").public_key().clone(), 3 * DAY, SignatureScheme::Ed25519, now).unwrap();
        assert_eq!(dc.relative_ttl, 13 * DAY);
        assert_eq!(validate_dc(&dc, &cert, now, SignatureScheme::Ed25519), Ok(()));
        let last = dc.expiry(&cert) - 1;
        assert_eq!(validate_dc(&dc, &cert, last, SignatureScheme::Ed25519), Ok(()));
        assert_eq!(validate_dc(&dc, &cert, last + 1, SignatureScheme::Ed25519), Err(DcReject::DcExpired));
        assert_eq!(
            validate_dc(&dc, &cert, now, SignatureScheme::EcdsaP256Sha256),
            Err(DcReject::SchemeMismatch)
        );
    }

    #[test]
    fn ttl_ceiling() {
        let (cert, k) = ee(true, true, "ee");
        let now = Instant(2000);
        let pk = key("dc").public_key().clone();
        assert!(issue_dc(&cert, &k, pk.clone(), WEEK, SignatureScheme::Ed25519, now).is_ok());
        let err = issue_dc(&cert, &k, pk, WEEK + 1, SignatureScheme::Ed25519, now).unwrap_err();
        assert!(matches!(err, DcIssueError::Rejected(DcReject::TtlTooLong)));
    }

    #[test]
    fn extension_conditions_at_issuance() {
        let pk = key("dc").public_key().clone();
        let (cert, k) = ee(false, true, "a");
        let err = issue_dc(&cert, &k, pk.clone(), DAY, SignatureScheme::Ed25519, Instant(2000)).unwrap_err();
        assert!(matches!(err, DcIssueError::Rejected(DcReject::MissingDelegationUsage)));
        let (cert, k) = ee(true, false, "b");
        let err = issue_dc(&cert, &k, pk, DAY, SignatureScheme::Ed25519, Instant(2000)).unwrap_err();
        assert!(matches!(err, DcIssueError::Rejected(DcReject::MissingDigitalSignatureBit)));
    }

    #[test]
    fn forged_long_lifetime_rejected_at_validation() {
        let (cert, k) = ee(true, true, "ee");
        let t = Instant(5000);
        let relative = t.since(cert.validity().not_before()) + WEEK + 1;
        let binding = DcBinding::for_certificate(&cert, key("dc").public_key().clone(), relative, SignatureScheme::Ed25519);
        let (dc, _) = binding.sign(&k).unwrap();
        assert_eq!(validate_dc(&dc, &cert, t, SignatureScheme::Ed25519), Err(DcReject::DcLifetimeTooLong));
        assert_eq!(validate_dc(&dc, &cert, t + 1, SignatureScheme::Ed25519), Ok(()));
    }

    #[test]
    fn ee_expired_at_issuance() {
        let (cert, k) = ee(true, true, "ee");
        let err = issue_dc(&cert, &k, key("dc").public_key().clone(), DAY, SignatureScheme::Ed25519, Instant(10)).unwrap_err();
        assert!(matches!(err, DcIssueError::Rejected(DcReject::EeExpired)));
    }

    #[test]
    fn bound_to_issuing_certificate() {
        let (a, ka) = ee(true, true, "a");
        let (b, _) = ee(true, true, "b");
        let dc = issue_dc(&a, &ka, key("dc").public_key().clone(), DAY, SignatureScheme::Ed25519, Instant(2000)).unwrap();
        assert_eq!(validate_dc(&dc, &b, Instant(2000), SignatureScheme::Ed25519), Err(DcReject::BadDcSignature));
    }

    #[test]
    fn document_round_trip() {
        let (cert, k) = ee(true, true, "ee");
        let dc = issue_dc(&cert, &k, key("dc").public_key().clone(), DAY, SignatureScheme::EcdsaP256Sha256, Instant(2000)).unwrap();
        let (back, fp) = DelegatedCredential::from_document(&dc.to_document(&cert)).unwrap();
        assert_eq!(back, dc);
        assert_eq!(fp, cert.fingerprint_hex());
    }

    #[test]
    fn negotiation_gate() {
        assert_eq!(negotiate(true, true), Served::DelegatedCredential);
        assert_eq!(negotiate(false, true), Served::FullChainOnly);
        assert_eq!(negotiate(true, false), Served::FullChainOnly);
        assert_eq!(negotiate(false, false), Served::FullChainOnly);
    }
}
