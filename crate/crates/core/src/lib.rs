//! Proxy certificates and delegated credentials for web PKI.
//!
//! * [`path`] validates certification paths that continue below an
//!   end-entity certificate with proxy certificates, narrowing the permitted
//!   name set at each step.
//! * [`issuance`] runs a certificate server that reissues short-lived proxy
//!   certificates with overlapping validity; stopping it revokes delegation.
//! * [`dc`] issues and validates delegated credentials.
//! * [`session`] simulates TLS session resumption and the policies that keep
//!   resumed sessions from outliving short-lived credentials.
//! * [`matrix`] holds the scheme comparison table and its combination rules.
//! * [`fixtures`] deterministically generates a test PKI from a seed.

pub mod cert;
pub mod cli;
pub mod crypto;
pub mod dc;
pub mod encoding;
pub mod fixtures;
pub mod issuance;
pub mod keyfile;
pub mod matrix;
pub mod names;
pub mod path;
pub mod session;
pub mod time;

pub use cert::{
    canonical_encode, sign_certificate, verify_signature, within_validity, Certificate, Extensions,
    FailureMode, ResumptionPolicy, TbsCertificate,
};
pub use crypto::{KeyPair, PublicKey, SignatureScheme, SignatureValue, Signer};
pub use names::{DnsName, NamePattern, NameSet};
pub use path::{validate, Chain, Reason, ValidationOutcome, Verdict};
pub use time::{Instant, ValidityPeriod};

/// Operational errors: malformed input, misuse of keys, I/O. Domain-level
/// rejections (a chain that does not validate, an expired PSK) are reported
/// through the outcome types of each module instead.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validity window is empty: not_before {not_before} >= not_after {not_after}")]
    EmptyValidity { not_before: Instant, not_after: Instant },
    #[error("unknown signature scheme {0:?}")]
    UnknownScheme(String),
    #[error("key scheme {key} does not match declared scheme {declared}")]
    SchemeMismatch { declared: SignatureScheme, key: SignatureScheme },
    #[error("invalid name: {0}")]
    InvalidName(String),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Signer(#[from] crypto::SignerError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}
