//! Signature schemes, keys and the [`Signer`] abstraction.
//!
//! Keys and signatures are opaque byte strings tagged with the scheme that
//! produced them. A signature only verifies when the key tag, the signature
//! tag and the declared scheme all agree.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SignatureScheme {
    Ed25519,
    EcdsaP256Sha256,
}

impl SignatureScheme {
    pub const ALL: [SignatureScheme; 2] = [SignatureScheme::Ed25519, SignatureScheme::EcdsaP256Sha256];

    pub fn as_str(self) -> &'static str {
        match self {
            SignatureScheme::Ed25519 => "ed25519",
            SignatureScheme::EcdsaP256Sha256 => "ecdsa-p256-sha256",
        }
    }
}

impl fmt::Display for SignatureScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignatureScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        SignatureScheme::ALL
            .into_iter()
            .find(|scheme| scheme.as_str() == s)
            .ok_or_else(|| Error::UnknownScheme(s.to_owned()))
    }
}

impl Serialize for SignatureScheme {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for SignatureScheme {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Encodes `scheme:hex` and back; shared by keys and signatures.
fn tagged_to_string(scheme: SignatureScheme, bytes: &[u8]) -> String {
    format!("{}:{}", scheme, hex::encode(bytes))
}

fn tagged_from_str(s: &str) -> Result<(SignatureScheme, Vec<u8>), Error> {
    let (tag, body) = s
        .split_once(':')
        .ok_or_else(|| Error::Malformed(format!("missing scheme tag in {s:?}")))?;
    let scheme = tag.parse()?;
    let bytes = hex::decode(body).map_err(|e| Error::Malformed(format!("bad hex: {e}")))?;
    Ok((scheme, bytes))
}

macro_rules! tagged_bytes {
    ($name:ident) => {
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name {
            scheme: SignatureScheme,
            bytes: Vec<u8>,
        }

        impl $name {
            pub fn from_parts(scheme: SignatureScheme, bytes: Vec<u8>) -> Self {
                $name { scheme, bytes }
            }

            pub fn scheme(&self) -> SignatureScheme {
                self.scheme
            }

            pub fn as_bytes(&self) -> &[u8] {
                &self.bytes
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&tagged_to_string(self.scheme, &self.bytes))
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self)
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self, Error> {
                let (scheme, bytes) = tagged_from_str(s)?;
                Ok($name { scheme, bytes })
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&self.to_string())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

tagged_bytes!(PublicKey);
tagged_bytes!(SignatureValue);

impl PublicKey {
    /// Checks `signature` over `message`. Returns false on any tag mismatch
    /// or malformed key/signature bytes.
    pub fn verify(&self, message: &[u8], signature: &SignatureValue) -> bool {
        if self.scheme != signature.scheme {
            return false;
        }
        match self.scheme {
            SignatureScheme::Ed25519 => {
                use ed25519_dalek::Verifier;
                let Ok(key_bytes) = <[u8; 32]>::try_from(self.bytes.as_slice()) else {
                    return false;
                };
                let Ok(key) = ed25519_dalek::VerifyingKey::from_bytes(&key_bytes) else {
                    return false;
                };
                let Ok(sig) = ed25519_dalek::Signature::from_slice(&signature.bytes) else {
                    return false;
                };
                key.verify(message, &sig).is_ok()
            }
            SignatureScheme::EcdsaP256Sha256 => {
                use p256::ecdsa::signature::Verifier;
                let Ok(key) = p256::ecdsa::VerifyingKey::from_sec1_bytes(&self.bytes) else {
                    return false;
                };
                let Ok(sig) = p256::ecdsa::Signature::from_slice(&signature.bytes) else {
                    return false;
                };
                key.verify(message, &sig).is_ok()
            }
        }
    }

    /// Short hex identifier: first 8 bytes of SHA-256 over the tagged key.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_string().as_bytes());
        hex::encode(&digest[..8])
    }
}

/// A private key together with its public half.
#[derive(Clone)]
pub struct KeyPair {
    scheme: SignatureScheme,
    secret: Vec<u8>,
    public: PublicKey,
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("scheme", &self.scheme)
            .field("public", &self.public)
            .finish_non_exhaustive()
    }
}

impl PartialEq for KeyPair {
    fn eq(&self, other: &Self) -> bool {
        self.scheme == other.scheme && self.secret == other.secret
    }
}

impl Eq for KeyPair {}

impl KeyPair {
    /// Derives a key pair from 32 bytes of seed material.
    ///
    /// Ed25519 uses the seed directly as the secret key. For P-256 the seed is
    /// rehashed with a counter until it is a valid scalar, which in practice
    /// succeeds on the first round.
    pub fn from_seed(scheme: SignatureScheme, seed: [u8; 32]) -> KeyPair {
        match scheme {
            SignatureScheme::Ed25519 => {
                let sk = ed25519_dalek::SigningKey::from_bytes(&seed);
                let public = PublicKey::from_parts(scheme, sk.verifying_key().to_bytes().to_vec());
                KeyPair { scheme, secret: seed.to_vec(), public }
            }
            SignatureScheme::EcdsaP256Sha256 => {
                let mut candidate = seed;
                let mut counter = 0u32;
                loop {
                    if let Ok(sk) = p256::ecdsa::SigningKey::from_slice(&candidate) {
                        let point = sk.verifying_key().to_encoded_point(true);
                        let public = PublicKey::from_parts(scheme, point.as_bytes().to_vec());
                        return KeyPair { scheme, secret: candidate.to_vec(), public };
                    }
                    counter += 1;
                    let mut h = Sha256::new();
                    h.update(seed);
                    h.update(counter.to_be_bytes());
                    candidate = h.finalize().into();
                }
            }
        }
    }

    /// Reconstructs a key pair from stored secret bytes.
    pub fn from_secret(scheme: SignatureScheme, secret: &[u8]) -> Result<KeyPair, Error> {
        let seed: [u8; 32] = secret
            .try_into()
            .map_err(|_| Error::Malformed(format!("{scheme} secret must be 32 bytes")))?;
        if scheme == SignatureScheme::EcdsaP256Sha256 && p256::ecdsa::SigningKey::from_slice(&seed).is_err() {
            return Err(Error::Malformed("secret is not a valid P-256 scalar".into()));
        }
        Ok(KeyPair::from_seed(scheme, seed))
    }

    pub fn scheme(&self) -> SignatureScheme {
        self.scheme
    }

    pub fn public_key(&self) -> &PublicKey {
        &self.public
    }

    pub fn secret_bytes(&self) -> &[u8] {
        &self.secret
    }

    pub fn sign(&self, message: &[u8]) -> SignatureValue {
        let bytes = match self.scheme {
            SignatureScheme::Ed25519 => {
                use ed25519_dalek::Signer as _;
                let seed: [u8; 32] = self.secret.as_slice().try_into().expect("32-byte seed");
                let sk = ed25519_dalek::SigningKey::from_bytes(&seed);
                sk.sign(message).to_bytes().to_vec()
            }
            SignatureScheme::EcdsaP256Sha256 => {
                use p256::ecdsa::signature::Signer as _;
                let sk = p256::ecdsa::SigningKey::from_slice(&self.secret).expect("valid scalar");
                let sig: p256::ecdsa::Signature = sk.sign(message);
                sig.to_bytes().to_vec()
            }
        };
        SignatureValue::from_parts(self.scheme, bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignerError {
    #[error("signer is unavailable")]
    Unavailable,
}

/// Anything that can produce signatures with a fixed key without
/// necessarily exposing it.
pub trait Signer {
    fn public_key(&self) -> PublicKey;
    fn sign(&self, message: &[u8]) -> Result<SignatureValue, SignerError>;
}

impl Signer for KeyPair {
    fn public_key(&self) -> PublicKey {
        self.public.clone()
    }

    fn sign(&self, message: &[u8]) -> Result<SignatureValue, SignerError> {
        Ok(KeyPair::sign(self, message))
    }
}

/// Models an offline signing device (an HSM, or an air-gapped box whose
/// output is carried over by QR code). It answers signing requests while
/// online and never hands out the key.
pub struct OfflineDevice {
    key: KeyPair,
    online: std::cell::Cell<bool>,
}

impl OfflineDevice {
    pub fn new(key: KeyPair) -> Self {
        OfflineDevice { key, online: std::cell::Cell::new(true) }
    }

    pub fn set_online(&self, online: bool) {
        self.online.set(online);
    }
}

impl Signer for OfflineDevice {
    fn public_key(&self) -> PublicKey {
        self.key.public.clone()
    }

    fn sign(&self, message: &[u8]) -> Result<SignatureValue, SignerError> {
        if !self.online.get() {
            return Err(SignerError::Unavailable);
        }
        Ok(self.key.sign(message))
    }
}

/// 32 bytes of key material derived from `(seed, label)`:
/// `SHA-256("proxycert-key-v1" || seed as big-endian u64 || label)`.
pub fn derive_seed(seed: u64, label: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"proxycert-key-v1");
    h.update(seed.to_be_bytes());
    h.update(label.as_bytes());
    h.finalize().into()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_verify_both_schemes() {
        for scheme in SignatureScheme::ALL {
            let kp = KeyPair::from_seed(scheme, derive_seed(1, "a"));
            let sig = kp.sign(b"hello");
            assert!(kp.public_key().verify(b"hello", &sig));
            assert!(!kp.public_key().verify(b"hellO", &sig));
            let other = KeyPair::from_seed(scheme, derive_seed(1, "b"));
            assert!(!other.public_key().verify(b"hello", &sig));
        }
    }

    #[test]
    fn cross_scheme_never_verifies() {
        let ed = KeyPair::from_seed(SignatureScheme::Ed25519, derive_seed(3, "k"));
        let sig = ed.sign(b"m");
        let retagged = SignatureValue::from_parts(SignatureScheme::EcdsaP256Sha256, sig.as_bytes().to_vec());
        assert!(!ed.public_key().verify(b"m", &retagged));
    }

    #[test]
    fn malformed_bytes_are_rejected_not_panicking() {
        let kp = KeyPair::from_seed(SignatureScheme::Ed25519, derive_seed(3, "k"));
        let junk = SignatureValue::from_parts(SignatureScheme::Ed25519, vec![1, 2, 3]);
        assert!(!kp.public_key().verify(b"m", &junk));
        let bad_key = PublicKey::from_parts(SignatureScheme::EcdsaP256Sha256, vec![9; 5]);
        let sig = SignatureValue::from_parts(SignatureScheme::EcdsaP256Sha256, vec![0; 64]);
        assert!(!bad_key.verify(b"m", &sig));
    }

    #[test]
    fn tagged_text_round_trip() {
        let kp = KeyPair::from_seed(SignatureScheme::EcdsaP256Sha256, derive_seed(9, "x"));
        let text = kp.public_key().to_string();
        assert!(text.starts_with("ecdsa-p256-sha256:"));
        assert_eq!(text.parse::<PublicKey>().unwrap(), *kp.public_key());
        assert!("rsa:00".parse::<PublicKey>().is_err());
    }

    #[test]
    fn seed_derivation_is_stable() {
        assert_eq!(derive_seed(1, "root"), derive_seed(1, "root"));
        assert_ne!(derive_seed(1, "root"), derive_seed(2, "root"));
        let a = KeyPair::from_seed(SignatureScheme::Ed25519, derive_seed(1, "root"));
        let b = KeyPair::from_secret(SignatureScheme::Ed25519, a.secret_bytes()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn offline_device_refuses_when_offline() {
        let dev = OfflineDevice::new(KeyPair::from_seed(SignatureScheme::Ed25519, [4; 32]));
        assert!(dev.sign(b"x").is_ok());
        dev.set_online(false);
        assert_eq!(dev.sign(b"x"), Err(SignerError::Unavailable));
    }
}
