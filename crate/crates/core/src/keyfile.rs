//! `.pkey` documents: scheme-tagged raw key bytes.

use crate::crypto::{KeyPair, PublicKey};
use crate::encoding::{self, Block};
use crate::Error;

const PRIVATE_LABEL: &str = "PROXYCERT PRIVATE KEY";
const PUBLIC_LABEL: &str = "PROXYCERT PUBLIC KEY";

pub fn private_key_document(key: &KeyPair) -> String {
    let body = format!("{}:{}", key.scheme(), hex::encode(key.secret_bytes()));
    encoding::write_blocks(&[Block::new(PRIVATE_LABEL, body)])
}

pub fn public_key_document(key: &PublicKey) -> String {
    encoding::write_blocks(&[Block::new(PUBLIC_LABEL, key.to_string())])
}

pub fn parse_private_key(text: &str) -> Result<KeyPair, Error> {
    let blocks = encoding::parse_blocks(text)?;
    let block = encoding::expect_block(&mut blocks.iter(), PRIVATE_LABEL)?;
    let (tag, body) = block
        .body
        .split_once(':')
        .ok_or_else(|| Error::Malformed("private key lacks a scheme tag".into()))?;
    let secret = hex::decode(body).map_err(|e| Error::Malformed(e.to_string()))?;
    KeyPair::from_secret(tag.parse()?, &secret)
}

/// Accepts either a public-key document or a private-key document (whose
/// public half is returned).
pub fn parse_public_key(text: &str) -> Result<PublicKey, Error> {
    let blocks = encoding::parse_blocks(text)?;
    match blocks.first() {
        Some(b) if b.label == PUBLIC_LABEL => b.body.parse(),
        Some(b) if b.label == PRIVATE_LABEL => Ok(parse_private_key(text)?.public_key().clone()),
        _ => Err(Error::Malformed("not a key document".into())),
    }
}
