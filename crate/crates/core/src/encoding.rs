//! Canonical textual encoding and the armored document container.
//!
//! The canonical form is compact JSON with object keys sorted
//! lexicographically, integers in base 10 and lists kept in order. The same
//! value always encodes to the same bytes, so signatures computed over it are
//! reproducible. Decoding is strict: input that does not re-encode to itself
//! byte for byte is rejected.
//!
//! Documents (`.pcert`, `.pkey`, `.pdc`, `.pcsr`) are sequences of armored
//! blocks:
//!
//! ```text
//! -----BEGIN <LABEL>-----
//! <one line of body>
//! -----END <LABEL>-----
//! ```

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::Error;

/// Encodes `value` canonically.
pub fn canonical_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let tree = serde_json::to_value(value).expect("canonical values always serialize");
    let mut out = Vec::new();
    write_value(&tree, &mut out);
    out
}

// Sorts keys explicitly so the output does not depend on whether serde_json
// was built with `preserve_order`.
fn write_value(value: &serde_json::Value, out: &mut Vec<u8>) {
    use serde_json::Value;
    match value {
        Value::Array(items) => {
            out.push(b'[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                write_value(item, out);
            }
            out.push(b']');
        }
        Value::Object(map) => {
            let mut entries: Vec<_> = map.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            out.push(b'{');
            for (i, (key, item)) in entries.into_iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                out.extend(serde_json::to_vec(key).expect("string key"));
                out.push(b':');
                write_value(item, out);
            }
            out.push(b'}');
        }
        scalar => out.extend(serde_json::to_vec(scalar).expect("scalar")),
    }
}

pub fn canonical_string<T: Serialize>(value: &T) -> String {
    String::from_utf8(canonical_bytes(value)).expect("json is utf-8")
}

/// Decodes canonical bytes, rejecting anything not in canonical form.
pub fn decode_canonical<T: Serialize + DeserializeOwned>(bytes: &[u8]) -> Result<T, Error> {
    let value: T = serde_json::from_slice(bytes).map_err(|e| Error::Malformed(e.to_string()))?;
    if canonical_bytes(&value) != bytes {
        return Err(Error::Malformed("input is not in canonical form".into()));
    }
    Ok(value)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub label: String,
    pub body: String,
}

impl Block {
    pub fn new(label: impl Into<String>, body: impl Into<String>) -> Self {
        Block { label: label.into(), body: body.into() }
    }
}

pub fn write_blocks(blocks: &[Block]) -> String {
    let mut out = String::new();
    for b in blocks {
        out.push_str(&format!("-----BEGIN {}-----\n{}\n-----END {}-----\n", b.label, b.body, b.label));
    }
    out
}

pub fn parse_blocks(text: &str) -> Result<Vec<Block>, Error> {
    let mut blocks = Vec::new();
    let mut lines = text.lines().map(str::trim_end).filter(|l| !l.is_empty());
    while let Some(line) = lines.next() {
        let label = line
            .strip_prefix("-----BEGIN ")
            .and_then(|l| l.strip_suffix("-----"))
            .ok_or_else(|| Error::Malformed(format!("expected BEGIN line, found {line:?}")))?;
        let body = lines
            .next()
            .ok_or_else(|| Error::Malformed(format!("block {label} has no body")))?;
        let end = lines
            .next()
            .ok_or_else(|| Error::Malformed(format!("block {label} is not terminated")))?;
        if end != format!("-----END {label}-----") {
            return Err(Error::Malformed(format!("block {label} closed by {end:?}")));
        }
        blocks.push(Block::new(label, body));
    }
    Ok(blocks)
}

/// Pulls the next block and checks its label.
pub(crate) fn expect_block<'a, I>(blocks: &mut I, label: &str) -> Result<&'a Block, Error>
where
    I: Iterator<Item = &'a Block>,
{
    let block = blocks
        .next()
        .ok_or_else(|| Error::Malformed(format!("missing {label} block")))?;
    if block.label != label {
        return Err(Error::Malformed(format!("expected {label} block, found {}", block.label)));
    }
    Ok(block)
}
