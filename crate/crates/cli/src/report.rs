//! Result documents written to stdout.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    /// `[re, im]`
    Complex([f64; 2]),
}

/// A numeric result and the absolute accuracy it is reported with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultValue {
    pub value: Number,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub command: String,
    /// Hex SHA-256 over the arguments and the bytes of every input file.
    pub inputs_digest: String,
    pub values: BTreeMap<String, ResultValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exactness: Option<String>,
    pub diagnostics: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl ResultDocument {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_owned(),
            inputs_digest: String::new(),
            values: BTreeMap::new(),
            method: None,
            exactness: None,
            diagnostics: BTreeMap::new(),
            elapsed_ms: None,
        }
    }

    pub fn real(&mut self, name: &str, value: f64, tolerance: f64) {
        self.values.insert(
            name.to_owned(),
            ResultValue {
                value: Number::Real(value),
                tolerance,
            },
        );
    }

    pub fn diagnostic(&mut self, name: &str, value: impl Into<Value>) {
        self.diagnostics.insert(name.to_owned(), value.into());
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("serializing plain data cannot fail");
        out.push(b'\n');
        out
    }

    /// Serialization without `elapsed_ms`; equal inputs give equal bytes.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        Self {
            elapsed_ms: None,
            ..self.clone()
        }
        .to_bytes()
    }

    pub fn real_value(&self, name: &str) -> Option<f64> {
        match self.values.get(name)?.value {
            Number::Real(x) => Some(x),
            Number::Complex(_) => None,
        }
    }
}

/// Digest over length-prefixed arguments followed by length-prefixed
/// `(path, bytes)` input records, in the order the inputs were read.
pub fn inputs_digest(args: &[String], inputs: &[(String, Vec<u8>)]) -> String {
    let mut h = Sha256::new();
    let mut item = |bytes: &[u8]| {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    };
    item(&(args.len() as u64).to_le_bytes());
    for a in args {
        item(a.as_bytes());
    }
    for (path, bytes) in inputs {
        item(path.as_bytes());
        item(bytes);
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_bytes_ignore_elapsed() {
        let mut a = ResultDocument::new("distance");
        a.real("distance", 0.25, 1e-9);
        let mut b = a.clone();
        a.elapsed_ms = Some(3);
        b.elapsed_ms = Some(40);
        assert_eq!(a.canonical_bytes(), b.canonical_bytes());
        assert_ne!(a.to_bytes(), b.to_bytes());
    }

    #[test]
    fn json_roundtrip() {
        let mut a = ResultDocument::new("x");
        a.real("v", 0.1 + 0.2, 1e-12);
        a.values.insert(
            "z".into(),
            ResultValue {
                value: Number::Complex([1.5, -0.0]),
                tolerance: 0.0,
            },
        );
        a.diagnostic("flag", true);
        let back: ResultDocument = serde_json::from_slice(&a.to_bytes()).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.real_value("v").unwrap().to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn digest_separates_fields() {
        let d1 = inputs_digest(&["ab".into(), "c".into()], &[]);
        let d2 = inputs_digest(&["a".into(), "bc".into()], &[]);
        assert_ne!(d1, d2);
        assert_eq!(d1.len(), 64);
        let d3 = inputs_digest(&["ab".into(), "c".into()], &[("f".into(), b"1".to_vec())]);
        assert_ne!(d1, d3);
    }
}
