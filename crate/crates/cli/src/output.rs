//! Result documents and their JSON and text renderings.

use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

/// Output value. Maps keep insertion order so renderings are reproducible.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Real(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    List(Vec<Field>),
    Map(Vec<(String, Field)>),
}

/// 17 significant digits, `null` when not finite.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

impl Serialize for Field {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Field::Real(x) => RawValue::from_string(format_real(*x))
                .map_err(serde::ser::Error::custom)?
                .serialize(s),
            Field::Int(v) => s.serialize_u64(*v),
            Field::Bool(b) => s.serialize_bool(*b),
            Field::Text(t) => s.serialize_str(t),
            Field::List(items) => {
                let mut seq = s.serialize_seq(Some(items.len()))?;
                for item in items {
                    seq.serialize_element(item)?;
                }
                seq.end()
            }
            Field::Map(entries) => {
                let mut map = s.serialize_map(Some(entries.len()))?;
                for (k, v) in entries {
                    map.serialize_entry(k, v)?;
                }
                map.end()
            }
        }
    }
}

/// Ordered key/value builder.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(Vec<(String, Field)>);

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    pub fn with(mut self, key: &str, value: Field) -> Self {
        self.0.push((key.to_string(), value));
        self
    }

    pub fn real(self, key: &str, x: f64) -> Self {
        self.with(key, Field::Real(x))
    }

    pub fn int(self, key: &str, v: usize) -> Self {
        self.with(key, Field::Int(v as u64))
    }

    pub fn flag(self, key: &str, b: bool) -> Self {
        self.with(key, Field::Bool(b))
    }

    pub fn text(self, key: &str, t: impl Into<String>) -> Self {
        self.with(key, Field::Text(t.into()))
    }

    pub fn get(&self, key: &str) -> Option<&Field> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn into_field(self) -> Field {
        Field::Map(self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultDocument {
    pub command: String,
    pub version: String,
    /// SHA-256 of the raw input bytes, hex encoded.
    pub input_digest: String,
    pub outputs: Field,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ResultDocument {
    pub fn new(command: &str, input: &[u8], outputs: Record) -> Self {
        ResultDocument {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            input_digest: digest(input),
            outputs: outputs.into_field(),
        }
    }

    pub fn output(&self, key: &str) -> Option<&Field> {
        match &self.outputs {
            Field::Map(entries) => entries.iter().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents always serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} (mroot {})\ninput sha256 {}\n", self.command, self.version, self.input_digest);
        write_text(&mut out, &self.outputs, 0);
        out
    }
}

fn scalar_text(f: &Field) -> Option<String> {
    match f {
        Field::Real(x) => Some(format_real(*x)),
        Field::Int(v) => Some(v.to_string()),
        Field::Bool(b) => Some(b.to_string()),
        Field::Text(t) => Some(t.clone()),
        _ => None,
    }
}

fn write_text(out: &mut String, f: &Field, depth: usize) {
    let pad = "  ".repeat(depth);
    match f {
        Field::Map(entries) => {
            for (k, v) in entries {
                match scalar_text(v) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        write_text(out, v, depth + 1);
                    }
                }
            }
        }
        Field::List(items) => {
            for item in items {
                match scalar_text(item) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        write_text(out, item, depth + 1);
                    }
                }
            }
        }
        scalar => {
            if let Some(s) = scalar_text(scalar) {
                out.push_str(&format!("{pad}{s}\n"));
            }
        }
    }
}
