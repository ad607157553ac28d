//! Report records and their three renderings.

use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Text,
    JsonLines,
    Csv,
}

/// A named, ordered list of fields.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub kind: &'static str,
    pub fields: Vec<(String, Value)>,
}

impl Record {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            fields: Vec::new(),
        }
    }

    pub fn field(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    pub fn num(self, key: &str, value: f64) -> Self {
        self.field(key, float(value))
    }

    pub fn opt_num(self, key: &str, value: Option<f64>) -> Self {
        self.field(key, value.map_or(Value::Null, float))
    }

    pub fn point(self, key: &str, coords: &[f64]) -> Self {
        self.field(key, Value::Array(coords.iter().map(|&c| float(c)).collect()))
    }

    /// Append every field of a serializable struct, in declaration order.
    pub fn extend_with<T: Serialize>(mut self, value: &T) -> Self {
        if let Value::Object(map) = to_value(value) {
            self.fields.extend(map);
        }
        self
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn get_bool(&self, key: &str) -> Option<bool> {
        self.get(key).and_then(Value::as_bool)
    }
}

/// Non-finite floats become the strings `inf`, `-inf` and `nan`.
pub fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(
        || {
            Value::String(if x.is_nan() {
                "nan".into()
            } else if x > 0.0 {
                "inf".into()
            } else {
                "-inf".into()
            })
        },
        Value::Number,
    )
}

/// Field order follows the struct declaration.
pub fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).unwrap_or(Value::Null)
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        Value::Array(items) => items.iter().map(scalar_text).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

pub fn render(records: &[Record], format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Text => {
            for r in records {
                writeln!(out, "[{}]", r.kind)?;
                let width = r.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                for (k, v) in &r.fields {
                    writeln!(out, "  {k:width$} = {}", scalar_text(v))?;
                }
            }
        }
        Format::JsonLines => {
            for r in records {
                let mut map = Map::new();
                map.insert("record".into(), Value::String(r.kind.into()));
                for (k, v) in &r.fields {
                    map.insert(k.clone(), v.clone());
                }
                writeln!(out, "{}", Value::Object(map))?;
            }
        }
        Format::Csv => {
            let mut writer = csv::WriterBuilder::new().flexible(true).from_writer(out);
            let mut header: Option<Vec<&str>> = None;
            for r in records {
                let keys: Vec<&str> = std::iter::once("record")
                    .chain(r.fields.iter().map(|(k, _)| k.as_str()))
                    .collect();
                if header.as_ref() != Some(&keys) {
                    writer.write_record(&keys)?;
                    header = Some(keys);
                }
                let row = std::iter::once(r.kind.to_string()).chain(r.fields.iter().map(|(_, v)| scalar_text(v)));
                writer.write_record(row)?;
            }
            writer.flush()?;
        }
    }
    Ok(())
}
