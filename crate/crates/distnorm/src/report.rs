//! Deterministic serialization of reports.
//!
//! JSON output sorts keys (the default `serde_json` map is ordered) and
//! prints every float with 17 significant digits in exponent form, so a
//! fixed input and seed always produce byte-identical output. CSV output
//! uses the same float format.

use serde_json::Value;

/// Render a float with 17 significant digits; round-trips exactly.
pub fn format_float(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        // keep integers readable and still exact
        format!("{:.1}", v)
    } else {
        format!("{:.16e}", v)
    }
}

fn write_value(out: &mut String, value: &Value) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serializes"));
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, v)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key serializes"));
                out.push(':');
                write_value(out, v);
            }
            out.push('}');
        }
    }
}

/// Serialize a JSON value deterministically (sorted keys, fixed float
/// format, trailing newline).
pub fn to_json_bytes(value: &Value) -> Vec<u8> {
    let mut out = String::new();
    write_value(&mut out, value);
    out.push('\n');
    out.into_bytes()
}

/// A CSV cell.
#[derive(Clone, Debug)]
pub enum Cell {
    Text(String),
    Float(f64),
    Int(i64),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

/// Serialize a header row plus records; same float format as the JSON
/// writer.
pub fn to_csv_bytes(header: &[&str], rows: &[Vec<Cell>]) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .map(|cell| match cell {
                Cell::Text(s) => {
                    if s.contains(',') || s.contains('"') {
                        format!("\"{}\"", s.replace('"', "\"\""))
                    } else {
                        s.clone()
                    }
                }
                Cell::Float(v) => format_float(*v),
                Cell::Int(v) => v.to_string(),
            })
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out.into_bytes()
}
