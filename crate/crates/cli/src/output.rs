//! Deterministic JSON and CSV rendering.

use std::io::Write;

use serde_json::{Map, Number, Value};

pub const SCHEMA_VERSION: u64 = 1;

/// A float at 17 significant digits; non-finite values become `null` and
/// negative zero prints as zero.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let x = if x == 0.0 { 0.0 } else { x };
    let text = format!("{x:.16e}");
    Value::Number(text.parse::<Number>().expect("formatted float parses"))
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| num(*x)).collect())
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// Top-level report with the schema version and command name filled in.
pub fn report(command: &str, mut body: Map<String, Value>) -> Value {
    body.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    body.insert("command".into(), Value::from(command));
    Value::Object(body)
}

pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// Flattened `path = value` lines, floats at 6 significant digits.
pub fn to_human(v: &Value) -> String {
    let mut out = String::new();
    flatten(v, String::new(), &mut out);
    out
}

fn flatten(v: &Value, path: String, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                flatten(child, p, out);
            }
        }
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            let parts: Vec<String> = items.iter().map(scalar_human).collect();
            out.push_str(&format!("{path} = [{}]\n", parts.join(", ")));
        }
        Value::Array(items) => {
            for (k, child) in items.iter().enumerate() {
                flatten(child, format!("{path}[{k}]"), out);
            }
        }
        _ => out.push_str(&format!("{path} = {}\n", scalar_human(v))),
    }
}

fn scalar_human(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() && !n.is_i64() && !n.is_u64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            format!("{x:.5e}")
        }
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Trajectory CSV: a schema comment, a header, then rows at 17 digits.
pub fn write_trajectory_csv<W: Write>(
    out: W,
    t: &[f64],
    a: &[f64],
    adot: &[f64],
    rho: &[f64],
) -> std::io::Result<()> {
    let mut out = out;
    writeln!(out, "# schema_version={SCHEMA_VERSION}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "a", "adot", "rho"])?;
    for k in 0..t.len() {
        w.write_record([t[k], a[k], adot[k], rho[k]].map(|x| format!("{x:.16e}")))?;
    }
    w.flush()
}
