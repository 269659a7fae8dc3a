use serde_json::{json, Value};

/// Bumped whenever a column or field of any payload changes.
pub const SCHEMA_VERSION: u32 = 1;

pub fn csv_header(command: &str, columns: &[&str]) -> String {
    format!(
        "# floquet {command} schema {SCHEMA_VERSION} ({})\n{}\n",
        env!("CARGO_PKG_VERSION"),
        columns.join(",")
    )
}

pub fn row(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

/// Shortest decimal that round-trips; exponent form outside `[1e-5, 1e16)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn json_payload(command: &str, body: Value) -> String {
    let mut doc = json!({
        "schema": { "command": command, "version": SCHEMA_VERSION, "tool": env!("CARGO_PKG_VERSION") },
    });
    if let (Some(d), Value::Object(b)) = (doc.as_object_mut(), body) {
        d.extend(b);
    }
    let mut s = serde_json::to_string_pretty(&doc).expect("json values always serialize");
    s.push('\n');
    s
}
