//! Serialization helpers: deterministic JSON (struct field order, no
//! timestamps) and simple CSV tables.

use serde::Serialize;

/// Rendered subcommand output plus the aggregate verdict driving the exit
/// code.
pub struct Outcome {
    pub body: String,
    pub all_pass: bool,
}

pub fn json<T: Serialize>(value: &T, all_pass: bool) -> anyhow::Result<Outcome> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    Ok(Outcome { body, all_pass })
}

/// CSV with a fixed header; rows are formatted with the shortest
/// round-trip float representation, so output is byte-stable.
pub fn csv(header: &str, rows: &[Vec<String>], all_pass: bool) -> Outcome {
    let mut body = String::from(header);
    body.push('\n');
    for row in rows {
        body.push_str(&row.join(","));
        body.push('\n');
    }
    Outcome { body, all_pass }
}

pub fn f(v: f64) -> String {
    format!("{v}")
}
