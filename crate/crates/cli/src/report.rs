//! Machine-readable reports.
//!
//! Every floating-point number is written as `{"value": v, "bits": "0x…"}`
//! where `v` is rounded to 12 significant digits and `bits` is the exact
//! IEEE-754 pattern of the unrounded double.

use qlattice_core::ToleranceConfig;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub role: String,
    pub path: String,
    pub label: Option<String>,
    pub sha256: String,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: Vec<String>,
    pub inputs: Vec<InputRecord>,
    pub tolerances: ToleranceConfig,
    pub results: Value,
    pub error: Option<(String, String)>,
    pub exit_code: u8,
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn new(command: Vec<String>, tolerances: ToleranceConfig) -> Self {
        Report {
            command,
            inputs: Vec::new(),
            tolerances,
            results: Value::Null,
            error: None,
            exit_code: 0,
            timing_ms: None,
        }
    }

    pub fn fail(&mut self, err: &CliError) {
        self.error = Some((err.kind().to_string(), err.to_string()));
        self.exit_code = err.exit_code();
    }

    pub fn to_value(&self) -> Value {
        let mut top = Map::new();
        top.insert("command".into(), json!(self.command));
        top.insert("inputs".into(), json!(self.inputs));
        top.insert("tolerances".into(), json!(self.tolerances));
        top.insert("status".into(), json!(if self.exit_code == 0 { "ok" } else { "error" }));
        top.insert("exit_code".into(), json!(self.exit_code));
        if let Some((kind, message)) = &self.error {
            top.insert("error".into(), json!({ "kind": kind, "message": message }));
        }
        top.insert("results".into(), self.results.clone());
        if let Some(t) = self.timing_ms {
            top.insert("timing_ms".into(), json!(t));
        }
        annotate(Value::Object(top))
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn bits(x: f64) -> String {
    format!("0x{:016x}", x.to_bits())
}

/// Replaces every floating-point number in `v` by its value/bits pair.
pub fn annotate(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            json!({ "value": round12(x), "bits": bits(x) })
        }
        Value::Array(items) => Value::Array(items.into_iter().map(annotate).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, annotate(v))).collect()),
        other => other,
    }
}

/// Reads the exact double back out of an annotated number.
pub fn exact(v: &Value) -> Option<f64> {
    let b = v.get("bits")?.as_str()?.strip_prefix("0x")?;
    u64::from_str_radix(b, 16).ok().map(f64::from_bits)
}
