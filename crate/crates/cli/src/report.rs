//! Run reports: human-readable lines on stdout plus an optional JSON document.

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io;
use std::path::Path;

const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to twelve significant digits; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    // Avoid "-0.0" in reports.
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Recorded but never affects the exit code.
    Info(bool),
}

impl Verdict {
    pub fn check(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Info(true) => "yes",
            Self::Info(false) => "no",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub seed: Option<u64>,
    /// Everything that determines the results; hashed into `inputs_digest`.
    pub inputs: Value,
    pub results: Map<String, Value>,
    pub verdicts: BTreeMap<String, Verdict>,
}

impl Report {
    pub fn new(command: &'static str, seed: Option<u64>, inputs: Value) -> Self {
        Self {
            command,
            seed,
            inputs,
            results: Map::new(),
            verdicts: BTreeMap::new(),
        }
    }

    pub fn result(&mut self, key: &str, value: Value) -> &mut Self {
        self.results.insert(key.to_string(), value);
        self
    }

    pub fn verdict(&mut self, key: &str, v: Verdict) -> &mut Self {
        self.verdicts.insert(key.to_string(), v);
        self
    }

    pub fn failed(&self) -> bool {
        self.verdicts.values().any(|v| *v == Verdict::Fail)
    }

    pub fn inputs_digest(&self) -> String {
        // serde_json maps keep keys sorted, so this text is canonical.
        let text = serde_json::to_string(&self.inputs).expect("values always serialize");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn to_json(&self) -> Value {
        let verdicts: Map<String, Value> = self
            .verdicts
            .iter()
            .map(|(k, v)| (k.clone(), Value::from(v.as_str())))
            .collect();
        let mut doc = Map::new();
        doc.insert("command".into(), self.command.into());
        doc.insert("inputs_digest".into(), self.inputs_digest().into());
        doc.insert("results".into(), Value::Object(self.results.clone()));
        doc.insert("seed".into(), self.seed.map_or(Value::Null, Value::from));
        doc.insert("verdicts".into(), Value::Object(verdicts));
        doc.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        Value::Object(doc)
    }

    pub fn write_json(&self, path: &Path) -> io::Result<()> {
        let mut text =
            serde_json::to_string_pretty(&self.to_json()).expect("values always serialize");
        text.push('\n');
        std::fs::write(path, text)
    }

    pub fn human(&self) -> String {
        let mut out = format!(
            "{} (dualgame {})\n",
            self.command,
            env!("CARGO_PKG_VERSION")
        );
        if let Some(seed) = self.seed {
            out += &format!("seed: {seed}\n");
        }
        for (k, v) in &self.results {
            flatten(&mut out, k, v);
        }
        for (k, v) in &self.verdicts {
            out += &format!("verdict {k}: {}\n", v.as_str());
        }
        out
    }
}

fn flatten(out: &mut String, prefix: &str, v: &Value) {
    match v {
        Value::Object(m) => {
            for (k, inner) in m {
                flatten(out, &format!("{prefix}.{k}"), inner);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object()) => {
            for (i, inner) in items.iter().enumerate() {
                flatten(out, &format!("{prefix}[{i}]"), inner);
            }
        }
        other => *out += &format!("{prefix}: {other}\n"),
    }
}
