//! Report assembly: JSON documents with deterministic key order (serde_json
//! maps are sorted), an optional timestamp header, and file or stdout output.

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::matrix::Rat;

pub struct Report {
    map: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str) -> Report {
        let mut map = Map::new();
        map.insert("command".into(), Value::String(command.into()));
        Report { map }
    }

    pub fn set(&mut self, key: &str, value: Value) -> &mut Self {
        self.map.insert(key.into(), value);
        self
    }

    /// Render with a timestamp header unless suppressed; the rest of the
    /// document is byte-identical across runs on the same inputs.
    pub fn render(&self, no_timestamp: bool) -> String {
        let mut map = self.map.clone();
        if !no_timestamp {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            map.insert("timestamp".into(), json!(secs));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(map))
            .expect("report serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn emit(&self, no_timestamp: bool, out: Option<&Path>) -> Result<()> {
        let text = self.render(no_timestamp);
        match out {
            Some(p) => std::fs::write(p, text)
                .map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

pub fn rat_json(q: &Rat) -> Value {
    Value::String(q.to_string())
}

pub fn vec_rat_json(v: &[Rat]) -> Value {
    Value::Array(v.iter().map(rat_json).collect())
}

/// One named check inside a suite report.
pub fn check_json(name: &str, inputs: &str, expected: &str, actual: &str, pass: bool) -> Value {
    json!({
        "name": name,
        "inputs": inputs,
        "expected": expected,
        "actual": actual,
        "pass": pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_without_timestamp() {
        let mut r = Report::new("eval");
        r.set("zeta", json!(1)).set("alpha", json!("x"));
        let a = r.render(true);
        let b = r.render(true);
        assert_eq!(a, b);
        assert!(!a.contains("timestamp"));
        // keys are sorted, so the document order is input-order independent
        assert!(a.find("alpha").unwrap() < a.find("zeta").unwrap());
        assert!(r.render(false).contains("timestamp"));
    }
}
