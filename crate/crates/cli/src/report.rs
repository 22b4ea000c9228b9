//! Report assembly. Every report carries the command line, input digests,
//! the tolerance and the threshold decisions that shaped the result.

use hs_twins::twins::RankDecision;
use serde_json::{json, Map, Value};

use crate::io::Loaded;

/// JSON has no infinities; those are written as strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn opt(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// Splits descending `values` at `cutoff` (kept: strictly above).
pub fn split_decision(what: &str, values: &[f64], cutoff: f64) -> Value {
    let kept = values.iter().take_while(|&&v| v > cutoff).count();
    let smallest_kept = kept.checked_sub(1).map(|i| values[i]);
    let largest_dropped = values.get(kept).copied();
    let gap = match (smallest_kept, largest_dropped) {
        (Some(k), Some(d)) if d > 0.0 => k / d,
        _ => f64::INFINITY,
    };
    json!({
        "decision": what,
        "values": nums(values),
        "cutoff": num(cutoff),
        "kept": kept,
        "smallest_kept": opt(smallest_kept),
        "largest_dropped": opt(largest_dropped),
        "gap": num(gap),
    })
}

pub fn rank_decision(what: &str, r: &RankDecision) -> Value {
    json!({
        "decision": what,
        "values": nums(&r.singular_values),
        "cutoff": num(r.cutoff),
        "kept": r.singular_values.iter().filter(|&&s| s > r.cutoff).count(),
        "smallest_kept": opt(r.smallest_kept),
        "largest_dropped": opt(r.largest_dropped),
        "gap": num(r.gap),
    })
}

pub struct Report {
    command: String,
    inputs: Vec<Value>,
    tol: f64,
    tol_source: &'static str,
    decisions: Vec<Value>,
    result: Map<String, Value>,
}

impl Report {
    pub fn new(command: String, tol: f64, tol_source: &'static str) -> Self {
        Report { command, inputs: vec![], tol, tol_source, decisions: vec![], result: Map::new() }
    }

    pub fn input<T>(&mut self, role: &str, f: &Loaded<T>) {
        self.inputs.push(json!({
            "role": role,
            "path": f.path.display().to_string(),
            "sha256": f.sha256,
        }));
    }

    pub fn decision(&mut self, d: Value) {
        self.decisions.push(d);
    }

    pub fn set(&mut self, key: &str, v: Value) {
        self.result.insert(key.to_string(), v);
    }

    pub fn into_json(self) -> Value {
        json!({
            "command": self.command,
            "inputs": self.inputs,
            "tolerance": { "value": num(self.tol), "source": self.tol_source },
            "decisions": self.decisions,
            "result": Value::Object(self.result),
        })
    }
}
