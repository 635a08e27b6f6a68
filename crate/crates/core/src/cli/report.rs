use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub name: String,
    pub status: Status,
    pub values: BTreeMap<String, Value>,
}

impl Record {
    pub fn info(name: impl Into<String>) -> Self {
        Record { name: name.into(), status: Status::Info, values: BTreeMap::new() }
    }

    /// Check record `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Record::check(name, value <= tolerance).with("value", value).with("tolerance", tolerance)
    }

    pub fn check(name: impl Into<String>, passed: bool) -> Self {
        let status = if passed { Status::Pass } else { Status::Fail };
        Record { name: name.into(), status, values: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.values.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    /// Adds every field of a serializable struct under `prefix.`.
    pub fn with_fields(mut self, prefix: &str, value: impl Serialize) -> Self {
        if let Ok(Value::Object(map)) = serde_json::to_value(value) {
            for (k, v) in map {
                let key = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
                self.values.insert(key, v);
            }
        }
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: BTreeMap<String, Value>,
    pub records: Vec<Record>,
    pub timing: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: &str, config: BTreeMap<String, Value>) -> Self {
        Report {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            records: Vec::new(),
            timing: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.status == Status::Fail).count()
    }

    pub fn checks(&self) -> usize {
        self.records.iter().filter(|r| r.status != Status::Info).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    /// Text form; the `[timing]` block comes last so reports can be
    /// compared after cutting it off.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.tool, self.version);
        let _ = writeln!(s, "command = {}", self.command);
        s.push_str("\n[config]\n");
        write_map(&mut s, &self.config);
        for r in &self.records {
            let _ = writeln!(s, "\n[{}] {}", r.name, r.status.label());
            write_map(&mut s, &r.values);
        }
        s.push_str("\n[summary]\n");
        let _ = writeln!(s, "checks = {}", self.checks());
        let _ = writeln!(s, "failed = {}", self.failures());
        let _ = writeln!(s, "status = {}", if self.passed() { "pass" } else { "fail" });
        s.push_str("\n[timing]\n");
        for (k, v) in &self.timing {
            let _ = writeln!(s, "{k} = {v:.3}");
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(map) = &mut v {
            map.insert("passed".into(), Value::Bool(self.passed()));
        }
        serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
    }
}

fn write_map(s: &mut String, map: &BTreeMap<String, Value>) {
    for (k, v) in map {
        let text = match v {
            Value::String(t) => t.clone(),
            other => other.to_string(),
        };
        let _ = writeln!(s, "{k} = {text}");
    }
}

/// Removes the `[timing]` block from a text report.
pub fn strip_timing(text: &str) -> &str {
    text.find("\n[timing]\n").map_or(text, |i| &text[..i])
}

/// Config echo from an ordered list of pairs.
pub fn config_map(pairs: Vec<(&str, Value)>) -> BTreeMap<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
