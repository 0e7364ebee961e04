use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// One asserted numeric claim.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    /// Identity or statement the value measures.
    pub identity: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    CheckFailure,
    HypothesisFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::CheckFailure => 2,
            Self::HypothesisFailed => 3,
        }
    }
}

/// Deterministic command output; wall-clock timings live in [`Timings`].
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub command: &'static str,
    pub config_digest: String,
    pub grid: [usize; 2],
    pub seed: u64,
    pub status: Status,
    pub checks: Vec<Check>,
    /// Diagnostic values that carry no tolerance.
    pub values: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(command: &'static str, config_digest: String, grid: [usize; 2], seed: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            schema_version: super::SCHEMA_VERSION,
            command,
            config_digest,
            grid,
            seed,
            status: Status::Pass,
            checks: Vec::new(),
            values: BTreeMap::new(),
        }
    }

    /// Records `value <= tolerance`; NaN fails.
    pub fn check(&mut self, name: &str, identity: &str, value: f64, tolerance: f64) -> bool {
        self.push(name, identity, value, tolerance, value <= tolerance)
    }

    /// Records a check whose pass condition is not `value <= tolerance`.
    pub fn push(&mut self, name: &str, identity: &str, value: f64, tolerance: f64, pass: bool) -> bool {
        self.checks.push(Check { name: name.into(), identity: identity.into(), value, tolerance, pass });
        if !pass && self.status == Status::Pass {
            self.status = Status::CheckFailure;
        }
        pass
    }

    pub fn value(&mut self, name: &str, value: impl Serialize) {
        self.values.insert(name.into(), serde_json::to_value(value).expect("report value serializes"));
    }

    pub fn hypothesis_failed(&mut self) {
        self.status = Status::HypothesisFailed;
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        // non-finite values become null in serde_json
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Named wall-clock stage durations in seconds.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub stages: Vec<(String, f64)>,
}

impl Timings {
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = std::time::Instant::now();
        let out = f();
        self.stages.push((stage.into(), start.elapsed().as_secs_f64()));
        out
    }

    pub fn total(&self) -> f64 {
        self.stages.iter().map(|s| s.1).sum()
    }
}
