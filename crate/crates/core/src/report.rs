//! Structured verification reports.

use serde::{Deserialize, Serialize};

/// One verified identity. A record passes iff `statistic ≤ tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub check_id: String,
    /// Name of the identity being checked.
    pub anchor: String,
    pub statistic: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    pub passed: bool,
}

impl CheckRecord {
    pub fn new(suite: &str, check_id: impl Into<String>, anchor: &str, statistic: f64, tolerance: f64) -> Self {
        Self {
            suite: suite.to_owned(),
            check_id: check_id.into(),
            anchor: anchor.to_owned(),
            statistic,
            tolerance,
            stderr: None,
            // NaN statistics fail
            passed: statistic <= tolerance,
        }
    }

    /// Monte Carlo comparison: `|gap| ≤ sigmas · stderr`.
    pub fn monte_carlo(suite: &str, check_id: impl Into<String>, anchor: &str, gap: f64, stderr: f64, sigmas: f64) -> Self {
        let mut r = Self::new(suite, check_id, anchor, gap.abs(), sigmas * stderr);
        r.stderr = Some(stderr);
        r
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
    pub effective_config: String,
    pub wall_clock_seconds: f64,
}

impl Report {
    pub fn new(records: Vec<CheckRecord>, effective_config: String, wall_clock_seconds: f64) -> Self {
        let passed = records.iter().filter(|r| r.passed).count();
        Self {
            summary: Summary {
                total: records.len(),
                passed,
                failed: records.len() - passed,
            },
            records,
            effective_config,
            wall_clock_seconds,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn failing_ids(&self) -> Vec<String> {
        self.records
            .iter()
            .filter(|r| !r.passed)
            .map(|r| format!("{}/{}", r.suite, r.check_id))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with the wall-clock field zeroed, for reproducibility checks.
    pub fn to_json_without_clock(&self) -> String {
        let mut copy = self.clone();
        copy.wall_clock_seconds = 0.0;
        copy.to_json()
    }
}
