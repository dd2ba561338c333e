use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{CheckId, VerifyConfig};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Status {
    Pass,
    Fail,
    IntegrationFailure,
    /// The inequality is known to be false and the row exhibits it.
    FalsifiedAsExpected,
    /// Recorded data without a pass threshold.
    Exploratory,
}

/// One evaluated case: `lhs ≤ rhs` is the claim, margin = rhs − lhs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub case_id: String,
    pub relation: String,
    pub params: BTreeMap<String, f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub margin: Option<f64>,
    pub integration_error: f64,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
    pub integration_failures: usize,
    pub falsified: usize,
    pub exploratory: usize,
    /// Smallest margin among rows with a pass threshold.
    pub min_margin: Option<f64>,
    pub worst_case: Option<String>,
    /// passed / (passed + failed + integration failures).
    pub pass_rate: f64,
    #[serde(default)]
    pub extras: BTreeMap<String, f64>,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: CheckId,
    pub rows: Vec<CheckRow>,
    pub summary: CheckSummary,
}

impl CheckReport {
    pub fn new(check: CheckId, rows: Vec<CheckRow>, extras: BTreeMap<String, f64>, notes: Vec<String>) -> Self {
        let mut s = CheckSummary { rows: rows.len(), extras, notes, ..CheckSummary::default() };
        for r in &rows {
            match r.status {
                Status::Pass => s.passed += 1,
                Status::Fail => s.failed += 1,
                Status::IntegrationFailure => s.integration_failures += 1,
                Status::FalsifiedAsExpected => s.falsified += 1,
                Status::Exploratory => s.exploratory += 1,
            }
            if matches!(r.status, Status::Pass | Status::Fail) {
                if let Some(m) = r.margin {
                    if s.min_margin.is_none_or(|w| m < w) {
                        s.min_margin = Some(m);
                        s.worst_case = Some(r.case_id.clone());
                    }
                }
            }
        }
        let judged = s.passed + s.failed + s.integration_failures;
        s.pass_rate = if judged == 0 { 1.0 } else { s.passed as f64 / judged as f64 };
        CheckReport { check, rows, summary: s }
    }

    pub fn rows_with<'a>(&'a self, relation: &'a str) -> impl Iterator<Item = &'a CheckRow> {
        self.rows.iter().filter(move |r| r.relation == relation)
    }
}

/// Process exit codes of a suite run.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const VIOLATION: i32 = 1;
    pub const INTEGRATION_FAILURE: i32 = 2;
    pub const CONFIG_ERROR: i32 = 3;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch; excluded from the canonical hash.
    pub generated_at: u64,
    pub config: VerifyConfig,
    pub checks: Vec<CheckReport>,
    pub exit_code: i32,
    /// SHA-256 of the report serialized with `generated_at` and this field zeroed.
    pub canonical_sha256: String,
}

impl SuiteReport {
    pub fn new(config: VerifyConfig, checks: Vec<CheckReport>, generated_at: u64) -> Self {
        let exit_code = exit_code(&checks);
        let mut r = SuiteReport {
            tool: "malliavin-verify".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            generated_at,
            config,
            checks,
            exit_code,
            canonical_sha256: String::new(),
        };
        r.canonical_sha256 = r.canonical_hash();
        r
    }

    pub fn canonical_hash(&self) -> String {
        let mut c = self.clone();
        c.generated_at = 0;
        c.canonical_sha256 = String::new();
        let bytes = serde_json::to_vec(&c).expect("report serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn check(&self, id: CheckId) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.check == id)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One line per (check, relation, parameter set).
    pub fn summary_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "check",
            "relation",
            "params",
            "rows",
            "passed",
            "failed",
            "integration_failures",
            "falsified",
            "exploratory",
            "min_margin",
            "worst_case",
        ])
        .expect("in-memory write");
        for c in &self.checks {
            let mut groups: Vec<(String, String, Vec<&CheckRow>)> = Vec::new();
            for r in &c.rows {
                let params = format_params(&r.params);
                match groups.iter_mut().find(|g| g.0 == r.relation && g.1 == params) {
                    Some(g) => g.2.push(r),
                    None => groups.push((r.relation.clone(), params, vec![r])),
                }
            }
            for (relation, params, rows) in groups {
                let count = |s: Status| rows.iter().filter(|r| r.status == s).count().to_string();
                let worst = rows
                    .iter()
                    .filter(|r| matches!(r.status, Status::Pass | Status::Fail))
                    .filter_map(|r| r.margin.map(|m| (m, &r.case_id)))
                    .min_by(|a, b| a.0.total_cmp(&b.0));
                w.write_record([
                    c.check.as_str().to_string(),
                    relation,
                    params,
                    rows.len().to_string(),
                    count(Status::Pass),
                    count(Status::Fail),
                    count(Status::IntegrationFailure),
                    count(Status::FalsifiedAsExpected),
                    count(Status::Exploratory),
                    worst.map(|w| format!("{:e}", w.0)).unwrap_or_default(),
                    worst.map(|w| w.1.clone()).unwrap_or_default(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 csv")
    }
}

fn format_params(p: &BTreeMap<String, f64>) -> String {
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

/// 1 if any row fails its margin, else 2 if any integration failed, else 0.
pub fn exit_code(checks: &[CheckReport]) -> i32 {
    let rows = checks.iter().flat_map(|c| &c.rows);
    let mut code = exit::PASS;
    for r in rows {
        match r.status {
            Status::Fail => return exit::VIOLATION,
            Status::IntegrationFailure => code = exit::INTEGRATION_FAILURE,
            _ => {}
        }
    }
    code
}
