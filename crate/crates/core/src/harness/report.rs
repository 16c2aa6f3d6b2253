use std::collections::BTreeMap;

use serde::Serialize;

use super::budget::Series;
use super::config::ExperimentConfig;
use crate::spectral::{IndexEstimate, PerronReport};
use crate::trace::BllComparison;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for Tool {
    fn default() -> Self {
        Self {
            name: "isoschatten",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// An inequality claim evaluated on extrapolated quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub claim: String,
    /// `margin > −error_budget`.
    pub holds: bool,
    /// Signed slack of the claim; positive when it is satisfied.
    pub margin: f64,
    pub error_budget: f64,
    /// `margin > error_budget`: satisfied even against the adverse budget.
    pub decisive: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    pub quantities: BTreeMap<String, f64>,
}

impl Verdict {
    pub fn new(claim: impl Into<String>, margin: f64, error_budget: f64) -> Self {
        Self {
            claim: claim.into(),
            holds: margin > -error_budget,
            margin,
            error_budget,
            decisive: margin > error_budget,
            flags: vec![],
            quantities: BTreeMap::new(),
        }
    }

    /// Claim `larger ≥ smaller` between two extrapolated series of labelled
    /// domains, with the two budgets added and multiplied by `scale`.
    pub fn dominates(
        claim: impl Into<String>,
        (la, larger): (&str, &Series),
        (lb, smaller): (&str, &Series),
        scale: f64,
    ) -> Self {
        let (a, ba) = (
            larger.extrapolated.unwrap_or(f64::NAN),
            larger.budget.unwrap_or(f64::NAN),
        );
        let (b, bb) = (
            smaller.extrapolated.unwrap_or(f64::NAN),
            smaller.budget.unwrap_or(f64::NAN),
        );
        Self::new(claim, a - b, (ba + bb) * scale)
            .with(format!("{la}.{}", larger.name), a)
            .with(format!("{la}.{}:budget", larger.name), ba)
            .with(format!("{lb}.{}", smaller.name), b)
            .with(format!("{lb}.{}:budget", smaller.name), bb)
    }

    pub fn with(mut self, key: impl Into<String>, value: f64) -> Self {
        self.quantities.insert(key.into(), value);
        self
    }

    pub fn flag(mut self, flag: impl Into<String>) -> Self {
        self.flags.push(flag.into());
        self
    }
}

/// A pass/fail property that is not an inequality between budgeted quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerronEntry {
    pub n: usize,
    #[serde(flatten)]
    pub report: PerronReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolution {
    pub n: usize,
    pub cells: usize,
    pub h: f64,
    pub discrete_measure: f64,
    pub noise_count: usize,
    pub negative_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalSeries {
    pub functional: String,
    pub p: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift_power: Option<u32>,
    /// Heat time `t` or spectral shift `ζ`.
    pub x: f64,
    pub series: Series,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainReport {
    pub label: String,
    pub role: String,
    pub domain: String,
    pub measure: f64,
    pub resolutions: Vec<Resolution>,
    pub series: Vec<Series>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub perron: Vec<PerronEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index_estimate: Option<IndexEstimate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub functionals: Vec<FunctionalSeries>,
}

impl DomainReport {
    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaRow {
    pub domain: String,
    pub n: usize,
    pub zeta: f64,
    pub index: usize,
    pub mu: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BllRecord {
    pub label: String,
    pub p: u32,
    #[serde(flatten)]
    pub comparison: BllComparison,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    VerdictFailure,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

/// Wall-clock data, kept apart from the deterministic part of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Runtime {
    pub total_seconds: f64,
    pub stages: Vec<Stage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub tool: Tool,
    pub config: ExperimentConfig,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub domains: Vec<DomainReport>,
    pub verdicts: Vec<Verdict>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub zeta_table: Vec<ZetaRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub monte_carlo: Vec<BllRecord>,
    pub runtime: Runtime,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            tool: Tool::default(),
            config,
            status: Status::Ok,
            error: None,
            domains: vec![],
            verdicts: vec![],
            checks: vec![],
            notes: vec![],
            zeta_table: vec![],
            monte_carlo: vec![],
            runtime: Runtime::default(),
        }
    }

    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds) && self.checks.iter().all(|c| c.passed)
    }

    pub fn domain(&self, label: &str) -> Option<&DomainReport> {
        self.domains.iter().find(|d| d.label == label)
    }

    /// Sets the final status from the verdicts, unless a failure is already recorded.
    pub fn finish(&mut self) {
        if self.status == Status::Ok && !self.all_hold() {
            self.status = Status::VerdictFailure;
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::VerdictFailure => 1,
            Status::NumericalFailure => 3,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report as JSON with the runtime section removed.
    pub fn deterministic_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("runtime");
        }
        serde_json::to_string_pretty(&value).expect("report serializes")
    }
}
