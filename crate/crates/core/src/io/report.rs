use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::convergence::ConvergenceReport;
use crate::density::{DensityProfile, ProfilePoint};

/// Top-level document shared by `analyze` and `verify-theorems`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub meta: Meta,
    pub results: Vec<ResultRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub config: Value,
    pub version: &'static str,
    pub seed: Option<u64>,
}

impl Meta {
    pub fn new(config: Value, seed: Option<u64>) -> Self {
        Self {
            config,
            version: crate::VERSION,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub mode: String,
    pub params: BTreeMap<String, Value>,
    pub verdict: String,
    pub profiles: Vec<ProfileRows>,
    pub diagnostics: BTreeMap<String, Value>,
}

/// One labelled ratio curve.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileRows {
    pub label: String,
    pub verdict: String,
    pub samples: Vec<ProfilePoint>,
}

impl ProfileRows {
    pub fn new(label: impl Into<String>, profile: &DensityProfile) -> Self {
        Self {
            label: label.into(),
            verdict: profile.verdict.to_string(),
            samples: profile.samples.clone(),
        }
    }
}

/// Profile rows of a convergence report, labelled by ξ.
pub fn profile_rows(report: &ConvergenceReport) -> Vec<ProfileRows> {
    report
        .profiles
        .iter()
        .map(|p| {
            let label = match p.xi {
                Some(xi) => format!("xi={xi}"),
                None => "mean".to_string(),
            };
            ProfileRows::new(label, &p.profile)
        })
        .collect()
}

impl ResultRow {
    /// Row for a classifier run; tail statistics go to the diagnostics.
    pub fn from_convergence(report: &ConvergenceReport, params: BTreeMap<String, Value>) -> Self {
        let tails: Vec<Value> = report
            .profiles
            .iter()
            .map(|p| {
                serde_json::json!({
                    "xi": p.xi,
                    "tail_min": p.profile.tail_min,
                    "tail_max": p.profile.tail_max,
                    "tail_window": p.profile.tail_window,
                    "verdict": p.profile.verdict.to_string(),
                })
            })
            .collect();
        let mut diagnostics = BTreeMap::new();
        diagnostics.insert("tails".to_string(), Value::Array(tails));
        diagnostics.insert("tolerance".to_string(), report.tolerance.into());
        Self {
            mode: report.mode.to_string(),
            params,
            verdict: report.verdict.to_string(),
            profiles: profile_rows(report),
            diagnostics,
        }
    }
}
