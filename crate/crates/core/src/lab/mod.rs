//! Finite-horizon checks of the inclusion and construction theorems.
//!
//! Each check estimates its hypotheses, runs the classifiers for antecedent
//! and conclusion, and reduces them to an [`Outcome`]. An unmet hypothesis
//! never produces [`Outcome::Violated`]: finite prefixes cannot refute an
//! asymptotic assumption, so the check stops there.

mod checks;
mod suite;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::convergence::{ConvergenceVerdict, Scheme, SequencePrefix};
use crate::density::TailRule;
use crate::error::{usage, Result};
use crate::io::{GeneratorSpec, ProfileRows, RunConfig};

pub use checks::{
    check_c1_linear, check_c1_unique, check_cauchy_equiv, check_library_agreement, check_t1, check_t10_c4,
    check_t2, check_t3, check_t7, check_t8, check_t9,
};
pub use suite::{run_suite, SuiteReport, Tally};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    T1,
    #[serde(rename = "T1_converse")]
    T1Converse,
    #[serde(rename = "C1_unique")]
    C1Unique,
    #[serde(rename = "C1_linear")]
    C1Linear,
    T2,
    T3,
    #[serde(rename = "D1_C2")]
    D1C2,
    T5,
    T6,
    T7,
    T8,
    #[serde(rename = "T9_1")]
    T9Part1,
    #[serde(rename = "T9_2")]
    T9Part2,
    C4,
    T10,
}

impl TheoremId {
    pub const ALL: [TheoremId; 15] = [
        TheoremId::T1,
        TheoremId::T1Converse,
        TheoremId::C1Unique,
        TheoremId::C1Linear,
        TheoremId::T2,
        TheoremId::T3,
        TheoremId::D1C2,
        TheoremId::T5,
        TheoremId::T6,
        TheoremId::T7,
        TheoremId::T8,
        TheoremId::T9Part1,
        TheoremId::T9Part2,
        TheoremId::C4,
        TheoremId::T10,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::T1 => "T1",
            TheoremId::T1Converse => "T1_converse",
            TheoremId::C1Unique => "C1_unique",
            TheoremId::C1Linear => "C1_linear",
            TheoremId::T2 => "T2",
            TheoremId::T3 => "T3",
            TheoremId::D1C2 => "D1_C2",
            TheoremId::T5 => "T5",
            TheoremId::T6 => "T6",
            TheoremId::T7 => "T7",
            TheoremId::T8 => "T8",
            TheoremId::T9Part1 => "T9_1",
            TheoremId::T9Part2 => "T9_2",
            TheoremId::C4 => "C4",
            TheoremId::T10 => "T10",
        }
    }

    /// Checks that compare a λ-scheme with a μ-scheme.
    pub fn needs_mu(self) -> bool {
        matches!(self, TheoremId::T9Part1 | TheoremId::T9Part2 | TheoremId::C4 | TheoremId::T10)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Supported,
    /// The antecedent failed, so the implication holds trivially.
    SupportedVacuous,
    HypothesisNotMet,
    Violated,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Supported => "supported",
            Outcome::SupportedVacuous => "supported_vacuous",
            Outcome::HypothesisNotMet => "hypothesis_not_met",
            Outcome::Violated => "violated",
            Outcome::Inconclusive => "inconclusive",
        })
    }
}

/// Three-valued reading of a classifier verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl From<&ConvergenceVerdict> for Truth {
    fn from(v: &ConvergenceVerdict) -> Self {
        match v {
            ConvergenceVerdict::Holds(_) => Truth::True,
            ConvergenceVerdict::Fails => Truth::False,
            ConvergenceVerdict::Inconclusive => Truth::Unknown,
        }
    }
}

impl From<bool> for Truth {
    fn from(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

impl Truth {
    /// Conjunction; any `False` wins over `Unknown`.
    pub fn and(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        }
    }
}

/// `hypothesis ∧ antecedent ⇒ consequent`, read off finite verdicts.
pub fn implication(hypothesis_met: bool, antecedent: Truth, consequent: Truth) -> Outcome {
    if !hypothesis_met {
        return Outcome::HypothesisNotMet;
    }
    match (antecedent, consequent) {
        (Truth::False, _) => Outcome::SupportedVacuous,
        (Truth::Unknown, _) | (Truth::True, Truth::Unknown) => Outcome::Inconclusive,
        (Truth::True, Truth::True) => Outcome::Supported,
        (Truth::True, Truth::False) => Outcome::Violated,
    }
}

/// Numeric settings shared by every check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabParams {
    pub xis: Vec<f64>,
    pub tau: f64,
    pub tail_window: Option<usize>,
    pub candidate_count: usize,
    pub d_max: usize,
    pub z_max: usize,
    pub alpha: f64,
}

impl LabParams {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            xis: cfg.xi_list.clone(),
            tau: cfg.tau,
            tail_window: cfg.tail_window,
            candidate_count: cfg.candidate_count,
            d_max: cfg.d_max,
            z_max: cfg.z_max,
            alpha: cfg.alpha,
        }
    }

    pub fn rule(&self) -> TailRule {
        TailRule {
            tau: self.tau,
            window: self.tail_window,
        }
    }

    pub fn xi_min(&self) -> f64 {
        self.xis.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled_xis(&self, factor: f64) -> Vec<f64> {
        self.xis.iter().map(|x| x * factor).collect()
    }
}

impl Default for LabParams {
    fn default() -> Self {
        Self::from_config(&RunConfig::default())
    }
}

/// A sequence under test with the limit the checks are run against.
#[derive(Debug, Clone)]
pub struct Subject {
    pub label: String,
    pub spec: Option<GeneratorSpec>,
    pub x: SequencePrefix,
    pub limit: f64,
}

impl Subject {
    /// Known limit of the family, or its centre parameter when it has none.
    pub fn from_spec(spec: &GeneratorSpec, horizon: usize) -> Result<Self> {
        let x = spec.generate(horizon)?;
        let limit = x.known_limit.unwrap_or_else(|| spec.center());
        Ok(Self {
            label: spec.label(),
            spec: Some(spec.clone()),
            x,
            limit,
        })
    }

    pub fn new(label: impl Into<String>, x: SequencePrefix, limit: f64) -> Self {
        Self {
            label: label.into(),
            spec: None,
            x,
            limit,
        }
    }
}

/// Everything needed to rerun a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub theorem: TheoremId,
    pub sequence: Option<GeneratorSpec>,
    pub limit: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner: Option<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner_limit: Option<f64>,
    pub modulus: String,
    pub lambda: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<String>,
    pub horizon: usize,
    pub params: LabParams,
}

impl Recipe {
    fn subject(spec: &Option<GeneratorSpec>, limit: f64, horizon: usize) -> Result<Subject> {
        let spec = spec.as_ref().ok_or_else(|| usage("recipe has no generator spec to replay"))?;
        let mut s = Subject::from_spec(spec, horizon)?;
        s.limit = limit;
        Ok(s)
    }

    /// Regenerates the inputs and reruns the check.
    pub fn replay(&self) -> Result<TheoremCheck> {
        let subject = Self::subject(&self.sequence, self.limit, self.horizon)?;
        let scheme = Scheme::new(self.modulus.parse()?, self.lambda.parse()?, self.params.rule());
        let mu = || -> Result<crate::lambda::LambdaSeq> {
            self.mu
                .as_deref()
                .ok_or_else(|| usage("recipe needs a mu sequence"))?
                .parse()
        };
        let p = &self.params;
        let [a, b] = match self.theorem {
            TheoremId::T1 | TheoremId::T1Converse => check_t1(&subject, &scheme, p)?,
            TheoremId::D1C2 | TheoremId::T5 => check_cauchy_equiv(&subject, &scheme, p)?,
            TheoremId::T9Part1 | TheoremId::T9Part2 => check_t9(&subject, &scheme, &mu()?, p)?,
            TheoremId::T10 | TheoremId::C4 => check_t10_c4(&subject, &scheme, &mu()?, p)?,
            _ => {
                let single = match self.theorem {
                    TheoremId::C1Unique => check_c1_unique(&subject, &scheme, p)?,
                    TheoremId::C1Linear => {
                        let partner_limit = self.partner_limit.ok_or_else(|| usage("recipe needs a partner limit"))?;
                        let partner = Self::subject(&self.partner, partner_limit, self.horizon)?;
                        check_c1_linear(&subject, &partner, &scheme, p)?
                    }
                    TheoremId::T2 => check_t2(&subject, &scheme, p)?,
                    TheoremId::T3 => check_t3(&subject, &scheme, p)?,
                    TheoremId::T6 => check_library_agreement(&subject, &scheme.lambda, p)?,
                    TheoremId::T7 => check_t7(&subject, &scheme, p)?,
                    TheoremId::T8 => check_t8(&subject, &scheme, p)?,
                    _ => unreachable!("paired checks handled above"),
                };
                return Ok(single);
            }
        };
        Ok(if a.theorem == self.theorem { a } else { b })
    }
}

/// One evaluated implication.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremCheck {
    pub theorem: TheoremId,
    pub subject: String,
    pub hypothesis_met: bool,
    pub hypothesis: BTreeMap<String, Value>,
    pub conclusion: BTreeMap<String, Value>,
    pub outcome: Outcome,
    pub recipe: Recipe,
    /// Ratio curves behind a violation; empty otherwise.
    #[serde(skip)]
    pub profiles: Vec<ProfileRows>,
}

impl TheoremCheck {
    pub fn is_nonvacuous_support(&self) -> bool {
        self.outcome == Outcome::Supported
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implication_table() {
        use Truth::*;
        assert_eq!(implication(false, True, False), Outcome::HypothesisNotMet);
        assert_eq!(implication(true, False, False), Outcome::SupportedVacuous);
        assert_eq!(implication(true, True, True), Outcome::Supported);
        assert_eq!(implication(true, True, False), Outcome::Violated);
        assert_eq!(implication(true, True, Unknown), Outcome::Inconclusive);
        assert_eq!(implication(true, Unknown, True), Outcome::Inconclusive);
    }

    #[test]
    fn truth_conjunction() {
        use Truth::*;
        assert_eq!(True.and(Unknown), Unknown);
        assert_eq!(Unknown.and(False), False);
        assert_eq!(True.and(True), True);
    }

    #[test]
    fn ids_serialize_with_their_names() {
        for id in TheoremId::ALL {
            assert_eq!(serde_json::to_value(id).unwrap(), Value::String(id.name().to_string()));
        }
    }
}
