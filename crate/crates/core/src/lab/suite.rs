use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use super::{
    check_c1_linear, check_c1_unique, check_cauchy_equiv, check_library_agreement, check_t1, check_t10_c4,
    check_t2, check_t3, check_t7, check_t8, check_t9, LabParams, Outcome, Subject, TheoremCheck, TheoremId,
};
use crate::convergence::Scheme;
use crate::error::Result;
use crate::exec::Exec;
use crate::io::{Meta, Report, ResultRow, RunConfig};
use crate::lambda::LambdaSeq;
use crate::modulus::Modulus;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub supported: usize,
    pub supported_vacuous: usize,
    pub hypothesis_not_met: usize,
    pub violated: usize,
    pub inconclusive: usize,
}

impl Tally {
    fn add(&mut self, o: Outcome) {
        match o {
            Outcome::Supported => self.supported += 1,
            Outcome::SupportedVacuous => self.supported_vacuous += 1,
            Outcome::HypothesisNotMet => self.hypothesis_not_met += 1,
            Outcome::Violated => self.violated += 1,
            Outcome::Inconclusive => self.inconclusive += 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub checks: Vec<TheoremCheck>,
    pub tally: BTreeMap<TheoremId, Tally>,
    pub violated: usize,
    /// Theorems without a single non-vacuous supported instance.
    pub uncovered: Vec<TheoremId>,
    pub passed: bool,
}

impl SuiteReport {
    fn assemble(checks: Vec<TheoremCheck>, mu_present: bool) -> Self {
        let mut tally: BTreeMap<TheoremId, Tally> = BTreeMap::new();
        for c in &checks {
            tally.entry(c.theorem).or_default().add(c.outcome);
        }
        let violated = tally.values().map(|t| t.violated).sum();
        let uncovered: Vec<TheoremId> = if checks.is_empty() {
            Vec::new()
        } else {
            TheoremId::ALL
                .into_iter()
                .filter(|id| mu_present || !id.needs_mu())
                .filter(|id| tally.get(id).is_none_or(|t| t.supported == 0))
                .collect()
        };
        let passed = violated == 0 && uncovered.is_empty();
        Self {
            checks,
            tally,
            violated,
            uncovered,
            passed,
        }
    }

    /// The JSON document written by `verify-theorems`. Ratio curves are only
    /// attached to violated rows.
    pub fn to_report(&self, cfg: &RunConfig) -> Result<Report> {
        let results = self
            .checks
            .iter()
            .map(|c| {
                let mut params = BTreeMap::new();
                params.insert("subject".to_string(), json!(c.subject));
                params.insert("modulus".to_string(), json!(c.recipe.modulus));
                params.insert("lambda".to_string(), json!(c.recipe.lambda));
                if let Some(mu) = &c.recipe.mu {
                    params.insert("mu".to_string(), json!(mu));
                }
                let mut diagnostics = BTreeMap::new();
                diagnostics.insert("hypothesis_met".to_string(), json!(c.hypothesis_met));
                diagnostics.insert("hypothesis".to_string(), json!(c.hypothesis));
                diagnostics.insert("conclusion".to_string(), json!(c.conclusion));
                diagnostics.insert("recipe".to_string(), serde_json::to_value(&c.recipe)?);
                Ok(ResultRow {
                    mode: c.theorem.to_string(),
                    params,
                    verdict: c.outcome.to_string(),
                    profiles: c.profiles.clone(),
                    diagnostics,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let summary = json!({
            "checks": self.checks.len(),
            "tally": self.tally.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<BTreeMap<String, Value>>(),
            "violated": self.violated,
            "uncovered": self.uncovered.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            "passed": self.passed,
        });
        Ok(Report {
            meta: Meta::new(serde_json::to_value(cfg)?, Some(cfg.seed)),
            results,
            summary: Some(summary),
        })
    }
}

enum Item {
    /// Every single-sequence check for one (sequence, f, λ).
    Scheme { s: usize, m: usize, l: usize },
    /// Library-wide agreement for one (sequence, λ).
    Library { s: usize, l: usize },
    /// Linearity for one pair under (f, λ).
    Pair { a: usize, b: usize, m: usize, l: usize },
}

/// Sweeps the corpus over every (f, λ) pair of the configuration.
///
/// Items are independent and may run on the rayon pool; results come back
/// in sweep order, so the report depends only on the configuration.
pub fn run_suite(cfg: &RunConfig, exec: Exec) -> Result<SuiteReport> {
    cfg.validate()?;
    let moduli = cfg.moduli()?;
    let lambdas = cfg.lambdas()?;
    let mu = cfg.mu()?;
    let params = LabParams::from_config(cfg);
    let corpus = cfg.corpus();
    let subjects = exec
        .map(&corpus, |spec| Subject::from_spec(spec, cfg.horizon))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut items = Vec::new();
    for s in 0..subjects.len() {
        for m in 0..moduli.len() {
            for l in 0..lambdas.len() {
                items.push(Item::Scheme { s, m, l });
            }
        }
        for l in 0..lambdas.len() {
            items.push(Item::Library { s, l });
        }
    }
    for (a, b) in cfg.pairs(subjects.len()) {
        for m in 0..moduli.len() {
            for l in 0..lambdas.len() {
                items.push(Item::Pair { a, b, m, l });
            }
        }
    }

    let run = |item: &Item| -> Result<Vec<TheoremCheck>> {
        match *item {
            Item::Scheme { s, m, l } => {
                scheme_checks(&subjects[s], &moduli[m], &lambdas[l], mu.as_ref(), &params, cfg)
            }
            Item::Library { s, l } => Ok(vec![check_library_agreement(&subjects[s], &lambdas[l], &params)?]),
            Item::Pair { a, b, m, l } => {
                let scheme = Scheme::new(moduli[m].clone(), lambdas[l].clone(), cfg.rule());
                Ok(vec![check_c1_linear(&subjects[a], &subjects[b], &scheme, &params)?])
            }
        }
    };
    let mut checks = Vec::new();
    for batch in exec.map(&items, run) {
        checks.extend(batch?);
    }
    Ok(SuiteReport::assemble(checks, mu.is_some()))
}

fn scheme_checks(
    s: &Subject,
    m: &Modulus,
    l: &LambdaSeq,
    mu: Option<&LambdaSeq>,
    p: &LabParams,
    cfg: &RunConfig,
) -> Result<Vec<TheoremCheck>> {
    let scheme = Scheme::new(m.clone(), l.clone(), cfg.rule());
    let mut out = Vec::with_capacity(13);
    out.extend(check_t1(s, &scheme, p)?);
    out.push(check_c1_unique(s, &scheme, p)?);
    out.push(check_t2(s, &scheme, p)?);
    out.push(check_t3(s, &scheme, p)?);
    out.extend(check_cauchy_equiv(s, &scheme, p)?);
    out.push(check_t7(s, &scheme, p)?);
    out.push(check_t8(s, &scheme, p)?);
    if let Some(mu) = mu {
        out.extend(check_t9(s, &scheme, mu, p)?);
        out.extend(check_t10_c4(s, &scheme, mu, p)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{GeneratorKind, GeneratorSpec};

    #[test]
    fn empty_corpus_gives_empty_passing_report() {
        let cfg = RunConfig {
            corpus: Some(vec![]),
            ..RunConfig::default()
        };
        let r = run_suite(&cfg, Exec::Sequential).unwrap();
        assert!(r.checks.is_empty());
        assert!(r.passed);
    }

    #[test]
    fn single_constant_is_supported_or_vacuous() {
        let cfg = RunConfig {
            horizon: 5000,
            corpus: Some(vec![GeneratorSpec::new(GeneratorKind::Constant { limit: 1.5 })]),
            ..RunConfig::default()
        };
        let r = run_suite(&cfg, Exec::default()).unwrap();
        assert_eq!(r.violated, 0);
        for c in &r.checks {
            assert!(
                matches!(
                    c.outcome,
                    Outcome::Supported | Outcome::SupportedVacuous | Outcome::HypothesisNotMet
                ),
                "{} {:?}",
                c.theorem,
                c.outcome
            );
        }
        // no partner, so linearity is never exercised
        assert_eq!(r.uncovered, vec![TheoremId::C1Linear]);
    }

    #[test]
    fn unknown_generator_is_usage_error() {
        let err = RunConfig::from_json(r#"{"corpus": [{"kind": "zigzag", "limit": 0}]}"#).unwrap_err();
        assert!(matches!(err, crate::Error::Usage(_)));
    }
}
