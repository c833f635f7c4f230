use std::path::Path;

use serde::{Deserialize, Serialize};

use super::generate::{GeneratorKind, GeneratorSpec, SetKind};
use crate::convergence::{DEFAULT_CANDIDATES, DEFAULT_XI};
use crate::decompose::DEFAULT_STAGES;
use crate::density::{TailRule, DEFAULT_TAU, MIN_HORIZON};
use crate::error::{usage, Error, Result};
use crate::lambda::LambdaSeq;
use crate::modulus::Modulus;

/// Directory for outputs when no explicit path is given.
pub const OUT_DIR_ENV: &str = "FSTAT_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub horizon: usize,
    pub xi_list: Vec<f64>,
    pub tau: f64,
    pub tail_window: Option<usize>,
    pub moduli: Vec<String>,
    pub lambdas: Vec<String>,
    pub mu: Option<String>,
    pub seed: u64,
    /// `None` selects [`default_corpus`].
    pub corpus: Option<Vec<GeneratorSpec>>,
    /// Index pairs into the corpus for the linearity checks; `None` means
    /// every unordered pair.
    pub pairs: Option<Vec<(usize, usize)>>,
    pub alpha: f64,
    pub d_max: usize,
    pub z_max: usize,
    pub candidate_count: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            horizon: 100_000,
            xi_list: DEFAULT_XI.to_vec(),
            tau: DEFAULT_TAU,
            tail_window: None,
            moduli: vec!["identity".into(), "affinelog".into()],
            lambdas: vec!["full".into(), "affine:0.5".into(), "sqrt".into()],
            mu: Some("full".into()),
            seed: 0,
            corpus: None,
            pairs: None,
            alpha: -1.0,
            d_max: DEFAULT_STAGES,
            z_max: DEFAULT_STAGES,
            candidate_count: DEFAULT_CANDIDATES,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| usage(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < MIN_HORIZON {
            return Err(usage(format!("horizon must be at least {MIN_HORIZON}")));
        }
        if self.xi_list.is_empty() || self.xi_list.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(usage("xi_list must be non-empty and positive"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(usage("tau must lie in (0, 1)"));
        }
        if self.tail_window == Some(0) {
            return Err(usage("tail_window must be positive"));
        }
        if !self.alpha.is_finite() {
            return Err(usage("alpha must be finite"));
        }
        if self.d_max == 0 || self.z_max == 0 || self.candidate_count == 0 {
            return Err(usage("d_max, z_max and candidate_count must be positive"));
        }
        self.moduli()?;
        self.lambdas()?;
        self.mu()?;
        if let (Some(pairs), Some(corpus)) = (&self.pairs, &self.corpus) {
            if let Some((i, j)) = pairs.iter().find(|(i, j)| *i >= corpus.len() || *j >= corpus.len()) {
                return Err(usage(format!("pair ({i}, {j}) is outside the corpus")));
            }
        }
        Ok(())
    }

    pub fn rule(&self) -> TailRule {
        TailRule {
            tau: self.tau,
            window: self.tail_window,
        }
    }

    pub fn moduli(&self) -> Result<Vec<Modulus>> {
        self.moduli.iter().map(|s| s.parse()).collect()
    }

    pub fn lambdas(&self) -> Result<Vec<LambdaSeq>> {
        self.lambdas.iter().map(|s| s.parse()).collect()
    }

    pub fn mu(&self) -> Result<Option<LambdaSeq>> {
        self.mu.as_deref().map(str::parse).transpose()
    }

    pub fn corpus(&self) -> Vec<GeneratorSpec> {
        self.corpus.clone().unwrap_or_else(|| default_corpus(self.seed))
    }

    /// Linearity pairs; defaults to every unordered pair of the corpus.
    pub fn pairs(&self, corpus_len: usize) -> Vec<(usize, usize)> {
        self.pairs.clone().unwrap_or_else(|| {
            (0..corpus_len)
                .flat_map(|i| (i + 1..corpus_len).map(move |j| (i, j)))
                .collect()
        })
    }
}

/// Constants, `1/t` decay, spikes on the squares and on the powers of two,
/// a parity oscillation and noisy spikes.
pub fn default_corpus(seed: u64) -> Vec<GeneratorSpec> {
    use GeneratorKind::*;
    [
        Constant { limit: 2.0 },
        Constant { limit: -0.5 },
        Decay { limit: 0.0, power: 1.0 },
        Spike {
            limit: 0.0,
            set: SetKind::Squares,
            magnitude: 1.0,
        },
        Spike {
            limit: 1.0,
            set: SetKind::PowersOf2,
            magnitude: 3.0,
        },
        Oscillate {
            limit: 0.0,
            amplitude: 1.0,
        },
        NoisySpike {
            limit: 0.5,
            magnitude: 1.0,
            noise_amp: 0.002,
            seed,
        },
    ]
    .into_iter()
    .map(GeneratorSpec::new)
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.corpus().len(), 7);
        assert_eq!(cfg.pairs(7).len(), 21);
    }

    #[test]
    fn rejects_bad_values() {
        for bad in [
            r#"{"horizon": 50}"#,
            r#"{"tau": 0}"#,
            r#"{"xi_list": []}"#,
            r#"{"moduli": ["cube"]}"#,
            r#"{"lambdas": ["affine:2"]}"#,
            r#"{"corpus": [], "pairs": [[0, 1]]}"#,
            r#"{"horizn": 1000}"#,
        ] {
            assert!(matches!(RunConfig::from_json(bad), Err(Error::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = RunConfig {
            corpus: Some(default_corpus(3)),
            ..RunConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}
