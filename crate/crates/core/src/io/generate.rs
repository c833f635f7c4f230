use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convergence::SequencePrefix;
use crate::error::{usage, Result};

/// Index sets carrying the spikes of a spike generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    Squares,
    PowersOf2,
    Evens,
    /// `t mod period < width`.
    Block { period: usize, width: usize },
    Explicit(Vec<usize>),
}

impl SetKind {
    pub fn contains(&self, t: usize) -> bool {
        match self {
            SetKind::Squares => {
                let r = (t as f64).sqrt().round() as usize;
                r * r == t
            }
            SetKind::PowersOf2 => t.is_power_of_two(),
            SetKind::Evens => t.is_multiple_of(2),
            SetKind::Block { period, width } => t % period < *width,
            SetKind::Explicit(list) => list.contains(&t),
        }
    }

    /// Sets whose natural density is zero, so spikes on them still converge.
    fn is_sparse(&self) -> bool {
        matches!(self, SetKind::Squares | SetKind::PowersOf2 | SetKind::Explicit(_))
    }

    fn check(&self) -> Result<()> {
        match self {
            SetKind::Block { period, width } if *period == 0 || width > period => {
                Err(usage(format!("block set needs 0 < period and width <= period, got {period}/{width}")))
            }
            SetKind::Explicit(list) if list.contains(&0) => Err(usage("explicit sets are 1-based")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    Constant {
        limit: f64,
    },
    /// `x_t = L + t^(-power)`.
    Decay {
        limit: f64,
        power: f64,
    },
    Spike {
        limit: f64,
        set: SetKind,
        magnitude: f64,
    },
    /// `x_t = L + amplitude·(-1)^t`.
    Oscillate {
        limit: f64,
        amplitude: f64,
    },
    /// Spikes on the squares plus uniform noise in `[-noise_amp, noise_amp]`.
    NoisySpike {
        limit: f64,
        magnitude: f64,
        noise_amp: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    /// Defaults to the run horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind) -> Self {
        Self { kind, length: None }
    }

    pub fn with_length(mut self, n: usize) -> Self {
        self.length = Some(n);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| usage(format!("generator spec: {e}")))
    }

    /// Short label used in suite rows.
    pub fn label(&self) -> String {
        match &self.kind {
            GeneratorKind::Constant { limit } => format!("constant({limit})"),
            GeneratorKind::Decay { limit, power } => format!("decay({limit},{power})"),
            GeneratorKind::Spike { limit, set, magnitude } => {
                let set = match set {
                    SetKind::Squares => "squares".to_string(),
                    SetKind::PowersOf2 => "powers_of_2".to_string(),
                    SetKind::Evens => "evens".to_string(),
                    SetKind::Block { period, width } => format!("block{period}/{width}"),
                    SetKind::Explicit(list) => format!("explicit{}", list.len()),
                };
                format!("spike({limit},{set},{magnitude})")
            }
            GeneratorKind::Oscillate { limit, amplitude } => format!("oscillate({limit},{amplitude})"),
            GeneratorKind::NoisySpike {
                limit,
                magnitude,
                noise_amp,
                seed,
            } => format!("noisy_spike({limit},{magnitude},{noise_amp},{seed})"),
        }
    }

    /// The centre parameter `L` of the family.
    pub fn center(&self) -> f64 {
        match self.kind {
            GeneratorKind::Constant { limit }
            | GeneratorKind::Decay { limit, .. }
            | GeneratorKind::Spike { limit, .. }
            | GeneratorKind::Oscillate { limit, .. }
            | GeneratorKind::NoisySpike { limit, .. } => limit,
        }
    }

    /// Generates `length` terms, or `default_len` when no length is set.
    ///
    /// The prefix carries the family's analytic bound, and its limit when
    /// the family converges statistically.
    pub fn generate(&self, default_len: usize) -> Result<SequencePrefix> {
        let n = self.length.unwrap_or(default_len);
        if n == 0 {
            return Err(usage("generator length must be at least 1"));
        }
        let (values, limit, bound): (Vec<f64>, Option<f64>, f64) = match &self.kind {
            GeneratorKind::Constant { limit } => (vec![*limit; n], Some(*limit), limit.abs()),
            GeneratorKind::Decay { limit, power } => {
                if power.is_nan() || *power <= 0.0 {
                    return Err(usage(format!("decay power must be positive, got {power}")));
                }
                let values = (1..=n).map(|t| limit + (t as f64).powf(-power)).collect();
                (values, Some(*limit), limit.abs() + 1.0)
            }
            GeneratorKind::Spike { limit, set, magnitude } => {
                set.check()?;
                let values = (1..=n).map(|t| if set.contains(t) { limit + magnitude } else { *limit }).collect();
                let converges = set.is_sparse() || *magnitude == 0.0;
                (values, converges.then_some(*limit), limit.abs() + magnitude.abs())
            }
            GeneratorKind::Oscillate { limit, amplitude } => {
                let values = (1..=n).map(|t| if t % 2 == 0 { limit + amplitude } else { limit - amplitude }).collect();
                let converges = *amplitude == 0.0;
                (values, converges.then_some(*limit), limit.abs() + amplitude.abs())
            }
            GeneratorKind::NoisySpike {
                limit,
                magnitude,
                noise_amp,
                seed,
            } => {
                if noise_amp.is_nan() || *noise_amp < 0.0 {
                    return Err(usage("noise amplitude must be non-negative"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let values = (1..=n)
                    .map(|t| {
                        let noise = if *noise_amp > 0.0 {
                            rng.random_range(-noise_amp..=*noise_amp)
                        } else {
                            0.0
                        };
                        let spike = if SetKind::Squares.contains(t) { *magnitude } else { 0.0 };
                        limit + spike + noise
                    })
                    .collect();
                (values, Some(*limit), limit.abs() + magnitude.abs() + noise_amp)
            }
        };
        let mut x = SequencePrefix::new(values)?.with_bound(bound);
        if let Some(l) = limit {
            x = x.with_limit(l);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(json: &str) -> GeneratorSpec {
        GeneratorSpec::from_json(json).unwrap()
    }

    #[test]
    fn examples() {
        let c = spec(r#"{"kind":"constant","limit":3,"length":5}"#).generate(100).unwrap();
        assert_eq!(c.values(), &[3.0; 5]);

        let s = spec(r#"{"kind":"spike","limit":0,"set":"squares","magnitude":1,"length":10}"#)
            .generate(100)
            .unwrap();
        let spikes: Vec<usize> = (1..=10).filter(|&t| s.at(t) == 1.0).collect();
        assert_eq!(spikes, vec![1, 4, 9]);

        let d = spec(r#"{"kind":"decay","limit":1,"power":1,"length":3}"#).generate(100).unwrap();
        assert_eq!(d.values(), &[2.0, 1.5, 1.0 + 1.0 / 3.0]);
    }

    #[test]
    fn set_kinds_parse() {
        let b = spec(r#"{"kind":"spike","limit":0,"magnitude":2,"set":{"block":{"period":10,"width":3}}}"#);
        let x = b.generate(20).unwrap();
        let hits: Vec<usize> = (1..=20).filter(|&t| x.at(t) == 2.0).collect();
        assert_eq!(hits, vec![1, 2, 10, 11, 12, 20]);
        assert_eq!(x.known_limit, None);

        let e = spec(r#"{"kind":"spike","limit":0,"magnitude":1,"set":{"explicit":[2,7]}}"#);
        let x = e.generate(8).unwrap();
        assert_eq!(x.values(), &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);

        assert!(GeneratorSpec::from_json(r#"{"kind":"spike","limit":0,"magnitude":1,"set":"primes"}"#).is_err());
        assert!(GeneratorSpec::from_json(r#"{"kind":"wave","limit":0}"#).is_err());
    }

    #[test]
    fn noise_is_seeded_and_bounded() {
        let s = spec(r#"{"kind":"noisy_spike","limit":1,"magnitude":1,"noise_amp":0.002,"seed":9}"#);
        let a = s.generate(5000).unwrap();
        let b = s.generate(5000).unwrap();
        assert_eq!(a, b);
        for t in 1..=5000 {
            let base = if SetKind::Squares.contains(t) { 2.0 } else { 1.0 };
            assert!((a.at(t) - base).abs() <= 0.002 + 1e-15);
        }
        let other = GeneratorSpec {
            kind: GeneratorKind::NoisySpike {
                limit: 1.0,
                magnitude: 1.0,
                noise_amp: 0.002,
                seed: 10,
            },
            length: None,
        };
        assert_ne!(other.generate(5000).unwrap(), a);
    }

    #[test]
    fn oscillation_and_bounds() {
        let x = GeneratorSpec::new(GeneratorKind::Oscillate { limit: 0.0, amplitude: 1.0 })
            .generate(4)
            .unwrap();
        assert_eq!(x.values(), &[-1.0, 1.0, -1.0, 1.0]);
        assert_eq!(x.known_limit, None);
        assert_eq!(x.bounded_hint, Some(1.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        let bad = [
            r#"{"kind":"decay","limit":0,"power":0}"#,
            r#"{"kind":"spike","limit":0,"magnitude":1,"set":{"block":{"period":0,"width":0}}}"#,
            r#"{"kind":"constant","limit":0,"length":0}"#,
        ];
        for b in bad {
            assert!(spec(b).generate(10).is_err(), "{b}");
        }
    }
}
