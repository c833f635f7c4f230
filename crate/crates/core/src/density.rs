//! Finite-prefix moduli densities of index sets.
//!
//! A profile holds the ratio curve `r_n` and a verdict read off its tail:
//! plain f-density uses `r_n = f(|A ∩ [1, n]|) / f(n)`, the windowed variant
//! `r_n = f(|A ∩ I_n|) / f(λ_n)`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{usage, Result};
use crate::lambda::{LambdaSeq, Window};
use crate::modulus::Modulus;

/// Default tail tolerance τ.
pub const DEFAULT_TAU: f64 = 0.05;
/// Profiles keep every index up to this bound and decimate beyond it.
pub const DENSE_SAMPLES: usize = 10_000;
pub const MIN_HORIZON: usize = 100;

/// A finite set of positive indices, all at most `horizon`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexSet {
    members: Vec<usize>,
    horizon: usize,
}

impl IndexSet {
    /// Sorts and deduplicates `members`; rejects `0` and indices past `horizon`.
    pub fn new(mut members: Vec<usize>, horizon: usize) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if members.first() == Some(&0) {
            return Err(usage("index sets hold positive indices"));
        }
        if members.last().is_some_and(|&t| t > horizon) {
            return Err(usage(format!("index set member exceeds horizon {horizon}")));
        }
        Ok(Self { members, horizon })
    }

    pub fn from_predicate(horizon: usize, pred: impl Fn(usize) -> bool) -> Self {
        Self {
            members: (1..=horizon).filter(|&t| pred(t)).collect(),
            horizon,
        }
    }

    pub fn empty(horizon: usize) -> Self {
        Self {
            members: Vec::new(),
            horizon,
        }
    }

    pub fn naturals(horizon: usize) -> Self {
        Self::from_predicate(horizon, |_| true)
    }

    pub(crate) fn from_membership(mask: &[bool]) -> Self {
        let horizon = mask.len().saturating_sub(1);
        Self {
            members: (1..=horizon).filter(|&t| mask[t]).collect(),
            horizon,
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn contains(&self, t: usize) -> bool {
        self.members.binary_search(&t).is_ok()
    }

    /// Characteristic vector indexed by `t` (slot 0 unused).
    pub fn membership(&self) -> Vec<bool> {
        let mut mask = vec![false; self.horizon + 1];
        for &t in &self.members {
            mask[t] = true;
        }
        mask
    }

    /// `{1..=horizon} \ self`
    pub fn complement(&self) -> Self {
        let mask = self.membership();
        Self::from_predicate(self.horizon, |t| !mask[t])
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.members.iter().all(|&t| other.contains(t))
    }
}

/// Tail heuristic deciding a finite-prefix limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRule {
    pub tau: f64,
    /// Fixed tail length; defaults to `max(10, ⌈horizon/10⌉)`.
    pub window: Option<usize>,
}

impl Default for TailRule {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            window: None,
        }
    }
}

impl TailRule {
    pub fn with_tau(tau: f64) -> Self {
        Self { tau, window: None }
    }

    pub fn tail_len(&self, samples: usize) -> usize {
        self.window
            .unwrap_or_else(|| samples.div_ceil(10).max(10))
            .clamp(1, samples.max(1))
    }

    /// Verdict on the last `tail_len` values of `ratios`.
    pub fn classify(&self, ratios: &[f64]) -> TailSummary {
        let w = self.tail_len(ratios.len());
        let tail = &ratios[ratios.len() - w..];
        let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
        let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let verdict = if max < self.tau {
            DensityVerdict::Zero
        } else if min > 1.0 - self.tau && max < 1.0 + self.tau {
            DensityVerdict::One
        } else if max - min < self.tau {
            DensityVerdict::Value(0.5 * (min + max))
        } else {
            DensityVerdict::Inconclusive
        };
        TailSummary {
            verdict,
            window: w,
            min,
            max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSummary {
    pub verdict: DensityVerdict,
    pub window: usize,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityVerdict {
    Zero,
    One,
    Value(f64),
    Inconclusive,
}

impl DensityVerdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, DensityVerdict::Zero)
    }

    /// Clearly away from zero.
    pub fn is_nonzero(&self) -> bool {
        matches!(self, DensityVerdict::One | DensityVerdict::Value(_))
    }
}

impl fmt::Display for DensityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityVerdict::Zero => f.write_str("zero"),
            DensityVerdict::One => f.write_str("one"),
            DensityVerdict::Value(v) => write!(f, "value:{v}"),
            DensityVerdict::Inconclusive => f.write_str("inconclusive"),
        }
    }
}

impl Serialize for DensityVerdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub n: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityProfile {
    pub horizon: usize,
    /// Every `n ≤ 10⁴`, then every `⌈horizon/10⁴⌉`-th index and the horizon.
    pub samples: Vec<ProfilePoint>,
    pub verdict: DensityVerdict,
    pub tail_window: usize,
    pub tolerance: f64,
    pub tail_min: f64,
    pub tail_max: f64,
}

impl DensityProfile {
    /// Builds a profile from `ratios[n - 1] = r_n`.
    pub fn from_ratios(ratios: &[f64], rule: &TailRule) -> Self {
        let horizon = ratios.len();
        let summary = rule.classify(ratios);
        Self {
            horizon,
            samples: decimate(ratios),
            verdict: summary.verdict,
            tail_window: summary.window,
            tolerance: rule.tau,
            tail_min: summary.min,
            tail_max: summary.max,
        }
    }

    pub fn last(&self) -> Option<f64> {
        self.samples.last().map(|p| p.ratio)
    }

    /// Writes `n,ratio` rows with a header line.
    pub fn write_csv(&self, mut out: impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "n,ratio")?;
        for p in &self.samples {
            writeln!(out, "{},{}", p.n, p.ratio)?;
        }
        Ok(())
    }
}

fn decimate(ratios: &[f64]) -> Vec<ProfilePoint> {
    let horizon = ratios.len();
    let stride = horizon.div_ceil(DENSE_SAMPLES).max(1);
    ratios
        .iter()
        .enumerate()
        .map(|(i, &ratio)| ProfilePoint { n: i + 1, ratio })
        .filter(|p| p.n <= DENSE_SAMPLES || p.n % stride == 0 || p.n == horizon)
        .collect()
}

fn check_horizon(a: &IndexSet, horizon: usize) -> Result<()> {
    if horizon < MIN_HORIZON {
        return Err(usage(format!("density profiles need horizon >= {MIN_HORIZON}")));
    }
    if horizon > a.horizon() {
        return Err(usage(format!(
            "horizon {horizon} exceeds the index set horizon {}",
            a.horizon()
        )));
    }
    Ok(())
}

/// Sliding count of members inside `I_n` as `n` advances.
///
/// For Λ-class sequences the window start never moves left, so every step
/// adds the entering index and drops the leaving ones; a start that moves
/// left (possible for pluggable sequences) is handled by re-adding.
pub(crate) struct WindowCounter<'a> {
    mask: &'a [bool],
    start: usize,
    count: usize,
}

impl<'a> WindowCounter<'a> {
    pub(crate) fn new(mask: &'a [bool]) -> Self {
        Self {
            mask,
            start: 1,
            count: 0,
        }
    }

    /// Advance to window `w`, which must be the window for the next `n`.
    pub(crate) fn advance(&mut self, w: &Window) -> usize {
        if self.mask[w.end] {
            self.count += 1;
        }
        while self.start < w.start {
            if self.mask[self.start] {
                self.count -= 1;
            }
            self.start += 1;
        }
        while self.start > w.start {
            self.start -= 1;
            if self.mask[self.start] {
                self.count += 1;
            }
        }
        self.count
    }
}

/// `|A ∩ I_n|` for `n = 1..=horizon`, computed incrementally.
pub fn windowed_counts(a: &IndexSet, s: &LambdaSeq, horizon: usize) -> Result<Vec<usize>> {
    if horizon > a.horizon() {
        return Err(usage("horizon exceeds the index set horizon"));
    }
    let mask = a.membership();
    let mut counter = WindowCounter::new(&mask);
    (1..=horizon)
        .map(|n| Ok(counter.advance(&s.window(n)?)))
        .collect()
}

/// `r_n = f(|A ∩ I_n|) / f(λ_n)` from a membership mask covering `1..=horizon`.
pub(crate) fn windowed_ratios(mask: &[bool], m: &Modulus, s: &LambdaSeq, horizon: usize) -> Result<Vec<f64>> {
    let mut counter = WindowCounter::new(mask);
    (1..=horizon)
        .map(|n| {
            let lambda = s.lambda_at(n)?;
            let count = counter.advance(&Window::from_lambda(n, lambda));
            Ok(m.of_count(count) / m.raw(lambda))
        })
        .collect()
}

/// Plain f-density profile, `r_n = f(|A ∩ [1, n]|) / f(n)`.
pub fn f_density(a: &IndexSet, m: &Modulus, horizon: usize, rule: &TailRule) -> Result<DensityProfile> {
    m.require_unbounded()?;
    check_horizon(a, horizon)?;
    let mut members = a.members().iter().peekable();
    let mut count = 0usize;
    let ratios: Vec<f64> = (1..=horizon)
        .map(|n| {
            while members.next_if(|&&t| t <= n).is_some() {
                count += 1;
            }
            m.of_count(count) / m.of_count(n)
        })
        .collect();
    Ok(DensityProfile::from_ratios(&ratios, rule))
}

/// Windowed f_λ-density profile, `r_n = f(|A ∩ I_n|) / f(λ_n)`.
pub fn f_lambda_density(
    a: &IndexSet,
    m: &Modulus,
    s: &LambdaSeq,
    horizon: usize,
    rule: &TailRule,
) -> Result<DensityProfile> {
    m.require_unbounded()?;
    check_horizon(a, horizon)?;
    let ratios = windowed_ratios(&a.membership(), m, s, horizon)?;
    Ok(DensityProfile::from_ratios(&ratios, rule))
}

/// Natural density: [`f_density`] with the identity modulus.
pub fn natural_density(a: &IndexSet, horizon: usize, rule: &TailRule) -> Result<DensityProfile> {
    f_density(a, &Modulus::identity(), horizon, rule)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplementCheck {
    pub a_profile: DensityProfile,
    pub complement_profile: DensityProfile,
    /// First `n` where `1 ≤ r_A(n) + r_C(n) ≤ r_A(n) + 1` fails (to 1e−9).
    pub sandwich_violation: Option<usize>,
    pub relation_holds: bool,
}

const SANDWICH_SLACK: f64 = 1e-9;

/// For a set of f-density zero, checks that its complement has f-density one.
pub fn complement_check(a: &IndexSet, m: &Modulus, horizon: usize, rule: &TailRule) -> Result<ComplementCheck> {
    let a_profile = f_density(a, m, horizon, rule)?;
    if !a_profile.verdict.is_zero() {
        return Err(usage(format!(
            "complement check needs an f-density zero set; verdict was {}",
            a_profile.verdict
        )));
    }
    let complement = a.complement();
    let complement_profile = f_density(&complement, m, horizon, rule)?;

    let mut in_a = 0usize;
    let mask = a.membership();
    let mut sandwich_violation = None;
    for (n, &member) in mask.iter().enumerate().take(horizon + 1).skip(1) {
        if member {
            in_a += 1;
        }
        let fn_ = m.of_count(n);
        let ra = m.of_count(in_a) / fn_;
        let rc = m.of_count(n - in_a) / fn_;
        if ra + rc < 1.0 - SANDWICH_SLACK || rc > 1.0 + SANDWICH_SLACK {
            sandwich_violation = Some(n);
            break;
        }
    }
    let relation_holds =
        sandwich_violation.is_none() && matches!(complement_profile.verdict, DensityVerdict::One);
    Ok(ComplementCheck {
        a_profile,
        complement_profile,
        sandwich_violation,
        relation_holds,
    })
}
