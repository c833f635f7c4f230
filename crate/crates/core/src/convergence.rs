//! Classifiers for finite sequence prefixes.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::density::{self, windowed_ratios, DensityProfile, IndexSet, TailRule};
use crate::error::{usage, Result};
use crate::lambda::LambdaSeq;
use crate::modulus::Modulus;

/// Default exceedance thresholds ξ.
pub const DEFAULT_XI: [f64; 5] = [1.0, 0.5, 0.1, 0.05, 0.01];
/// Default number of anchor candidates tried by the Cauchy search.
pub const DEFAULT_CANDIDATES: usize = 32;
/// Histogram bins tried by [`Scheme::estimate_stat_limit`].
const LIMIT_BIN_CANDIDATES: usize = 4;
pub const MIN_ESTIMATE_LEN: usize = 100;

/// A finite real sequence `x_1..x_N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequencePrefix {
    values: Vec<f64>,
    pub known_limit: Option<f64>,
    /// `|x_t| ≤ bound` for every `t`.
    pub bounded_hint: Option<f64>,
}

impl SequencePrefix {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(usage("sequence prefix is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(usage(format!("non-finite value at index {}", i + 1)));
        }
        Ok(Self {
            values,
            known_limit: None,
            bounded_hint: None,
        })
    }

    pub fn with_limit(mut self, limit: f64) -> Self {
        self.known_limit = Some(limit);
        self
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bounded_hint = Some(bound);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `x_t`, 1-based.
    pub fn at(&self, t: usize) -> f64 {
        self.values[t - 1]
    }

    /// `sup |x_t|` over the prefix.
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Termwise `self + sign·other`, truncated to the shorter length.
    fn combine(&self, other: &Self, sign: f64) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + sign * b)
            .collect();
        Self {
            values,
            known_limit: self.known_limit.zip(other.known_limit).map(|(a, b)| a + sign * b),
            bounded_hint: self.bounded_hint.zip(other.bounded_hint).map(|(a, b)| a + b),
        }
    }

    pub fn sum(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| alpha * v).collect(),
            known_limit: self.known_limit.map(|l| alpha * l),
            bounded_hint: self.bounded_hint.map(|b| alpha.abs() * b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    FStat,
    FLambdaStat,
    StrongLambdaSummable,
    StrongFLambdaSummable,
    FLambdaCauchy,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::FStat => "f_stat",
            Mode::FLambdaStat => "f_lambda_stat",
            Mode::StrongLambdaSummable => "strong_lambda_summable",
            Mode::StrongFLambdaSummable => "strong_f_lambda_summable",
            Mode::FLambdaCauchy => "f_lambda_cauchy",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvergenceVerdict {
    Holds(f64),
    Fails,
    Inconclusive,
}

impl ConvergenceVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, ConvergenceVerdict::Holds(_))
    }

    pub fn fails(&self) -> bool {
        matches!(self, ConvergenceVerdict::Fails)
    }

    pub fn limit(&self) -> Option<f64> {
        match self {
            ConvergenceVerdict::Holds(l) => Some(*l),
            _ => None,
        }
    }
}

impl fmt::Display for ConvergenceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvergenceVerdict::Holds(l) => write!(f, "holds:{l}"),
            ConvergenceVerdict::Fails => f.write_str("fails"),
            ConvergenceVerdict::Inconclusive => f.write_str("inconclusive"),
        }
    }
}

impl Serialize for ConvergenceVerdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// One ratio profile of a report; `xi` is absent for summability curves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiProfile {
    pub xi: Option<f64>,
    pub profile: DensityProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub mode: Mode,
    pub modulus: String,
    pub lambda: String,
    pub limit: Option<f64>,
    pub tolerance: f64,
    pub profiles: Vec<XiProfile>,
    pub verdict: ConvergenceVerdict,
}

impl ConvergenceReport {
    /// Largest tail ratio per profile.
    pub fn worst_tail(&self) -> Vec<(Option<f64>, f64)> {
        self.profiles.iter().map(|p| (p.xi, p.profile.tail_max)).collect()
    }

    pub fn profile_for(&self, xi: f64) -> Option<&DensityProfile> {
        self.profiles.iter().find(|p| p.xi == Some(xi)).map(|p| &p.profile)
    }
}

/// `{t : |x_t − L| ≥ ξ}` over the whole prefix.
pub fn exceedance_set(x: &SequencePrefix, limit: f64, xi: f64) -> Result<IndexSet> {
    if xi.is_nan() || xi <= 0.0 {
        return Err(usage(format!("ξ must be positive, got {xi}")));
    }
    Ok(IndexSet::from_membership(&exceedance_mask(x, limit, xi, false)))
}

/// Membership mask of `|x_t − L| ≥ ξ` (or `> ξ` when `strict`), slot 0 unused.
pub(crate) fn exceedance_mask(x: &SequencePrefix, limit: f64, xi: f64, strict: bool) -> Vec<bool> {
    std::iter::once(false)
        .chain(x.values().iter().map(|v| {
            let d = (v - limit).abs();
            if strict {
                d > xi
            } else {
                d >= xi
            }
        }))
        .collect()
}

fn check_xis(xis: &[f64]) -> Result<()> {
    if xis.is_empty() {
        return Err(usage("ξ list is empty"));
    }
    if let Some(bad) = xis.iter().find(|&&xi| !(xi > 0.0 && xi.is_finite())) {
        return Err(usage(format!("ξ values must be positive, got {bad}")));
    }
    Ok(())
}

fn aggregate(limit: f64, profiles: &[XiProfile]) -> ConvergenceVerdict {
    if profiles.iter().all(|p| p.profile.verdict.is_zero()) {
        ConvergenceVerdict::Holds(limit)
    } else if profiles.iter().any(|p| p.profile.verdict.is_nonzero()) {
        ConvergenceVerdict::Fails
    } else {
        ConvergenceVerdict::Inconclusive
    }
}

/// A modulus, a λ-sequence and the tail rule used to read verdicts.
#[derive(Debug, Clone)]
pub struct Scheme {
    pub modulus: Modulus,
    pub lambda: LambdaSeq,
    pub rule: TailRule,
}

impl Scheme {
    pub fn new(modulus: Modulus, lambda: LambdaSeq, rule: TailRule) -> Self {
        Self {
            modulus,
            lambda,
            rule,
        }
    }

    /// Same modulus and rule over another λ.
    pub fn with_lambda(&self, lambda: LambdaSeq) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    pub fn with_modulus(&self, modulus: Modulus) -> Self {
        Self {
            modulus,
            ..self.clone()
        }
    }

    /// Windowed ratio curve of a membership mask covering the prefix.
    pub(crate) fn ratios(&self, mask: &[bool]) -> Result<Vec<f64>> {
        windowed_ratios(mask, &self.modulus, &self.lambda, mask.len() - 1)
    }

    pub(crate) fn profile(&self, mask: &[bool]) -> Result<DensityProfile> {
        Ok(DensityProfile::from_ratios(&self.ratios(mask)?, &self.rule))
    }

    /// f_λ-density profile of an index set over its own horizon.
    pub fn set_profile(&self, set: &IndexSet) -> Result<DensityProfile> {
        self.modulus.require_unbounded()?;
        self.profile(&set.membership())
    }

    fn report(&self, mode: Mode, limit: Option<f64>, profiles: Vec<XiProfile>, verdict: ConvergenceVerdict) -> ConvergenceReport {
        ConvergenceReport {
            mode,
            modulus: self.modulus.to_string(),
            lambda: self.lambda.to_string(),
            limit,
            tolerance: self.rule.tau,
            profiles,
            verdict,
        }
    }

    /// Every ξ-exceedance set must have f_λ-density zero.
    pub fn f_lambda_stat_convergent(&self, x: &SequencePrefix, limit: f64, xis: &[f64]) -> Result<ConvergenceReport> {
        self.modulus.require_unbounded()?;
        check_xis(xis)?;
        let profiles = xis
            .iter()
            .map(|&xi| {
                Ok(XiProfile {
                    xi: Some(xi),
                    profile: self.profile(&exceedance_mask(x, limit, xi, false))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let verdict = aggregate(limit, &profiles);
        Ok(self.report(Mode::FLambdaStat, Some(limit), profiles, verdict))
    }

    /// Plain f-statistical convergence, with densities over `[1, n]`.
    pub fn f_stat_convergent(&self, x: &SequencePrefix, limit: f64, xis: &[f64]) -> Result<ConvergenceReport> {
        check_xis(xis)?;
        let profiles = xis
            .iter()
            .map(|&xi| {
                let set = exceedance_set(x, limit, xi)?;
                Ok(XiProfile {
                    xi: Some(xi),
                    profile: density::f_density(&set, &self.modulus, x.len(), &self.rule)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let verdict = aggregate(limit, &profiles);
        let mut report = self.report(Mode::FStat, Some(limit), profiles, verdict);
        report.lambda = LambdaSeq::full().to_string();
        Ok(report)
    }

    /// `s_n = (1/f(λ_n)) Σ_{t ∈ I_n} f(|x_t − L|)`; holds when the tail stays below τ.
    pub fn strong_f_lambda_summable(&self, x: &SequencePrefix, limit: f64) -> Result<ConvergenceReport> {
        self.modulus.require_unbounded()?;
        let sums = self.window_sums(x, limit)?;
        Ok(self.summability_report(Mode::StrongFLambdaSummable, limit, &sums))
    }

    /// `(1/λ_n) Σ_{t ∈ I_n} |x_t − L|`.
    pub fn strong_lambda_summable(&self, x: &SequencePrefix, limit: f64) -> Result<ConvergenceReport> {
        let plain = self.with_modulus(Modulus::identity());
        let sums = plain.window_sums(x, limit)?;
        Ok(plain.summability_report(Mode::StrongLambdaSummable, limit, &sums))
    }

    fn window_sums(&self, x: &SequencePrefix, limit: f64) -> Result<Vec<f64>> {
        let mut prefix = Vec::with_capacity(x.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for v in x.values() {
            acc += self.modulus.eval((v - limit).abs())?;
            prefix.push(acc);
        }
        (1..=x.len())
            .map(|n| {
                let lambda = self.lambda.lambda_at(n)?;
                let w = crate::lambda::Window::from_lambda(n, lambda);
                Ok((prefix[w.end] - prefix[w.start - 1]) / self.modulus.raw(lambda))
            })
            .collect()
    }

    fn summability_report(&self, mode: Mode, limit: f64, sums: &[f64]) -> ConvergenceReport {
        let profile = DensityProfile::from_ratios(sums, &self.rule);
        let verdict = if profile.verdict.is_zero() {
            ConvergenceVerdict::Holds(limit)
        } else if profile.verdict.is_nonzero() || profile.tail_min >= self.rule.tau {
            ConvergenceVerdict::Fails
        } else {
            ConvergenceVerdict::Inconclusive
        };
        self.report(mode, Some(limit), vec![XiProfile { xi: None, profile }], verdict)
    }

    /// Tail maximum of `(1/λ_n) Σ_{t ≤ n} f(|x_t − L|)`, the unwindowed sum
    /// that appears in the strong-summability inclusion argument.
    pub fn prefix_sum_tail_max(&self, x: &SequencePrefix, limit: f64) -> Result<f64> {
        let mut acc = 0.0;
        let mut ratios = Vec::with_capacity(x.len());
        for (i, v) in x.values().iter().enumerate() {
            acc += self.modulus.eval((v - limit).abs())?;
            ratios.push(acc / self.lambda.lambda_at(i + 1)?);
        }
        Ok(self.rule.classify(&ratios).max)
    }

    /// Searches for an anchor `Q` whose exceedance set `{t : |x_t − x_Q| ≥ ξ}`
    /// has f_λ-density zero. Candidates are the indices whose values sit
    /// nearest the centre of the most populated width-ξ histogram bin of
    /// the tail; ties go to the smaller index.
    pub fn f_lambda_stat_cauchy(&self, x: &SequencePrefix, xi: f64, candidate_count: usize) -> Result<CauchyReport> {
        self.modulus.require_unbounded()?;
        check_xis(&[xi])?;
        if candidate_count == 0 {
            return Err(usage("candidate_count must be at least 1"));
        }
        let tail = &x.values()[x.len() / 2..];
        let (bin, _) = histogram(tail, xi, 0.0)
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("tail is nonempty");
        let centre = (bin as f64 + 0.5) * xi;

        let mut ranked: Vec<(f64, usize)> = x
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| ((v - centre).abs(), i + 1))
            .collect();
        let keep = candidate_count.min(ranked.len());
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if keep < ranked.len() {
            ranked.select_nth_unstable_by(keep - 1, by_distance);
            ranked.truncate(keep);
        }
        ranked.sort_by(by_distance);

        let mut tried: Vec<f64> = Vec::new();
        let mut best: Option<(usize, DensityProfile)> = None;
        let mut any_inconclusive = false;
        for &(_, q) in &ranked {
            let anchor = x.at(q);
            if tried.contains(&anchor) {
                continue;
            }
            tried.push(anchor);
            let profile = self.profile(&exceedance_mask(x, anchor, xi, false))?;
            if profile.verdict.is_zero() {
                return Ok(CauchyReport {
                    xi,
                    verdict: ConvergenceVerdict::Holds(anchor),
                    witness_q: Some(q),
                    candidates_tried: tried.len(),
                    profile: Some(profile),
                });
            }
            any_inconclusive |= !profile.verdict.is_nonzero();
            if best.as_ref().is_none_or(|(_, p)| profile.tail_max < p.tail_max) {
                best = Some((q, profile));
            }
        }
        Ok(CauchyReport {
            xi,
            verdict: if any_inconclusive {
                ConvergenceVerdict::Inconclusive
            } else {
                ConvergenceVerdict::Fails
            },
            witness_q: None,
            candidates_tried: tried.len(),
            profile: best.map(|(_, p)| p),
        })
    }

    /// Guesses the f_λ-statistical limit from a width-ξ histogram of the tail.
    ///
    /// Bins are tried at offsets `0` and `ξ/2`, most populated first. The
    /// first bin whose outside `{t : x_t ∉ bin}` has f_λ-density verdict zero
    /// wins, and the median of the values inside it is returned.
    pub fn estimate_stat_limit(&self, x: &SequencePrefix, xi: f64) -> Result<Option<f64>> {
        self.modulus.require_unbounded()?;
        check_xis(&[xi])?;
        if x.len() < MIN_ESTIMATE_LEN {
            return Ok(None);
        }
        let tail = &x.values()[x.len() / 2..];
        let mut bins: Vec<(usize, f64, i64)> = [0.0, 0.5 * xi]
            .into_iter()
            .flat_map(|offset| {
                histogram(tail, xi, offset)
                    .into_iter()
                    .map(move |(k, count)| (count, offset, k))
            })
            .collect();
        bins.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));

        for &(_, offset, k) in bins.iter().take(LIMIT_BIN_CANDIDATES) {
            let lo = offset + k as f64 * xi;
            let hi = lo + xi;
            let inside = |v: f64| bin_of(v, xi, offset) == k;
            let mask: Vec<bool> = std::iter::once(false)
                .chain(x.values().iter().map(|&v| !inside(v)))
                .collect();
            if self.profile(&mask)?.verdict.is_zero() {
                let mut members: Vec<f64> = x.values().iter().copied().filter(|&v| inside(v)).collect();
                members.sort_by(f64::total_cmp);
                let median = members[(members.len() - 1) / 2];
                debug_assert!(lo <= median + 1e-12 && median <= hi + 1e-12);
                return Ok(Some(median));
            }
        }
        Ok(None)
    }
}

fn bin_of(v: f64, width: f64, offset: f64) -> i64 {
    ((v - offset) / width).floor() as i64
}

fn histogram(values: &[f64], width: f64, offset: f64) -> BTreeMap<i64, usize> {
    let mut bins = BTreeMap::new();
    for &v in values {
        *bins.entry(bin_of(v, width, offset)).or_insert(0) += 1;
    }
    bins
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyReport {
    pub xi: f64,
    /// `Holds(x_Q)` for the witness anchor.
    pub verdict: ConvergenceVerdict,
    pub witness_q: Option<usize>,
    pub candidates_tried: usize,
    /// Profile of the witness, or of the best failing candidate.
    pub profile: Option<DensityProfile>,
}

/// Two `Holds` reports whose limits are further apart than twice the
/// smallest ξ contradict uniqueness of the statistical limit.
pub fn uniqueness_violation(a: &ConvergenceReport, b: &ConvergenceReport, xi_min: f64) -> bool {
    match (a.verdict.limit(), b.verdict.limit()) {
        (Some(l1), Some(l2)) => xi_min < (l1 - l2).abs() / 2.0,
        _ => false,
    }
}
