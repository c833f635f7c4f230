//! Λ-class sequences and their integer windows `I_n = [n − λ_n + 1, n]`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{domain, usage, Error, Result};
use crate::modulus::Modulus;

pub type LambdaFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// Hypothesis threshold for tail-half liminf estimates.
pub const LIMINF_FLOOR: f64 = 1e-6;
/// A tail minimum that lost more than this fraction against the preceding
/// band is still decaying and does not count as bounded away from zero.
pub const LIMINF_DECAY: f64 = 0.9;
/// Tolerance around 1 for "the limit equals one" estimates.
pub const LIMIT_ONE_TOLERANCE: f64 = 0.05;

#[derive(Clone)]
pub enum LambdaKind {
    /// `λ_n = n`
    Full,
    /// `λ_n = 1 + a (n − 1)`, `a ∈ (0, 1]`
    Affine(f64),
    /// `λ_n = √n`
    Sqrt,
    /// `λ_n = 1 + ln n`
    LogGrow,
    Pluggable { label: String, eval: LambdaFn },
}

#[derive(Clone)]
pub struct LambdaSeq {
    kind: LambdaKind,
    description: String,
}

impl LambdaSeq {
    pub fn full() -> Self {
        Self::new(LambdaKind::Full, "λ_n = n")
    }

    pub fn affine(a: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(domain(format!("affine slope must lie in (0, 1], got {a}")));
        }
        Ok(Self::new(LambdaKind::Affine(a), format!("λ_n = 1 + {a}(n − 1)")))
    }

    pub fn sqrt() -> Self {
        Self::new(LambdaKind::Sqrt, "λ_n = √n")
    }

    pub fn log_grow() -> Self {
        Self::new(LambdaKind::LogGrow, "λ_n = 1 + ln n")
    }

    /// An arbitrary positive sequence; [`validate_lambda`] tells whether it is in Λ.
    pub fn pluggable<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        let description = format!("pluggable {label}");
        Self::new(
            LambdaKind::Pluggable {
                label,
                eval: Arc::new(f),
            },
            description,
        )
    }

    fn new(kind: LambdaKind, description: impl Into<String>) -> Self {
        Self {
            kind,
            description: description.into(),
        }
    }

    pub fn kind(&self) -> &LambdaKind {
        &self.kind
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// `λ_n` for `n ≥ 1`.
    pub fn lambda_at(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(domain("λ is indexed from n = 1"));
        }
        let v = self.raw(n);
        if !(v.is_finite() && v > 0.0) {
            return Err(domain(format!("{self} produced {v} at n = {n}")));
        }
        Ok(v)
    }

    #[inline]
    pub(crate) fn raw(&self, n: usize) -> f64 {
        let nf = n as f64;
        match &self.kind {
            LambdaKind::Full => nf,
            LambdaKind::Affine(a) => 1.0 + a * (nf - 1.0),
            LambdaKind::Sqrt => nf.sqrt(),
            LambdaKind::LogGrow => 1.0 + nf.ln(),
            LambdaKind::Pluggable { eval, .. } => eval(n),
        }
    }

    /// The integer window `I_n`.
    pub fn window(&self, n: usize) -> Result<Window> {
        let lambda = self.lambda_at(n)?;
        Ok(Window::from_lambda(n, lambda))
    }
}

impl fmt::Display for LambdaSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            LambdaKind::Full => f.write_str("full"),
            LambdaKind::Affine(a) => write!(f, "affine:{a}"),
            LambdaKind::Sqrt => f.write_str("sqrt"),
            LambdaKind::LogGrow => f.write_str("loggrow"),
            LambdaKind::Pluggable { label, .. } => write!(f, "pluggable:{label}"),
        }
    }
}

impl fmt::Debug for LambdaSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LambdaSeq")
            .field("kind", &self.to_string())
            .field("description", &self.description)
            .finish()
    }
}

impl Serialize for LambdaSeq {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for LambdaSeq {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::full()),
            "sqrt" => Ok(Self::sqrt()),
            "loggrow" => Ok(Self::log_grow()),
            _ => {
                if let Some(a) = s.strip_prefix("affine:") {
                    let a: f64 = a
                        .parse()
                        .map_err(|_| usage(format!("bad affine slope in `{s}`")))?;
                    Self::affine(a).map_err(|e| usage(e.to_string()))
                } else {
                    Err(usage(format!("unknown lambda sequence `{s}`")))
                }
            }
        }
    }
}

/// Integer indices `t` with `n − λ_n + 1 ≤ t ≤ n`, start clamped into `[1, n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub n: usize,
    pub start: usize,
    pub end: usize,
    pub count: usize,
}

impl Window {
    pub(crate) fn from_lambda(n: usize, lambda: f64) -> Self {
        let lo = (n as f64 - lambda + 1.0).ceil();
        let start = if lo <= 1.0 { 1 } else { (lo as usize).min(n) };
        Window {
            n,
            start,
            end: n,
            count: n - start + 1,
        }
    }

    pub fn contains(&self, t: usize) -> bool {
        self.start <= t && t <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxiomFlag {
    pub passed: bool,
    pub first_violation: Option<usize>,
}

impl AxiomFlag {
    fn from_violation(first_violation: Option<usize>) -> Self {
        Self {
            passed: first_violation.is_none(),
            first_violation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaValidation {
    pub lambda: String,
    pub starts_at_one: AxiomFlag,
    pub nondecreasing: AxiomFlag,
    /// `λ_{n+1} ≤ λ_n + 1`; the violation index is the `n` of the failing step.
    pub slow_growth: AxiomFlag,
    /// `λ_horizon`; unboundedness is never asserted.
    pub growth_evidence: f64,
    pub horizon: usize,
}

impl LambdaValidation {
    pub fn all_passed(&self) -> bool {
        self.starts_at_one.passed && self.nondecreasing.passed && self.slow_growth.passed
    }
}

/// Checks the Λ-class axioms for every `n < horizon`.
pub fn validate_lambda(s: &LambdaSeq, horizon: usize) -> Result<LambdaValidation> {
    if horizon < 2 {
        return Err(usage("lambda validation needs horizon >= 2"));
    }
    let first = s.lambda_at(1)?;
    let mut nondecreasing = None;
    let mut slow_growth = None;
    let mut prev = first;
    for n in 1..horizon {
        let next = s.lambda_at(n + 1)?;
        let slack = 1e-12 * prev.abs().max(1.0);
        if nondecreasing.is_none() && next < prev - slack {
            nondecreasing = Some(n);
        }
        if slow_growth.is_none() && next > prev + 1.0 + slack {
            slow_growth = Some(n);
        }
        prev = next;
    }
    Ok(LambdaValidation {
        lambda: s.to_string(),
        starts_at_one: AxiomFlag::from_violation((first != 1.0).then_some(1)),
        nondecreasing: AxiomFlag::from_violation(nondecreasing),
        slow_growth: AxiomFlag::from_violation(slow_growth),
        growth_evidence: prev,
        horizon,
    })
}

/// Returns the first `n ≤ horizon` with `λ_n > μ_n`, if any.
pub fn first_exceedance(lambda: &LambdaSeq, mu: &LambdaSeq, horizon: usize) -> Result<Option<usize>> {
    for n in 1..=horizon {
        if lambda.lambda_at(n)? > mu.lambda_at(n)? {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Shortest horizon accepted by the ratio estimators.
pub const RATIO_MIN_HORIZON: usize = 1000;

fn check_ratio_horizon(horizon: usize) -> Result<()> {
    if horizon < RATIO_MIN_HORIZON {
        return Err(usage(format!("ratio estimates need horizon >= {RATIO_MIN_HORIZON}")));
    }
    Ok(())
}

fn tail_band(horizon: usize) -> std::ops::RangeInclusive<usize> {
    (horizon / 2).max(1)..=horizon
}

fn previous_band(horizon: usize) -> std::ops::Range<usize> {
    (horizon / 4).max(1)..(horizon / 2).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioLiminf {
    pub estimate: f64,
    pub previous_band_min: f64,
    pub hypothesis_met: bool,
}

/// Tail-half minimum of `a_n / b_n`.
///
/// The hypothesis `liminf a_n/b_n > 0` is taken as met when the estimate
/// exceeds [`LIMINF_FLOOR`] and has not fallen below [`LIMINF_DECAY`] times
/// the minimum over the preceding band `[h/4, h/2)`.
pub fn ratio_liminf(a: &LambdaSeq, b: &LambdaSeq, horizon: usize) -> Result<RatioLiminf> {
    check_ratio_horizon(horizon)?;
    let ratio = |n: usize| -> Result<f64> { Ok(a.lambda_at(n)? / b.lambda_at(n)?) };
    let estimate = band_min(tail_band(horizon), ratio)?;
    let previous_band_min = band_min(previous_band(horizon), ratio)?;
    Ok(RatioLiminf {
        estimate,
        previous_band_min,
        hypothesis_met: estimate > LIMINF_FLOOR && estimate >= LIMINF_DECAY * previous_band_min,
    })
}

/// Whether every tail-half value of `a_n / b_n` lies within
/// [`LIMIT_ONE_TOLERANCE`] of 1.
pub fn ratio_limit_is_one(a: &LambdaSeq, b: &LambdaSeq, horizon: usize) -> Result<bool> {
    check_ratio_horizon(horizon)?;
    for n in tail_band(horizon) {
        let r = a.lambda_at(n)? / b.lambda_at(n)?;
        if (r - 1.0).abs() > LIMIT_ONE_TOLERANCE {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NOverFLambda {
    pub liminf_estimate: f64,
    pub lim_is_one: bool,
}

/// Tail-half statistics of `n / f(λ_n)`.
pub fn ratio_n_over_f_lambda(m: &Modulus, s: &LambdaSeq, horizon: usize) -> Result<NOverFLambda> {
    m.require_unbounded()?;
    check_ratio_horizon(horizon)?;
    let mut min = f64::INFINITY;
    let mut all_near_one = true;
    for n in tail_band(horizon) {
        let r = n as f64 / m.eval(s.lambda_at(n)?)?;
        min = min.min(r);
        all_near_one &= (r - 1.0).abs() <= LIMIT_ONE_TOLERANCE;
    }
    Ok(NOverFLambda {
        liminf_estimate: min,
        lim_is_one: all_near_one,
    })
}

fn band_min<I, F>(band: I, mut f: F) -> Result<f64>
where
    I: IntoIterator<Item = usize>,
    F: FnMut(usize) -> Result<f64>,
{
    let mut min = f64::INFINITY;
    for n in band {
        min = min.min(f(n)?);
    }
    Ok(min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_examples() {
        assert_eq!(LambdaSeq::full().lambda_at(7).unwrap(), 7.0);
        assert_eq!(LambdaSeq::sqrt().lambda_at(100).unwrap(), 10.0);
        assert_eq!(LambdaSeq::affine(0.5).unwrap().lambda_at(1).unwrap(), 1.0);
        assert_eq!(LambdaSeq::log_grow().lambda_at(1).unwrap(), 1.0);
        assert!(matches!(LambdaSeq::full().lambda_at(0), Err(Error::Domain(_))));
    }

    #[test]
    fn window_examples() {
        let w = LambdaSeq::full().window(10).unwrap();
        assert_eq!((w.start, w.end, w.count), (1, 10, 10));
        let w = LambdaSeq::sqrt().window(100).unwrap();
        assert_eq!((w.start, w.end, w.count), (91, 100, 10));
        for s in [LambdaSeq::full(), LambdaSeq::sqrt(), LambdaSeq::log_grow()] {
            let w = s.window(1).unwrap();
            assert_eq!((w.start, w.end, w.count), (1, 1, 1));
        }
    }

    #[test]
    fn window_counts_match_enumeration() {
        let seqs = [
            LambdaSeq::full(),
            LambdaSeq::affine(0.5).unwrap(),
            LambdaSeq::affine(0.3).unwrap(),
            LambdaSeq::sqrt(),
            LambdaSeq::log_grow(),
        ];
        for s in &seqs {
            for n in 1..=10_000usize {
                let lo = n as f64 - s.lambda_at(n).unwrap() + 1.0;
                let expected = (1..=n).filter(|&t| t as f64 >= lo).count();
                assert_eq!(s.window(n).unwrap().count, expected, "{s} n={n}");
            }
        }
    }

    #[test]
    fn builtins_validate() {
        for s in [
            LambdaSeq::full(),
            LambdaSeq::sqrt(),
            LambdaSeq::affine(0.5).unwrap(),
            LambdaSeq::log_grow(),
        ] {
            let r = validate_lambda(&s, 100_000).unwrap();
            assert!(r.all_passed(), "{r:?}");
        }
        let r = validate_lambda(&LambdaSeq::full(), 100_000).unwrap();
        assert_eq!(r.growth_evidence, 1e5);
    }

    #[test]
    fn doubling_sequence_violates_increment_bound() {
        let s = LambdaSeq::pluggable("2n", |n| 2.0 * n as f64);
        let r = validate_lambda(&s, 100).unwrap();
        assert_eq!(r.slow_growth.first_violation, Some(1));
        assert!(!r.starts_at_one.passed);
        assert!(r.nondecreasing.passed);
        assert!(validate_lambda(&s, 1).is_err());
    }

    #[test]
    fn liminf_examples() {
        let h = 100_000;
        let r = ratio_liminf(&LambdaSeq::affine(0.5).unwrap(), &LambdaSeq::full(), h).unwrap();
        // (1 + (n-1)/2)/n = 1/2 + 1/(2n) decreases, so the tail minimum sits at n = h
        assert_eq!(r.estimate, (1.0 + (h as f64 - 1.0) * 0.5) / h as f64);
        assert!(r.hypothesis_met);

        let r = ratio_liminf(&LambdaSeq::full(), &LambdaSeq::full(), h).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert!(r.hypothesis_met);

        let r = ratio_liminf(&LambdaSeq::sqrt(), &LambdaSeq::full(), h).unwrap();
        assert!((r.estimate - 1.0 / (h as f64).sqrt()).abs() < 1e-12);
        assert!(!r.hypothesis_met);

        assert!(ratio_liminf(&LambdaSeq::full(), &LambdaSeq::full(), 10).is_err());
    }

    #[test]
    fn n_over_f_lambda_examples() {
        let h = 100_000;
        let r = ratio_n_over_f_lambda(&Modulus::identity(), &LambdaSeq::full(), h).unwrap();
        assert_eq!(r.liminf_estimate, 1.0);
        assert!(r.lim_is_one);

        let r = ratio_n_over_f_lambda(&Modulus::log1p(), &LambdaSeq::full(), h).unwrap();
        let oracle = (h / 2) as f64 / ((h / 2) as f64).ln_1p();
        assert!((r.liminf_estimate - oracle).abs() < 1e-9 * oracle);
        assert!(r.liminf_estimate > 1.0);
        assert!(!r.lim_is_one);

        let r = ratio_n_over_f_lambda(&Modulus::identity(), &LambdaSeq::sqrt(), h).unwrap();
        assert!((r.liminf_estimate - ((h / 2) as f64).sqrt()).abs() < 1e-9);
        assert!(!r.lim_is_one);

        let r = ratio_n_over_f_lambda(&Modulus::identity(), &LambdaSeq::affine(0.5).unwrap(), h).unwrap();
        assert!(!r.lim_is_one);

        assert!(matches!(
            ratio_n_over_f_lambda(&Modulus::bounded_rational(), &LambdaSeq::full(), h),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn limit_one() {
        let h = 10_000;
        assert!(ratio_limit_is_one(&LambdaSeq::full(), &LambdaSeq::full(), h).unwrap());
        assert!(!ratio_limit_is_one(&LambdaSeq::full(), &LambdaSeq::affine(0.5).unwrap(), h).unwrap());
    }

    #[test]
    fn exceedance_witness() {
        let h = 1000;
        assert_eq!(first_exceedance(&LambdaSeq::sqrt(), &LambdaSeq::full(), h).unwrap(), None);
        assert_eq!(first_exceedance(&LambdaSeq::full(), &LambdaSeq::sqrt(), h).unwrap(), Some(2));
    }

    #[test]
    fn names() {
        for name in ["full", "affine:0.5", "sqrt", "loggrow"] {
            assert_eq!(name.parse::<LambdaSeq>().unwrap().to_string(), name);
        }
        assert!("affine:0".parse::<LambdaSeq>().is_err());
        assert!("cubic".parse::<LambdaSeq>().is_err());
    }
}
