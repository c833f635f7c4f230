//! Constructive decompositions of f_λ-statistically convergent prefixes.
//!
//! Two constructions are provided. [`decompose`] splits `x = y + z` with `y`
//! convergent in the ordinary sense and `z` supported on a set of
//! f_λ-density zero, switching between stages at the thresholds `N_d`.
//! [`exceptional_set`] assembles a density-zero set `T` off which `x`
//! converges, stage by stage from the anchors `i_z`.
//!
//! All "for every n past the threshold" conditions are checked inside the
//! prefix only, and a threshold counts as found only when at least one tail
//! window of samples lies beyond it.

use serde::Serialize;

use crate::convergence::{exceedance_mask, Scheme, SequencePrefix};
use crate::density::{DensityProfile, IndexSet};
use crate::error::{usage, Error, Result};

pub const DEFAULT_STAGES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    /// `N_0 = 0 < N_1 < N_2 < …`
    pub levels: Vec<usize>,
    /// Fewer than the requested stages fit inside the prefix.
    pub truncated: bool,
}

impl Thresholds {
    /// Number of stages `d ≥ 1` that received a threshold.
    pub fn stages(&self) -> usize {
        self.levels.len() - 1
    }
}

/// Stage thresholds: `N_d` is the smallest index past which every ratio
/// `f(|{t ∈ I_n : |x_t − L| ≥ 1/d}|) / f(λ_n)` stays below `1/d`, bumped to
/// keep the list strictly increasing.
///
/// Fails with a usage error unless `x` is f_λ-statistically convergent to
/// `limit` at the given ξ list, and with [`Error::ConstructionFailed`] when
/// not even `N_1` fits inside the prefix.
pub fn thresholds(x: &SequencePrefix, limit: f64, scheme: &Scheme, xis: &[f64], d_max: usize) -> Result<Thresholds> {
    if d_max == 0 {
        return Err(usage("d_max must be at least 1"));
    }
    let report = scheme.f_lambda_stat_convergent(x, limit, xis)?;
    if !report.verdict.holds() {
        return Err(usage(format!(
            "decomposition needs an f_λ-statistically convergent prefix; verdict was {}",
            report.verdict
        )));
    }
    let horizon = x.len();
    let tail = scheme.rule.tail_len(horizon);
    let mut levels = vec![0usize];
    let mut truncated = false;
    for d in 1..=d_max {
        let level = 1.0 / d as f64;
        let ratios = scheme.ratios(&exceedance_mask(x, limit, level, false))?;
        let last_bad = ratios.iter().rposition(|&r| r >= level).map_or(0, |i| i + 1);
        let n_d = last_bad.max(levels[d - 1] + 1);
        if n_d + tail > horizon {
            truncated = true;
            break;
        }
        levels.push(n_d);
    }
    if levels.len() == 1 {
        return Err(Error::ConstructionFailed(format!(
            "no threshold N_1 fits within horizon {horizon}"
        )));
    }
    Ok(Thresholds { levels, truncated })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub y: SequencePrefix,
    pub z: SequencePrefix,
    pub thresholds: Vec<usize>,
    pub limit: f64,
    /// f_λ-density profile of `{t : z_t ≠ 0}`.
    pub support_profile: DensityProfile,
}

impl Decomposition {
    /// Writes `t,x,y,z` rows with a header line.
    pub fn write_csv(&self, x: &SequencePrefix, mut out: impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "t,x,y,z")?;
        for (i, ((xv, yv), zv)) in x.values().iter().zip(self.y.values()).zip(self.z.values()).enumerate() {
            writeln!(out, "{},{},{},{}", i + 1, xv, yv, zv)?;
        }
        Ok(())
    }

    pub fn support(&self) -> IndexSet {
        IndexSet::from_membership(&support_mask(&self.z))
    }
}

fn support_mask(z: &SequencePrefix) -> Vec<bool> {
    std::iter::once(false).chain(z.values().iter().map(|v| *v != 0.0)).collect()
}

/// Stage of index `t` under `levels`: `0` up to `N_1`, then `d` on
/// `(N_d, N_{d+1}]`, and the last stage beyond the final threshold.
fn stage_of(levels: &[usize], t: usize) -> usize {
    levels.partition_point(|&n| n < t).saturating_sub(1)
}

/// Splits `x = y + z`. On `(N_d, N_{d+1}]`, values within `1/d` of the limit
/// stay in `y`; the others move to `z` and `y` takes the limit. Indices up to
/// `N_1` stay in `y`.
pub fn decompose(x: &SequencePrefix, limit: f64, thresholds: &Thresholds, scheme: &Scheme) -> Result<Decomposition> {
    let levels = &thresholds.levels;
    if levels.first() != Some(&0) || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("thresholds must start at 0 and increase strictly"));
    }
    let mut y = Vec::with_capacity(x.len());
    let mut z = Vec::with_capacity(x.len());
    for (i, &v) in x.values().iter().enumerate() {
        let d = stage_of(levels, i + 1);
        if d == 0 || (v - limit).abs() < 1.0 / d as f64 {
            y.push(v);
            z.push(0.0);
        } else {
            y.push(limit);
            z.push(v - limit);
        }
    }
    let y = SequencePrefix::new(y)?;
    let z = SequencePrefix::new(z)?;
    let support_profile = scheme.profile(&support_mask(&z))?;
    Ok(Decomposition {
        y,
        z,
        thresholds: levels.clone(),
        limit,
        support_profile,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckItem {
    pub passed: bool,
    pub witness: Option<usize>,
    pub detail: String,
}

impl CheckItem {
    fn pass(detail: impl Into<String>) -> Self {
        Self {
            passed: true,
            witness: None,
            detail: detail.into(),
        }
    }

    fn fail(witness: Option<usize>, detail: impl Into<String>) -> Self {
        Self {
            passed: false,
            witness,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionCheck {
    pub reconstruction: CheckItem,
    pub y_converges: CheckItem,
    pub z_support_null: CheckItem,
    pub boundedness: CheckItem,
    pub max_reconstruction_error: f64,
}

impl DecompositionCheck {
    pub fn all_passed(&self) -> bool {
        self.reconstruction.passed && self.y_converges.passed && self.z_support_null.passed && self.boundedness.passed
    }
}

pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-12;

/// Checks reconstruction, convergence of `y`, density zero of the support of
/// `z`, and that a bounded `x` yields bounded parts. Failed checks are
/// itemised in the returned report.
pub fn verify_decomposition(x: &SequencePrefix, dec: &Decomposition, scheme: &Scheme) -> Result<DecompositionCheck> {
    if dec.y.len() != x.len() || dec.z.len() != x.len() {
        return Err(usage("decomposition length differs from the sequence"));
    }
    let l = dec.limit;

    let mut max_err: f64 = 0.0;
    let mut worst_t = None;
    for (i, ((xv, yv), zv)) in x.values().iter().zip(dec.y.values()).zip(dec.z.values()).enumerate() {
        let err = (xv - (yv + zv)).abs();
        if err > max_err {
            max_err = err;
            worst_t = Some(i + 1);
        }
    }
    let reconstruction = if max_err < RECONSTRUCTION_TOLERANCE {
        CheckItem::pass(format!("max |x - (y + z)| = {max_err:e}"))
    } else {
        CheckItem::fail(worst_t, format!("max |x - (y + z)| = {max_err:e}"))
    };

    // sup_{t > N_d} |y_t - L| < 1/d, via suffix maxima.
    let mut suffix = vec![0.0f64; x.len() + 2];
    for t in (1..=x.len()).rev() {
        suffix[t] = suffix[t + 1].max((dec.y.at(t) - l).abs());
    }
    let mut y_converges = CheckItem::pass("y stays within 1/d of the limit past every N_d");
    for (d, &n_d) in dec.thresholds.iter().enumerate().skip(1) {
        let bound = 1.0 / d as f64;
        if n_d < x.len() && suffix[n_d + 1] >= bound {
            let t = (n_d + 1..=x.len()).find(|&t| (dec.y.at(t) - l).abs() >= bound);
            y_converges = CheckItem::fail(t, format!("|y_t - L| >= 1/{d} past N_{d} = {n_d}"));
            break;
        }
    }

    let profile = scheme.profile(&support_mask(&dec.z))?;
    let z_support_null = if profile.verdict.is_zero() {
        CheckItem::pass("support of z has f_lambda-density zero")
    } else {
        CheckItem::fail(None, format!("support of z has density verdict {}", profile.verdict))
    };

    let boundedness = match x.bounded_hint {
        None => CheckItem::pass("x carries no bound; nothing to check"),
        Some(b) => {
            let cap = b + l.abs();
            if let Some(i) = x.values().iter().position(|v| v.abs() > b) {
                CheckItem::fail(Some(i + 1), format!("x exceeds its own bound {b}"))
            } else if let Some(i) = dec
                .y
                .values()
                .iter()
                .zip(dec.z.values())
                .position(|(yv, zv)| yv.abs() > cap || zv.abs() > cap)
            {
                CheckItem::fail(Some(i + 1), format!("y or z exceeds {cap}"))
            } else {
                CheckItem::pass(format!("y and z bounded by {cap}"))
            }
        }
    };

    Ok(DecompositionCheck {
        reconstruction,
        y_converges,
        z_support_null,
        boundedness,
        max_reconstruction_error: max_err,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExceptionalSet {
    pub t: IndexSet,
    /// `i_1 < i_2 < …`
    pub anchors: Vec<usize>,
    /// `V_z = {t : |x_t − L| > 1/z}` for `z = 1..=z_max`.
    pub stage_sets: Vec<IndexSet>,
    pub density_profile: DensityProfile,
    pub limit: f64,
}

/// Builds `T = ∪_z ([i_z, i_{z+1}) ∩ V_z)` where `i_z` is the smallest index
/// from which every ratio `f(|V_z ∩ I_n|) / f(λ_n)` is at most `1/z`. The
/// last stage runs to the end of the prefix.
pub fn exceptional_set(x: &SequencePrefix, limit: f64, scheme: &Scheme, z_max: usize) -> Result<ExceptionalSet> {
    if z_max == 0 {
        return Err(usage("z_max must be at least 1"));
    }
    scheme.modulus.require_unbounded()?;
    let horizon = x.len();
    let tail = scheme.rule.tail_len(horizon);
    let mut anchors: Vec<usize> = Vec::with_capacity(z_max);
    let mut masks = Vec::with_capacity(z_max);
    for z in 1..=z_max {
        let level = 1.0 / z as f64;
        let mask = exceedance_mask(x, limit, level, true);
        let ratios = scheme.ratios(&mask)?;
        let raw = ratios.iter().rposition(|&r| r > level).map_or(1, |i| i + 2);
        let anchor = raw.max(anchors.last().map_or(1, |a| a + 1));
        if anchor + tail > horizon + 1 {
            return Err(Error::ConstructionFailed(format!(
                "anchor i_{z} not found within horizon {horizon}"
            )));
        }
        anchors.push(anchor);
        masks.push(mask);
    }

    let mut t_mask = vec![false; horizon + 1];
    for (k, mask) in masks.iter().enumerate() {
        let end = anchors.get(k + 1).copied().unwrap_or(horizon + 1);
        t_mask[anchors[k]..end].copy_from_slice(&mask[anchors[k]..end]);
    }
    let density_profile = scheme.profile(&t_mask)?;
    Ok(ExceptionalSet {
        t: IndexSet::from_membership(&t_mask),
        anchors,
        stage_sets: masks.iter().map(|m| IndexSet::from_membership(m)).collect(),
        density_profile,
        limit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffTCheck {
    pub passed: bool,
    /// First `(t, z)` with `t ≥ i_z`, `t ∉ T` and `|x_t − L| > 1/z`.
    pub witness: Option<(usize, usize)>,
    /// `sup { |x_t − L| : t ≥ i_z, t ∉ T }` per stage.
    pub stage_sup: Vec<f64>,
}

/// Off `T`, the sequence must stay within `1/z` of the limit from `i_z` on.
pub fn verify_off_t_convergence(x: &SequencePrefix, es: &ExceptionalSet) -> Result<OffTCheck> {
    if es.t.horizon() != x.len() {
        return Err(usage("exceptional set horizon differs from the sequence length"));
    }
    let l = es.limit;
    let in_t = es.t.membership();
    let mut suffix = vec![0.0f64; x.len() + 2];
    for t in (1..=x.len()).rev() {
        let d = if in_t[t] { 0.0 } else { (x.at(t) - l).abs() };
        suffix[t] = suffix[t + 1].max(d);
    }
    let stage_sup: Vec<f64> = es.anchors.iter().map(|&i| suffix[i.min(x.len() + 1)]).collect();
    let mut witness = None;
    for (k, &i) in es.anchors.iter().enumerate() {
        let bound = 1.0 / (k + 1) as f64;
        if stage_sup[k] > bound {
            witness = (i..=x.len())
                .find(|&t| !in_t[t] && (x.at(t) - l).abs() > bound)
                .map(|t| (t, k + 1));
            break;
        }
    }
    Ok(OffTCheck {
        passed: witness.is_none(),
        witness,
        stage_sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::DEFAULT_XI;
    use crate::density::{DensityVerdict, TailRule};
    use crate::lambda::LambdaSeq;
    use crate::modulus::Modulus;

    fn is_square(t: usize) -> bool {
        let r = (t as f64).sqrt().round() as usize;
        r * r == t
    }

    fn spikes(n: usize) -> SequencePrefix {
        SequencePrefix::new((1..=n).map(|t| if is_square(t) { 1.0 } else { 0.0 }).collect())
            .unwrap()
            .with_limit(0.0)
            .with_bound(1.0)
    }

    fn id_full() -> Scheme {
        Scheme::new(Modulus::identity(), LambdaSeq::full(), TailRule::default())
    }

    #[test]
    fn stage_lookup() {
        let levels = [0, 3, 7];
        let stages: Vec<usize> = (1..=9).map(|t| stage_of(&levels, t)).collect();
        assert_eq!(stages, vec![0, 0, 0, 1, 1, 1, 1, 2, 2]);
    }

    #[test]
    fn constant_thresholds_are_minimal() {
        let x = SequencePrefix::new(vec![2.0; 1000]).unwrap();
        let th = thresholds(&x, 2.0, &id_full(), &DEFAULT_XI, 8).unwrap();
        assert_eq!(th.levels, (0..=8).collect::<Vec<_>>());
        assert!(!th.truncated);
        let dec = decompose(&x, 2.0, &th, &id_full()).unwrap();
        assert!(dec.z.values().iter().all(|&v| v == 0.0));
        assert_eq!(dec.y.values(), x.values());
        assert!(verify_decomposition(&x, &dec, &id_full()).unwrap().all_passed());
    }

    #[test]
    fn spike_thresholds_match_sweep() {
        let n = 10_000;
        let x = spikes(n);
        let th = thresholds(&x, 0.0, &id_full(), &DEFAULT_XI, 4).unwrap();
        assert!(!th.truncated);
        // oracle: recount squares up to m for every m
        let mut expected = vec![0usize];
        for d in 1..=4usize {
            let mut last_bad = 0;
            let mut count = 0usize;
            for m in 1..=n {
                if is_square(m) && 1.0 >= 1.0 / d as f64 {
                    count += 1;
                }
                if count as f64 / m as f64 >= 1.0 / d as f64 {
                    last_bad = m;
                }
            }
            expected.push(last_bad.max(expected[d - 1] + 1));
        }
        assert_eq!(th.levels, expected);
    }

    #[test]
    fn spike_decomposition_moves_late_squares_into_z() {
        let x = spikes(10_000);
        let th = thresholds(&x, 0.0, &id_full(), &DEFAULT_XI, 4).unwrap();
        let dec = decompose(&x, 0.0, &th, &id_full()).unwrap();
        for t in 1..=x.len() {
            let late = t > th.levels[1];
            let expect_z = if is_square(t) && late { 1.0 } else { 0.0 };
            assert_eq!(dec.z.at(t), expect_z, "t={t}");
            assert_eq!(dec.y.at(t) + dec.z.at(t), x.at(t));
        }
        let check = verify_decomposition(&x, &dec, &id_full()).unwrap();
        assert!(check.all_passed(), "{check:?}");
        assert_eq!(dec.support_profile.verdict, DensityVerdict::Zero);
    }

    #[test]
    fn log1p_spikes_rejected() {
        let x = spikes(10_000);
        let lg = Scheme::new(Modulus::log1p(), LambdaSeq::full(), TailRule::default());
        assert!(matches!(thresholds(&x, 0.0, &lg, &DEFAULT_XI, 4), Err(Error::Usage(_))));
    }

    #[test]
    fn adversarial_support_fails_density_check() {
        let x = SequencePrefix::new(vec![0.0; 1000]).unwrap();
        let z = SequencePrefix::new((1..=1000).map(|t| if t % 2 == 0 { 1.0 } else { 0.0 }).collect()).unwrap();
        let y = SequencePrefix::new(z.values().iter().map(|v| -v).collect()).unwrap();
        let dec = Decomposition {
            support_profile: id_full().profile(&support_mask(&z)).unwrap(),
            y,
            z,
            thresholds: vec![0, 1],
            limit: 0.0,
        };
        let check = verify_decomposition(&x, &dec, &id_full()).unwrap();
        assert!(check.reconstruction.passed);
        assert!(!check.z_support_null.passed);
        assert!(!check.y_converges.passed);
        assert!(!check.all_passed());
    }

    #[test]
    fn boundedness_check() {
        let x = spikes(1000).with_bound(0.5);
        let th = Thresholds { levels: vec![0, 1], truncated: false };
        let dec = decompose(&x, 0.0, &th, &id_full()).unwrap();
        let check = verify_decomposition(&x, &dec, &id_full()).unwrap();
        assert!(!check.boundedness.passed);
        assert_eq!(check.boundedness.witness, Some(1));
    }

    #[test]
    fn exceptional_set_constant_is_empty() {
        let x = SequencePrefix::new(vec![5.0; 1000]).unwrap();
        let es = exceptional_set(&x, 5.0, &id_full(), 8).unwrap();
        assert!(es.t.is_empty());
        assert_eq!(es.anchors, (1..=8).collect::<Vec<_>>());
        assert!(verify_off_t_convergence(&x, &es).unwrap().passed);
    }

    #[test]
    fn exceptional_set_on_spikes() {
        let x = spikes(100_000);
        let es = exceptional_set(&x, 0.0, &id_full(), 8).unwrap();
        assert!(es.anchors.windows(2).all(|w| w[0] < w[1]));
        assert!(es.t.members().iter().all(|&t| is_square(t)));
        assert!(!es.t.is_empty());
        assert_eq!(es.density_profile.verdict, DensityVerdict::Zero);
        // V_1 = {|x| > 1} is empty; from i_2 on every square is in T
        assert!(es.stage_sets[0].is_empty());
        assert!((es.anchors[1]..=x.len()).filter(|&t| is_square(t)).all(|t| es.t.contains(t)));
        // union identity, checked independently
        for t in 1..=x.len() {
            let stage = es.anchors.iter().rposition(|&a| a <= t);
            let expected = stage.is_some_and(|k| es.stage_sets[k].contains(t));
            assert_eq!(es.t.contains(t), expected);
        }
        let ok = verify_off_t_convergence(&x, &es).unwrap();
        assert!(ok.passed);
        assert!(ok.stage_sup.windows(2).all(|w| w[0] >= w[1]));

        let mut empty = es.clone();
        empty.t = IndexSet::empty(x.len());
        let bad = verify_off_t_convergence(&x, &empty).unwrap();
        assert!(!bad.passed);
        let (t, z) = bad.witness.unwrap();
        assert!(is_square(t) && z >= 2);
    }

    #[test]
    fn single_stage_exceptional_set() {
        let x = SequencePrefix::new((1..=1000).map(|t| if t % 100 == 0 { 3.0 } else { 0.0 }).collect()).unwrap();
        let es = exceptional_set(&x, 0.0, &id_full(), 1).unwrap();
        assert_eq!(es.anchors.len(), 1);
        let expected: Vec<usize> = (es.anchors[0]..=1000).filter(|t| t % 100 == 0).collect();
        assert_eq!(es.t.members(), expected.as_slice());
    }

    #[test]
    fn exceptional_set_fails_on_dense_exceedance() {
        let x = SequencePrefix::new((1..=1000).map(|t| (t % 2) as f64).collect()).unwrap();
        let err = exceptional_set(&x, 0.0, &id_full(), 4).unwrap_err();
        assert!(matches!(err, Error::ConstructionFailed(ref m) if m.contains("i_")), "{err}");
    }
}
