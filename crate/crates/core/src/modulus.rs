//! Modulus functions and sampled checks of their axioms.
//!
//! A modulus is a map `f: [0, ∞) → [0, ∞)` that vanishes only at zero, is
//! subadditive, nondecreasing and right-continuous at zero. Axioms are
//! checked on finite grids; every failure carries a witness that can be
//! reproduced by evaluating the modulus again.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{domain, usage, Error, Result};

/// Externally supplied evaluator for [`ModulusKind::Pluggable`].
pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Relative slack for subadditivity and monotonicity comparisons.
pub const AXIOM_TOLERANCE: f64 = 1e-12;
/// Values below this are treated as zero when probing right continuity.
pub const CONTINUITY_FLOOR: f64 = 1e-9;
/// Deepest decade probed by the right-continuity ladder (`10^-k`).
pub const CONTINUITY_DEPTH: i32 = 300;
/// A Maddox ratio below this floor means the condition fails on the grid.
pub const MADDOX_FLOOR: f64 = 1e-9;
/// Extrapolated edge limits below this also count as a failed Maddox condition.
pub const MADDOX_EDGE_FLOOR: f64 = 1e-3;
/// Floor for `f(u)/u` to be considered bounded away from zero.
pub const GROWTH_FLOOR: f64 = 1e-9;

#[derive(Clone)]
pub enum ModulusKind {
    /// `f(x) = x`
    Identity,
    /// `f(x) = x^p`, `p ∈ (0, 1]`
    Power(f64),
    /// `f(x) = ln(1 + x)`
    Log1p,
    /// `f(x) = x + ln(1 + x)`
    AffineLog,
    /// `f(x) = x / (1 + x)`
    BoundedRational,
    Pluggable { label: String, eval: Evaluator },
}

/// A modulus function together with its boundedness claim.
#[derive(Clone)]
pub struct Modulus {
    kind: ModulusKind,
    claimed_unbounded: bool,
}

impl Modulus {
    pub fn identity() -> Self {
        Self {
            kind: ModulusKind::Identity,
            claimed_unbounded: true,
        }
    }

    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(domain(format!("power exponent must lie in (0, 1], got {p}")));
        }
        Ok(Self {
            kind: ModulusKind::Power(p),
            claimed_unbounded: true,
        })
    }

    pub fn log1p() -> Self {
        Self {
            kind: ModulusKind::Log1p,
            claimed_unbounded: true,
        }
    }

    pub fn affine_log() -> Self {
        Self {
            kind: ModulusKind::AffineLog,
            claimed_unbounded: true,
        }
    }

    pub fn bounded_rational() -> Self {
        Self {
            kind: ModulusKind::BoundedRational,
            claimed_unbounded: false,
        }
    }

    /// Wraps an arbitrary evaluator. Nothing about it is assumed; run
    /// [`validate_modulus`] to find out whether it is a modulus at all.
    pub fn pluggable<F>(label: impl Into<String>, claimed_unbounded: bool, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: ModulusKind::Pluggable {
                label: label.into(),
                eval: Arc::new(f),
            },
            claimed_unbounded,
        }
    }

    /// The unbounded members of the built-in library.
    pub fn library() -> Vec<Modulus> {
        vec![
            Self::identity(),
            Self::power(0.5).expect("valid exponent"),
            Self::log1p(),
            Self::affine_log(),
        ]
    }

    pub fn kind(&self) -> &ModulusKind {
        &self.kind
    }

    pub fn is_unbounded(&self) -> bool {
        self.claimed_unbounded
    }

    /// Fails with a usage error when the modulus is flagged as bounded.
    pub fn require_unbounded(&self) -> Result<()> {
        if self.claimed_unbounded {
            Ok(())
        } else {
            Err(usage(format!(
                "modulus `{self}` is bounded; moduli densities are undefined"
            )))
        }
    }

    /// Evaluates `f(x)` for finite `x ≥ 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x.is_finite() && x >= 0.0) {
            return Err(domain(format!("modulus argument must be finite and >= 0, got {x}")));
        }
        let y = self.raw(x);
        if !(y.is_finite() && y >= 0.0) {
            return Err(domain(format!("{self} produced {y} at x = {x}")));
        }
        Ok(y)
    }

    /// Evaluation without domain checks, for counts and other values known
    /// to be valid arguments.
    #[inline]
    pub(crate) fn raw(&self, x: f64) -> f64 {
        if x == 0.0 {
            // f(0) = 0 exactly for every built-in kind.
            if let ModulusKind::Pluggable { eval, .. } = &self.kind {
                return eval(0.0);
            }
            return 0.0;
        }
        match &self.kind {
            ModulusKind::Identity => x,
            ModulusKind::Power(p) => x.powf(*p),
            ModulusKind::Log1p => x.ln_1p(),
            ModulusKind::AffineLog => x + x.ln_1p(),
            ModulusKind::BoundedRational => x / (1.0 + x),
            ModulusKind::Pluggable { eval, .. } => eval(x),
        }
    }

    #[inline]
    pub(crate) fn of_count(&self, k: usize) -> f64 {
        self.raw(k as f64)
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ModulusKind::Identity => f.write_str("identity"),
            ModulusKind::Power(p) => write!(f, "power:{p}"),
            ModulusKind::Log1p => f.write_str("log1p"),
            ModulusKind::AffineLog => f.write_str("affinelog"),
            ModulusKind::BoundedRational => f.write_str("bounded-rational"),
            ModulusKind::Pluggable { label, .. } => write!(f, "pluggable:{label}"),
        }
    }
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Modulus")
            .field("kind", &self.to_string())
            .field("claimed_unbounded", &self.claimed_unbounded)
            .finish()
    }
}

impl Serialize for Modulus {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for Modulus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::identity()),
            "log1p" => Ok(Self::log1p()),
            "affinelog" => Ok(Self::affine_log()),
            "bounded-rational" => Ok(Self::bounded_rational()),
            _ => {
                if let Some(p) = s.strip_prefix("power:") {
                    let p: f64 = p
                        .parse()
                        .map_err(|_| usage(format!("bad power exponent in `{s}`")))?;
                    Self::power(p).map_err(|e| usage(e.to_string()))
                } else {
                    Err(usage(format!("unknown modulus `{s}`")))
                }
            }
        }
    }
}

/// The grid used by [`validate_modulus`] when none is supplied:
/// `{0}` plus 49 geometric points from `1e-6` to `1e6` (four per decade).
pub fn default_grid() -> Vec<f64> {
    std::iter::once(0.0).chain(geometric_ladder(-6, 6, 4)).collect()
}

/// Positive grid for [`maddox_constant`]: the default ladder without zero.
pub fn default_maddox_grid() -> Vec<f64> {
    geometric_ladder(-6, 6, 4).collect()
}

/// `10^e` for `e` from `lo` to `hi` in steps of `1/per_decade`; integral
/// exponents are computed with `powi` so decades land exactly.
pub fn geometric_ladder(lo: i32, hi: i32, per_decade: i32) -> impl Iterator<Item = f64> {
    let steps = (hi - lo) * per_decade;
    (0..=steps).map(move |i| {
        if i % per_decade == 0 {
            10f64.powi(lo + i / per_decade)
        } else {
            10f64.powf(lo as f64 + i as f64 / per_decade as f64)
        }
    })
}

/// A reproducible axiom violation: re-evaluating the modulus at `x` (and `y`)
/// yields `value`, which should not exceed `bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub x: f64,
    pub y: Option<f64>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub passed: bool,
    pub witness: Option<Witness>,
}

impl AxiomCheck {
    fn from_witness(witness: Option<Witness>) -> Self {
        Self {
            passed: witness.is_none(),
            witness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub points: usize,
    pub min_positive: f64,
    pub max: f64,
    pub continuity_depth: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusValidationReport {
    pub modulus: String,
    pub axiom_zero: AxiomCheck,
    pub axiom_subadditive: AxiomCheck,
    pub axiom_increasing: AxiomCheck,
    pub axiom_right_continuous: AxiomCheck,
    pub unbounded_evidence: f64,
    pub grid_spec: GridSpec,
}

impl ModulusValidationReport {
    pub fn all_passed(&self) -> bool {
        self.axiom_zero.passed
            && self.axiom_subadditive.passed
            && self.axiom_increasing.passed
            && self.axiom_right_continuous.passed
    }
}

/// Checks the four modulus axioms on `grid`.
///
/// The grid must be sorted, contain `0`, and its positive points must span at
/// least six orders of magnitude. Subadditivity is tested over every pair,
/// monotonicity over adjacent points and right continuity on the ladder
/// `10^-k`, `k = 1..=300`, which must decrease and drop below `1e-9`.
///
/// Among subadditivity violations the reported witness is the pair with the
/// largest ratio `f(x+y) / (f(x)+f(y))`; ties go to the pair closest to unit
/// scale.
pub fn validate_modulus(m: &Modulus, grid: &[f64]) -> Result<ModulusValidationReport> {
    if grid.is_empty() {
        return Err(usage("validation grid is empty"));
    }
    if grid.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(usage("validation grid must hold finite nonnegative values"));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(usage("validation grid must be sorted"));
    }
    if grid[0] != 0.0 {
        return Err(usage("validation grid must contain 0"));
    }
    let min_positive = grid.iter().copied().find(|x| *x > 0.0).unwrap_or(0.0);
    let max = *grid.last().expect("nonempty");
    if min_positive == 0.0 || max / min_positive < 1e6 {
        return Err(usage(
            "validation grid must span at least six orders of magnitude",
        ));
    }

    let values: Vec<f64> = grid.iter().map(|&x| m.raw(x)).collect();

    // Axiom 1: f(x) = 0 iff x = 0 (and f is nonnegative).
    let zero_witness = grid.iter().zip(&values).find_map(|(&x, &v)| {
        let bad = if x == 0.0 { v != 0.0 } else { v.is_nan() || v <= 0.0 || !v.is_finite() };
        bad.then_some(Witness {
            x,
            y: None,
            value: v,
            bound: 0.0,
        })
    });

    // Axiom 2: subadditivity over all pairs.
    let mut worst: Option<(f64, f64, Witness)> = None;
    for i in 0..grid.len() {
        for j in i..grid.len() {
            let (x, y) = (grid[i], grid[j]);
            let (fx, fy) = (values[i], values[j]);
            let lhs = m.raw(x + y);
            let rhs = fx + fy;
            if lhs <= rhs + AXIOM_TOLERANCE * (1.0 + rhs) {
                continue;
            }
            let severity = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
            let scale = unit_distance(x) + unit_distance(y);
            let witness = Witness {
                x,
                y: Some(y),
                value: lhs,
                bound: rhs,
            };
            let replace = match &worst {
                None => true,
                Some((s, d, _)) => {
                    if approx_tie(severity, *s) {
                        scale < *d
                    } else {
                        severity > *s
                    }
                }
            };
            if replace {
                worst = Some((severity, scale, witness));
            }
        }
    }
    let subadditive_witness = worst.map(|(_, _, w)| w);

    // Axiom 3: monotone on adjacent grid points; worst drop wins.
    let increasing_witness = grid
        .windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| v[0] > v[1] + AXIOM_TOLERANCE * (1.0 + v[0].abs()))
        .max_by(|a, b| (a.1[0] - a.1[1]).total_cmp(&(b.1[0] - b.1[1])))
        .map(|(g, v)| Witness {
            x: g[0],
            y: Some(g[1]),
            value: v[0],
            bound: v[1],
        });

    // Axiom 4: right continuity at 0 along 10^-k.
    let mut continuity_witness = None;
    let mut previous = f64::INFINITY;
    let mut reached_floor = false;
    for k in 1..=CONTINUITY_DEPTH {
        let x = 10f64.powi(-k);
        let v = m.raw(x);
        if !v.is_finite() || v > previous + AXIOM_TOLERANCE * (1.0 + previous.abs()) {
            continuity_witness = Some(Witness {
                x,
                y: None,
                value: v,
                bound: previous,
            });
            break;
        }
        previous = v;
        if v < CONTINUITY_FLOOR {
            reached_floor = true;
            break;
        }
    }
    if continuity_witness.is_none() && !reached_floor {
        continuity_witness = Some(Witness {
            x: 10f64.powi(-CONTINUITY_DEPTH),
            y: None,
            value: previous,
            bound: CONTINUITY_FLOOR,
        });
    }

    Ok(ModulusValidationReport {
        modulus: m.to_string(),
        axiom_zero: AxiomCheck::from_witness(zero_witness),
        axiom_subadditive: AxiomCheck::from_witness(subadditive_witness),
        axiom_increasing: AxiomCheck::from_witness(increasing_witness),
        axiom_right_continuous: AxiomCheck::from_witness(continuity_witness),
        unbounded_evidence: m.raw(max),
        grid_spec: GridSpec {
            points: grid.len(),
            min_positive,
            max,
            continuity_depth: CONTINUITY_DEPTH,
        },
    })
}

fn unit_distance(x: f64) -> f64 {
    if x > 0.0 {
        x.ln().abs()
    } else {
        f64::INFINITY
    }
}

fn approx_tie(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// Result of [`maddox_constant`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaddoxEstimate {
    /// Largest `c` with `f(xy) ≥ c f(x) f(y)` on the grid, absent when the
    /// condition fails empirically.
    pub constant: Option<f64>,
    pub min_ratio: f64,
    pub witness: (f64, f64),
    /// Limit of the diagonal ratio `f(x²)/f(x)²` extrapolated linearly in
    /// `1/|ln x|` at the grid edges; the smaller of the two edges.
    pub edge_limit: Option<f64>,
}

/// Estimates the Maddox constant `inf f(xy) / (f(x) f(y))` over grid pairs.
///
/// The condition is declared failed when the grid minimum falls below
/// [`MADDOX_FLOOR`] or when the diagonal ratio, extrapolated towards either
/// grid edge in the variable `1/|ln x|`, heads below [`MADDOX_EDGE_FLOOR`].
/// The second rule catches moduli such as `ln(1+x)` whose ratio decays only
/// like `2/ln x`, far too slowly to cross any fixed floor in `f64` range.
pub fn maddox_constant(m: &Modulus, grid: &[f64]) -> Result<MaddoxEstimate> {
    if grid.is_empty() {
        return Err(usage("Maddox grid is empty"));
    }
    if grid.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(domain("Maddox grid must hold finite positive values"));
    }
    let values = grid
        .iter()
        .map(|&x| m.eval(x))
        .collect::<Result<Vec<_>>>()?;

    let mut min_ratio = f64::INFINITY;
    let mut witness = (grid[0], grid[0]);
    for i in 0..grid.len() {
        for j in i..grid.len() {
            let denom = values[i] * values[j];
            if denom <= 0.0 {
                continue;
            }
            let ratio = m.eval(grid[i] * grid[j])? / denom;
            if ratio < min_ratio {
                min_ratio = ratio;
                witness = (grid[i], grid[j]);
            }
        }
    }

    let mut sorted: Vec<(f64, f64)> = grid.iter().copied().zip(values.iter().copied()).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    sorted.dedup_by(|a, b| a.0 == b.0);
    let diagonal = |(x, fx): (f64, f64)| -> Option<(f64, f64)> {
        let fxx = m.raw(x * x);
        (fx > 0.0 && fxx.is_finite()).then(|| (1.0 / x.ln().abs(), fxx / (fx * fx)))
    };
    let top: Vec<(f64, f64)> = sorted
        .iter()
        .rev()
        .filter(|(x, _)| x.ln() >= 1.0)
        .take(5)
        .filter_map(|&p| diagonal(p))
        .collect();
    let bottom: Vec<(f64, f64)> = sorted
        .iter()
        .filter(|(x, _)| x.ln() <= -1.0)
        .take(5)
        .filter_map(|&p| diagonal(p))
        .collect();
    let edge_limit = [linear_intercept(&top), linear_intercept(&bottom)]
        .into_iter()
        .flatten()
        .reduce(f64::min);

    let fails = min_ratio < MADDOX_FLOOR || edge_limit.is_some_and(|e| e < MADDOX_EDGE_FLOOR);
    Ok(MaddoxEstimate {
        constant: (!fails).then_some(min_ratio),
        min_ratio,
        witness,
        edge_limit,
    })
}

/// Least-squares intercept of `y` against `x`; needs three distinct points.
fn linear_intercept(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(my - (sxy / sxx) * mx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthEstimate {
    pub positive: bool,
    pub estimate: f64,
    pub ladder: Vec<(f64, f64)>,
}

/// Estimates whether `lim f(u)/u > 0` from a decade ladder `1, 10, …, u_max`.
///
/// The limit counts as positive when the last value exceeds
/// [`GROWTH_FLOOR`] and the last two rungs agree to within 1%.
pub fn limit_ratio_f_over_u(m: &Modulus, u_max: f64) -> Result<GrowthEstimate> {
    if !(u_max.is_finite() && u_max >= 1e6) {
        return Err(usage(format!("u_max must be at least 1e6, got {u_max}")));
    }
    let mut ladder = Vec::new();
    let mut k = 0;
    loop {
        let u = 10f64.powi(k);
        if u > u_max {
            break;
        }
        ladder.push((u, m.eval(u)? / u));
        k += 1;
    }
    if ladder.last().map(|p| p.0) != Some(u_max) {
        ladder.push((u_max, m.eval(u_max)? / u_max));
    }
    let n = ladder.len();
    let last = ladder[n - 1].1;
    let prev = ladder[n - 2].1;
    let stable = (last - prev).abs() <= 0.01 * last.abs().max(prev.abs());
    Ok(GrowthEstimate {
        positive: last > GROWTH_FLOOR && stable,
        estimate: last,
        ladder,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtins() -> Vec<Modulus> {
        vec![
            Modulus::identity(),
            Modulus::power(0.5).unwrap(),
            Modulus::log1p(),
            Modulus::affine_log(),
            Modulus::bounded_rational(),
        ]
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Modulus::identity().eval(0.0).unwrap(), 0.0);
        assert_eq!(Modulus::power(0.5).unwrap().eval(4.0).unwrap(), 2.0);
        let e = std::f64::consts::E;
        assert!((Modulus::log1p().eval(e - 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_bad_arguments() {
        let m = Modulus::identity();
        assert!(matches!(m.eval(-1.0), Err(Error::Domain(_))));
        assert!(matches!(m.eval(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(m.eval(f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_maps_to_zero() {
        for m in builtins() {
            assert_eq!(m.eval(0.0).unwrap(), 0.0, "{m}");
        }
    }

    #[test]
    fn default_grid_shape() {
        let g = default_grid();
        assert_eq!(g.len(), 50);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[1], 1e-6);
        assert_eq!(g[25], 1.0);
        assert_eq!(g[49], 1e6);
    }

    #[test]
    fn builtins_pass_axioms() {
        for m in builtins() {
            let r = validate_modulus(&m, &default_grid()).unwrap();
            assert!(r.all_passed(), "{m}: {r:?}");
        }
    }

    #[test]
    fn bounded_rational_evidence_below_one() {
        let r = validate_modulus(&Modulus::bounded_rational(), &default_grid()).unwrap();
        assert!(r.unbounded_evidence < 1.0);
        assert!(r.unbounded_evidence > 0.999);
    }

    #[test]
    fn square_fails_subadditivity_at_unit() {
        let sq = Modulus::pluggable("square", true, |x| x * x);
        let r = validate_modulus(&sq, &default_grid()).unwrap();
        assert!(!r.axiom_subadditive.passed);
        let w = r.axiom_subadditive.witness.unwrap();
        assert_eq!((w.x, w.y), (1.0, Some(1.0)));
        assert_eq!(w.value, 4.0);
        assert_eq!(w.bound, 2.0);
        // reproducible
        assert_eq!(sq.eval(w.x + w.y.unwrap()).unwrap(), w.value);
        assert!(r.axiom_increasing.passed);
    }

    #[test]
    fn decreasing_map_fails_monotonicity() {
        let m = Modulus::pluggable("hump", true, |x| if x == 0.0 { 0.0 } else { 1.0 / (1.0 + x) + x.min(1e-3) });
        let r = validate_modulus(&m, &default_grid()).unwrap();
        assert!(!r.axiom_increasing.passed);
        let w = r.axiom_increasing.witness.unwrap();
        assert!(w.value > w.bound);
    }

    #[test]
    fn jump_at_zero_fails_continuity_and_zero_axiom() {
        let m = Modulus::pluggable("jump", true, |x| if x == 0.0 { 0.0 } else { 1.0 + x });
        let r = validate_modulus(&m, &default_grid()).unwrap();
        assert!(!r.axiom_right_continuous.passed);
        assert!(r.axiom_zero.passed);
        let off = Modulus::pluggable("offset", true, |x| x + 1.0);
        let r = validate_modulus(&off, &default_grid()).unwrap();
        assert!(!r.axiom_zero.passed);
        assert_eq!(r.axiom_zero.witness.unwrap().x, 0.0);
    }

    #[test]
    fn small_powers_are_right_continuous() {
        let m = Modulus::power(0.1).unwrap();
        let r = validate_modulus(&m, &default_grid()).unwrap();
        assert!(r.axiom_right_continuous.passed);
    }

    #[test]
    fn grid_preconditions() {
        let m = Modulus::identity();
        assert!(matches!(validate_modulus(&m, &[]), Err(Error::Usage(_))));
        assert!(matches!(validate_modulus(&m, &[0.0, 1.0, 10.0]), Err(Error::Usage(_))));
        assert!(matches!(validate_modulus(&m, &[1e-6, 1.0, 1e6]), Err(Error::Usage(_))));
        assert!(matches!(validate_modulus(&m, &[0.0, 1e6, 1e-6]), Err(Error::Usage(_))));
    }

    #[test]
    fn maddox_exact_for_identity_and_powers() {
        let g = default_maddox_grid();
        let id = maddox_constant(&Modulus::identity(), &g).unwrap();
        assert_eq!(id.constant, Some(1.0));
        for p in [0.25, 0.5, 0.9] {
            let est = maddox_constant(&Modulus::power(p).unwrap(), &g).unwrap();
            assert!((est.constant.unwrap() - 1.0).abs() < 1e-9, "p={p}: {est:?}");
        }
    }

    #[test]
    fn maddox_absent_for_log1p() {
        let mut g = default_maddox_grid();
        g.push(10f64.exp());
        let est = maddox_constant(&Modulus::log1p(), &g).unwrap();
        assert_eq!(est.constant, None);
        // the grid minimum itself is far from the floor; the edge trend decides
        assert!(est.min_ratio > MADDOX_FLOOR);
        assert!(est.edge_limit.unwrap() < MADDOX_EDGE_FLOOR);
        let x = 10f64.exp();
        let diag = (x * x).ln_1p() / x.ln_1p().powi(2);
        assert!((diag - 0.2).abs() < 1e-3);
    }

    #[test]
    fn maddox_present_for_affine_log() {
        let est = maddox_constant(&Modulus::affine_log(), &default_maddox_grid()).unwrap();
        let c = est.constant.expect("AffineLog satisfies the Maddox condition");
        assert!(c > 0.49 && c <= 1.0, "{est:?}");
    }

    #[test]
    fn maddox_rejects_nonpositive_grid() {
        assert!(maddox_constant(&Modulus::identity(), &[0.0, 1.0]).is_err());
    }

    #[test]
    fn growth_examples() {
        let id = limit_ratio_f_over_u(&Modulus::identity(), 1e8).unwrap();
        assert!(id.positive);
        assert_eq!(id.estimate, 1.0);

        let lg = limit_ratio_f_over_u(&Modulus::log1p(), 1e8).unwrap();
        assert!(!lg.positive);
        assert!(lg.estimate < 1e-6);
        assert_eq!(lg.estimate, (1e8f64).ln_1p() / 1e8);

        let al = limit_ratio_f_over_u(&Modulus::affine_log(), 1e8).unwrap();
        assert!(al.positive);
        assert!((al.estimate - 1.0).abs() < 1e-6);

        assert!(!limit_ratio_f_over_u(&Modulus::power(0.5).unwrap(), 1e8).unwrap().positive);
        assert!(limit_ratio_f_over_u(&Modulus::identity(), 1e3).is_err());
    }

    #[test]
    fn names_round_trip() {
        for name in ["identity", "power:0.5", "log1p", "affinelog", "bounded-rational"] {
            let m: Modulus = name.parse().unwrap();
            assert_eq!(m.to_string(), name);
        }
        assert!("power:2".parse::<Modulus>().is_err());
        assert!("cube".parse::<Modulus>().is_err());
        assert!(!"bounded-rational".parse::<Modulus>().unwrap().is_unbounded());
    }
}
