use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::{implication, LabParams, Outcome, Recipe, Subject, TheoremCheck, TheoremId, Truth};
use crate::convergence::{uniqueness_violation, ConvergenceReport, Scheme};
use crate::decompose::{decompose, exceptional_set, thresholds, verify_decomposition, verify_off_t_convergence};
use crate::error::{usage, Error, Result};
use crate::io::{profile_rows, ProfileRows};
use crate::lambda::{
    first_exceedance, ratio_limit_is_one, ratio_liminf, ratio_n_over_f_lambda, LambdaSeq, LIMINF_FLOOR,
    RATIO_MIN_HORIZON,
};
use crate::modulus::{default_maddox_grid, limit_ratio_f_over_u, maddox_constant, Modulus};

const GROWTH_U_MAX: f64 = 1e6;

fn entries<const N: usize>(items: [(&str, Value); N]) -> BTreeMap<String, Value> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn verdict(r: &ConvergenceReport) -> Value {
    Value::String(r.verdict.to_string())
}

fn truth(r: &ConvergenceReport) -> Truth {
    (&r.verdict).into()
}

/// Common inputs of a family of checks.
struct Frame<'a> {
    subject: &'a Subject,
    scheme: &'a Scheme,
    mu: Option<&'a LambdaSeq>,
    partner: Option<&'a Subject>,
    params: &'a LabParams,
}

impl<'a> Frame<'a> {
    fn new(subject: &'a Subject, scheme: &'a Scheme, params: &'a LabParams) -> Self {
        Self {
            subject,
            scheme,
            mu: None,
            partner: None,
            params,
        }
    }

    fn recipe(&self, theorem: TheoremId) -> Recipe {
        Recipe {
            theorem,
            sequence: self.subject.spec.clone(),
            limit: self.subject.limit,
            partner: self.partner.and_then(|p| p.spec.clone()),
            partner_limit: self.partner.map(|p| p.limit),
            modulus: self.scheme.modulus.to_string(),
            lambda: self.scheme.lambda.to_string(),
            mu: self.mu.map(|m| m.to_string()),
            horizon: self.subject.x.len(),
            params: self.params.clone(),
        }
    }

    fn check(
        &self,
        theorem: TheoremId,
        hypothesis_met: bool,
        hypothesis: BTreeMap<String, Value>,
        conclusion: BTreeMap<String, Value>,
        outcome: Outcome,
        evidence: &[&ConvergenceReport],
    ) -> TheoremCheck {
        let profiles: Vec<ProfileRows> = if outcome == Outcome::Violated {
            evidence.iter().flat_map(|r| labelled(r)).collect()
        } else {
            Vec::new()
        };
        TheoremCheck {
            theorem,
            subject: match self.partner {
                Some(p) => format!("{} & {}", self.subject.label, p.label),
                None => self.subject.label.clone(),
            },
            hypothesis_met,
            hypothesis,
            conclusion,
            outcome,
            recipe: self.recipe(theorem),
            profiles,
        }
    }
}

fn labelled(r: &ConvergenceReport) -> Vec<ProfileRows> {
    profile_rows(r)
        .into_iter()
        .map(|mut p| {
            p.label = format!("{} {} {}", r.mode, r.lambda, p.label);
            p
        })
        .collect()
}

/// Strong λ-summability against f_λ-statistical convergence, both ways.
///
/// Hypotheses: a Maddox constant exists and `lim f(u)/u > 0`. The converse
/// additionally needs a bounded sequence.
pub fn check_t1(s: &Subject, scheme: &Scheme, p: &LabParams) -> Result<[TheoremCheck; 2]> {
    let m = &scheme.modulus;
    let maddox = maddox_constant(m, &default_maddox_grid())?;
    let growth = limit_ratio_f_over_u(m, GROWTH_U_MAX)?;
    let hyp = maddox.constant.is_some() && growth.positive;
    let summ = scheme.strong_lambda_summable(&s.x, s.limit)?;
    let stat = scheme.f_lambda_stat_convergent(&s.x, s.limit, &p.xis)?;
    let variant = scheme.prefix_sum_tail_max(&s.x, s.limit)?;

    let hypothesis = entries([
        ("maddox_constant", json!(maddox.constant)),
        ("f_over_u", json!(growth.estimate)),
        ("f_over_u_positive", json!(growth.positive)),
    ]);
    let conclusion = entries([
        ("strong_lambda_summable", verdict(&summ)),
        ("f_lambda_stat", verdict(&stat)),
        ("prefix_sum_variant_tail_max", json!(variant)),
    ]);
    let fr = Frame::new(s, scheme, p);
    let forward = fr.check(
        TheoremId::T1,
        hyp,
        hypothesis.clone(),
        conclusion.clone(),
        implication(hyp, truth(&summ), truth(&stat)),
        &[&summ, &stat],
    );

    let bounded = s.x.bounded_hint.is_some();
    let mut hypothesis = hypothesis;
    hypothesis.insert("bounded".into(), json!(bounded));
    let converse = fr.check(
        TheoremId::T1Converse,
        hyp && bounded,
        hypothesis,
        conclusion,
        implication(hyp && bounded, truth(&stat), truth(&summ)),
        &[&stat, &summ],
    );
    Ok([forward, converse])
}

fn n_over_f_lambda(scheme: &Scheme, horizon: usize) -> Result<Option<crate::lambda::NOverFLambda>> {
    if horizon < RATIO_MIN_HORIZON {
        return Ok(None);
    }
    ratio_n_over_f_lambda(&scheme.modulus, &scheme.lambda, horizon).map(Some)
}

/// f_λ-statistical convergence implies f-statistical convergence when
/// `liminf n / f(λ_n) > 0`.
pub fn check_t7(s: &Subject, scheme: &Scheme, p: &LabParams) -> Result<TheoremCheck> {
    let est = n_over_f_lambda(scheme, s.x.len())?;
    let hyp = est.is_some_and(|e| e.liminf_estimate > LIMINF_FLOOR);
    let stat = scheme.f_lambda_stat_convergent(&s.x, s.limit, &p.xis)?;
    let fstat = scheme.f_stat_convergent(&s.x, s.limit, &p.xis)?;
    Ok(Frame::new(s, scheme, p).check(
        TheoremId::T7,
        hyp,
        entries([("n_over_f_lambda_liminf", json!(est.map(|e| e.liminf_estimate)))]),
        entries([("f_lambda_stat", verdict(&stat)), ("f_stat", verdict(&fstat))]),
        implication(hyp, truth(&stat), truth(&fstat)),
        &[&stat, &fstat],
    ))
}

/// f-statistical convergence implies f_λ-statistical convergence when
/// `n / f(λ_n) → 1`.
pub fn check_t8(s: &Subject, scheme: &Scheme, p: &LabParams) -> Result<TheoremCheck> {
    let est = n_over_f_lambda(scheme, s.x.len())?;
    let hyp = est.is_some_and(|e| e.lim_is_one);
    let stat = scheme.f_lambda_stat_convergent(&s.x, s.limit, &p.xis)?;
    let fstat = scheme.f_stat_convergent(&s.x, s.limit, &p.xis)?;
    Ok(Frame::new(s, scheme, p).check(
        TheoremId::T8,
        hyp,
        entries([
            ("n_over_f_lambda_liminf", json!(est.map(|e| e.liminf_estimate))),
            ("n_over_f_lambda_lim_is_one", json!(est.map(|e| e.lim_is_one))),
        ]),
        entries([("f_lambda_stat", verdict(&stat)), ("f_stat", verdict(&fstat))]),
        implication(hyp, truth(&fstat), truth(&stat)),
        &[&fstat, &stat],
    ))
}

/// Hypothesis estimates shared by the λ-versus-μ checks. Fails with a
/// usage error when `λ_n > μ_n` somewhere on the horizon.
struct MuHypotheses {
    liminf: Option<crate::lambda::RatioLiminf>,
    lim_is_one: bool,
}

impl MuHypotheses {
    fn estimate(lambda: &LambdaSeq, mu: &LambdaSeq, horizon: usize) -> Result<Self> {
        if let Some(n) = first_exceedance(lambda, mu, horizon)? {
            return Err(usage(format!("lambda {lambda} exceeds mu {mu} at n = {n}")));
        }
        if horizon < RATIO_MIN_HORIZON {
            return Ok(Self {
                liminf: None,
                lim_is_one: false,
            });
        }
        Ok(Self {
            liminf: Some(ratio_liminf(lambda, mu, horizon)?),
            lim_is_one: ratio_limit_is_one(mu, lambda, horizon)?,
        })
    }

    fn liminf_met(&self) -> bool {
        self.liminf.is_some_and(|r| r.hypothesis_met)
    }

    fn map(&self) -> BTreeMap<String, Value> {
        entries([
            ("lambda_over_mu_liminf", json!(self.liminf.map(|r| r.estimate))),
            ("lambda_over_mu_liminf_met", json!(self.liminf_met())),
            ("mu_over_lambda_lim_is_one", json!(self.lim_is_one)),
        ])
    }
}

/// Inclusions between the λ and μ statistical classes for `λ ≤ μ`.
pub fn check_t9(s: &Subject, scheme: &Scheme, mu: &LambdaSeq, p: &LabParams) -> Result<[TheoremCheck; 2]> {
    let hyps = MuHypotheses::estimate(&scheme.lambda, mu, s.x.len())?;
    let under_mu = scheme.with_lambda(mu.clone());
    let stat_mu = under_mu.f_lambda_stat_convergent(&s.x, s.limit, &p.xis)?;
    let stat_lambda = scheme.f_lambda_stat_convergent(&s.x, s.limit, &p.xis)?;
    let conclusion = entries([("f_lambda_stat_lambda", verdict(&stat_lambda)), ("f_lambda_stat_mu", verdict(&stat_mu))]);
    let mut fr = Frame::new(s, scheme, p);
    fr.mu = Some(mu);
    let part1 = fr.check(
        TheoremId::T9Part1,
        hyps.liminf_met(),
        hyps.map(),
        conclusion.clone(),
        implication(hyps.liminf_met(), truth(&stat_mu), truth(&stat_lambda)),
        &[&stat_mu, &stat_lambda],
    );
    let part2 = fr.check(
        TheoremId::T9Part2,
        hyps.lim_is_one,
        hyps.map(),
        conclusion,
        implication(hyps.lim_is_one, truth(&stat_lambda), truth(&stat_mu)),
        &[&stat_lambda, &stat_mu],
    );
    Ok([part1, part2])
}

/// Strong f_μ-summability implies f_λ-statistical convergence and strong
/// f_λ-summability, for `λ ≤ μ` with `liminf λ_n/μ_n > 0`.
pub fn check_t10_c4(s: &Subject, scheme: &Scheme, mu: &LambdaSeq, p: &LabParams) -> Result<[TheoremCheck; 2]> {
    let hyps = MuHypotheses::estimate(&scheme.lambda, mu, s.x.len())?;
    let hyp = hyps.liminf_met();
    let summ_mu = scheme.with_lambda(mu.clone()).strong_f_lambda_summable(&s.x, s.limit)?;
    let summ_lambda = scheme.strong_f_lambda_summable(&s.x, s.limit)?;
    let stat_lambda = scheme.f_lambda_stat_convergent(&s.x, s.limit, &p.xis)?;
    let conclusion = entries([
        ("strong_f_summable_mu", verdict(&summ_mu)),
        ("strong_f_summable_lambda", verdict(&summ_lambda)),
        ("f_lambda_stat_lambda", verdict(&stat_lambda)),
    ]);
    let mut fr = Frame::new(s, scheme, p);
    fr.mu = Some(mu);
    let t10 = fr.check(
        TheoremId::T10,
        hyp,
        hyps.map(),
        conclusion.clone(),
        implication(hyp, truth(&summ_mu), truth(&stat_lambda)),
        &[&summ_mu, &stat_lambda],
    );
    let c4 = fr.check(
        TheoremId::C4,
        hyp,
        hyps.map(),
        conclusion,
        implication(hyp, truth(&summ_mu), truth(&summ_lambda)),
        &[&summ_mu, &summ_lambda],
    );
    Ok([t10, c4])
}

/// Convergence implies the Cauchy property at twice the smallest ξ, and a
/// Cauchy sequence converges to the estimated limit at the doubled ξ list.
pub fn check_cauchy_equiv(s: &Subject, scheme: &Scheme, p: &LabParams) -> Result<[TheoremCheck; 2]> {
    let xi = p.xi_min();
    let stat = scheme.f_lambda_stat_convergent(&s.x, s.limit, &p.xis)?;
    let cauchy_wide = scheme.f_lambda_stat_cauchy(&s.x, 2.0 * xi, p.candidate_count)?;
    let fr = Frame::new(s, scheme, p);
    let forward = fr.check(
        TheoremId::D1C2,
        true,
        BTreeMap::new(),
        entries([
            ("f_lambda_stat", verdict(&stat)),
            ("cauchy", json!(cauchy_wide.verdict.to_string())),
            ("cauchy_xi", json!(2.0 * xi)),
            ("cauchy_witness", json!(cauchy_wide.witness_q)),
        ]),
        implication(true, truth(&stat), (&cauchy_wide.verdict).into()),
        &[&stat],
    );

    let cauchy = scheme.f_lambda_stat_cauchy(&s.x, xi, p.candidate_count)?;
    let estimate = scheme.estimate_stat_limit(&s.x, xi)?;
    let at_estimate = match estimate {
        Some(e) => Some(scheme.f_lambda_stat_convergent(&s.x, e, &p.scaled_xis(2.0))?),
        None => None,
    };
    let consequent = at_estimate.as_ref().map_or(Truth::Unknown, truth);
    let evidence: Vec<&ConvergenceReport> = at_estimate.iter().collect();
    let backward = fr.check(
        TheoremId::T5,
        true,
        BTreeMap::new(),
        entries([
            ("cauchy", json!(cauchy.verdict.to_string())),
            ("cauchy_witness", json!(cauchy.witness_q)),
            ("estimated_limit", json!(estimate)),
            ("f_lambda_stat_at_estimate", json!(at_estimate.as_ref().map(|r| r.verdict.to_string()))),
        ]),
        implication(true, (&cauchy.verdict).into(), consequent),
        &evidence,
    );
    Ok([forward, backward])
}

/// No second limit far from `L` may also hold.
pub fn check_c1_unique(s: &Subject, scheme: &Scheme, p: &LabParams) -> Result<TheoremCheck> {
    let xi = p.xi_min();
    let stat = scheme.f_lambda_stat_convergent(&s.x, s.limit, &p.xis)?;
    let mut rivals = Vec::new();
    let mut fired = false;
    if stat.verdict.holds() {
        for alt in [s.limit - 1.0, s.limit - 3.0 * xi, s.limit + 3.0 * xi, s.limit + 1.0] {
            let r = scheme.f_lambda_stat_convergent(&s.x, alt, &p.xis)?;
            fired |= uniqueness_violation(&stat, &r, xi);
            rivals.push(json!({"limit": alt, "verdict": r.verdict.to_string()}));
        }
    }
    Ok(Frame::new(s, scheme, p).check(
        TheoremId::C1Unique,
        true,
        BTreeMap::new(),
        entries([
            ("f_lambda_stat", verdict(&stat)),
            ("rivals", Value::Array(rivals)),
            ("uniqueness_flag", json!(fired)),
        ]),
        implication(true, truth(&stat), (!fired).into()),
        &[&stat],
    ))
}

/// Sums, differences and multiples of convergent sequences converge to the
/// matching combination of limits. The combined sequences are tested at ξ
/// scaled by the triangle inequality: doubled for sums and differences, and
/// by `|α|` for multiples.
pub fn check_c1_linear(a: &Subject, b: &Subject, scheme: &Scheme, p: &LabParams) -> Result<TheoremCheck> {
    let sa = scheme.f_lambda_stat_convergent(&a.x, a.limit, &p.xis)?;
    let sb = scheme.f_lambda_stat_convergent(&b.x, b.limit, &p.xis)?;
    let antecedent = truth(&sa).and(truth(&sb));
    let doubled = p.scaled_xis(2.0);
    let sum = scheme.f_lambda_stat_convergent(&a.x.sum(&b.x), a.limit + b.limit, &doubled)?;
    let diff = scheme.f_lambda_stat_convergent(&a.x.difference(&b.x), a.limit - b.limit, &doubled)?;
    let alpha = p.alpha;
    let scale_xis = if alpha == 0.0 { p.xis.clone() } else { p.scaled_xis(alpha.abs()) };
    let scaled = scheme.f_lambda_stat_convergent(&a.x.scaled(alpha), alpha * a.limit, &scale_xis)?;
    let consequent = truth(&sum).and(truth(&diff)).and(truth(&scaled));

    let mut fr = Frame::new(a, scheme, p);
    fr.partner = Some(b);
    Ok(fr.check(
        TheoremId::C1Linear,
        true,
        entries([("alpha", json!(alpha))]),
        entries([
            ("first", verdict(&sa)),
            ("second", verdict(&sb)),
            ("sum", verdict(&sum)),
            ("difference", verdict(&diff)),
            ("scaled", verdict(&scaled)),
        ]),
        implication(true, antecedent, consequent),
        &[&sum, &diff, &scaled],
    ))
}

/// A convergent sequence splits into a convergent part plus a part
/// supported on a density-zero set. A threshold that does not fit in the
/// prefix makes the check inconclusive rather than violated.
pub fn check_t2(s: &Subject, scheme: &Scheme, p: &LabParams) -> Result<TheoremCheck> {
    let stat = scheme.f_lambda_stat_convergent(&s.x, s.limit, &p.xis)?;
    let mut conclusion = entries([("f_lambda_stat", verdict(&stat))]);
    let consequent = if stat.verdict.holds() {
        match thresholds(&s.x, s.limit, scheme, &p.xis, p.d_max) {
            Err(Error::ConstructionFailed(msg)) => {
                conclusion.insert("construction".into(), json!(msg));
                Truth::Unknown
            }
            Err(e) => return Err(e),
            Ok(th) => {
                let dec = decompose(&s.x, s.limit, &th, scheme)?;
                let check = verify_decomposition(&s.x, &dec, scheme)?;
                conclusion.insert("thresholds".into(), json!(th.levels));
                conclusion.insert("truncated".into(), json!(th.truncated));
                conclusion.insert("verification".into(), serde_json::to_value(&check)?);
                check.all_passed().into()
            }
        }
    } else {
        Truth::Unknown
    };
    Ok(Frame::new(s, scheme, p).check(
        TheoremId::T2,
        true,
        BTreeMap::new(),
        conclusion,
        implication(true, truth(&stat), consequent),
        &[&stat],
    ))
}

/// A convergent sequence converges off a density-zero exceptional set.
pub fn check_t3(s: &Subject, scheme: &Scheme, p: &LabParams) -> Result<TheoremCheck> {
    let stat = scheme.f_lambda_stat_convergent(&s.x, s.limit, &p.xis)?;
    let mut conclusion = entries([("f_lambda_stat", verdict(&stat))]);
    let consequent = if stat.verdict.holds() {
        match exceptional_set(&s.x, s.limit, scheme, p.z_max) {
            Err(Error::ConstructionFailed(msg)) => {
                conclusion.insert("construction".into(), json!(msg));
                Truth::Unknown
            }
            Err(e) => return Err(e),
            Ok(es) => {
                let off = verify_off_t_convergence(&s.x, &es)?;
                let null = es.density_profile.verdict.is_zero();
                conclusion.insert("anchors".into(), json!(es.anchors));
                conclusion.insert("exceptional_size".into(), json!(es.t.len()));
                conclusion.insert("exceptional_density".into(), json!(es.density_profile.verdict.to_string()));
                conclusion.insert("off_t_witness".into(), json!(off.witness));
                (null && off.passed).into()
            }
        }
    } else {
        Truth::Unknown
    };
    Ok(Frame::new(s, scheme, p).check(
        TheoremId::T3,
        true,
        BTreeMap::new(),
        conclusion,
        implication(true, truth(&stat), consequent),
        &[&stat],
    ))
}

/// Limits found under different moduli of the built-in library agree to
/// within twice the smallest ξ. Vacuous unless at least two moduli hold.
pub fn check_library_agreement(s: &Subject, lambda: &LambdaSeq, p: &LabParams) -> Result<TheoremCheck> {
    let xi = p.xi_min();
    let mut holding = Vec::new();
    let mut rows = Vec::new();
    let mut evidence = Vec::new();
    for m in Modulus::library() {
        let scheme = Scheme::new(m, lambda.clone(), p.rule());
        let estimate = scheme.estimate_stat_limit(&s.x, xi)?;
        let verdict = match estimate {
            Some(e) => {
                let r = scheme.f_lambda_stat_convergent(&s.x, e, &p.xis)?;
                if let Some(l) = r.verdict.limit() {
                    holding.push(l);
                }
                let v = r.verdict.to_string();
                evidence.push(r);
                v
            }
            None => "no_estimate".to_string(),
        };
        rows.push(json!({"modulus": scheme.modulus.to_string(), "estimate": estimate, "verdict": verdict}));
    }
    let spread = holding.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - holding.iter().copied().fold(f64::INFINITY, f64::min);
    let agree = holding.len() < 2 || spread <= 2.0 * xi;
    let scheme = Scheme::new(Modulus::identity(), lambda.clone(), p.rule());
    let refs: Vec<&ConvergenceReport> = evidence.iter().collect();
    let mut check = Frame::new(s, &scheme, p).check(
        TheoremId::T6,
        true,
        BTreeMap::new(),
        entries([
            ("library", Value::Array(rows)),
            ("holding", json!(holding.len())),
            ("spread", json!(if holding.len() >= 2 { Some(spread) } else { None })),
        ]),
        implication(true, (holding.len() >= 2).into(), agree.into()),
        &refs,
    );
    check.recipe.modulus = "library".into();
    Ok(check)
}
