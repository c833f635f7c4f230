//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Reference values are recomputed here from first principles.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fstat::convergence::Scheme;
use fstat::decompose::{decompose, exceptional_set, thresholds, verify_decomposition, verify_off_t_convergence};
use fstat::density::{f_density, natural_density, windowed_counts};
use fstat::io::{default_corpus, RunConfig};
use fstat::lab::{check_c1_linear, check_c1_unique, run_suite, LabParams, Outcome, Subject};
use fstat::modulus::{default_grid, validate_modulus};
use fstat::{ConvergenceVerdict, DensityVerdict, Exec, IndexSet, LambdaSeq, Modulus, SequencePrefix, TailRule};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn is_square(t: usize) -> bool {
    let r = (t as f64).sqrt() as usize;
    (r.saturating_sub(1)..=r + 1).any(|k| k * k == t)
}

fn spikes_on_squares(n: usize) -> SequencePrefix {
    SequencePrefix::new((1..=n).map(|t| if is_square(t) { 1.0 } else { 0.0 }).collect())
        .unwrap()
        .with_bound(1.0)
}

fn modulus_axioms() -> Check {
    let grid = default_grid();
    let builtins = [
        Modulus::identity(),
        Modulus::power(0.5).unwrap(),
        Modulus::log1p(),
        Modulus::affine_log(),
        Modulus::bounded_rational(),
    ];
    for m in &builtins {
        let r = validate_modulus(m, &grid).map_err(|e| e.to_string())?;
        ensure(r.all_passed(), || format!("{m} failed an axiom: {r:?}"))?;
    }
    let square = Modulus::pluggable("square", true, |x| x * x);
    let r = validate_modulus(&square, &grid).map_err(|e| e.to_string())?;
    let w = r.axiom_subadditive.witness.ok_or("no subadditivity witness")?;
    ensure(!r.axiom_subadditive.passed, || "x^2 passed subadditivity".into())?;
    ensure(w.x == 1.0 && w.y == Some(1.0), || format!("witness ({}, {:?})", w.x, w.y))?;
    // f(2) = 4 > f(1) + f(1) = 2
    ensure(w.value == 4.0 && w.bound == 2.0, || format!("witness values {} vs {}", w.value, w.bound))?;
    Ok(format!("{} built-ins pass; x^2 witness (1, 1)", builtins.len()))
}

fn lambda_oracle(name: &str, n: usize) -> f64 {
    let nf = n as f64;
    match name {
        "full" => nf,
        "half" => 1.0 + 0.5 * (nf - 1.0),
        "sqrt" => nf.sqrt(),
        "loggrow" => 1.0 + nf.ln(),
        _ => unreachable!(),
    }
}

fn density_oracles() -> Check {
    const H: usize = 10_000;
    let seqs = [
        ("full", LambdaSeq::full()),
        ("half", LambdaSeq::affine(0.5).unwrap()),
        ("sqrt", LambdaSeq::sqrt()),
        ("loggrow", LambdaSeq::log_grow()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for k in 0..20 {
        let p: f64 = rng.random_range(0.01..0.9);
        let member: Vec<bool> = (0..=H).map(|t| t > 0 && rng.random_bool(p)).collect();
        let set = IndexSet::from_predicate(H, |t| member[t]);
        for (name, s) in &seqs {
            let counts = windowed_counts(&set, s, H).map_err(|e| e.to_string())?;
            for n in 1..=H {
                let lo = (n as f64 - lambda_oracle(name, n) + 1.0).ceil().max(1.0) as usize;
                let brute = (lo.min(n)..=n).filter(|&t| member[t]).count();
                ensure(counts[n - 1] == brute, || format!("set {k}, {name}, n={n}: {} != {brute}", counts[n - 1]))?;
            }
        }
    }

    let big = 1_000_000;
    let rule = TailRule::default();
    let evens = IndexSet::from_predicate(big, |t| t % 2 == 0);
    let nd = natural_density(&evens, big, &rule).map_err(|e| e.to_string())?;
    ensure((nd.tail_min - 0.5).abs() < 1e-3 && (nd.tail_max - 0.5).abs() < 1e-3, || {
        format!("evens tail [{}, {}]", nd.tail_min, nd.tail_max)
    })?;

    let squares = IndexSet::from_predicate(big, is_square);
    let fd = f_density(&squares, &Modulus::log1p(), big, &rule).map_err(|e| e.to_string())?;
    // |squares ≤ 10^6| = 1000, so the last ratio is ln(1001)/ln(1000001)
    let root = (1..).take_while(|k: &usize| k * k <= big).count() as f64;
    let expected = root.ln_1p() / (big as f64).ln_1p();
    ensure((fd.tail_min - 0.5).abs() < 0.02 && (fd.tail_max - 0.5).abs() < 0.02, || {
        format!("squares/log1p tail [{}, {}]", fd.tail_min, fd.tail_max)
    })?;
    let last = fd.last().unwrap_or(f64::NAN);
    ensure((last - expected).abs() < 1e-12, || format!("last ratio {last} vs {expected}"))?;
    Ok(format!("20 sets x 4 windows exact; evens {:.6}; squares/log1p {:.6}", nd.tail_max, fd.tail_max))
}

fn separation() -> Check {
    let n = 1_000_000;
    let x = spikes_on_squares(n);
    let id = Scheme::new(Modulus::identity(), LambdaSeq::full(), TailRule::default());
    let lg = Scheme::new(Modulus::log1p(), LambdaSeq::full(), TailRule::default());
    let a = id.f_lambda_stat_convergent(&x, 0.0, &[0.5]).map_err(|e| e.to_string())?;
    let b = lg.f_lambda_stat_convergent(&x, 0.0, &[0.5]).map_err(|e| e.to_string())?;
    ensure(a.verdict == ConvergenceVerdict::Holds(0.0), || format!("identity verdict {}", a.verdict))?;
    ensure(b.verdict == ConvergenceVerdict::Fails, || format!("log1p verdict {}", b.verdict))?;
    Ok(format!("identity {}, log1p {}", a.verdict, b.verdict))
}

fn decomposition_pipeline() -> Check {
    let cfg = RunConfig::default();
    let scheme = Scheme::new(Modulus::identity(), LambdaSeq::full(), cfg.rule());
    let mut covered = 0;
    for spec in default_corpus(cfg.seed) {
        let s = Subject::from_spec(&spec, cfg.horizon).map_err(|e| e.to_string())?;
        let stat = scheme.f_lambda_stat_convergent(&s.x, s.limit, &cfg.xi_list).map_err(|e| e.to_string())?;
        if !stat.verdict.holds() {
            continue;
        }
        covered += 1;
        let th = thresholds(&s.x, s.limit, &scheme, &cfg.xi_list, cfg.d_max).map_err(|e| format!("{}: {e}", s.label))?;
        let dec = decompose(&s.x, s.limit, &th, &scheme).map_err(|e| e.to_string())?;
        let check = verify_decomposition(&s.x, &dec, &scheme).map_err(|e| e.to_string())?;
        ensure(check.all_passed(), || format!("{}: {check:?}", s.label))?;
        // independent recomputation of the reconstruction error
        let err = (1..=s.x.len())
            .map(|t| (s.x.at(t) - dec.y.at(t) - dec.z.at(t)).abs())
            .fold(0.0, f64::max);
        ensure(err < 1e-12, || format!("{}: reconstruction error {err}", s.label))?;
        ensure(dec.support_profile.verdict == DensityVerdict::Zero, || {
            format!("{}: support verdict {}", s.label, dec.support_profile.verdict)
        })?;
    }
    ensure(covered >= 5, || format!("only {covered} corpus sequences hold"))?;
    Ok(format!("{covered} convergent corpus sequences decomposed and verified"))
}

fn exceptional_pipeline() -> Check {
    let n = 1_000_000;
    let x = spikes_on_squares(n);
    let scheme = Scheme::new(Modulus::identity(), LambdaSeq::full(), TailRule::default());
    let es = exceptional_set(&x, 0.0, &scheme, 8).map_err(|e| e.to_string())?;
    ensure(es.density_profile.verdict == DensityVerdict::Zero, || {
        format!("T verdict {}", es.density_profile.verdict)
    })?;
    let ok = verify_off_t_convergence(&x, &es).map_err(|e| e.to_string())?;
    ensure(ok.passed, || format!("off-T check failed at {:?}", ok.witness))?;

    let mut empty = es.clone();
    empty.t = IndexSet::empty(n);
    let bad = verify_off_t_convergence(&x, &empty).map_err(|e| e.to_string())?;
    let (t, z) = bad.witness.ok_or("empty T passed")?;
    let anchor = es.anchors[z - 1];
    ensure(t >= anchor && (x.at(t) - 0.0).abs() > 1.0 / z as f64, || format!("bogus witness ({t}, {z})"))?;
    ensure(is_square(t), || format!("witness {t} is not a square"))?;
    Ok(format!("|T| = {}, anchors {:?}; empty T fails at t={t}, z={z}", es.t.len(), es.anchors))
}

fn theorem_suite() -> Check {
    let cfg = RunConfig::default();
    let report = run_suite(&cfg, Exec::default()).map_err(|e| e.to_string())?;
    ensure(report.violated == 0, || {
        let first = report.checks.iter().find(|c| c.outcome == Outcome::Violated);
        format!("{} violated, first {:?}", report.violated, first.map(|c| (&c.theorem, &c.subject)))
    })?;
    ensure(report.uncovered.is_empty(), || format!("uncovered {:?}", report.uncovered))?;
    ensure(report.tally.len() == 15, || format!("{} theorem ids exercised", report.tally.len()))?;
    Ok(format!("{} checks at horizon {}, 0 violated, 15/15 covered", report.checks.len(), cfg.horizon))
}

fn linearity_uniqueness() -> Check {
    let cfg = RunConfig::default();
    let params = LabParams::from_config(&cfg);
    let scheme = Scheme::new(Modulus::identity(), LambdaSeq::full(), cfg.rule());
    let subjects: Vec<Subject> = default_corpus(cfg.seed)
        .iter()
        .map(|s| Subject::from_spec(s, cfg.horizon))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let convergent: Vec<&Subject> = subjects.iter().filter(|s| s.x.known_limit.is_some()).collect();
    let pairs: Vec<(usize, usize)> = (0..convergent.len())
        .flat_map(|i| (i + 1..convergent.len()).map(move |j| (i, j)))
        .take(10)
        .collect();
    ensure(pairs.len() == 10, || format!("only {} pairs", pairs.len()))?;
    for &(i, j) in &pairs {
        let (a, b) = (convergent[i], convergent[j]);
        let c = check_c1_linear(a, b, &scheme, &params).map_err(|e| e.to_string())?;
        ensure(c.outcome == Outcome::Supported, || format!("{}: {}", c.subject, c.outcome))?;
        let expect = |key: &str, l: f64| -> Result<(), String> {
            let want = ConvergenceVerdict::Holds(l).to_string();
            ensure(c.conclusion[key] == want.as_str(), || format!("{}: {key} = {} want {want}", c.subject, c.conclusion[key]))
        };
        expect("sum", a.limit + b.limit)?;
        expect("difference", a.limit - b.limit)?;
        expect("scaled", params.alpha * a.limit)?;
    }
    for s in &subjects {
        let u = check_c1_unique(s, &scheme, &params).map_err(|e| e.to_string())?;
        ensure(u.conclusion["uniqueness_flag"] == false, || format!("uniqueness fired on {}", s.label))?;
    }
    Ok(format!("10 pairs hold at arithmetic limits; uniqueness silent on {} sequences", subjects.len()))
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, r#"{"horizon": 20000, "seed": 42}"#).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("suite{k}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_fstat"))
            .args(["verify-theorems", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || format!("run {k} exited with {:?}", status.status.code()))?;
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "reports differ".into())?;
    Ok(format!("two runs, {} identical bytes", outputs[0].len()))
}

fn main() {
    type Criterion = (&'static str, fn() -> Check, Duration);
    let criteria: [Criterion; 8] = [
        ("modulus axiom suite", modulus_axioms, Duration::from_secs(1)),
        ("density oracles", density_oracles, Duration::from_secs(30)),
        ("separation witness", separation, Duration::from_secs(30)),
        ("decomposition pipeline", decomposition_pipeline, Duration::from_secs(60)),
        ("exceptional-set pipeline", exceptional_pipeline, Duration::from_secs(30)),
        ("theorem suite", theorem_suite, Duration::from_secs(300)),
        ("linearity and uniqueness", linearity_uniqueness, Duration::from_secs(60)),
        ("determinism", determinism, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= *limit {
                Ok(detail)
            } else {
                Err(format!("took {elapsed:.2?}, limit {limit:?}; {detail}"))
            }
        });
        match result {
            Ok(detail) => println!("PASS {}. {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name} ({elapsed:.2?}): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
