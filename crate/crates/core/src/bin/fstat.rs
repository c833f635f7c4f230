use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use fstat::convergence::{Scheme, DEFAULT_CANDIDATES, DEFAULT_XI};
use fstat::decompose::{decompose, thresholds, verify_decomposition, DEFAULT_STAGES};
use fstat::io::{load_sequence, write_sequence_csv, Format, GeneratorSpec, Meta, Report, ResultRow, RunConfig, OUT_DIR_ENV};
use fstat::lab::run_suite;
use fstat::lambda::validate_lambda;
use fstat::modulus::{default_grid, default_maddox_grid, limit_ratio_f_over_u, maddox_constant, validate_modulus};
use fstat::{ConvergenceVerdict, Error, Exec, LambdaSeq, Modulus, SequencePrefix, TailRule};

const EXIT_AXIOM: u8 = 2;
const EXIT_FAILS: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;
const EXIT_CONSTRUCTION: u8 = 5;
const EXIT_SUITE: u8 = 6;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(name = "fstat", version, about = "Moduli densities and f_lambda-statistical convergence on finite prefixes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the modulus axioms and the lambda-sequence conditions.
    Validate {
        #[arg(long)]
        modulus: Modulus,
        #[arg(long)]
        lambda: LambdaSeq,
        #[arg(long, default_value_t = 100_000)]
        horizon: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a sequence read from a file.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        limit: Option<f64>,
        #[command(flatten)]
        tail: TailArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Ratio curve of the smallest xi as `n,ratio`.
        #[arg(long)]
        profile_csv: Option<PathBuf>,
    },
    /// Split a convergent sequence into convergent and sparse parts.
    Decompose {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        limit: f64,
        #[command(flatten)]
        tail: TailArgs,
        #[arg(long, default_value_t = DEFAULT_STAGES)]
        d_max: usize,
        /// Decomposition rows as `t,x,y,z`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Threshold and verification report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the theorem suite described by a config file.
    VerifyTheorems {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
    /// Emit a generated sequence as `t,value` rows.
    Generate {
        /// Inline JSON generator spec.
        #[arg(long)]
        spec: String,
        /// Length when the spec has none.
        #[arg(long, default_value_t = 1000)]
        length: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    /// `csv` or `jsonl`; guessed from the extension when omitted.
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    modulus: Modulus,
    #[arg(long)]
    lambda: LambdaSeq,
}

impl InputArgs {
    fn load(&self) -> fstat::Result<SequencePrefix> {
        load_sequence(&self.input, self.format.unwrap_or_else(|| Format::from_path(&self.input)))
    }
}

#[derive(Args)]
struct TailArgs {
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_XI)]
    xi: Vec<f64>,
    #[arg(long, default_value_t = fstat::density::DEFAULT_TAU)]
    tau: f64,
    #[arg(long)]
    tail_window: Option<usize>,
}

impl TailArgs {
    fn rule(&self) -> fstat::Result<TailRule> {
        if !(self.tau > 0.0 && self.tau < 1.0) || self.tail_window == Some(0) {
            return Err(Error::Usage("tau must lie in (0, 1) and the tail window must be positive".into()));
        }
        Ok(TailRule {
            tau: self.tau,
            window: self.tail_window,
        })
    }

    fn xi_min(&self) -> f64 {
        self.xi.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("fstat: {e}");
            ExitCode::from(match e {
                Error::Io { .. } => EXIT_IO,
                _ => EXIT_USAGE,
            })
        }
    }
}

/// Explicit path, else `$FSTAT_OUT_DIR/<default_name>`, else standard output.
fn resolve_out(out: Option<PathBuf>, default_name: &str) -> Option<PathBuf> {
    out.or_else(|| std::env::var_os(OUT_DIR_ENV).map(|d| Path::new(&d).join(default_name)))
}

fn write_with(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> fstat::Result<()> {
    fn io_err(p: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
        move |source| Error::Io {
            path: p.to_path_buf(),
            source,
        }
    }
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(io_err(p))?);
            f(&mut w).and_then(|_| w.flush()).map_err(io_err(p))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).map_err(io_err(Path::new("<stdout>")))
        }
    }
}

fn write_json(path: Option<&Path>, value: &impl serde::Serialize) -> fstat::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_with(path, |w| writeln!(w, "{text}"))
}

fn run(cmd: Command) -> fstat::Result<u8> {
    match cmd {
        Command::Validate {
            modulus,
            lambda,
            horizon,
            out,
        } => {
            let axioms = validate_modulus(&modulus, &default_grid())?;
            let maddox = maddox_constant(&modulus, &default_maddox_grid())?;
            let growth = limit_ratio_f_over_u(&modulus, 1e6)?;
            let lambda_report = validate_lambda(&lambda, horizon)?;
            let doc = json!({
                "version": fstat::VERSION,
                "modulus": axioms,
                "maddox": maddox,
                "growth": growth,
                "lambda": lambda_report,
            });
            write_json(resolve_out(out, "validate.json").as_deref(), &doc)?;
            Ok(if axioms.all_passed() && lambda_report.all_passed() { 0 } else { EXIT_AXIOM })
        }
        Command::Analyze {
            input,
            limit,
            tail,
            out,
            profile_csv,
        } => analyze(input, limit, tail, out, profile_csv),
        Command::Decompose {
            input,
            limit,
            tail,
            d_max,
            out,
            report,
        } => {
            let x = input.load()?;
            let scheme = Scheme::new(input.modulus.clone(), input.lambda.clone(), tail.rule()?);
            let th = match thresholds(&x, limit, &scheme, &tail.xi, d_max) {
                Ok(th) => th,
                Err(e @ (Error::ConstructionFailed(_) | Error::Usage(_))) => {
                    eprintln!("fstat: {e}");
                    return Ok(EXIT_CONSTRUCTION);
                }
                Err(e) => return Err(e),
            };
            let dec = decompose(&x, limit, &th, &scheme)?;
            let check = verify_decomposition(&x, &dec, &scheme)?;
            write_with(resolve_out(out, "decomposition.csv").as_deref(), |w| dec.write_csv(&x, w))?;
            if let Some(path) = report {
                write_json(
                    Some(&path),
                    &json!({
                        "version": fstat::VERSION,
                        "thresholds": th,
                        "verification": check,
                        "support_verdict": dec.support_profile.verdict,
                    }),
                )?;
            }
            if !check.all_passed() {
                eprintln!("fstat: decomposition failed verification");
                return Ok(EXIT_CONSTRUCTION);
            }
            Ok(0)
        }
        Command::VerifyTheorems { config, out, sequential } => {
            let cfg = RunConfig::load(&config)?;
            let exec = if sequential { Exec::Sequential } else { Exec::default() };
            let suite = run_suite(&cfg, exec)?;
            let report = suite.to_report(&cfg)?;
            write_json(resolve_out(out, "suite.json").as_deref(), &report)?;
            for (id, t) in &suite.tally {
                eprintln!(
                    "{id:<12} supported {:>4}  vacuous {:>4}  hypothesis-not-met {:>4}  inconclusive {:>4}  violated {:>4}",
                    t.supported, t.supported_vacuous, t.hypothesis_not_met, t.inconclusive, t.violated
                );
            }
            if !suite.uncovered.is_empty() {
                let names: Vec<String> = suite.uncovered.iter().map(|t| t.to_string()).collect();
                eprintln!("no non-vacuous instance: {}", names.join(", "));
            }
            Ok(if suite.passed { 0 } else { EXIT_SUITE })
        }
        Command::Generate { spec, length, out } => {
            let spec = GeneratorSpec::from_json(&spec)?;
            let x = spec.generate(length)?;
            write_with(resolve_out(out, "sequence.csv").as_deref(), |w| write_sequence_csv(&x, w))?;
            Ok(0)
        }
    }
}

fn analyze(
    input: InputArgs,
    limit: Option<f64>,
    tail: TailArgs,
    out: Option<PathBuf>,
    profile_csv: Option<PathBuf>,
) -> fstat::Result<u8> {
    let x = input.load()?;
    let scheme = Scheme::new(input.modulus.clone(), input.lambda.clone(), tail.rule()?);
    let xi_min = tail.xi_min();
    let cauchy = scheme.f_lambda_stat_cauchy(&x, xi_min, DEFAULT_CANDIDATES)?;
    let (limit, source) = match limit {
        Some(l) => (Some(l), "given"),
        None => (scheme.estimate_stat_limit(&x, xi_min)?, "estimated"),
    };

    let params = |extra: &[(&str, Value)]| {
        let mut p = std::collections::BTreeMap::new();
        p.insert("input".to_string(), json!(input.input.display().to_string()));
        p.insert("modulus".to_string(), json!(input.modulus.to_string()));
        p.insert("lambda".to_string(), json!(input.lambda.to_string()));
        for (k, v) in extra {
            p.insert(k.to_string(), v.clone());
        }
        p
    };
    let mut results = Vec::new();
    let primary = match limit {
        Some(l) => {
            let stat = scheme.f_lambda_stat_convergent(&x, l, &tail.xi)?;
            let summ = scheme.strong_f_lambda_summable(&x, l)?;
            if let Some(path) = &profile_csv {
                let profile = stat.profile_for(xi_min).expect("xi list contains its minimum");
                write_with(Some(path), |w| profile.write_csv(w))?;
            }
            results.push(ResultRow::from_convergence(&stat, params(&[("xi", json!(tail.xi))])));
            results.push(ResultRow::from_convergence(&summ, params(&[])));
            stat.verdict
        }
        // A sequence that is not Cauchy has no limit to estimate.
        None if cauchy.verdict.fails() => ConvergenceVerdict::Fails,
        None => ConvergenceVerdict::Inconclusive,
    };

    let mut diagnostics = std::collections::BTreeMap::new();
    diagnostics.insert("witness_q".to_string(), json!(cauchy.witness_q));
    diagnostics.insert("candidates_tried".to_string(), json!(cauchy.candidates_tried));
    results.push(ResultRow {
        mode: "f_lambda_cauchy".into(),
        params: params(&[("xi", json!(xi_min))]),
        verdict: cauchy.verdict.to_string(),
        profiles: cauchy
            .profile
            .iter()
            .map(|p| fstat::io::ProfileRows::new(format!("xi={xi_min}"), p))
            .collect(),
        diagnostics,
    });

    let report = Report {
        meta: Meta::new(
            json!({
                "input": input.input.display().to_string(),
                "modulus": input.modulus.to_string(),
                "lambda": input.lambda.to_string(),
                "xi": tail.xi,
                "tau": tail.tau,
                "tail_window": tail.tail_window,
            }),
            None,
        ),
        results,
        summary: Some(json!({
            "verdict": primary.to_string(),
            "limit": limit,
            "limit_source": source,
            "horizon": x.len(),
        })),
    };
    write_json(resolve_out(out, "analysis.json").as_deref(), &report)?;
    Ok(match primary {
        ConvergenceVerdict::Holds(_) => 0,
        ConvergenceVerdict::Fails => EXIT_FAILS,
        ConvergenceVerdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}
