//! Command-line front end: expand expressions, check congruences against a
//! filtration, run the verification suites, sweep the Euler–Fermat
//! congruences, and print Bernoulli data.
//!
//! Exit codes are a stable contract: 0 success / verdict true, 1 verdict
//! false, 2 usage or parse error, 3 internal invariant violation.

use std::io::IsTerminal;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use finv_core::arith;
use finv_core::divcong::{equiv_mod_dbar, DivcongError};
use finv_core::expr;
use finv_core::finvariant::{
    self, CheckResult, FInvariantError, TheoremItem, TheoremParams, VerificationReport,
};
use finv_core::modforms;

const EXIT_FALSE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "finv",
    version,
    about = "Exact q-expansions, divided congruences, and f-invariants of products at level 3"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonFlags {
    /// Working precision (number of q-expansion coefficients)
    #[arg(long)]
    prec: Option<usize>,
    /// Emit JSON instead of text
    #[arg(long)]
    json: bool,
    /// Congruence level; only 3 is supported (kept as an explicit knob)
    #[arg(long, default_value_t = 3)]
    level: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Print the q-expansion of an expression
    Expand {
        /// Expression such as "(E1^2-1)/12"
        expr: String,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Decide lhs ≡ rhs modulo D̄_k and print the certificate
    Check {
        lhs: String,
        rhs: String,
        /// Filtration index k
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Run a verification suite: theorem:i..vi, lemma3, remark-beta,
    /// remark-e4, generic
    Verify {
        suite: String,
        /// Upper bound for the (iii)-(v) index sweeps and remark-e4
        #[arg(long, default_value_t = 3)]
        kmax: u32,
        /// Pairs for theorem:vi / generic, e.g. 1:3,2:3,1:5
        #[arg(long, value_delimiter = ',')]
        pairs: Vec<String>,
        /// Odd factors for lemma3, e.g. 1,3,5,7
        #[arg(long, value_delimiter = ',')]
        odd: Vec<u64>,
        /// Worker threads for the sweep
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Exhaustively sweep the Euler–Fermat congruences
    Lemma2 {
        #[arg(long, default_value_t = -50, allow_hyphen_values = true)]
        d_min: i64,
        #[arg(long, default_value_t = 50, allow_hyphen_values = true)]
        d_max: i64,
        /// Primes for part (i)
        #[arg(long, value_delimiter = ',', default_values_t = [2u64, 3, 5, 7, 11])]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 6)]
        n_max: u32,
        #[arg(long, default_value_t = 4)]
        nprime_max: u32,
        /// Emit JSON instead of text
        #[arg(long)]
        json: bool,
    },
    /// Print a Bernoulli number (and j_n for even n)
    Bernoulli {
        n: usize,
        /// Emit JSON instead of text
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => e.report(),
    }
}

/// Structured failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn report(self) -> ExitCode {
        eprintln!("error: {}", self.message);
        ExitCode::from(self.code)
    }
}

impl From<FInvariantError> for Failure {
    fn from(e: FInvariantError) -> Self {
        let code = match &e {
            FInvariantError::Internal(_) | FInvariantError::Divcong(DivcongError::Internal(_)) => {
                EXIT_INTERNAL
            }
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<DivcongError> for Failure {
    fn from(e: DivcongError) -> Self {
        let code = match &e {
            DivcongError::Internal(_) => EXIT_INTERNAL,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<expr::ExprError> for Failure {
    fn from(e: expr::ExprError) -> Self {
        Failure::usage(e.to_string())
    }
}

fn check_level(level: u32) -> Result<(), Failure> {
    if level != 3 {
        return Err(Failure::usage(format!(
            "level {level} is not supported; this tool is fixed to level 3 (see README non-goals)"
        )));
    }
    Ok(())
}

fn use_color() -> bool {
    std::env::var_os("NO_COLOR").is_none() && std::io::stdout().is_terminal()
}

fn verdict_word(v: bool) -> &'static str {
    if use_color() {
        if v {
            "\x1b[32mPASS\x1b[0m"
        } else {
            "\x1b[31mFAIL\x1b[0m"
        }
    } else if v {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Expand {
            expr: input,
            common,
        } => {
            check_level(common.level)?;
            let prec = common.prec.unwrap_or(50);
            if prec == 0 {
                return Err(Failure::usage("precision must be at least 1"));
            }
            let ast = expr::parse(&input)?;
            let form = expr::evaluate(&ast)?;
            let series = form.expansion(prec);
            if common.json {
                println!("{}", serde_json::to_string(&series).expect("serializable"));
            } else {
                let rendered: Vec<String> = series.coeffs().iter().map(|c| c.to_string()).collect();
                println!("{}", rendered.join(", "));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check {
            lhs,
            rhs,
            k,
            common,
        } => {
            check_level(common.level)?;
            let prec = resolve_precision(common.prec, k)?;
            let lhs_form = expr::evaluate(&expr::parse(&lhs)?)?;
            let rhs_form = expr::evaluate(&expr::parse(&rhs)?)?;
            let cert = equiv_mod_dbar(&lhs_form, &rhs_form, k, prec)?;
            if common.json {
                let payload = json!({
                    "schema": 1,
                    "filtration": k,
                    "certificate": cert,
                });
                println!("{}", serde_json::to_string(&payload).expect("serializable"));
            } else {
                println!(
                    "{}  lhs == rhs (mod Dbar_{k}) at precision {}",
                    verdict_word(cert.verdict),
                    cert.checked_precision
                );
                if cert.verdict {
                    println!("adjustment in weight 0: {}", cert.adjustment_weight0);
                    let names: Vec<String> =
                        modforms::basis(k).iter().map(ToString::to_string).collect();
                    let coords: Vec<String> = cert
                        .adjustment_weightk
                        .coords()
                        .iter()
                        .map(ToString::to_string)
                        .collect();
                    println!(
                        "adjustment in weight {k}: [{}] over [{}]",
                        coords.join(", "),
                        names.join(", ")
                    );
                }
            }
            Ok(if cert.verdict {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FALSE)
            })
        }
        Command::Verify {
            suite,
            kmax,
            pairs,
            odd,
            jobs,
            common,
        } => {
            check_level(common.level)?;
            let pairs = parse_pairs(&pairs)?;
            let report = run_suite(&suite, kmax, pairs, odd, jobs.max(1), common.prec)?;
            let all_pass = report.all_pass();
            if common.json {
                let payload = json!({
                    "schema": 1,
                    "suite": suite,
                    "all_pass": all_pass,
                    "results": report,
                });
                println!("{}", serde_json::to_string(&payload).expect("serializable"));
            } else {
                let item_width = report
                    .results
                    .iter()
                    .map(|r| r.item.len())
                    .max()
                    .unwrap_or(8);
                let params_width = report
                    .results
                    .iter()
                    .map(|r| r.params.len())
                    .max()
                    .unwrap_or(0)
                    .max(6);
                for r in &report.results {
                    println!(
                        "{:<item_width$}  {:<params_width$}  {}  prec={} {}ms",
                        r.item,
                        r.params,
                        verdict_word(r.verdict),
                        r.precision,
                        r.wall_time_ms
                    );
                }
                println!(
                    "{} of {} checks passed",
                    report.results.iter().filter(|r| r.verdict).count(),
                    report.results.len()
                );
            }
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FALSE)
            })
        }
        Command::Lemma2 {
            d_min,
            d_max,
            primes,
            n_max,
            nprime_max,
            json,
        } => {
            let started = Instant::now();
            let mut failures = Vec::new();
            let mut checked = 0u64;
            for d in d_min..=d_max {
                for &p in &primes {
                    for n in 1..=n_max {
                        checked += 1;
                        if !arith::lemma2_part_i(d, p, n)
                            .map_err(|e| Failure::usage(e.to_string()))?
                        {
                            failures.push(format!("part i: d={d}, p={p}, n={n}"));
                        }
                    }
                }
                if d % 2 != 0 {
                    for n in 1..=n_max {
                        for np in 0..=nprime_max {
                            checked += 1;
                            if !arith::lemma2_part_ii(d, n, np)
                                .map_err(|e| Failure::usage(e.to_string()))?
                            {
                                failures.push(format!("part ii: d={d}, n={n}, n'={np}"));
                            }
                        }
                    }
                }
            }
            let all_pass = failures.is_empty();
            if json {
                let payload = json!({
                    "schema": 1,
                    "checked": checked,
                    "all_pass": all_pass,
                    "failures": failures,
                    "wall_time_ms": started.elapsed().as_millis() as u64,
                });
                println!("{}", serde_json::to_string(&payload).expect("serializable"));
            } else {
                println!(
                    "{}  {checked} congruence instances checked",
                    verdict_word(all_pass)
                );
                for f in &failures {
                    println!("counterexample: {f}");
                }
            }
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FALSE)
            })
        }
        Command::Bernoulli { n, json } => {
            let b = arith::bernoulli(n);
            let j = if n >= 2 && n % 2 == 0 {
                Some(arith::j_denominator(n as u32).map_err(|e| Failure::usage(e.to_string()))?)
            } else {
                None
            };
            if json {
                let payload = json!({
                    "schema": 1,
                    "n": n,
                    "bernoulli": format!("{}/{}", b.numer(), b.denom()),
                    "j_denominator": j.as_ref().map(ToString::to_string),
                });
                println!("{}", serde_json::to_string(&payload).expect("serializable"));
            } else {
                println!("B_{n} = {b}");
                if let Some(j) = j {
                    println!("j_{n} = {j}  (denominator of B_{n}/{n})");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Precision policy: default to the modforms policy for the filtration, and
/// refuse explicit values below the Sturm bound outright.
fn resolve_precision(explicit: Option<usize>, filtration: u32) -> Result<usize, Failure> {
    let bound = modforms::sturm_bound(filtration);
    match explicit {
        None => Ok(modforms::default_precision(filtration)),
        Some(p) if p < bound => Err(Failure::usage(format!(
            "precision {p} is below the Sturm bound {bound} for filtration {filtration}; \
             refusing to produce an unsound verdict"
        ))),
        Some(p) => Ok(p),
    }
}

fn parse_pairs(raw: &[String]) -> Result<Vec<(u32, u32)>, Failure> {
    raw.iter()
        .map(|s| {
            let (a, b) = s
                .split_once(':')
                .ok_or_else(|| Failure::usage(format!("bad pair '{s}': expected k:k'")))?;
            let a = a
                .trim()
                .parse()
                .map_err(|_| Failure::usage(format!("bad pair '{s}'")))?;
            let b = b
                .trim()
                .parse()
                .map_err(|_| Failure::usage(format!("bad pair '{s}'")))?;
            Ok((a, b))
        })
        .collect()
}

/// A unit of verification work; results are merged back in task order no
/// matter how the pool schedules them.
enum Task {
    Theorem(TheoremItem, u32, u32, usize),
    Lemma3(u64, usize),
    RemarkBeta(usize),
    RemarkE4(u32, usize),
    Generic(u32, u32, usize),
}

fn run_task(task: &Task) -> Result<Vec<CheckResult>, FInvariantError> {
    match *task {
        Task::Theorem(item, k, kp, prec) => finvariant::verify_theorem_instance(item, k, kp, prec),
        Task::Lemma3(odd, prec) => {
            let started = Instant::now();
            let verdict = finvariant::verify_lemma3(odd, prec)?;
            Ok(vec![CheckResult {
                item: "lemma3".to_owned(),
                params: format!("odd={odd}"),
                verdict,
                certificate: None,
                precision: prec,
                wall_time_ms: started.elapsed().as_millis(),
            }])
        }
        Task::RemarkBeta(prec) => Ok(finvariant::verify_remark_beta(prec)?.results),
        Task::RemarkE4(k, prec) => Ok(finvariant::verify_remark_e4_decomposition(k, prec)?.results),
        Task::Generic(k, kp, prec) => {
            Ok(finvariant::verify_generic_vanishing(k, kp, prec)?.results)
        }
    }
}

fn run_suite(
    suite: &str,
    kmax: u32,
    pairs: Vec<(u32, u32)>,
    odd: Vec<u64>,
    jobs: usize,
    explicit_prec: Option<usize>,
) -> Result<VerificationReport, Failure> {
    let params = TheoremParams {
        kmax,
        pairs: if pairs.is_empty() {
            TheoremParams::default().pairs
        } else {
            pairs.clone()
        },
    };

    let tasks: Vec<Task> = match suite {
        "lemma3" => {
            let odds = if odd.is_empty() {
                vec![1, 3, 5, 7, 9]
            } else {
                odd
            };
            let prec = explicit_prec.unwrap_or(200);
            odds.into_iter().map(|o| Task::Lemma3(o, prec)).collect()
        }
        "remark-beta" => {
            let prec = resolve_precision(explicit_prec, 8)?;
            vec![Task::RemarkBeta(prec)]
        }
        "remark-e4" => (1..=kmax.max(1))
            .map(|k| {
                Ok(Task::RemarkE4(
                    k,
                    resolve_precision(explicit_prec, 4 * k + 1)?,
                ))
            })
            .collect::<Result<_, Failure>>()?,
        "generic" => {
            let pairs = if pairs.is_empty() {
                TheoremParams::default().pairs
            } else {
                pairs
            };
            pairs
                .into_iter()
                .map(|(k, kp)| {
                    let (k, kp) = (k.min(kp), k.max(kp));
                    let prec = resolve_precision(explicit_prec, 2 * (k + kp))?;
                    Ok(Task::Generic(k, kp, prec))
                })
                .collect::<Result<_, Failure>>()?
        }
        _ => {
            let item: TheoremItem = suite
                .strip_prefix("theorem:")
                .ok_or_else(|| {
                    Failure::usage(format!(
                        "unknown suite '{suite}' (expected theorem:i..vi, lemma3, remark-beta, remark-e4, generic)"
                    ))
                })?
                .parse()
                .map_err(Failure::usage)?;
            let instances = finvariant::theorem_instances(item, &params)?;
            instances
                .into_iter()
                .map(|(k, kp)| {
                    let filtration = instance_filtration(item, k, kp);
                    let prec = resolve_precision(explicit_prec, filtration)?;
                    Ok(Task::Theorem(item, k, kp, prec))
                })
                .collect::<Result<_, Failure>>()?
        }
    };

    let results = run_pool(&tasks, jobs)?;
    let mut report = VerificationReport::default();
    for rows in results {
        report.results.extend(rows);
    }
    Ok(report)
}

fn instance_filtration(item: TheoremItem, k: u32, kp: u32) -> u32 {
    match item {
        TheoremItem::I => 4,
        TheoremItem::II => 8,
        TheoremItem::III => 4 * (k + kp) + 2,
        TheoremItem::IV => 4 * (k + kp) + 1,
        TheoremItem::V => 4 * (k + kp) + 3,
        TheoremItem::VI => 2 * (k + kp),
    }
}

type TaskSlots = Mutex<Vec<Option<Result<Vec<CheckResult>, FInvariantError>>>>;

/// Fixed-size worker pool over the task list; output order is task order,
/// independent of scheduling.
fn run_pool(tasks: &[Task], jobs: usize) -> Result<Vec<Vec<CheckResult>>, Failure> {
    if jobs <= 1 || tasks.len() <= 1 {
        return tasks
            .iter()
            .map(|t| run_task(t).map_err(Failure::from))
            .collect();
    }
    let next = AtomicUsize::new(0);
    let slots: TaskSlots = Mutex::new((0..tasks.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(tasks.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= tasks.len() {
                    break;
                }
                let outcome = run_task(&tasks[i]);
                slots.lock().expect("result slots poisoned")[i] = Some(outcome);
            });
        }
    });
    slots
        .into_inner()
        .expect("result slots poisoned")
        .into_iter()
        .map(|slot| slot.expect("every task ran").map_err(Failure::from))
        .collect()
}
