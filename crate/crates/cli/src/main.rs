mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use pacap_core::channel::write_atomic;
use pacap_core::checks::{run_suite, Suite, SuiteReport};
use pacap_core::experiment::{run_experiment, Scale, Setup};
use pacap_core::solvers::{trace_to_csv, EpsilonPolicy, SolverConfig};
use pacap_core::{
    emd_capacity, fgm_capacity, load_channel, random_channel, save_channel, solve_augustin, AugustinOptions, Error,
    ProbVector,
};

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_PROPERTY: u8 = 4;

#[derive(Parser)]
#[command(
    name = "pacap",
    version,
    about = "Petz-Augustin capacity of classical-quantum channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random channel of full-rank Ginibre states.
    Gen {
        #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
        d: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a capacity solver and write its trace and summary.
    Capacity {
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        /// `balanced` or a positive number (FGM only).
        #[arg(long, default_value = "balanced")]
        epsilon: String,
        #[arg(long, default_value_t = pacap_core::augustin::DEFAULT_TOL)]
        inner_tol: f64,
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, default_value = "capacity")]
        out_prefix: String,
        #[arg(long, default_value_t = 1)]
        record_every: usize,
    },
    /// Solve for the Petz-Augustin information at one input distribution.
    Augustin {
        #[arg(long)]
        alpha: f64,
        /// `uniform` or a JSON file holding an array of weights.
        #[arg(long, default_value = "uniform")]
        p: String,
        #[arg(long, default_value_t = pacap_core::augustin::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = pacap_core::augustin::DEFAULT_MAX_ITERS)]
        max_iters: usize,
        #[arg(long)]
        channel: PathBuf,
    },
    /// Reproduce a convergence figure: three methods, CSV traces, SVG plot.
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        figure: u8,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ScaleArg::Desk)]
        scale: ScaleArg,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Override the experiment horizon T.
        #[arg(long)]
        iters: Option<usize>,
    },
    /// Run property suites; exits with 4 if any property is violated.
    Check {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Trials per case; defaults depend on the suite.
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Algo {
    Fgm,
    Emd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Paper,
    Desk,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Holder,
    Contraction,
    Relsmooth,
    Oracle,
    All,
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::Parse(_) | Error::Validation(_) | Error::Io(_) => EXIT_USAGE,
            Error::Singular(_)
            | Error::EigenFailure { .. }
            | Error::InnerNotConverged { .. }
            | Error::LineSearch { .. } => EXIT_NUMERICAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn unix_time() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn write_json(path: &Path, value: &Value) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

/// Run provenance embedded in every summary file.
#[derive(Serialize)]
struct Manifest {
    version: &'static str,
    command: Vec<String>,
    config: Value,
    channel_hash: String,
    started_unix: f64,
    finished_unix: f64,
    outputs: Vec<String>,
}

impl Manifest {
    fn new(config: Value, channel_hash: String) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            command: std::env::args().collect(),
            config,
            channel_hash,
            started_unix: unix_time(),
            finished_unix: 0.0,
            outputs: Vec::new(),
        }
    }

    fn finish(mut self, outputs: &[&Path]) -> Self {
        self.finished_unix = unix_time();
        self.outputs = outputs.iter().map(|p| p.display().to_string()).collect();
        self
    }
}

fn cmd_gen(n: u64, d: u64, seed: u64, out: &Path) -> CliResult {
    let ch = random_channel(n as usize, d as usize, seed)?;
    save_channel(&ch, out)?;
    eprintln!(
        "wrote {} ({} states of dimension {}, sha256 {})",
        out.display(),
        ch.n(),
        ch.d(),
        ch.content_hash()
    );
    Ok(())
}

fn parse_epsilon(s: &str) -> CliResult<EpsilonPolicy> {
    if s == "balanced" {
        return Ok(EpsilonPolicy::Balanced);
    }
    match s.parse::<f64>() {
        Ok(e) if e > 0.0 && e.is_finite() => Ok(EpsilonPolicy::Fixed(e)),
        _ => Err(Failure::usage(format!(
            "--epsilon must be 'balanced' or a positive number, got '{s}'"
        ))),
    }
}

fn check_alpha_for(algo: Algo, alpha: f64) -> CliResult {
    let ok = match algo {
        Algo::Fgm => (0.5..1.0).contains(&alpha),
        Algo::Emd => alpha > 0.5 && alpha < 1.0,
    };
    if ok {
        return Ok(());
    }
    Err(Failure::usage(match algo {
        Algo::Fgm => format!(
            "--alpha {alpha} is outside [1/2, 1), the range where the exponentiated Rényi objective is Hölder smooth with constants ((1-α)/α, 1/α)"
        ),
        Algo::Emd => format!(
            "--alpha {alpha} is outside (1/2, 1), the range where -I_α^A is 1-smooth relative to the entropy and the inner fixed point contracts"
        ),
    }))
}

#[allow(clippy::too_many_arguments)]
fn cmd_capacity(
    algo: Algo,
    alpha: f64,
    iters: usize,
    epsilon: &str,
    inner_tol: f64,
    channel: &Path,
    out_prefix: &str,
    record_every: usize,
) -> CliResult {
    check_alpha_for(algo, alpha)?;
    let policy = parse_epsilon(epsilon)?;
    if matches!(algo, Algo::Emd) && epsilon != "balanced" {
        log::warn!("--epsilon has no effect on the EMD solver");
    }
    let ch = load_channel(channel)?;
    let mut cfg = SolverConfig::new(alpha, iters)
        .with_epsilon(policy)
        .with_inner_tol(inner_tol)
        .with_record_every(record_every);
    cfg.seed = ch.seed().unwrap_or(0);
    let manifest = Manifest::new(
        serde_json::to_value(&cfg).expect("config serializes"),
        ch.content_hash(),
    );
    let clock = Instant::now();
    let out = match algo {
        Algo::Fgm => fgm_capacity(&ch, &cfg)?,
        Algo::Emd => emd_capacity(&ch, &cfg)?,
    };
    let runtime_s = clock.elapsed().as_secs_f64();

    let csv_path = PathBuf::from(format!("{out_prefix}.trace.csv"));
    let summary_path = PathBuf::from(format!("{out_prefix}.summary.json"));
    write_atomic(&csv_path, trace_to_csv(&out.trace).as_bytes())?;
    let manifest = manifest.finish(&[&csv_path, &summary_path]);
    let summary = json!({
        "capacity": out.capacity_final,
        "best_capacity": out.capacity_best,
        "alpha": alpha,
        "algo": algo,
        "iters": iters,
        "epsilon": out.epsilon,
        "inner_tol": inner_tol,
        "seed": ch.seed(),
        "channel_hash": ch.content_hash(),
        "runtime_s": runtime_s,
        "manifest": manifest,
    });
    write_json(&summary_path, &summary)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).expect("JSON values serialize")
    );
    Ok(())
}

fn load_p(spec: &str, n: usize) -> CliResult<ProbVector> {
    if spec == "uniform" {
        return Ok(ProbVector::uniform(n));
    }
    let text =
        std::fs::read_to_string(spec).map_err(|e| Failure::usage(format!("cannot read --p file '{spec}': {e}")))?;
    let w: Vec<f64> = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("--p file '{spec}' is not a JSON array: {e}")))?;
    if w.len() != n {
        return Err(Failure::usage(format!(
            "--p has {} entries but the channel has {n} inputs",
            w.len()
        )));
    }
    if let Some(j) = w.iter().position(|x| *x <= 0.0) {
        return Err(Failure::usage(format!(
            "--p[{j}] = {} is not strictly positive; remove zero-weight letters from the channel, \
             which leaves the Augustin information unchanged",
            w[j]
        )));
    }
    Ok(ProbVector::normalized(&w)?)
}

fn cmd_augustin(alpha: f64, p: &str, tol: f64, max_iters: usize, channel: &Path) -> CliResult {
    let ch = load_channel(channel)?;
    let p = load_p(p, ch.n())?;
    let out = solve_augustin(&p, &ch, alpha, &AugustinOptions { tol, max_iters })?;
    let report = json!({
        "info": out.info,
        "grad": out.grad,
        "error_bound": out.error_bound,
        "iterations": out.iterations,
        "converged": out.converged,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("JSON values serialize")
    );
    if !out.converged {
        return Err(Failure {
            code: EXIT_NUMERICAL,
            message: format!(
                "not converged after {} iterations: certified bound {:e} > tol {tol:e}",
                out.iterations, out.error_bound
            ),
        });
    }
    Ok(())
}

fn cmd_reproduce(figure: u8, seed: u64, scale: ScaleArg, out_dir: &Path, iters: Option<usize>) -> CliResult {
    let scale = match scale {
        ScaleArg::Paper => Scale::Paper,
        ScaleArg::Desk => Scale::Desk,
    };
    let mut setup = Setup::figure(figure, scale, seed)?;
    if let Some(t) = iters {
        setup.iters = t;
    }
    std::fs::create_dir_all(out_dir).map_err(Error::from)?;
    let manifest = Manifest::new(serde_json::to_value(setup).expect("setup serializes"), String::new());
    let exp = run_experiment(&setup, true)?;

    let mut outputs = Vec::new();
    let mut series = Vec::new();
    for curve in &exp.curves {
        let path = out_dir.join(format!("fig{figure}_{}.csv", curve.method.slug()));
        let csv = trace_to_csv(&curve.trace);
        let mut lines = csv.lines();
        let mut text = format!("{},error\n", lines.next().expect("CSV has a header"));
        for (line, e) in lines.zip(&curve.errors) {
            text.push_str(&format!("{line},{e:.16e}\n"));
        }
        write_atomic(&path, text.as_bytes())?;
        outputs.push(path);
        series.push(svg::Series {
            label: curve.method.label(),
            points: curve
                .trace
                .iter()
                .zip(&curve.errors)
                .map(|(r, e)| (r.t as f64, *e))
                .collect(),
        });
    }
    let svg_path = out_dir.join(format!("fig{figure}.svg"));
    let title = format!("α = {}, n = {}, d = {}, seed {}", setup.alpha, setup.n, setup.d, seed);
    write_atomic(&svg_path, svg::loglog_plot(&title, &series).as_bytes())?;
    outputs.push(svg_path);
    let summary_path = out_dir.join(format!("fig{figure}.summary.json"));
    outputs.push(summary_path.clone());

    let mut manifest = manifest.finish(&outputs.iter().map(PathBuf::as_path).collect::<Vec<_>>());
    manifest.channel_hash = exp.channel_hash.clone();
    let methods: Vec<Value> = exp
        .curves
        .iter()
        .map(|c| {
            json!({
                "method": c.method,
                "label": c.method.label(),
                "epsilon": c.epsilon,
                "final_error": c.final_error(),
                "best_capacity": c.best,
                "runtime_s": c.runtime_s,
            })
        })
        .collect();
    let summary = json!({
        "figure": figure,
        "setup": setup,
        "reference": exp.reference,
        "reference_rule": format!(
            "max capacity estimate over FGM-1e-9 and EMD run for {}x{} iterations and FGM-Balanced",
            pacap_core::experiment::REFERENCE_FACTOR, setup.iters
        ),
        "methods": methods,
        "channel_hash": exp.channel_hash,
        "manifest": manifest,
    });
    write_json(&summary_path, &summary)?;
    for c in &exp.curves {
        eprintln!("{:>13}: final error {:.3e}", c.method.label(), c.final_error());
    }
    eprintln!("wrote {} files to {}", outputs.len(), out_dir.display());
    Ok(())
}

fn cmd_check(suite: SuiteArg, seed: u64, trials: Option<usize>) -> CliResult {
    let suites: Vec<Suite> = match suite {
        SuiteArg::Holder => vec![Suite::Holder],
        SuiteArg::Contraction => vec![Suite::Contraction],
        SuiteArg::Relsmooth => vec![Suite::Relsmooth],
        SuiteArg::Oracle => vec![Suite::Oracle],
        SuiteArg::All => Suite::ALL.to_vec(),
    };
    let reports: Vec<SuiteReport> = std::thread::scope(|s| {
        let handles: Vec<_> = suites
            .iter()
            .map(|&suite| s.spawn(move || run_suite(suite, seed, trials.unwrap_or(suite.default_trials()))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite thread panicked"))
            .collect::<Result<_, _>>()
    })?;
    for r in &reports {
        eprintln!(
            "{:<12} {}  cases={:<6} worst margin={:+.3e}",
            r.suite.name(),
            if r.passed { "PASS" } else { "FAIL" },
            r.cases,
            r.worst_margin
        );
    }
    let passed = reports.iter().all(|r| r.passed);
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({ "passed": passed, "seed": seed, "suites": reports }))
            .expect("JSON values serialize")
    );
    if passed {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_PROPERTY,
            message: "property violation; see the counterexample in the report".into(),
        })
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Gen { n, d, seed, out } => cmd_gen(n, d, seed, &out),
        Command::Capacity {
            algo,
            alpha,
            iters,
            epsilon,
            inner_tol,
            channel,
            out_prefix,
            record_every,
        } => cmd_capacity(
            algo,
            alpha,
            iters,
            &epsilon,
            inner_tol,
            &channel,
            &out_prefix,
            record_every,
        ),
        Command::Augustin {
            alpha,
            p,
            tol,
            max_iters,
            channel,
        } => cmd_augustin(alpha, &p, tol, max_iters, &channel),
        Command::Reproduce {
            figure,
            seed,
            scale,
            out_dir,
            iters,
        } => cmd_reproduce(figure, seed, scale, &out_dir, iters),
        Command::Check { suite, seed, trials } => cmd_check(suite, seed, trials),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
