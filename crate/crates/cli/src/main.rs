mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{error::ErrorKind, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use smoothopt::csp::{arithmetize, CnfFormula, CspInstance};
use smoothopt::estimator::Mode;
use smoothopt::generate::{answer_to_text, generate, parse_answer, Family, GenSpec, Instance};
use smoothopt::oracle::{
    brute_force_kdense, brute_force_max, check_rounding_lemma, check_sampling_lemma, LemmaCheckParams,
    MAX_ENUMERATION_VARS,
};
use smoothopt::poly::{coeff_to_f64, from_graph_maxcut, SmoothPolynomial};
use smoothopt::scheme::{approximate_kcsp, approximate_kdense, approximate_maxcut, maximize_smooth, RunReport, SchemeConfig};
use smoothopt::{Assignment, Error, Graph, Result};

use report::{Document, Format, InstanceInfo};

const USAGE_EXIT: u8 = 64;

#[derive(Parser)]
#[command(name = "smoothopt", version, about = "Approximation schemes for dense smooth polynomial programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate Max-Cut on a DIMACS graph.
    Maxcut(RunArgs),
    /// Maximize a polynomial given in the `p poly` dump format.
    Smooth(RunArgs),
    /// Approximate Max-k-CSP on a DIMACS CNF or a CSP text file.
    Csp(RunArgs),
    /// Approximate k-Densest Subgraph on a DIMACS graph.
    Kdense(KDenseArgs),
    /// Generate a random instance.
    Gen(GenArgs),
    /// Solve an instance exactly by enumeration.
    Oracle(OracleArgs),
    /// Monte-Carlo checks of the sampling and rounding concentration bounds.
    Lemmas(LemmaArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Planted,
    Random,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma_scale: f64,
    /// Fixed sample size instead of the formula.
    #[arg(long)]
    sample_size: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
    mode: ModeArg,
    /// Number of assignments in random mode.
    #[arg(long, default_value_t = 64)]
    count: usize,
    /// Answer file with the planted assignment (`v 1 -2 … 0`). Defaults to
    /// `<FILE>.answer`, then to the exact optimum for small instances.
    #[arg(long, value_name = "ANSWER")]
    planted: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-7)]
    lp_tol: f64,
    /// Largest distinct sample exhaustive mode accepts.
    #[arg(long, default_value_t = 22)]
    cap: usize,
    /// Also solve exactly and report the ratio.
    #[arg(long)]
    oracle: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value_t = 10)]
    widen_retries: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct KDenseArgs {
    #[arg(long)]
    k: usize,
    /// Largest C(n, k) solved by enumeration.
    #[arg(long, default_value_t = 5_000_000)]
    kdense_budget: u64,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct GenArgs {
    /// graph-density, planted-cut, random-ksat or planted-ksat.
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Clause width for the k-SAT families.
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instance file; planted families also get `<FILE>.answer`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Maxcut,
    Smooth,
    Csp,
    Kdense,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Subset size for kdense.
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Sampling,
    Rounding,
    Both,
}

#[derive(Args)]
struct LemmaArgs {
    #[arg(long, value_enum, default_value_t = Which::Both)]
    which: Which,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    q: u32,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha1: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha2: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => USAGE_EXIT,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("smoothopt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Maxcut(args) => run_maxcut(&args),
        Command::Smooth(args) => run_smooth(&args),
        Command::Csp(args) => run_csp(&args),
        Command::Kdense(args) => run_kdense(&args),
        Command::Gen(args) => run_gen(&args),
        Command::Oracle(args) => run_oracle(&args),
        Command::Lemmas(args) => run_lemmas(&args),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn base_config(args: &RunArgs) -> SchemeConfig {
    SchemeConfig {
        eps: args.eps,
        delta: args.delta,
        gamma_scale: args.gamma_scale,
        sample_override: args.sample_size,
        mode: Mode::Exhaustive,
        trials: args.trials,
        seed: args.seed,
        lp_tol: args.lp_tol,
        cap: args.cap,
        oracle_compare: args.oracle,
        threads: args.threads,
        widen_retries: args.widen_retries,
        ..SchemeConfig::default()
    }
}

/// Resolves the sample-assignment mode; planted mode takes the assignment
/// from `--planted`, then `<input>.answer`, then the exact optimum.
fn resolve_mode(
    args: &RunArgs,
    n: usize,
    optimum: impl FnOnce() -> Result<Assignment>,
) -> Result<(Mode, Option<&'static str>)> {
    match args.mode {
        ModeArg::Exhaustive => Ok((Mode::Exhaustive, None)),
        ModeArg::Random => Ok((Mode::Random { count: args.count }, None)),
        ModeArg::Planted => {
            let sidecar = PathBuf::from(format!("{}.answer", args.input.display()));
            let (x, source) = if let Some(path) = &args.planted {
                (parse_answer(&read(path)?, n)?, "answer-file")
            } else if sidecar.exists() {
                (parse_answer(&read(&sidecar)?, n)?, "sidecar")
            } else if n <= MAX_ENUMERATION_VARS {
                (optimum()?, "oracle")
            } else {
                return Err(Error::config(format!(
                    "planted mode on n = {n} needs --planted (no sidecar, too large to solve exactly)"
                )));
            };
            Ok((Mode::Planted { x }, Some(source)))
        }
    }
}

fn emit_run(
    command: &str,
    instance: InstanceInfo,
    report: RunReport,
    planted_source: Option<&str>,
    parse_ms: f64,
    started: Instant,
    output: &OutputArgs,
) -> Result<()> {
    let mut config = serde_json::to_value(&report.config).map_err(report::json_error)?;
    config["planted_source"] = json!(planted_source);
    let solve_ms = report.timings.total_ms;
    let mut result = serde_json::to_value(report.without_timings()).map_err(report::json_error)?;
    if let Value::Object(map) = &mut result {
        map.remove("config");
        map.remove("timings");
    }
    let doc = Document::new(
        command,
        Some(instance),
        config,
        result,
        json!({ "parse_ms": parse_ms, "solve_ms": solve_ms, "total_ms": ms(started) }),
    );
    doc.emit(output.format, output.out.as_deref())
}

fn load_graph(path: &Path) -> Result<(Graph, InstanceInfo)> {
    let text = read(path)?;
    let g = Graph::parse_dimacs(&text)?;
    let info = InstanceInfo::new(path, &text, "graph", g.n(), g.m());
    Ok((g, info))
}

fn run_maxcut(args: &RunArgs) -> Result<()> {
    let started = Instant::now();
    let (g, info) = load_graph(&args.input)?;
    let parse_ms = ms(started);
    let (mode, source) = resolve_mode(args, g.n(), || Ok(brute_force_max(&from_graph_maxcut(&g))?.0))?;
    let cfg = SchemeConfig { mode, ..base_config(args) };
    let report = approximate_maxcut(&g, &cfg)?;
    emit_run("maxcut", info, report, source, parse_ms, started, &args.output)
}

fn run_smooth(args: &RunArgs) -> Result<()> {
    let started = Instant::now();
    let text = read(&args.input)?;
    let p = SmoothPolynomial::parse_dump(&text)?;
    let info = InstanceInfo::new(&args.input, &text, "polynomial", p.n(), p.monomials().len());
    let parse_ms = ms(started);
    let (mode, source) = resolve_mode(args, p.n(), || Ok(brute_force_max(&p)?.0))?;
    let cfg = SchemeConfig { mode, ..base_config(args) };
    let report = maximize_smooth(&p, &cfg)?;
    emit_run("smooth", info, report, source, parse_ms, started, &args.output)
}

/// DIMACS CNF when a `p cnf` header is present, the CSP text format otherwise.
fn load_csp(path: &Path) -> Result<(CspInstance, InstanceInfo)> {
    let text = read(path)?;
    let is_cnf = text.lines().any(|l| l.trim_start().starts_with("p cnf"));
    let (inst, kind) = if is_cnf {
        (CnfFormula::parse_dimacs(&text)?.to_csp(), "cnf")
    } else {
        (CspInstance::parse(&text)?, "csp")
    };
    let info = InstanceInfo::new(path, &text, kind, inst.n(), inst.m());
    Ok((inst, info))
}

fn run_csp(args: &RunArgs) -> Result<()> {
    let started = Instant::now();
    let (inst, info) = load_csp(&args.input)?;
    let parse_ms = ms(started);
    let (mode, source) = resolve_mode(args, inst.n(), || Ok(brute_force_max(&arithmetize(&inst)?)?.0))?;
    let cfg = SchemeConfig { mode, ..base_config(args) };
    let report = approximate_kcsp(&inst, &cfg)?;
    emit_run("csp", info, report, source, parse_ms, started, &args.output)
}

fn run_kdense(args: &KDenseArgs) -> Result<()> {
    let started = Instant::now();
    let (g, info) = load_graph(&args.run.input)?;
    let parse_ms = ms(started);
    let (mode, source) = resolve_mode(&args.run, g.n(), || Ok(brute_force_kdense(&g, args.k)?.0))?;
    let cfg = SchemeConfig { mode, kdense_budget: args.kdense_budget, ..base_config(&args.run) };
    let report = approximate_kdense(&g, args.k, &cfg)?;
    emit_run("kdense", info, report, source, parse_ms, started, &args.run.output)
}

fn run_gen(args: &GenArgs) -> Result<()> {
    let started = Instant::now();
    let spec = GenSpec {
        family: Family::parse(&args.family)?,
        n: args.n,
        delta: args.delta,
        k: args.k,
        seed: args.seed,
    };
    let out = generate(&spec)?;
    let (text, kind, n, m) = match &out.instance {
        Instance::Graph(g) => (g.to_dimacs(), "graph", g.n(), g.m()),
        Instance::Cnf(f) => (f.to_dimacs(), "cnf", f.n(), f.m()),
    };
    let Some(path) = &args.out else {
        print!("{text}");
        return Ok(());
    };
    write(path, &text)?;
    let answer_path = match &out.planted {
        Some(x) => {
            let p = PathBuf::from(format!("{}.answer", path.display()));
            write(&p, &answer_to_text(x))?;
            Some(p.display().to_string())
        }
        None => None,
    };
    let doc = Document::new(
        "gen",
        Some(InstanceInfo::new(path, &text, kind, n, m)),
        serde_json::to_value(&spec).map_err(report::json_error)?,
        json!({ "answer_path": answer_path }),
        json!({ "total_ms": ms(started) }),
    );
    doc.emit(Format::Json, None)
}

fn run_oracle(args: &OracleArgs) -> Result<()> {
    let started = Instant::now();
    let (info, x, value) = match args.problem {
        Problem::Maxcut => {
            let (g, info) = load_graph(&args.input)?;
            let (x, v) = brute_force_max(&from_graph_maxcut(&g))?;
            (info, x, coeff_to_f64(&v))
        }
        Problem::Smooth => {
            let text = read(&args.input)?;
            let p = SmoothPolynomial::parse_dump(&text)?;
            let (x, v) = brute_force_max(&p)?;
            (InstanceInfo::new(&args.input, &text, "polynomial", p.n(), p.monomials().len()), x, coeff_to_f64(&v))
        }
        Problem::Csp => {
            let (inst, info) = load_csp(&args.input)?;
            let (x, v) = brute_force_max(&arithmetize(&inst)?)?;
            (info, x, coeff_to_f64(&v))
        }
        Problem::Kdense => {
            let k = args.k.ok_or_else(|| Error::config("oracle --problem kdense needs --k"))?;
            let (g, info) = load_graph(&args.input)?;
            let (x, edges) = brute_force_kdense(&g, k)?;
            (info, x, edges as f64)
        }
    };
    let doc = Document::new(
        "oracle",
        Some(info),
        json!({ "k": args.k }),
        json!({ "optimum": value, "assignment": x.to_string() }),
        json!({ "total_ms": ms(started) }),
    );
    doc.emit(args.output.format, args.output.out.as_deref())
}

fn run_lemmas(args: &LemmaArgs) -> Result<()> {
    let started = Instant::now();
    let mut params = LemmaCheckParams::new(args.n, args.q, args.delta, args.alpha1, args.alpha2, args.trials, args.seed);
    params.beta = args.beta;
    let sampling = match args.which {
        Which::Sampling | Which::Both => Some(check_sampling_lemma(&params)?),
        Which::Rounding => None,
    };
    let rounding = match args.which {
        Which::Rounding | Which::Both => Some(check_rounding_lemma(&params)?),
        Which::Sampling => None,
    };
    let doc = Document::new(
        "lemmas",
        None,
        serde_json::to_value(&params).map_err(report::json_error)?,
        json!({ "sampling": sampling, "rounding": rounding }),
        json!({ "total_ms": ms(started) }),
    );
    doc.emit(args.output.format, args.output.out.as_deref())
}
