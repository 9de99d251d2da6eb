use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use loplab_core::circuit::{parse_order, serialize_order};
use loplab_core::generators::Family;
use loplab_core::{
    generate, solve, Driver, Error, OracleModel, OrderCircuit, OrderSpec, Policy,
    Rational, SolveResult, SolverConfig, DEFAULT_CAP,
};
use loplab_core::oracle::Oracle;

mod bench;

#[derive(Parser, Debug)]
#[command(name = "loplab", version, about = "Linear-ordering search with set-size-estimation oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an order instance and its ground-truth sidecar.
    Gen(GenArgs),
    /// Check whether an instance is a strict linear order.
    Check(CheckArgs),
    /// Find the minimum of an instance through an oracle model.
    Solve(SolveArgs),
    /// Solve a seeded corpus under several models and drivers; write CSV.
    Bench(bench::BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CapArg {
    /// Brute-force arity cap (at most 24).
    #[arg(long, env = "LOPLAB_CAP", default_value_t = DEFAULT_CAP)]
    pub cap: usize,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// lex, xor, affine, bitperm, broken2, broken3, empty
    #[arg(long)]
    kind: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instance path; the sidecar goes to `<out>.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CheckArgs {
    instance: PathBuf,
    #[command(flatten)]
    cap: CapArg,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// `threshold`, `adversarial`, `memoizing`, or a full model string such
    /// as `adversarial/seeded-hash/3` or `memoizing(adversarial/alternating/0)`.
    #[arg(long, default_value = "threshold")]
    pub model: String,
    /// Gap policy for `adversarial` / `memoizing`.
    #[arg(long)]
    pub policy: Option<String>,
    /// Adversary seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// parallel or binary
    #[arg(long, default_value = "parallel")]
    driver: String,
    /// Rank-estimate accuracy as a rational, e.g. `1/24`; default 1/(8n).
    #[arg(long)]
    eps: Option<String>,
    /// Write the solve trace (one JSON document per line).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the oracle query log as JSON lines.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Include exact ranks of alpha and beta in the trace.
    #[arg(long)]
    record_ranks: bool,
    /// Check the per-coordinate rank bound with exact ranks.
    #[arg(long)]
    audit: bool,
    #[command(flatten)]
    cap: CapArg,
}

/// A failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Failure { code: 1, message: format!("{}: {err}", path.display()) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Defect(_) => 3,
            Error::Capacity { .. } => 4,
            Error::Rejected(_) => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

impl CapArg {
    pub fn get(&self) -> CliResult<usize> {
        if self.cap > DEFAULT_CAP {
            return Err(Failure::usage(format!("--cap / LOPLAB_CAP must be at most {DEFAULT_CAP}, got {}", self.cap)));
        }
        Ok(self.cap)
    }
}

impl ModelArgs {
    pub fn resolve(&self) -> CliResult<OracleModel> {
        let policy = || -> CliResult<Policy> {
            let p = self.policy.as_deref().ok_or_else(|| Failure::usage("--policy is required for this model"))?;
            p.parse().map_err(|e: Error| Failure::usage(e.to_string()))
        };
        let seed = self.seed.unwrap_or(0);
        match self.model.as_str() {
            "adversarial" => Ok(OracleModel::adversarial(policy()?, seed)),
            "memoizing" => Ok(OracleModel::memoizing(OracleModel::adversarial(policy()?, seed))),
            other => {
                if (self.policy.is_some() || self.seed.is_some()) && other == "threshold" {
                    return Err(Failure::usage("--policy/--seed do not apply to the threshold model"));
                }
                other.parse().map_err(|e: Error| Failure::usage(e.to_string()))
            }
        }
    }
}

pub fn parse_driver(s: &str) -> CliResult<Driver> {
    s.parse().map_err(|e: Error| Failure::usage(e.to_string()))
}

fn parse_eps(s: &str) -> CliResult<Rational> {
    let eps: Rational = s.trim().parse().map_err(|_| Failure::usage(format!("--eps: not a rational: {s:?}")))?;
    if eps <= Rational::from_integer(0.into()) {
        return Err(Failure::usage(format!("--eps must be positive, got {s}")));
    }
    Ok(eps)
}

fn read_instance(path: &Path) -> CliResult<OrderCircuit> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    parse_order(&text).map_err(|e| Failure { code: 1, message: format!("{}: {e}", path.display()) })
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn cmd_gen(args: &GenArgs) -> CliResult<u8> {
    let family: Family = args.kind.parse().map_err(|e: Error| Failure::usage(e.to_string()))?;
    let spec = OrderSpec::random(family, args.n, args.seed).map_err(|e| Failure::usage(e.to_string()))?;
    let inst = generate(&spec)?;
    write_file(&args.out, &serialize_order(&inst.order))?;
    let sidecar = serde_json::to_string(&inst.sidecar(Some(args.seed))).expect("sidecar serializes");
    write_file(&sidecar_path(&args.out), &format!("{sidecar}\n"))?;
    Ok(0)
}

fn cmd_check(args: &CheckArgs) -> CliResult<u8> {
    let cap = args.cap.get()?;
    let e = read_instance(&args.instance)?;
    let verdict = loplab_core::rank::check_order_with_cap(&e, cap)?;
    println!("{}", verdict.to_json());
    Ok(if verdict.is_valid() { 0 } else { 3 })
}

fn cmd_solve(args: &SolveArgs) -> CliResult<u8> {
    let cap = args.cap.get()?;
    let model = args.model.resolve()?;
    let driver = parse_driver(&args.driver)?;
    let eps = args.eps.as_deref().map(parse_eps).transpose()?;
    let e = read_instance(&args.instance)?;
    let config = SolverConfig { driver, eps, record_ranks: args.record_ranks, audit: args.audit, cap };
    let mut oracle = Oracle::with_cap(&model, cap);
    if args.log.is_some() {
        oracle = oracle.logged();
    }
    let outcome = solve(&e, &mut oracle, &config)?;
    println!("{}", outcome.result.to_json());
    if let Some(path) = &args.trace {
        write_file(path, &format!("{}\n", outcome.trace_json(Some(&model.to_string()))))?;
    }
    if let (Some(path), Some(log)) = (&args.log, oracle.take_log()) {
        write_file(path, &log.to_json_lines())?;
    }
    Ok(match outcome.result {
        SolveResult::Minimum(_) => 0,
        SolveResult::Counterexample(_) => 3,
    })
}

fn run(cli: &Cli) -> CliResult<u8> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Check(a) => cmd_check(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => bench::cmd_bench(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("loplab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
