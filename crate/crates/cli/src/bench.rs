use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use loplab_core::generators::valid_corpus;
use loplab_core::oracle::Oracle;
use loplab_core::{solve, Driver, Instance, OracleModel, SolverConfig};
use rayon::prelude::*;

use crate::{parse_driver, CapArg, CliResult, Failure};

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Comma-separated order sizes; empty gives a header-only CSV.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub n: Vec<usize>,
    /// Valid orders per size.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated model strings, or `suite` for the standard suite
    /// (threshold, every policy for seeds 0..5, memoizing alternating).
    #[arg(long, value_delimiter = ',', default_value = "threshold")]
    pub models: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "parallel,binary")]
    pub drivers: Vec<String>,
    /// Add a wall_ms column. Timing makes rows machine-dependent.
    #[arg(long)]
    pub timing: bool,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub cap: CapArg,
}

struct Row {
    n: usize,
    index: usize,
    family: &'static str,
    model: String,
    driver: Driver,
    queries: u64,
    back_calls: usize,
    argmin_ok: bool,
    wall_ms: f64,
}

fn family_name(inst: &Instance) -> &'static str {
    use loplab_core::OrderKind::*;
    match inst.spec.kind {
        Lex => "lex",
        Xor { .. } => "xor",
        Affine { .. } => "affine",
        Bitperm { .. } => "bitperm",
        Broken2 { .. } => "broken2",
        Broken3 { .. } => "broken3",
        EmptyRelation => "empty",
    }
}

fn parse_models(specs: &[String]) -> CliResult<Vec<OracleModel>> {
    let mut out = Vec::new();
    for s in specs {
        if s == "suite" {
            out.extend(OracleModel::standard_suite(0..5));
        } else {
            out.push(s.parse().map_err(|e: loplab_core::Error| Failure::usage(e.to_string()))?);
        }
    }
    Ok(out)
}

fn render_csv(rows: &[Row], timing: bool) -> String {
    let mut s = String::from("# schema: 1\ninstance,n,family,model,driver,queries,back_calls,argmin_ok");
    s.push_str(if timing { ",wall_ms\n" } else { "\n" });
    for r in rows {
        s.push_str(&format!(
            "n{}-{},{},{},{},{},{},{},{}",
            r.n, r.index, r.n, r.family, r.model, r.driver, r.queries, r.back_calls, r.argmin_ok
        ));
        if timing {
            s.push_str(&format!(",{:.3}", r.wall_ms));
        }
        s.push('\n');
    }
    s
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult<u8> {
    let cap = args.cap.get()?;
    let models = parse_models(&args.models)?;
    let drivers = args.drivers.iter().map(|d| parse_driver(d)).collect::<CliResult<Vec<_>>>()?;
    let mut cells = Vec::new();
    for &n in &args.n {
        let corpus = valid_corpus(n, args.count, args.seed).map_err(|e| Failure::usage(e.to_string()))?;
        for (index, inst) in corpus.into_iter().enumerate() {
            for model in &models {
                for &driver in &drivers {
                    cells.push((n, index, inst.clone(), model.clone(), driver));
                }
            }
        }
    }
    // Every cell owns a fresh oracle, so stateful models are isolated too.
    let mut rows = cells
        .into_par_iter()
        .map(|(n, index, inst, model, driver)| {
            let config = SolverConfig { cap, ..SolverConfig::with_driver(driver) };
            let start = Instant::now();
            let outcome = solve(&inst.order, &mut Oracle::with_cap(&model, cap), &config)?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(Row {
                n,
                index,
                family: family_name(&inst),
                model: model.to_string(),
                driver,
                queries: outcome.trace.total_queries,
                back_calls: outcome.trace.back_calls,
                argmin_ok: outcome.result.minimum() == inst.truth.argmin(),
                wall_ms,
            })
        })
        .collect::<Result<Vec<_>, loplab_core::Error>>()?;
    rows.sort_by(|a, b| {
        (a.n, a.index, &a.model, a.driver.to_string()).cmp(&(b.n, b.index, &b.model, b.driver.to_string()))
    });
    let csv = render_csv(&rows, args.timing);
    match &args.out {
        Some(path) => fs::write(path, csv).map_err(|e| Failure { code: 1, message: format!("{}: {e}", path.display()) })?,
        None => print!("{csv}"),
    }
    Ok(if rows.iter().all(|r| r.argmin_ok) { 0 } else { 3 })
}
