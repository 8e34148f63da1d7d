//! `kdp`: command-line front end for the K dissimilar paths toolkit.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use num_rational::Rational64;

use kdp_core::formulations::build;
use kdp_core::graph::DirectedNetwork;
use kdp_core::harness::{
    read_paths, run_experiment, solve_one, to_csv, write_paths, ExperimentConfig, Method, ResultRow,
    DEFAULT_TIME_LIMIT_MS,
};
use kdp_core::instance::{gen_random, try_gen_grid};
use kdp_core::ipm::parse_alpha;
use kdp_core::metrics::{
    arc_repetitions, avdi, midi, repeated_arc_count, repeated_occurrences, to_3dp, total_pairwise_overlaps,
};
use kdp_core::oracle::{brute_force_optimum, OracleObjective, OracleOptions};
use kdp_core::rstar::{rstar_flow, rstar_lp};
use kdp_milp::{export_lp, solve_bb};

#[derive(Parser)]
#[command(name = "kdp", version, about = "K dissimilar s-t paths: exact formulations, heuristics and metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a grid or random instance in the graph text format.
    Gen(GenArgs),
    /// Solve one instance with one method and print the result row.
    Solve(SolveArgs),
    /// Run the iterative penalty method.
    Ipm(IpmArgs),
    /// Metrics of the paths in a paths file.
    Score(ScoreArgs),
    /// Write a formulation as an LP file.
    ExportLp(ExportArgs),
    /// Presence bound R* for K paths.
    Rstar(RstarArgs),
    /// Run a config-driven batch and write the CSV.
    Experiment(ExperimentArgs),
    /// Brute-force optimum over all simple paths.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Grid with P rows and Q columns.
    #[arg(long, num_args = 2, value_names = ["P", "Q"], conflicts_with = "random", required_unless_present = "random")]
    grid: Option<Vec<usize>>,
    /// Random network with N nodes, M arcs and a seed.
    #[arg(long, num_args = 3, value_names = ["N", "M", "SEED"])]
    random: Option<Vec<u64>>,
    /// Output file (stdout when absent).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    graph: PathBuf,
    /// mao, mra, mro, mar, minmax, a presence-bounded variant (mraa, mroa, mara) or ipm.
    #[arg(short, long)]
    method: String,
    #[arg(short)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_TIME_LIMIT_MS)]
    time_limit_ms: u64,
    /// Drop the redundant linking rows (MAO, MRA).
    #[arg(long)]
    drop_redundant: bool,
    /// Per-path linking rows instead of the aggregated one (MAR).
    #[arg(long)]
    no_aggregate: bool,
    /// Add the presence bound R* (MRA, MRO, MAR).
    #[arg(long)]
    presence: bool,
    /// Penalty for the ipm method.
    #[arg(long, default_value = "1")]
    alpha: String,
    /// Write the loop-free paths of the solution here.
    #[arg(long)]
    paths_out: Option<PathBuf>,
}

#[derive(Args)]
struct IpmArgs {
    graph: PathBuf,
    #[arg(short)]
    k: usize,
    #[arg(long, default_value = "1")]
    alpha: String,
    #[arg(long)]
    paths_out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    graph: PathBuf,
    paths: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    graph: PathBuf,
    #[arg(short, long)]
    method: String,
    #[arg(short)]
    k: usize,
    #[arg(long)]
    drop_redundant: bool,
    #[arg(long)]
    no_aggregate: bool,
    #[arg(long)]
    presence: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RstarArgs {
    graph: PathBuf,
    #[arg(short)]
    k: usize,
    /// Compute from the min-max LP relaxation instead of max-flow.
    #[arg(long)]
    lp: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    config: PathBuf,
    /// Override the worker count.
    #[arg(long)]
    workers: Option<usize>,
    /// Override the output CSV path.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    graph: PathBuf,
    #[arg(short)]
    k: usize,
    /// ol, repeated, ro, rep or d1.
    #[arg(long, default_value = "ol")]
    objective: String,
    #[arg(long)]
    presence_bound: Option<usize>,
    /// Also solve this formulation and fail unless the optima agree.
    #[arg(long)]
    check: Option<String>,
}

/// Usage errors exit 1, runtime errors 2.
enum Failure {
    Usage(String),
    Runtime(String),
}

type CmdResult = Result<(), Failure>;

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read_graph(path: &Path) -> Result<DirectedNetwork, Failure> {
    DirectedNetwork::read_file(path).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn write_or_print(output: Option<&Path>, text: &str) -> CmdResult {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn alpha(s: &str) -> Result<Rational64, Failure> {
    parse_alpha(s).filter(|a| *a >= Rational64::from_integer(0)).ok_or_else(|| usage(format!("bad alpha `{s}`")))
}

fn check_k(k: usize) -> CmdResult {
    if k < 2 {
        return Err(usage("K must be at least 2"));
    }
    Ok(())
}

fn method_with_flags(name: &str, drop: bool, no_agg: bool, presence: bool) -> Result<Method, Failure> {
    let mut m: Method = name.parse().map_err(usage)?;
    if let Method::Milp { drop_redundant, aggregate_linking, presence: p, .. } = &mut m {
        *drop_redundant |= drop;
        *aggregate_linking &= !no_agg;
        *p |= presence;
    } else if drop || no_agg || presence {
        return Err(usage("formulation flags do not apply to ipm"));
    }
    // re-parse the canonical name to validate the flag combination
    m.to_string().parse::<Method>().map_err(usage)
}

fn print_row(row: &ResultRow) {
    print!("{}", to_csv(std::slice::from_ref(row)));
}

fn finish_row(row: &ResultRow, net: &DirectedNetwork, paths_out: Option<&Path>) -> CmdResult {
    print_row(row);
    if let (Some(out), Some(paths)) = (paths_out, &row.paths) {
        write_or_print(Some(out), &write_paths(net, paths))?;
    }
    if row.status.ends_with("error") {
        return Err(runtime(format!("solve failed with status {}", row.status)));
    }
    Ok(())
}

fn cmd_gen(a: GenArgs) -> CmdResult {
    let net = match (a.grid, a.random) {
        (Some(g), None) => try_gen_grid(g[0], g[1]).map_err(usage)?,
        (None, Some(r)) => gen_random(r[0] as usize, r[1] as usize, r[2]).map_err(usage)?,
        _ => return Err(usage("give exactly one of --grid or --random")),
    };
    write_or_print(a.output.as_deref(), &net.to_text())
}

fn cmd_solve(a: SolveArgs) -> CmdResult {
    check_k(a.k)?;
    let method = method_with_flags(&a.method, a.drop_redundant, a.no_aggregate, a.presence)?;
    let alpha = alpha(&a.alpha)?;
    if a.time_limit_ms == 0 {
        return Err(usage("time limit must be positive"));
    }
    let net = read_graph(&a.graph)?;
    let id = a.graph.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let row = solve_one(&net, &id, a.k, &method, Duration::from_millis(a.time_limit_ms), alpha);
    finish_row(&row, &net, a.paths_out.as_deref())
}

fn cmd_ipm(a: IpmArgs) -> CmdResult {
    check_k(a.k)?;
    let alpha = alpha(&a.alpha)?;
    let net = read_graph(&a.graph)?;
    let id = a.graph.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let row = solve_one(&net, &id, a.k, &Method::Ipm, Duration::MAX, alpha);
    finish_row(&row, &net, a.paths_out.as_deref())
}

fn cmd_score(a: ScoreArgs) -> CmdResult {
    let net = read_graph(&a.graph)?;
    let text = std::fs::read_to_string(&a.paths).map_err(|e| runtime(format!("{}: {e}", a.paths.display())))?;
    let paths = read_paths(&net, &text).map_err(runtime)?;
    let fmt = |r: Option<num_rational::BigRational>| r.map_or("-".to_string(), |r| format!("{:.3} ({r})", to_3dp(&r)));
    println!("paths {}", paths.len());
    println!("simple {}", paths.iter().all(|p| p.is_simple()));
    println!("overlaps {}", total_pairwise_overlaps(&paths));
    println!("repeated_arcs {}", repeated_arc_count(&paths));
    println!("repeated_occurrences {}", repeated_occurrences(&paths));
    println!("arc_repetitions {}", arc_repetitions(&paths));
    println!("avdi {}", fmt(avdi(&paths)));
    println!("midi {}", fmt(midi(&paths)));
    Ok(())
}

fn cmd_export(a: ExportArgs) -> CmdResult {
    check_k(a.k)?;
    let method = method_with_flags(&a.method, a.drop_redundant, a.no_aggregate, a.presence)?;
    let net = read_graph(&a.graph)?;
    let bound = match method {
        Method::Milp { presence: true, .. } => Some(rstar_flow(&net, a.k).map_err(runtime)?),
        Method::Milp { .. } => None,
        Method::Ipm => return Err(usage("ipm has no LP model")),
    };
    let kind = method.kind(bound).expect("milp method");
    let pm = build(&net, a.k, &kind).map_err(runtime)?;
    write_or_print(a.output.as_deref(), &export_lp(&pm.model))
}

fn cmd_rstar(a: RstarArgs) -> CmdResult {
    if a.k == 0 {
        return Err(usage("K must be positive"));
    }
    let net = read_graph(&a.graph)?;
    let r = if a.lp { rstar_lp(&net, a.k) } else { rstar_flow(&net, a.k) }.map_err(runtime)?;
    println!("{r}");
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs) -> CmdResult {
    let mut cfg = ExperimentConfig::read_file(&a.config).map_err(|e| match e {
        kdp_core::harness::HarnessError::Io(io) => runtime(format!("{}: {io}", a.config.display())),
        other => usage(other),
    })?;
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    if a.output.is_some() {
        cfg.output = a.output;
    }
    let rows = run_experiment(&cfg).map_err(runtime)?;
    match &cfg.output {
        None => print!("{}", to_csv(&rows)),
        Some(out) => {
            let solved = rows.iter().filter(|r| r.status != "mean").count();
            eprintln!("{solved} rows written to {}", out.display());
        }
    }
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> CmdResult {
    check_k(a.k)?;
    let mut objective: OracleObjective = a.objective.parse().map_err(usage)?;
    let check = match &a.check {
        Some(name) => {
            let m = method_with_flags(name, false, false, false)?;
            let Method::Milp { tag, .. } = m else {
                return Err(usage("--check needs a formulation"));
            };
            objective = OracleObjective::for_tag(tag).ok_or_else(|| usage(format!("no oracle objective for {tag}")))?;
            Some(m)
        }
        None => None,
    };
    let net = read_graph(&a.graph)?;
    let opts = OracleOptions { presence_bound: a.presence_bound, ..Default::default() };
    let res = brute_force_optimum(&net, a.k, objective, &opts).map_err(runtime)?;
    println!("objective {}", objective.name());
    println!("value {}", res.value);
    if let Some(mi) = &res.midi {
        println!("midi {mi}");
    }
    print!("{}", write_paths(&net, &res.paths));
    if let Some(m) = check {
        let bound = match m {
            Method::Milp { presence: true, .. } => Some(rstar_flow(&net, a.k).map_err(runtime)?),
            _ => a.presence_bound,
        };
        let kind = m.kind(bound).expect("milp method");
        let pm = build(&net, a.k, &kind).map_err(runtime)?;
        let report = solve_bb(&pm.model, None).map_err(runtime)?;
        let z = report.objective.ok_or_else(|| runtime(format!("{m} reported {}", report.status)))?;
        println!("{m} {z}");
        let want: f64 = res.value.to_integer().to_string().parse().unwrap_or(f64::NAN);
        if (z - want).abs() > 1e-6 {
            return Err(runtime(format!("mismatch: {m} gives {z}, oracle gives {}", res.value)));
        }
        println!("match");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Ipm(a) => cmd_ipm(a),
        Command::Score(a) => cmd_score(a),
        Command::ExportLp(a) => cmd_export(a),
        Command::Rstar(a) => cmd_rstar(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
