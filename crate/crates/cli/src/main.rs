mod error;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairmatch::baseline::{peel_matching, PeelingConfig};
use fairmatch::bench::{run_sweep, summarize, write_summary, ExperimentConfig};
use fairmatch::exact::{
    brute_force_opt, solve_exact, BruteForceOptions, ExactConfig, DEFAULT_DISPATCH_THRESHOLD, DEFAULT_MAX_ATTEMPTS,
    DEFAULT_WORK_LIMIT,
};
use fairmatch::fairness::{check_delta_fair, FairnessReport};
use fairmatch::graph::io::{read_graph, read_matching, write_graph, write_graph_json};
use fairmatch::graph::{generate_erdos_renyi, generate_star_fixture, ErdosRenyiParams};
use fairmatch::lp::{build_lp_fair, build_matching_lp, export_lp, solve_fair};
use fairmatch::rounding::{round_ocrs, VertexOrder};
use fairmatch::{ColoredBipartiteGraph, FairnessSpec, Matching};
use serde_json::{json, Value};

use error::CliError;

#[derive(Parser)]
#[command(name = "fairmatch", version, about = "Proportionally fair maximum-weight bipartite matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a fair matching and print it with its fairness report as JSON.
    Solve(SolveArgs),
    /// Generate a random or fixture graph.
    Gen(GenArgs),
    /// Write the fair LP (or the unconstrained matching LP) in CPLEX LP format.
    LpExport(LpExportArgs),
    /// Check a matching file against a fairness spec.
    Verify(VerifyArgs),
    /// Run an experiment sweep described by a JSON config.
    Bench(BenchArgs),
    /// Aggregate a sweep CSV into per-group mean and standard deviation.
    Summarize(SummarizeArgs),
}

#[derive(Args, Clone)]
struct SpecArgs {
    /// Lower share bound applied to every color.
    #[arg(long, conflicts_with = "alpha_per")]
    alpha: Option<f64>,
    /// Upper share bound applied to every color.
    #[arg(long, conflicts_with = "beta_per")]
    beta: Option<f64>,
    /// Comma-separated lower bounds, one per color.
    #[arg(long, value_delimiter = ',')]
    alpha_per: Option<Vec<f64>>,
    /// Comma-separated upper bounds, one per color.
    #[arg(long, value_delimiter = ',')]
    beta_per: Option<Vec<f64>>,
}

impl SpecArgs {
    fn build(&self, graph: &ColoredBipartiteGraph) -> Result<FairnessSpec, CliError> {
        let spec = match (&self.alpha_per, &self.beta_per) {
            (None, None) => FairnessSpec::global(self.alpha.unwrap_or(0.0), self.beta.unwrap_or(1.0))?,
            (alpha, beta) => {
                let ell = graph.num_colors();
                let alpha = match alpha {
                    Some(a) => a.clone(),
                    None => vec![self.alpha.unwrap_or(0.0); ell],
                };
                let beta = match beta {
                    Some(b) => b.clone(),
                    None => vec![self.beta.unwrap_or(1.0); ell],
                };
                if alpha.len() != ell || beta.len() != ell {
                    return Err(CliError::Usage(format!(
                        "per-color bounds need {ell} values each, got {} and {}",
                        alpha.len(),
                        beta.len()
                    )));
                }
                FairnessSpec::per_color(alpha.into_iter().zip(beta).collect())?
            }
        };
        spec.resolve(graph.num_colors())?;
        Ok(spec)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Fair LP followed by randomized rounding.
    TwoSided,
    /// One-sided exact mode with brute-force dispatch.
    ExactBeta,
    /// Exhaustive search for the best balanced matching.
    Brute,
    /// Greedy peeling baseline.
    Peel,
}

#[derive(Args)]
struct SolveArgs {
    /// Graph file (text or JSON).
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "two-sided")]
    mode: Mode,
    #[command(flatten)]
    spec: SpecArgs,
    /// Perturbation of the upper bounds in exact-beta mode.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Slack used for the fairness report.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Random seed, required by the randomized modes.
    #[arg(long)]
    seed: Option<u64>,
    /// Rounding attempts in exact-beta mode.
    #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS)]
    attempts: usize,
    /// Brute force is used in exact-beta mode when beta * sum(x) is at most this value (0 disables).
    #[arg(long, default_value_t = DEFAULT_DISPATCH_THRESHOLD)]
    brute_threshold: f64,
    /// Search-node budget for brute force.
    #[arg(long, default_value_t = DEFAULT_WORK_LIMIT)]
    work_limit: u64,
    /// Write the rounding trace as JSON lines (two-sided mode).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Also write the matching as `u v` lines.
    #[arg(long)]
    matching_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Text,
    Json,
}

#[derive(Args)]
struct GenArgs {
    /// Erdős–Rényi graph with uniform colors and weights.
    #[arg(long, conflicts_with = "star", required_unless_present = "star")]
    er: bool,
    /// Star fixture with n low-mass edges of color 1 and one heavy edge of color 2.
    #[arg(long)]
    star: bool,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 2)]
    ell: usize,
    /// Keep the crossing edges of a random bipartition; without it the sample must already be bipartite.
    #[arg(long)]
    bipartite: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    weight_lo: f64,
    #[arg(long, default_value_t = 2.0)]
    weight_hi: f64,
    /// Mass left for the n light star edges.
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: GraphFormat,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LpExportArgs {
    graph: PathBuf,
    #[command(flatten)]
    spec: SpecArgs,
    /// Scale every upper bound by (1 - epsilon).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Export the matching LP without fairness rows.
    #[arg(long)]
    vanilla: bool,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    graph: PathBuf,
    /// Matching file with one `u v` pair per line.
    matching: PathBuf,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON experiment config.
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the worker count from the config.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SummarizeArgs {
    csv: PathBuf,
    /// Comma-separated grouping columns.
    #[arg(long, value_delimiter = ',', default_value = "n,algorithm")]
    group_by: Vec<String>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("no such file: {}", path.display())))
    }
}

fn require_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            Err(CliError::Usage(format!("directory does not exist: {}", dir.display())))
        }
        _ => Ok(()),
    }
}

fn load_graph(path: &Path) -> Result<ColoredBipartiteGraph, CliError> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    read_graph(BufReader::new(file)).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn matching_json(graph: &ColoredBipartiteGraph, matching: &Matching) -> Value {
    json!({
        "pairs": matching.pairs(graph),
        "edges": matching.edges(),
        "size": matching.len(),
        "weight": matching.total_weight(),
    })
}

fn print_json(value: &Value) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_matching_file(path: &Path, graph: &ColoredBipartiteGraph, matching: &Matching) -> Result<(), CliError> {
    let file = File::create(path)?;
    fairmatch::graph::io::write_matching(matching, graph, BufWriter::new(file))?;
    Ok(())
}

fn need_seed(seed: Option<u64>, mode: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Usage(format!("--seed is required in {mode} mode")))
}

fn solve(args: SolveArgs) -> Result<(), CliError> {
    require_file(&args.graph)?;
    for path in [&args.trace, &args.matching_out].into_iter().flatten() {
        require_parent(path)?;
    }
    if !(0.0..=1.0).contains(&args.delta) {
        return Err(CliError::Usage(format!("--delta must lie in [0, 1], got {}", args.delta)));
    }
    let graph = load_graph(&args.graph)?;
    let mut spec = args.spec.build(&graph)?;
    if let Some(eps) = args.epsilon {
        spec = spec.with_epsilon(eps)?;
    }

    let mut extra = serde_json::Map::new();
    let (mode, matching, report): (&str, Matching, FairnessReport) = match args.mode {
        Mode::TwoSided => {
            let seed = need_seed(args.seed, "two-sided")?;
            let x = solve_fair(&graph, &spec, None)?;
            let rounding = round_ocrs(&graph, &x, &VertexOrder::Identity, seed)?;
            if let Some(path) = &args.trace {
                rounding.trace.write_jsonl(BufWriter::new(File::create(path)?))?;
            }
            let report = check_delta_fair(&rounding.matching, &spec, args.delta)?.with_failure_bounds(&graph, &x);
            extra.insert("lpObjective".into(), json!(x.objective));
            extra.insert("seed".into(), json!(seed));
            ("two-sided", rounding.matching, report)
        }
        Mode::ExactBeta => {
            let seed = need_seed(args.seed, "exact-beta")?;
            let config = ExactConfig {
                max_attempts: args.attempts,
                seed,
                threshold: args.brute_threshold,
                work_limit: args.work_limit,
            };
            let result = solve_exact(&graph, &spec, &config)?;
            let report = check_delta_fair(&result.matching, &spec, args.delta)?;
            extra.insert("lpObjective".into(), json!(result.lp_objective));
            extra.insert("satisfiedBeta".into(), json!(result.satisfied_beta));
            extra.insert("method".into(), serde_json::to_value(result.method)?);
            extra.insert("attempts".into(), json!(result.attempts));
            extra.insert("seed".into(), json!(seed));
            if !result.satisfied_beta {
                print_report("exact-beta", &graph, &result.matching, &report, extra)?;
                return Err(CliError::Infeasible("no attempt satisfied the upper bounds".into()));
            }
            ("exact-beta", result.matching, report)
        }
        Mode::Brute => {
            let opts = BruteForceOptions {
                work_limit: args.work_limit,
                ..BruteForceOptions::default()
            };
            let found = brute_force_opt(&graph, &spec, &opts)?
                .ok_or_else(|| CliError::Infeasible("no balanced matching exists".into()))?;
            let report = check_delta_fair(&found, &spec, args.delta)?;
            ("brute", found, report)
        }
        Mode::Peel => {
            let found = peel_matching(&graph, &spec, &PeelingConfig::default())?;
            if found.is_empty() && graph.num_edges() > 0 {
                return Err(CliError::Infeasible("peeling found no balanced matching".into()));
            }
            let report = check_delta_fair(&found, &spec, args.delta)?;
            ("peel", found, report)
        }
    };
    if let Some(path) = &args.matching_out {
        write_matching_file(path, &graph, &matching)?;
    }
    print_report(mode, &graph, &matching, &report, extra)
}

fn print_report(
    mode: &str,
    graph: &ColoredBipartiteGraph,
    matching: &Matching,
    report: &FairnessReport,
    extra: serde_json::Map<String, Value>,
) -> Result<(), CliError> {
    let mut doc = serde_json::Map::new();
    doc.insert("mode".into(), json!(mode));
    doc.insert("matching".into(), matching_json(graph, matching));
    doc.insert("weight".into(), json!(matching.total_weight()));
    doc.insert("report".into(), serde_json::to_value(report)?);
    doc.extend(extra);
    print_json(&Value::Object(doc))
}

fn generate(args: GenArgs) -> Result<(), CliError> {
    if let Some(path) = &args.out {
        require_parent(path)?;
    }
    let graph = if args.star {
        generate_star_fixture(args.n, args.eps)?.0
    } else {
        let params = ErdosRenyiParams {
            weight_range: (args.weight_lo, args.weight_hi),
            bipartite_split: args.bipartite,
            ..ErdosRenyiParams::new(args.n, args.p, args.ell, args.seed)
        };
        generate_erdos_renyi(&params)?
    };
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    match args.format {
        GraphFormat::Text => write_graph(&graph, sink)?,
        GraphFormat::Json => write_graph_json(&graph, sink).map_err(|e| CliError::Internal(e.to_string()))?,
    }
    Ok(())
}

fn lp_export(args: LpExportArgs) -> Result<(), CliError> {
    require_file(&args.graph)?;
    require_parent(&args.out)?;
    let graph = load_graph(&args.graph)?;
    let lp = if args.vanilla {
        build_matching_lp(&graph)
    } else {
        let spec = args.spec.build(&graph)?;
        if let Some(eps) = args.epsilon {
            spec.clone().with_epsilon(eps)?;
        }
        build_lp_fair(&graph, &spec, args.epsilon)?
    };
    export_lp(&lp, &args.out)?;
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), CliError> {
    require_file(&args.graph)?;
    require_file(&args.matching)?;
    if !(0.0..=1.0).contains(&args.delta) {
        return Err(CliError::Usage(format!("--delta must lie in [0, 1], got {}", args.delta)));
    }
    let graph = load_graph(&args.graph)?;
    let file = File::open(&args.matching)?;
    let matching = read_matching(BufReader::new(file), &graph)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.matching.display())))?;
    let spec = args.spec.build(&graph)?;
    let report = check_delta_fair(&matching, &spec, args.delta)?;

    let mut out = std::io::stdout().lock();
    writeln!(out, "size {} weight {}", matching.len(), matching.total_weight())?;
    for c in &report.per_color {
        let verdict = match c.pass {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "n/a",
        };
        let share = c.share.map_or("-".to_string(), |s| format!("{s:.6}"));
        writeln!(
            out,
            "color {} count {} share {} bounds [{:.6}, {:.6}] {verdict}",
            c.color + 1,
            c.count,
            share,
            c.lower_target,
            c.upper_target
        )?;
    }
    let overall = match report.pass {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "EMPTY",
    };
    writeln!(out, "{overall}")?;
    if report.pass == Some(false) {
        return Err(CliError::Infeasible("matching violates the fairness bounds".into()));
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), CliError> {
    require_file(&args.config)?;
    require_parent(&args.out)?;
    let text = std::fs::read_to_string(&args.config)?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(workers) = args.workers {
        config.workers = workers;
        config.validate()?;
    }
    let outcome = run_sweep(&config, &args.out)?;
    eprintln!(
        "{} instances, {} rows written, {} rows already present",
        outcome.instances, outcome.rows_written, outcome.rows_skipped
    );
    Ok(())
}

fn summarize_cmd(args: SummarizeArgs) -> Result<(), CliError> {
    require_file(&args.csv)?;
    if let Some(path) = &args.out {
        require_parent(path)?;
    }
    let groups = summarize(&args.csv, &args.group_by)?;
    match &args.out {
        Some(path) => write_summary(&groups, &args.group_by, BufWriter::new(File::create(path)?))?,
        None => write_summary(&groups, &args.group_by, std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Gen(a) => generate(a),
        Command::LpExport(a) => lp_export(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(a),
        Command::Summarize(a) => summarize_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
