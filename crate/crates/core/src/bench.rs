//! Synthetic experiment harness: instance sweeps over `G(n, p)` graphs, the
//! per-algorithm metrics, CSV output and grouped summaries.
//!
//! Every instance is identified by its position in the sweep enumeration
//! (n, p rule, ℓ rule, spec rule, repetition, bipartite flag). The graph seed
//! is derived from the config seed and that position, excluding the
//! bipartite flag: the bipartite and general variants of an instance share
//! one `G(n, p)` sample, the former restricted to the edges crossing a random
//! bipartition.
//!
//! Rows are written in enumeration order and flushed one at a time, so an
//! interrupted sweep can be resumed: rows already present for an
//! `(instance_id, algorithm)` pair are skipped.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::{peel_matching, PeelingConfig};
use crate::fairness::check_delta_fair;
use crate::graph::{sample_gnp, ColoredBipartiteGraph, ErdosRenyiParams, FairnessSpec, Matching};
use crate::lp::{self, build_lp_fair, build_matching_lp, export_lp, import_solution, FractionalMatching, LpError};
use crate::rounding::{round_ocrs, VertexOrder};

pub const CSV_SCHEMA: &str = "# fairmatch-bench v1";

pub const COLUMNS: [&str; 16] = [
    "instance_id",
    "n",
    "p_rule",
    "ell",
    "alpha",
    "beta",
    "bipartite",
    "seed",
    "algorithm",
    "weight",
    "vanilla_lp",
    "pof",
    "viol_lower",
    "viol_upper",
    "runtime_ms",
    "status",
];

/// Columns holding numeric metrics, summarized by [`summarize`].
pub const METRIC_COLUMNS: [&str; 6] = ["weight", "vanilla_lp", "pof", "viol_lower", "viol_upper", "runtime_ms"];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("config error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PRule {
    #[serde(rename = "10/n")]
    TenOverN,
    #[serde(rename = "0.5")]
    Half,
    #[serde(rename = "log^2(n)/n", alias = "log²(n)/n", alias = "log2n/n")]
    LogSquaredOverN,
}

impl PRule {
    pub fn name(self) -> &'static str {
        match self {
            PRule::TenOverN => "10/n",
            PRule::Half => "0.5",
            PRule::LogSquaredOverN => "log^2(n)/n",
        }
    }

    /// Edge probability for `n` vertices, capped at 1. Logarithms are natural.
    pub fn resolve(self, n: usize) -> f64 {
        let n = n as f64;
        let p = match self {
            PRule::TenOverN => 10.0 / n,
            PRule::Half => 0.5,
            PRule::LogSquaredOverN => n.ln().powi(2) / n,
        };
        p.min(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EllRule {
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
    #[serde(rename = "ceil(log n)")]
    CeilLogN,
}

impl EllRule {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            EllRule::Two => 2,
            EllRule::Three => 3,
            EllRule::CeilLogN => ((n as f64).ln().ceil() as usize).max(1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecRule {
    #[serde(rename = "(0.9/l, 1.1/l)")]
    Tight,
    #[serde(rename = "(0.75/l, 1.25/l)")]
    Loose,
}

impl SpecRule {
    pub fn resolve(self, ell: usize) -> (f64, f64) {
        let l = ell as f64;
        let (a, b) = match self {
            SpecRule::Tight => (0.9 / l, 1.1 / l),
            SpecRule::Loose => (0.75 / l, 1.25 / l),
        };
        (a, b.min(1.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Algorithm {
    Proposal,
    Peeling,
    VanillaLp,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Proposal => "proposal",
            Algorithm::Peeling => "peeling",
            Algorithm::VanillaLp => "vanillaLp",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    pub p_rules: Vec<PRule>,
    pub ell_rules: Vec<EllRule>,
    pub spec_rules: Vec<SpecRule>,
    pub repetitions: usize,
    pub bipartite: Vec<bool>,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub workers: usize,
    /// Instances with more edges than this are not solved with the built-in
    /// solver.
    pub max_lp_variables: usize,
    /// Directory with `<instance_id>-fair.sol` and `<instance_id>-vanilla.sol`
    /// solutions for oversized instances.
    pub import_dir: Option<PathBuf>,
    /// Directory where oversized instances' LPs are written.
    pub export_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_values: vec![50, 250, 500, 1000],
            p_rules: vec![PRule::TenOverN, PRule::Half, PRule::LogSquaredOverN],
            ell_rules: vec![EllRule::Two, EllRule::Three, EllRule::CeilLogN],
            spec_rules: vec![SpecRule::Tight, SpecRule::Loose],
            repetitions: 10,
            bipartite: vec![true, false],
            seed: 0,
            algorithms: vec![Algorithm::Proposal, Algorithm::Peeling, Algorithm::VanillaLp],
            workers: 1,
            max_lp_variables: 20_000,
            import_dir: None,
            export_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let empty = [
            ("nValues", self.n_values.is_empty()),
            ("pRules", self.p_rules.is_empty()),
            ("ellRules", self.ell_rules.is_empty()),
            ("specRules", self.spec_rules.is_empty()),
            ("bipartite", self.bipartite.is_empty()),
            ("algorithms", self.algorithms.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(BenchError::Config(format!("{name} must not be empty")));
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 2) {
            return Err(BenchError::Config(format!("n = {n} is below 2")));
        }
        if self.repetitions == 0 {
            return Err(BenchError::Config("repetitions must be >= 1".into()));
        }
        Ok(())
    }

    /// Every instance of the sweep in output order.
    pub fn instances(&self) -> Vec<InstanceSpec> {
        let mut out = Vec::new();
        for &n in &self.n_values {
            for (pi, &p_rule) in self.p_rules.iter().enumerate() {
                for (li, &ell_rule) in self.ell_rules.iter().enumerate() {
                    let ell = ell_rule.resolve(n);
                    for (si, &spec_rule) in self.spec_rules.iter().enumerate() {
                        let (alpha, beta) = spec_rule.resolve(ell);
                        for rep in 0..self.repetitions {
                            let seed = mix_seed(self.seed, &[n as u64, pi as u64, li as u64, si as u64, rep as u64]);
                            for &bipartite in &self.bipartite {
                                out.push(InstanceSpec {
                                    id: out.len(),
                                    n,
                                    p_rule,
                                    ell,
                                    alpha,
                                    beta,
                                    bipartite,
                                    seed,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// SplitMix64 finalizer chained over `parts`.
fn mix_seed(seed: u64, parts: &[u64]) -> u64 {
    let mut h = seed;
    for &p in parts {
        h = h.wrapping_add(p).wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSpec {
    pub id: usize,
    pub n: usize,
    pub p_rule: PRule,
    pub ell: usize,
    pub alpha: f64,
    pub beta: f64,
    pub bipartite: bool,
    pub seed: u64,
}

impl InstanceSpec {
    /// The graph this instance runs on. `Ok(None)` when the general variant
    /// is requested but the sample is not bipartite.
    pub fn graph(&self) -> Result<Option<ColoredBipartiteGraph>, crate::graph::GraphError> {
        let params = ErdosRenyiParams::new(self.n, self.p_rule.resolve(self.n), self.ell, self.seed);
        let sample = sample_gnp(&params)?;
        if self.bipartite {
            return Ok(Some(sample.bipartite_split()));
        }
        match sample.two_colored() {
            Ok(g) => Ok(Some(g)),
            Err(crate::graph::GraphError::NotBipartite) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// One CSV row. Optional metrics are written as empty fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub instance_id: usize,
    pub n: usize,
    pub p_rule: String,
    pub ell: usize,
    pub alpha: f64,
    pub beta: f64,
    pub bipartite: bool,
    pub seed: u64,
    pub algorithm: String,
    pub weight: Option<f64>,
    pub vanilla_lp: Option<f64>,
    pub pof: Option<f64>,
    pub viol_lower: Option<f64>,
    pub viol_upper: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub status: String,
}

impl MetricsRow {
    fn blank(inst: &InstanceSpec, algorithm: Algorithm, status: &str) -> Self {
        Self {
            instance_id: inst.id,
            n: inst.n,
            p_rule: inst.p_rule.name().to_string(),
            ell: inst.ell,
            alpha: inst.alpha,
            beta: inst.beta,
            bipartite: inst.bipartite,
            seed: inst.seed,
            algorithm: algorithm.name().to_string(),
            weight: None,
            vanilla_lp: None,
            pof: None,
            viol_lower: None,
            viol_upper: None,
            runtime_ms: None,
            status: status.to_string(),
        }
    }

    fn fields(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.filter(|x| x.is_finite()).map(|x| x.to_string()).unwrap_or_default();
        let ms = self.runtime_ms.map(|t| format!("{t:.3}")).unwrap_or_default();
        vec![
            self.instance_id.to_string(),
            self.n.to_string(),
            self.p_rule.clone(),
            self.ell.to_string(),
            self.alpha.to_string(),
            self.beta.to_string(),
            self.bipartite.to_string(),
            self.seed.to_string(),
            self.algorithm.clone(),
            opt(self.weight),
            opt(self.vanilla_lp),
            opt(self.pof),
            // infinite violation factors are kept as "inf"
            self.viol_lower.map(|v| v.to_string()).unwrap_or_default(),
            self.viol_upper.map(|v| v.to_string()).unwrap_or_default(),
            ms,
            self.status.clone(),
        ]
    }
}

/// Optimum of the plain matching LP.
pub fn vanilla_lp_objective(graph: &ColoredBipartiteGraph) -> Result<f64, LpError> {
    Ok(lp::solve_vanilla(graph)?.objective)
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

enum Solved {
    Ok(FractionalMatching),
    Failed(String),
}

struct LpSource<'a> {
    config: &'a ExperimentConfig,
    inst: &'a InstanceSpec,
    graph: &'a ColoredBipartiteGraph,
}

impl LpSource<'_> {
    fn oversized(&self) -> bool {
        self.graph.num_edges() > self.config.max_lp_variables
    }

    fn solve(&self, spec: Option<&FairnessSpec>) -> Solved {
        let tag = if spec.is_some() { "fair" } else { "vanilla" };
        let result = if self.oversized() {
            self.external(spec, tag)
        } else {
            match spec {
                Some(s) => lp::solve_fair(self.graph, s, None),
                None => lp::solve_vanilla(self.graph),
            }
        };
        match result {
            Ok(x) => Solved::Ok(x),
            Err(LpError::Infeasible) => Solved::Failed("infeasible".into()),
            Err(LpError::Solution(msg)) if msg == "external-solver-required" => Solved::Failed(msg),
            Err(e) => Solved::Failed(format!("error: {e}")),
        }
    }

    fn external(&self, spec: Option<&FairnessSpec>, tag: &str) -> Result<FractionalMatching, LpError> {
        let name = format!("{}-{tag}", self.inst.id);
        if let Some(dir) = &self.config.import_dir {
            let path = dir.join(format!("{name}.sol"));
            if path.exists() {
                let file = BufReader::new(File::open(path)?);
                return import_solution(file, self.graph, spec);
            }
        }
        if let Some(dir) = &self.config.export_dir {
            let lp = match spec {
                Some(s) => build_lp_fair(self.graph, s, None)?,
                None => build_matching_lp(self.graph),
            };
            std::fs::create_dir_all(dir)?;
            export_lp(&lp, dir.join(format!("{name}.lp")))?;
        }
        Err(LpError::Solution("external-solver-required".into()))
    }
}

fn matching_row(
    mut row: MetricsRow,
    matching: &Matching,
    spec: &FairnessSpec,
    vanilla: Option<f64>,
    runtime_ms: f64,
) -> MetricsRow {
    let weight = matching.total_weight();
    row.weight = Some(weight);
    row.vanilla_lp = vanilla;
    row.pof = vanilla.filter(|_| weight > 0.0).map(|v| v / weight);
    row.runtime_ms = Some(runtime_ms);
    if let Ok(report) = check_delta_fair(matching, spec, 0.0) {
        if !report.degenerate {
            row.viol_lower = Some(report.violation_lower);
            row.viol_upper = Some(report.violation_upper);
        }
    }
    row
}

/// Computes all requested algorithm rows for one instance.
pub fn run_instance(config: &ExperimentConfig, inst: &InstanceSpec, skip: &HashSet<(usize, String)>) -> Vec<MetricsRow> {
    let wanted: Vec<Algorithm> = config
        .algorithms
        .iter()
        .copied()
        .filter(|a| !skip.contains(&(inst.id, a.name().to_string())))
        .collect();
    if wanted.is_empty() {
        return Vec::new();
    }
    let graph = match inst.graph() {
        Ok(Some(g)) => g,
        Ok(None) => {
            return wanted
                .iter()
                .map(|&a| MetricsRow::blank(inst, a, "non-bipartite"))
                .collect()
        }
        Err(e) => {
            return wanted
                .iter()
                .map(|&a| MetricsRow::blank(inst, a, &format!("error: {e}")))
                .collect()
        }
    };
    let spec = match FairnessSpec::global(inst.alpha, inst.beta) {
        Ok(s) => s,
        Err(e) => {
            return wanted
                .iter()
                .map(|&a| MetricsRow::blank(inst, a, &format!("error: {e}")))
                .collect()
        }
    };
    let source = LpSource { config, inst, graph: &graph };

    let vanilla_start = Instant::now();
    let vanilla = source.solve(None);
    let vanilla_ms = millis(vanilla_start);
    let vanilla_value = match &vanilla {
        Solved::Ok(x) => Some(x.objective),
        Solved::Failed(_) => None,
    };

    let mut rows = Vec::with_capacity(wanted.len());
    for algorithm in wanted {
        let row = MetricsRow::blank(inst, algorithm, "ok");
        let row = match algorithm {
            Algorithm::Proposal => {
                let start = Instant::now();
                match source.solve(Some(&spec)) {
                    Solved::Ok(x) => match round_ocrs(&graph, &x, &VertexOrder::Identity, inst.seed) {
                        Ok(r) => matching_row(row, &r.matching, &spec, vanilla_value, millis(start)),
                        Err(e) => MetricsRow {
                            status: format!("error: {e}"),
                            ..row
                        },
                    },
                    Solved::Failed(status) => MetricsRow {
                        status,
                        vanilla_lp: vanilla_value,
                        ..row
                    },
                }
            }
            Algorithm::Peeling => {
                let start = Instant::now();
                match peel_matching(&graph, &spec, &PeelingConfig::default()) {
                    Ok(m) => matching_row(row, &m, &spec, vanilla_value, millis(start)),
                    Err(e) => MetricsRow {
                        status: format!("error: {e}"),
                        ..row
                    },
                }
            }
            Algorithm::VanillaLp => match &vanilla {
                Solved::Ok(x) => {
                    let mass = x.total_mass();
                    let (mut lower, mut upper) = (1.0_f64, 1.0_f64);
                    if mass > 0.0 {
                        for c in 0..graph.num_colors() {
                            let share = x.color_mass(&graph, c) / mass;
                            if inst.alpha > 0.0 {
                                lower = lower.max(if share > 0.0 { inst.alpha / share } else { f64::INFINITY });
                            }
                            upper = upper.max(share / inst.beta);
                        }
                    }
                    MetricsRow {
                        weight: Some(x.objective),
                        vanilla_lp: Some(x.objective),
                        pof: (x.objective > 0.0).then_some(1.0),
                        viol_lower: (mass > 0.0).then_some(lower),
                        viol_upper: (mass > 0.0).then_some(upper),
                        runtime_ms: Some(vanilla_ms),
                        ..row
                    }
                }
                Solved::Failed(status) => MetricsRow {
                    status: status.clone(),
                    ..row
                },
            },
        };
        rows.push(row);
    }
    rows
}

fn existing_rows(path: &Path) -> Result<HashSet<(usize, String)>, BenchError> {
    let mut done = HashSet::new();
    if !path.exists() || std::fs::metadata(path)?.len() == 0 {
        return Ok(done);
    }
    for row in read_rows(path)? {
        done.insert((row.instance_id, row.algorithm));
    }
    Ok(done)
}

fn check_schema(path: &Path) -> Result<(), BenchError> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    if first.trim_end() != CSV_SCHEMA {
        return Err(BenchError::Schema(format!(
            "expected `{CSV_SCHEMA}` on the first line, found `{}`",
            first.trim_end()
        )));
    }
    Ok(())
}

/// Reads every row of a sweep CSV.
pub fn read_rows(path: &Path) -> Result<Vec<MetricsRow>, BenchError> {
    check_schema(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != COLUMNS {
        return Err(BenchError::Schema(format!("unexpected columns {header:?}")));
    }
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        rows.push(record?);
    }
    Ok(rows)
}

/// Summary of a finished or resumed sweep.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepOutcome {
    pub instances: usize,
    pub rows_written: usize,
    pub rows_skipped: usize,
}

/// Runs the sweep, appending rows to `out_path`. Rows already present in
/// the file are skipped.
pub fn run_sweep(config: &ExperimentConfig, out_path: &Path) -> Result<SweepOutcome, BenchError> {
    config.validate()?;
    let done = existing_rows(out_path)?;
    let fresh = done.is_empty() && (!out_path.exists() || std::fs::metadata(out_path)?.len() == 0);
    let mut file = OpenOptions::new().create(true).append(true).open(out_path)?;
    if fresh {
        writeln!(file, "{CSV_SCHEMA}")?;
        writeln!(file, "{}", COLUMNS.join(","))?;
        file.flush()?;
    }
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);

    let instances = config.instances();
    let next = AtomicUsize::new(0);
    let workers = config.workers.max(1).min(instances.len().max(1));
    let (tx, rx) = mpsc::channel::<(usize, Vec<MetricsRow>)>();
    let mut outcome = SweepOutcome {
        instances: instances.len(),
        rows_skipped: done.len(),
        ..SweepOutcome::default()
    };

    std::thread::scope(|scope| -> Result<(), BenchError> {
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, instances, done) = (&next, &instances, &done);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(inst) = instances.get(i) else { break };
                if tx.send((i, run_instance(config, inst, done))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        let mut expected = 0;
        for (i, rows) in rx {
            pending.insert(i, rows);
            while let Some(rows) = pending.remove(&expected) {
                for row in rows {
                    writer.write_record(row.fields())?;
                    writer.flush()?;
                    outcome.rows_written += 1;
                }
                expected += 1;
            }
        }
        Ok(())
    })?;
    Ok(outcome)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryStat {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryGroup {
    pub key: Vec<String>,
    pub rows: usize,
    /// One entry per [`METRIC_COLUMNS`] name, `None` without finite values.
    pub metrics: Vec<Option<SummaryStat>>,
}

fn stat(values: &[f64]) -> Option<SummaryStat> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some(SummaryStat {
        count: values.len(),
        mean,
        std: var.sqrt(),
    })
}

/// Groups the rows of a sweep CSV by `group_by` columns and computes the
/// mean and population standard deviation of every metric column, skipping
/// empty and non-finite values.
pub fn summarize(csv_path: &Path, group_by: &[String]) -> Result<Vec<SummaryGroup>, BenchError> {
    check_schema(csv_path)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(csv_path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != COLUMNS {
        return Err(BenchError::Schema(format!("unexpected columns {header:?}")));
    }
    let key_idx = group_by
        .iter()
        .map(|g| {
            COLUMNS
                .iter()
                .position(|c| c == g)
                .ok_or_else(|| BenchError::Schema(format!("unknown group-by column `{g}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let metric_idx: Vec<usize> = METRIC_COLUMNS
        .iter()
        .map(|m| COLUMNS.iter().position(|c| c == m).expect("metric is a column"))
        .collect();

    let mut groups: BTreeMap<Vec<String>, (usize, Vec<Vec<f64>>)> = BTreeMap::new();
    let mut order: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let key: Vec<String> = key_idx.iter().map(|&i| record[i].to_string()).collect();
        let entry = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (0, vec![Vec::new(); METRIC_COLUMNS.len()])
        });
        entry.0 += 1;
        for (slot, &i) in entry.1.iter_mut().zip(&metric_idx) {
            if let Ok(v) = record[i].parse::<f64>() {
                if v.is_finite() {
                    slot.push(v);
                }
            }
        }
    }
    Ok(order
        .into_iter()
        .map(|key| {
            let (rows, values) = &groups[&key];
            SummaryGroup {
                metrics: values.iter().map(|v| stat(v)).collect(),
                rows: *rows,
                key,
            }
        })
        .collect())
}

/// Writes summary groups as CSV: the group-by columns, `rows`, then
/// `<metric>_count,<metric>_mean,<metric>_std` per metric.
pub fn write_summary<W: Write>(groups: &[SummaryGroup], group_by: &[String], out: W) -> Result<(), BenchError> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header: Vec<String> = group_by.to_vec();
    header.push("rows".into());
    for m in METRIC_COLUMNS {
        header.extend([format!("{m}_count"), format!("{m}_mean"), format!("{m}_std")]);
    }
    writer.write_record(&header)?;
    for g in groups {
        let mut rec = g.key.clone();
        rec.push(g.rows.to_string());
        for m in &g.metrics {
            match m {
                Some(s) => rec.extend([s.count.to_string(), s.mean.to_string(), s.std.to_string()]),
                None => rec.extend(["0".to_string(), String::new(), String::new()]),
            }
        }
        writer.write_record(&rec)?;
    }
    writer.flush()?;
    Ok(())
}
