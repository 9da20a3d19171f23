//! Random-graph experiment harness.
//!
//! Each grid cell `(nodes, agents)` gets `reps` seeded random strongly
//! connected graphs with `edge_factor * nodes` edges. For each graph,
//! `pairs_per_graph` start/target configurations are drawn as independent
//! uniform injections, an initial plan is built by prioritized planning
//! (instances where it fails are skipped and counted) and then improved.
//! Everything except the runtime columns is a function of the seed.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::digraph::{random_strongly_connected_with, Vertex, DEFAULT_GENERATION_ATTEMPTS};
use crate::improve::{improve, percentage_decrease};
use crate::mapf::{validate_solution, Configuration};
use crate::metrics::DistanceKind;
use crate::planners::{prioritized_with_retries, PlannerOutcome, DEFAULT_ORDER_RETRIES};

pub const RECORD_HEADER: [&str; 12] = [
    "nodes",
    "edges",
    "agents",
    "seed",
    "radius",
    "distance",
    "init_len",
    "final_len",
    "pct_decrease",
    "outer_iters",
    "states_expanded",
    "runtime_ms",
];

pub const SUMMARY_HEADER: [&str; 12] = [
    "nodes",
    "agents",
    "attempted",
    "success_count",
    "skipped",
    "errors",
    "median_pct_decrease",
    "median_graph_mean_pct_decrease",
    "mean_pct_decrease",
    "median_init_len",
    "median_final_len",
    "median_runtime_ms",
];

/// Node and agent counts to sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub nodes: Vec<usize>,
    pub agents: Vec<usize>,
}

impl Grid {
    pub fn cells(&self) -> Vec<(usize, usize)> {
        self.nodes
            .iter()
            .flat_map(|&n| self.agents.iter().map(move |&a| (n, a)))
            .collect()
    }
}

fn parse_range(text: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("bad range `{text}` (expected `a`, `a..b` or `a..b:step`)");
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    match text.split_once("..") {
        None => Ok(vec![num(text)?]),
        Some((lo, rest)) => {
            let (hi, step) = match rest.split_once(':') {
                Some((hi, step)) => (num(hi)?, num(step)?),
                None => (num(rest)?, 1),
            };
            let lo = num(lo)?;
            if step == 0 || hi < lo {
                return Err(bad());
            }
            Ok((lo..=hi).step_by(step).collect())
        }
    }
}

/// Parses `nodes=20..40:10,agents=2..4`. Ranges are inclusive.
impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut nodes = None;
        let mut agents = None;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("bad grid entry `{part}` (expected key=range)"))?;
            match key.trim() {
                "nodes" => nodes = Some(parse_range(value)?),
                "agents" => agents = Some(parse_range(value)?),
                other => return Err(format!("unknown grid key `{other}`")),
            }
        }
        let grid = Grid {
            nodes: nodes.ok_or("grid is missing `nodes`")?,
            agents: agents.ok_or("grid is missing `agents`")?,
        };
        if grid.nodes.contains(&0) || grid.agents.contains(&0) {
            return Err("grid values must be positive".into());
        }
        Ok(grid)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join("|");
        write!(f, "nodes={} agents={}", join(&self.nodes), join(&self.agents))
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub grid: Grid,
    /// Random graphs per cell.
    pub reps: usize,
    pub pairs_per_graph: usize,
    pub edge_factor: usize,
    pub radius: u64,
    pub distance: DistanceKind,
    pub seed: u64,
    pub order_retries: usize,
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
}

impl BenchConfig {
    pub fn new(grid: Grid, reps: usize, seed: u64) -> Self {
        Self {
            grid,
            reps,
            pairs_per_graph: 1,
            edge_factor: 4,
            radius: 5,
            distance: DistanceKind::SumMin,
            seed,
            order_retries: DEFAULT_ORDER_RETRIES,
            workers: None,
        }
    }
}

/// One improved instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub nodes: usize,
    pub edges: usize,
    pub agents: usize,
    /// Seed of the graph; instances on the same graph share it.
    pub seed: u64,
    pub radius: u64,
    pub distance: DistanceKind,
    pub init_len: usize,
    pub final_len: usize,
    pub outer_iters: usize,
    pub states_expanded: u64,
    pub runtime_ms: f64,
}

impl BenchRecord {
    pub fn pct_decrease(&self) -> f64 {
        percentage_decrease(self.init_len, self.final_len).map_or(0.0, |p| p.value())
    }

    fn pct_text(&self) -> String {
        percentage_decrease(self.init_len, self.final_len).map_or_else(|_| "0.00".into(), |p| p.to_string())
    }

    pub fn to_row(&self) -> Vec<String> {
        vec![
            self.nodes.to_string(),
            self.edges.to_string(),
            self.agents.to_string(),
            self.seed.to_string(),
            self.radius.to_string(),
            self.distance.to_string(),
            self.init_len.to_string(),
            self.final_len.to_string(),
            self.pct_text(),
            self.outer_iters.to_string(),
            self.states_expanded.to_string(),
            format!("{:.3}", self.runtime_ms),
        ]
    }
}

/// Aggregates over one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub nodes: usize,
    pub agents: usize,
    pub attempted: usize,
    pub success_count: usize,
    /// Instances where the initial planner failed.
    pub skipped: usize,
    /// Instances lost to generation or search errors.
    pub errors: usize,
    /// Median over all instances.
    pub median_pct_decrease: Option<f64>,
    /// Median over graphs of the per-graph mean.
    pub median_graph_mean_pct_decrease: Option<f64>,
    pub mean_pct_decrease: Option<f64>,
    pub median_init_len: Option<f64>,
    pub median_final_len: Option<f64>,
    pub median_runtime_ms: Option<f64>,
}

impl CellSummary {
    pub fn to_row(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.2}"));
        vec![
            self.nodes.to_string(),
            self.agents.to_string(),
            self.attempted.to_string(),
            self.success_count.to_string(),
            self.skipped.to_string(),
            self.errors.to_string(),
            opt(self.median_pct_decrease),
            opt(self.median_graph_mean_pct_decrease),
            opt(self.mean_pct_decrease),
            opt(self.median_init_len),
            opt(self.median_final_len),
            opt(self.median_runtime_ms),
        ]
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    /// Records in (cell, graph, pair) order.
    pub records: Vec<BenchRecord>,
    pub summary: Vec<CellSummary>,
    /// Human-readable descriptions of per-instance errors.
    pub failures: Vec<String>,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// SplitMix64 finalizer, used to derive independent per-graph seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn graph_seed(seed: u64, nodes: usize, agents: usize, rep: usize) -> u64 {
    mix(mix(mix(mix(seed) ^ nodes as u64) ^ agents as u64) ^ rep as u64)
}

#[derive(Default)]
struct GraphOutcome {
    records: Vec<BenchRecord>,
    skipped: usize,
    failures: Vec<String>,
}

fn run_graph(cfg: &BenchConfig, nodes: usize, agents: usize, rep: usize) -> GraphOutcome {
    let seed = graph_seed(cfg.seed, nodes, agents, rep);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GraphOutcome::default();
    let edges = cfg.edge_factor * nodes;
    let g = match random_strongly_connected_with(nodes, edges, &mut rng, DEFAULT_GENERATION_ATTEMPTS) {
        Ok(g) => g,
        Err(e) => {
            out.failures.extend((0..cfg.pairs_per_graph).map(|_| format!("graph {nodes}/{agents}#{rep}: {e}")));
            return out;
        }
    };
    if agents > nodes {
        out.failures
            .extend((0..cfg.pairs_per_graph).map(|_| format!("graph {nodes}/{agents}#{rep}: more agents than nodes")));
        return out;
    }
    let mut vertices: Vec<Vertex> = (0..nodes as Vertex).collect();
    for pair in 0..cfg.pairs_per_graph {
        let start = Configuration::new(vertices.partial_shuffle(&mut rng, agents).0.to_vec());
        let target = Configuration::new(vertices.partial_shuffle(&mut rng, agents).0.to_vec());
        let attempt = prioritized_with_retries(&g, &start, &target, cfg.order_retries, &mut rng);
        let PlannerOutcome::Success(f0) = attempt.outcome else {
            out.skipped += 1;
            continue;
        };
        if f0.is_empty() {
            // Start equals target: nothing to improve and no defined percentage.
            out.skipped += 1;
            continue;
        }
        let clock = Instant::now();
        match improve(&g, &start, &target, &f0, cfg.radius, cfg.distance) {
            Ok(result) => {
                let runtime_ms = clock.elapsed().as_secs_f64() * 1e3;
                debug_assert!(validate_solution(&g, &start, &target, &result.final_plan));
                out.records.push(BenchRecord {
                    nodes,
                    edges: g.edge_count(),
                    agents,
                    seed,
                    radius: cfg.radius,
                    distance: cfg.distance,
                    init_len: result.initial_length,
                    final_len: result.final_length,
                    outer_iters: result.outer_iterations,
                    states_expanded: result.stats.states_expanded,
                    runtime_ms,
                });
            }
            Err(e) => out.failures.push(format!("graph {nodes}/{agents}#{rep} pair {pair}: {e}")),
        }
    }
    out
}

/// Runs the sweep. Results are ordered by cell, then graph, regardless of
/// which worker finished first.
pub fn run_bench(cfg: &BenchConfig) -> BenchReport {
    let cells = cfg.grid.cells();
    let jobs: Vec<(usize, usize, usize)> = cells
        .iter()
        .flat_map(|&(n, a)| (0..cfg.reps).map(move |rep| (n, a, rep)))
        .collect();
    let work = || -> Vec<GraphOutcome> { jobs.par_iter().map(|&(n, a, rep)| run_graph(cfg, n, a, rep)).collect() };
    let outcomes = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .expect("thread pool")
            .install(work),
        None => work(),
    };

    let mut report = BenchReport::default();
    for (ci, &(nodes, agents)) in cells.iter().enumerate() {
        let cell = &outcomes[ci * cfg.reps..(ci + 1) * cfg.reps];
        let records: Vec<&BenchRecord> = cell.iter().flat_map(|o| &o.records).collect();
        let pct: Vec<f64> = records.iter().map(|r| r.pct_decrease()).collect();
        let graph_means: Vec<f64> = cell
            .iter()
            .filter_map(|o| mean(&o.records.iter().map(BenchRecord::pct_decrease).collect::<Vec<_>>()))
            .collect();
        let collect = |f: fn(&BenchRecord) -> f64| records.iter().map(|r| f(r)).collect::<Vec<f64>>();
        report.summary.push(CellSummary {
            nodes,
            agents,
            attempted: cfg.reps * cfg.pairs_per_graph,
            success_count: records.len(),
            skipped: cell.iter().map(|o| o.skipped).sum(),
            errors: cell.iter().map(|o| o.failures.len()).sum(),
            median_pct_decrease: median(&pct),
            median_graph_mean_pct_decrease: median(&graph_means),
            mean_pct_decrease: mean(&pct),
            median_init_len: median(&collect(|r| r.init_len as f64)),
            median_final_len: median(&collect(|r| r.final_len as f64)),
            median_runtime_ms: median(&collect(|r| r.runtime_ms)),
        });
    }
    for o in outcomes {
        report.records.extend(o.records);
        report.failures.extend(o.failures);
    }
    report
}

fn csv_error(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

pub fn write_records<W: Write>(records: &[BenchRecord], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER).map_err(csv_error)?;
    for r in records {
        w.write_record(r.to_row()).map_err(csv_error)?;
    }
    w.flush()
}

pub fn write_summary<W: Write>(summary: &[CellSummary], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER).map_err(csv_error)?;
    for s in summary {
        w.write_record(s.to_row()).map_err(csv_error)?;
    }
    w.flush()
}

/// Writes the record CSV to `path` and the per-cell summary next to it.
pub fn write_report(report: &BenchReport, path: &Path, summary_path: &Path) -> std::io::Result<()> {
    write_records(&report.records, std::fs::File::create(path)?)?;
    write_summary(&report.summary, std::fs::File::create(summary_path)?)
}

/// `runs.csv` -> `runs.summary.csv`.
pub fn default_summary_path(path: &Path) -> std::path::PathBuf {
    let stem = path.file_stem().map_or_else(|| "bench".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.summary.csv"))
}
