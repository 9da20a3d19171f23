//! `mapf-local`: generate instances, build initial plans, improve and check
//! them, and run the random-graph benchmark.
//!
//! Exit status is 0 on success, 1 when the input is well formed but the
//! request fails (infeasible plan, planner failure, I/O, ...) and 2 on
//! command-line usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use mapf_local::bench::{default_summary_path, run_bench, write_report, BenchConfig, Grid};
use mapf_local::digraph::{random_strongly_connected_with, Vertex, DEFAULT_GENERATION_ATTEMPTS};
use mapf_local::io::{load_instance, load_plan, save_instance, save_plan, Instance};
use mapf_local::planners::{joint_bfs_oracle, prioritized_initial, prioritized_with_retries, PlannerOutcome};
use mapf_local::{improve, percentage_decrease, Configuration, DistanceKind};

#[derive(Parser)]
#[command(name = "mapf-local", version, about = "Local-search improvement of MAPF plans on digraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random strongly connected instance.
    Gen {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edges: usize,
        #[arg(long)]
        agents: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an initial plan by prioritized planning.
    PlanInitial {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Order::Identity)]
        order: Order,
        /// Random agent orders to try after the first one fails.
        #[arg(long, default_value_t = mapf_local::planners::DEFAULT_ORDER_RETRIES)]
        retries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Shorten a feasible plan by repeated neighborhood search.
    Improve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, default_value_t = 5)]
        radius: u64,
        /// Distance reported between the initial and final plan.
        #[arg(long, default_value = "summin", value_parser = parse_distance)]
        distance: DistanceKind,
        #[arg(long)]
        out: PathBuf,
        /// Write search statistics as JSON to this file.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Check that a plan solves an instance.
    Validate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Optimal makespan by exhaustive search (small instances only).
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 5_000_000)]
        max_states: usize,
    },
    /// Run the random-graph benchmark grid.
    Bench {
        /// For example `nodes=20..40:10,agents=2..4` (inclusive ranges).
        #[arg(long)]
        grid: Grid,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 5)]
        radius: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "summin", value_parser = parse_distance)]
        distance: DistanceKind,
        /// Start/target pairs drawn per random graph.
        #[arg(long, default_value_t = 1)]
        pairs: usize,
        /// Per-cell summary CSV; defaults to `<csv stem>.summary.csv`.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Worker threads; falls back to the WORKERS environment variable.
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Identity,
    Random,
}

fn parse_distance(s: &str) -> Result<DistanceKind, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Gen {
            nodes,
            edges,
            agents,
            seed,
            out,
        } => {
            if agents > nodes {
                bail!("cannot place {agents} agents on {nodes} nodes");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let graph = random_strongly_connected_with(nodes, edges, &mut rng, DEFAULT_GENERATION_ATTEMPTS)?;
            let mut vertices: Vec<Vertex> = (0..nodes as Vertex).collect();
            let start = Configuration::new(vertices.partial_shuffle(&mut rng, agents).0.to_vec());
            let target = Configuration::new(vertices.partial_shuffle(&mut rng, agents).0.to_vec());
            let mut instance = Instance::new(graph, start, target)?;
            instance.seed = Some(seed);
            instance.generator = Some("random-strongly-connected".into());
            save_instance(&instance, &out)?;
            println!("wrote {} ({nodes} nodes, {edges} edges, {agents} agents)", out.display());
        }

        Command::PlanInitial {
            instance,
            out,
            order,
            retries,
            seed,
        } => {
            let inst = load_instance(&instance)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (outcome, attempts) = match order {
                Order::Identity => {
                    let attempt = prioritized_with_retries(&inst.graph, &inst.start, &inst.target, retries, &mut rng);
                    (attempt.outcome, attempt.attempts)
                }
                Order::Random => {
                    let mut perm: Vec<usize> = (0..inst.agent_count()).collect();
                    let mut attempts = 0;
                    loop {
                        perm.shuffle(&mut rng);
                        attempts += 1;
                        let outcome = prioritized_initial(&inst.graph, &inst.start, &inst.target, &perm);
                        if matches!(outcome, PlannerOutcome::Success(_)) || attempts > retries {
                            break (outcome, attempts);
                        }
                    }
                }
            };
            match outcome {
                PlannerOutcome::Success(plan) => {
                    save_plan(&plan, &out)?;
                    println!("plan length {} after {attempts} attempt(s), wrote {}", plan.len(), out.display());
                }
                PlannerOutcome::Failure { reason, .. } => bail!("prioritized planning failed after {attempts} attempt(s): {reason}"),
            }
        }

        Command::Improve {
            instance,
            plan,
            radius,
            distance,
            out,
            stats,
        } => {
            let inst = load_instance(&instance)?;
            let loaded = load_plan(&plan, &inst)?;
            if let Some(problem) = loaded.problem {
                bail!("{} is not a solution: {problem}", plan.display());
            }
            let result = improve(&inst.graph, &inst.start, &inst.target, &loaded.plan, radius, distance)?;
            save_plan(&result.final_plan, &out)?;
            let pct = percentage_decrease(result.initial_length, result.final_length)
                .map_or_else(|_| "n/a".to_string(), |p| format!("{p}%"));
            println!(
                "length {} -> {} ({pct} decrease) in {} search(es), wrote {}",
                result.initial_length,
                result.final_length,
                result.outer_iterations,
                out.display()
            );
            if let Some(path) = stats {
                let report = json!({
                    "initial_length": result.initial_length,
                    "final_length": result.final_length,
                    "outer_iterations": result.outer_iterations,
                    "per_iteration_lengths": result.per_iteration_lengths,
                    "radius": radius,
                    "distance": distance,
                    "distance_from_initial": result.distance_from_initial,
                    "stats": result.stats,
                });
                std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }

        Command::Validate { instance, plan } => {
            let inst = load_instance(&instance)?;
            let loaded = load_plan(&plan, &inst)?;
            match loaded.problem {
                None => println!("valid: plan of length {} solves the instance", loaded.plan.len()),
                Some(problem) => {
                    println!("invalid: {problem}");
                    return Ok(ExitCode::from(1));
                }
            }
        }

        Command::Oracle { instance, max_states } => {
            let inst = load_instance(&instance)?;
            match joint_bfs_oracle(&inst.graph, &inst.start, &inst.target, max_states)? {
                Some(makespan) => println!("optimal makespan {makespan}"),
                None => {
                    println!("target configuration is unreachable");
                    return Ok(ExitCode::from(1));
                }
            }
        }

        Command::Bench {
            grid,
            reps,
            radius,
            seed,
            csv,
            distance,
            pairs,
            summary,
            workers,
        } => {
            let workers = match workers {
                Some(w) => Some(w),
                None => match std::env::var("WORKERS") {
                    Ok(v) => Some(v.parse().with_context(|| format!("WORKERS={v} is not a count"))?),
                    Err(_) => None,
                },
            };
            let mut config = BenchConfig::new(grid, reps, seed);
            config.radius = radius;
            config.distance = distance;
            config.pairs_per_graph = pairs;
            config.workers = workers;
            let report = run_bench(&config);
            let summary_path = summary.unwrap_or_else(|| default_summary_path(&csv));
            write_report(&report, &csv, &summary_path)
                .with_context(|| format!("writing {} / {}", csv.display(), summary_path.display()))?;
            for failure in &report.failures {
                eprintln!("warning: {failure}");
            }
            for cell in &report.summary {
                let median = cell.median_pct_decrease.map_or_else(|| "-".into(), |m| format!("{m:.2}%"));
                println!(
                    "|V|={:<4} |P|={:<3} ok {:>3}/{:<3} skipped {:>3} errors {:>3} median decrease {median}",
                    cell.nodes, cell.agents, cell.success_count, cell.attempted, cell.skipped, cell.errors
                );
            }
            println!("wrote {} and {}", csv.display(), summary_path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}
