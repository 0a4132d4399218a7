//! Command line front end for the open parity game solver.

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use opg_core::oracle::DEFAULT_ORACLE_BOUND;
use opg_core::report::{EntranceReport, Mode, SolveReport};
use opg_core::{generate_random, render_dot, run_solve, validate_file, RandSpec, RunOptions};

#[derive(Parser)]
#[command(
    name = "opg-solve",
    version,
    about = "Solve open parity games and their diagram compositions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one diagram or opg from a source file.
    Solve {
        /// Source file with opg and diagram definitions.
        file: PathBuf,
        /// Name of the definition to solve.
        #[arg(long)]
        diagram: String,
        /// compositional, monolithic, or oracle.
        #[arg(long, default_value = "compositional", value_parser = Mode::from_str)]
        mode: Mode,
        /// Skip queries that a solved winning query already dominates.
        #[arg(long)]
        pruning: bool,
        /// Write the report as JSON to this file.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write the flattened game as graphviz dot to this file.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Print work counters and timings.
        #[arg(long)]
        stats: bool,
        /// Largest number of strategy pairs the oracle may enumerate.
        #[arg(long, default_value_t = DEFAULT_ORACLE_BOUND)]
        oracle_bound: u64,
        /// Worker threads for the query loop.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Check every definition in a source file.
    Validate { file: PathBuf },
    /// Generate random instances and time the solver modes on them.
    Bench {
        /// TOML file with [[instances]] tables.
        spec: PathBuf,
        /// Write one CSV row per instance and mode to this file.
        #[arg(long)]
        csv: PathBuf,
        /// Base seed for instances that do not fix their own.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Abort a single solve after this many milliseconds.
        #[arg(long)]
        timeout_ms: Option<u64>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Solve {
            file,
            diagram,
            mode,
            pruning,
            json,
            dot,
            stats,
            oracle_bound,
            jobs,
        } => {
            let text = fs::read_to_string(&file)
                .with_context(|| format!("cannot read {}", file.display()))?;
            let opts = RunOptions {
                mode,
                pruning,
                jobs,
                oracle_bound,
            };
            let report = run_solve(&text, &diagram, &opts)?;
            println!("{} ({})", report.diagram, report.mode);
            for entrance in &report.entrances {
                println!(
                    "  {}: {}  front: {}",
                    entrance.id,
                    entrance.class,
                    front_line(entrance)
                );
            }
            if report.entrances.is_empty() {
                println!("  no entrances");
            }
            if stats {
                println!("queries: {}", report.stats.queries);
                println!("cache hits: {}", report.stats.cache_hits);
                println!("parse: {} ms", report.stats.parse_ms);
                println!("solve: {} ms", report.stats.solve_ms);
            }
            if let Some(path) = json {
                fs::write(&path, report.to_json())
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            if let Some(path) = dot {
                let rendered = render_dot(&text, &diagram)?;
                fs::write(&path, rendered)
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            Ok(())
        }
        Cmd::Validate { file } => {
            let text = fs::read_to_string(&file)
                .with_context(|| format!("cannot read {}", file.display()))?;
            let results = validate_file(&text)?;
            let mut clean = true;
            for (name, violations) in &results {
                if violations.is_empty() {
                    println!("{name}: ok");
                } else {
                    clean = false;
                    println!("{name}:");
                    for v in violations {
                        println!("  {v}");
                    }
                }
            }
            if results.is_empty() {
                println!("nothing to validate");
            }
            if !clean {
                std::process::exit(1);
            }
            Ok(())
        }
        Cmd::Bench {
            spec,
            csv,
            seed,
            timeout_ms,
        } => bench(&spec, &csv, seed, timeout_ms),
    }
}

fn front_line(entrance: &EntranceReport) -> String {
    entrance
        .front
        .iter()
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(serde::Deserialize)]
struct BenchSpec {
    #[serde(default)]
    instances: Vec<Instance>,
}

#[derive(serde::Deserialize)]
struct Instance {
    name: String,
    atom_nodes: usize,
    outdegree: usize,
    arity: usize,
    max_priority: u32,
    depth: usize,
    #[serde(default)]
    duplicate_rate: f64,
    seed: Option<u64>,
    modes: Option<Vec<String>>,
}

enum Outcome {
    Done(SolveReport, u64),
    TimedOut,
}

fn solve_with_timeout(
    text: String,
    name: String,
    opts: RunOptions,
    timeout_ms: Option<u64>,
) -> Result<Outcome> {
    match timeout_ms {
        None => {
            let start = Instant::now();
            let report = run_solve(&text, &name, &opts)?;
            Ok(Outcome::Done(report, start.elapsed().as_millis() as u64))
        }
        Some(limit) => {
            let (tx, rx) = mpsc::channel();
            thread::spawn(move || {
                let start = Instant::now();
                let result = run_solve(&text, &name, &opts);
                let _ = tx.send(result.map(|r| (r, start.elapsed().as_millis() as u64)));
            });
            match rx.recv_timeout(Duration::from_millis(limit)) {
                Ok(result) => {
                    let (report, ms) = result?;
                    Ok(Outcome::Done(report, ms))
                }
                Err(_) => Ok(Outcome::TimedOut),
            }
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn bench(
    spec_path: &PathBuf,
    csv_path: &PathBuf,
    base_seed: u64,
    timeout_ms: Option<u64>,
) -> Result<()> {
    let spec_text = fs::read_to_string(spec_path)
        .with_context(|| format!("cannot read {}", spec_path.display()))?;
    let spec: BenchSpec = toml::from_str(&spec_text)
        .with_context(|| format!("cannot parse {}", spec_path.display()))?;

    let mut rows = vec!["instance,mode,ms,queries,cache_hits,match".to_string()];
    let mut mismatch = false;

    for (index, instance) in spec.instances.iter().enumerate() {
        let rand_spec = RandSpec {
            atom_nodes: instance.atom_nodes,
            outdegree: instance.outdegree,
            arity: instance.arity,
            max_priority: instance.max_priority,
            depth: instance.depth,
            duplicate_rate: instance.duplicate_rate,
            seed: instance.seed.unwrap_or(base_seed + index as u64),
        };
        let file =
            generate_random(&rand_spec).with_context(|| format!("instance {}", instance.name))?;
        let text = file.print();

        let mode_names = instance
            .modes
            .clone()
            .unwrap_or_else(|| vec!["compositional".into(), "monolithic".into()]);
        let mut baseline: Option<Vec<EntranceReport>> = None;
        for mode_name in &mode_names {
            let mode = Mode::from_str(mode_name)
                .map_err(|e| anyhow::anyhow!("instance {}: {e}", instance.name))?;
            let opts = RunOptions {
                mode,
                ..RunOptions::default()
            };
            let outcome = solve_with_timeout(text.clone(), "main".into(), opts, timeout_ms)
                .with_context(|| format!("instance {} in {mode} mode", instance.name))?;
            let (ms, queries, cache_hits, verdict) = match outcome {
                Outcome::TimedOut => (timeout_ms.unwrap_or(0), 0, 0, "timeout"),
                Outcome::Done(report, ms) => {
                    let verdict = match &baseline {
                        None => {
                            baseline = Some(report.entrances.clone());
                            "yes"
                        }
                        Some(expected) if *expected == report.entrances => "yes",
                        Some(_) => {
                            mismatch = true;
                            "no"
                        }
                    };
                    (ms, report.stats.queries, report.stats.cache_hits, verdict)
                }
            };
            println!(
                "{} {mode_name}: {ms} ms, {queries} queries, match={verdict}",
                instance.name
            );
            rows.push(format!(
                "{},{},{ms},{queries},{cache_hits},{verdict}",
                csv_field(&instance.name),
                csv_field(mode_name),
            ));
        }
    }

    fs::write(csv_path, rows.join("\n") + "\n")
        .with_context(|| format!("cannot write {}", csv_path.display()))?;
    if mismatch {
        eprintln!("solver modes disagreed; see {}", csv_path.display());
        std::process::exit(2);
    }
    Ok(())
}
