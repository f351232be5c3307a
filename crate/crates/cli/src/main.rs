//! `gpsr` — scenario runner, validator and graph dumper.
//!
//! Exit codes: 0 on success, 1 on scenario parse/validation failure, 2 on
//! runtime failure. Diagnostics go to stderr.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gpsr_core::oracle::{planar_subgraph_edges, unit_disk_edges};
use gpsr_core::scenario::{parse_scenario, ScenarioConfig};
use gpsr_core::stats::SimStats;
use gpsr_core::{simulate, Planarization};

#[derive(Parser)]
#[command(name = "gpsr", about = "GPSR geographic routing simulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and report statistics.
    Run {
        /// Scenario file.
        #[arg(long)]
        scenario: PathBuf,
        /// Write the event trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write statistics as CSV here (header plus one row per run).
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Run this many consecutive seeds as independent worlds.
        #[arg(long, default_value_t = 1)]
        repeat: u32,
    },
    /// Parse and validate a scenario, reporting problems.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Dump the unit-disk and planarized edge lists as CSV.
    Graph {
        #[arg(long)]
        scenario: PathBuf,
        /// Planarization filter to apply.
        #[arg(long, value_enum)]
        method: Method,
        /// Planar edges land here; the full unit-disk edge list lands in a
        /// sibling file with `.full` before the extension.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum Method {
    #[value(name = "RNG", alias = "rng")]
    Rng,
    #[value(name = "GG", alias = "gg")]
    Gg,
}

impl From<Method> for Planarization {
    fn from(m: Method) -> Self {
        match m {
            Method::Rng => Planarization::Rng,
            Method::Gg => Planarization::Gg,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gpsr: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn runtime(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn load_scenario(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { scenario } => {
            let config = load_scenario(&scenario)?;
            println!(
                "OK: {} nodes, {} flows, duration {}s, R={} m, planarization {}",
                config.nodes.len(),
                config.flows.len(),
                config.duration,
                config.radio_range,
                config.planarization
            );
            Ok(())
        }
        Command::Run {
            scenario,
            trace,
            stats,
            seed,
            repeat,
        } => {
            let mut config = load_scenario(&scenario)?;
            if let Some(s) = seed {
                config.seed = s;
            }
            if repeat == 0 {
                return Err(invalid("--repeat must be at least 1"));
            }
            let base_seed = config.seed;
            let runs = if repeat == 1 {
                let trace_sink = trace
                    .as_deref()
                    .map(|p| open_sink(p))
                    .transpose()?;
                let s = simulate(&config, trace_sink).map_err(|e| runtime(e.to_string()))?;
                vec![(base_seed, s)]
            } else {
                run_batch(&config, base_seed, repeat, trace.as_deref())?
            };
            for (seed, s) in &runs {
                report(*seed, s);
            }
            if let Some(path) = stats {
                write_stats_csv(&path, &runs)
                    .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            }
            Ok(())
        }
        Command::Graph {
            scenario,
            method,
            out,
        } => {
            let config = load_scenario(&scenario)?;
            let planar = planar_subgraph_edges(&config.nodes, config.radio_range, method.into());
            let full = unit_disk_edges(&config.nodes, config.radio_range);
            write_edges_csv(&out, &config, &planar)
                .map_err(|e| runtime(format!("{}: {e}", out.display())))?;
            let full_path = sibling_full_path(&out);
            write_edges_csv(&full_path, &config, &full)
                .map_err(|e| runtime(format!("{}: {e}", full_path.display())))?;
            println!(
                "wrote {} planar edges to {} and {} unit-disk edges to {}",
                planar.len(),
                out.display(),
                full.len(),
                full_path.display()
            );
            Ok(())
        }
    }
}

/// Runs `repeat` consecutive seeds as fully independent worlds, in
/// parallel; results come back merged in seed order.
fn run_batch(
    config: &ScenarioConfig,
    base_seed: u64,
    repeat: u32,
    trace: Option<&Path>,
) -> Result<Vec<(u64, SimStats)>, Failure> {
    let mut results: Vec<Option<(u64, SimStats)>> = vec![None; repeat as usize];
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (i, slot) in results.iter_mut().enumerate() {
            let seed = base_seed + i as u64;
            let mut config = config.clone();
            config.seed = seed;
            let trace_path = trace.map(|p| seed_suffixed_path(p, seed));
            handles.push(scope.spawn(move || -> Result<(), Failure> {
                let sink = trace_path.as_deref().map(open_sink).transpose()?;
                let stats = simulate(&config, sink).map_err(|e| runtime(e.to_string()))?;
                *slot = Some((seed, stats));
                Ok(())
            }));
        }
        for h in handles {
            h.join().expect("runner thread panicked")?;
        }
        Ok(())
    })?;
    Ok(results.into_iter().map(|r| r.expect("slot filled")).collect())
}

fn open_sink(path: &Path) -> Result<Box<dyn Write + Send>, Failure> {
    let f = File::create(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    Ok(Box::new(BufWriter::new(f)))
}

/// `trace.txt` -> `trace.7.txt` for seed 7; no extension appends `.7`.
fn seed_suffixed_path(path: &Path, seed: u64) -> PathBuf {
    match path.extension() {
        Some(ext) => {
            let mut stem = path.with_extension("").into_os_string();
            stem.push(format!(".{seed}."));
            stem.push(ext);
            PathBuf::from(stem)
        }
        None => {
            let mut p = path.as_os_str().to_os_string();
            p.push(format!(".{seed}"));
            PathBuf::from(p)
        }
    }
}

/// `graph.csv` -> `graph.full.csv`; no extension appends `.full`.
fn sibling_full_path(path: &Path) -> PathBuf {
    match path.extension() {
        Some(ext) => {
            let mut stem = path.with_extension("").into_os_string();
            stem.push(".full.");
            stem.push(ext);
            PathBuf::from(stem)
        }
        None => {
            let mut p = path.as_os_str().to_os_string();
            p.push(".full");
            PathBuf::from(p)
        }
    }
}

fn report(seed: u64, s: &SimStats) {
    println!(
        "seed {seed}: originated {}, delivered {}, dropped {} (unreachable {}, no-neighbors {}, ttl {}, link {}), in flight {}, beacons {}",
        s.originated,
        s.delivered,
        s.dropped_total(),
        s.dropped_unreachable,
        s.dropped_no_neighbors,
        s.dropped_ttl,
        s.dropped_link,
        s.in_flight,
        s.beacons_sent
    );
}

fn write_stats_csv(path: &Path, runs: &[(u64, SimStats)]) -> std::io::Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "{}", SimStats::csv_header())?;
    for (seed, s) in runs {
        writeln!(f, "{}", s.csv_row(*seed))?;
    }
    f.flush()
}

fn write_edges_csv(
    path: &Path,
    config: &ScenarioConfig,
    edges: &[(gpsr_core::NodeId, gpsr_core::NodeId)],
) -> std::io::Result<()> {
    let pos_of = |id| {
        config
            .nodes
            .iter()
            .find(|&&(n, _)| n == id)
            .map(|&(_, p)| p)
            .expect("edge endpoint declared")
    };
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "u,v,ux,uy,vx,vy")?;
    for &(u, v) in edges {
        let (pu, pv) = (pos_of(u), pos_of(v));
        writeln!(f, "{u},{v},{:.6},{:.6},{:.6},{:.6}", pu.x, pu.y, pv.x, pv.y)?;
    }
    f.flush()
}
