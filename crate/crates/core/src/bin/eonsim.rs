use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use eonsim::config::Overrides;
use eonsim::experiment::{self, ExperimentError};
use eonsim::topology::{hamiltonian_cycle, DEFAULT_CYCLE_SEARCH_BUDGET};
use eonsim::{Algorithm, ExperimentConfig};

const LOG_ENV: &str = "EONSIM_LOG";

#[derive(Parser)]
#[command(name = "eonsim", version, about = "Survivable elastic optical network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment; list-valued flags sweep every combination.
    Run(RunArgs),
    /// Print a summary of a topology file or bundled topology.
    Topology {
        /// Path or bundled name (usanet, paneuro).
        topology: String,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML experiment file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Topology JSON file or bundled name (usanet, paneuro).
    #[arg(long)]
    topology: Option<String>,
    #[arg(long, value_delimiter = ',')]
    algorithm: Option<Vec<Algorithm>>,
    /// Offered load in Erlang.
    #[arg(long, value_delimiter = ',')]
    load: Option<Vec<f64>>,
    #[arg(long)]
    requests: Option<usize>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of the fiber spectrum per preprovisioned lightpath.
    #[arg(long = "preprov-bw", value_delimiter = ',')]
    preprov_bw: Option<Vec<f64>>,
    #[arg(long)]
    k: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: RunArgs) -> ExitCode {
    let overrides = Overrides {
        topology: args.topology,
        algorithms: args.algorithm,
        loads: args.load,
        requests: args.requests,
        replications: args.replications,
        seed: args.seed,
        preprov_bw: args.preprov_bw,
        k: args.k,
        out: args.out,
    };
    let cfg = match ExperimentConfig::load(args.config.as_deref(), overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match experiment::run_experiment(&cfg) {
        Ok(out) => {
            for row in &out.rows {
                let bbr = row.result.estimate("bbr").map_or(f64::NAN, |e| e.mean);
                let ovh = row.result.estimate("overhead_pct").map_or(f64::NAN, |e| e.mean);
                let bw = row.preprov_bw.map(|b| format!("{b}")).unwrap_or_else(|| "-".into());
                println!(
                    "{:<20} bw={:<6} load={:<8} bbr={:.6} overhead={:.2}%",
                    row.algorithm.to_string(),
                    bw,
                    row.load,
                    bbr,
                    ovh
                );
            }
            println!("wrote {} and {}", out.csv_path.display(), out.json_path.display());
            ExitCode::SUCCESS
        }
        Err(ExperimentError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn topology(name: String) -> ExitCode {
    let cfg = ExperimentConfig {
        topology: Some(name),
        ..Default::default()
    };
    let graph = match cfg.load_topology() {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let total_km: f64 = graph.links().iter().map(|l| l.length_km).sum();
    println!(
        "{}: {} nodes, {} links, {:.0} km of fiber",
        graph.name(),
        graph.node_count(),
        graph.link_count(),
        total_km
    );
    match hamiltonian_cycle(&graph, None, DEFAULT_CYCLE_SEARCH_BUDGET) {
        Ok(c) => {
            let names: Vec<&str> = c.nodes().iter().map(|&n| graph.nodes()[n].name.as_str()).collect();
            println!("hamiltonian cycle ({:.0} km): {}", c.length_km(), names.join(" - "));
        }
        Err(e) => println!("no hamiltonian cycle: {e}"),
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run(args),
        Command::Topology { topology: name } => topology(name),
    }
}
