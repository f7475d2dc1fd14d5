//! Experiment orchestration: sweeps over algorithms, preprovisioning
//! bandwidth and load, with CSV and JSON export.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};
use crate::control::{Algorithm, AlgorithmConfig, ControlError, Network};
use crate::sim::{run_replications, Replicated, SimConfig, SimError};

pub const CSV_HEADER: &str = "algorithm,preprov_bw,load,metric,replications,mean,ci95";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{algorithm} at load {load}: {source}")]
    Run {
        algorithm: Algorithm,
        load: f64,
        #[source]
        source: SimError,
    },
    #[error("invalid algorithm parameters: {0}")]
    Algorithm(#[from] ControlError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot serialize results: {0}")]
    Json(#[from] serde_json::Error),
}

/// Whether the algorithm's behaviour depends on `preprov_bw`.
pub fn uses_preprov_bw(algorithm: Algorithm) -> bool {
    algorithm.preprov_scheme().is_some() || algorithm == Algorithm::HamPCycle
}

/// One sweep point with its replications.
#[derive(Clone, Debug, Serialize)]
pub struct ResultRow {
    pub algorithm: Algorithm,
    /// `None` for algorithms that ignore the parameter.
    pub preprov_bw: Option<f64>,
    pub load: f64,
    #[serde(flatten)]
    pub result: Replicated,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

pub fn build_network(cfg: &ExperimentConfig) -> Result<Network, ConfigError> {
    let graph = cfg.load_topology()?;
    Ok(Network::with_modulations(
        graph,
        cfg.k,
        cfg.timing,
        cfg.modulations.clone(),
    ))
}

/// Every (algorithm, preprov_bw, load) point, in configuration order.
pub fn sweep_points(cfg: &ExperimentConfig) -> Vec<(Algorithm, Option<f64>, f64)> {
    let mut points = Vec::new();
    for &algorithm in &cfg.algorithms {
        let bws: Vec<Option<f64>> = if uses_preprov_bw(algorithm) {
            cfg.preprov_bw.iter().copied().map(Some).collect()
        } else {
            vec![None]
        };
        for &bw in &bws {
            for &load in &cfg.loads {
                points.push((algorithm, bw, load));
            }
        }
    }
    points
}

/// Runs the sweep without touching the filesystem.
pub fn run_points(cfg: &ExperimentConfig, net: &Network) -> Result<Vec<ResultRow>, ExperimentError> {
    let seeds = cfg.seeds();
    let mut rows = Vec::new();
    for (algorithm, preprov_bw, load) in sweep_points(cfg) {
        let alg = AlgorithmConfig::new(algorithm, preprov_bw.unwrap_or(0.0), cfg.k)?;
        let sim = SimConfig {
            algorithm: alg,
            load,
            requests: cfg.requests,
            slots: cfg.slots,
            guard_slots: cfg.guard_slots,
            granularities: cfg.granularities.clone(),
            audit: false,
        };
        log::info!("running {algorithm} preprov_bw={preprov_bw:?} load={load}");
        let result = run_replications(net, &sim, &seeds).map_err(|source| ExperimentError::Run {
            algorithm,
            load,
            source,
        })?;
        if let Some(bbr) = result.estimate("bbr") {
            log::info!("  bbr = {:.6}", bbr.mean);
        }
        rows.push(ResultRow {
            algorithm,
            preprov_bw,
            load,
            result,
        });
    }
    Ok(rows)
}

/// Plot-ready CSV; the first line is the only one that varies between runs.
pub fn render_csv(rows: &[ResultRow], generated_at: u64) -> String {
    let mut out = format!("# generated_at_unix={generated_at}\n{CSV_HEADER}\n");
    for row in rows {
        let bw = row.preprov_bw.map(|b| b.to_string()).unwrap_or_default();
        for (metric, est) in &row.result.summary {
            let ci = est.ci95.map(|c| c.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.algorithm, bw, row.load, metric, est.n, est.mean, ci
            )
            .expect("writing to a String");
        }
    }
    out
}

#[derive(Serialize)]
struct JsonReport<'a> {
    generated_at_unix: u64,
    config: &'a ExperimentConfig,
    topology: &'a str,
    results: &'a [ResultRow],
}

pub fn render_json(
    cfg: &ExperimentConfig,
    net: &Network,
    rows: &[ResultRow],
    generated_at: u64,
) -> Result<String, serde_json::Error> {
    serde_json::to_string_pretty(&JsonReport {
        generated_at_unix: generated_at,
        config: cfg,
        topology: net.graph.name(),
        results: rows,
    })
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes both files through temporaries so an aborted export leaves nothing behind.
fn write_outputs(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>, ExperimentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let staged: Vec<(PathBuf, PathBuf)> = files
        .iter()
        .map(|(name, _)| (dir.join(format!(".{name}.tmp")), dir.join(name)))
        .collect();
    let cleanup = |staged: &[(PathBuf, PathBuf)]| {
        for (tmp, _) in staged {
            let _ = fs::remove_file(tmp);
        }
    };
    for ((tmp, _), (_, body)) in staged.iter().zip(files) {
        if let Err(e) = fs::write(tmp, body) {
            cleanup(&staged);
            return Err(io_err(tmp)(e));
        }
    }
    for (tmp, dest) in &staged {
        if let Err(e) = fs::rename(tmp, dest) {
            cleanup(&staged);
            return Err(io_err(dest)(e));
        }
    }
    Ok(staged.into_iter().map(|(_, dest)| dest).collect())
}

/// Validates the configuration, runs the sweep and writes
/// `results.csv` and `results.json` into `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    cfg.validate()?;
    let net = build_network(cfg)?;
    let rows = run_points(cfg, &net)?;
    let generated_at = now_unix();
    let csv = render_csv(&rows, generated_at);
    let json = render_json(cfg, &net, &rows, generated_at)?;
    let paths = write_outputs(&cfg.out, &[("results.csv", csv), ("results.json", json)])?;
    Ok(ExperimentOutput {
        rows,
        csv_path: paths[0].clone(),
        json_path: paths[1].clone(),
    })
}
