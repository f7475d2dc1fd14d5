//! Simulator for survivable elastic optical networks that combines
//! preprovisioned protected lightpaths with traffic grooming and dynamic
//! protected provisioning, and measures blocking, setup time and
//! protection switching time against the optimum.
//!
//! The crate is organised bottom-up:
//!
//! - [`topology`]: graphs, routes, k-shortest paths, Hamiltonian cycles.
//! - [`spectrum`]: per-link slot occupancy with First-Fit and Last-Fit.
//! - [`rmlsa`]: modulation selection, slot sizing and protected lightpath creation.
//! - [`qop`]: setup-time and protection-switching-time accounting.
//! - [`control`]: preprovisioning, grooming, provisioning and departures.
//! - [`sim`]: traffic generation, the event loop and replications.
//! - [`config`] and [`experiment`]: experiment files, sweeps and result export.

pub mod config;
pub mod control;
pub mod experiment;
pub mod qop;
pub mod rmlsa;
pub mod sim;
pub mod spectrum;
pub mod topology;

pub use config::{ConfigError, ExperimentConfig};
pub use control::{Algorithm, AlgorithmConfig, ControlPlane, Network};
pub use experiment::{run_experiment, ExperimentError, ExperimentOutput};
pub use sim::{run_replications, run_simulation, RunMetrics, SimConfig};
pub use topology::NetworkGraph;

/// Topologies shipped with the crate, addressable by name.
pub mod bundled {
    use crate::topology::{NetworkGraph, TopologyError};

    pub const USANET: &str = include_str!("../data/usanet.json");
    pub const PANEURO: &str = include_str!("../data/paneuro.json");

    pub const NAMES: [&str; 2] = ["usanet", "paneuro"];

    pub fn source(name: &str) -> Option<&'static str> {
        match name.to_ascii_lowercase().as_str() {
            "usanet" => Some(USANET),
            "paneuro" => Some(PANEURO),
            _ => None,
        }
    }

    pub fn load(name: &str) -> Option<Result<NetworkGraph, TopologyError>> {
        source(name).map(NetworkGraph::from_json_str)
    }

    pub fn usanet() -> NetworkGraph {
        NetworkGraph::from_json_str(USANET).expect("bundled topology is valid")
    }

    pub fn paneuro() -> NetworkGraph {
        NetworkGraph::from_json_str(PANEURO).expect("bundled topology is valid")
    }
}
