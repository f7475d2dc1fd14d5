//! Discrete-event simulation of dynamic traffic over the control plane.

pub mod stats;
pub mod traffic;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::control::{AlgorithmConfig, Arrival, ControlError, ControlPlane, Flow, Network, ServedBy};
use crate::spectrum::{DEFAULT_GUARD_SLOTS, DEFAULT_SLOTS};

pub use stats::Estimate;
pub use traffic::{pair_intensity, uniform_granularities, Demand, Granularity, TrafficError, TrafficModel};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("request count must be at least 1")]
    NoRequests,
    #[error("state audit failed after event {event}: {reason}")]
    Audit { event: u64, reason: String },
}

/// Parameters of one simulation run.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub algorithm: AlgorithmConfig,
    pub load: f64,
    pub requests: usize,
    pub slots: usize,
    pub guard_slots: usize,
    pub granularities: Vec<Granularity>,
    /// Runs the full state audit after every event. Slow; meant for tests.
    pub audit: bool,
}

impl SimConfig {
    pub fn new(algorithm: AlgorithmConfig, load: f64, requests: usize) -> Self {
        Self {
            algorithm,
            load,
            requests,
            slots: DEFAULT_SLOTS,
            guard_slots: DEFAULT_GUARD_SLOTS,
            granularities: uniform_granularities(),
            audit: false,
        }
    }
}

/// Outcome of one replication.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub requests: usize,
    pub accepted: usize,
    pub blocked: usize,
    pub offered_gbps: f64,
    pub blocked_gbps: f64,
    pub bbr: f64,
    pub static_lightpaths: usize,
    /// Means over accepted demands, in microseconds.
    pub mean_st_us: f64,
    pub mean_expected_pst_us: f64,
    pub mean_unavailability_us: f64,
    /// Mean optimum (ST + PST) over accepted demands whose pair has one.
    pub mean_optimum_us: f64,
    /// `100 * (measured / optimum - 1)` over the same demands.
    pub overhead_pct: f64,
    pub served_by: BTreeMap<String, usize>,
    /// Dynamic lightpaths alive after the last departure; always 0.
    pub residual_dynamic_lightpaths: usize,
}

impl RunMetrics {
    /// Named scalar metrics exported per replication.
    pub fn scalars(&self) -> [(&'static str, f64); 7] {
        [
            ("bbr", self.bbr),
            ("overhead_pct", self.overhead_pct),
            ("mean_st_us", self.mean_st_us),
            ("mean_expected_pst_us", self.mean_expected_pst_us),
            ("mean_unavailability_us", self.mean_unavailability_us),
            ("mean_optimum_us", self.mean_optimum_us),
            ("static_lightpaths", self.static_lightpaths as f64),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Departure,
    Arrival,
}

#[derive(Debug)]
struct Event {
    time: f64,
    kind: Kind,
    id: u64,
}

impl Ord for Event {
    /// Reversed so `BinaryHeap` pops the earliest event; departures precede
    /// arrivals at equal times, then lower ids.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.kind.cmp(&self.kind))
            .then(other.id.cmp(&self.id))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

fn mean(sum: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn served_label(s: ServedBy) -> &'static str {
    match s {
        ServedBy::GroomedSingleHop => "groomed_single_hop",
        ServedBy::GroomedMultiHop => "groomed_multi_hop",
        ServedBy::GroomedWithNewLightpath => "groomed_with_new_lightpath",
        ServedBy::NewLightpath => "new_lightpath",
        ServedBy::NewMultiHop => "new_multi_hop",
    }
}

/// Runs one replication: preprovisioning, then every arrival and departure
/// in time order until the system drains.
pub fn run_simulation(net: &Network, config: &SimConfig, seed: u64) -> Result<RunMetrics, SimError> {
    if config.requests == 0 {
        return Err(SimError::NoRequests);
    }
    let model = TrafficModel::new(&net.graph, config.load, config.granularities.clone())?;
    let mut control = ControlPlane::new(net, config.algorithm.clone(), config.slots, config.guard_slots)?;
    let static_lightpaths = control.preprovision();

    let demands = model.generate(config.requests, seed);
    let mut queue: BinaryHeap<Event> = demands
        .iter()
        .map(|d| Event {
            time: d.arrival,
            kind: Kind::Arrival,
            id: d.id,
        })
        .collect();

    let mut accepted = 0;
    let mut offered_gbps = 0.0;
    let mut blocked_gbps = 0.0;
    let (mut st_sum, mut pst_sum) = (0.0, 0.0);
    let (mut measured_sum, mut optimum_sum, mut optimum_n) = (0.0, 0.0, 0usize);
    let mut served_by: BTreeMap<String, usize> = BTreeMap::new();

    while let Some(event) = queue.pop() {
        let demand = &demands[event.id as usize];
        match event.kind {
            Kind::Arrival => {
                offered_gbps += demand.rate;
                let flow = Flow {
                    id: demand.id,
                    source: demand.source,
                    destination: demand.destination,
                    rate: demand.rate,
                };
                match control.handle_arrival(&flow)? {
                    Arrival::Accepted(record) => {
                        accepted += 1;
                        st_sum += record.st;
                        pst_sum += record.expected_pst;
                        if let Some(opt) = record.optimum_pst {
                            measured_sum += record.st + record.expected_pst;
                            optimum_sum += record.optimum_st + opt;
                            optimum_n += 1;
                        }
                        if let Some(route) = control.last_route() {
                            *served_by.entry(served_label(route).to_owned()).or_default() += 1;
                        }
                        queue.push(Event {
                            time: demand.arrival + demand.holding,
                            kind: Kind::Departure,
                            id: demand.id,
                        });
                    }
                    Arrival::Blocked => {
                        log::debug!(
                            "blocked demand {} {}->{} at {} Gb/s",
                            demand.id,
                            demand.source,
                            demand.destination,
                            demand.rate
                        );
                        blocked_gbps += demand.rate;
                    }
                }
            }
            Kind::Departure => control.handle_departure(demand.id)?,
        }
        if config.audit {
            control.audit().map_err(|reason| SimError::Audit {
                event: event.id,
                reason,
            })?;
        }
    }

    let residual_dynamic_lightpaths = control.virtual_topology().len() - control.static_lightpaths().len();
    debug_assert_eq!(control.active_flows(), 0);
    let overhead_pct = if optimum_sum > 0.0 {
        100.0 * (measured_sum / optimum_sum - 1.0)
    } else {
        0.0
    };
    Ok(RunMetrics {
        seed,
        requests: config.requests,
        accepted,
        blocked: config.requests - accepted,
        offered_gbps,
        blocked_gbps,
        bbr: if offered_gbps > 0.0 {
            blocked_gbps / offered_gbps
        } else {
            0.0
        },
        static_lightpaths,
        mean_st_us: mean(st_sum, accepted),
        mean_expected_pst_us: mean(pst_sum, accepted),
        mean_unavailability_us: mean(st_sum + pst_sum, accepted),
        mean_optimum_us: mean(optimum_sum, optimum_n),
        overhead_pct,
        served_by,
        residual_dynamic_lightpaths,
    })
}

/// Per-replication metrics and their summary estimates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Replicated {
    pub runs: Vec<RunMetrics>,
    pub summary: BTreeMap<&'static str, Estimate>,
}

impl Replicated {
    pub fn from_runs(runs: Vec<RunMetrics>) -> Self {
        let mut summary = BTreeMap::new();
        if let Some(first) = runs.first() {
            for (i, (name, _)) in first.scalars().iter().enumerate() {
                let samples: Vec<f64> = runs.iter().map(|r| r.scalars()[i].1).collect();
                summary.insert(*name, Estimate::from_samples(&samples));
            }
        }
        Self { runs, summary }
    }

    pub fn estimate(&self, metric: &str) -> Option<&Estimate> {
        self.summary.get(metric)
    }
}

/// One independent run per seed, in parallel; results keep seed order.
pub fn run_replications(net: &Network, config: &SimConfig, seeds: &[u64]) -> Result<Replicated, SimError> {
    let runs = seeds
        .par_iter()
        .map(|&seed| run_simulation(net, config, seed))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Replicated::from_runs(runs))
}

/// Seeds for `replications` runs derived from a base seed.
pub fn replication_seeds(base: u64, replications: usize) -> Vec<u64> {
    (0..replications as u64).map(|r| base.wrapping_add(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::Algorithm;
    use crate::qop::TimingParams;
    use crate::topology::NetworkGraph;

    fn ring() -> Network {
        let g = NetworkGraph::from_edges(4, &[(0, 1, 300.0), (1, 2, 300.0), (2, 3, 300.0), (3, 0, 300.0)]).unwrap();
        Network::new(g, 3, TimingParams::default())
    }

    #[test]
    fn event_order_prefers_departures() {
        let mut heap = BinaryHeap::new();
        heap.push(Event {
            time: 1.0,
            kind: Kind::Arrival,
            id: 0,
        });
        heap.push(Event {
            time: 1.0,
            kind: Kind::Departure,
            id: 5,
        });
        heap.push(Event {
            time: 0.5,
            kind: Kind::Arrival,
            id: 9,
        });
        heap.push(Event {
            time: 1.0,
            kind: Kind::Departure,
            id: 2,
        });
        let order: Vec<(Kind, u64)> = std::iter::from_fn(|| heap.pop()).map(|e| (e.kind, e.id)).collect();
        assert_eq!(
            order,
            vec![
                (Kind::Arrival, 9),
                (Kind::Departure, 2),
                (Kind::Departure, 5),
                (Kind::Arrival, 0)
            ]
        );
    }

    #[test]
    fn drains_to_static_state() {
        let net = ring();
        for algorithm in Algorithm::ALL {
            let mut cfg = SimConfig::new(AlgorithmConfig::new(algorithm, 0.15, 3).unwrap(), 4.0, 300);
            cfg.audit = true;
            let m = run_simulation(&net, &cfg, 1).unwrap();
            assert_eq!(m.accepted + m.blocked, 300, "{algorithm}");
            assert_eq!(m.residual_dynamic_lightpaths, 0, "{algorithm}");
            assert!((0.0..=1.0).contains(&m.bbr));
        }
    }

    #[test]
    fn same_seed_same_metrics() {
        let net = ring();
        let cfg = SimConfig::new(
            AlgorithmConfig::new(Algorithm::PreprovDlpProvDpp, 0.15, 3).unwrap(),
            10.0,
            400,
        );
        assert_eq!(
            run_simulation(&net, &cfg, 7).unwrap(),
            run_simulation(&net, &cfg, 7).unwrap()
        );
    }

    #[test]
    fn zero_requests_rejected() {
        let net = ring();
        let cfg = SimConfig::new(AlgorithmConfig::new(Algorithm::ProvDpp, 0.0, 3).unwrap(), 1.0, 0);
        assert!(matches!(run_simulation(&net, &cfg, 0), Err(SimError::NoRequests)));
    }
}
