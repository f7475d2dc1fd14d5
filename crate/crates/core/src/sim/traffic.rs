//! Population-based traffic model and demand generation.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{NetworkGraph, NodeId};

pub const DEFAULT_RATES_GBPS: [f64; 6] = [10.0, 20.0, 40.0, 100.0, 200.0, 400.0];

/// Independent random streams of one replication.
const STREAM_ARRIVALS: u64 = 1;
const STREAM_HOLDING: u64 = 2;
const STREAM_PAIRS: u64 = 3;
const STREAM_RATES: u64 = 4;

#[derive(Debug, Error, PartialEq)]
pub enum TrafficError {
    #[error("load must be positive, got {0}")]
    Load(f64),
    #[error("granularity list must be non-empty with positive rates and weights")]
    Granularities,
    #[error("traffic needs at least two nodes")]
    TooFewNodes,
}

/// One rate class and its relative weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Granularity {
    pub rate_gbps: f64,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

pub fn uniform_granularities() -> Vec<Granularity> {
    DEFAULT_RATES_GBPS
        .iter()
        .map(|&rate_gbps| Granularity { rate_gbps, weight: 1.0 })
        .collect()
}

/// Traffic intensity from `i` to `j` per unit bandwidth:
/// `P_i / (P_i + P_j) * P_i * P_j / P^2`.
pub fn pair_intensity(graph: &NetworkGraph, i: NodeId, j: NodeId) -> f64 {
    let p = graph.total_population() as f64;
    let pi = graph.nodes()[i].population as f64;
    let pj = graph.nodes()[j].population as f64;
    pi / (pi + pj) * (pi * pj / (p * p))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Demand {
    pub id: u64,
    pub source: NodeId,
    pub destination: NodeId,
    pub rate: f64,
    pub arrival: f64,
    pub holding: f64,
}

#[derive(Clone, Debug)]
pub struct TrafficModel {
    pairs: Vec<(NodeId, NodeId)>,
    probabilities: Vec<f64>,
    load: f64,
    granularities: Vec<Granularity>,
}

impl TrafficModel {
    /// Ordered pairs weighted by intensity; unit mean holding time, so the
    /// arrival rate equals `load` (Erlang).
    pub fn new(graph: &NetworkGraph, load: f64, granularities: Vec<Granularity>) -> Result<Self, TrafficError> {
        if !(load.is_finite() && load > 0.0) {
            return Err(TrafficError::Load(load));
        }
        if granularities.is_empty()
            || granularities
                .iter()
                .any(|g| !(g.rate_gbps > 0.0 && g.weight > 0.0 && g.rate_gbps.is_finite() && g.weight.is_finite()))
        {
            return Err(TrafficError::Granularities);
        }
        let n = graph.node_count();
        if n < 2 {
            return Err(TrafficError::TooFewNodes);
        }
        let pairs: Vec<(NodeId, NodeId)> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        let weights: Vec<f64> = pairs.iter().map(|&(i, j)| pair_intensity(graph, i, j)).collect();
        let total: f64 = weights.iter().sum();
        Ok(Self {
            pairs,
            probabilities: weights.iter().map(|w| w / total).collect(),
            load,
            granularities,
        })
    }

    pub fn load(&self) -> f64 {
        self.load
    }

    pub fn mean_holding(&self) -> f64 {
        1.0
    }

    pub fn pairs(&self) -> &[(NodeId, NodeId)] {
        &self.pairs
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, source: NodeId, destination: NodeId) -> f64 {
        self.pairs
            .iter()
            .position(|&p| p == (source, destination))
            .map_or(0.0, |i| self.probabilities[i])
    }

    /// `count` demands with Poisson arrivals; deterministic for a given seed.
    pub fn generate(&self, count: usize, seed: u64) -> Vec<Demand> {
        let stream = |s: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s);
            rng
        };
        let (mut arrivals, mut holding, mut pairs, mut rates) = (
            stream(STREAM_ARRIVALS),
            stream(STREAM_HOLDING),
            stream(STREAM_PAIRS),
            stream(STREAM_RATES),
        );
        let inter_arrival = Exp::new(self.load).expect("positive load");
        let hold = Exp::new(1.0 / self.mean_holding()).expect("positive mean");
        let pair_dist = WeightedIndex::new(&self.probabilities).expect("positive weights");
        let rate_dist = WeightedIndex::new(self.granularities.iter().map(|g| g.weight)).expect("positive weights");
        let mut clock = 0.0;
        (0..count as u64)
            .map(|id| {
                clock += inter_arrival.sample(&mut arrivals);
                let (source, destination) = self.pairs[pair_dist.sample(&mut pairs)];
                Demand {
                    id,
                    source,
                    destination,
                    rate: self.granularities[rate_dist.sample(&mut rates)].rate_gbps,
                    arrival: clock,
                    holding: hold.sample(&mut holding),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_nodes_use_one_pair() {
        let g = NetworkGraph::from_edges(2, &[(0, 1, 10.0)]).unwrap();
        let m = TrafficModel::new(&g, 5.0, uniform_granularities()).unwrap();
        let demands = m.generate(200, 3);
        assert!(demands
            .iter()
            .all(|d| (d.source, d.destination) == (0, 1) || (d.source, d.destination) == (1, 0)));
        assert!(demands.windows(2).all(|w| w[0].arrival <= w[1].arrival));
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = NetworkGraph::from_edges(2, &[(0, 1, 10.0)]).unwrap();
        assert_eq!(
            TrafficModel::new(&g, 0.0, uniform_granularities()).unwrap_err(),
            TrafficError::Load(0.0)
        );
        assert_eq!(
            TrafficModel::new(&g, 1.0, vec![]).unwrap_err(),
            TrafficError::Granularities
        );
    }

    #[test]
    fn deterministic_per_seed() {
        let g = NetworkGraph::from_edges(3, &[(0, 1, 10.0), (1, 2, 10.0)]).unwrap();
        let m = TrafficModel::new(&g, 2.0, uniform_granularities()).unwrap();
        assert_eq!(m.generate(50, 9), m.generate(50, 9));
        assert_ne!(m.generate(50, 9), m.generate(50, 10));
    }
}
