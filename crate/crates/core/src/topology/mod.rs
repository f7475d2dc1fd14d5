//! Physical network model: nodes, bidirectional fiber links, routes, and
//! the path computations built on them (k-shortest paths, disjoint backups,
//! Hamiltonian cycles).

mod cycle;
mod ksp;

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cycle::{hamiltonian_cycle, HamiltonianCycle, DEFAULT_CYCLE_SEARCH_BUDGET};
pub use ksp::{disjoint_backup, shortest_path, shortest_path_avoiding, yen_ksp, KPaths};

pub type NodeId = usize;
pub type LinkId = usize;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("cannot read topology file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed topology file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("topology has no nodes")]
    Empty,
    #[error("node ids must be contiguous from 0: position {position} holds id {id}")]
    NodeIds { position: usize, id: NodeId },
    #[error("node {0} must have a positive population")]
    Population(NodeId),
    #[error("link {id}: {reason}")]
    Link { id: LinkId, reason: String },
    #[error("more than one link joins nodes {0} and {1}")]
    DuplicateLink(NodeId, NodeId),
    #[error("topology is not connected")]
    Disconnected,
    #[error("invalid Hamiltonian cycle: {0}")]
    InvalidCycle(String),
    #[error("no Hamiltonian cycle found")]
    NoHamiltonianCycle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub name: String,
    pub population: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub a: NodeId,
    pub b: NodeId,
    pub length_km: f64,
}

impl Link {
    /// The endpoint opposite `node`, if `node` is an endpoint.
    pub fn other(&self, node: NodeId) -> Option<NodeId> {
        if node == self.a {
            Some(self.b)
        } else if node == self.b {
            Some(self.a)
        } else {
            None
        }
    }
}

/// On-disk topology layout. Unknown keys (such as provenance notes) are ignored.
#[derive(Debug, Serialize, Deserialize)]
pub struct TopologyFile {
    #[serde(default)]
    pub name: Option<String>,
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    #[serde(default)]
    pub hamiltonian_cycle: Option<Vec<NodeId>>,
}

/// Immutable network graph. Links are undirected and usable in both directions.
#[derive(Clone, Debug)]
pub struct NetworkGraph {
    name: String,
    nodes: Vec<Node>,
    links: Vec<Link>,
    link_meters: Vec<u64>,
    adjacency: Vec<Vec<(NodeId, LinkId)>>,
    pair_index: HashMap<(NodeId, NodeId), LinkId>,
    configured_cycle: Option<Vec<NodeId>>,
}

impl NetworkGraph {
    pub fn new(name: impl Into<String>, nodes: Vec<Node>, links: Vec<Link>) -> Result<Self, TopologyError> {
        if nodes.is_empty() {
            return Err(TopologyError::Empty);
        }
        for (position, node) in nodes.iter().enumerate() {
            if node.id != position {
                return Err(TopologyError::NodeIds { position, id: node.id });
            }
            if node.population == 0 {
                return Err(TopologyError::Population(node.id));
            }
        }
        let n = nodes.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut pair_index = HashMap::with_capacity(links.len());
        let mut link_meters = Vec::with_capacity(links.len());
        for (position, link) in links.iter().enumerate() {
            let bad = |reason: &str| TopologyError::Link {
                id: link.id,
                reason: reason.to_string(),
            };
            if link.id != position {
                return Err(bad("link ids must be contiguous from 0"));
            }
            if link.a >= n || link.b >= n {
                return Err(bad("endpoint is not a known node"));
            }
            if link.a == link.b {
                return Err(bad("self-loop"));
            }
            if !(link.length_km.is_finite() && link.length_km > 0.0) {
                return Err(bad("length must be positive"));
            }
            let key = ordered(link.a, link.b);
            if pair_index.insert(key, link.id).is_some() {
                return Err(TopologyError::DuplicateLink(key.0, key.1));
            }
            adjacency[link.a].push((link.b, link.id));
            adjacency[link.b].push((link.a, link.id));
            link_meters.push((link.length_km * 1000.0).round() as u64);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let graph = Self {
            name: name.into(),
            nodes,
            links,
            link_meters,
            adjacency,
            pair_index,
            configured_cycle: None,
        };
        if !graph.is_connected() {
            return Err(TopologyError::Disconnected);
        }
        Ok(graph)
    }

    /// Builds a graph from `(a, b, length_km)` triples; every node gets population 1.
    pub fn from_edges(node_count: usize, edges: &[(NodeId, NodeId, f64)]) -> Result<Self, TopologyError> {
        let nodes = (0..node_count)
            .map(|id| Node {
                id,
                name: format!("n{id}"),
                population: 1,
            })
            .collect();
        let links = edges
            .iter()
            .enumerate()
            .map(|(id, &(a, b, length_km))| Link { id, a, b, length_km })
            .collect();
        Self::new("custom", nodes, links)
    }

    pub fn from_json_str(text: &str) -> Result<Self, TopologyError> {
        let file: TopologyFile = serde_json::from_str(text)?;
        let graph = Self::new(file.name.unwrap_or_else(|| "unnamed".into()), file.nodes, file.links)?;
        match file.hamiltonian_cycle {
            Some(order) => graph.with_cycle(order),
            None => Ok(graph),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, TopologyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| TopologyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    /// Attaches a configured Hamiltonian cycle order, validated edge by edge.
    pub fn with_cycle(mut self, order: Vec<NodeId>) -> Result<Self, TopologyError> {
        HamiltonianCycle::from_order(&self, &order)?;
        self.configured_cycle = Some(order);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id]
    }

    pub(crate) fn link_meters(&self, id: LinkId) -> u64 {
        self.link_meters[id]
    }

    /// `(neighbor, link)` pairs sorted by neighbor id.
    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, LinkId)] {
        &self.adjacency[node]
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.pair_index.get(&ordered(a, b)).copied()
    }

    pub fn configured_cycle(&self) -> Option<&[NodeId]> {
        self.configured_cycle.as_deref()
    }

    pub fn total_population(&self) -> u64 {
        self.nodes.iter().map(|n| n.population).sum()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.node_count()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

pub(crate) fn ordered(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A loop-free path over physical links.
///
/// Lengths are accumulated in whole meters so that route comparison is exact
/// and independent of summation order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Route {
    nodes: Vec<NodeId>,
    links: Vec<LinkId>,
    #[serde(skip)]
    link_km: Vec<OrderedKm>,
    length_m: u64,
}

/// f64 wrapper so `Route` can derive `Eq`/`Hash`; lengths are always finite.
#[derive(Clone, Copy, Debug, PartialEq)]
struct OrderedKm(f64);

impl Eq for OrderedKm {}

impl std::hash::Hash for OrderedKm {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl Route {
    /// Builds a route from a node sequence. Returns `None` if consecutive
    /// nodes are not adjacent, a node repeats, or fewer than two nodes are given.
    pub fn from_nodes(graph: &NetworkGraph, nodes: &[NodeId]) -> Option<Route> {
        if nodes.len() < 2 {
            return None;
        }
        let mut seen = vec![false; graph.node_count()];
        for &n in nodes {
            if n >= graph.node_count() || std::mem::replace(&mut seen[n], true) {
                return None;
            }
        }
        let links = nodes
            .windows(2)
            .map(|w| graph.link_between(w[0], w[1]))
            .collect::<Option<Vec<_>>>()?;
        Some(Self::assemble(graph, nodes.to_vec(), links))
    }

    pub(crate) fn assemble(graph: &NetworkGraph, nodes: Vec<NodeId>, links: Vec<LinkId>) -> Route {
        let link_km = links.iter().map(|&l| OrderedKm(graph.link(l).length_km)).collect();
        let length_m = links.iter().map(|&l| graph.link_meters(l)).sum();
        Route {
            nodes,
            links,
            link_km,
            length_m,
        }
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn destination(&self) -> NodeId {
        *self.nodes.last().expect("route has at least two nodes")
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn links(&self) -> &[LinkId] {
        &self.links
    }

    pub fn hop_count(&self) -> usize {
        self.links.len()
    }

    pub fn length_m(&self) -> u64 {
        self.length_m
    }

    pub fn length_km(&self) -> f64 {
        self.length_m as f64 / 1000.0
    }

    /// Per-link lengths in traversal order.
    pub fn link_km(&self) -> Vec<f64> {
        self.link_km.iter().map(|k| k.0).collect()
    }

    pub fn contains_link(&self, link: LinkId) -> bool {
        self.links.contains(&link)
    }

    pub fn shares_link_with(&self, links: &[LinkId]) -> bool {
        self.links.iter().any(|l| links.contains(l))
    }

    pub fn reversed(&self) -> Route {
        let mut r = self.clone();
        r.nodes.reverse();
        r.links.reverse();
        r.link_km.reverse();
        r
    }

    /// Sort key: length, then hop count, then node sequence.
    pub(crate) fn rank_key(&self) -> (u64, usize, &[NodeId]) {
        (self.length_m, self.links.len(), &self.nodes)
    }

    /// Checks the structural route invariants against `graph`.
    pub fn is_valid_in(&self, graph: &NetworkGraph) -> bool {
        Route::from_nodes(graph, &self.nodes).is_some_and(|r| r.links == self.links && r.length_m == self.length_m)
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.nodes.iter().map(|n| n.to_string()).collect();
        write!(f, "{} ({} km)", parts.join("-"), self.length_km())
    }
}
