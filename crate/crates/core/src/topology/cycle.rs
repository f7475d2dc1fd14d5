use std::time::{Duration, Instant};

use super::{LinkId, NetworkGraph, NodeId, Route, TopologyError};

pub const DEFAULT_CYCLE_SEARCH_BUDGET: Duration = Duration::from_secs(10);

/// A closed cycle visiting every node once. `links[i]` joins `nodes[i]` and
/// `nodes[(i + 1) % n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HamiltonianCycle {
    nodes: Vec<NodeId>,
    links: Vec<LinkId>,
    position: Vec<usize>,
    length_m: u64,
}

impl HamiltonianCycle {
    pub fn from_order(graph: &NetworkGraph, order: &[NodeId]) -> Result<Self, TopologyError> {
        let n = graph.node_count();
        if order.len() != n {
            return Err(TopologyError::InvalidCycle(format!(
                "order lists {} nodes, topology has {n}",
                order.len()
            )));
        }
        if n < 3 {
            return Err(TopologyError::InvalidCycle("a cycle needs at least 3 nodes".into()));
        }
        let mut position = vec![usize::MAX; n];
        for (i, &node) in order.iter().enumerate() {
            if node >= n {
                return Err(TopologyError::InvalidCycle(format!("unknown node {node}")));
            }
            if position[node] != usize::MAX {
                return Err(TopologyError::InvalidCycle(format!("node {node} repeats")));
            }
            position[node] = i;
        }
        let mut links = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (order[i], order[(i + 1) % n]);
            let link = graph
                .link_between(a, b)
                .ok_or_else(|| TopologyError::InvalidCycle(format!("nodes {a} and {b} are not adjacent")))?;
            links.push(link);
        }
        let length_m = links.iter().map(|&l| graph.link_meters(l)).sum();
        Ok(Self {
            nodes: order.to_vec(),
            links,
            position,
            length_m,
        })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn links(&self) -> &[LinkId] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn length_km(&self) -> f64 {
        self.length_m as f64 / 1000.0
    }

    /// The arc from `from` to `to` walking the cycle forward (increasing
    /// position) or backward.
    pub fn arc(&self, graph: &NetworkGraph, from: NodeId, to: NodeId, forward: bool) -> Route {
        let n = self.nodes.len();
        let (start, end) = (self.position[from], self.position[to]);
        let mut nodes = vec![from];
        let mut links = Vec::new();
        let mut i = start;
        while i != end {
            if forward {
                links.push(self.links[i]);
                i = (i + 1) % n;
            } else {
                i = (i + n - 1) % n;
                links.push(self.links[i]);
            }
            nodes.push(self.nodes[i]);
        }
        Route::assemble(graph, nodes, links)
    }

    /// Both arcs joining `from` and `to`, forward first.
    pub fn arcs(&self, graph: &NetworkGraph, from: NodeId, to: NodeId) -> [Route; 2] {
        [self.arc(graph, from, to, true), self.arc(graph, from, to, false)]
    }
}

/// The configured cycle if given, otherwise a backtracking search bounded by `budget`.
pub fn hamiltonian_cycle(
    graph: &NetworkGraph,
    configured: Option<&[NodeId]>,
    budget: Duration,
) -> Result<HamiltonianCycle, TopologyError> {
    if let Some(order) = configured.or(graph.configured_cycle()) {
        return HamiltonianCycle::from_order(graph, order);
    }
    let n = graph.node_count();
    if n < 3 {
        return Err(TopologyError::NoHamiltonianCycle);
    }
    let deadline = Instant::now() + budget;
    let mut path = vec![0];
    let mut visited = vec![false; n];
    visited[0] = true;
    let mut steps = 0u64;
    if extend(graph, &mut path, &mut visited, deadline, &mut steps) {
        HamiltonianCycle::from_order(graph, &path)
    } else {
        Err(TopologyError::NoHamiltonianCycle)
    }
}

fn extend(
    graph: &NetworkGraph,
    path: &mut Vec<NodeId>,
    visited: &mut [bool],
    deadline: Instant,
    steps: &mut u64,
) -> bool {
    *steps += 1;
    if steps.is_multiple_of(4096) && Instant::now() > deadline {
        return false;
    }
    let last = *path.last().unwrap();
    if path.len() == visited.len() {
        return graph.link_between(last, path[0]).is_some();
    }
    // Warnsdorff-style ordering: try neighbors with fewest free neighbors first.
    let mut next: Vec<(usize, NodeId)> = graph
        .neighbors(last)
        .iter()
        .filter(|&&(v, _)| !visited[v])
        .map(|&(v, _)| (graph.neighbors(v).iter().filter(|&&(w, _)| !visited[w]).count(), v))
        .collect();
    next.sort_unstable();
    for (_, v) in next {
        visited[v] = true;
        path.push(v);
        if extend(graph, path, visited, deadline, steps) {
            return true;
        }
        path.pop();
        visited[v] = false;
        if steps.is_multiple_of(4096) && Instant::now() > deadline {
            return false;
        }
    }
    false
}
