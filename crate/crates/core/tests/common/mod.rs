//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use eonsim::spectrum::SpectrumState;
use eonsim::topology::{LinkId, NetworkGraph, NodeId};
use rand::Rng;

/// Integer meters, matching how routes accumulate length.
pub fn meters(km: f64) -> u64 {
    (km * 1000.0).round() as u64
}

/// Every loop-free path as (length_m, nodes), sorted by length, hops, then
/// node sequence.
pub fn all_simple_paths(g: &NetworkGraph, s: NodeId, d: NodeId) -> Vec<(u64, Vec<NodeId>)> {
    fn walk(
        g: &NetworkGraph,
        at: NodeId,
        d: NodeId,
        len: u64,
        path: &mut Vec<NodeId>,
        seen: &mut Vec<bool>,
        out: &mut Vec<(u64, Vec<NodeId>)>,
    ) {
        if at == d {
            out.push((len, path.clone()));
            return;
        }
        for &(next, link) in g.neighbors(at) {
            if !seen[next] {
                seen[next] = true;
                path.push(next);
                walk(g, next, d, len + meters(g.link(link).length_km), path, seen, out);
                path.pop();
                seen[next] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut seen = vec![false; g.node_count()];
    seen[s] = true;
    walk(g, s, d, 0, &mut vec![s], &mut seen, &mut out);
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.len().cmp(&b.1.len())).then(a.1.cmp(&b.1)));
    out
}

/// Plain O(n^2) Dijkstra distance in meters with some links removed.
pub fn pruned_distance(g: &NetworkGraph, s: NodeId, d: NodeId, removed: &[LinkId]) -> Option<u64> {
    let n = g.node_count();
    let mut dist = vec![u64::MAX; n];
    let mut done = vec![false; n];
    dist[s] = 0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&v| !done[v] && dist[v] != u64::MAX)
            .min_by_key(|&v| dist[v])?;
        if u == d {
            return Some(dist[u]);
        }
        done[u] = true;
        for &(v, link) in g.neighbors(u) {
            if removed.contains(&link) {
                continue;
            }
            let nd = dist[u] + meters(g.link(link).length_km);
            if nd < dist[v] {
                dist[v] = nd;
            }
        }
    }
    None
}

/// Lowest (or highest) feasible window start by checking every window.
pub fn scan_window(state: &SpectrumState, links: &[LinkId], width: usize, last: bool) -> Option<usize> {
    if width == 0 || width > state.slots() {
        return None;
    }
    let free = |start: usize| {
        links
            .iter()
            .all(|&l| (start..start + width).all(|s| !state.is_busy(l, s)))
    };
    let starts = 0..=state.slots() - width;
    if last {
        starts.rev().find(|&s| free(s))
    } else {
        starts.into_iter().find(|&s| free(s))
    }
}

/// Connected random graph: a random spanning tree plus extra edges, lengths
/// in whole kilometers.
pub fn random_graph(rng: &mut impl Rng, n: usize, extra: usize) -> NetworkGraph {
    let mut edges: Vec<(NodeId, NodeId, f64)> = Vec::new();
    let has = |a: NodeId, b: NodeId, edges: &Vec<(NodeId, NodeId, f64)>| {
        edges.iter().any(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a))
    };
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v, rng.gen_range(1..=20) as f64 * 50.0));
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b && !has(a, b, &edges) {
            edges.push((a, b, rng.gen_range(1..=20) as f64 * 50.0));
        }
    }
    NetworkGraph::from_edges(n, &edges).expect("random graph is valid")
}

/// 4-node ring A–B–C–D–A with 100 km links.
pub fn ring4() -> NetworkGraph {
    NetworkGraph::from_edges(4, &[(0, 1, 100.0), (1, 2, 100.0), (2, 3, 100.0), (3, 0, 100.0)]).unwrap()
}

/// 3-node line A–B–C with 80 km links.
pub fn line3() -> NetworkGraph {
    NetworkGraph::from_edges(3, &[(0, 1, 80.0), (1, 2, 80.0)]).unwrap()
}
