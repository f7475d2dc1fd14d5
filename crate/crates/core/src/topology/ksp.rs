use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use rayon::prelude::*;

use super::{ordered, LinkId, NetworkGraph, NodeId, Route};

/// Dijkstra label. Ordering is (length, hops, node sequence), which is
/// preserved under extension, so the first label settled at a node is optimal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Label {
    length_m: u64,
    hops: usize,
    nodes: Vec<NodeId>,
    links: Vec<LinkId>,
}

fn dijkstra(
    graph: &NetworkGraph,
    source: NodeId,
    destination: NodeId,
    banned_nodes: &[bool],
    banned_links: &[bool],
) -> Option<(Vec<NodeId>, Vec<LinkId>)> {
    let n = graph.node_count();
    let mut settled = vec![false; n];
    let mut best: Vec<Option<(u64, usize)>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    heap.push(Reverse(Label {
        length_m: 0,
        hops: 0,
        nodes: vec![source],
        links: Vec::new(),
    }));
    while let Some(Reverse(label)) = heap.pop() {
        let u = *label.nodes.last().unwrap();
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if u == destination {
            return Some((label.nodes, label.links));
        }
        for &(v, link) in graph.neighbors(u) {
            if settled[v] || banned_nodes[v] || banned_links[link] {
                continue;
            }
            let length_m = label.length_m + graph.link_meters(link);
            let hops = label.hops + 1;
            // Prune labels strictly dominated on (length, hops); equal keys still
            // compete on node sequence inside the heap.
            if let Some(b) = best[v] {
                if (length_m, hops) > b {
                    continue;
                }
            }
            best[v] = Some((length_m, hops));
            let mut nodes = label.nodes.clone();
            nodes.push(v);
            let mut links = label.links.clone();
            links.push(link);
            heap.push(Reverse(Label {
                length_m,
                hops,
                nodes,
                links,
            }));
        }
    }
    None
}

/// Shortest route by length (ties: fewer hops, then lexicographic node sequence).
pub fn shortest_path(graph: &NetworkGraph, source: NodeId, destination: NodeId) -> Option<Route> {
    shortest_path_avoiding(graph, source, destination, &[])
}

/// Shortest route on the graph with `excluded` links removed.
pub fn shortest_path_avoiding(
    graph: &NetworkGraph,
    source: NodeId,
    destination: NodeId,
    excluded: &[LinkId],
) -> Option<Route> {
    if source == destination {
        return None;
    }
    let banned_nodes = vec![false; graph.node_count()];
    let mut banned_links = vec![false; graph.link_count()];
    for &l in excluded {
        banned_links[l] = true;
    }
    dijkstra(graph, source, destination, &banned_nodes, &banned_links)
        .map(|(nodes, links)| Route::assemble(graph, nodes, links))
}

/// Yen's k shortest loop-free paths, ordered by length, then hops, then node sequence.
pub fn yen_ksp(graph: &NetworkGraph, source: NodeId, destination: NodeId, k: usize) -> Vec<Route> {
    if source == destination || k == 0 {
        return Vec::new();
    }
    let Some(first) = shortest_path(graph, source, destination) else {
        return Vec::new();
    };
    let mut accepted = vec![first];
    let mut known: HashSet<Vec<NodeId>> = HashSet::from([accepted[0].nodes().to_vec()]);
    let mut candidates: BTreeMap<(u64, usize, Vec<NodeId>), Route> = BTreeMap::new();
    let mut banned_nodes = vec![false; graph.node_count()];
    let mut banned_links = vec![false; graph.link_count()];

    while accepted.len() < k {
        let last = accepted.last().unwrap().clone();
        for j in 0..last.hop_count() {
            let spur = last.nodes()[j];
            let root = &last.nodes()[..=j];
            banned_nodes.iter_mut().for_each(|b| *b = false);
            banned_links.iter_mut().for_each(|b| *b = false);
            for path in &accepted {
                if path.hop_count() > j && &path.nodes()[..=j] == root {
                    banned_links[path.links()[j]] = true;
                }
            }
            for &n in &root[..j] {
                banned_nodes[n] = true;
            }
            let Some((spur_nodes, spur_links)) = dijkstra(graph, spur, destination, &banned_nodes, &banned_links)
            else {
                continue;
            };
            let mut nodes = root[..j].to_vec();
            nodes.extend_from_slice(&spur_nodes);
            if known.contains(&nodes) {
                continue;
            }
            let mut links = last.links()[..j].to_vec();
            links.extend_from_slice(&spur_links);
            let route = Route::assemble(graph, nodes, links);
            let key = (route.length_m(), route.hop_count(), route.nodes().to_vec());
            candidates.entry(key).or_insert(route);
        }
        let Some((_, next)) = candidates.pop_first() else {
            break;
        };
        known.insert(next.nodes().to_vec());
        accepted.push(next);
    }
    accepted
}

/// First candidate sharing no link with the protected element.
pub fn disjoint_backup<'a>(protected: &[LinkId], candidates: &'a [Route]) -> Option<&'a Route> {
    candidates.iter().find(|r| !r.shares_link_with(protected))
}

/// Precomputed k-shortest routes for every ordered node pair.
///
/// Each unordered pair is computed once from its lower-numbered endpoint; the
/// opposite direction holds the same routes reversed.
#[derive(Clone, Debug)]
pub struct KPaths {
    k: usize,
    table: HashMap<(NodeId, NodeId), Vec<Route>>,
}

impl KPaths {
    pub fn compute(graph: &NetworkGraph, k: usize) -> Self {
        let n = graph.node_count();
        let pairs: Vec<(NodeId, NodeId)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let forward: Vec<((NodeId, NodeId), Vec<Route>)> = pairs
            .into_par_iter()
            .map(|(a, b)| ((a, b), yen_ksp(graph, a, b, k)))
            .collect();
        let mut table = HashMap::with_capacity(forward.len() * 2);
        for ((a, b), routes) in forward {
            table.insert((b, a), routes.iter().map(Route::reversed).collect());
            table.insert((a, b), routes);
        }
        Self { k, table }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, source: NodeId, destination: NodeId) -> &[Route] {
        self.table.get(&(source, destination)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Routes for the endpoints of `link`, oriented `from` → other endpoint.
    pub fn for_link(&self, graph: &NetworkGraph, link: LinkId, from: NodeId) -> &[Route] {
        let l = graph.link(link);
        let to = l.other(from).expect("node is an endpoint of link");
        debug_assert_eq!(ordered(from, to), ordered(l.a, l.b));
        self.get(from, to)
    }
}
