mod common;

use common::{all_simple_paths, line3, pruned_distance, random_graph, ring4};
use eonsim::bundled;
use eonsim::topology::{
    disjoint_backup, hamiltonian_cycle, yen_ksp, HamiltonianCycle, KPaths, NetworkGraph, Route,
    DEFAULT_CYCLE_SEARCH_BUDGET,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn assert_route_invariants(g: &NetworkGraph, r: &Route) {
    assert_eq!(r.hop_count(), r.links().len());
    assert_eq!(r.nodes().len(), r.links().len() + 1);
    let mut seen = r.nodes().to_vec();
    seen.sort_unstable();
    seen.dedup();
    assert_eq!(seen.len(), r.nodes().len(), "route repeats a node");
    let km: f64 = r.links().iter().map(|&l| g.link(l).length_km).sum();
    assert!((km - r.length_km()).abs() < 1e-6);
    assert!(r.is_valid_in(g));
}

#[test]
fn line_has_single_route() {
    let g = line3();
    let routes = yen_ksp(&g, 0, 2, 3);
    assert_eq!(routes.len(), 1);
    assert_eq!(routes[0].nodes(), &[0, 1, 2]);
    assert_eq!(routes[0].length_km(), 160.0);
}

#[test]
fn ring_has_two_equal_routes() {
    let g = ring4();
    let routes = yen_ksp(&g, 0, 2, 30);
    assert_eq!(routes.len(), 2);
    assert!(routes.iter().all(|r| r.length_km() == 200.0));
}

#[test]
fn ring_backup_is_opposite_side() {
    let g = ring4();
    let routes = yen_ksp(&g, 0, 2, 30);
    let primary = Route::from_nodes(&g, &[0, 1, 2]).unwrap();
    let backup = disjoint_backup(primary.links(), &routes).unwrap();
    assert_eq!(backup.nodes(), &[0, 3, 2]);
}

#[test]
fn line_has_no_backup() {
    let g = line3();
    let routes = yen_ksp(&g, 0, 2, 30);
    assert!(disjoint_backup(routes[0].links(), &routes).is_none());
}

#[test]
fn usanet_subgraph_matches_enumeration() {
    let full = bundled::usanet();
    // Induced subgraph on the first six nodes that keeps it connected.
    let keep: Vec<usize> = (0..6).collect();
    let edges: Vec<(usize, usize, f64)> = full
        .links()
        .iter()
        .filter(|l| keep.contains(&l.a) && keep.contains(&l.b))
        .map(|l| (l.a, l.b, l.length_km))
        .collect();
    let Ok(g) = NetworkGraph::from_edges(6, &edges) else {
        panic!("first six USANet nodes should induce a connected subgraph");
    };
    for s in 0..6 {
        for d in 0..6 {
            if s == d {
                continue;
            }
            let got: Vec<Vec<usize>> = yen_ksp(&g, s, d, 30).iter().map(|r| r.nodes().to_vec()).collect();
            let want: Vec<Vec<usize>> = all_simple_paths(&g, s, d).into_iter().take(30).map(|p| p.1).collect();
            assert_eq!(got, want, "{s}->{d}");
        }
    }
}

#[test]
fn usanet_link_backups_match_pruned_dijkstra() {
    let g = bundled::usanet();
    let kp = KPaths::compute(&g, 30);
    for link in g.links() {
        let candidates = kp.get(link.a, link.b);
        let oracle = pruned_distance(&g, link.a, link.b, &[link.id]);
        let backup = disjoint_backup(&[link.id], candidates);
        match (backup, oracle) {
            (Some(b), Some(m)) => {
                assert_eq!(b.length_m(), m, "link {}", link.id);
                assert!(!b.contains_link(link.id));
            }
            (None, None) => {}
            (b, o) => panic!(
                "link {}: backup {:?} vs oracle {:?}",
                link.id,
                b.map(|r| r.length_m()),
                o
            ),
        }
    }
}

#[test]
fn bundled_cycles_follow_adjacency() {
    for g in [bundled::usanet(), bundled::paneuro()] {
        let order = g.configured_cycle().expect("bundled files carry a cycle").to_vec();
        assert_eq!(order.len(), g.node_count());
        for i in 0..order.len() {
            let (a, b) = (order[i], order[(i + 1) % order.len()]);
            assert!(g.link_between(a, b).is_some(), "{}: {a}-{b} not adjacent", g.name());
        }
        let c = hamiltonian_cycle(&g, None, DEFAULT_CYCLE_SEARCH_BUDGET).unwrap();
        assert_eq!(c.nodes(), order.as_slice());
    }
}

#[test]
fn ring_cycle_is_the_ring() {
    let g = ring4();
    let c = hamiltonian_cycle(&g, None, DEFAULT_CYCLE_SEARCH_BUDGET).unwrap();
    assert_eq!(c.len(), 4);
    assert_eq!(c.length_km(), 400.0);
}

#[test]
fn configured_order_on_complete_graph() {
    let g = NetworkGraph::from_edges(
        4,
        &[
            (0, 1, 1.0),
            (0, 2, 1.0),
            (0, 3, 1.0),
            (1, 2, 1.0),
            (1, 3, 1.0),
            (2, 3, 1.0),
        ],
    )
    .unwrap();
    let c = HamiltonianCycle::from_order(&g, &[0, 1, 2, 3]).unwrap();
    let want: Vec<_> = [(0, 1), (1, 2), (2, 3), (3, 0)]
        .iter()
        .map(|&(a, b)| g.link_between(a, b).unwrap())
        .collect();
    assert_eq!(c.links(), want.as_slice());
    assert!(HamiltonianCycle::from_order(&g, &[0, 1, 2]).is_err());
}

#[test]
fn search_finds_cycle_without_configuration() {
    let g = bundled::paneuro();
    let bare = NetworkGraph::from_edges(
        g.node_count(),
        &g.links().iter().map(|l| (l.a, l.b, l.length_km)).collect::<Vec<_>>(),
    )
    .unwrap();
    assert!(bare.configured_cycle().is_none());
    let c = hamiltonian_cycle(&bare, None, DEFAULT_CYCLE_SEARCH_BUDGET).unwrap();
    let mut nodes = c.nodes().to_vec();
    nodes.sort_unstable();
    assert_eq!(nodes, (0..g.node_count()).collect::<Vec<_>>());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn yen_matches_enumeration(seed in any::<u64>(), n in 2usize..=7, extra in 0usize..10, k in 1usize..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, extra);
        let (s, d) = (0, n - 1);
        let got = yen_ksp(&g, s, d, k);
        for r in &got {
            assert_route_invariants(&g, r);
        }
        prop_assert!(got.windows(2).all(|w| w[0].length_m() <= w[1].length_m()));
        let want: Vec<Vec<usize>> = all_simple_paths(&g, s, d).into_iter().take(k).map(|p| p.1).collect();
        let got: Vec<Vec<usize>> = got.iter().map(|r| r.nodes().to_vec()).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn backups_are_disjoint(seed in any::<u64>(), n in 3usize..=8, extra in 0usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, extra);
        let routes = yen_ksp(&g, 0, n - 1, 10);
        if let Some(b) = disjoint_backup(routes[0].links(), &routes) {
            prop_assert!(!b.shares_link_with(routes[0].links()));
        }
    }
}
