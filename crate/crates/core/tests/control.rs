mod common;

use common::ring4;
use eonsim::bundled;
use eonsim::control::{
    define_node_pairs, Algorithm, AlgorithmConfig, Arrival, ControlPlane, Flow, Network, ServedBy, VirtualTopology,
};
use eonsim::qop::TimingParams;
use eonsim::rmlsa::{Lightpath, ModulationTable, ProtectionRecord, ProtectionScheme};
use eonsim::sim::pair_intensity;
use eonsim::spectrum::SlotRange;
use eonsim::topology::Route;

fn net(g: eonsim::NetworkGraph) -> Network {
    Network::new(g, 30, TimingParams::default())
}

fn plane(net: &Network, algorithm: Algorithm, bw: f64) -> ControlPlane<'_> {
    ControlPlane::with_defaults(net, AlgorithmConfig::new(algorithm, bw, 30).unwrap()).unwrap()
}

fn flow(id: u64, source: usize, destination: usize, rate: f64) -> Flow {
    Flow {
        id,
        source,
        destination,
        rate,
    }
}

fn accept(cp: &mut ControlPlane<'_>, f: Flow) -> eonsim::qop::QopRecord {
    match cp.handle_arrival(&f).unwrap() {
        Arrival::Accepted(r) => {
            cp.audit().unwrap();
            r
        }
        Arrival::Blocked => panic!("flow {} blocked", f.id),
    }
}

fn snapshot(cp: &ControlPlane<'_>) -> (eonsim::spectrum::SpectrumState, Vec<Lightpath>) {
    (cp.spectrum().clone(), cp.virtual_topology().iter().cloned().collect())
}

#[test]
fn node_pairs() {
    let g = ring4();
    assert_eq!(define_node_pairs(ProtectionScheme::Dlp, &g).len(), 4);
    assert_eq!(define_node_pairs(ProtectionScheme::Dpp, &g).len(), 6);

    let us = bundled::usanet();
    let pairs = define_node_pairs(ProtectionScheme::Dpp, &us);
    assert_eq!(pairs.len(), 24 * 23 / 2);
    let mut best = (f64::MIN, (0, 0));
    for i in 0..24 {
        for j in (i + 1)..24 {
            let t = pair_intensity(&us, i, j) + pair_intensity(&us, j, i);
            if t > best.0 {
                best = (t, (i, j));
            }
        }
    }
    assert_eq!(pairs[0], best.1);
}

#[test]
fn intensity_pair_sum_identity() {
    let g = bundled::usanet();
    let p = g.total_population() as f64;
    for i in 0..g.node_count() {
        for j in 0..g.node_count() {
            if i != j {
                let (pi, pj) = (g.nodes()[i].population as f64, g.nodes()[j].population as f64);
                let sum = pair_intensity(&g, i, j) + pair_intensity(&g, j, i);
                assert!((sum - pi * pj / (p * p)).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn zero_bandwidth_preprovisions_nothing() {
    let n = net(ring4());
    let mut cp = plane(&n, Algorithm::PreprovDlpProvDpp, 0.0);
    assert_eq!(cp.preprovision(), 0);
    assert!(cp.virtual_topology().is_empty());
    assert!(cp.spectrum().is_empty());
}

#[test]
fn dlp_preprovisioning_hand_trace() {
    let n = net(ring4());
    // 0.025 * 320 = 8 slots: 6 data slots of 16QAM = 300 Gb/s per lightpath.
    let mut cp = plane(&n, Algorithm::PreprovDlpProvDpp, 0.025);
    assert_eq!(cp.preprovision(), 4);
    let s = cp.spectrum();
    for link in 0..4 {
        assert_eq!(s.busy_count(link), 32, "link {link}: own primary plus three detours");
        assert!((0..8).all(|x| s.is_busy(link, x)));
        assert!((8..288).all(|x| !s.is_busy(link, x)));
    }
    let backups: Vec<(Vec<usize>, usize)> = cp
        .virtual_topology()
        .iter()
        .map(|lp| {
            assert!(lp.is_static);
            assert_eq!(lp.capacity, 300.0);
            let ProtectionRecord::Dlp(map) = &lp.protection else {
                panic!()
            };
            let b = map.values().next().unwrap();
            (b.route.nodes().to_vec(), b.slots.start)
        })
        .collect();
    assert_eq!(
        backups,
        vec![
            (vec![0, 3, 2, 1], 312),
            (vec![1, 0, 3, 2], 304),
            (vec![2, 1, 0, 3], 296),
            (vec![0, 1, 2, 3], 288),
        ]
    );
}

#[test]
fn usanet_dlp_attempts_every_link() {
    let n = net(bundled::usanet());
    let mut cp = plane(&n, Algorithm::PreprovDlpProvDpp, 0.35);
    let created = cp.preprovision();
    assert!(created <= 43);
    assert_eq!(cp.static_lightpaths().len(), created);
    cp.audit().unwrap();
}

#[test]
fn least_loaded_lightpath_wins() {
    let g = ring4();
    let m = ModulationTable::default();
    let route = Route::from_nodes(&g, &[0, 1]).unwrap();
    let make = |id, residual| Lightpath {
        id,
        route: route.clone(),
        slots: SlotRange::new(0, 5),
        modulation: m.formats()[0].clone(),
        capacity: 150.0,
        residual,
        is_static: true,
        protection: ProtectionRecord::Spp {
            arc: Route::from_nodes(&g, &[0, 3, 2, 1]).unwrap(),
            slots: SlotRange::new(0, 1),
        },
        flows: 0,
    };
    let mut vt = VirtualTopology::new();
    vt.insert(make(0, 60.0));
    vt.insert(make(1, 110.0));
    assert_eq!(vt.groomable(0, 1, 40.0), Some(1));
    assert_eq!(vt.groomable(1, 0, 110.0), Some(1));
    assert_eq!(vt.groomable(0, 1, 111.0), None);
    assert_eq!(vt.groomable(0, 2, 1.0), None);
}

#[test]
fn single_hop_grooming_end_to_end() {
    let n = net(ring4());
    let mut cp = plane(&n, Algorithm::ProvDpp, 0.0);
    accept(&mut cp, flow(1, 0, 1, 10.0));
    assert_eq!(cp.last_route(), Some(ServedBy::NewLightpath));
    let rec = accept(&mut cp, flow(2, 0, 1, 40.0));
    assert_eq!(cp.last_route(), Some(ServedBy::GroomedSingleHop));
    assert_eq!(rec.st, 0.0);
    let lp = cp.virtual_topology().iter().next().unwrap();
    assert_eq!(lp.residual, 0.0);
    assert_eq!(cp.virtual_topology().len(), 1);
}

#[test]
fn multi_hop_grooming() {
    let n = net(ring4());
    let mut cp = plane(&n, Algorithm::ProvDpp, 0.0);
    accept(&mut cp, flow(1, 0, 1, 10.0));
    accept(&mut cp, flow(2, 1, 2, 10.0));
    accept(&mut cp, flow(3, 0, 2, 10.0));
    assert_eq!(cp.last_route(), Some(ServedBy::GroomedMultiHop));
    let conn = cp.connection(3).unwrap();
    assert_eq!(conn.segments.len(), 2);
    let ends: Vec<(usize, usize)> = conn
        .segments
        .iter()
        .map(|s| {
            let lp = cp.virtual_topology().get(s.lightpath).unwrap();
            (lp.source(), lp.destination())
        })
        .collect();
    assert_eq!(ends, vec![(0, 1), (1, 2)]);
}

#[test]
fn multi_hop_needs_both_halves() {
    let n = net(ring4());
    let mut cp = plane(&n, Algorithm::ProvDpp, 0.0);
    accept(&mut cp, flow(1, 0, 1, 10.0));
    accept(&mut cp, flow(2, 0, 2, 10.0));
    assert_eq!(cp.last_route(), Some(ServedBy::NewLightpath));
}

#[test]
fn first_intermediate_along_shortest_route_wins() {
    let n = net(ring4());
    // Static lightpaths on every link make both B and D feasible.
    let mut cp = plane(&n, Algorithm::PreprovDlpProvDpp, 0.025);
    cp.preprovision();
    accept(&mut cp, flow(9, 0, 2, 10.0));
    assert_eq!(cp.last_route(), Some(ServedBy::GroomedMultiHop));
    let conn = cp.connection(9).unwrap();
    let first = cp.virtual_topology().get(conn.segments[0].lightpath).unwrap();
    assert_eq!(first.destination(), 1);
}

#[test]
fn new_head_onto_groomable_tail() {
    let n = net(ring4());
    let mut cp = plane(&n, Algorithm::ProvDpp, 0.0);
    accept(&mut cp, flow(1, 1, 2, 10.0));
    let rec = accept(&mut cp, flow(2, 0, 2, 10.0));
    assert_eq!(cp.last_route(), Some(ServedBy::GroomedWithNewLightpath));
    let conn = cp.connection(2).unwrap();
    assert!(conn.segments[0].newly_created && !conn.segments[1].newly_created);
    // New A-B lightpath: 100 km primary, 300 km backup; the backup dominates.
    assert_eq!(rec.st, 1500.0 + 40.0 + 40.0);
}

#[test]
fn blocked_attempts_leave_state_untouched() {
    let n = net(ring4());
    let mut cp = plane(&n, Algorithm::ProvDpp, 0.0);
    accept(&mut cp, flow(1, 1, 2, 10.0));
    // Saturate everything around node 0.
    for link in [0usize, 3] {
        let free: Vec<usize> = (0..320).filter(|&s| !cp.spectrum().is_busy(link, s)).collect();
        for s in free {
            cp.spectrum_mut().allocate(&[link], SlotRange::new(s, 1)).unwrap();
        }
    }
    let before = snapshot(&cp);
    assert_eq!(cp.handle_arrival(&flow(2, 0, 2, 10.0)).unwrap(), Arrival::Blocked);
    assert_eq!(snapshot(&cp), before);
    assert!(cp.connection(2).is_none());
}

#[test]
fn two_new_lightpaths_when_direct_fails() {
    let n = net(ring4());
    let cfg = AlgorithmConfig::new(Algorithm::ProvDpp, 0.0, 30).unwrap();
    let mut cp = ControlPlane::new(&n, cfg, 12, 2).unwrap();
    // Links: 0 = A-B, 1 = B-C, 2 = C-D, 3 = D-A. Windows of three slots.
    let busy = [(0, [3, 9]), (1, [0, 6]), (2, [0, 3]), (3, [0, 3])];
    for (link, starts) in busy {
        for s in starts {
            cp.spectrum_mut().allocate(&[link], SlotRange::new(s, 3)).unwrap();
        }
    }
    accept(&mut cp, flow(1, 0, 2, 10.0));
    assert_eq!(cp.last_route(), Some(ServedBy::NewMultiHop));
    let conn = cp.connection(1).unwrap();
    assert_eq!(conn.segments.len(), 2);
    assert!(conn.segments.iter().all(|s| s.newly_created));
}

#[test]
fn oversized_flow_blocks() {
    let n = net(ring4());
    let cfg = AlgorithmConfig::new(Algorithm::ProvDpp, 0.0, 30).unwrap();
    let mut cp = ControlPlane::new(&n, cfg, 8, 2).unwrap();
    assert_eq!(cp.handle_arrival(&flow(1, 0, 2, 400.0)).unwrap(), Arrival::Blocked);
    assert!(cp.spectrum().is_empty());
}

#[test]
fn static_flow_has_zero_setup_time() {
    let n = net(ring4());
    let mut cp = plane(&n, Algorithm::PreprovDlpProvDpp, 0.025);
    cp.preprovision();
    let rec = accept(&mut cp, flow(1, 0, 1, 10.0));
    assert_eq!(cp.last_route(), Some(ServedBy::GroomedSingleHop));
    assert_eq!(rec.st, 0.0);
    // Link A-B fails; its detour is three 100 km hops.
    assert_eq!(rec.expected_pst, 500.0 + 3000.0 + 80.0);
}

#[test]
fn fresh_lightpath_setup_time() {
    let n = net(ring4());
    let mut cp = plane(&n, Algorithm::ProvDpp, 0.0);
    let rec = accept(&mut cp, flow(1, 0, 2, 10.0));
    // Primary A-B-C and backup A-D-C, both 200 km.
    assert_eq!(rec.st, 1000.0 + 30.0 + 30.0);
    assert_eq!(rec.optimum_st, 0.0);
    assert_eq!(rec.optimum_pst, Some(3580.0));
}

#[test]
fn departures() {
    let n = net(ring4());
    let mut cp = plane(&n, Algorithm::PreprovDlpProvDpp, 0.025);
    cp.preprovision();
    let static_state = snapshot(&cp);

    accept(&mut cp, flow(1, 0, 2, 400.0));
    assert_eq!(cp.last_route(), Some(ServedBy::NewLightpath));
    cp.handle_departure(1).unwrap();
    cp.audit().unwrap();
    assert_eq!(snapshot(&cp), static_state, "dynamic lightpath and backup released");

    accept(&mut cp, flow(2, 0, 1, 100.0));
    accept(&mut cp, flow(3, 0, 1, 100.0));
    cp.handle_departure(2).unwrap();
    let lp = cp
        .virtual_topology()
        .get(cp.connection(3).unwrap().segments[0].lightpath)
        .unwrap();
    assert_eq!(lp.residual, 200.0);
    cp.handle_departure(3).unwrap();
    cp.audit().unwrap();
    assert_eq!(
        snapshot(&cp),
        static_state,
        "static lightpath persists with full residual"
    );
    assert!(cp.handle_departure(3).is_err());
}

#[test]
fn shared_flow_departure_keeps_lightpath() {
    let n = net(ring4());
    let mut cp = plane(&n, Algorithm::ProvDpp, 0.0);
    accept(&mut cp, flow(1, 0, 1, 10.0));
    accept(&mut cp, flow(2, 0, 1, 10.0));
    cp.handle_departure(1).unwrap();
    let lp = cp.virtual_topology().iter().next().unwrap();
    assert_eq!((lp.residual, lp.flows), (40.0, 1));
}

#[test]
fn p_cycle_backup_is_opposite_arc() {
    let n = net(ring4());
    let mut cp = plane(&n, Algorithm::HamPCycle, 0.1);
    let band = cp.shared_cycle().unwrap().slots();
    assert_eq!((band.start, band.width), (0, 32));
    accept(&mut cp, flow(1, 0, 2, 10.0));
    let lp = cp.virtual_topology().iter().next().unwrap();
    assert_eq!(lp.route.nodes(), &[0, 1, 2]);
    let ProtectionRecord::Spp { arc, .. } = &lp.protection else {
        panic!()
    };
    assert_eq!(arc.nodes(), &[0, 3, 2]);
}

#[test]
fn p_cycle_shares_one_reservation() {
    let n = net(ring4());
    let mut cp = plane(&n, Algorithm::HamPCycle, 0.1);
    let after_reserve = cp.spectrum().total_busy();
    accept(&mut cp, flow(1, 0, 1, 10.0));
    accept(&mut cp, flow(2, 2, 3, 10.0));
    // Only the two one-hop primaries (3 slots each) were added.
    assert_eq!(cp.spectrum().total_busy(), after_reserve + 6);
}

#[test]
fn p_cycle_rejects_overlapping_primary_when_band_is_full() {
    let n = net(ring4());
    // Six slots of BPSK: four data slots protect exactly one 50 Gb/s primary per link.
    let cfg = AlgorithmConfig::new(Algorithm::HamPCycle, 0.06, 30).unwrap();
    let mut cp = ControlPlane::new(&n, cfg, 100, 2).unwrap();
    assert_eq!(cp.shared_cycle().unwrap().capacity_gbps(), 50.0);
    accept(&mut cp, flow(1, 0, 2, 10.0));
    let before = snapshot(&cp);
    assert_eq!(cp.handle_arrival(&flow(2, 1, 3, 10.0)).unwrap(), Arrival::Blocked);
    assert_eq!(snapshot(&cp), before);
    cp.handle_departure(1).unwrap();
    accept(&mut cp, flow(3, 1, 3, 10.0));
}

#[test]
fn priority_order_groom_before_provision() {
    let n = net(bundled::usanet());
    let mut cp = plane(&n, Algorithm::PreprovDlpProvDpp, 0.05);
    cp.preprovision();
    let link = &n.graph.links()[0];
    let before = cp.virtual_topology().len();
    accept(&mut cp, flow(1, link.a, link.b, 10.0));
    assert_eq!(cp.last_route(), Some(ServedBy::GroomedSingleHop));
    assert_eq!(cp.virtual_topology().len(), before);
}
