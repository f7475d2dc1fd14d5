//! Control plane: preprovisioning of static protected lightpaths, grooming,
//! dynamic provisioning and departures, plus the baseline algorithms.

mod grooming;
mod provision;
mod virtual_topology;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qop::{self, QopRecord, SegmentView, TimingParams};
use crate::rmlsa::{Lightpath, LightpathId, ModulationTable, ProtectionScheme, Rmlsa, SharedCycle};
use crate::spectrum::{SpectrumError, SpectrumState, DEFAULT_GUARD_SLOTS, DEFAULT_SLOTS};
use crate::topology::{hamiltonian_cycle, KPaths, NetworkGraph, NodeId, TopologyError, DEFAULT_CYCLE_SEARCH_BUDGET};

pub use provision::define_node_pairs;
pub use virtual_topology::VirtualTopology;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("spectrum fault: {0}")]
    Spectrum(#[from] SpectrumError),
    #[error("flow {0} is not active")]
    UnknownFlow(u64),
    #[error("flow {0} is already active")]
    DuplicateFlow(u64),
    #[error("shared protection cycle unavailable: {0}")]
    Cycle(String),
    #[error("invalid algorithm configuration: {0}")]
    Config(String),
}

impl From<TopologyError> for ControlError {
    fn from(e: TopologyError) -> Self {
        ControlError::Cycle(e.to_string())
    }
}

/// The compared protection algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Algorithm {
    PreprovDlpProvDpp,
    PreprovDppProvDpp,
    PreprovDlpProvDlp,
    ProvDpp,
    ProvDlp,
    HamPCycle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::PreprovDlpProvDpp,
        Algorithm::PreprovDppProvDpp,
        Algorithm::PreprovDlpProvDlp,
        Algorithm::ProvDpp,
        Algorithm::ProvDlp,
        Algorithm::HamPCycle,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Self::PreprovDlpProvDpp => "preprovDLP-provDPP",
            Self::PreprovDppProvDpp => "preprovDPP-provDPP",
            Self::PreprovDlpProvDlp => "preprovDLP-provDLP",
            Self::ProvDpp => "provDPP",
            Self::ProvDlp => "provDLP",
            Self::HamPCycle => "ham-p-cycle",
        }
    }

    pub fn preprov_scheme(&self) -> Option<ProtectionScheme> {
        match self {
            Self::PreprovDlpProvDpp | Self::PreprovDlpProvDlp => Some(ProtectionScheme::Dlp),
            Self::PreprovDppProvDpp => Some(ProtectionScheme::Dpp),
            Self::ProvDpp | Self::ProvDlp | Self::HamPCycle => None,
        }
    }

    pub fn prov_scheme(&self) -> ProtectionScheme {
        match self {
            Self::PreprovDlpProvDpp | Self::PreprovDppProvDpp | Self::ProvDpp => ProtectionScheme::Dpp,
            Self::PreprovDlpProvDlp | Self::ProvDlp => ProtectionScheme::Dlp,
            Self::HamPCycle => ProtectionScheme::Spp,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let known: Vec<&str> = Self::ALL.iter().map(Algorithm::id).collect();
                format!("unknown algorithm `{s}` (expected one of {})", known.join(", "))
            })
    }
}

impl TryFrom<String> for Algorithm {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> Self {
        a.id().to_string()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmConfig {
    pub algorithm: Algorithm,
    pub preprov_scheme: Option<ProtectionScheme>,
    pub prov_scheme: ProtectionScheme,
    /// Fraction of the fiber spectrum given to each preprovisioned lightpath
    /// (and to the shared cycle band for the p-cycle baseline).
    pub preprov_bw: f64,
    pub k: usize,
}

impl AlgorithmConfig {
    pub fn new(algorithm: Algorithm, preprov_bw: f64, k: usize) -> Result<Self, ControlError> {
        let cfg = Self {
            algorithm,
            preprov_scheme: algorithm.preprov_scheme(),
            prov_scheme: algorithm.prov_scheme(),
            preprov_bw,
            k,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        if !(0.0..=1.0).contains(&self.preprov_bw) {
            return Err(ControlError::Config(format!(
                "preprov_bw {} outside [0, 1]",
                self.preprov_bw
            )));
        }
        if self.k == 0 {
            return Err(ControlError::Config("k must be at least 1".into()));
        }
        if self.preprov_scheme == Some(ProtectionScheme::Spp) {
            return Err(ControlError::Config("preprovisioning supports DLP or DPP only".into()));
        }
        Ok(())
    }
}

/// Immutable per-topology context shared by every run: graph, k-shortest
/// routes and the optimum PST of each pair.
#[derive(Debug)]
pub struct Network {
    pub graph: NetworkGraph,
    pub kpaths: KPaths,
    pub timing: TimingParams,
    pub modulations: ModulationTable,
    optimum: HashMap<(NodeId, NodeId), Option<f64>>,
}

impl Network {
    pub fn new(graph: NetworkGraph, k: usize, timing: TimingParams) -> Self {
        Self::with_modulations(graph, k, timing, ModulationTable::default())
    }

    pub fn with_modulations(graph: NetworkGraph, k: usize, timing: TimingParams, modulations: ModulationTable) -> Self {
        let kpaths = KPaths::compute(&graph, k);
        let n = graph.node_count();
        let mut optimum = HashMap::with_capacity(n * n);
        for s in 0..n {
            for d in 0..n {
                if s != d {
                    optimum.insert((s, d), qop::optimum_st_pst(&graph, s, d, &timing).map(|(_, p)| p));
                }
            }
        }
        Self {
            graph,
            kpaths,
            timing,
            modulations,
            optimum,
        }
    }

    /// Optimum PST for a pair; `None` if the pair cannot be link-protected.
    pub fn optimum_pst(&self, source: NodeId, destination: NodeId) -> Option<f64> {
        self.optimum.get(&(source, destination)).copied().flatten()
    }
}

/// A client demand as seen by the control plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flow {
    pub id: u64,
    pub source: NodeId,
    pub destination: NodeId,
    pub rate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub lightpath: LightpathId,
    pub reversed: bool,
    pub newly_created: bool,
}

/// A flow mapped onto a chain of lightpaths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowConnection {
    pub flow_id: u64,
    pub source: NodeId,
    pub destination: NodeId,
    pub demand: f64,
    pub segments: Vec<Segment>,
}

impl FlowConnection {
    pub fn new_lightpaths(&self) -> impl Iterator<Item = LightpathId> + '_ {
        self.segments.iter().filter(|s| s.newly_created).map(|s| s.lightpath)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Arrival {
    Accepted(QopRecord),
    Blocked,
}

/// How a flow was served; useful for tracing the grooming pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ServedBy {
    GroomedSingleHop,
    GroomedMultiHop,
    GroomedWithNewLightpath,
    NewLightpath,
    NewMultiHop,
}

/// Mutable network state of one simulation run.
pub struct ControlPlane<'n> {
    net: &'n Network,
    config: AlgorithmConfig,
    guard_slots: usize,
    spectrum: SpectrumState,
    vt: VirtualTopology,
    cycle: Option<SharedCycle>,
    connections: HashMap<u64, FlowConnection>,
    static_ids: Vec<LightpathId>,
    last_route: Option<ServedBy>,
}

impl<'n> ControlPlane<'n> {
    /// Builds the run state, reserving the shared cycle band when the
    /// provisioning scheme is SPP. Preprovisioning is a separate step.
    pub fn new(
        net: &'n Network,
        config: AlgorithmConfig,
        slots: usize,
        guard_slots: usize,
    ) -> Result<Self, ControlError> {
        config.validate()?;
        let mut spectrum = SpectrumState::new(net.graph.link_count(), slots);
        let cycle = if config.prov_scheme == ProtectionScheme::Spp {
            let ham = hamiltonian_cycle(&net.graph, None, DEFAULT_CYCLE_SEARCH_BUDGET)?;
            let width = (config.preprov_bw * slots as f64).floor() as usize;
            let cycle = SharedCycle::reserve(&net.graph, &mut spectrum, ham, width, guard_slots, &net.modulations)
                .ok_or_else(|| ControlError::Cycle(format!("cannot reserve a {width}-slot band on the cycle")))?;
            Some(cycle)
        } else {
            None
        };
        Ok(Self {
            net,
            config,
            guard_slots,
            spectrum,
            vt: VirtualTopology::new(),
            cycle,
            connections: HashMap::new(),
            static_ids: Vec::new(),
            last_route: None,
        })
    }

    /// Default grid (320 slots, 2 guard slots) and modulation table.
    pub fn with_defaults(net: &'n Network, config: AlgorithmConfig) -> Result<Self, ControlError> {
        Self::new(net, config, DEFAULT_SLOTS, DEFAULT_GUARD_SLOTS)
    }

    pub fn network(&self) -> &Network {
        self.net
    }

    pub fn config(&self) -> &AlgorithmConfig {
        &self.config
    }

    pub fn spectrum(&self) -> &SpectrumState {
        &self.spectrum
    }

    /// Direct spectrum access, for constructing test scenarios.
    pub fn spectrum_mut(&mut self) -> &mut SpectrumState {
        &mut self.spectrum
    }

    pub fn virtual_topology(&self) -> &VirtualTopology {
        &self.vt
    }

    pub fn shared_cycle(&self) -> Option<&SharedCycle> {
        self.cycle.as_ref()
    }

    pub fn connection(&self, flow_id: u64) -> Option<&FlowConnection> {
        self.connections.get(&flow_id)
    }

    pub fn active_flows(&self) -> usize {
        self.connections.len()
    }

    pub fn static_lightpaths(&self) -> &[LightpathId] {
        &self.static_ids
    }

    /// How the most recent accepted flow was served.
    pub fn last_route(&self) -> Option<ServedBy> {
        self.last_route
    }

    pub(crate) fn rmlsa(&self) -> Rmlsa<'n> {
        Rmlsa {
            graph: &self.net.graph,
            kpaths: &self.net.kpaths,
            modulations: &self.net.modulations,
            guard_slots: self.guard_slots,
        }
    }

    /// Arrival handling: grooming tiers first, then provisioning.
    pub fn handle_arrival(&mut self, flow: &Flow) -> Result<Arrival, ControlError> {
        if self.connections.contains_key(&flow.id) {
            return Err(ControlError::DuplicateFlow(flow.id));
        }
        let served = if self.config.prov_scheme == ProtectionScheme::Spp {
            self.grooming_sh(flow)
                .map(|c| (c, ServedBy::GroomedSingleHop))
                .or_else(|| self.ham_p_cycle_provision(flow).map(|c| (c, ServedBy::NewLightpath)))
        } else {
            self.grooming_sh(flow)
                .map(|c| (c, ServedBy::GroomedSingleHop))
                .or_else(|| self.grooming_mh(flow).map(|c| (c, ServedBy::GroomedMultiHop)))
                .or_else(|| {
                    self.grooming_mh_new_lp(flow)
                        .map(|c| (c, ServedBy::GroomedWithNewLightpath))
                })
                .or_else(|| self.provision(flow))
        };
        let Some((conn, route)) = served else {
            return Ok(Arrival::Blocked);
        };
        let record = self.qop_record(&conn);
        self.last_route = Some(route);
        self.connections.insert(flow.id, conn);
        Ok(Arrival::Accepted(record))
    }

    fn qop_record(&self, conn: &FlowConnection) -> QopRecord {
        let views = self.segment_views(conn);
        let t = &self.net.timing;
        QopRecord {
            st: qop::connection_st(&views, t),
            expected_pst: qop::expected_pst(&views, t),
            optimum_st: 0.0,
            optimum_pst: self.net.optimum_pst(conn.source, conn.destination),
        }
    }

    pub fn segment_views<'a>(&'a self, conn: &FlowConnection) -> Vec<SegmentView<'a>> {
        conn.segments
            .iter()
            .map(|s| SegmentView {
                lightpath: self.vt.get(s.lightpath).expect("segment lightpath is active"),
                reversed: s.reversed,
                newly_created: s.newly_created,
            })
            .collect()
    }

    /// Releases the flow's capacity and tears down dynamic lightpaths left idle.
    pub fn handle_departure(&mut self, flow_id: u64) -> Result<(), ControlError> {
        let conn = self
            .connections
            .remove(&flow_id)
            .ok_or(ControlError::UnknownFlow(flow_id))?;
        for seg in &conn.segments {
            let lp = self.vt.get_mut(seg.lightpath).expect("segment lightpath is active");
            lp.residual += conn.demand;
            lp.flows -= 1;
            if lp.flows == 0 && !lp.is_static {
                let lp = self.vt.remove(seg.lightpath).expect("present");
                self.teardown(&lp)?;
            }
        }
        Ok(())
    }

    fn teardown(&mut self, lp: &Lightpath) -> Result<(), ControlError> {
        lp.release_spectrum(&mut self.spectrum)?;
        if let (Some(cycle), crate::rmlsa::ProtectionRecord::Spp { .. }) = (self.cycle.as_mut(), &lp.protection) {
            cycle.withdraw(&lp.route, lp.capacity);
        }
        Ok(())
    }

    /// Checks spectrum bookkeeping, capacity conservation, segment chaining
    /// and static persistence.
    pub fn audit(&self) -> Result<(), String> {
        self.spectrum.verify()?;
        let mut reserved: HashMap<LightpathId, (f64, usize)> = HashMap::new();
        for conn in self.connections.values() {
            let mut at = conn.source;
            for seg in &conn.segments {
                let lp = self
                    .vt
                    .get(seg.lightpath)
                    .ok_or_else(|| format!("flow {} uses missing lightpath {}", conn.flow_id, seg.lightpath))?;
                let (from, to) = if seg.reversed {
                    (lp.destination(), lp.source())
                } else {
                    (lp.source(), lp.destination())
                };
                if from != at {
                    return Err(format!("flow {} segments do not chain", conn.flow_id));
                }
                at = to;
                let e = reserved.entry(seg.lightpath).or_default();
                e.0 += conn.demand;
                e.1 += 1;
            }
            if at != conn.destination {
                return Err(format!("flow {} does not reach its destination", conn.flow_id));
            }
        }
        for lp in self.vt.iter() {
            let (sum, count) = reserved.get(&lp.id).copied().unwrap_or_default();
            if (sum + lp.residual - lp.capacity).abs() > 1e-6 || lp.residual < -1e-9 {
                return Err(format!("lightpath {} violates capacity conservation", lp.id));
            }
            if count != lp.flows {
                return Err(format!("lightpath {} flow count mismatch", lp.id));
            }
            if !lp.is_static && lp.flows == 0 {
                return Err(format!("idle dynamic lightpath {} was not torn down", lp.id));
            }
        }
        for id in &self.static_ids {
            if self.vt.get(*id).is_none_or(|lp| !lp.is_static) {
                return Err(format!("static lightpath {id} disappeared"));
            }
        }
        Ok(())
    }
}
