//! Routing, modulation and spectrum assignment for protected lightpaths.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectrum::{SlotRange, SpectrumState, SLOT_WIDTH_GHZ};
use crate::topology::{shortest_path_avoiding, HamiltonianCycle, KPaths, LinkId, NetworkGraph, NodeId, Route};

const EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationFormat {
    pub name: String,
    pub bits_per_symbol: u32,
    pub reach_km: f64,
}

impl ModulationFormat {
    pub fn new(name: &str, bits_per_symbol: u32, reach_km: f64) -> Self {
        Self {
            name: name.to_string(),
            bits_per_symbol,
            reach_km,
        }
    }

    /// Gb/s carried by one 12.5 GHz slot.
    pub fn slot_capacity_gbps(&self) -> f64 {
        SLOT_WIDTH_GHZ * self.bits_per_symbol as f64
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModulationError {
    #[error("modulation table is empty")]
    Empty,
    #[error("modulation {0}: bits per symbol and reach must be positive")]
    NonPositive(String),
    #[error("modulation reach must strictly decrease as bits per symbol increase ({0} vs {1})")]
    NotMonotone(String, String),
}

/// Modulation formats ordered from most to least spectrally efficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ModulationFormat>", into = "Vec<ModulationFormat>")]
pub struct ModulationTable {
    formats: Vec<ModulationFormat>,
}

impl ModulationTable {
    pub fn new(mut formats: Vec<ModulationFormat>) -> Result<Self, ModulationError> {
        if formats.is_empty() {
            return Err(ModulationError::Empty);
        }
        if let Some(f) = formats
            .iter()
            .find(|f| f.bits_per_symbol == 0 || !(f.reach_km.is_finite() && f.reach_km > 0.0))
        {
            return Err(ModulationError::NonPositive(f.name.clone()));
        }
        formats.sort_by_key(|f| std::cmp::Reverse(f.bits_per_symbol));
        for w in formats.windows(2) {
            if w[0].bits_per_symbol == w[1].bits_per_symbol || w[0].reach_km >= w[1].reach_km {
                return Err(ModulationError::NotMonotone(w[0].name.clone(), w[1].name.clone()));
            }
        }
        Ok(Self { formats })
    }

    pub fn formats(&self) -> &[ModulationFormat] {
        &self.formats
    }

    /// Most efficient format whose reach covers `length_km` (boundary inclusive).
    pub fn select(&self, length_km: f64) -> Option<&ModulationFormat> {
        self.formats.iter().find(|f| length_km <= f.reach_km)
    }

    pub fn max_reach_km(&self) -> f64 {
        self.formats.last().map_or(0.0, |f| f.reach_km)
    }
}

impl Default for ModulationTable {
    fn default() -> Self {
        Self::new(vec![
            ModulationFormat::new("16QAM", 4, 1000.0),
            ModulationFormat::new("8QAM", 3, 2000.0),
            ModulationFormat::new("QPSK", 2, 4000.0),
            ModulationFormat::new("BPSK", 1, 8000.0),
        ])
        .expect("default table is valid")
    }
}

impl TryFrom<Vec<ModulationFormat>> for ModulationTable {
    type Error = ModulationError;

    fn try_from(v: Vec<ModulationFormat>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<ModulationTable> for Vec<ModulationFormat> {
    fn from(t: ModulationTable) -> Self {
        t.formats
    }
}

/// Data slots for `rate_gbps`; at least one.
pub fn data_slots_needed(rate_gbps: f64, modulation: &ModulationFormat) -> usize {
    let exact = rate_gbps / modulation.slot_capacity_gbps();
    ((exact - EPS).ceil() as usize).max(1)
}

/// Total slot width for `rate_gbps` including the guard band.
pub fn slots_needed(rate_gbps: f64, modulation: &ModulationFormat, guard_slots: usize) -> usize {
    data_slots_needed(rate_gbps, modulation) + guard_slots
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProtectionScheme {
    #[serde(rename = "DPP")]
    Dpp,
    #[serde(rename = "DLP")]
    Dlp,
    #[serde(rename = "SPP")]
    Spp,
}

impl fmt::Display for ProtectionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dpp => "DPP",
            Self::Dlp => "DLP",
            Self::Spp => "SPP",
        })
    }
}

impl FromStr for ProtectionScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "DPP" => Ok(Self::Dpp),
            "DLP" => Ok(Self::Dlp),
            "SPP" => Ok(Self::Spp),
            other => Err(format!("unknown protection scheme `{other}`")),
        }
    }
}

/// A dedicated backup: route, its own slot range and modulation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BackupPath {
    pub route: Route,
    pub slots: SlotRange,
    pub modulation: ModulationFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ProtectionRecord {
    Dpp(BackupPath),
    /// Keyed by the protected primary link.
    Dlp(BTreeMap<LinkId, BackupPath>),
    /// Arc of the shared cycle; its slots belong to the cycle reservation.
    Spp {
        arc: Route,
        slots: SlotRange,
    },
}

impl ProtectionRecord {
    pub fn scheme(&self) -> ProtectionScheme {
        match self {
            Self::Dpp(_) => ProtectionScheme::Dpp,
            Self::Dlp(_) => ProtectionScheme::Dlp,
            Self::Spp { .. } => ProtectionScheme::Spp,
        }
    }

    /// Dedicated backups owning spectrum.
    pub fn dedicated(&self) -> Vec<&BackupPath> {
        match self {
            Self::Dpp(b) => vec![b],
            Self::Dlp(map) => map.values().collect(),
            Self::Spp { .. } => Vec::new(),
        }
    }
}

pub type LightpathId = u64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lightpath {
    pub id: LightpathId,
    pub route: Route,
    pub slots: SlotRange,
    pub modulation: ModulationFormat,
    pub capacity: f64,
    pub residual: f64,
    pub is_static: bool,
    pub protection: ProtectionRecord,
    /// Flows currently groomed onto this lightpath.
    pub flows: usize,
}

impl Lightpath {
    pub fn source(&self) -> NodeId {
        self.route.source()
    }

    pub fn destination(&self) -> NodeId {
        self.route.destination()
    }

    /// Whether the lightpath joins `a` and `b` (either orientation).
    pub fn joins(&self, a: NodeId, b: NodeId) -> bool {
        (self.source() == a && self.destination() == b) || (self.source() == b && self.destination() == a)
    }

    /// Spectrum owned by this lightpath: the primary plus dedicated backups.
    pub fn allocations(&self) -> Vec<(&[LinkId], SlotRange)> {
        let mut out = vec![(self.route.links(), self.slots)];
        out.extend(
            self.protection
                .dedicated()
                .into_iter()
                .map(|b| (b.route.links(), b.slots)),
        );
        out
    }

    /// Slot-link product of everything this lightpath owns.
    pub fn slot_usage(&self) -> usize {
        self.allocations().iter().map(|(links, r)| links.len() * r.width).sum()
    }

    pub fn release_spectrum(&self, spectrum: &mut SpectrumState) -> Result<(), crate::spectrum::SpectrumError> {
        for (links, range) in self.allocations().into_iter().rev() {
            spectrum.release(links, range)?;
        }
        Ok(())
    }
}

/// A preconfigured protection cycle whose slot band is shared by every
/// SPP-protected primary.
///
/// Sharing is capacity-aware: for each link, the summed capacity of protected
/// primaries crossing it must fit the band, since one link failure activates
/// all of them at once.
#[derive(Clone, Debug)]
pub struct SharedCycle {
    cycle: HamiltonianCycle,
    slots: SlotRange,
    capacity_gbps: f64,
    protected_load: Vec<f64>,
}

impl SharedCycle {
    /// Reserves `width` slots First-Fit on every cycle link. The band is
    /// modulated with the most robust format since arcs may span the whole cycle.
    pub fn reserve(
        graph: &NetworkGraph,
        spectrum: &mut SpectrumState,
        cycle: HamiltonianCycle,
        width: usize,
        guard_slots: usize,
        modulations: &ModulationTable,
    ) -> Option<Self> {
        if width <= guard_slots {
            return None;
        }
        let range = spectrum.find_first_fit(cycle.links(), width)?;
        spectrum.allocate(cycle.links(), range).ok()?;
        let robust = modulations.formats().last().expect("table is non-empty");
        Some(Self {
            cycle,
            slots: range,
            capacity_gbps: (width - guard_slots) as f64 * robust.slot_capacity_gbps(),
            protected_load: vec![0.0; graph.link_count()],
        })
    }

    pub fn cycle(&self) -> &HamiltonianCycle {
        &self.cycle
    }

    pub fn slots(&self) -> SlotRange {
        self.slots
    }

    pub fn capacity_gbps(&self) -> f64 {
        self.capacity_gbps
    }

    pub fn protected_load(&self, link: LinkId) -> f64 {
        self.protected_load[link]
    }

    /// The cycle arc between the primary's endpoints that avoids every primary
    /// link; the shorter one if both do.
    pub fn backup_arc(&self, graph: &NetworkGraph, primary: &Route) -> Option<Route> {
        let [fwd, back] = self.cycle.arcs(graph, primary.source(), primary.destination());
        let ok_fwd = !fwd.shares_link_with(primary.links());
        let ok_back = !back.shares_link_with(primary.links());
        match (ok_fwd, ok_back) {
            (true, true) => Some(if back.rank_key() < fwd.rank_key() { back } else { fwd }),
            (true, false) => Some(fwd),
            (false, true) => Some(back),
            (false, false) => None,
        }
    }

    pub fn admits(&self, primary: &Route, capacity: f64) -> bool {
        primary
            .links()
            .iter()
            .all(|&l| self.protected_load[l] + capacity <= self.capacity_gbps + EPS)
    }

    pub fn commit(&mut self, primary: &Route, capacity: f64) {
        for &l in primary.links() {
            self.protected_load[l] += capacity;
        }
    }

    pub fn withdraw(&mut self, primary: &Route, capacity: f64) {
        for &l in primary.links() {
            self.protected_load[l] = (self.protected_load[l] - capacity).max(0.0);
        }
    }
}

/// How a new lightpath is dimensioned.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sizing {
    /// Smallest slot count carrying this rate on the chosen modulation.
    Rate(f64),
    /// A fixed number of data slots (guard band added on top).
    DataSlots(usize),
}

/// Routing context shared by all lightpath creations of one run.
#[derive(Clone, Copy)]
pub struct Rmlsa<'a> {
    pub graph: &'a NetworkGraph,
    pub kpaths: &'a KPaths,
    pub modulations: &'a ModulationTable,
    pub guard_slots: usize,
}

impl<'a> Rmlsa<'a> {
    /// Creates a protected lightpath `source` → `destination`.
    ///
    /// Candidate primaries are tried in k-shortest order; the first whose
    /// primary (First-Fit) and every backup (Last-Fit) allocate wins. On
    /// `None` the spectrum is bit-identical to its state before the call.
    #[allow(clippy::too_many_arguments)]
    pub fn new_lightpath(
        &self,
        spectrum: &mut SpectrumState,
        source: NodeId,
        destination: NodeId,
        sizing: Sizing,
        scheme: ProtectionScheme,
        cycle: Option<&SharedCycle>,
        id: LightpathId,
    ) -> Option<Lightpath> {
        if scheme == ProtectionScheme::Spp && cycle.is_none() {
            return None;
        }
        let candidates = self.kpaths.get(source, destination);
        for primary in candidates {
            let Some(modulation) = self.modulations.select(primary.length_km()) else {
                continue;
            };
            let (data_slots, capacity) = match sizing {
                Sizing::Rate(rate) => {
                    let d = data_slots_needed(rate, modulation);
                    (d, d as f64 * modulation.slot_capacity_gbps())
                }
                Sizing::DataSlots(d) if d > 0 => (d, d as f64 * modulation.slot_capacity_gbps()),
                Sizing::DataSlots(_) => return None,
            };
            let width = data_slots + self.guard_slots;
            let spp_arc = match (scheme, cycle) {
                (ProtectionScheme::Spp, Some(c)) => {
                    if !c.admits(primary, capacity) {
                        continue;
                    }
                    match c.backup_arc(self.graph, primary) {
                        Some(arc) => Some((arc, c.slots())),
                        None => continue,
                    }
                }
                _ => None,
            };
            let Some(range) = spectrum.find_first_fit(primary.links(), width) else {
                continue;
            };
            spectrum
                .allocate(primary.links(), range)
                .expect("first-fit window is free");
            let protection = match scheme {
                ProtectionScheme::Dpp => self.dpp_backup(spectrum, primary, candidates, capacity),
                ProtectionScheme::Dlp => self.dlp_backups(spectrum, primary, capacity),
                ProtectionScheme::Spp => spp_arc.map(|(arc, slots)| ProtectionRecord::Spp { arc, slots }),
            };
            match protection {
                Some(protection) => {
                    return Some(Lightpath {
                        id,
                        route: primary.clone(),
                        slots: range,
                        modulation: modulation.clone(),
                        capacity,
                        residual: capacity,
                        is_static: false,
                        protection,
                        flows: 0,
                    })
                }
                None => spectrum
                    .release(primary.links(), range)
                    .expect("primary was just allocated"),
            }
        }
        None
    }

    /// Sizes and Last-Fit allocates a backup on `route` for `capacity`.
    fn try_backup(&self, spectrum: &mut SpectrumState, route: &Route, capacity: f64) -> Option<BackupPath> {
        let modulation = self.modulations.select(route.length_km())?;
        let width = slots_needed(capacity, modulation, self.guard_slots);
        let range = spectrum.find_last_fit(route.links(), width)?;
        spectrum
            .allocate(route.links(), range)
            .expect("last-fit window is free");
        Some(BackupPath {
            route: route.clone(),
            slots: range,
            modulation: modulation.clone(),
        })
    }

    fn dpp_backup(
        &self,
        spectrum: &mut SpectrumState,
        primary: &Route,
        candidates: &[Route],
        capacity: f64,
    ) -> Option<ProtectionRecord> {
        candidates
            .iter()
            .filter(|r| !r.shares_link_with(primary.links()))
            .find_map(|r| self.try_backup(spectrum, r, capacity))
            .map(ProtectionRecord::Dpp)
    }

    fn dlp_backups(&self, spectrum: &mut SpectrumState, primary: &Route, capacity: f64) -> Option<ProtectionRecord> {
        let mut backups: BTreeMap<LinkId, BackupPath> = BTreeMap::new();
        for (i, &link) in primary.links().iter().enumerate() {
            let (u, v) = (primary.nodes()[i], primary.nodes()[i + 1]);
            let candidates = self.kpaths.get(u, v);
            let mut avoiding = candidates.iter().filter(|r| !r.contains_link(link)).peekable();
            let found = if avoiding.peek().is_some() {
                avoiding.find_map(|r| self.try_backup(spectrum, r, capacity))
            } else {
                shortest_path_avoiding(self.graph, u, v, &[link]).and_then(|r| self.try_backup(spectrum, &r, capacity))
            };
            match found {
                Some(b) => {
                    backups.insert(link, b);
                }
                None => {
                    for b in backups.values().rev() {
                        spectrum
                            .release(b.route.links(), b.slots)
                            .expect("backup was just allocated");
                    }
                    return None;
                }
            }
        }
        Some(ProtectionRecord::Dlp(backups))
    }
}
