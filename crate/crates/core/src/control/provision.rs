use super::{ControlPlane, Flow, FlowConnection, ServedBy};
use crate::rmlsa::{ProtectionScheme, Sizing};
use crate::sim::traffic::pair_intensity;
use crate::topology::{NetworkGraph, NodeId};

/// Node pairs that receive static protected lightpaths.
///
/// DLP: one pair per link, in link order. DPP: every unordered pair, by
/// decreasing two-way traffic intensity, ties by pair index. SPP has no
/// preprovisioning and yields nothing.
pub fn define_node_pairs(scheme: ProtectionScheme, graph: &NetworkGraph) -> Vec<(NodeId, NodeId)> {
    match scheme {
        ProtectionScheme::Dlp => graph.links().iter().map(|l| (l.a.min(l.b), l.a.max(l.b))).collect(),
        ProtectionScheme::Dpp => {
            let n = graph.node_count();
            let mut pairs: Vec<(f64, (NodeId, NodeId))> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .map(|(i, j)| (pair_intensity(graph, i, j) + pair_intensity(graph, j, i), (i, j)))
                .collect();
            pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            pairs.into_iter().map(|(_, p)| p).collect()
        }
        ProtectionScheme::Spp => Vec::new(),
    }
}

impl<'n> ControlPlane<'n> {
    /// Data slots of each preprovisioned primary: the configured share of the
    /// fiber minus the guard band.
    pub fn preprov_data_slots(&self) -> usize {
        let width = (self.config.preprov_bw * self.spectrum.slots() as f64).floor() as usize;
        width.saturating_sub(self.guard_slots)
    }

    /// Installs the static lightpaths. Returns how many were established.
    ///
    /// DLP pairs that cannot be served are skipped; DPP stops at the first
    /// pair that cannot be served, leaving the lower-intensity pairs unprotected.
    pub fn preprovision(&mut self) -> usize {
        let Some(scheme) = self.config.preprov_scheme else {
            return 0;
        };
        let data_slots = self.preprov_data_slots();
        if data_slots == 0 {
            return 0;
        }
        let mut created = 0;
        for (a, b) in define_node_pairs(scheme, &self.net.graph) {
            match self.create_lightpath(a, b, Sizing::DataSlots(data_slots), scheme) {
                Some(id) => {
                    self.vt.get_mut(id).expect("just inserted").is_static = true;
                    self.static_ids.push(id);
                    created += 1;
                }
                None if scheme == ProtectionScheme::Dpp => break,
                None => {}
            }
        }
        log::debug!("preprovisioned {created} static {scheme} lightpaths");
        created
    }

    /// New protected lightpath source → destination; failing that, two new
    /// lightpaths joined at an intermediate node.
    pub fn provision(&mut self, flow: &Flow) -> Option<(FlowConnection, ServedBy)> {
        let scheme = self.config.prov_scheme;
        let sizing = Sizing::Rate(flow.rate);
        if let Some(id) = self.create_lightpath(flow.source, flow.destination, sizing, scheme) {
            return Some((self.connect(flow, &[(id, flow.source, true)]), ServedBy::NewLightpath));
        }
        for w in self.intermediates(flow.source, flow.destination) {
            let Some(head) = self.create_lightpath(flow.source, w, sizing, scheme) else {
                continue;
            };
            match self.create_lightpath(w, flow.destination, sizing, scheme) {
                Some(tail) => {
                    let conn = self.connect(flow, &[(head, flow.source, true), (tail, w, true)]);
                    return Some((conn, ServedBy::NewMultiHop));
                }
                None => self.discard_lightpath(head),
            }
        }
        None
    }

    /// Shortest available primary protected by the shared cycle arc.
    pub fn ham_p_cycle_provision(&mut self, flow: &Flow) -> Option<FlowConnection> {
        let id = self.create_lightpath(
            flow.source,
            flow.destination,
            Sizing::Rate(flow.rate),
            ProtectionScheme::Spp,
        )?;
        Some(self.connect(flow, &[(id, flow.source, true)]))
    }
}
