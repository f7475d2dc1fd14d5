use super::{ControlPlane, Flow, FlowConnection, Segment};
use crate::rmlsa::{LightpathId, ProtectionRecord, ProtectionScheme, Sizing};
use crate::topology::NodeId;

impl<'n> ControlPlane<'n> {
    /// Candidate intermediate nodes: interior nodes of each k-shortest route
    /// of the pair, in route order, first occurrence only.
    pub(crate) fn intermediates(&self, source: NodeId, destination: NodeId) -> Vec<NodeId> {
        let mut seen = vec![false; self.net.graph.node_count()];
        let mut out = Vec::new();
        for route in self.net.kpaths.get(source, destination) {
            let nodes = route.nodes();
            for &w in &nodes[1..nodes.len() - 1] {
                if !std::mem::replace(&mut seen[w], true) {
                    out.push(w);
                }
            }
        }
        out
    }

    pub(crate) fn reserve(&mut self, id: LightpathId, demand: f64) {
        let lp = self.vt.get_mut(id).expect("reserved lightpath is active");
        debug_assert!(lp.residual + 1e-9 >= demand);
        lp.residual -= demand;
        lp.flows += 1;
    }

    /// Segment over lightpath `id` entered at node `from`.
    pub(crate) fn segment(&self, id: LightpathId, from: NodeId, newly_created: bool) -> Segment {
        let lp = self.vt.get(id).expect("segment lightpath is active");
        Segment {
            lightpath: id,
            reversed: lp.source() != from,
            newly_created,
        }
    }

    /// Reserves `flow.rate` on each lightpath and assembles the connection.
    pub(crate) fn connect(&mut self, flow: &Flow, hops: &[(LightpathId, NodeId, bool)]) -> FlowConnection {
        let segments = hops
            .iter()
            .map(|&(id, from, new)| self.segment(id, from, new))
            .collect();
        for &(id, _, _) in hops {
            self.reserve(id, flow.rate);
        }
        FlowConnection {
            flow_id: flow.id,
            source: flow.source,
            destination: flow.destination,
            demand: flow.rate,
            segments,
        }
    }

    /// Runs RMLSA and installs the resulting lightpath.
    pub(crate) fn create_lightpath(
        &mut self,
        source: NodeId,
        destination: NodeId,
        sizing: Sizing,
        scheme: ProtectionScheme,
    ) -> Option<LightpathId> {
        let id = self.vt.next_id();
        let lp = self.rmlsa().new_lightpath(
            &mut self.spectrum,
            source,
            destination,
            sizing,
            scheme,
            self.cycle.as_ref(),
            id,
        )?;
        if let (Some(cycle), ProtectionRecord::Spp { .. }) = (self.cycle.as_mut(), &lp.protection) {
            cycle.commit(&lp.route, lp.capacity);
        }
        self.vt.insert(lp);
        Some(id)
    }

    /// Removes a lightpath that never carried a flow.
    pub(crate) fn discard_lightpath(&mut self, id: LightpathId) {
        let lp = self.vt.remove(id).expect("discarded lightpath is active");
        debug_assert_eq!(lp.flows, 0);
        self.teardown(&lp).expect("fresh lightpath releases cleanly");
    }

    /// Single lightpath source–destination with room for the flow, least loaded first.
    pub fn grooming_sh(&mut self, flow: &Flow) -> Option<FlowConnection> {
        let id = self.vt.groomable(flow.source, flow.destination, flow.rate)?;
        Some(self.connect(flow, &[(id, flow.source, false)]))
    }

    /// Two existing lightpaths joined at an intermediate node.
    pub fn grooming_mh(&mut self, flow: &Flow) -> Option<FlowConnection> {
        for w in self.intermediates(flow.source, flow.destination) {
            let head = self.vt.groomable(flow.source, w, flow.rate);
            let tail = self.vt.groomable(w, flow.destination, flow.rate);
            if let (Some(head), Some(tail)) = (head, tail) {
                return Some(self.connect(flow, &[(head, flow.source, false), (tail, w, false)]));
            }
        }
        None
    }

    /// A new lightpath from the source to an intermediate node whose
    /// existing lightpath reaches the destination.
    pub fn grooming_mh_new_lp(&mut self, flow: &Flow) -> Option<FlowConnection> {
        let scheme = self.config.prov_scheme;
        for w in self.intermediates(flow.source, flow.destination) {
            let Some(tail) = self.vt.groomable(w, flow.destination, flow.rate) else {
                continue;
            };
            if let Some(head) = self.create_lightpath(flow.source, w, Sizing::Rate(flow.rate), scheme) {
                return Some(self.connect(flow, &[(head, flow.source, true), (tail, w, false)]));
            }
        }
        None
    }
}
