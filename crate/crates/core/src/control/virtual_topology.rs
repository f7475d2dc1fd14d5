use std::collections::{BTreeMap, HashMap};

use crate::rmlsa::{Lightpath, LightpathId};
use crate::topology::{ordered, NodeId};

/// Established lightpaths, indexed by id and by unordered endpoint pair.
#[derive(Clone, Debug, Default)]
pub struct VirtualTopology {
    lightpaths: BTreeMap<LightpathId, Lightpath>,
    by_pair: HashMap<(NodeId, NodeId), Vec<LightpathId>>,
    next_id: LightpathId,
}

impl VirtualTopology {
    pub fn new() -> Self {
        Self::default()
    }

    /// Id the next inserted lightpath should carry.
    pub fn next_id(&self) -> LightpathId {
        self.next_id
    }

    pub fn insert(&mut self, lp: Lightpath) {
        debug_assert!(lp.id >= self.next_id, "lightpath ids are never reused");
        self.next_id = lp.id + 1;
        self.by_pair
            .entry(ordered(lp.source(), lp.destination()))
            .or_default()
            .push(lp.id);
        self.lightpaths.insert(lp.id, lp);
    }

    pub fn remove(&mut self, id: LightpathId) -> Option<Lightpath> {
        let lp = self.lightpaths.remove(&id)?;
        let key = ordered(lp.source(), lp.destination());
        if let Some(ids) = self.by_pair.get_mut(&key) {
            ids.retain(|&x| x != id);
            if ids.is_empty() {
                self.by_pair.remove(&key);
            }
        }
        Some(lp)
    }

    pub fn get(&self, id: LightpathId) -> Option<&Lightpath> {
        self.lightpaths.get(&id)
    }

    pub fn get_mut(&mut self, id: LightpathId) -> Option<&mut Lightpath> {
        self.lightpaths.get_mut(&id)
    }

    pub fn len(&self) -> usize {
        self.lightpaths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lightpaths.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Lightpath> {
        self.lightpaths.values()
    }

    /// Lightpaths joining `a` and `b` in either orientation.
    pub fn between(&self, a: NodeId, b: NodeId) -> impl Iterator<Item = &Lightpath> {
        self.by_pair
            .get(&ordered(a, b))
            .into_iter()
            .flatten()
            .map(|id| &self.lightpaths[id])
    }

    /// Least loaded lightpath `a`–`b` able to take `demand`: greatest residual,
    /// ties to the lowest id.
    pub fn groomable(&self, a: NodeId, b: NodeId, demand: f64) -> Option<LightpathId> {
        self.between(a, b)
            .filter(|lp| lp.residual + 1e-9 >= demand)
            .min_by(|x, y| y.residual.total_cmp(&x.residual).then(x.id.cmp(&y.id)))
            .map(|lp| lp.id)
    }
}
