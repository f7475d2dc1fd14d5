//! Setup-time (ST) and protection-switching-time (PST) accounting.
//!
//! Paths are given as per-link lengths in kilometers, in traversal order.
//! Propagation is evaluated per link as `propagation_us_per_km * length`.
//! All results are in microseconds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rmlsa::{Lightpath, ProtectionRecord};
use crate::topology::{shortest_path, shortest_path_avoiding, NetworkGraph, NodeId};

#[derive(Debug, Error, PartialEq)]
pub enum QopError {
    #[error("path must have at least one hop")]
    EmptyPath,
    #[error("failed hop index {index} is outside a {hops}-hop primary")]
    FailedHop { index: usize, hops: usize },
    #[error("link protection needs at least one backup")]
    NoBackups,
    #[error("timing parameter `{0}` must be positive")]
    Timing(&'static str),
}

/// Signaling and propagation constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimingParams {
    /// F: failure detection delay.
    pub failure_detection_us: f64,
    /// D: message processing delay per node.
    pub processing_us: f64,
    /// C: setup, test and connection delay per node.
    pub setup_us: f64,
    pub propagation_us_per_km: f64,
    /// Reference span; informational (400 µs per 80 km span by default).
    pub span_km: f64,
}

impl Default for TimingParams {
    fn default() -> Self {
        Self {
            failure_detection_us: 500.0,
            processing_us: 10.0,
            setup_us: 10.0,
            propagation_us_per_km: 5.0,
            span_km: 80.0,
        }
    }
}

impl TimingParams {
    pub fn validate(&self) -> Result<(), QopError> {
        let fields = [
            ("failure_detection_us", self.failure_detection_us),
            ("processing_us", self.processing_us),
            ("setup_us", self.setup_us),
            ("propagation_us_per_km", self.propagation_us_per_km),
            ("span_km", self.span_km),
        ];
        match fields.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            Some((name, _)) => Err(QopError::Timing(name)),
            None => Ok(()),
        }
    }

    pub fn propagation_per_span_us(&self) -> f64 {
        self.propagation_us_per_km * self.span_km
    }

    fn propagation(&self, links_km: &[f64]) -> f64 {
        links_km.iter().map(|km| self.propagation_us_per_km * km).sum()
    }
}

/// Per-connection timing outcome.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct QopRecord {
    pub st: f64,
    pub expected_pst: f64,
    pub optimum_st: f64,
    /// `None` when the pair cannot be protected at all (bridge on its shortest path).
    pub optimum_pst: Option<f64>,
}

fn nonempty(path: &[f64]) -> Result<usize, QopError> {
    match path.len() {
        0 => Err(QopError::EmptyPath),
        n => Ok(n),
    }
}

/// ΣP + (n+1)·D + (n+1)·C over an n-hop path.
fn configure(path: &[f64], t: &TimingParams) -> Result<f64, QopError> {
    let nodes = (nonempty(path)? + 1) as f64;
    Ok(t.propagation(path) + nodes * t.processing_us + nodes * t.setup_us)
}

pub fn st_primary(primary: &[f64], t: &TimingParams) -> Result<f64, QopError> {
    configure(primary, t)
}

pub fn st_backup_dpp(backup: &[f64], t: &TimingParams) -> Result<f64, QopError> {
    configure(backup, t)
}

/// Sum over protected links of each backup's configuration time.
pub fn st_backup_dlp(backups: &[&[f64]], t: &TimingParams) -> Result<f64, QopError> {
    if backups.is_empty() {
        return Err(QopError::NoBackups);
    }
    backups.iter().map(|b| configure(b, t)).sum()
}

/// Failure notification back to the source over the first `failed_hop` links,
/// then a round trip over the backup.
pub fn pst_dpp(primary: &[f64], backup: &[f64], failed_hop: usize, t: &TimingParams) -> Result<f64, QopError> {
    let n = nonempty(primary)?;
    let m = nonempty(backup)?;
    if failed_hop >= n {
        return Err(QopError::FailedHop {
            index: failed_hop,
            hops: n,
        });
    }
    Ok(t.failure_detection_us
        + t.propagation(&primary[..failed_hop])
        + (failed_hop + 1) as f64 * t.processing_us
        + 2.0 * t.propagation(backup)
        + 2.0 * (m + 1) as f64 * t.processing_us)
}

/// Switching at the nodes of the failed link: a round trip over its backup.
pub fn pst_dlp(link_backup: &[f64], t: &TimingParams) -> Result<f64, QopError> {
    let m = nonempty(link_backup)?;
    Ok(t.failure_detection_us + 2.0 * t.propagation(link_backup) + 2.0 * (m + 1) as f64 * t.processing_us)
}

/// Like [`pst_dpp`] plus configuring every node of the shared backup after the failure.
pub fn pst_spp(primary: &[f64], cycle_backup: &[f64], failed_hop: usize, t: &TimingParams) -> Result<f64, QopError> {
    let m = nonempty(cycle_backup)?;
    Ok(pst_dpp(primary, cycle_backup, failed_hop, t)? + (m + 1) as f64 * t.setup_us)
}

/// Setup time of a single freshly created lightpath.
pub fn lightpath_st(lp: &Lightpath, t: &TimingParams) -> f64 {
    let primary = lp.route.link_km();
    let st_p = st_primary(&primary, t).expect("lightpath routes have hops");
    match &lp.protection {
        ProtectionRecord::Dpp(b) => st_p.max(st_backup_dpp(&b.route.link_km(), t).expect("backup has hops")),
        ProtectionRecord::Dlp(map) => {
            let backups: Vec<Vec<f64>> = map.values().map(|b| b.route.link_km()).collect();
            let refs: Vec<&[f64]> = backups.iter().map(Vec::as_slice).collect();
            st_p + st_backup_dlp(&refs, t).expect("every primary link has a backup")
        }
        ProtectionRecord::Spp { .. } => st_p,
    }
}

/// One lightpath hop of a connection.
#[derive(Clone, Copy, Debug)]
pub struct SegmentView<'a> {
    pub lightpath: &'a Lightpath,
    /// Traversed destination → source.
    pub reversed: bool,
    /// Created for this connection (so its setup time is paid now).
    pub newly_created: bool,
}

/// Segments set up in parallel: the slowest new lightpath dominates; groomed
/// segments cost nothing.
pub fn connection_st(segments: &[SegmentView<'_>], t: &TimingParams) -> f64 {
    segments
        .iter()
        .filter(|s| s.newly_created)
        .map(|s| lightpath_st(s.lightpath, t))
        .fold(0.0, f64::max)
}

/// PST for each single-link failure on the segment's primary, in traversal order.
pub fn segment_psts(segment: &SegmentView<'_>, t: &TimingParams) -> Vec<f64> {
    let lp = segment.lightpath;
    let (route, links) = if segment.reversed {
        let r = lp.route.reversed();
        let l = r.links().to_vec();
        (r, l)
    } else {
        (lp.route.clone(), lp.route.links().to_vec())
    };
    let primary = route.link_km();
    (0..links.len())
        .map(|k| match &lp.protection {
            ProtectionRecord::Dpp(b) => pst_dpp(&primary, &b.route.link_km(), k, t),
            ProtectionRecord::Dlp(map) => pst_dlp(&map[&links[k]].route.link_km(), t),
            ProtectionRecord::Spp { arc, .. } => pst_spp(&primary, &arc.link_km(), k, t),
        })
        .map(|r| r.expect("lightpath geometry is well formed"))
        .collect()
}

/// Mean PST over every equally likely single-link failure on the connection's
/// primary links; a failure hits only the segment that carries the link.
pub fn expected_pst(segments: &[SegmentView<'_>], t: &TimingParams) -> f64 {
    let all: Vec<f64> = segments.iter().flat_map(|s| segment_psts(s, t)).collect();
    if all.is_empty() {
        0.0
    } else {
        all.iter().sum::<f64>() / all.len() as f64
    }
}

/// Best achievable (ST, PST) for a pair: zero setup time and a link-protected
/// shortest primary with shortest detours. `None` if some primary link has no detour.
pub fn optimum_st_pst(
    graph: &NetworkGraph,
    source: NodeId,
    destination: NodeId,
    t: &TimingParams,
) -> Option<(f64, f64)> {
    let primary = shortest_path(graph, source, destination)?;
    let mut total = 0.0;
    for (i, &link) in primary.links().iter().enumerate() {
        let (u, v) = (primary.nodes()[i], primary.nodes()[i + 1]);
        let detour = shortest_path_avoiding(graph, u, v, &[link])?;
        total += pst_dlp(&detour.link_km(), t).ok()?;
    }
    Some((0.0, total / primary.hop_count() as f64))
}
