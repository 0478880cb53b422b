//! Blocking and spectrum-utilization statistics.

use std::collections::BTreeMap;

use crate::control_plane::BlockReason;
use crate::spectrum::{SlotBlock, SLOT_COUNT};
use crate::topology::LinkId;

/// Exact time integral of per-slot occupancy on every directed link.
#[derive(Debug, Clone)]
pub struct UtilizationTracker {
    since: Vec<Vec<Option<f64>>>,
    busy: Vec<Vec<f64>>,
}

impl UtilizationTracker {
    pub fn new(links: usize) -> Self {
        UtilizationTracker {
            since: vec![vec![None; SLOT_COUNT]; links],
            busy: vec![vec![0.0; SLOT_COUNT]; links],
        }
    }

    pub fn occupy(&mut self, link: LinkId, block: SlotBlock, now: f64) {
        for s in block.range() {
            debug_assert!(self.since[link.0][s].is_none());
            self.since[link.0][s] = Some(now);
        }
    }

    pub fn vacate(&mut self, link: LinkId, block: SlotBlock, now: f64) {
        for s in block.range() {
            if let Some(t0) = self.since[link.0][s].take() {
                self.busy[link.0][s] += now - t0;
            }
        }
    }

    /// Per-link, per-slot busy fractions over `[0, end]`; slots still
    /// occupied are closed at `end`.
    pub fn finish(mut self, end: f64) -> Vec<Vec<f64>> {
        for (since, busy) in self.since.iter_mut().zip(self.busy.iter_mut()) {
            for (s, b) in since.iter_mut().zip(busy.iter_mut()) {
                if let Some(t0) = s.take() {
                    *b += end - t0;
                }
            }
        }
        if end <= 0.0 {
            return self.busy.into_iter().map(|v| vec![0.0; v.len()]).collect();
        }
        self.busy
            .into_iter()
            .map(|v| v.into_iter().map(|b| (b / end).clamp(0.0, 1.0)).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub requests: u64,
    pub blocked_by_reason: BTreeMap<BlockReason, u64>,
    /// Slot-indexed busy fraction averaged over all directed links.
    pub slot_utilization: Vec<f64>,
    /// `[link][slot]` busy fractions.
    pub link_slot_utilization: Vec<Vec<f64>>,
    /// Mean busy fraction per directed link, indexed by link id.
    pub link_mean_utilization: Vec<f64>,
    /// Simulated time until the last departure (s).
    pub duration: f64,
}

impl ReplicationResult {
    pub fn from_occupancy(
        requests: u64,
        blocked_by_reason: BTreeMap<BlockReason, u64>,
        link_slot_utilization: Vec<Vec<f64>>,
        duration: f64,
    ) -> Self {
        let links = link_slot_utilization.len().max(1) as f64;
        let slot_utilization = (0..SLOT_COUNT)
            .map(|s| link_slot_utilization.iter().map(|l| l[s]).sum::<f64>() / links)
            .collect();
        let link_mean_utilization = link_slot_utilization
            .iter()
            .map(|l| l.iter().sum::<f64>() / l.len() as f64)
            .collect();
        ReplicationResult {
            requests,
            blocked_by_reason,
            slot_utilization,
            link_slot_utilization,
            link_mean_utilization,
            duration,
        }
    }

    pub fn blocked(&self) -> u64 {
        self.blocked_by_reason.values().sum()
    }

    pub fn blocked_for(&self, reason: BlockReason) -> u64 {
        self.blocked_by_reason.get(&reason).copied().unwrap_or(0)
    }
}

/// Blocked over offered requests; `None` when nothing was offered.
pub fn blocking_probability(result: &ReplicationResult) -> Option<f64> {
    (result.requests > 0).then(|| result.blocked() as f64 / result.requests as f64)
}

/// Directed links by whole-run mean utilization, descending; ties go to the
/// lower link id. Utilization is averaged over the given replications.
pub fn utilization_ranking(results: &[ReplicationResult]) -> Vec<(LinkId, f64)> {
    let Some(first) = results.first() else {
        return Vec::new();
    };
    let n = results.len() as f64;
    let mut ranking: Vec<(LinkId, f64)> = (0..first.link_mean_utilization.len())
        .map(|l| {
            let u = results.iter().map(|r| r.link_mean_utilization[l]).sum::<f64>() / n;
            (LinkId(l), u)
        })
        .collect();
    ranking.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranking
}

/// Per-slot utilization averaged over all directed links and replications.
pub fn slot_histogram(results: &[ReplicationResult]) -> Vec<f64> {
    mean_vectors(results.iter().map(|r| r.slot_utilization.as_slice()))
}

/// Per-slot utilization of one directed link, averaged over replications.
pub fn link_histogram(results: &[ReplicationResult], link: LinkId) -> Vec<f64> {
    mean_vectors(results.iter().map(|r| r.link_slot_utilization[link.0].as_slice()))
}

fn mean_vectors<'a>(rows: impl Iterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut acc = vec![0.0; SLOT_COUNT];
    let mut n = 0usize;
    for row in rows {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
        n += 1;
    }
    if n > 0 {
        acc.iter_mut().for_each(|a| *a /= n as f64);
    }
    acc
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
