//! CSV emission. Reals are written in fixed notation with 10 significant
//! digits; values that do not apply are written as `NA`.

use std::io::Write;
use std::path::Path;

use eonjam::control_plane::{BlockReason, ControlMode};
use eonjam::metrics::{blocking_probability, link_histogram, slot_histogram, ReplicationResult};
use eonjam::sim::ScenarioResult;
use eonjam::topology::{LinkId, Topology};

use crate::config::SlotScope;

pub const NA: &str = "NA";

/// Fixed-notation rendering with 10 significant digits.
pub fn sig10(v: f64) -> String {
    if !v.is_finite() {
        return NA.to_string();
    }
    if v == 0.0 {
        return format!("{:.9}", 0.0);
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (9 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

fn epsilon_label(e: Option<f64>) -> String {
    e.map_or(NA.to_string(), sig10)
}

fn target_label(mode: ControlMode, target: Option<LinkId>, topology: &Topology) -> String {
    match (mode, target) {
        (ControlMode::NoJamming, _) | (_, None) => NA.to_string(),
        (_, Some(t)) => topology.link_name(t),
    }
}

pub fn write_blocking<W: Write>(
    out: W,
    result: &ScenarioResult,
    topology: &Topology,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "mode",
        "target",
        "epsilon_db",
        "replication",
        "blocking_probability",
        "blocked_no_spectrum",
        "blocked_qot",
        "blocked_jammed",
    ])?;
    for p in &result.points {
        let target = target_label(p.mode, result.target, topology);
        for (i, r) in p.replications.iter().enumerate() {
            w.write_record([
                p.mode.as_str().to_string(),
                target.clone(),
                epsilon_label(p.epsilon_db),
                i.to_string(),
                blocking_probability(r).map_or(NA.to_string(), sig10),
                r.blocked_for(BlockReason::NoSpectrum).to_string(),
                r.blocked_for(BlockReason::QotFail).to_string(),
                r.blocked_for(BlockReason::JammedNoAlternative).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn histogram(reps: &[ReplicationResult], scope: SlotScope, target: Option<LinkId>) -> Vec<f64> {
    match (scope, target) {
        (SlotScope::Target, Some(t)) => link_histogram(reps, t),
        _ => slot_histogram(reps),
    }
}

pub fn write_slots<W: Write>(
    out: W,
    result: &ScenarioResult,
    topology: &Topology,
    scope: SlotScope,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mode", "target", "epsilon_db", "slot_index", "mean_utilization"])?;
    for p in &result.points {
        let target = target_label(p.mode, result.target, topology);
        let eps = epsilon_label(p.epsilon_db);
        for (slot, u) in histogram(&p.replications, scope, result.target)
            .iter()
            .enumerate()
        {
            w.write_record([
                p.mode.as_str().to_string(),
                target.clone(),
                eps.clone(),
                slot.to_string(),
                sig10(*u),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_ranking<W: Write>(
    out: W,
    ranking: &[(LinkId, f64)],
    topology: &Topology,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "link", "mean_utilization"])?;
    for (i, (l, u)) in ranking.iter().enumerate() {
        w.write_record([(i + 1).to_string(), topology.link_name(*l), sig10(*u)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum RankingError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {0}: {1}")]
    Row(usize, String),
    #[error("ranking lists {found} links, topology has {expected}")]
    Incomplete { found: usize, expected: usize },
}

/// Reads a ranking written by [`write_ranking`], in file order.
pub fn read_ranking(path: &Path, topology: &Topology) -> Result<Vec<(LinkId, f64)>, RankingError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut ranking = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let link = row.get(1).unwrap_or_default();
        let id = topology
            .find_link(link)
            .ok_or_else(|| RankingError::Row(i + 1, format!("unknown link `{link}`")))?;
        let u: f64 = row
            .get(2)
            .unwrap_or_default()
            .parse()
            .map_err(|e| RankingError::Row(i + 1, format!("utilization: {e}")))?;
        ranking.push((id, u));
    }
    let expected = topology.links().len();
    if ranking.len() != expected {
        return Err(RankingError::Incomplete {
            found: ranking.len(),
            expected,
        });
    }
    Ok(ranking)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(0.5), "0.5000000000");
        assert_eq!(sig10(0.037), "0.03700000000");
        assert_eq!(sig10(2.25), "2.250000000");
        assert_eq!(sig10(0.0), "0.000000000");
        assert_eq!(sig10(1.0), "1.000000000");
        assert_eq!(sig10(123.456), "123.4560000");
        assert_eq!(sig10(f64::NAN), NA);
    }

    #[test]
    fn round_trip_within_precision() {
        for v in [0.123456789012345, 3.0e-7, 0.999999, 4.75] {
            let back: f64 = sig10(v).parse().unwrap();
            assert!((back - v).abs() <= v.abs() * 1e-9, "{v} -> {back}");
        }
    }
}
