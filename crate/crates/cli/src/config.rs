//! Scenario files.
//!
//! ```toml
//! topology = "../data/nsfnet.topo"
//! modes = ["no_jamming", "unaware"]
//! seed = 1
//!
//! [jammer]
//! target = "most_used"
//!
//! [sweep]
//! start = 0.0
//! stop = 5.0
//! step = 0.5
//!
//! [traffic]
//! requests = 10000
//! replications = 3
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::fmt;
use std::path::{Path, PathBuf};

use eonjam::control_plane::{ControlMode, DEFAULT_TOLERANCE_DB};
use eonjam::jammer::{default_ranges, TargetSelector};
use eonjam::phy::PhyParams;
use eonjam::sim::{epsilon_sweep, ScenarioSpec, TrafficModel};
use eonjam::spectrum::{SlotBlock, SLOT_COUNT};
use eonjam::topology::{load_topology, Topology};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    topology: String,
    modes: Vec<String>,
    #[serde(default)]
    seed: u64,
    output_dir: Option<String>,
    tolerance_db: Option<f64>,
    ranking: Option<String>,
    slot_histogram: Option<String>,
    jammer: Option<RawJammer>,
    sweep: Option<RawSweep>,
    #[serde(default)]
    traffic: RawTraffic,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJammer {
    target: String,
    ranges: Option<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    start: f64,
    stop: f64,
    step: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTraffic {
    load_erlangs: Option<f64>,
    mean_holding_s: Option<f64>,
    bandwidths_gbps: Option<Vec<f64>>,
    requests: Option<u64>,
    replications: Option<u32>,
}

/// A config problem, tagged with the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Violation {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Which links the slot histogram covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotScope {
    AllLinks,
    Target,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub topology_path: PathBuf,
    pub topology: Topology,
    pub spec: ScenarioSpec,
    pub output_dir: PathBuf,
    pub tolerance_db: f64,
    pub ranking_path: Option<PathBuf>,
    pub slot_scope: SlotScope,
}

impl ScenarioConfig {
    /// Reads and checks a scenario file; every problem found is reported.
    pub fn load(path: &Path) -> Result<Self, Vec<Violation>> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| vec![Violation::new("file", format!("{}: {e}", path.display()))])?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, Vec<Violation>> {
        let raw: RawConfig = toml::from_str(text)
            .map_err(|e| vec![Violation::new("file", e.message().to_string())])?;
        build(raw, base)
    }
}

fn build(raw: RawConfig, base: &Path) -> Result<ScenarioConfig, Vec<Violation>> {
    let mut bad = Vec::new();

    let topology_path = base.join(&raw.topology);
    let params = PhyParams::default();
    let topology = match std::fs::read_to_string(&topology_path) {
        Ok(doc) => match load_topology(&doc, params.span_length_km) {
            Ok(t) => Some(t),
            Err(e) => {
                bad.push(Violation::new("topology", e.to_string()));
                None
            }
        },
        Err(e) => {
            bad.push(Violation::new(
                "topology",
                format!("{}: {e}", topology_path.display()),
            ));
            None
        }
    };

    let mut modes = Vec::new();
    if raw.modes.is_empty() {
        bad.push(Violation::new("modes", "at least one mode is required"));
    }
    for m in &raw.modes {
        match ControlMode::parse(m) {
            Some(mode) if modes.contains(&mode) => {
                bad.push(Violation::new("modes", format!("`{m}` listed twice")))
            }
            Some(mode) => modes.push(mode),
            None => bad.push(Violation::new(
                "modes",
                format!("unknown mode `{m}` (no_jamming, unaware, aware)"),
            )),
        }
    }
    let jamming = modes.iter().any(|m| *m != ControlMode::NoJamming);

    let mut target = None;
    let mut ranges = default_ranges();
    match (&raw.jammer, jamming) {
        (None, true) => bad.push(Violation::new(
            "jammer",
            "unaware and aware modes need a jammer section",
        )),
        (Some(_), false) => bad.push(Violation::new(
            "jammer",
            "no_jamming alone must not configure a jammer",
        )),
        _ => {}
    }
    if let Some(j) = &raw.jammer {
        target = match j.target.as_str() {
            "most_used" => Some(TargetSelector::MostUsed),
            "least_used" => Some(TargetSelector::LeastUsed),
            label => {
                if let Some(t) = &topology {
                    if t.find_link(label).is_none() {
                        bad.push(Violation::new(
                            "jammer.target",
                            format!("`{label}` is neither most_used, least_used nor a link"),
                        ));
                    }
                }
                Some(TargetSelector::Explicit(label.to_string()))
            }
        };
        if let Some(r) = &j.ranges {
            ranges = r.iter().map(|(s, w)| SlotBlock::new(*s, *w)).collect();
            check_ranges(&ranges, &mut bad);
        }
    }

    let epsilons = match (&raw.sweep, jamming) {
        (Some(s), _) => {
            if !(s.step > 0.0 && s.step.is_finite()) {
                bad.push(Violation::new("sweep.step", "must be positive"));
            }
            if !(s.start >= 0.0 && s.start.is_finite()) {
                bad.push(Violation::new("sweep.start", "must be a non-negative dB value"));
            }
            if !(s.stop >= s.start && s.stop.is_finite()) {
                bad.push(Violation::new("sweep.stop", "must not be below sweep.start"));
            }
            epsilon_sweep(s.start, s.stop, s.step).unwrap_or_default()
        }
        (None, true) => {
            bad.push(Violation::new("sweep", "jamming modes need an epsilon sweep"));
            Vec::new()
        }
        (None, false) => Vec::new(),
    };

    let mut traffic = TrafficModel::default();
    let t = &raw.traffic;
    if let Some(v) = t.load_erlangs {
        traffic.load_erlangs = v;
    }
    if let Some(v) = t.mean_holding_s {
        traffic.mean_holding_s = v;
    }
    if let Some(v) = &t.bandwidths_gbps {
        traffic.bandwidth_choices_gbps = v.clone();
    }
    if let Some(v) = t.requests {
        traffic.requests_per_replication = v;
    }
    if let Some(v) = t.replications {
        traffic.replications = v;
    }
    if !(traffic.load_erlangs > 0.0 && traffic.load_erlangs.is_finite()) {
        bad.push(Violation::new("traffic.load_erlangs", "must be positive"));
    }
    if !(traffic.mean_holding_s > 0.0 && traffic.mean_holding_s.is_finite()) {
        bad.push(Violation::new("traffic.mean_holding_s", "must be positive"));
    }
    if traffic.bandwidth_choices_gbps.is_empty()
        || traffic
            .bandwidth_choices_gbps
            .iter()
            .any(|b| !(*b > 0.0 && b.is_finite()))
    {
        bad.push(Violation::new(
            "traffic.bandwidths_gbps",
            "need at least one positive bandwidth",
        ));
    }
    if traffic.replications == 0 {
        bad.push(Violation::new("traffic.replications", "must be at least 1"));
    }

    let tolerance_db = raw.tolerance_db.unwrap_or(DEFAULT_TOLERANCE_DB);
    if !(tolerance_db >= 0.0 && tolerance_db.is_finite()) {
        bad.push(Violation::new("tolerance_db", "must be a non-negative dB value"));
    }

    let slot_scope = match raw.slot_histogram.as_deref() {
        None | Some("all_links") => SlotScope::AllLinks,
        Some("target") => {
            if !jamming {
                bad.push(Violation::new(
                    "slot_histogram",
                    "`target` needs a jammer to name the link",
                ));
            }
            SlotScope::Target
        }
        Some(other) => {
            bad.push(Violation::new(
                "slot_histogram",
                format!("unknown scope `{other}` (all_links, target)"),
            ));
            SlotScope::AllLinks
        }
    };

    if !bad.is_empty() {
        return Err(bad);
    }
    Ok(ScenarioConfig {
        topology_path,
        topology: topology.expect("checked above"),
        spec: ScenarioSpec {
            modes,
            target,
            jammed_ranges: ranges,
            epsilons_db: epsilons,
            traffic,
            base_seed: raw.seed,
        },
        output_dir: base.join(raw.output_dir.as_deref().unwrap_or("out")),
        tolerance_db,
        ranking_path: raw.ranking.map(|r| base.join(r)),
        slot_scope,
    })
}

fn check_ranges(ranges: &[SlotBlock], bad: &mut Vec<Violation>) {
    for r in ranges {
        if r.width == 0 {
            bad.push(Violation::new(
                "jammer.ranges",
                format!("range ({}, {}) is empty", r.start, r.width),
            ));
        } else if r.start + r.width > SLOT_COUNT {
            bad.push(Violation::new(
                "jammer.ranges",
                format!(
                    "range ({}, {}) exceeds grid of {SLOT_COUNT} slots",
                    r.start, r.width
                ),
            ));
        }
    }
    for (i, a) in ranges.iter().enumerate() {
        if ranges[i + 1..].iter().any(|b| a.overlaps(b)) {
            bad.push(Violation::new("jammer.ranges", "ranges overlap"));
            break;
        }
    }
}
