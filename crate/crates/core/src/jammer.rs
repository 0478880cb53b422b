//! The attacker: which fiber, which slot ranges, how much excess power.
//!
//! [`GroundTruth`] is the physical state the controller would read from the
//! transport API; the simulator feeds it straight into the SNR model.

use thiserror::Error;

use crate::phy::{db_to_linear, Channel, Physics};
use crate::spectrum::{SlotBlock, SLOT_COUNT};
use crate::topology::{LinkId, Topology};

#[derive(Debug, Error, PartialEq)]
pub enum JammerError {
    #[error("jammed range {start}+{width} exceeds the {slots}-slot grid")]
    RangeExceedsGrid {
        start: usize,
        width: usize,
        slots: usize,
    },
    #[error("jammed range {0}+{1} is empty")]
    EmptyRange(usize, usize),
    #[error("jammed ranges overlap")]
    OverlappingRanges,
    #[error("epsilon must be a finite non-negative dB value, got {0}")]
    NegativeEpsilon(f64),
    #[error("link `{0}` is not in the topology")]
    UnknownLink(String),
    #[error("utilization ranking is empty")]
    EmptyRanking,
}

/// How the attacked link is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSelector {
    MostUsed,
    LeastUsed,
    /// A `src->dst` link label.
    Explicit(String),
}

impl TargetSelector {
    pub fn label(&self) -> String {
        match self {
            TargetSelector::MostUsed => "MU".to_string(),
            TargetSelector::LeastUsed => "LU".to_string(),
            TargetSelector::Explicit(l) => l.clone(),
        }
    }
}

pub fn default_ranges() -> Vec<SlotBlock> {
    vec![
        SlotBlock::new(50, 10),
        SlotBlock::new(140, 10),
        SlotBlock::new(230, 10),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct JammerConfig {
    pub target: TargetSelector,
    pub jammed_ranges: Vec<SlotBlock>,
    pub epsilon_db: f64,
}

impl JammerConfig {
    pub fn new(target: TargetSelector, epsilon_db: f64) -> Self {
        JammerConfig {
            target,
            jammed_ranges: default_ranges(),
            epsilon_db,
        }
    }

    pub fn validate(&self) -> Result<(), JammerError> {
        validate_ranges(&self.jammed_ranges)?;
        if !(self.epsilon_db >= 0.0 && self.epsilon_db.is_finite()) {
            return Err(JammerError::NegativeEpsilon(self.epsilon_db));
        }
        Ok(())
    }
}

pub fn validate_ranges(ranges: &[SlotBlock]) -> Result<(), JammerError> {
    for r in ranges {
        if r.width == 0 {
            return Err(JammerError::EmptyRange(r.start, r.width));
        }
        if r.end() > SLOT_COUNT {
            return Err(JammerError::RangeExceedsGrid {
                start: r.start,
                width: r.width,
                slots: SLOT_COUNT,
            });
        }
    }
    for (i, a) in ranges.iter().enumerate() {
        if ranges[i + 1..].iter().any(|b| a.overlaps(b)) {
            return Err(JammerError::OverlappingRanges);
        }
    }
    Ok(())
}

/// Linear additional jammer power: `P·(10^{ε_dB/10} − 1)`.
pub fn epsilon_watts(epsilon_db: f64, power_w: f64) -> f64 {
    power_w * (db_to_linear(epsilon_db) - 1.0)
}

/// Picks the attacked directed link from a descending utilization ranking.
pub fn resolve_target(
    config: &JammerConfig,
    ranking: &[(LinkId, f64)],
    topology: &Topology,
) -> Result<LinkId, JammerError> {
    match &config.target {
        TargetSelector::Explicit(label) => topology
            .find_link(label)
            .ok_or_else(|| JammerError::UnknownLink(label.clone())),
        TargetSelector::MostUsed => ranking.first().map(|r| r.0).ok_or(JammerError::EmptyRanking),
        TargetSelector::LeastUsed => ranking.last().map(|r| r.0).ok_or(JammerError::EmptyRanking),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub target: LinkId,
    /// Both directions of the attacked fiber.
    pub attacked: [LinkId; 2],
    pub channels: Vec<Channel>,
    pub epsilon_w: f64,
}

impl GroundTruth {
    pub fn is_attacked(&self, link: LinkId) -> bool {
        self.attacked.contains(&link)
    }

    /// Jammer channels present on `link` (empty when not attacked).
    pub fn jammers_on(&self, link: LinkId) -> &[Channel] {
        if self.is_attacked(link) {
            &self.channels
        } else {
            &[]
        }
    }

    /// Jammed ranges on `link` that overlap `block`.
    pub fn overlapping_ranges(&self, link: LinkId, block: SlotBlock) -> Vec<SlotBlock> {
        self.jammers_on(link)
            .iter()
            .map(|c| c.block)
            .filter(|r| r.overlaps(&block))
            .collect()
    }
}

/// One jammer channel per jammed range at power `P + ε`, on both directions
/// of the target fiber.
pub fn ground_truth_channels(
    config: &JammerConfig,
    target: LinkId,
    topology: &Topology,
    physics: &Physics,
) -> Result<GroundTruth, JammerError> {
    config.validate()?;
    let epsilon_w = epsilon_watts(config.epsilon_db, physics.power_w);
    let channels = config
        .jammed_ranges
        .iter()
        .map(|r| Channel::new(*r, physics.power_w + epsilon_w, &physics.params, true))
        .collect();
    Ok(GroundTruth {
        target,
        attacked: [target, topology.link(target).reverse],
        channels,
        epsilon_w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::load_topology;
    use approx::assert_relative_eq;

    fn topo() -> Topology {
        load_topology("nodes: A B C\nlink: A B 100\nlink: B C 100\n", 100.0).unwrap()
    }

    #[test]
    fn resolves_targets() {
        let t = topo();
        let ranking = [(LinkId(3), 0.6), (LinkId(1), 0.2)];
        let mut cfg = JammerConfig::new(TargetSelector::MostUsed, 1.0);
        assert_eq!(resolve_target(&cfg, &ranking, &t), Ok(LinkId(3)));
        cfg.target = TargetSelector::LeastUsed;
        assert_eq!(resolve_target(&cfg, &ranking, &t), Ok(LinkId(1)));
        cfg.target = TargetSelector::Explicit("B->C".into());
        assert_eq!(resolve_target(&cfg, &ranking, &t), Ok(LinkId(2)));
        cfg.target = TargetSelector::Explicit("A->C".into());
        assert!(matches!(resolve_target(&cfg, &ranking, &t), Err(JammerError::UnknownLink(_))));
        cfg.target = TargetSelector::MostUsed;
        assert_eq!(resolve_target(&cfg, &[], &t), Err(JammerError::EmptyRanking));
    }

    #[test]
    fn ground_truth_defaults() {
        let t = topo();
        let phys = Physics::table1();
        let gt = ground_truth_channels(&JammerConfig::new(TargetSelector::MostUsed, 0.0), LinkId(0), &t, &phys).unwrap();
        assert_eq!(gt.epsilon_w, 0.0);
        assert_eq!(gt.channels.len(), 3);
        assert!(gt.channels.iter().all(|c| c.is_jammer && c.bandwidth_hz == 1.25e11));
        assert_eq!(gt.attacked, [LinkId(0), LinkId(1)]);
        assert!(gt.jammers_on(LinkId(2)).is_empty());
        assert_relative_eq!(gt.channels[0].center_frequency_hz, 55.0 * 12.5e9);

        let gt = ground_truth_channels(&JammerConfig::new(TargetSelector::MostUsed, 3.0), LinkId(0), &t, &phys).unwrap();
        assert_relative_eq!(gt.epsilon_w, 0.995_262_3e-3, max_relative = 1e-6);
        assert_relative_eq!(gt.channels[0].power_w(), 1e-3 + gt.epsilon_w, max_relative = 1e-12);
        assert_eq!(gt.overlapping_ranges(LinkId(1), SlotBlock::new(58, 4)), vec![SlotBlock::new(50, 10)]);
        assert!(gt.overlapping_ranges(LinkId(1), SlotBlock::new(60, 4)).is_empty());
    }

    #[test]
    fn range_validation() {
        assert!(matches!(
            validate_ranges(&[SlotBlock::new(315, 10)]),
            Err(JammerError::RangeExceedsGrid { .. })
        ));
        assert_eq!(
            validate_ranges(&[SlotBlock::new(10, 10), SlotBlock::new(15, 10)]),
            Err(JammerError::OverlappingRanges)
        );
        assert!(validate_ranges(&default_ranges()).is_ok());
        assert!(JammerConfig::new(TargetSelector::MostUsed, -1.0).validate().is_err());
    }
}
