//! Request admission: fixed-route RSA, QoT evaluation, jamming detection and
//! avoidance.
//!
//! For each request the controller walks the modulation formats from the
//! most to the least spectrally efficient. For each format it asks First Fit
//! for a block on the cached route and evaluates the candidate:
//!
//! 1. in aware mode, the measured SNR (with the jammer) is compared with the
//!    estimate (without it); a gap above the tolerance on a block that
//!    crosses a jammed range marks that range forbidden on the attacked fiber
//!    and First Fit is asked again with the same format;
//! 2. the candidate's own SNR must reach the format threshold;
//! 3. no active lightpath sharing a link may fall below its own threshold
//!    once the candidate is added.
//!
//! A failed QoT check moves on to the next format, and running out of formats
//! blocks the request. Formats that fail even on an idle route are skipped
//! without consulting First Fit.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::jammer::GroundTruth;
use crate::phy::{
    db_to_linear, linear_to_db, noise_breakdown, qot_verdict, Channel, HopState, Modulation,
    NoiseBreakdown, PhyError, Physics, Verdict, MODULATIONS,
};
use crate::spectrum::{self, first_fit, LightpathId, SlotBlock, SlotGrid, SpectrumError};
use crate::topology::{LinkId, NodeIndex, Route, RouteTable, Topology};

/// Default tolerance of the power-mismatch detector (dB).
pub const DEFAULT_TOLERANCE_DB: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControlMode {
    /// No attacker present.
    NoJamming,
    /// Attacker present, controller ignores it.
    Unaware,
    /// Attacker present, controller detects and avoids jammed ranges.
    Aware,
}

impl ControlMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControlMode::NoJamming => "no_jamming",
            ControlMode::Unaware => "unaware",
            ControlMode::Aware => "aware",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "no_jamming" => Some(ControlMode::NoJamming),
            "unaware" => Some(ControlMode::Unaware),
            "aware" => Some(ControlMode::Aware),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ControlError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error("no route from node {0} to node {1}")]
    NoRoute(NodeIndex, NodeIndex),
    #[error("bandwidth must be positive, got {0}")]
    InvalidBandwidth(f64),
    #[error("mode {0:?} does not match the jammer configuration")]
    ModeMismatch(ControlMode),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub source: NodeIndex,
    pub destination: NodeIndex,
    pub bandwidth_gbps: f64,
    pub arrival_time: f64,
    pub holding_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lightpath {
    pub id: LightpathId,
    pub route: Route,
    pub block: SlotBlock,
    pub modulation: Modulation,
    pub bandwidth_gbps: f64,
    pub established_at: f64,
    pub departs_at: f64,
    pub channel: Channel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockReason {
    NoSpectrum,
    QotFail,
    JammedNoAlternative,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Established(LightpathId),
    Blocked(BlockReason),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evaluation {
    Accept(NoiseBreakdown),
    RejectQot,
    /// Jammed ranges crossed by the candidate, per attacked link.
    RejectJammed(Vec<SlotBlock>),
}

/// Slots needed for `bandwidth_gbps` at `modulation` on a grid of
/// `slot_width_hz` slots: `ceil(B / (Δf[GHz] · bits))`.
pub fn required_slots(bandwidth_gbps: f64, modulation: &Modulation, slot_width_hz: f64) -> usize {
    let per_slot = slot_width_hz / 1e9 * modulation.bits_per_symbol as f64;
    (bandwidth_gbps / per_slot).ceil() as usize
}

/// Controller's view of the network.
#[derive(Debug, Clone)]
pub struct NetworkState {
    grids: Vec<SlotGrid>,
    lightpaths: BTreeMap<LightpathId, Lightpath>,
    /// Active lightpaths per directed link, in id order, with their channels
    /// kept alongside.
    on_link: Vec<Vec<LightpathId>>,
    channels: Vec<Vec<Channel>>,
    /// True-physics noise of each active lightpath.
    noise: BTreeMap<LightpathId, NoiseBreakdown>,
    forbidden: BTreeSet<(LinkId, SlotBlock)>,
    next_id: u64,
}

impl NetworkState {
    pub fn new(topology: &Topology) -> Self {
        let n = topology.links().len();
        NetworkState {
            grids: topology.links().iter().map(|l| SlotGrid::new(l.id)).collect(),
            lightpaths: BTreeMap::new(),
            on_link: vec![Vec::new(); n],
            channels: vec![Vec::new(); n],
            noise: BTreeMap::new(),
            forbidden: BTreeSet::new(),
            next_id: 0,
        }
    }

    pub fn grid(&self, link: LinkId) -> &SlotGrid {
        &self.grids[link.0]
    }

    pub fn grids(&self) -> &[SlotGrid] {
        &self.grids
    }

    pub fn lightpath(&self, id: LightpathId) -> Option<&Lightpath> {
        self.lightpaths.get(&id)
    }

    pub fn lightpaths(&self) -> impl Iterator<Item = &Lightpath> {
        self.lightpaths.values()
    }

    pub fn active_count(&self) -> usize {
        self.lightpaths.len()
    }

    /// Ranges marked forbidden so far, per directed link.
    pub fn forbidden(&self) -> &BTreeSet<(LinkId, SlotBlock)> {
        &self.forbidden
    }

    /// Cached true-physics noise terms of an active lightpath.
    pub fn noise_of(&self, id: LightpathId) -> Option<&NoiseBreakdown> {
        self.noise.get(&id)
    }

    fn grids_mut(&mut self, links: &[LinkId]) -> Vec<&mut SlotGrid> {
        let wanted: BTreeSet<usize> = links.iter().map(|l| l.0).collect();
        self.grids
            .iter_mut()
            .enumerate()
            .filter(|(i, _)| wanted.contains(i))
            .map(|(_, g)| g)
            .collect()
    }

    fn forbid(&mut self, link: LinkId, range: SlotBlock) -> usize {
        self.forbidden.insert((link, range));
        self.grids[link.0].forbid(range)
    }

    /// Lightpaths sharing at least one link with `route`, excluding `skip`,
    /// in id order.
    fn neighbours(&self, route: &Route, skip: Option<LightpathId>) -> Vec<LightpathId> {
        let mut ids: Vec<LightpathId> = route
            .links
            .iter()
            .flat_map(|l| self.on_link[l.0].iter().copied())
            .filter(|id| Some(*id) != skip)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    fn attach(&mut self, link: LinkId, id: LightpathId, channel: Channel) {
        let at = self.on_link[link.0].partition_point(|x| *x < id);
        self.on_link[link.0].insert(at, id);
        self.channels[link.0].insert(at, channel);
    }

    fn detach(&mut self, link: LinkId, id: LightpathId) {
        if let Ok(at) = self.on_link[link.0].binary_search(&id) {
            self.on_link[link.0].remove(at);
            self.channels[link.0].remove(at);
        }
    }
}

/// Stateless admission logic for one scenario.
#[derive(Debug, Clone)]
pub struct ControlPlane<'a> {
    pub topology: &'a Topology,
    pub routes: &'a RouteTable,
    pub physics: Physics,
    pub mode: ControlMode,
    pub ground_truth: Option<&'a GroundTruth>,
    pub tolerance_db: f64,
}

impl<'a> ControlPlane<'a> {
    pub fn new(
        topology: &'a Topology,
        routes: &'a RouteTable,
        physics: Physics,
        mode: ControlMode,
        ground_truth: Option<&'a GroundTruth>,
        tolerance_db: f64,
    ) -> Result<Self, ControlError> {
        if (mode == ControlMode::NoJamming) != ground_truth.is_none() {
            return Err(ControlError::ModeMismatch(mode));
        }
        Ok(ControlPlane {
            topology,
            routes,
            physics,
            mode,
            ground_truth,
            tolerance_db,
        })
    }

    fn epsilon_w(&self) -> f64 {
        self.ground_truth.map_or(0.0, |g| g.epsilon_w)
    }

    fn jammers_on(&self, link: LinkId) -> &[Channel] {
        self.ground_truth.map_or(&[], |g| g.jammers_on(link))
    }

    /// True-physics noise of a candidate `channel` on `route` against every
    /// active lightpath.
    fn breakdown(
        &self,
        state: &NetworkState,
        channel: &Channel,
        route: &Route,
    ) -> Result<NoiseBreakdown, PhyError> {
        let hops: Vec<HopState> = route
            .links
            .iter()
            .map(|l| HopState {
                spans: self.topology.link(*l).span_count,
                co_channels: &state.channels[l.0],
                jammers: self.jammers_on(*l),
            })
            .collect();
        noise_breakdown(channel, &hops, self.epsilon_w(), &self.physics)
    }

    /// True-physics noise of an active lightpath against all the others.
    fn breakdown_of(&self, state: &NetworkState, id: LightpathId) -> Result<NoiseBreakdown, PhyError> {
        let lp = &state.lightpaths[&id];
        let co: Vec<Vec<Channel>> = lp
            .route
            .links
            .iter()
            .map(|l| {
                state.on_link[l.0]
                    .iter()
                    .zip(&state.channels[l.0])
                    .filter(|(other, _)| **other != id)
                    .map(|(_, c)| *c)
                    .collect()
            })
            .collect();
        let hops: Vec<HopState> = lp
            .route
            .links
            .iter()
            .zip(&co)
            .map(|(l, c)| HopState {
                spans: self.topology.link(*l).span_count,
                co_channels: c,
                jammers: self.jammers_on(*l),
            })
            .collect();
        noise_breakdown(&lp.channel, &hops, self.epsilon_w(), &self.physics)
    }

    /// Whether a `width`-slot channel at `modulation` passes on `route` with
    /// no other traffic and no jammer. Every other noise term is
    /// non-negative, so failing here rules out every block.
    fn reachable(&self, route: &Route, width: usize, modulation: &Modulation) -> Result<bool, PhyError> {
        let channel = self.physics.channel(SlotBlock::new(0, width));
        let hops: Vec<HopState> = route
            .links
            .iter()
            .map(|l| HopState {
                spans: self.topology.link(*l).span_count,
                co_channels: &[],
                jammers: &[],
            })
            .collect();
        let isolated = noise_breakdown(&channel, &hops, 0.0, &self.physics)?;
        Ok(qot_verdict(isolated.snr(), modulation) == Verdict::Pass)
    }

    /// Power-mismatch check: measured SNR (with the jammer) against the
    /// estimate (without it).
    pub fn detect_jamming(&self, measured: &NoiseBreakdown) -> bool {
        let estimated = measured.without_jamming();
        match (linear_to_db(measured.snr()), linear_to_db(estimated.snr())) {
            (Ok(m), Ok(e)) => (m - e).abs() > self.tolerance_db,
            _ => false,
        }
    }

    /// Recomputes the SNR of an active lightpath from scratch.
    pub fn lightpath_snr(&self, state: &NetworkState, id: LightpathId) -> Result<f64, PhyError> {
        Ok(self.breakdown_of(state, id)?.snr())
    }

    pub fn evaluate_candidate(
        &self,
        state: &NetworkState,
        route: &Route,
        block: SlotBlock,
        modulation: &Modulation,
    ) -> Result<Evaluation, ControlError> {
        let channel = self.physics.channel(block);
        let measured = self.breakdown(state, &channel, route)?;

        if self.mode == ControlMode::Aware && self.detect_jamming(&measured) {
            let gt = self.ground_truth.expect("aware mode carries a ground truth");
            let crossed: BTreeSet<SlotBlock> = route
                .links
                .iter()
                .flat_map(|l| gt.overlapping_ranges(*l, block))
                .collect();
            // a gap without a crossed range is out-of-band interference:
            // nothing to avoid, the QoT check decides
            if !crossed.is_empty() {
                return Ok(Evaluation::RejectJammed(crossed.into_iter().collect()));
            }
        }

        if qot_verdict(measured.snr(), modulation) == Verdict::Fail {
            return Ok(Evaluation::RejectQot);
        }

        let g_c = channel.psd;
        for id in state.neighbours(route, None) {
            let lp = &state.lightpaths[&id];
            let base = state.noise[&id];
            let mut added = 0.0;
            for l in lp.route.links.iter().filter(|l| route.uses(**l)) {
                let spans = self.topology.link(*l).span_count as f64;
                let f = lp.channel.spacing(&channel);
                let half = channel.bandwidth_hz / 2.0;
                if f <= half {
                    return Err(PhyError::Overlap {
                        target_hz: lp.channel.center_frequency_hz,
                        other_hz: channel.center_frequency_hz,
                    }
                    .into());
                }
                added += spans
                    * self.physics.phi
                    * lp.channel.psd
                    * g_c
                    * g_c
                    * ((f + half) / (f - half)).ln();
            }
            let snr = base.signal / (base.noise() + added);
            if qot_verdict(snr, &lp.modulation) == Verdict::Fail {
                return Ok(Evaluation::RejectQot);
            }
        }
        Ok(Evaluation::Accept(measured))
    }

    /// Runs the admission loop for one request, establishing the lightpath on
    /// success.
    pub fn handle_request(
        &self,
        state: &mut NetworkState,
        request: &Request,
    ) -> Result<Outcome, ControlError> {
        if !(request.bandwidth_gbps > 0.0) {
            return Err(ControlError::InvalidBandwidth(request.bandwidth_gbps));
        }
        let route = self
            .routes
            .get(request.source, request.destination)
            .ok_or(ControlError::NoRoute(request.source, request.destination))?;
        let aware = self.mode == ControlMode::Aware;
        let mut saw_qot = false;
        let mut saw_jammed = false;

        for modulation in MODULATIONS.iter().rev() {
            let width = required_slots(
                request.bandwidth_gbps,
                modulation,
                self.physics.params.slot_width_hz,
            );
            if !self.reachable(route, width, modulation)? {
                saw_qot = true;
                continue;
            }
            loop {
                let grids: Vec<&SlotGrid> = route.links.iter().map(|l| state.grid(*l)).collect();
                let Some(block) = first_fit(&grids, width, aware) else {
                    break;
                };
                match self.evaluate_candidate(state, route, block, modulation)? {
                    Evaluation::Accept(_) => {
                        let id = self.establish(state, request, route, block, *modulation)?;
                        return Ok(Outcome::Established(id));
                    }
                    Evaluation::RejectQot => {
                        saw_qot = true;
                        break;
                    }
                    Evaluation::RejectJammed(ranges) => {
                        saw_jammed = true;
                        let gt = self.ground_truth.expect("aware mode carries a ground truth");
                        let mut changed = 0;
                        for link in gt.attacked {
                            for r in &ranges {
                                changed += state.forbid(link, *r);
                            }
                        }
                        if changed == 0 {
                            // already forbidden yet offered again: cannot happen
                            // with a forbidden-aware First Fit
                            break;
                        }
                    }
                }
            }
        }
        let reason = if saw_jammed {
            BlockReason::JammedNoAlternative
        } else if saw_qot {
            BlockReason::QotFail
        } else {
            BlockReason::NoSpectrum
        };
        Ok(Outcome::Blocked(reason))
    }

    fn establish(
        &self,
        state: &mut NetworkState,
        request: &Request,
        route: &Route,
        block: SlotBlock,
        modulation: Modulation,
    ) -> Result<LightpathId, ControlError> {
        let id = LightpathId(state.next_id);
        state.next_id += 1;
        spectrum::allocate(&mut state.grids_mut(&route.links), block, id)?;
        let channel = self.physics.channel(block);
        for l in &route.links {
            state.attach(*l, id, channel);
        }
        state.lightpaths.insert(
            id,
            Lightpath {
                id,
                route: route.clone(),
                block,
                modulation,
                bandwidth_gbps: request.bandwidth_gbps,
                established_at: request.arrival_time,
                departs_at: request.arrival_time + request.holding_time,
                channel,
            },
        );
        self.refresh_noise(state, route, None)?;
        Ok(id)
    }

    /// Tears down an active lightpath and returns it.
    pub fn release(
        &self,
        state: &mut NetworkState,
        id: LightpathId,
    ) -> Result<Lightpath, ControlError> {
        let lp = state
            .lightpaths
            .remove(&id)
            .ok_or(SpectrumError::UnknownLightpath(id, LinkId(usize::MAX)))?;
        state.noise.remove(&id);
        for l in &lp.route.links {
            state.detach(*l, id);
        }
        spectrum::release(&mut state.grids_mut(&lp.route.links), id)?;
        self.refresh_noise(state, &lp.route, None)?;
        Ok(lp)
    }

    /// Recomputes the cached noise of every lightpath touching `route`.
    fn refresh_noise(
        &self,
        state: &mut NetworkState,
        route: &Route,
        skip: Option<LightpathId>,
    ) -> Result<(), PhyError> {
        for id in state.neighbours(route, skip) {
            let b = self.breakdown_of(state, id)?;
            state.noise.insert(id, b);
        }
        Ok(())
    }

    /// Active lightpaths whose recomputed SNR is below their threshold,
    /// allowing `slack_db` of numerical slack.
    pub fn qot_violations(&self, state: &NetworkState, slack_db: f64) -> Result<Vec<LightpathId>, PhyError> {
        let mut bad = Vec::new();
        for lp in state.lightpaths.values() {
            let snr = self.lightpath_snr(state, lp.id)?;
            if snr < db_to_linear(lp.modulation.snr_threshold_db - slack_db) {
                bad.push(lp.id);
            }
        }
        Ok(bad)
    }
}
