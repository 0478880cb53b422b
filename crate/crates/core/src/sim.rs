//! Discrete-event simulation of dynamic traffic.
//!
//! Arrivals are Poisson with rate `load / mean holding time`, holding times
//! are exponential, endpoints are uniform over ordered node pairs and the
//! bandwidth is uniform over the configured choices. Each replication draws
//! from its own ChaCha8 stream seeded with `base_seed + replication`; the
//! draws do not depend on admission outcomes, so every control mode sees the
//! same request sequence for a given seed.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use thiserror::Error;

use crate::control_plane::{
    BlockReason, ControlError, ControlMode, ControlPlane, NetworkState, Outcome, Request,
};
use crate::jammer::{
    ground_truth_channels, resolve_target, GroundTruth, JammerConfig, JammerError, TargetSelector,
};
use crate::metrics::{utilization_ranking, ReplicationResult, UtilizationTracker};
use crate::phy::Physics;
use crate::spectrum::{LightpathId, SlotBlock};
use crate::topology::{LinkId, RouteTable, Topology};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid traffic model: {0}")]
    InvalidTraffic(&'static str),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Jammer(#[from] JammerError),
    #[error("invalid epsilon sweep: {0}")]
    InvalidSweep(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficModel {
    pub load_erlangs: f64,
    pub mean_holding_s: f64,
    pub bandwidth_choices_gbps: Vec<f64>,
    pub requests_per_replication: u64,
    pub replications: u32,
}

impl Default for TrafficModel {
    fn default() -> Self {
        TrafficModel {
            load_erlangs: 200.0,
            mean_holding_s: 600.0,
            bandwidth_choices_gbps: vec![40.0, 200.0, 400.0],
            requests_per_replication: 100_000,
            replications: 10,
        }
    }
}

impl TrafficModel {
    /// Arrivals per second.
    pub fn arrival_rate(&self) -> f64 {
        self.load_erlangs / self.mean_holding_s
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.load_erlangs > 0.0 && self.load_erlangs.is_finite()) {
            return Err(SimError::InvalidTraffic("load_erlangs must be positive"));
        }
        if !(self.mean_holding_s > 0.0 && self.mean_holding_s.is_finite()) {
            return Err(SimError::InvalidTraffic("mean_holding_s must be positive"));
        }
        if self.bandwidth_choices_gbps.is_empty()
            || self.bandwidth_choices_gbps.iter().any(|b| !(*b > 0.0))
        {
            return Err(SimError::InvalidTraffic("bandwidth choices must be positive"));
        }
        if self.replications == 0 {
            return Err(SimError::InvalidTraffic("replications must be positive"));
        }
        Ok(())
    }
}

/// Request stream of one replication.
#[derive(Debug, Clone)]
pub struct RequestGenerator {
    rng: ChaCha8Rng,
    inter_arrival: Exp<f64>,
    holding: Exp<f64>,
    nodes: usize,
    choices: Vec<f64>,
}

impl RequestGenerator {
    pub fn new(seed: u64, nodes: usize, traffic: &TrafficModel) -> Result<Self, SimError> {
        traffic.validate()?;
        if nodes < 2 {
            return Err(SimError::InvalidTraffic("at least two nodes are required"));
        }
        Ok(RequestGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            inter_arrival: Exp::new(traffic.arrival_rate())
                .map_err(|_| SimError::InvalidTraffic("arrival rate"))?,
            holding: Exp::new(1.0 / traffic.mean_holding_s)
                .map_err(|_| SimError::InvalidTraffic("holding rate"))?,
            nodes,
            choices: traffic.bandwidth_choices_gbps.clone(),
        })
    }

    /// Next request arriving after `previous_arrival`.
    pub fn generate(&mut self, previous_arrival: f64) -> Request {
        let arrival_time = previous_arrival + self.inter_arrival.sample(&mut self.rng);
        // ordered pair without replacement: destination skips the source
        let source = self.rng.random_range(0..self.nodes);
        let mut destination = self.rng.random_range(0..self.nodes - 1);
        if destination >= source {
            destination += 1;
        }
        let bandwidth_gbps = self.choices[self.rng.random_range(0..self.choices.len())];
        let holding_time = self.holding.sample(&mut self.rng);
        Request {
            source,
            destination,
            bandwidth_gbps,
            arrival_time,
            holding_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Arrival(Request),
    Departure(LightpathId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub seq: u64,
    pub kind: EventKind,
}

impl Event {
    fn rank(&self) -> u8 {
        match self.kind {
            EventKind::Departure(_) => 0,
            EventKind::Arrival(_) => 1,
        }
    }
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.rank().cmp(&other.rank()))
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// What happened at one processed event, for observers.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Established { id: LightpathId, time: f64 },
    Blocked { reason: BlockReason, time: f64 },
    Departed { id: LightpathId, time: f64 },
}

/// Immutable inputs shared by every replication of a scenario.
#[derive(Debug, Clone)]
pub struct SimSetup {
    pub topology: Topology,
    pub routes: RouteTable,
    pub physics: Physics,
    pub tolerance_db: f64,
}

impl SimSetup {
    pub fn new(topology: Topology, physics: Physics, tolerance_db: f64) -> Result<Self, SimError> {
        let routes = topology
            .route_table()
            .map_err(|_| SimError::InvalidTraffic("topology has unroutable pairs"))?;
        Ok(SimSetup {
            topology,
            routes,
            physics,
            tolerance_db,
        })
    }
}

/// Runs one replication.
pub fn run_replication(
    setup: &SimSetup,
    traffic: &TrafficModel,
    mode: ControlMode,
    ground_truth: Option<&GroundTruth>,
    seed: u64,
) -> Result<ReplicationResult, SimError> {
    run_replication_observed(setup, traffic, mode, ground_truth, seed, |_, _, _| {})
}

/// [`run_replication`] with a callback after every processed event.
pub fn run_replication_observed<F>(
    setup: &SimSetup,
    traffic: &TrafficModel,
    mode: ControlMode,
    ground_truth: Option<&GroundTruth>,
    seed: u64,
    mut observe: F,
) -> Result<ReplicationResult, SimError>
where
    F: FnMut(&ControlPlane<'_>, &NetworkState, &Step),
{
    let plane = ControlPlane::new(
        &setup.topology,
        &setup.routes,
        setup.physics,
        mode,
        ground_truth,
        setup.tolerance_db,
    )?;
    let mut generator = RequestGenerator::new(seed, setup.topology.node_count(), traffic)?;
    let mut state = NetworkState::new(&setup.topology);
    let mut tracker = UtilizationTracker::new(setup.topology.links().len());
    let mut blocked: BTreeMap<BlockReason, u64> = BTreeMap::new();
    let mut queue: BinaryHeap<Reverse<Event>> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut generated = 0u64;
    let mut now = 0.0;

    if traffic.requests_per_replication > 0 {
        let r = generator.generate(0.0);
        queue.push(Reverse(Event {
            time: r.arrival_time,
            seq,
            kind: EventKind::Arrival(r),
        }));
        seq += 1;
        generated += 1;
    }

    while let Some(Reverse(event)) = queue.pop() {
        debug_assert!(event.time >= now);
        now = event.time;
        match event.kind {
            EventKind::Departure(id) => {
                let lp = plane.release(&mut state, id)?;
                for l in &lp.route.links {
                    tracker.vacate(*l, lp.block, now);
                }
                observe(&plane, &state, &Step::Departed { id, time: now });
            }
            EventKind::Arrival(request) => {
                let step = match plane.handle_request(&mut state, &request)? {
                    Outcome::Established(id) => {
                        let lp = state.lightpath(id).expect("just established");
                        for l in &lp.route.links {
                            tracker.occupy(*l, lp.block, now);
                        }
                        queue.push(Reverse(Event {
                            time: lp.departs_at,
                            seq,
                            kind: EventKind::Departure(id),
                        }));
                        seq += 1;
                        Step::Established { id, time: now }
                    }
                    Outcome::Blocked(reason) => {
                        *blocked.entry(reason).or_default() += 1;
                        Step::Blocked { reason, time: now }
                    }
                };
                observe(&plane, &state, &step);
                if generated < traffic.requests_per_replication {
                    let r = generator.generate(request.arrival_time);
                    queue.push(Reverse(Event {
                        time: r.arrival_time,
                        seq,
                        kind: EventKind::Arrival(r),
                    }));
                    seq += 1;
                    generated += 1;
                }
            }
        }
    }

    Ok(ReplicationResult::from_occupancy(
        traffic.requests_per_replication,
        blocked,
        tracker.finish(now),
        now,
    ))
}

/// `start, start + step, …, stop` (inclusive, tolerant to rounding).
pub fn epsilon_sweep(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, SimError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(SimError::InvalidSweep("step must be positive"));
    }
    if !(start >= 0.0 && stop >= start && stop.is_finite()) {
        return Err(SimError::InvalidSweep("need 0 <= start <= stop"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// Everything a scenario run needs besides the topology and physics.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub modes: Vec<ControlMode>,
    pub target: Option<TargetSelector>,
    pub jammed_ranges: Vec<SlotBlock>,
    pub epsilons_db: Vec<f64>,
    pub traffic: TrafficModel,
    pub base_seed: u64,
}

impl ScenarioSpec {
    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.traffic.replications as u64).map(|i| self.base_seed.wrapping_add(i))
    }
}

/// Replication results of one (mode, ε) point; `epsilon_db` is `None` for
/// the jammer-free mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub mode: ControlMode,
    pub epsilon_db: Option<f64>,
    pub replications: Vec<ReplicationResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub ranking: Vec<(LinkId, f64)>,
    pub target: Option<LinkId>,
    pub points: Vec<PointResult>,
}

impl ScenarioResult {
    pub fn point(&self, mode: ControlMode, epsilon_db: Option<f64>) -> Option<&PointResult> {
        self.points.iter().find(|p| {
            p.mode == mode
                && match (p.epsilon_db, epsilon_db) {
                    (None, None) => true,
                    (Some(a), Some(b)) => (a - b).abs() < 1e-9,
                    _ => false,
                }
        })
    }
}

/// Jammer-free replications over the scenario's seeds (the MU/LU pre-run).
pub fn pre_run(setup: &SimSetup, spec: &ScenarioSpec) -> Result<Vec<ReplicationResult>, SimError> {
    let seeds: Vec<u64> = spec.seeds().collect();
    seeds
        .par_iter()
        .map(|s| run_replication(setup, &spec.traffic, ControlMode::NoJamming, None, *s))
        .collect()
}

/// Runs every (mode, ε, replication) combination.
///
/// `ranking` is the utilization ranking to resolve MU/LU targets; when `None`
/// the jammer-free pre-run is executed to obtain it.
pub fn run_scenario(
    setup: &SimSetup,
    spec: &ScenarioSpec,
    ranking: Option<Vec<(LinkId, f64)>>,
) -> Result<ScenarioResult, SimError> {
    spec.traffic.validate()?;
    let needs_jammer = spec.modes.iter().any(|m| *m != ControlMode::NoJamming);
    if needs_jammer && spec.target.is_none() {
        return Err(SimError::Jammer(JammerError::EmptyRanking));
    }

    let mut baseline = None;
    let ranking = match ranking {
        Some(r) => r,
        None => {
            let runs = pre_run(setup, spec)?;
            let r = utilization_ranking(&runs);
            baseline = Some(runs);
            r
        }
    };

    let target = match (&spec.target, needs_jammer) {
        (Some(sel), true) => {
            let cfg = JammerConfig {
                target: sel.clone(),
                jammed_ranges: spec.jammed_ranges.clone(),
                epsilon_db: 0.0,
            };
            Some(resolve_target(&cfg, &ranking, &setup.topology)?)
        }
        _ => None,
    };

    // (mode, ε) points, then one job per replication
    let mut points: Vec<(ControlMode, Option<f64>)> = Vec::new();
    for mode in &spec.modes {
        match mode {
            ControlMode::NoJamming => points.push((*mode, None)),
            _ => points.extend(spec.epsilons_db.iter().map(|e| (*mode, Some(*e)))),
        }
    }
    let truths: Vec<Option<GroundTruth>> = points
        .iter()
        .map(|(_, eps)| match (eps, target) {
            (Some(e), Some(t)) => {
                let cfg = JammerConfig {
                    target: spec.target.clone().expect("checked above"),
                    jammed_ranges: spec.jammed_ranges.clone(),
                    epsilon_db: *e,
                };
                ground_truth_channels(&cfg, t, &setup.topology, &setup.physics).map(Some)
            }
            _ => Ok(None),
        })
        .collect::<Result<_, _>>()?;

    let seeds: Vec<u64> = spec.seeds().collect();
    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| seeds.iter().map(move |s| (p, *s)))
        .collect();
    let results: Vec<ReplicationResult> = jobs
        .par_iter()
        .map(|(p, seed)| {
            let (mode, _) = points[*p];
            if mode == ControlMode::NoJamming {
                if let Some(runs) = &baseline {
                    let i = (*seed - spec.base_seed) as usize;
                    return Ok(runs[i].clone());
                }
            }
            run_replication(setup, &spec.traffic, mode, truths[*p].as_ref(), *seed)
        })
        .collect::<Result<_, SimError>>()?;

    let mut iter = results.into_iter();
    let points = points
        .into_iter()
        .map(|(mode, epsilon_db)| PointResult {
            mode,
            epsilon_db,
            replications: iter.by_ref().take(seeds.len()).collect(),
        })
        .collect();
    Ok(ScenarioResult {
        ranking,
        target,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{load_topology, NSFNET};

    fn small_traffic(requests: u64) -> TrafficModel {
        TrafficModel {
            requests_per_replication: requests,
            replications: 1,
            ..TrafficModel::default()
        }
    }

    #[test]
    fn arrival_rate_is_load_over_holding() {
        assert!((TrafficModel::default().arrival_rate() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn generator_statistics() {
        let traffic = TrafficModel::default();
        let mut g = RequestGenerator::new(7, 14, &traffic).unwrap();
        let n = 100_000;
        let mut t = 0.0;
        let mut pairs = vec![0u32; 14 * 14];
        let mut holding = 0.0;
        let mut bw = [0u32; 3];
        for _ in 0..n {
            let r = g.generate(t);
            assert!(r.arrival_time > t);
            assert_ne!(r.source, r.destination);
            t = r.arrival_time;
            pairs[r.source * 14 + r.destination] += 1;
            holding += r.holding_time;
            bw[traffic.bandwidth_choices_gbps.iter().position(|b| *b == r.bandwidth_gbps).unwrap()] += 1;
        }
        let mean_gap = t / n as f64;
        assert!((mean_gap - 3.0).abs() < 0.09, "{mean_gap}");
        assert!((holding / n as f64 - 600.0).abs() < 18.0);
        // chi-square over 182 ordered pairs, 181 dof; 99.9th percentile ≈ 250
        let expected = n as f64 / 182.0;
        let chi2: f64 = (0..14)
            .flat_map(|s| (0..14).filter(move |d| *d != s).map(move |d| (s, d)))
            .map(|(s, d)| (pairs[s * 14 + d] as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 250.0, "{chi2}");
        assert!((0..14).all(|s| pairs[s * 15] == 0));
        for c in bw {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn event_order() {
        let a = Event { time: 1.0, seq: 5, kind: EventKind::Departure(LightpathId(0)) };
        let b = Event {
            time: 1.0,
            seq: 1,
            kind: EventKind::Arrival(Request {
                source: 0,
                destination: 1,
                bandwidth_gbps: 40.0,
                arrival_time: 1.0,
                holding_time: 1.0,
            }),
        };
        let c = Event { time: 0.5, seq: 9, kind: b.kind.clone() };
        assert!(a < b);
        assert!(c < a);
    }

    #[test]
    fn sweeps() {
        assert_eq!(epsilon_sweep(0.0, 5.0, 0.5).unwrap().len(), 11);
        let fine = epsilon_sweep(1.5, 3.0, 0.25).unwrap();
        assert_eq!(fine.len(), 7);
        assert!((fine[3] - 2.25).abs() < 1e-12);
        assert!(epsilon_sweep(0.0, 5.0, 0.0).is_err());
        assert!(epsilon_sweep(3.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn zero_requests_gives_no_data() {
        let setup = SimSetup::new(load_topology(NSFNET, 100.0).unwrap(), Physics::table1(), 0.1).unwrap();
        let r = run_replication(&setup, &small_traffic(0), ControlMode::NoJamming, None, 1).unwrap();
        assert_eq!(crate::metrics::blocking_probability(&r), None);
        assert!(r.slot_utilization.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn replication_is_deterministic_and_drains() {
        let setup = SimSetup::new(load_topology(NSFNET, 100.0).unwrap(), Physics::table1(), 0.1).unwrap();
        let traffic = small_traffic(1500);
        let mut active: i64 = 0;
        let mut last = 0.0;
        let a = run_replication_observed(&setup, &traffic, ControlMode::NoJamming, None, 3, |_, st, step| {
            match step {
                Step::Established { time, .. } | Step::Blocked { time, .. } | Step::Departed { time, .. } => {
                    assert!(*time >= last);
                    last = *time;
                }
            }
            match step {
                Step::Established { .. } => active += 1,
                Step::Departed { .. } => active -= 1,
                _ => {}
            }
            assert!(active >= 0);
            assert_eq!(active as usize, st.active_count());
        })
        .unwrap();
        assert_eq!(active, 0);
        let b = run_replication(&setup, &traffic, ControlMode::NoJamming, None, 3).unwrap();
        assert_eq!(a, b);
        let p = crate::metrics::blocking_probability(&a).unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
}
