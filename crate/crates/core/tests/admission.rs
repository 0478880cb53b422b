use eonjam::control_plane::{ControlMode, NetworkState};
use eonjam::jammer::{default_ranges, ground_truth_channels, GroundTruth, JammerConfig, TargetSelector};
use eonjam::phy::Physics;
use eonjam::sim::{run_replication_observed, SimSetup, Step, TrafficModel};
use eonjam::spectrum::SlotState;
use eonjam::topology::{load_topology, LinkId, NSFNET};

fn setup() -> SimSetup {
    let topo = load_topology(NSFNET, 100.0).unwrap();
    SimSetup::new(topo, Physics::table1(), 0.1).unwrap()
}

fn traffic(requests: u64) -> TrafficModel {
    TrafficModel {
        requests_per_replication: requests,
        replications: 1,
        ..Default::default()
    }
}

fn jammer(setup: &SimSetup, link: &str, epsilon_db: f64) -> GroundTruth {
    let target = setup.topology.find_link(link).unwrap();
    let config = JammerConfig::new(TargetSelector::Explicit(link.into()), epsilon_db);
    ground_truth_channels(&config, target, &setup.topology, &setup.physics).unwrap()
}

fn record(
    setup: &SimSetup,
    mode: ControlMode,
    gt: Option<&GroundTruth>,
    seed: u64,
) -> (Vec<Step>, eonjam::metrics::ReplicationResult) {
    let mut steps = Vec::new();
    let result = run_replication_observed(setup, &traffic(1500), mode, gt, seed, |_, _, s| {
        steps.push(s.clone())
    })
    .unwrap();
    (steps, result)
}

#[test]
fn every_active_circuit_meets_its_threshold() {
    let s = setup();
    for (mode, eps) in [
        (ControlMode::NoJamming, 0.0),
        (ControlMode::Unaware, 2.0),
        (ControlMode::Unaware, 5.0),
        (ControlMode::Aware, 3.0),
    ] {
        let gt = (mode != ControlMode::NoJamming).then(|| jammer(&s, "13->9", eps));
        let mut checked = 0;
        run_replication_observed(&s, &traffic(1500), mode, gt.as_ref(), 11, |plane, state, _| {
            let bad = plane.qot_violations(state, 1e-9).unwrap();
            assert!(bad.is_empty(), "{mode:?} at {eps} dB: {bad:?} below threshold");
            checked += 1;
        })
        .unwrap();
        assert!(checked >= 1500);
    }
}

fn forbidden_overlap(state: &NetworkState) -> bool {
    state.lightpaths().any(|lp| {
        lp.route.links.iter().any(|l| {
            lp.block
                .range()
                .any(|s| state.grid(*l).state(s) == SlotState::Forbidden)
        })
    })
}

#[test]
fn aware_mode_never_uses_flagged_slots() {
    let s = setup();
    for eps in [0.5, 2.25, 5.0] {
        let gt = jammer(&s, "13->9", eps);
        let attacked: Vec<LinkId> = gt.attacked.to_vec();
        let mut seen = std::collections::BTreeSet::new();
        run_replication_observed(&s, &traffic(1500), ControlMode::Aware, Some(&gt), 3, |_, state, _| {
            assert!(!forbidden_overlap(state));
            assert!(state.forbidden().is_superset(&seen), "forbidden set shrank");
            seen = state.forbidden().clone();
            for lp in state.lightpaths() {
                for l in lp.route.links.iter().filter(|l| attacked.contains(l)) {
                    for r in default_ranges() {
                        assert!(
                            !lp.block.overlaps(&r),
                            "{:?} inside jammed range {:?} on {:?} at {eps} dB",
                            lp.block,
                            r,
                            l
                        );
                    }
                }
            }
        })
        .unwrap();
        assert!(seen.iter().all(|(l, r)| attacked.contains(l) && default_ranges().contains(r)));
    }
}

#[test]
fn zero_epsilon_matches_no_jamming() {
    let s = setup();
    let base = record(&s, ControlMode::NoJamming, None, 5);
    for mode in [ControlMode::Unaware, ControlMode::Aware] {
        let gt = jammer(&s, "13->9", 0.0);
        let run = record(&s, mode, Some(&gt), 5);
        assert_eq!(run.0, base.0, "{mode:?} diverged");
        assert_eq!(run.1, base.1);
    }
}

#[test]
fn same_seed_same_run() {
    let s = setup();
    let gt = jammer(&s, "9->13", 2.5);
    let a = record(&s, ControlMode::Aware, Some(&gt), 42);
    let b = record(&s, ControlMode::Aware, Some(&gt), 42);
    assert_eq!(a, b);
    let c = record(&s, ControlMode::Aware, Some(&gt), 43);
    assert_ne!(a.0, c.0);
}
