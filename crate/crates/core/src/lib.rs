//! Elastic optical network simulator with a jamming-aware physical layer.
//!
//! The crate is organised bottom-up:
//!
//! * [`topology`] – fiber graph, span counts, fixed shortest-path routes;
//! * [`spectrum`] – per-link slot grids and First Fit with guardbands;
//! * [`phy`] – Gaussian-noise SNR model with jamming terms;
//! * [`jammer`] – attacker configuration and ground-truth jammer channels;
//! * [`control_plane`] – admission, QoT evaluation, detection and avoidance;
//! * [`sim`] – Poisson traffic, event loop, replications and ε sweeps;
//! * [`metrics`] – blocking probability and utilization statistics.

pub mod control_plane;
pub mod jammer;
pub mod metrics;
pub mod phy;
pub mod sim;
pub mod spectrum;
pub mod topology;
