//! Straight-line recomputation of the noise model, checked against the
//! library on random configurations.

#[path = "support/oracle.rs"]
mod oracle;

use eonjam::phy::Physics;
use oracle::{consts, worst_relative_error, DF};

#[test]
fn ase_per_span() {
    let g0 = Physics::table1().g0_ase;
    let reference = 5.040208855e-17;
    assert!((g0 - reference).abs() / reference < 1e-6, "g0 = {g0}");
    assert!((consts().g0 - reference).abs() / reference < 1e-6);
}

#[test]
fn snr_matches_recomputation() {
    let worst = worst_relative_error(7, 2000);
    assert!(worst < 1e-9, "worst relative error {worst}");
}

#[test]
fn single_slot_nli_argument() {
    let c = consts();
    let arg = c.rho * DF * DF;
    assert!((arg - 0.268).abs() < 0.001, "{arg}");
    assert!((Physics::table1().rho * DF * DF - arg).abs() / arg < 1e-12);
}
