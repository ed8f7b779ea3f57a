//! Acceptance suite: every verification criterion at full scale, one
//! pass/fail line each. Run with `cargo test --test acceptance` (add
//! `-- --nocapture` to see the lines for passing criteria too).

use srb_core::verify::{
    criteria_passivity, criterion_angles, criterion_capsule, criterion_determinism, criterion_dls,
    criterion_fixture_response, criterion_mode_gate, criterion_repulsion, criterion_stiffness,
    criterion_sub_factors, CriterionOutcome,
};

fn require(outcome: &CriterionOutcome) {
    println!("{}", outcome.line());
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn criterion_01_02_passivity_and_energy_bound() {
    // 100 random band-limited force profiles, 10 s at 1 kHz each; the
    // audit must stay within discretization slack at every tick and the
    // runtime bound is asserted inside the criterion
    for outcome in criteria_passivity() {
        require(&outcome);
    }
}

#[test]
fn criterion_03_stiffness_calibration() {
    require(&criterion_stiffness());
}

#[test]
fn criterion_04_posture_angle_oracle() {
    require(&criterion_angles());
}

#[test]
fn criterion_05_sub_factor_spot_values() {
    require(&criterion_sub_factors());
}

#[test]
fn criterion_06_capsule_geometry_oracle() {
    require(&criterion_capsule());
}

#[test]
fn criterion_07_damped_least_squares() {
    require(&criterion_dls());
}

#[test]
fn criterion_08_mode_gate() {
    require(&criterion_mode_gate());
}

#[test]
fn criterion_09_fixture_directional_response() {
    require(&criterion_fixture_response());
}

#[test]
fn criterion_10_base_repulsion() {
    require(&criterion_repulsion());
}

#[test]
fn criterion_11_determinism() {
    // byte-identical traces, checked twice
    require(&criterion_determinism());
    require(&criterion_determinism());
}
