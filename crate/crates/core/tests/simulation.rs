//! End-to-end checks through the public simulation API and the shipped
//! scenario library.

use srb_core::ergonomics::{replay, ErgonomicThresholds, JointAngles, Side};
use srb_core::sim::{
    compute_metrics, emit_plot_data, load_scenario, load_scenario_str, read_trace, run_scenario,
    write_trace,
};
use srb_core::verify::forward_posture_keypoints;

fn scenario_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

#[test]
fn shipped_scenarios_parse_and_run() {
    for name in [
        "elbow_overextension.toml",
        "loco_manipulation.toml",
        "gluing_path.toml",
        "passivity_battery.toml",
    ] {
        let scenario = load_scenario(scenario_path(name)).unwrap_or_else(|e| {
            panic!("scenario {name} failed to load: {e}");
        });
        // quick run: truncate to half a second via a fresh config string
        // is not possible on the typed struct, so just run the full thing
        // for the two short ones and spot-check the rest parse
        if name == "elbow_overextension.toml" {
            let trace = run_scenario(&scenario).expect("runs");
            assert_eq!(trace.records.len(), 6500);
        }
    }
}

#[test]
fn trace_file_round_trip_through_disk() {
    let scenario = load_scenario_str("duration_s = 0.2\n").unwrap();
    let trace = run_scenario(&scenario).unwrap();
    let dir = std::env::temp_dir().join(format!("srb-trace-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("trace.csv");

    let mut buf = Vec::new();
    write_trace(&trace, &mut buf).unwrap();
    std::fs::write(&path, &buf).unwrap();
    let back = read_trace(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(trace, back);

    // metrics are invariant under re-serialization
    assert_eq!(
        compute_metrics(&trace, 0.1).unwrap(),
        compute_metrics(&back, 0.1).unwrap()
    );

    // plot emission produces parseable two-column data in [0, 1]
    let mut plot = Vec::new();
    emit_plot_data(&back, "f", &mut plot).unwrap();
    let text = String::from_utf8(plot).unwrap();
    assert!(text.lines().count() == trace.records.len() + 1);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn audit_scenario_respects_the_energy_bound() {
    let scenario = load_scenario(scenario_path("passivity_battery.toml")).unwrap();
    let trace = run_scenario(&scenario).unwrap();
    for r in &trace.records {
        assert!(
            r.storage - r.bound <= 1e-3 * r.bound.max(1e-9),
            "V - bound = {} at t={}",
            r.storage - r.bound,
            r.t_s
        );
    }
    // the wrench actually exercised the system
    let max_f = trace
        .records
        .iter()
        .map(|r| r.f_h.norm())
        .fold(0.0, f64::max);
    assert!(max_f > 40.0 && max_f <= 50.0 + 1e-9);
}

#[test]
fn keypoint_replay_scores_offline() {
    // build a replay file from the forward posture model, write it, read
    // it back and score it
    let mut rows = Vec::new();
    for k in 0..50 {
        let t = k as f64 * 0.01;
        let angles = JointAngles {
            abduction: 0.1,
            flexion: 0.2,
            rotation: 0.1,
            elbow: 1.7 + 0.4 * (t * 3.0).sin(),
            bending: 0.05,
        };
        rows.push((t, forward_posture_keypoints(&angles, Side::Right)));
    }
    let mut buf = Vec::new();
    replay::write_keypoint_csv(&mut buf, &rows).unwrap();
    let back = replay::read_keypoint_csv(buf.as_slice(), Side::Right).unwrap();
    assert_eq!(back.len(), rows.len());
    let scores = replay::score_rows(&back, &ErgonomicThresholds::default());
    assert!(scores.iter().all(|(_, s)| (0.0..=1.0).contains(&s.total)));
    // the swept elbow crosses in and out of the comfortable window
    assert!(scores.iter().any(|(_, s)| s.total > 0.9));
    assert!(scores.iter().any(|(_, s)| s.total < 0.5));
}

#[test]
fn closed_loop_tracking_error_stays_bounded_and_settles() {
    // drive the end-effector through a reachable sweep, then hold: the
    // pose error between the admittance model and the chain must stay
    // bounded throughout and settle below 1e-3 m / 1e-2 rad
    let text = r#"
duration_s = 3.0

initial_q_rad = [0.0, 0.0, 0.0, 0.0, -0.5, 1.1, -0.6, 0.0, 0.0]

[human]
pelvis_xyz_m = [1.2984, -0.2, 0.6769]

[[reference]]
t_s = 0.0
xyz_m = [1.0184, 0.0, 0.8269]

[[reference]]
t_s = 1.5
xyz_m = [1.00, 0.08, 0.80]

[[reference]]
t_s = 3.0
xyz_m = [1.00, 0.08, 0.80]
"#;
    let trace = run_scenario(&load_scenario_str(text).unwrap()).unwrap();
    let max_pos = trace
        .records
        .iter()
        .map(|r| r.xe_pos_norm)
        .fold(0.0, f64::max);
    let max_rot = trace
        .records
        .iter()
        .map(|r| r.xe_rot_norm)
        .fold(0.0, f64::max);
    assert!(max_pos < 5e-3, "position error peaked at {max_pos}");
    assert!(max_rot < 5e-2, "rotation error peaked at {max_rot}");
    let last = trace.records.last().unwrap();
    assert!(
        last.xe_pos_norm <= 1e-3,
        "settled position error {}",
        last.xe_pos_norm
    );
    assert!(
        last.xe_rot_norm <= 1e-2,
        "settled rotation error {}",
        last.xe_rot_norm
    );
}

#[test]
fn baseline_flag_reports_unit_control_score_and_no_feedback() {
    let text = std::fs::read_to_string(scenario_path("elbow_overextension.toml")).unwrap();
    let baseline = format!("baseline = true\n{text}");
    let trace = run_scenario(&load_scenario_str(&baseline).unwrap()).unwrap();
    for r in &trace.records {
        assert_eq!(r.a_ctrl, 1.0);
        assert_eq!(r.u_c_force.norm(), 0.0);
    }
    // the measured score still reflects the true posture
    assert!(trace.records.iter().any(|r| r.a == 0.0));
}
