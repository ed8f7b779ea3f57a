//! Scenario configuration: structured text with explicit units in key
//! names, defaults matching the controller's standard parameter tables.

use super::SimError;
use crate::ergonomics::{ErgonomicThresholds, Side};
use crate::fixture::FixtureParams;
use crate::kinematics::{ChainModel, RepulsionConfig};
use crate::math::Vec3;
use serde::Deserialize;
use std::path::Path;

/// Saturated hand impedance driving the end-effector toward a scripted
/// reference; the simplest force model that lets scenarios push into the
/// fixtures the way a human would.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HumanForceModel {
    pub k_h_n_per_m: f64,
    pub d_h_ns_per_m: f64,
    pub saturation_n: f64,
    /// Optional torque channel: scripted torque waypoints are saturated to
    /// this magnitude.
    pub saturation_nm: f64,
}

impl Default for HumanForceModel {
    fn default() -> Self {
        Self {
            k_h_n_per_m: 400.0,
            d_h_ns_per_m: 30.0,
            saturation_n: 40.0,
            saturation_nm: 5.0,
        }
    }
}

/// Band-limited random wrench synthesis for audit scenarios: per-axis sums
/// of sinusoids below the cutoff, scaled so the force and torque norms
/// stay within the given caps.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomWrenchConfig {
    pub bandwidth_hz: f64,
    pub harmonics: usize,
    pub max_force_n: f64,
    pub max_torque_nm: f64,
}

impl Default for RandomWrenchConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: 2.0,
            harmonics: 6,
            max_force_n: 50.0,
            max_torque_nm: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceWaypoint {
    pub t_s: f64,
    pub xyz_m: [f64; 3],
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorqueWaypoint {
    pub t_s: f64,
    pub xyz_nm: [f64; 3],
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarWaypoint {
    pub t_s: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeWaypoint {
    pub t_s: f64,
    pub mode: crate::kinematics::Mode,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleDisc {
    pub center_xy_m: [f64; 2],
    pub radius_m: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegWaypoint {
    pub t_s: f64,
    pub left_xy_m: [f64; 2],
    pub right_xy_m: [f64; 2],
}

/// Synthetic human geometry in the scenario file.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HumanConfig {
    pub pelvis_xyz_m: [f64; 3],
    /// Horizontal facing direction (toward the robot).
    pub forward_xy: [f64; 2],
    pub upper_arm_m: f64,
    pub forearm_m: f64,
    pub shoulder_halfwidth_m: f64,
    pub trunk_len_m: f64,
    pub knee_drop_m: f64,
}

impl Default for HumanConfig {
    fn default() -> Self {
        // facing the robot along -x; the right shoulder sits at
        // (1.42, 0, 1.20), which puts the default chain's home handle at a
        // comfortable 105-degree elbow angle
        Self {
            pelvis_xyz_m: [1.42, -0.2, 0.65],
            forward_xy: [-1.0, 0.0],
            upper_arm_m: 0.32,
            forearm_m: 0.30,
            shoulder_halfwidth_m: 0.20,
            trunk_len_m: 0.55,
            knee_drop_m: 0.45,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapsuleConfig {
    pub length_m: f64,
    pub radius_m: f64,
}

impl Default for CapsuleConfig {
    fn default() -> Self {
        Self {
            length_m: 0.31,
            radius_m: 0.375,
        }
    }
}

/// Raw scenario file contents; [`Scenario`] is the validated form.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ScenarioFile {
    duration_s: Option<f64>,
    t_c_s: f64,
    seed: u64,
    baseline: bool,
    side: Side,
    a_th: f64,
    leg_radius_m: f64,
    human: HumanConfig,
    force_model: HumanForceModel,
    random_wrench: Option<RandomWrenchConfig>,
    capsule: CapsuleConfig,
    repulsion: RepulsionConfig,
    thresholds: ErgonomicThresholds,
    fixture_arm: FixtureParams,
    fixture_base: FixtureParams,
    chain_toml: Option<String>,
    initial_q_rad: Option<Vec<f64>>,
    reference: Vec<ReferenceWaypoint>,
    torque_script: Vec<TorqueWaypoint>,
    trunk_bend: Vec<ScalarWaypoint>,
    mode_script: Vec<ModeWaypoint>,
    obstacles: Vec<ObstacleDisc>,
    leg_script: Vec<LegWaypoint>,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        Self {
            duration_s: None,
            t_c_s: 1e-3,
            seed: 0,
            baseline: false,
            side: Side::Right,
            a_th: 0.5,
            leg_radius_m: 0.07,
            human: HumanConfig::default(),
            force_model: HumanForceModel::default(),
            random_wrench: None,
            capsule: CapsuleConfig::default(),
            repulsion: RepulsionConfig::default(),
            thresholds: ErgonomicThresholds::default(),
            fixture_arm: FixtureParams::arm(),
            fixture_base: FixtureParams::base(),
            chain_toml: None,
            initial_q_rad: None,
            reference: Vec::new(),
            torque_script: Vec::new(),
            trunk_bend: Vec::new(),
            mode_script: Vec::new(),
            obstacles: Vec::new(),
            leg_script: Vec::new(),
        }
    }
}

/// Fully resolved simulation configuration.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub duration_s: f64,
    pub t_c_s: f64,
    pub seed: u64,
    pub baseline: bool,
    pub side: Side,
    pub a_th: f64,
    pub leg_radius_m: f64,
    pub human: HumanConfig,
    pub force_model: HumanForceModel,
    pub random_wrench: Option<RandomWrenchConfig>,
    pub capsule: CapsuleConfig,
    pub repulsion: RepulsionConfig,
    pub thresholds: ErgonomicThresholds,
    pub fixture_arm: FixtureParams,
    pub fixture_base: FixtureParams,
    pub chain: ChainModel,
    pub initial_q_rad: Option<Vec<f64>>,
    pub reference: Vec<ReferenceWaypoint>,
    pub torque_script: Vec<TorqueWaypoint>,
    pub trunk_bend: Vec<ScalarWaypoint>,
    pub mode_script: Vec<ModeWaypoint>,
    pub obstacles: Vec<ObstacleDisc>,
    pub leg_script: Vec<LegWaypoint>,
}

fn invalid(field: &str, msg: impl Into<String>) -> SimError {
    SimError::Invalid {
        field: field.to_string(),
        msg: msg.into(),
    }
}

fn check_sorted(times: impl Iterator<Item = f64>, field: &str) -> Result<(), SimError> {
    let mut prev = f64::NEG_INFINITY;
    for (i, t) in times.enumerate() {
        if !t.is_finite() {
            return Err(invalid(field, format!("waypoint {i} has non-finite time")));
        }
        if t < prev {
            return Err(invalid(
                field,
                format!("waypoint {i} breaks monotone time order"),
            ));
        }
        prev = t;
    }
    Ok(())
}

/// Parse and validate a scenario from TOML text.
pub fn load_scenario_str(text: &str) -> Result<Scenario, SimError> {
    let raw: ScenarioFile = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;

    let duration_s = raw
        .duration_s
        .ok_or_else(|| invalid("duration_s", "required field missing"))?;
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(invalid("duration_s", "must be positive"));
    }
    if !(raw.t_c_s.is_finite() && raw.t_c_s > 0.0) {
        return Err(invalid("t_c_s", "must be positive"));
    }
    if !(0.0..=1.0).contains(&raw.a_th) {
        return Err(invalid("a_th", "must lie in [0, 1]"));
    }
    if raw.leg_radius_m <= 0.0 {
        return Err(invalid("leg_radius_m", "must be positive"));
    }
    raw.thresholds
        .validate()
        .map_err(|m| invalid("thresholds", m))?;
    raw.fixture_arm
        .validate()
        .map_err(|e| invalid("fixture_arm", e.to_string()))?;
    raw.fixture_base
        .validate()
        .map_err(|e| invalid("fixture_base", e.to_string()))?;
    raw.repulsion
        .validate()
        .map_err(|e| invalid("repulsion", e.to_string()))?;
    if raw.capsule.length_m <= 0.0 || raw.capsule.radius_m <= 0.0 {
        return Err(invalid("capsule", "length and radius must be positive"));
    }
    let hf = &raw.human;
    for (name, v) in [
        ("human.upper_arm_m", hf.upper_arm_m),
        ("human.forearm_m", hf.forearm_m),
        ("human.shoulder_halfwidth_m", hf.shoulder_halfwidth_m),
        ("human.trunk_len_m", hf.trunk_len_m),
        ("human.knee_drop_m", hf.knee_drop_m),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(name, "must be positive"));
        }
    }
    if Vec3::new(hf.forward_xy[0], hf.forward_xy[1], 0.0).norm() < 1e-9 {
        return Err(invalid("human.forward_xy", "must be a nonzero direction"));
    }
    if let Some(rw) = &raw.random_wrench {
        if rw.bandwidth_hz <= 0.0 || rw.harmonics == 0 {
            return Err(invalid(
                "random_wrench",
                "bandwidth and harmonics must be positive",
            ));
        }
        if rw.max_force_n < 0.0 || rw.max_torque_nm < 0.0 {
            return Err(invalid("random_wrench", "wrench caps must be non-negative"));
        }
    }
    if raw.force_model.k_h_n_per_m < 0.0
        || raw.force_model.d_h_ns_per_m < 0.0
        || raw.force_model.saturation_n < 0.0
        || raw.force_model.saturation_nm < 0.0
    {
        return Err(invalid(
            "force_model",
            "gains and saturations must be non-negative",
        ));
    }

    check_sorted(raw.reference.iter().map(|w| w.t_s), "reference")?;
    check_sorted(raw.torque_script.iter().map(|w| w.t_s), "torque_script")?;
    check_sorted(raw.trunk_bend.iter().map(|w| w.t_s), "trunk_bend")?;
    check_sorted(raw.mode_script.iter().map(|w| w.t_s), "mode_script")?;
    check_sorted(raw.leg_script.iter().map(|w| w.t_s), "leg_script")?;
    for (i, o) in raw.obstacles.iter().enumerate() {
        if o.radius_m <= 0.0 {
            return Err(invalid(
                "obstacles",
                format!("disc {i} radius must be positive"),
            ));
        }
    }

    let chain = match &raw.chain_toml {
        Some(text) => {
            ChainModel::from_toml_str(text).map_err(|e| invalid("chain_toml", e.to_string()))?
        }
        None => ChainModel::default_six_r(),
    };
    if let Some(q0) = &raw.initial_q_rad {
        if q0.len() != chain.dof() {
            return Err(invalid(
                "initial_q_rad",
                format!("expected {} entries, found {}", chain.dof(), q0.len()),
            ));
        }
        if q0.iter().any(|x| !x.is_finite()) {
            return Err(invalid("initial_q_rad", "entries must be finite"));
        }
    }

    Ok(Scenario {
        duration_s,
        t_c_s: raw.t_c_s,
        seed: raw.seed,
        baseline: raw.baseline,
        side: raw.side,
        a_th: raw.a_th,
        leg_radius_m: raw.leg_radius_m,
        human: raw.human,
        force_model: raw.force_model,
        random_wrench: raw.random_wrench,
        capsule: raw.capsule,
        repulsion: raw.repulsion,
        thresholds: raw.thresholds,
        fixture_arm: raw.fixture_arm,
        fixture_base: raw.fixture_base,
        chain,
        initial_q_rad: raw.initial_q_rad,
        reference: raw.reference,
        torque_script: raw.torque_script,
        trunk_bend: raw.trunk_bend,
        mode_script: raw.mode_script,
        obstacles: raw.obstacles,
        leg_script: raw.leg_script,
    })
}

/// Load a scenario file from disk.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, SimError> {
    let text = std::fs::read_to_string(path)?;
    load_scenario_str(&text)
}

/// Piecewise-linear interpolation over `(t, value)` pairs; clamps to the
/// first/last waypoint outside the scripted range.
pub(crate) fn interp<T, F>(script: &[T], t: f64, time: impl Fn(&T) -> f64, value: F) -> Option<Vec3>
where
    F: Fn(&T) -> Vec3,
{
    if script.is_empty() {
        return None;
    }
    if t <= time(&script[0]) {
        return Some(value(&script[0]));
    }
    let last = script.len() - 1;
    if t >= time(&script[last]) {
        return Some(value(&script[last]));
    }
    let idx = script.partition_point(|w| time(w) <= t);
    let (a, b) = (&script[idx - 1], &script[idx]);
    let (ta, tb) = (time(a), time(b));
    let alpha = if tb > ta { (t - ta) / (tb - ta) } else { 0.0 };
    Some(value(a) * (1.0 - alpha) + value(b) * alpha)
}

/// Step-function lookup: the last waypoint with `t_s ≤ t`.
pub(crate) fn step_lookup<T>(script: &[T], t: f64, time: impl Fn(&T) -> f64) -> Option<usize> {
    if script.is_empty() || t < time(&script[0]) {
        return None;
    }
    Some(script.partition_point(|w| time(w) <= t) - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario_gets_all_defaults() {
        let sc = load_scenario_str("duration_s = 2.0\n").unwrap();
        assert_eq!(sc.t_c_s, 1e-3);
        assert_eq!(sc.fixture_arm.k_p_n_per_m, 600.0);
        assert_eq!(sc.fixture_arm.a_p, 20.0);
        assert_eq!(sc.fixture_base.inertia_lin_kg, 15.0);
        assert_eq!(sc.fixture_base.k_p_n_per_m, 0.0);
        assert_eq!(sc.repulsion.a_k, 0.11);
        assert_eq!(sc.repulsion.d_0_m, 0.10);
        assert_eq!(sc.capsule.radius_m, 0.375);
        assert_eq!(sc.capsule.length_m, 0.31);
        assert_eq!(sc.a_th, 0.5);
        assert_eq!(sc.chain.dof(), 9);
        assert!(!sc.baseline);
    }

    #[test]
    fn missing_duration_is_an_error() {
        let err = load_scenario_str("seed = 3\n").unwrap_err();
        match err {
            SimError::Invalid { field, .. } => assert_eq!(field, "duration_s"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_numeric_names_the_key() {
        let err = load_scenario_str("duration_s = \"soon\"\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("duration_s"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = load_scenario_str("duration_s = 1.0\nmystery_knob = 4\n").unwrap_err();
        assert!(err.to_string().contains("mystery_knob"), "{err}");
    }

    #[test]
    fn non_monotone_script_is_rejected() {
        let text = r#"
duration_s = 1.0

[[reference]]
t_s = 1.0
xyz_m = [0.0, 0.0, 0.0]

[[reference]]
t_s = 0.5
xyz_m = [1.0, 0.0, 0.0]
"#;
        let err = load_scenario_str(text).unwrap_err();
        assert!(err.to_string().contains("reference"), "{err}");
    }

    #[test]
    fn interpolation_clamps_and_blends() {
        let script = vec![
            ReferenceWaypoint {
                t_s: 1.0,
                xyz_m: [0.0, 0.0, 0.0],
            },
            ReferenceWaypoint {
                t_s: 3.0,
                xyz_m: [2.0, 0.0, 0.0],
            },
        ];
        let f = |w: &ReferenceWaypoint| Vec3::new(w.xyz_m[0], w.xyz_m[1], w.xyz_m[2]);
        assert_eq!(interp(&script, 0.0, |w| w.t_s, f).unwrap().x, 0.0);
        assert_eq!(interp(&script, 2.0, |w| w.t_s, f).unwrap().x, 1.0);
        assert_eq!(interp(&script, 9.0, |w| w.t_s, f).unwrap().x, 2.0);
        assert!(interp::<ReferenceWaypoint, _>(&[], 0.0, |w| w.t_s, f).is_none());
    }

    #[test]
    fn step_lookup_picks_latest_waypoint() {
        let script = vec![
            ScalarWaypoint {
                t_s: 0.0,
                value: 1.0,
            },
            ScalarWaypoint {
                t_s: 2.0,
                value: 5.0,
            },
        ];
        assert_eq!(step_lookup(&script, 1.0, |w| w.t_s), Some(0));
        assert_eq!(step_lookup(&script, 2.0, |w| w.t_s), Some(1));
        assert_eq!(step_lookup(&script, -0.5, |w| w.t_s), None);
    }

    #[test]
    fn embedded_chain_overrides_default() {
        let text = r#"
duration_s = 1.0
chain_toml = """
base_mount_xyz_m = [0.0, 0.0, 0.4]
ee_offset_xyz_m = [0.1, 0.0, 0.0]
[[joint]]
offset_xyz_m = [0.0, 0.0, 0.1]
axis = [0.0, 0.0, 1.0]
[[joint]]
offset_xyz_m = [0.0, 0.0, 0.05]
axis = [0.0, 1.0, 0.0]
[[joint]]
offset_xyz_m = [0.4, 0.0, 0.0]
axis = [0.0, 1.0, 0.0]
[[joint]]
offset_xyz_m = [0.35, 0.0, 0.0]
axis = [0.0, 1.0, 0.0]
[[joint]]
offset_xyz_m = [0.1, 0.0, 0.0]
axis = [0.0, 0.0, 1.0]
[[joint]]
offset_xyz_m = [0.05, 0.0, 0.0]
axis = [1.0, 0.0, 0.0]
"""
"#;
        let sc = load_scenario_str(text).unwrap();
        assert_eq!(sc.chain.base_mount.position.z, 0.4);
    }
}
