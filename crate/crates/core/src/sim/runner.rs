//! The fixed-timestep closed loop.
//!
//! Per tick: couple the human hand to the end-effector, score the posture,
//! produce the human wrench, advance the fixture admittance, solve the
//! whole-body IK with the repulsive null-space term, integrate the joints
//! and append one trace record. Everything is deterministic for a given
//! scenario and seed.

use super::human::{synthesize_keypoints, SyntheticHuman};
use super::scenario::{interp, step_lookup, Scenario};
use super::trace::{TraceLog, TraceRecord};
use super::SimError;
use crate::ergonomics::{compute_score, AngleTracker};
use crate::fixture::{FixtureController, FixtureParams, FixtureState, Wrench};
use crate::kinematics::{
    capsule_closest, dls_solve, forward_kinematics, jacobian, mode_update, null_space_command,
    Capsule2, JointState, Mode, ModeProfiles, ModeState, Vec2,
};
use crate::math::{pose_deviation, Vec3};
use nalgebra::{DVector, Vector6};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Perimeter samples representing one disc in the synthetic point cloud.
const DISC_SAMPLES: usize = 12;

fn saturate(v: Vec3, cap: f64) -> Vec3 {
    let n = v.norm();
    if n > cap && n > 0.0 {
        v * (cap / n)
    } else {
        v
    }
}

/// Pre-sampled band-limited wrench for audit scenarios.
fn random_wrench_samples(scenario: &Scenario, ticks: usize) -> Vec<(Vec3, Vec3)> {
    let cfg = scenario.random_wrench.expect("caller checks presence");
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    // per-axis sums of sinusoids below the cutoff
    let mut harmonics = Vec::new();
    for _ in 0..6 {
        let axis: Vec<(f64, f64, f64)> = (0..cfg.harmonics)
            .map(|_| {
                (
                    rng.random_range(0.2..1.0),
                    rng.random_range(0.05..cfg.bandwidth_hz),
                    rng.random_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        harmonics.push(axis);
    }
    let eval = |axis: &[(f64, f64, f64)], t: f64| {
        axis.iter()
            .map(|(a, f, p)| a * (std::f64::consts::TAU * f * t + p).sin())
            .sum::<f64>()
    };
    let mut samples: Vec<(Vec3, Vec3)> = (0..ticks)
        .map(|k| {
            let t = k as f64 * scenario.t_c_s;
            (
                Vec3::new(
                    eval(&harmonics[0], t),
                    eval(&harmonics[1], t),
                    eval(&harmonics[2], t),
                ),
                Vec3::new(
                    eval(&harmonics[3], t),
                    eval(&harmonics[4], t),
                    eval(&harmonics[5], t),
                ),
            )
        })
        .collect();
    // scale so the norms exactly respect the caps
    let max_f = samples
        .iter()
        .map(|(f, _)| f.norm())
        .fold(0.0, f64::max)
        .max(1e-12);
    let max_t = samples
        .iter()
        .map(|(_, t)| t.norm())
        .fold(0.0, f64::max)
        .max(1e-12);
    let sf = cfg.max_force_n / max_f;
    let st = cfg.max_torque_nm / max_t;
    for (f, t) in &mut samples {
        *f *= sf;
        *t *= st;
    }
    samples
}

/// Synthetic 2D cloud: leg discs (scripted) plus static obstacle discs,
/// each as its center and a ring of perimeter samples.
fn build_cloud(scenario: &Scenario, t: f64, cloud: &mut Vec<Vec2>, legs: &mut Vec<Vec2>) {
    cloud.clear();
    legs.clear();
    let push_disc = |center: Vec2, radius: f64, cloud: &mut Vec<Vec2>| {
        cloud.push(center);
        for k in 0..DISC_SAMPLES {
            let ang = k as f64 * std::f64::consts::TAU / DISC_SAMPLES as f64;
            cloud.push(center + Vec2::new(ang.cos(), ang.sin()) * radius);
        }
    };
    if !scenario.leg_script.is_empty() {
        let left = interp(
            &scenario.leg_script,
            t,
            |w| w.t_s,
            |w| Vec3::new(w.left_xy_m[0], w.left_xy_m[1], 0.0),
        )
        .expect("non-empty script");
        let right = interp(
            &scenario.leg_script,
            t,
            |w| w.t_s,
            |w| Vec3::new(w.right_xy_m[0], w.right_xy_m[1], 0.0),
        )
        .expect("non-empty script");
        for leg in [left, right] {
            let c = Vec2::new(leg.x, leg.y);
            legs.push(c);
            push_disc(c, scenario.leg_radius_m, cloud);
        }
    }
    for o in &scenario.obstacles {
        push_disc(
            Vec2::new(o.center_xy_m[0], o.center_xy_m[1]),
            o.radius_m,
            cloud,
        );
    }
}

fn all_finite(values: impl IntoIterator<Item = f64>) -> bool {
    values.into_iter().all(f64::is_finite)
}

/// Run a scenario to completion.
///
/// Aborts with [`SimError::Diverged`] carrying the last good trace if the
/// state ever leaves the finite range.
pub fn run_scenario(scenario: &Scenario) -> Result<TraceLog, SimError> {
    let model = &scenario.chain;
    model.validate()?;
    let arm_dof = model.arm_dof();
    let ticks = (scenario.duration_s / scenario.t_c_s).ceil() as usize;

    // profiles: the scenario's control period and baseline flag win
    let with_overrides = |mut p: FixtureParams| {
        p.t_c_s = scenario.t_c_s;
        p.pin_god_object = scenario.baseline;
        p
    };
    let mut profiles = ModeProfiles::defaults(arm_dof);
    profiles.arm_fixture = with_overrides(scenario.fixture_arm);
    profiles.base_fixture = with_overrides(scenario.fixture_base);

    let mut joints = JointState::zero(model);
    if let Some(q0) = &scenario.initial_q_rad {
        joints.q = DVector::from_vec(q0.clone());
    }
    let start_pose = forward_kinematics(model, &joints.q);
    let mut controller = FixtureController::new(
        profiles.arm_fixture,
        FixtureState::at_rest(start_pose.position, start_pose.orientation),
    )?;
    let mut mode_state = ModeState::new(scenario.a_th);
    mode_state.bypass_gate = scenario.baseline;

    let human = SyntheticHuman::from_config(&scenario.human, scenario.side);
    let mut tracker = AngleTracker::new();

    // reachability of the coupled hand at start
    let bend0 = interp(
        &scenario.trunk_bend,
        0.0,
        |w| w.t_s,
        |w| Vec3::new(w.value, 0.0, 0.0),
    )
    .map(|v| v.x)
    .unwrap_or(0.0);
    if synthesize_keypoints(&human, &start_pose.position, bend0).clamped {
        return Err(SimError::Invalid {
            field: "human".into(),
            msg: "initial end-effector pose is outside the human's reach".into(),
        });
    }

    let wrench_samples = scenario
        .random_wrench
        .map(|_| random_wrench_samples(scenario, ticks));

    let mut records = Vec::with_capacity(ticks);
    let mut prev_hand = start_pose.position;
    let mut cloud = Vec::new();
    let mut leg_centers = Vec::new();

    for k in 0..ticks {
        let t = k as f64 * scenario.t_c_s;

        // (1) couple the hand to the handle and synthesize keypoints
        let fk = forward_kinematics(model, &joints.q);
        let hand = fk.position;
        let hand_vel = (hand - prev_hand) / scenario.t_c_s;
        prev_hand = hand;
        let bend = interp(
            &scenario.trunk_bend,
            t,
            |w| w.t_s,
            |w| Vec3::new(w.value, 0.0, 0.0),
        )
        .map(|v| v.x)
        .unwrap_or(0.0);
        let synth = synthesize_keypoints(&human, &hand, bend);
        let (angles, flags) = tracker.update(&synth.keypoints);
        let score = compute_score(&angles, &scenario.thresholds);

        // (2) control-side score (baseline ignores posture)
        let a_ctrl = if scenario.baseline { 1.0 } else { score.total };

        // (3) human wrench
        let wrench = match &wrench_samples {
            Some(samples) => {
                let (f, tau) = samples[k];
                Wrench {
                    force: f,
                    torque: tau,
                }
            }
            None => {
                let p_ref = interp(
                    &scenario.reference,
                    t,
                    |w| w.t_s,
                    |w| Vec3::new(w.xyz_m[0], w.xyz_m[1], w.xyz_m[2]),
                )
                .unwrap_or(start_pose.position);
                let fm = &scenario.force_model;
                let force = saturate(
                    (p_ref - hand) * fm.k_h_n_per_m - hand_vel * fm.d_h_ns_per_m,
                    fm.saturation_n,
                );
                let torque = saturate(
                    interp(
                        &scenario.torque_script,
                        t,
                        |w| w.t_s,
                        |w| Vec3::new(w.xyz_nm[0], w.xyz_nm[1], w.xyz_nm[2]),
                    )
                    .unwrap_or(Vec3::zeros()),
                    fm.saturation_nm,
                );
                Wrench { force, torque }
            }
        };

        // mode script and gate, then the active profile
        let requested = step_lookup(&scenario.mode_script, t, |w| w.t_s)
            .map(|i| scenario.mode_script[i].mode)
            .unwrap_or(Mode::ArmPriority);
        if mode_update(&mut mode_state, requested, a_ctrl) {
            controller.swap_params(*profiles.fixture_for(mode_state.mode))?;
        }

        // (4) admittance pose error before the fixture advances
        let x_e_dev = pose_deviation(
            &fk.position,
            &fk.orientation,
            &controller.state().p,
            &controller.state().q,
        );
        let x_e = Vector6::new(
            x_e_dev.p_e.x,
            x_e_dev.p_e.y,
            x_e_dev.p_e.z,
            x_e_dev.eps_e().x,
            x_e_dev.eps_e().y,
            x_e_dev.eps_e().z,
        );
        let out = controller.step(&wrench, a_ctrl)?;

        // (5) whole-body IK with the repulsive null-space term
        let yaw = joints.q[2];
        let capsule = Capsule2::from_center(
            Vec2::new(joints.q[0], joints.q[1]),
            Vec2::new(yaw.cos(), yaw.sin()),
            scenario.capsule.length_m,
            scenario.capsule.radius_m,
        )?;
        build_cloud(scenario, t, &mut cloud, &mut leg_centers);
        let rep = crate::kinematics::repulsive_velocity(&capsule, &cloud, &scenario.repulsion, yaw);
        let j = jacobian(model, &joints.q);
        let sol = dls_solve(&j, profiles.weights_for(mode_state.mode), &out.v, &x_e)?;
        // the repulsive velocity is base-frame; the planar joints are
        // world-frame, so rotate before injecting into the null space
        let (s, c) = yaw.sin_cos();
        let v_r_world = Vec2::new(
            c * rep.v_xy.x - s * rep.v_xy.y,
            s * rep.v_xy.x + c * rep.v_xy.y,
        );
        let mut v_r = DVector::zeros(model.dof());
        v_r[0] = v_r_world.x;
        v_r[1] = v_r_world.y;
        let q_dot_c = null_space_command(&sol.q_dot, &sol.j_star, &j, &v_r);

        // (6) integrate the joints
        let clamped_joint = joints.integrate(model, &q_dot_c, scenario.t_c_s);

        let min_leg_dist = leg_centers
            .iter()
            .filter_map(|leg| {
                capsule_closest(&capsule, leg, scenario.leg_radius_m)
                    .ok()
                    .map(|q| q.clearance)
            })
            .fold(None, |acc: Option<f64>, d| {
                Some(acc.map_or(d, |a| a.min(d)))
            });

        // (7) record
        let st = controller.state();
        let ledger = controller.ledger();
        records.push(TraceRecord {
            t_s: t,
            q: joints.q.iter().cloned().collect(),
            ee_p: st.p,
            ee_q: st.q,
            fk_p: fk.position,
            fk_q: fk.orientation,
            god_p: st.p_g,
            god_q: st.q_g,
            v: [out.v[0], out.v[1], out.v[2], out.v[3], out.v[4], out.v[5]],
            f_h: wrench.force,
            tau_h: wrench.torque,
            u_c_force: out.u_c.force,
            u_c_torque: out.u_c.torque,
            a: score.total,
            a_sub: [
                score.abduction,
                score.flexion,
                score.rotation,
                score.elbow,
                score.bending,
            ],
            a_ctrl,
            f_gate: out.f,
            d_vp: out.damping.d_vp,
            d_vo: out.damping.d_vo,
            d_fp: out.damping.d_fp,
            d_fo: out.damping.d_fo,
            p_e_norm: out.deviation.p_e.norm(),
            psi_e: out.deviation.psi_e(),
            storage: ledger.storage(),
            work_in: ledger.work_in(),
            bound: ledger.bound(),
            mode: mode_state.mode,
            v_xy: [rep.v_xy.x, rep.v_xy.y],
            min_leg_dist,
            xe_pos_norm: x_e_dev.p_e.norm(),
            xe_rot_norm: x_e_dev.eps_e().norm(),
            clamped: synth.clamped || clamped_joint,
            degenerate: flags.any(),
            repulsion_blocked: rep.deactivated_by_obstacle,
        });

        // (8) divergence guard
        let finite = all_finite(joints.q.iter().cloned())
            && all_finite(st.p.iter().cloned())
            && all_finite(st.v.iter().cloned());
        if !finite {
            return Err(SimError::Diverged {
                t_s: t,
                trace: Box::new(TraceLog { arm_dof, records }),
            });
        }
    }

    Ok(TraceLog { arm_dof, records })
}
