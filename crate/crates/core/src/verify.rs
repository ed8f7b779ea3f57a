//! Numerical verification battery.
//!
//! Every claim the controller stack rests on is checked here at full
//! scale: the energy audit over random force profiles, the stiffness
//! calibration, the posture-angle recovery against an independent forward
//! model, the capsule geometry against dense sampling, the weighted
//! least-squares optimality conditions, and the scripted scenario
//! behaviors (mode gate, fixture directional response, base repulsion,
//! determinism). `srb-sim verify` runs the whole battery and the
//! acceptance test suite asserts each outcome.

use crate::ergonomics::{
    compute_joint_angles, sub_factor_abduction, sub_factor_bending, sub_factor_elbow,
    ErgonomicThresholds, JointAngles, Side, SkeletonKeypoints,
};
use crate::fixture::{control_term, FixtureController, FixtureParams, FixtureState, Wrench};
use crate::kinematics::{
    capsule_closest, dls_solve, jacobian, Capsule2, ChainModel, IkWeights, Mode, Vec2,
};
use crate::math::{pose_deviation, rotate_vector, UnitQuat, Vec3};
use crate::sim::{compute_metrics, load_scenario_str, run_scenario, write_trace, TraceLog};
use nalgebra::{DMatrix, DVector, Vector6};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Scenario library shipped with the repository, embedded so the battery
/// is self-contained.
pub const SCENARIO_ELBOW: &str = include_str!("../../../scenarios/elbow_overextension.toml");
pub const SCENARIO_LOCO: &str = include_str!("../../../scenarios/loco_manipulation.toml");
pub const SCENARIO_GLUING: &str = include_str!("../../../scenarios/gluing_path.toml");
pub const SCENARIO_PASSIVITY: &str = include_str!("../../../scenarios/passivity_battery.toml");

/// Null-space leakage regression threshold: the end-effector twist caused
/// by a base-only null-space vector, as a fraction of `‖J‖₂‖v_r‖`, with
/// the manipulation weights. Frozen from a 2000-configuration Monte-Carlo
/// measurement (worst observed 0.0391); the documented
/// damped-approximation budget is 5%.
pub const NULLSPACE_LEAK_FRAC: f64 = 0.045;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<24} {}  [{:6.2}s] {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

fn outcome(
    id: u8,
    name: &'static str,
    started: Instant,
    passed: bool,
    detail: String,
) -> CriterionOutcome {
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
        seconds: started.elapsed().as_secs_f64(),
    }
}

// ───────────────────────── criteria 1 & 2: energy audit ─────────────────────

/// Band-limited wrench profile: per-axis sinusoid sums below `bandwidth`,
/// scaled so the force/torque norms respect the caps over the whole run.
pub fn band_limited_wrench(
    seed: u64,
    ticks: usize,
    t_c: f64,
    max_force: f64,
    max_torque: f64,
    bandwidth_hz: f64,
) -> Vec<Wrench> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let harmonics: Vec<Vec<(f64, f64, f64)>> = (0..6)
        .map(|_| {
            (0..6)
                .map(|_| {
                    (
                        rng.random_range(0.2..1.0),
                        rng.random_range(0.05..bandwidth_hz),
                        rng.random_range(0.0..std::f64::consts::TAU),
                    )
                })
                .collect()
        })
        .collect();
    let eval = |axis: &[(f64, f64, f64)], t: f64| -> f64 {
        axis.iter()
            .map(|(a, f, p)| a * (std::f64::consts::TAU * f * t + p).sin())
            .sum()
    };
    let mut out: Vec<Wrench> = (0..ticks)
        .map(|k| {
            let t = k as f64 * t_c;
            Wrench {
                force: Vec3::new(
                    eval(&harmonics[0], t),
                    eval(&harmonics[1], t),
                    eval(&harmonics[2], t),
                ),
                torque: Vec3::new(
                    eval(&harmonics[3], t),
                    eval(&harmonics[4], t),
                    eval(&harmonics[5], t),
                ),
            }
        })
        .collect();
    let max_f = out
        .iter()
        .map(|w| w.force.norm())
        .fold(0.0, f64::max)
        .max(1e-12);
    let max_t = out
        .iter()
        .map(|w| w.torque.norm())
        .fold(0.0, f64::max)
        .max(1e-12);
    for w in &mut out {
        w.force *= max_force / max_f;
        w.torque *= max_torque / max_t;
    }
    out
}

/// Worst observed audit numbers over a profile battery.
#[derive(Debug, Clone, Copy)]
pub struct AuditSummary {
    /// Largest `V − V(0) − ∫vᵀF dτ` relative to the run's peak storage.
    pub worst_passivity_ratio: f64,
    /// Largest `V − bound` relative to the run's final bound.
    pub worst_bound_ratio: f64,
    pub profiles: usize,
}

/// Drive the fixture controller with random band-limited wrenches and a
/// swept posture score, auditing the energy balance of every run.
pub fn passivity_battery(profiles: usize, duration_s: f64, t_c: f64) -> AuditSummary {
    let mut worst_passivity = f64::NEG_INFINITY;
    let mut worst_bound = f64::NEG_INFINITY;
    let ticks = (duration_s / t_c).round() as usize;
    for seed in 0..profiles as u64 {
        let mut params = FixtureParams::arm();
        params.t_c_s = t_c;
        let mut controller = FixtureController::new(
            params,
            FixtureState::at_rest(Vec3::zeros(), UnitQuat::identity()),
        )
        .expect("default params are valid");
        let wrench = band_limited_wrench(seed, ticks, t_c, 50.0, 5.0, 2.0);
        for (k, w) in wrench.iter().enumerate() {
            // sweep the score through the full range so the gate and the
            // deviation-based damping are exercised
            let t = k as f64 * t_c;
            let a = 0.5 * (1.0 - (std::f64::consts::TAU * t / 5.0).cos());
            controller
                .step(w, a.clamp(0.0, 1.0))
                .expect("finite inputs");
        }
        let ledger = controller.ledger();
        let scale = ledger.storage_max().max(1e-12);
        worst_passivity = worst_passivity.max(ledger.worst_passivity_violation() / scale);
        worst_bound = worst_bound.max(ledger.worst_bound_violation() / ledger.bound().max(1e-12));
    }
    AuditSummary {
        worst_passivity_ratio: worst_passivity,
        worst_bound_ratio: worst_bound,
        profiles,
    }
}

pub fn criteria_passivity() -> [CriterionOutcome; 2] {
    let started = Instant::now();
    let summary = passivity_battery(100, 10.0, 1e-3);
    let seconds = started.elapsed().as_secs_f64();
    [
        CriterionOutcome {
            id: 1,
            name: "passivity",
            passed: summary.worst_passivity_ratio <= 1e-3 && seconds < 120.0,
            detail: format!(
                "worst (V - V0 - work)/max(V) = {:.3e} over {} profiles (tol 1e-3)",
                summary.worst_passivity_ratio, summary.profiles
            ),
            seconds,
        },
        CriterionOutcome {
            id: 2,
            name: "energy bound",
            passed: summary.worst_bound_ratio <= 1e-3,
            detail: format!(
                "worst (V - bound)/bound = {:.3e} (tol 1e-3)",
                summary.worst_bound_ratio
            ),
            seconds,
        },
    ]
}

// ───────────────────────── criterion 3: stiffness calibration ───────────────

pub fn criterion_stiffness() -> CriterionOutcome {
    let started = Instant::now();
    let params = FixtureParams::arm();
    let dev_t = pose_deviation(
        &Vec3::new(0.02, 0.0, 0.0),
        &UnitQuat::identity(),
        &Vec3::zeros(),
        &UnitQuat::identity(),
    );
    let force = control_term(&dev_t, &params).force.norm();
    let dev_r = pose_deviation(
        &Vec3::zeros(),
        &UnitQuat::from_axis_angle(Vec3::z(), 4f64.to_radians()),
        &Vec3::zeros(),
        &UnitQuat::identity(),
    );
    let torque = control_term(&dev_r, &params).torque.norm();
    let torque_expect = 40.0 * 2f64.to_radians().sin();
    let pass = (force - 12.0).abs() <= 1e-9 && (torque - torque_expect).abs() <= 1e-9;
    outcome(
        3,
        "stiffness calibration",
        started,
        pass,
        format!("2 cm -> {force:.12} N; 4 deg -> {torque:.12} Nm (expect 12, {torque_expect:.12})"),
    )
}

// ───────────────────────── criterion 4: posture-angle oracle ────────────────

/// Independent forward posture model: place keypoints that realize a
/// chosen angle vector by inverting the measured-angle charts directly
/// (coronal/sagittal projections for abduction and flexion, axial
/// rotation about the upper arm for the shoulder rotation).
///
/// This is the oracle for the trunk-plane angle formulas; it shares no
/// code with `compute_joint_angles`.
pub fn forward_posture_keypoints(angles: &JointAngles, side: Side) -> SkeletonKeypoints {
    let neck = Vec3::new(0.0, 0.0, 1.5);
    let half_width = 0.2;
    let trunk_len = 0.6;
    let upper = 0.3;
    let fore = 0.28;

    // trunk bent about the lateral (left) axis; the mannequin faces +x
    let trunk_dir = rotate_vector(&(Vec3::y() * angles.bending), &Vec3::z());
    let pelvis = neck - trunk_dir * trunk_len;
    let thorax = neck + (pelvis - neck) * (2.0 / 3.0);
    let knee = pelvis - Vec3::z() * 0.45;
    let lat_right = Vec3::x().cross(&Vec3::z()); // -y
    let shoulder_r = neck + lat_right * half_width;
    let shoulder_l = neck - lat_right * half_width;
    let shoulder = match side {
        Side::Right => shoulder_r,
        Side::Left => shoulder_l,
    };

    // side-specific trunk frame exactly as the scorer measures it
    let s = (shoulder - neck).normalize();
    let f = (shoulder - neck).cross(&(thorax - neck)).normalize();
    let d = f.cross(&s);

    // upper-arm direction from the two projection charts
    let (ta, tf) = (angles.abduction.tan(), angles.flexion.tan());
    let flex_sign = match side {
        Side::Right => 1.0,
        Side::Left => -1.0,
    };
    let sigma_d = 1.0 / (1.0 + ta * ta + tf * tf).sqrt();
    let dir = s * (sigma_d * ta) + d * sigma_d + f * (sigma_d * tf * flex_sign);
    let elbow = shoulder + dir * upper;

    // forearm: axial rotation of the reference normal about the upper arm
    let u = s.cross(&dir).normalize();
    let (m0, psi) = match side {
        Side::Right => (u, -angles.rotation),
        Side::Left => (-u, angles.rotation),
    };
    let m = rotate_vector(&(dir * psi), &m0);
    let e_dir = -dir * angles.elbow.cos() + m * angles.elbow.sin();
    let wrist = elbow + e_dir * fore;

    // untracked arm hangs with the forearm forward
    let other_shoulder = match side {
        Side::Right => shoulder_l,
        Side::Left => shoulder_r,
    };
    let other_elbow = other_shoulder - Vec3::z() * upper;
    let other_wrist = other_elbow + Vec3::x() * fore;

    let (elbow_r, elbow_l, wrist_r, wrist_l) = match side {
        Side::Right => (elbow, other_elbow, wrist, other_wrist),
        Side::Left => (other_elbow, elbow, other_wrist, wrist),
    };
    SkeletonKeypoints {
        shoulder_r,
        shoulder_l,
        elbow_r,
        elbow_l,
        wrist_r,
        wrist_l,
        neck,
        thorax,
        pelvis,
        knee,
        side,
    }
}

/// Sample a posture inside the chart-consistent, well-conditioned ranges.
/// Flexion and bending avoid a hair-thin band around zero where the acos
/// extraction is at its conditioning singularity.
pub fn sample_posture(rng: &mut ChaCha8Rng) -> JointAngles {
    let deg = |d: f64| d.to_radians();
    let nonzero = |lo: f64, hi: f64, rng: &mut ChaCha8Rng| loop {
        let v = rng.random_range(lo..hi);
        if v.abs() > 1e-3 {
            return v;
        }
    };
    let flexion = nonzero(-deg(75.0), deg(75.0), rng);
    let bending = nonzero(-deg(60.0), deg(80.0), rng);
    JointAngles {
        abduction: rng.random_range(-deg(75.0)..deg(75.0)),
        flexion,
        rotation: rng.random_range(-deg(160.0)..deg(160.0)),
        elbow: rng.random_range(deg(10.0)..deg(170.0)),
        bending,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AngleOracleSummary {
    pub worst_error_rad: f64,
    pub postures: usize,
}

/// Round-trip the forward model through the trunk-plane angle formulas.
pub fn ergonomics_angle_oracle(postures: usize, seed: u64) -> AngleOracleSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..postures {
        let side = if i % 2 == 0 { Side::Right } else { Side::Left };
        let target = sample_posture(&mut rng);
        let kp = forward_posture_keypoints(&target, side);
        let (rec, flags) = compute_joint_angles(&kp, &JointAngles::neutral());
        assert!(
            !flags.any(),
            "oracle produced a degenerate posture: {target:?}"
        );
        for (a, b) in [
            (rec.abduction, target.abduction),
            (rec.flexion, target.flexion),
            (rec.rotation, target.rotation),
            (rec.elbow, target.elbow),
            (rec.bending, target.bending),
        ] {
            worst = worst.max((a - b).abs());
        }
    }
    AngleOracleSummary {
        worst_error_rad: worst,
        postures,
    }
}

pub fn criterion_angles() -> CriterionOutcome {
    let started = Instant::now();
    let summary = ergonomics_angle_oracle(1000, 2024);
    let seconds = started.elapsed().as_secs_f64();
    let pass = summary.worst_error_rad <= 1e-9 && seconds < 10.0;
    outcome(
        4,
        "posture-angle oracle",
        started,
        pass,
        format!(
            "worst recovery error {:.3e} rad over {} postures (tol 1e-9)",
            summary.worst_error_rad, summary.postures
        ),
    )
}

// ───────────────────────── criterion 5: sub-factor spot values ──────────────

pub fn criterion_sub_factors() -> CriterionOutcome {
    let started = Instant::now();
    let th = ErgonomicThresholds::default();
    let checks = [
        (sub_factor_elbow(100f64.to_radians(), &th), 1.0),
        (sub_factor_elbow(70f64.to_radians(), &th), 0.0),
        (sub_factor_bending(15f64.to_radians(), &th), 0.505),
        (sub_factor_abduction(25f64.to_radians(), &th), 0.5),
    ];
    let worst = checks
        .iter()
        .map(|(got, expect)| (got - expect).abs())
        .fold(0.0, f64::max);
    outcome(
        5,
        "sub-factor spot values",
        started,
        worst <= 1e-12,
        format!("worst deviation {worst:.3e} (tol 1e-12)"),
    )
}

// ───────────────────────── criterion 6: capsule oracle ──────────────────────

#[derive(Debug, Clone, Copy)]
pub struct CapsuleOracleSummary {
    pub worst_distance_m: f64,
    pub points: usize,
    pub samples: usize,
}

/// Compare the analytic perimeter point against a dense sampling oracle:
/// `samples` perimeter points uniformly spaced in arc length, nearest one
/// found by exhaustive scan for each query point.
pub fn capsule_sampling_oracle(points: usize, samples: usize, seed: u64) -> CapsuleOracleSummary {
    let capsule = Capsule2::new(Vec2::new(0.155, 0.0), Vec2::new(-1.0, 0.0), 0.31, 0.375).unwrap();
    // perimeter: two straight edges and two end-cap half circles
    let l = capsule.length;
    let r = capsule.radius;
    let arc = std::f64::consts::PI * r;
    let total = 2.0 * l + 2.0 * arc;
    let rear = capsule.front + capsule.dir * l;
    let normal = Vec2::new(-capsule.dir.y, capsule.dir.x);

    // flat coordinate arrays keep the exhaustive scan tight
    let mut px = Vec::with_capacity(samples);
    let mut py = Vec::with_capacity(samples);
    for i in 0..samples {
        let s = total * i as f64 / samples as f64;
        let p = if s < l {
            capsule.front + capsule.dir * s + normal * r
        } else if s < l + arc {
            let phi = (s - l) / r;
            rear + normal * (r * phi.cos()) + capsule.dir * (r * phi.sin())
        } else if s < 2.0 * l + arc {
            let back = s - l - arc;
            rear - capsule.dir * back - normal * r
        } else {
            let phi = (s - 2.0 * l - arc) / r;
            capsule.front - normal * (r * phi.cos()) - capsule.dir * (r * phi.sin())
        };
        px.push(p.x);
        py.push(p.y);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    while checked < points {
        let q = Vec2::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let analytic = match capsule_closest(&capsule, &q, 0.0) {
            Ok(res) => res.perimeter_point,
            Err(_) => continue, // on-axis draws are excluded by contract
        };
        let mut best = f64::INFINITY;
        let mut best_i = 0usize;
        for i in 0..samples {
            let dx = px[i] - q.x;
            let dy = py[i] - q.y;
            let d2 = dx * dx + dy * dy;
            if d2 < best {
                best = d2;
                best_i = i;
            }
        }
        let brute = Vec2::new(px[best_i], py[best_i]);
        worst = worst.max((analytic - brute).norm());
        checked += 1;
    }
    CapsuleOracleSummary {
        worst_distance_m: worst,
        points,
        samples,
    }
}

pub fn criterion_capsule() -> CriterionOutcome {
    let started = Instant::now();
    let summary = capsule_sampling_oracle(100_000, 100_000, 7);
    let seconds = started.elapsed().as_secs_f64();
    let pass = summary.worst_distance_m <= 1e-4 && seconds < 30.0;
    outcome(
        6,
        "capsule geometry oracle",
        started,
        pass,
        format!(
            "worst perimeter-point distance {:.3e} m over {} points vs {} samples (tol 1e-4)",
            summary.worst_distance_m, summary.points, summary.samples
        ),
    )
}

// ───────────────────────── criterion 7: DLS correctness ─────────────────────

#[derive(Debug, Clone, Copy)]
pub struct DlsSummary {
    pub worst_optimality: f64,
    pub worst_small_damping_residual: f64,
    pub min_suppression: f64,
    pub worst_leak_frac: f64,
}

/// Draw a configuration whose arm sub-Jacobian is well conditioned (the
/// suppression property is a weighting property, not a singularity one).
fn draw_conditioned(model: &ChainModel, rng: &mut ChaCha8Rng) -> (DMatrix<f64>, Vector6<f64>) {
    loop {
        let q = DVector::from_fn(model.dof(), |i, _| {
            if i < 2 {
                rng.random_range(-1.0..1.0)
            } else {
                rng.random_range(-1.2..1.2)
            }
        });
        let j = jacobian(model, &q);
        let sv = j
            .columns(3, 6)
            .clone_owned()
            .svd(false, false)
            .singular_values;
        if sv.iter().cloned().fold(f64::INFINITY, f64::min) > 0.1 {
            let v = Vector6::from_fn(|_, _| rng.random_range(-0.5..0.5));
            return (j, v);
        }
    }
}

pub fn dls_battery(instances: usize, seed: u64) -> DlsSummary {
    let model = ChainModel::default_six_r();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_opt = 0.0f64;
    let mut worst_residual = 0.0f64;
    let mut min_suppression = f64::INFINITY;
    let mut worst_leak = 0.0f64;
    for _ in 0..instances {
        let (j, v) = draw_conditioned(&model, &mut rng);
        let weights = IkWeights::arm_priority(6);
        let x_e = Vector6::from_fn(|_, _| rng.random_range(-0.05..0.05));
        let sol = dls_solve(&j, &weights, &v, &x_e).unwrap();

        // first-order optimality of the weighted least-squares problem
        let v_cmd = v - weights.k_x.component_mul(&x_e);
        let res_task = &j * &sol.q_dot - v_cmd;
        let mut grad_norm2 = 0.0;
        for row in 0..9 {
            let mut g = weights.w_q[row] * sol.q_dot[row];
            for t in 0..6 {
                g += j[(t, row)] * weights.w_x[t] * res_task[t];
            }
            grad_norm2 += g * g;
        }
        worst_opt = worst_opt.max(grad_norm2.sqrt());

        // the small-damping limit tracks the command exactly
        let mut tiny = IkWeights::arm_priority(6);
        tiny.w_q = DVector::from_element(9, 1e-8);
        let exact = dls_solve(&j, &tiny, &v, &Vector6::zeros()).unwrap();
        worst_residual = worst_residual.max((&j * &exact.q_dot - v).norm());

        // base suppression vs unit weights
        let unit = dls_solve(&j, &IkWeights::base_priority(6), &v, &Vector6::zeros()).unwrap();
        let base_norm = |q: &DVector<f64>| (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
        min_suppression =
            min_suppression.min(base_norm(&unit.q_dot) / base_norm(&sol.q_dot).max(1e-300));

        // null-space leakage with the manipulation weights
        let mut v_r = DVector::zeros(9);
        v_r[0] = rng.random_range(-0.3..0.3);
        v_r[1] = rng.random_range(-0.3..0.3);
        let leak = (&j * (&v_r - &sol.j_star * (&j * &v_r))).norm();
        let j_norm = j.clone().svd(false, false).singular_values[0];
        worst_leak = worst_leak.max(leak / (j_norm * v_r.norm()).max(1e-300));
    }
    DlsSummary {
        worst_optimality: worst_opt,
        worst_small_damping_residual: worst_residual,
        min_suppression,
        worst_leak_frac: worst_leak,
    }
}

pub fn criterion_dls() -> CriterionOutcome {
    let started = Instant::now();
    let s = dls_battery(100, 31);
    let pass = s.worst_optimality <= 1e-8
        && s.worst_small_damping_residual <= 1e-6
        && s.min_suppression >= 100.0
        && s.worst_leak_frac <= NULLSPACE_LEAK_FRAC
        && NULLSPACE_LEAK_FRAC <= 0.05;
    outcome(
        7,
        "damped least squares",
        started,
        pass,
        format!(
            "optimality {:.2e} (tol 1e-8); small-damping residual {:.2e} (tol 1e-6); \
             suppression x{:.0} (min 100); leak {:.4} of |J||v_r| (frozen {NULLSPACE_LEAK_FRAC})",
            s.worst_optimality,
            s.worst_small_damping_residual,
            s.min_suppression,
            s.worst_leak_frac
        ),
    )
}

// ───────────────────────── criterion 8: mode gate ────────────────────────────

pub fn criterion_mode_gate() -> CriterionOutcome {
    let started = Instant::now();
    let scenario = load_scenario_str(SCENARIO_LOCO).expect("embedded scenario parses");
    let trace = match run_scenario(&scenario) {
        Ok(t) => t,
        Err(e) => {
            return outcome(
                8,
                "mode gate",
                started,
                false,
                format!("scenario failed: {e}"),
            )
        }
    };
    // the gate never grants below the threshold
    let mut prev_mode = Mode::ArmPriority;
    let mut violation = None;
    let mut granted_at = None;
    let mut deferred_ticks = 0usize;
    let request_t = 3.0;
    for r in &trace.records {
        if r.mode == Mode::BasePriority && prev_mode == Mode::ArmPriority {
            if r.a_ctrl < scenario.a_th {
                violation = Some((r.t_s, r.a_ctrl));
            }
            granted_at = Some((r.t_s, r.a_ctrl));
        }
        if r.mode == Mode::ArmPriority && r.t_s >= request_t {
            deferred_ticks += 1;
        }
        prev_mode = r.mode;
    }
    // the score at the request tick sits well below the gate
    let at_request = trace
        .records
        .iter()
        .find(|r| r.t_s >= request_t)
        .map(|r| r.a_ctrl)
        .unwrap_or(1.0);
    let pass =
        violation.is_none() && granted_at.is_some() && deferred_ticks > 100 && at_request < 0.45;
    outcome(
        8,
        "mode gate",
        started,
        pass,
        format!(
            "request at a={at_request:.3}, deferred {deferred_ticks} ticks, granted at {granted_at:?}{}",
            violation.map(|v| format!(", VIOLATION {v:?}")).unwrap_or_default()
        ),
    )
}

// ───────────────────── criterion 9: fixture directional response ────────────

/// Least-squares slope of `ln y` against `t` (decay-rate fit).
fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for (t, y) in points {
        let ly = y.ln();
        st += t;
        sy += ly;
        stt += t * t;
        sty += t * ly;
    }
    (n * sty - st * sy) / (n * stt - st * st)
}

pub fn criterion_fixture_response() -> CriterionOutcome {
    let started = Instant::now();
    let scenario = load_scenario_str(SCENARIO_ELBOW).expect("embedded scenario parses");
    let trace = match run_scenario(&scenario) {
        Ok(t) => t,
        Err(e) => {
            return outcome(
                9,
                "fixture response",
                started,
                false,
                format!("scenario failed: {e}"),
            )
        }
    };
    let mut detail = String::new();
    let mut pass = true;
    let mut check = |pass: &mut bool, label: &str, ok: bool, info: String| {
        if !ok {
            *pass = false;
        }
        detail.push_str(&format!(
            "{label} {}({info}); ",
            if ok { "ok " } else { "FAIL " }
        ));
    };

    // the score reaches zero during the push
    let zero_ticks = trace.records.iter().filter(|r| r.a == 0.0).count();
    check(
        &mut pass,
        "a->0",
        zero_ticks > 100,
        format!("{zero_ticks} ticks at a=0"),
    );

    // monotone growth of the deviation and feedback force while the
    // overextension push is inside the risk region
    let push: Vec<_> = trace
        .records
        .iter()
        .filter(|r| r.t_s >= 1.25 && r.t_s <= 1.85)
        .collect();
    let mut monotone = true;
    for w in push.windows(2) {
        if w[1].p_e_norm < w[0].p_e_norm - 1e-9
            || w[1].u_c_force.norm() < w[0].u_c_force.norm() - 1e-7
        {
            monotone = false;
        }
    }
    let growth = push.last().map(|r| r.p_e_norm).unwrap_or(0.0)
        - push.first().map(|r| r.p_e_norm).unwrap_or(0.0);
    check(
        &mut pass,
        "push monotone",
        monotone && growth > 5e-3,
        format!("growth {growth:.4} m"),
    );

    // release: the posture step reopens the gate with the deviation still
    // locked in, and the deviation collapses at the god-object rate
    let recovery_start = trace
        .records
        .iter()
        .position(|r| r.t_s > 5.5 && r.f_gate >= 0.999 && r.p_e_norm > 0.008);
    match recovery_start {
        None => check(
            &mut pass,
            "recovery",
            false,
            "gate never reopened with deviation".into(),
        ),
        Some(i0) => {
            let p0 = trace.records[i0].p_e_norm;
            let decade: Vec<(f64, f64)> = trace.records[i0..]
                .iter()
                .take_while(|r| r.p_e_norm > p0 / 10.0)
                .map(|r| (r.t_s, r.p_e_norm))
                .collect();
            let k_r = scenario.fixture_arm.k_r;
            if decade.len() < 5 {
                check(
                    &mut pass,
                    "recovery",
                    false,
                    "decade too short to fit".into(),
                );
            } else {
                let rate = -log_slope(&decade);
                let rel = (rate - k_r).abs() / k_r;
                check(
                    &mut pass,
                    "decay rate",
                    rel <= 0.05,
                    format!("fit {rate:.1}/s vs k_r {k_r} ({:.1}%)", rel * 100.0),
                );
            }
        }
    }

    // baseline comparison on the same script
    let baseline_text = format!("baseline = true\n{SCENARIO_ELBOW}");
    let base_scenario = load_scenario_str(&baseline_text).expect("baseline variant parses");
    let base_trace = run_scenario(&base_scenario).expect("baseline run");
    let u_c_zero = base_trace
        .records
        .iter()
        .all(|r| r.u_c_force.norm() == 0.0 && r.u_c_torque.norm() == 0.0);
    check(&mut pass, "baseline u_c==0", u_c_zero, String::new());
    let m_pvf = compute_metrics(&trace, 0.1).unwrap();
    let m_base = compute_metrics(&base_trace, 0.1).unwrap();
    check(
        &mut pass,
        "directional",
        m_pvf.a_bar > m_base.a_bar && m_pvf.zeta_ne_percent < m_base.zeta_ne_percent,
        format!(
            "a_bar {:.4} vs {:.4}; zeta_ne {:.2}% vs {:.2}%",
            m_pvf.a_bar, m_base.a_bar, m_pvf.zeta_ne_percent, m_base.zeta_ne_percent
        ),
    );

    outcome(9, "fixture response", started, pass, detail)
}

// ───────────────────────── criterion 10: repulsion ───────────────────────────

pub fn criterion_repulsion() -> CriterionOutcome {
    let started = Instant::now();
    let scenario = load_scenario_str(SCENARIO_LOCO).expect("embedded scenario parses");
    let trace = match run_scenario(&scenario) {
        Ok(t) => t,
        Err(e) => {
            return outcome(
                10,
                "base repulsion",
                started,
                false,
                format!("scenario failed: {e}"),
            )
        }
    };
    let mut pass = true;
    let mut detail = String::new();
    let mut check = |pass: &mut bool, label: &str, ok: bool, info: String| {
        if !ok {
            *pass = false;
        }
        detail.push_str(&format!(
            "{label} {}({info}); ",
            if ok { "ok " } else { "FAIL " }
        ));
    };

    let v_norm =
        |r: &crate::sim::TraceRecord| (r.v_xy[0] * r.v_xy[0] + r.v_xy[1] * r.v_xy[1]).sqrt();

    // repulsion engages and grows as the legs close in
    let active: Vec<_> = trace
        .records
        .iter()
        .filter(|r| r.t_s <= 2.5 && v_norm(r) > 0.0 && r.min_leg_dist.is_some())
        .collect();
    check(
        &mut pass,
        "engages",
        active.len() > 200,
        format!("{} active ticks", active.len()),
    );
    let mut monotone = true;
    for w in active.windows(2) {
        let (d0, d1) = (w[0].min_leg_dist.unwrap(), w[1].min_leg_dist.unwrap());
        if d1 < d0 - 1e-9 && v_norm(w[1]) < v_norm(w[0]) - 1e-9 {
            monotone = false;
        }
    }
    check(&mut pass, "grows as d shrinks", monotone, String::new());
    let a_k = scenario.repulsion.a_k;
    check(
        &mut pass,
        "bounded by a_k",
        trace.records.iter().all(|r| v_norm(r) <= a_k + 1e-12),
        String::new(),
    );

    // obstacle-side occupancy forces the repulsion to zero
    let blocked: Vec<_> = trace
        .records
        .iter()
        .filter(|r| r.repulsion_blocked)
        .collect();
    check(
        &mut pass,
        "obstacle blocks",
        blocked.len() > 50,
        format!("{} ticks", blocked.len()),
    );
    check(
        &mut pass,
        "zero while blocked",
        blocked.iter().all(|r| v_norm(r) == 0.0),
        String::new(),
    );

    // end-effector twist perturbation from the null-space term stays
    // below the frozen regression bound
    let model = &scenario.chain;
    let mut worst_leak = 0.0f64;
    for r in trace.records.iter().filter(|r| v_norm(r) > 1e-6) {
        let q = DVector::from_vec(r.q.clone());
        let j = jacobian(model, &q);
        let weights = match r.mode {
            Mode::ArmPriority => IkWeights::arm_priority(model.arm_dof()),
            Mode::BasePriority => IkWeights::base_priority(model.arm_dof()),
        };
        let sol = dls_solve(&j, &weights, &Vector6::zeros(), &Vector6::zeros()).unwrap();
        let yaw = r.q[2];
        let (sn, cs) = yaw.sin_cos();
        let mut v_r = DVector::zeros(model.dof());
        v_r[0] = cs * r.v_xy[0] - sn * r.v_xy[1];
        v_r[1] = sn * r.v_xy[0] + cs * r.v_xy[1];
        let leak = (&j * (&v_r - &sol.j_star * (&j * &v_r))).norm();
        let j_norm = j.clone().svd(false, false).singular_values[0];
        worst_leak = worst_leak.max(leak / (j_norm * v_r.norm()).max(1e-300));
    }
    check(
        &mut pass,
        "tracking leak",
        worst_leak <= NULLSPACE_LEAK_FRAC,
        format!("{worst_leak:.4} vs frozen {NULLSPACE_LEAK_FRAC}"),
    );

    outcome(10, "base repulsion", started, pass, detail)
}

// ───────────────────────── criterion 11: determinism ────────────────────────

pub fn criterion_determinism() -> CriterionOutcome {
    let started = Instant::now();
    let scenario = load_scenario_str(SCENARIO_GLUING).expect("embedded scenario parses");
    let render = |trace: &TraceLog| {
        let mut buf = Vec::new();
        write_trace(trace, &mut buf).expect("in-memory write");
        buf
    };
    let first = render(&run_scenario(&scenario).expect("run"));
    let second = render(&run_scenario(&scenario).expect("run"));
    let pass = first == second && !first.is_empty();
    outcome(
        11,
        "determinism",
        started,
        pass,
        format!(
            "{} bytes, byte-identical across two runs: {}",
            first.len(),
            first == second
        ),
    )
}

// ───────────────────────── battery driver ───────────────────────────────────

/// Run every acceptance criterion and collect the outcomes in order.
pub fn run_battery() -> Vec<CriterionOutcome> {
    let mut out = Vec::new();
    out.extend(criteria_passivity());
    out.push(criterion_stiffness());
    out.push(criterion_angles());
    out.push(criterion_sub_factors());
    out.push(criterion_capsule());
    out.push(criterion_dls());
    out.push(criterion_mode_gate());
    out.push(criterion_fixture_response());
    out.push(criterion_repulsion());
    out.push(criterion_determinism());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_model_round_trips_a_generic_posture() {
        let target = JointAngles {
            abduction: 0.3,
            flexion: 0.4,
            rotation: -0.7,
            elbow: 1.4,
            bending: 0.25,
        };
        for side in [Side::Right, Side::Left] {
            let kp = forward_posture_keypoints(&target, side);
            let (rec, flags) = compute_joint_angles(&kp, &JointAngles::neutral());
            assert!(!flags.any());
            assert!(
                (rec.abduction - target.abduction).abs() < 1e-12,
                "{side:?} abduction"
            );
            assert!(
                (rec.flexion - target.flexion).abs() < 1e-12,
                "{side:?} flexion"
            );
            assert!(
                (rec.rotation - target.rotation).abs() < 1e-12,
                "{side:?} rotation"
            );
            assert!((rec.elbow - target.elbow).abs() < 1e-12, "{side:?} elbow");
            assert!(
                (rec.bending - target.bending).abs() < 1e-12,
                "{side:?} bending"
            );
        }
    }

    #[test]
    fn angle_oracle_small_battery_is_tight() {
        let s = ergonomics_angle_oracle(100, 7);
        assert!(s.worst_error_rad <= 1e-9, "worst {:.3e}", s.worst_error_rad);
    }

    #[test]
    fn wrench_profiles_respect_caps_and_are_seeded() {
        let a = band_limited_wrench(3, 2000, 1e-3, 50.0, 5.0, 2.0);
        let b = band_limited_wrench(3, 2000, 1e-3, 50.0, 5.0, 2.0);
        let c = band_limited_wrench(4, 2000, 1e-3, 50.0, 5.0, 2.0);
        assert_eq!(a[100].force, b[100].force);
        assert_ne!(a[100].force, c[100].force);
        let max_f = a.iter().map(|w| w.force.norm()).fold(0.0, f64::max);
        assert!(max_f <= 50.0 + 1e-9);
        assert!(max_f >= 45.0, "profile should use most of the cap");
    }

    #[test]
    fn mini_passivity_battery_is_clean() {
        let s = passivity_battery(3, 2.0, 1e-3);
        assert!(
            s.worst_passivity_ratio <= 1e-3,
            "ratio {:.3e}",
            s.worst_passivity_ratio
        );
        assert!(s.worst_bound_ratio <= 1e-3);
    }

    #[test]
    fn refinement_shrinks_the_audit_slack() {
        // the slack left by the discrete integration must vanish with the
        // step: a tenfold finer step keeps the ratio an order tighter
        let coarse = passivity_battery(2, 2.0, 1e-3);
        let fine = passivity_battery(2, 2.0, 1e-4);
        assert!(
            fine.worst_passivity_ratio <= coarse.worst_passivity_ratio.max(1e-6),
            "fine {:.3e} vs coarse {:.3e}",
            fine.worst_passivity_ratio,
            coarse.worst_passivity_ratio
        );
        assert!(fine.worst_passivity_ratio <= 1e-4);
    }

    #[test]
    fn capsule_oracle_small_battery_is_tight() {
        let s = capsule_sampling_oracle(2000, 20_000, 3);
        // 20k samples over the ~3 m perimeter space points 1.5e-4 apart,
        // so the analytic point must sit within one spacing
        assert!(
            s.worst_distance_m <= 5e-4,
            "worst {:.3e}",
            s.worst_distance_m
        );
    }

    #[test]
    fn dls_small_battery_passes_all_bounds() {
        let s = dls_battery(20, 9);
        assert!(s.worst_optimality <= 1e-8);
        assert!(s.worst_small_damping_residual <= 1e-6);
        assert!(s.min_suppression >= 100.0);
        assert!(
            s.worst_leak_frac <= NULLSPACE_LEAK_FRAC,
            "leak {:.4}",
            s.worst_leak_frac
        );
    }
}
