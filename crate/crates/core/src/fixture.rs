//! Ergonomics-driven admittance control with god-object virtual fixtures.
//!
//! One [`FixtureController::step`] advances the end-effector admittance
//! model by a single control period: it gates the god-object motion on the
//! posture score and the return-direction test, derives the kinesthetic
//! stiffness term from the pose deviation, assembles the variable damping
//! matrix and audits the energy balance in a [`PassivityLedger`].

use crate::math::{
    angle_between, pose_deviation, quat_integrate, smooth_step, unit_vector_rotate, PoseDeviation,
    UnitQuat, Vec3,
};
use nalgebra::Vector6;
use serde::{Deserialize, Serialize};

/// Generalized end-effector velocity `[ṗ; ω]`.
pub type Twist = Vector6<f64>;

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("invalid fixture parameters: {0}")]
    InvalidParams(String),
    #[error("non-finite input rejected: {0}")]
    NonFiniteInput(&'static str),
}

/// Human generalized force at the handle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrench {
    pub force: Vec3,
    pub torque: Vec3,
}

impl Wrench {
    pub fn zero() -> Self {
        Self {
            force: Vec3::zeros(),
            torque: Vec3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.force
            .iter()
            .chain(self.torque.iter())
            .all(|x| x.is_finite())
    }

    pub fn as_twist(&self) -> Twist {
        Twist::new(
            self.force.x,
            self.force.y,
            self.force.z,
            self.torque.x,
            self.torque.y,
            self.torque.z,
        )
    }
}

/// Admittance and fixture gains for one operating profile.
///
/// `arm()` is the manipulation profile; `base()` is the locomotion profile
/// (heavier virtual inertia and damping, no kinesthetic stiffness, no
/// deviation-based damping).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct FixtureParams {
    /// Target inertia diagonal, translational block (kg).
    pub inertia_lin_kg: f64,
    /// Target inertia diagonal, rotational block (kg·m²).
    pub inertia_ang_kgm2: f64,
    /// Constant damping, translational block (Ns/m).
    pub damping_lin_ns_per_m: f64,
    /// Constant damping, rotational block (Nms/rad).
    pub damping_ang_nms_per_rad: f64,
    /// Stiffness toward the god object, translational (N/m).
    pub k_p_n_per_m: f64,
    /// Stiffness toward the god object, rotational (Nm/rad-equivalent).
    pub k_o_nm: f64,
    /// God-object convergence gain (1/s).
    pub k_r: f64,
    /// Exponent shaping the sensitivity of the fixture gate to the score.
    pub m_exp: f64,
    /// Direction-vector tracking gain (rad/s).
    pub k_n: f64,
    /// Width of the return-direction transition band (rad).
    pub delta_n_rad: f64,
    /// Angle below which motion counts as returning to the fixture (rad).
    pub phi_bar_n_rad: f64,
    /// Linear speed below which the motion direction is undefined (m/s).
    pub eps_v_m_per_s: f64,
    /// Power-based damping scale/decay, translational.
    pub a_p: f64,
    pub b_p: f64,
    /// Power-based damping scale/decay, rotational.
    pub a_o: f64,
    pub b_o: f64,
    /// Deviation-based damping gains.
    pub c_p: f64,
    pub c_o: f64,
    /// Control period (s).
    pub t_c_s: f64,
    /// Baseline variant: the god object is pinned to the end-effector, so
    /// no kinesthetic feedback is produced.
    pub pin_god_object: bool,
}

impl Default for FixtureParams {
    fn default() -> Self {
        Self::arm()
    }
}

impl FixtureParams {
    /// Manipulation (arm prioritization) profile.
    pub fn arm() -> Self {
        Self {
            inertia_lin_kg: 5.0,
            inertia_ang_kgm2: 0.25,
            damping_lin_ns_per_m: 20.0,
            damping_ang_nms_per_rad: 1.0,
            k_p_n_per_m: 600.0,
            k_o_nm: 40.0,
            k_r: 200.0,
            m_exp: 0.5,
            k_n: 1e3,
            delta_n_rad: 5f64.to_radians(),
            phi_bar_n_rad: 55f64.to_radians(),
            eps_v_m_per_s: 1e-3,
            a_p: 20.0,
            b_p: 1.0,
            a_o: 4.0,
            b_o: 5.0,
            c_p: 2500.0,
            c_o: 20.0,
            t_c_s: 1e-3,
            pin_god_object: false,
        }
    }

    /// Locomotion (base prioritization) profile: heavier admittance, no
    /// posture stiffness, no deviation damping.
    pub fn base() -> Self {
        Self {
            inertia_lin_kg: 15.0,
            inertia_ang_kgm2: 0.5,
            damping_lin_ns_per_m: 40.0,
            damping_ang_nms_per_rad: 1.0,
            k_p_n_per_m: 0.0,
            k_o_nm: 0.0,
            c_p: 0.0,
            c_o: 0.0,
            ..Self::arm()
        }
    }

    pub fn validate(&self) -> Result<(), FixtureError> {
        let positive = [
            ("inertia_lin_kg", self.inertia_lin_kg),
            ("inertia_ang_kgm2", self.inertia_ang_kgm2),
            ("damping_lin_ns_per_m", self.damping_lin_ns_per_m),
            ("damping_ang_nms_per_rad", self.damping_ang_nms_per_rad),
            ("k_r", self.k_r),
            ("m_exp", self.m_exp),
            ("k_n", self.k_n),
            ("delta_n_rad", self.delta_n_rad),
            ("phi_bar_n_rad", self.phi_bar_n_rad),
            ("eps_v_m_per_s", self.eps_v_m_per_s),
            ("a_p", self.a_p),
            ("b_p", self.b_p),
            ("a_o", self.a_o),
            ("b_o", self.b_o),
            ("t_c_s", self.t_c_s),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(FixtureError::InvalidParams(format!(
                    "{name} must be > 0, got {v}"
                )));
            }
        }
        let non_negative = [
            ("k_p_n_per_m", self.k_p_n_per_m),
            ("k_o_nm", self.k_o_nm),
            ("c_p", self.c_p),
            ("c_o", self.c_o),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(FixtureError::InvalidParams(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        if self.delta_n_rad >= self.phi_bar_n_rad {
            return Err(FixtureError::InvalidParams(
                "delta_n_rad must be smaller than phi_bar_n_rad".into(),
            ));
        }
        Ok(())
    }

    fn inertia_diag(&self) -> Twist {
        block_diag(self.inertia_lin_kg, self.inertia_ang_kgm2)
    }

    fn damping_const_diag(&self) -> Twist {
        block_diag(self.damping_lin_ns_per_m, self.damping_ang_nms_per_rad)
    }
}

fn block_diag(lin: f64, ang: f64) -> Twist {
    Twist::new(lin, lin, lin, ang, ang, ang)
}

/// Admittance state: end-effector pose and twist, god-object pose and the
/// motion-direction unit vector.
#[derive(Debug, Clone, Copy)]
pub struct FixtureState {
    pub p: Vec3,
    pub q: UnitQuat,
    pub v: Twist,
    pub p_g: Vec3,
    pub q_g: UnitQuat,
    pub n: Vec3,
}

impl FixtureState {
    /// At-rest state with the god object coincident with the end-effector.
    /// The direction vector starts along world x; it is irrelevant until
    /// the first motion above the velocity threshold.
    pub fn at_rest(p: Vec3, q: UnitQuat) -> Self {
        Self {
            p,
            q,
            v: Twist::zeros(),
            p_g: p,
            q_g: q,
            n: Vec3::x(),
        }
    }
}

/// Variable damping decomposition for one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingTerms {
    pub d_vp: f64,
    pub d_vo: f64,
    pub d_fp: f64,
    pub d_fo: f64,
}

impl DampingTerms {
    /// Full damping diagonal `D_d = D_c + D_v + D_f`.
    pub fn total(&self, params: &FixtureParams) -> Twist {
        params.damping_const_diag() + block_diag(self.d_vp + self.d_fp, self.d_vo + self.d_fo)
    }
}

/// Numerical audit of the passivity and boundedness claims.
///
/// Tracks the storage function, the trapezoidal integral of the input
/// power `vᵀF_h`, and the damping-dependent energy bound; the worst
/// observed violations are kept for acceptance checks.
#[derive(Debug, Clone, Copy)]
pub struct PassivityLedger {
    storage_initial: f64,
    storage: f64,
    storage_max: f64,
    work_in: f64,
    bound_integral: f64,
    worst_passivity_violation: f64,
    worst_bound_violation: f64,
}

impl PassivityLedger {
    pub fn new(initial_storage: f64) -> Self {
        Self {
            storage_initial: initial_storage,
            storage: initial_storage,
            storage_max: initial_storage,
            work_in: 0.0,
            bound_integral: 0.0,
            worst_passivity_violation: f64::NEG_INFINITY,
            worst_bound_violation: f64::NEG_INFINITY,
        }
    }

    fn update(&mut self, storage: f64, work_increment: f64, bound_increment: f64) {
        self.storage = storage;
        self.storage_max = self.storage_max.max(storage);
        self.work_in += work_increment;
        self.bound_integral += bound_increment;
        let passivity = storage - self.storage_initial - self.work_in;
        let bound = storage - (self.storage_initial + self.bound_integral);
        self.worst_passivity_violation = self.worst_passivity_violation.max(passivity);
        self.worst_bound_violation = self.worst_bound_violation.max(bound);
    }

    pub fn storage(&self) -> f64 {
        self.storage
    }

    pub fn storage_initial(&self) -> f64 {
        self.storage_initial
    }

    pub fn storage_max(&self) -> f64 {
        self.storage_max
    }

    pub fn work_in(&self) -> f64 {
        self.work_in
    }

    /// Current value of the boundedness right-hand side
    /// `V(0) + ∫ λ_max(D_d⁻¹)/4 ‖F_h‖² dτ`.
    pub fn bound(&self) -> f64 {
        self.storage_initial + self.bound_integral
    }

    /// Largest observed `V − V(0) − ∫vᵀF_h dτ` (≤ tolerance when passive).
    pub fn worst_passivity_violation(&self) -> f64 {
        self.worst_passivity_violation
    }

    /// Largest observed `V − bound`.
    pub fn worst_bound_violation(&self) -> f64 {
        self.worst_bound_violation
    }
}

/// Per-tick outputs consumed by the kinematics layer and the trace.
#[derive(Debug, Clone, Copy)]
pub struct TickOutput {
    /// Commanded end-effector twist for the IK layer.
    pub v: Twist,
    /// Fixture gate value `f(a, p_e) ∈ [0, 1]`.
    pub f: f64,
    /// Kinesthetic feedback term.
    pub u_c: Wrench,
    /// Damping decomposition used this tick.
    pub damping: DampingTerms,
    /// Deviation after the tick (robot and god object both advanced).
    pub deviation: PoseDeviation,
}

/// Fixture gate `f = aᵐ + (1 − aᵐ) h(ang(n, p_e); φ̄_n − δ_n, φ̄_n)`.
///
/// 1 whenever the posture is fully ergonomic, and otherwise opens only
/// when the frozen direction vector forms an acute-enough angle with the
/// deviation, i.e. the user is heading back toward the fixture.
pub fn compute_f(a: f64, p_e: &Vec3, n: &Vec3, params: &FixtureParams) -> f64 {
    assert!(
        (0.0..=1.0).contains(&a),
        "score a must lie in [0,1], got {a}"
    );
    let am = a.powf(params.m_exp);
    am + (1.0 - am)
        * smooth_step(
            angle_between(n, p_e),
            params.phi_bar_n_rad - params.delta_n_rad,
            params.phi_bar_n_rad,
        )
}

/// Advance the motion-direction vector `n` toward the current direction of
/// motion, at a rate proportional to the posture score.
pub fn step_direction(n: &Vec3, v_lin: &Vec3, a: f64, params: &FixtureParams) -> Vec3 {
    let n_d = if v_lin.norm() > params.eps_v_m_per_s {
        v_lin / v_lin.norm()
    } else {
        Vec3::zeros()
    };
    let phi_n = angle_between(n, &n_d);
    let omega_n = params.k_n * a * (phi_n.abs() * 0.5).sin();
    unit_vector_rotate(n, &(n.cross(&n_d) * (omega_n * params.t_c_s)))
}

/// Advance the god object toward the (already updated) end-effector pose.
///
/// The translational deviation decays with the exact integrating factor of
/// its linear dynamics over one period, which keeps the discrete decay
/// rate equal to `k_r f`; the orientation uses the exponential-map step
/// with `ω_g = −k_r f ε_e`.
pub fn step_god_object(
    p: &Vec3,
    q: &UnitQuat,
    p_g: &Vec3,
    q_g: &UnitQuat,
    f: f64,
    params: &FixtureParams,
) -> (Vec3, UnitQuat) {
    let dev = pose_deviation(p_g, q_g, p, q);
    let decay = (-params.k_r * f * params.t_c_s).exp();
    let p_g_new = p + dev.p_e * decay;
    let omega_g = dev.eps_e() * (-params.k_r * f);
    let q_g_new = if omega_g.norm() == 0.0 {
        *q_g
    } else {
        quat_integrate(q_g, &omega_g, params.t_c_s)
    };
    (p_g_new, q_g_new)
}

/// Kinesthetic stiffness term `u_c = K_d [p_e; R_eᵀ ε_e]`.
pub fn control_term(dev: &PoseDeviation, params: &FixtureParams) -> Wrench {
    Wrench {
        force: dev.p_e * params.k_p_n_per_m,
        torque: dev.eps_body() * params.k_o_nm,
    }
}

/// Assemble the variable damping terms for the current tick.
pub fn variable_damping(
    v: &Twist,
    wrench: &Wrench,
    dev: &PoseDeviation,
    f: f64,
    params: &FixtureParams,
) -> DampingTerms {
    let v_lin = Vec3::new(v[0], v[1], v[2]);
    let v_ang = Vec3::new(v[3], v[4], v[5]);
    let s_p = v_lin.dot(&wrench.force).max(0.0);
    let s_o = v_ang.dot(&wrench.torque).max(0.0);
    DampingTerms {
        d_vp: params.a_p * (-params.b_p * s_p).exp(),
        d_vo: params.a_o * (-params.b_o * s_o).exp(),
        d_fp: params.c_p * dev.p_e.norm() * (1.0 - f),
        d_fo: params.c_o * dev.eps_e().norm() * (1.0 - f),
    }
}

/// Storage function `V = ½vᵀM_d v + ½k_p‖p_e‖² + 2k_o Ψ_e`.
pub fn storage_function(v: &Twist, dev: &PoseDeviation, params: &FixtureParams) -> f64 {
    let m = params.inertia_diag();
    let kinetic: f64 = 0.5 * v.component_mul(&m).dot(v);
    kinetic + 0.5 * params.k_p_n_per_m * dev.p_e.norm_squared() + 2.0 * params.k_o_nm * dev.psi_e()
}

/// One controller instance owns its state and ledger; ticks are strictly
/// sequential.
#[derive(Debug, Clone)]
pub struct FixtureController {
    params: FixtureParams,
    state: FixtureState,
    ledger: PassivityLedger,
}

impl FixtureController {
    pub fn new(params: FixtureParams, initial: FixtureState) -> Result<Self, FixtureError> {
        params.validate()?;
        let dev = pose_deviation(&initial.p_g, &initial.q_g, &initial.p, &initial.q);
        let ledger = PassivityLedger::new(storage_function(&initial.v, &dev, &params));
        Ok(Self {
            params,
            state: initial,
            ledger,
        })
    }

    pub fn params(&self) -> &FixtureParams {
        &self.params
    }

    pub fn state(&self) -> &FixtureState {
        &self.state
    }

    pub fn ledger(&self) -> &PassivityLedger {
        &self.ledger
    }

    /// Swap the active parameter profile (mode change). The storage
    /// function changes with the profile, so the ledger is re-baselined at
    /// the current state.
    pub fn swap_params(&mut self, params: FixtureParams) -> Result<(), FixtureError> {
        params.validate()?;
        self.params = params;
        let dev = pose_deviation(
            &self.state.p_g,
            &self.state.q_g,
            &self.state.p,
            &self.state.q,
        );
        self.ledger = PassivityLedger::new(storage_function(&self.state.v, &dev, &self.params));
        Ok(())
    }

    /// Advance one control period.
    ///
    /// Update order: deviation and gate from the pre-step state, direction
    /// vector, stiffness term, damping, semi-implicit velocity update,
    /// pose integration, god-object step against the new pose, ledger.
    pub fn step(&mut self, wrench: &Wrench, a: f64) -> Result<TickOutput, FixtureError> {
        if !wrench.is_finite() {
            return Err(FixtureError::NonFiniteInput("wrench"));
        }
        if !(a.is_finite() && (0.0..=1.0).contains(&a)) {
            return Err(FixtureError::NonFiniteInput("score"));
        }
        let params = self.params;
        let tc = params.t_c_s;
        let mut st = self.state;

        if params.pin_god_object {
            st.p_g = st.p;
            st.q_g = st.q;
        }

        let dev_pre = pose_deviation(&st.p_g, &st.q_g, &st.p, &st.q);
        let f = compute_f(a, &dev_pre.p_e, &st.n, &params);
        let v_lin_pre = Vec3::new(st.v[0], st.v[1], st.v[2]);
        st.n = step_direction(&st.n, &v_lin_pre, a, &params);
        let u_c = control_term(&dev_pre, &params);
        let damping = variable_damping(&st.v, wrench, &dev_pre, f, &params);
        let d_d = damping.total(&params);

        // Semi-implicit velocity update: (M/Tc + D_d) v⁺ = M/Tc v + F_h + u_c.
        let m = params.inertia_diag();
        let rhs = st.v.component_mul(&m) / tc + wrench.as_twist() + u_c.as_twist();
        let mut v_new = Twist::zeros();
        for i in 0..6 {
            v_new[i] = rhs[i] / (m[i] / tc + d_d[i]);
        }

        let v_lin_new = Vec3::new(v_new[0], v_new[1], v_new[2]);
        let v_ang_new = Vec3::new(v_new[3], v_new[4], v_new[5]);
        st.p += v_lin_new * tc;
        st.q = quat_integrate(&st.q, &v_ang_new, tc);

        if params.pin_god_object {
            st.p_g = st.p;
            st.q_g = st.q;
        } else {
            let (p_g, q_g) = step_god_object(&st.p, &st.q, &st.p_g, &st.q_g, f, &params);
            st.p_g = p_g;
            st.q_g = q_g;
        }

        let dev_post = pose_deviation(&st.p_g, &st.q_g, &st.p, &st.q);
        let storage = storage_function(&v_new, &dev_post, &params);
        // Trapezoidal work over the tick with the wrench held constant.
        let work = 0.5 * tc * wrench.as_twist().dot(&(self.state.v + v_new));
        let d_min = d_d.min();
        let bound_inc = tc * wrench.as_twist().norm_squared() / (4.0 * d_min);
        st.v = v_new;
        self.state = st;
        self.ledger.update(storage, work, bound_inc);

        Ok(TickOutput {
            v: v_new,
            f,
            u_c,
            damping,
            deviation: dev_post,
        })
    }
}
