//! Chain model, forward kinematics and the geometric Jacobian.

use super::KinematicsError;
use crate::math::{UnitQuat, Vec3};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

/// Rigid transform / pose: rotation then translation.
#[derive(Debug, Clone, Copy)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: UnitQuat,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            position: Vec3::zeros(),
            orientation: UnitQuat::identity(),
        }
    }

    pub fn new(position: Vec3, orientation: UnitQuat) -> Self {
        Self {
            position,
            orientation,
        }
    }

    /// Compose `self ∘ other` (apply `other` in the frame of `self`).
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            position: self.position + self.orientation.rotate(&other.position),
            orientation: self.orientation.mul(&other.orientation).renormalized(),
        }
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.position + self.orientation.rotate(p)
    }
}

/// One revolute arm joint: a fixed parent-frame transform followed by a
/// rotation about `axis` (unit, expressed in the joint frame).
#[derive(Debug, Clone, Copy)]
pub struct ArmJoint {
    pub offset: Pose,
    pub axis: Vec3,
    /// Optional position limits (rad); enforced by clamping.
    pub limits_rad: Option<(f64, f64)>,
}

/// Floating-base manipulator: planar base joints (x, y, yaw) plus an
/// n-revolute arm (n ≥ 6) and an end-effector offset.
#[derive(Debug, Clone)]
pub struct ChainModel {
    /// Base frame (at z = 0) to arm mount.
    pub base_mount: Pose,
    pub joints: Vec<ArmJoint>,
    pub ee_offset: Pose,
}

impl ChainModel {
    /// Total degrees of freedom including the base.
    pub fn dof(&self) -> usize {
        3 + self.joints.len()
    }

    pub fn arm_dof(&self) -> usize {
        self.joints.len()
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        if self.joints.len() < 6 {
            return Err(KinematicsError::InvalidModel(format!(
                "arm needs at least 6 joints, got {}",
                self.joints.len()
            )));
        }
        for (i, j) in self.joints.iter().enumerate() {
            if (j.axis.norm() - 1.0).abs() > 1e-9 {
                return Err(KinematicsError::InvalidModel(format!(
                    "joint {i} axis must be unit length"
                )));
            }
            if let Some((lo, hi)) = j.limits_rad {
                if lo >= hi {
                    return Err(KinematicsError::InvalidModel(format!(
                        "joint {i} limits inverted"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Default 6-R chain loosely sized like a mid-size industrial arm.
    ///
    /// At the all-zero configuration the arm extends along +x:
    /// mount (0,0,0.60) → pan z +0.12 → lift y +0.08 → elbow y after
    /// +0.48 x → wrist1 y after +0.36 x → wrist2 z after +0.10 x →
    /// wrist3 x after +0.08 x → handle +0.12 x, so the home end-effector
    /// pose is p = (1.14, 0, 0.80) with identity orientation.
    pub fn default_six_r() -> Self {
        let t = |x: f64, y: f64, z: f64| Pose::new(Vec3::new(x, y, z), UnitQuat::identity());
        Self {
            base_mount: t(0.0, 0.0, 0.60),
            joints: vec![
                ArmJoint {
                    offset: t(0.0, 0.0, 0.12),
                    axis: Vec3::z(),
                    limits_rad: None,
                },
                ArmJoint {
                    offset: t(0.0, 0.0, 0.08),
                    axis: Vec3::y(),
                    limits_rad: None,
                },
                ArmJoint {
                    offset: t(0.48, 0.0, 0.0),
                    axis: Vec3::y(),
                    limits_rad: None,
                },
                ArmJoint {
                    offset: t(0.36, 0.0, 0.0),
                    axis: Vec3::y(),
                    limits_rad: None,
                },
                ArmJoint {
                    offset: t(0.10, 0.0, 0.0),
                    axis: Vec3::z(),
                    limits_rad: None,
                },
                ArmJoint {
                    offset: t(0.08, 0.0, 0.0),
                    axis: Vec3::x(),
                    limits_rad: None,
                },
            ],
            ee_offset: t(0.12, 0.0, 0.0),
        }
    }

    /// Parse a chain description from structured text (TOML).
    pub fn from_toml_str(text: &str) -> Result<Self, KinematicsError> {
        let desc: ChainDescription =
            toml::from_str(text).map_err(|e| KinematicsError::Parse(e.to_string()))?;
        let model = desc.into_model()?;
        model.validate()?;
        Ok(model)
    }
}

#[derive(Debug, Deserialize)]
struct ChainDescription {
    #[serde(default)]
    base_mount_xyz_m: [f64; 3],
    #[serde(rename = "joint")]
    joints: Vec<JointDescription>,
    #[serde(default)]
    ee_offset_xyz_m: [f64; 3],
}

#[derive(Debug, Deserialize)]
struct JointDescription {
    offset_xyz_m: [f64; 3],
    axis: [f64; 3],
    limits_rad: Option<[f64; 2]>,
}

impl ChainDescription {
    fn into_model(self) -> Result<ChainModel, KinematicsError> {
        let t = |a: [f64; 3]| Pose::new(Vec3::new(a[0], a[1], a[2]), UnitQuat::identity());
        let joints = self
            .joints
            .into_iter()
            .map(|j| {
                let axis = Vec3::new(j.axis[0], j.axis[1], j.axis[2]);
                if axis.norm() < 1e-9 {
                    return Err(KinematicsError::Parse("joint axis must be nonzero".into()));
                }
                Ok(ArmJoint {
                    offset: t(j.offset_xyz_m),
                    axis: axis.normalize(),
                    limits_rad: j.limits_rad.map(|l| (l[0], l[1])),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ChainModel {
            base_mount: t(self.base_mount_xyz_m),
            joints,
            ee_offset: t(self.ee_offset_xyz_m),
        })
    }
}

/// Joint-space state `[x, y, yaw, arm…]` with velocities.
#[derive(Debug, Clone)]
pub struct JointState {
    pub q: DVector<f64>,
    pub q_dot: DVector<f64>,
}

impl JointState {
    pub fn zero(model: &ChainModel) -> Self {
        Self {
            q: DVector::zeros(model.dof()),
            q_dot: DVector::zeros(model.dof()),
        }
    }

    /// Integrate velocities and clamp arm joints into their limits.
    /// Returns true if any clamp engaged.
    pub fn integrate(&mut self, model: &ChainModel, q_dot: &DVector<f64>, dt: f64) -> bool {
        self.q_dot = q_dot.clone();
        self.q += q_dot * dt;
        let mut clamped = false;
        for (i, joint) in model.joints.iter().enumerate() {
            if let Some((lo, hi)) = joint.limits_rad {
                let qi = self.q[3 + i];
                let c = qi.clamp(lo, hi);
                if c != qi {
                    self.q[3 + i] = c;
                    clamped = true;
                }
            }
        }
        clamped
    }
}

/// World pose of the base frame for the current planar joints.
fn base_pose(q: &DVector<f64>) -> Pose {
    Pose::new(
        Vec3::new(q[0], q[1], 0.0),
        UnitQuat::from_axis_angle(Vec3::z(), q[2]),
    )
}

/// World poses of every arm joint origin (after its rotation) plus the
/// world rotation axes; used by both FK and the Jacobian.
fn arm_frames(model: &ChainModel, q: &DVector<f64>) -> (Vec<(Vec3, Vec3)>, Pose) {
    let mut pose = base_pose(q).compose(&model.base_mount);
    let mut frames = Vec::with_capacity(model.joints.len());
    for (i, joint) in model.joints.iter().enumerate() {
        pose = pose.compose(&joint.offset);
        let world_axis = pose.orientation.rotate(&joint.axis);
        frames.push((pose.position, world_axis));
        let rot = Pose::new(
            Vec3::zeros(),
            UnitQuat::from_axis_angle(joint.axis, q[3 + i]),
        );
        pose = pose.compose(&rot);
    }
    (frames, pose.compose(&model.ee_offset))
}

/// End-effector pose for the given joint vector.
pub fn forward_kinematics(model: &ChainModel, q: &DVector<f64>) -> Pose {
    arm_frames(model, q).1
}

/// Geometric Jacobian `J = [J_b J_a]` in the world frame, linear rows
/// first. Base columns: x and y translate, yaw rotates about the base
/// origin.
pub fn jacobian(model: &ChainModel, q: &DVector<f64>) -> DMatrix<f64> {
    let (frames, ee) = arm_frames(model, q);
    let mut j = DMatrix::zeros(6, model.dof());
    j[(0, 0)] = 1.0;
    j[(1, 1)] = 1.0;
    // yaw column: ω = ẑ, v = ẑ × (p_ee − p_base)
    let r = ee.position - Vec3::new(q[0], q[1], 0.0);
    let v_yaw = Vec3::z().cross(&r);
    j[(0, 2)] = v_yaw.x;
    j[(1, 2)] = v_yaw.y;
    j[(2, 2)] = v_yaw.z;
    j[(5, 2)] = 1.0;
    for (i, (origin, axis)) in frames.iter().enumerate() {
        let col = 3 + i;
        let lin = axis.cross(&(ee.position - origin));
        for row in 0..3 {
            j[(row, col)] = lin[row];
            j[(row + 3, col)] = axis[row];
        }
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_q(model: &ChainModel, rng: &mut StdRng) -> DVector<f64> {
        DVector::from_fn(model.dof(), |i, _| {
            if i < 2 {
                rng.random_range(-2.0..2.0)
            } else {
                rng.random_range(-1.4..1.4)
            }
        })
    }

    #[test]
    fn home_pose_matches_documented_geometry() {
        let model = ChainModel::default_six_r();
        model.validate().unwrap();
        let pose = forward_kinematics(&model, &DVector::zeros(model.dof()));
        assert_relative_eq!(pose.position.x, 1.14, epsilon = 1e-12);
        assert_relative_eq!(pose.position.y, 0.0, epsilon = 1e-12);
        assert_relative_eq!(pose.position.z, 0.80, epsilon = 1e-12);
        assert_relative_eq!(pose.orientation.eta(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn base_translation_shifts_ee_without_rotation() {
        let model = ChainModel::default_six_r();
        let mut rng = StdRng::seed_from_u64(2);
        let q = random_q(&model, &mut rng);
        let mut q2 = q.clone();
        q2[0] += 0.7;
        q2[1] -= 0.3;
        let a = forward_kinematics(&model, &q);
        let b = forward_kinematics(&model, &q2);
        assert_relative_eq!(b.position.x - a.position.x, 0.7, epsilon = 1e-12);
        assert_relative_eq!(b.position.y - a.position.y, -0.3, epsilon = 1e-12);
        assert!((b.orientation.mul(&a.orientation.inverse())).angle() < 1e-12);
    }

    #[test]
    fn pure_yaw_rotates_ee_about_base_origin() {
        let model = ChainModel::default_six_r();
        let mut q = DVector::zeros(model.dof());
        q[0] = 0.4;
        q[1] = -0.2;
        let before = forward_kinematics(&model, &q);
        let yaw = 0.9;
        q[2] = yaw;
        let after = forward_kinematics(&model, &q);
        let base = Vec3::new(0.4, -0.2, 0.0);
        let expected =
            base + UnitQuat::from_axis_angle(Vec3::z(), yaw).rotate(&(before.position - base));
        assert!((after.position - expected).norm() < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let model = ChainModel::default_six_r();
        let mut rng = StdRng::seed_from_u64(17);
        let h = 1e-6;
        for _ in 0..100 {
            let q = random_q(&model, &mut rng);
            let j = jacobian(&model, &q);
            for col in 0..model.dof() {
                let mut qp = q.clone();
                let mut qm = q.clone();
                qp[col] += h;
                qm[col] -= h;
                let fp = forward_kinematics(&model, &qp);
                let fm = forward_kinematics(&model, &qm);
                let dlin = (fp.position - fm.position) / (2.0 * h);
                // angular velocity from the relative quaternion
                let dq = fp.orientation.mul(&fm.orientation.inverse());
                let dang = dq.eps() * (2.0 / (2.0 * h));
                for row in 0..3 {
                    assert!(
                        (j[(row, col)] - dlin[row]).abs() < 1e-6,
                        "lin row {row} col {col}"
                    );
                    assert!(
                        (j[(row + 3, col)] - dang[row]).abs() < 1e-6,
                        "ang row {row} col {col}"
                    );
                }
            }
        }
    }

    #[test]
    fn jacobian_base_columns_are_trivial() {
        let model = ChainModel::default_six_r();
        let mut rng = StdRng::seed_from_u64(23);
        let q = random_q(&model, &mut rng);
        let j = jacobian(&model, &q);
        let x_col: Vec<f64> = (0..6).map(|r| j[(r, 0)]).collect();
        assert_eq!(x_col, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(j[(5, 2)], 1.0);
        assert_eq!(j[(3, 2)], 0.0);
        assert_eq!(j[(4, 2)], 0.0);
    }

    #[test]
    fn joint_limits_clamp_with_flag() {
        let mut model = ChainModel::default_six_r();
        model.joints[2].limits_rad = Some((-1.0, 1.0));
        let mut state = JointState::zero(&model);
        let mut q_dot = DVector::zeros(model.dof());
        q_dot[5] = 30.0;
        let clamped = state.integrate(&model, &q_dot, 0.1);
        assert!(clamped);
        assert_eq!(state.q[5], 1.0);
    }

    #[test]
    fn chain_parses_from_toml() {
        let text = r#"
base_mount_xyz_m = [0.0, 0.0, 0.5]
ee_offset_xyz_m = [0.1, 0.0, 0.0]

[[joint]]
offset_xyz_m = [0.0, 0.0, 0.1]
axis = [0.0, 0.0, 1.0]

[[joint]]
offset_xyz_m = [0.0, 0.0, 0.08]
axis = [0.0, 1.0, 0.0]

[[joint]]
offset_xyz_m = [0.45, 0.0, 0.0]
axis = [0.0, 1.0, 0.0]

[[joint]]
offset_xyz_m = [0.38, 0.0, 0.0]
axis = [0.0, 1.0, 0.0]

[[joint]]
offset_xyz_m = [0.1, 0.0, 0.0]
axis = [0.0, 0.0, 1.0]
limits_rad = [-3.0, 3.0]

[[joint]]
offset_xyz_m = [0.08, 0.0, 0.0]
axis = [1.0, 0.0, 0.0]
"#;
        let model = ChainModel::from_toml_str(text).unwrap();
        assert_eq!(model.dof(), 9);
        assert_eq!(model.joints[4].limits_rad, Some((-3.0, 3.0)));
        let five_joint = text.replace(
            "[[joint]]\noffset_xyz_m = [0.08, 0.0, 0.0]\naxis = [1.0, 0.0, 0.0]\n",
            "",
        );
        assert!(ChainModel::from_toml_str(&five_joint).is_err());
    }
}
