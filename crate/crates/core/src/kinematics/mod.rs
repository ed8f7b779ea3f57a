//! Whole-body kinematics of the floating-base manipulator.
//!
//! A planar base (x, y, yaw) carries an n-revolute arm. The damped
//! least-squares layer turns commanded end-effector twists into joint
//! velocities with task/joint weighting, and the null-space layer injects
//! a repulsive base velocity derived from a 2D point cloud around the
//! platform capsule.

mod capsule;
mod chain;
mod dls;
mod mode;
mod repulsion;

pub use capsule::{capsule_closest, Capsule2, CapsuleQuery, Vec2};
pub use chain::{forward_kinematics, jacobian, ArmJoint, ChainModel, JointState, Pose};
pub use dls::{dls_solve, null_space_command, DlsSolution, IkWeights};
pub use mode::{mode_update, Mode, ModeProfiles, ModeState};
pub use repulsion::{repulsive_velocity, RepulsionConfig, RepulsionOutcome};

#[derive(Debug, thiserror::Error)]
pub enum KinematicsError {
    #[error("invalid chain model: {0}")]
    InvalidModel(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("weighted normal matrix is not positive definite")]
    Singular,
    #[error("query point lies on the capsule axis")]
    OnAxis,
    #[error("failed to parse chain description: {0}")]
    Parse(String),
}
