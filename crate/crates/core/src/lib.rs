//! Ergonomics-driven virtual-fixture control for a floating-base manipulator.
//!
//! The crate is organized around the control loop it implements:
//!
//! - [`math`] — quaternions, exponential maps, smoothstep, pose deviations.
//! - [`ergonomics`] — joint angles from skeleton keypoints and the
//!   continuous posture score `a ∈ [0, 1]`.
//! - [`fixture`] — the admittance tick with god-object virtual fixtures,
//!   variable damping and a numerical passivity ledger.
//! - [`kinematics`] — whole-body forward kinematics, damped least-squares
//!   inversion, capsule geometry, base repulsion and mode management.
//! - [`sim`] — deterministic closed-loop scenarios, trace logging and
//!   summary metrics.
//! - [`verify`] — the numerical verification battery behind `srb-sim verify`.

pub mod ergonomics;
pub mod fixture;
pub mod kinematics;
pub mod math;
pub mod sim;
pub mod verify;
