//! Smoothstep risk windows mapping joint angles to `[0, 1]` sub-factors.
//!
//! Each factor is 1 in the comfortable range, 0 past the risk limit and
//! C²-smooth in between, so the product can drive the admittance model
//! without discontinuities.

use super::{ErgonomicScore, ErgonomicThresholds, JointAngles};
use crate::math::smooth_step;

/// Shoulder abduction/adduction: symmetric upper limit, less is better.
pub fn sub_factor_abduction(theta_a: f64, th: &ErgonomicThresholds) -> f64 {
    smooth_step(
        theta_a.abs(),
        th.abduction_upper_rad - th.delta_rad,
        th.abduction_upper_rad,
    )
}

/// Shoulder flexion/extension: three weighted bands on the flexion side,
/// a single extension window on the negative side. Both branches equal 1
/// at zero, so the factor is continuous.
pub fn sub_factor_flexion(theta_f: f64, th: &ErgonomicThresholds) -> f64 {
    if theta_f > 0.0 {
        0.33 * smooth_step(
            theta_f,
            th.flexion_lower_rad - th.delta_rad,
            th.flexion_lower_rad,
        ) + 0.33
            * smooth_step(
                theta_f,
                th.flexion_mid_rad - th.delta_rad,
                th.flexion_mid_rad,
            )
            + 0.34
                * smooth_step(
                    theta_f,
                    th.flexion_upper_rad - th.delta_rad,
                    th.flexion_upper_rad,
                )
    } else {
        1.0 - smooth_step(
            theta_f,
            -th.flexion_lower_rad,
            -th.flexion_lower_rad + th.delta_rad,
        )
    }
}

/// Shoulder internal/external rotation: symmetric upper limit.
pub fn sub_factor_rotation(theta_r: f64, th: &ErgonomicThresholds) -> f64 {
    smooth_step(
        theta_r.abs(),
        th.rotation_upper_rad - th.delta_rad,
        th.rotation_upper_rad,
    )
}

/// Elbow flexion/extension: a plateau between the lower and upper limits,
/// zero outside (both an overly bent and an overextended elbow are risky).
pub fn sub_factor_elbow(theta_e: f64, th: &ErgonomicThresholds) -> f64 {
    -smooth_step(
        theta_e,
        th.elbow_lower_rad,
        th.elbow_lower_rad + th.delta_rad,
    ) + smooth_step(
        theta_e,
        th.elbow_upper_rad - th.delta_rad,
        th.elbow_upper_rad,
    )
}

/// Trunk sagittal bending: three weighted bands; only an upright trunk
/// scores 1.
pub fn sub_factor_bending(theta_b: f64, th: &ErgonomicThresholds) -> f64 {
    0.33 * smooth_step(
        theta_b,
        th.bending_lower_rad - th.delta_rad,
        th.bending_lower_rad,
    ) + 0.33
        * smooth_step(
            theta_b,
            th.bending_mid_rad - th.delta_rad,
            th.bending_mid_rad,
        )
        + 0.34
            * smooth_step(
                theta_b,
                th.bending_upper_rad - th.delta_rad,
                th.bending_upper_rad,
            )
}

/// Total score: the product of all five sub-factors, so any single
/// high-risk joint zeroes the posture score.
pub fn compute_score(angles: &JointAngles, th: &ErgonomicThresholds) -> ErgonomicScore {
    let abduction = sub_factor_abduction(angles.abduction, th);
    let flexion = sub_factor_flexion(angles.flexion, th);
    let rotation = sub_factor_rotation(angles.rotation, th);
    let elbow = sub_factor_elbow(angles.elbow, th);
    let bending = sub_factor_bending(angles.bending, th);
    ErgonomicScore {
        total: abduction * flexion * rotation * elbow * bending,
        abduction,
        flexion,
        rotation,
        elbow,
        bending,
    }
}
