//! Online continuous posture assessment.
//!
//! Five joint angles (shoulder abduction, flexion and rotation, elbow
//! flexion, trunk bending) are extracted from skeleton keypoints with the
//! trunk-plane geometry in [`angles`], then mapped through smoothstep risk
//! windows into sub-factors whose product is the posture score
//! `a ∈ [0, 1]` ([`factors`]). Degenerate frames fall back to the previous
//! sample and raise a diagnostic flag instead of failing.

mod angles;
mod factors;
pub mod replay;

pub use angles::{compute_joint_angles, compute_planes, AngleTracker, DegeneracyFlags};
pub use factors::{
    compute_score, sub_factor_abduction, sub_factor_bending, sub_factor_elbow, sub_factor_flexion,
    sub_factor_rotation,
};

use crate::math::Vec3;
use serde::{Deserialize, Serialize};

/// Which arm is being tracked for scoring (the one holding the handle).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Right,
    Left,
}

/// World-frame skeleton keypoints for one sample.
///
/// All ten points must be present after construction; when the tracking
/// source does not provide neck, thorax or pelvis points use
/// [`SkeletonKeypoints::with_completed_trunk`], which synthesizes them from
/// shoulders and hips.
#[derive(Debug, Clone, Copy)]
pub struct SkeletonKeypoints {
    pub shoulder_r: Vec3,
    pub shoulder_l: Vec3,
    pub elbow_r: Vec3,
    pub elbow_l: Vec3,
    pub wrist_r: Vec3,
    pub wrist_l: Vec3,
    pub neck: Vec3,
    pub thorax: Vec3,
    pub pelvis: Vec3,
    pub knee: Vec3,
    pub side: Side,
}

impl SkeletonKeypoints {
    /// Completion pre-pass for sources that only expose limb points:
    /// neck = shoulder midpoint, pelvis = hip midpoint, thorax two-thirds
    /// of the way from neck to pelvis.
    #[allow(clippy::too_many_arguments)]
    pub fn with_completed_trunk(
        shoulder_r: Vec3,
        shoulder_l: Vec3,
        elbow_r: Vec3,
        elbow_l: Vec3,
        wrist_r: Vec3,
        wrist_l: Vec3,
        hip_r: Vec3,
        hip_l: Vec3,
        knee: Vec3,
        side: Side,
    ) -> Self {
        let neck = (shoulder_r + shoulder_l) * 0.5;
        let pelvis = (hip_r + hip_l) * 0.5;
        let thorax = neck + (pelvis - neck) * (2.0 / 3.0);
        Self {
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

    /// Shoulder keypoint of the tracked side.
    pub fn shoulder(&self) -> Vec3 {
        match self.side {
            Side::Right => self.shoulder_r,
            Side::Left => self.shoulder_l,
        }
    }

    /// Elbow keypoint of the tracked side.
    pub fn elbow(&self) -> Vec3 {
        match self.side {
            Side::Right => self.elbow_r,
            Side::Left => self.elbow_l,
        }
    }

    /// Wrist keypoint of the tracked side.
    pub fn wrist(&self) -> Vec3 {
        match self.side {
            Side::Right => self.wrist_r,
            Side::Left => self.wrist_l,
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.shoulder_r,
            self.shoulder_l,
            self.elbow_r,
            self.elbow_l,
            self.wrist_r,
            self.wrist_l,
            self.neck,
            self.thorax,
            self.pelvis,
            self.knee,
        ]
        .iter()
        .all(|p| p.x.is_finite() && p.y.is_finite() && p.z.is_finite())
    }
}

/// Trunk plane normals: `frontal` for the frontal/coronal plane and
/// `sagittal` for the sagittal/lateral plane. Orthonormal by construction.
#[derive(Debug, Clone, Copy)]
pub struct BodyPlanes {
    pub frontal: Vec3,
    pub sagittal: Vec3,
}

/// The five joint angles, radians.
///
/// `elbow` is the interior elbow angle in `[0, π]` (π = fully extended);
/// the others are signed angles in `[−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointAngles {
    pub abduction: f64,
    pub flexion: f64,
    pub rotation: f64,
    pub elbow: f64,
    pub bending: f64,
}

impl JointAngles {
    /// Neutral fallback used before any sample has been scored: zero
    /// shoulder and trunk angles, elbow at a right angle.
    pub fn neutral() -> Self {
        Self {
            abduction: 0.0,
            flexion: 0.0,
            rotation: 0.0,
            elbow: std::f64::consts::FRAC_PI_2,
            bending: 0.0,
        }
    }
}

/// Risk-window thresholds, radians. Defaults are the worksheet-derived
/// values used throughout: 30° abduction/rotation limits, 20°/45°/90°
/// flexion bands, 80°–120° elbow window, 10°/20°/60° bending bands and a
/// 10° transition width everywhere.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct ErgonomicThresholds {
    pub abduction_upper_rad: f64,
    pub flexion_lower_rad: f64,
    pub flexion_mid_rad: f64,
    pub flexion_upper_rad: f64,
    pub rotation_upper_rad: f64,
    pub elbow_lower_rad: f64,
    pub elbow_upper_rad: f64,
    pub bending_lower_rad: f64,
    pub bending_mid_rad: f64,
    pub bending_upper_rad: f64,
    pub delta_rad: f64,
}

impl Default for ErgonomicThresholds {
    fn default() -> Self {
        Self {
            abduction_upper_rad: 30f64.to_radians(),
            flexion_lower_rad: 20f64.to_radians(),
            flexion_mid_rad: 45f64.to_radians(),
            flexion_upper_rad: 90f64.to_radians(),
            rotation_upper_rad: 30f64.to_radians(),
            elbow_lower_rad: 80f64.to_radians(),
            elbow_upper_rad: 120f64.to_radians(),
            bending_lower_rad: 10f64.to_radians(),
            bending_mid_rad: 20f64.to_radians(),
            bending_upper_rad: 60f64.to_radians(),
            delta_rad: 10f64.to_radians(),
        }
    }
}

impl ErgonomicThresholds {
    /// Check the orderings the smoothstep windows rely on.
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            ("abduction_upper_rad", self.abduction_upper_rad),
            ("flexion_lower_rad", self.flexion_lower_rad),
            ("flexion_mid_rad", self.flexion_mid_rad),
            ("flexion_upper_rad", self.flexion_upper_rad),
            ("rotation_upper_rad", self.rotation_upper_rad),
            ("elbow_lower_rad", self.elbow_lower_rad),
            ("elbow_upper_rad", self.elbow_upper_rad),
            ("bending_lower_rad", self.bending_lower_rad),
            ("bending_mid_rad", self.bending_mid_rad),
            ("bending_upper_rad", self.bending_upper_rad),
            ("delta_rad", self.delta_rad),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("threshold {name} must be positive and finite"));
            }
        }
        if self.elbow_lower_rad + self.delta_rad >= self.elbow_upper_rad - self.delta_rad {
            return Err("elbow window collapses: lower+delta must stay below upper-delta".into());
        }
        if !(self.flexion_lower_rad < self.flexion_mid_rad
            && self.flexion_mid_rad < self.flexion_upper_rad)
        {
            return Err("flexion thresholds must be strictly increasing".into());
        }
        if !(self.bending_lower_rad < self.bending_mid_rad
            && self.bending_mid_rad < self.bending_upper_rad)
        {
            return Err("bending thresholds must be strictly increasing".into());
        }
        Ok(())
    }
}

/// The total posture score and its five sub-factors, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgonomicScore {
    pub total: f64,
    pub abduction: f64,
    pub flexion: f64,
    pub rotation: f64,
    pub elbow: f64,
    pub bending: f64,
}
