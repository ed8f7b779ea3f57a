//! Synthetic human: kinematic keypoints driven by the robot handle.
//!
//! The hand keypoint is pinned to the end-effector each tick; the elbow is
//! placed by two-link analytic inverse kinematics in a vertical swivel
//! plane, and the trunk bends by a scripted sagittal angle. Kinematic
//! only: ergonomics scoring depends purely on posture geometry.

use super::scenario::HumanConfig;
use crate::ergonomics::{Side, SkeletonKeypoints};
use crate::math::{rotate_vector, Vec3};

/// Resolved synthetic-human geometry.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticHuman {
    pub pelvis: Vec3,
    /// Unit horizontal facing direction.
    pub forward: Vec3,
    pub upper_arm_m: f64,
    pub forearm_m: f64,
    pub shoulder_halfwidth_m: f64,
    pub trunk_len_m: f64,
    pub knee_drop_m: f64,
    pub side: Side,
}

impl SyntheticHuman {
    pub fn from_config(cfg: &HumanConfig, side: Side) -> Self {
        let fwd = Vec3::new(cfg.forward_xy[0], cfg.forward_xy[1], 0.0).normalize();
        Self {
            pelvis: Vec3::new(
                cfg.pelvis_xyz_m[0],
                cfg.pelvis_xyz_m[1],
                cfg.pelvis_xyz_m[2],
            ),
            forward: fwd,
            upper_arm_m: cfg.upper_arm_m,
            forearm_m: cfg.forearm_m,
            shoulder_halfwidth_m: cfg.shoulder_halfwidth_m,
            trunk_len_m: cfg.trunk_len_m,
            knee_drop_m: cfg.knee_drop_m,
            side,
        }
    }

    pub fn reach_m(&self) -> f64 {
        self.upper_arm_m + self.forearm_m
    }

    /// Shoulder position of the tracked arm for a given trunk bend.
    pub fn shoulder(&self, trunk_bend_rad: f64) -> Vec3 {
        let (neck, _) = self.trunk(trunk_bend_rad);
        let lat_right = self.forward.cross(&Vec3::z());
        match self.side {
            Side::Right => neck + lat_right * self.shoulder_halfwidth_m,
            Side::Left => neck - lat_right * self.shoulder_halfwidth_m,
        }
    }

    /// Neck position and trunk direction for a given sagittal bend
    /// (positive leans toward `forward`).
    fn trunk(&self, bend_rad: f64) -> (Vec3, Vec3) {
        let lat_left = Vec3::z().cross(&self.forward);
        let trunk_dir = rotate_vector(&(lat_left * bend_rad), &Vec3::z());
        (self.pelvis + trunk_dir * self.trunk_len_m, trunk_dir)
    }
}

/// Keypoints plus the reach-clamp diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct KeypointOutcome {
    pub keypoints: SkeletonKeypoints,
    /// The hand was outside the reachable annulus and was clamped.
    pub clamped: bool,
}

/// Place all ten keypoints for one tick.
///
/// The tracked wrist is the (possibly clamped) hand position; the elbow
/// sits in the vertical plane through shoulder and hand, elbow-down. The
/// untracked arm hangs at the side with the forearm forward.
pub fn synthesize_keypoints(
    human: &SyntheticHuman,
    hand: &Vec3,
    trunk_bend_rad: f64,
) -> KeypointOutcome {
    let (neck, _) = human.trunk(trunk_bend_rad);
    let lat_right = human.forward.cross(&Vec3::z());
    let shoulder_r = neck + lat_right * human.shoulder_halfwidth_m;
    let shoulder_l = neck - lat_right * human.shoulder_halfwidth_m;
    let thorax = neck + (human.pelvis - neck) * (2.0 / 3.0);
    let knee = human.pelvis - Vec3::z() * human.knee_drop_m;

    let shoulder = match human.side {
        Side::Right => shoulder_r,
        Side::Left => shoulder_l,
    };

    // clamp the hand into the reachable annulus of the two-link arm
    let mut clamped = false;
    let offset = hand - shoulder;
    let dist = offset.norm();
    let max_reach = human.reach_m() - 1e-6;
    let min_reach = (human.upper_arm_m - human.forearm_m).abs() + 1e-6;
    let (wrist, dist) = if dist > max_reach {
        clamped = true;
        (shoulder + offset * (max_reach / dist), max_reach)
    } else if dist < min_reach {
        clamped = true;
        let dir = if dist > 1e-9 {
            offset / dist
        } else {
            human.forward
        };
        (shoulder + dir * min_reach, min_reach)
    } else {
        (*hand, dist)
    };

    // two-link IK: interior shoulder angle from the law of cosines
    let u = human.upper_arm_m;
    let f = human.forearm_m;
    let cos_alpha = ((u * u + dist * dist - f * f) / (2.0 * u * dist)).clamp(-1.0, 1.0);
    let alpha = cos_alpha.acos();
    let dir = (wrist - shoulder) / dist;
    // elbow-down swivel: the in-plane perpendicular closest to straight down
    let mut down = dir * Vec3::z().dot(&dir) - Vec3::z();
    if down.norm() < 1e-6 {
        // hand directly above/below the shoulder: fall back to the
        // forward direction to keep the plane defined
        down = human.forward - dir * human.forward.dot(&dir);
    }
    let down = down.normalize();
    let elbow = shoulder + (dir * alpha.cos() + down * alpha.sin()) * u;

    // untracked arm: hanging, forearm forward (never degenerate)
    let other_shoulder = match human.side {
        Side::Right => shoulder_l,
        Side::Left => shoulder_r,
    };
    let other_elbow = other_shoulder - Vec3::z() * human.upper_arm_m;
    let other_wrist = other_elbow + human.forward * human.forearm_m;

    let (elbow_r, elbow_l, wrist_r, wrist_l) = match human.side {
        Side::Right => (elbow, other_elbow, wrist, other_wrist),
        Side::Left => (other_elbow, elbow, other_wrist, wrist),
    };

    KeypointOutcome {
        keypoints: SkeletonKeypoints {
            shoulder_r,
            shoulder_l,
            elbow_r,
            elbow_l,
            wrist_r,
            wrist_l,
            neck,
            thorax,
            pelvis: human.pelvis,
            knee,
            side: human.side,
        },
        clamped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergonomics::{compute_joint_angles, JointAngles};
    use approx::assert_relative_eq;

    fn human() -> SyntheticHuman {
        SyntheticHuman::from_config(&HumanConfig::default(), Side::Right)
    }

    #[test]
    fn full_reach_gives_straight_elbow() {
        let h = human();
        let s = h.shoulder(0.0);
        let hand = s + h.forward * (h.reach_m() - 1e-6);
        let out = synthesize_keypoints(&h, &hand, 0.0);
        assert!(!out.clamped);
        let (angles, _) = compute_joint_angles(&out.keypoints, &JointAngles::neutral());
        // the 1e-6 reach margin costs a few mrad through the acos
        assert!((angles.elbow - std::f64::consts::PI).abs() < 1e-2);
    }

    #[test]
    fn right_angle_elbow_distance_recovers_half_pi() {
        let h = human();
        let s = h.shoulder(0.0);
        let d = (h.upper_arm_m * h.upper_arm_m + h.forearm_m * h.forearm_m).sqrt();
        let hand = s + (h.forward * 0.8 - Vec3::z() * 0.6).normalize() * d;
        let out = synthesize_keypoints(&h, &hand, 0.0);
        assert!(!out.clamped);
        let (angles, _) = compute_joint_angles(&out.keypoints, &JointAngles::neutral());
        assert_relative_eq!(angles.elbow, std::f64::consts::FRAC_PI_2, epsilon = 1e-9);
    }

    #[test]
    fn unreachable_hand_is_clamped_with_flag() {
        let h = human();
        let s = h.shoulder(0.0);
        let hand = s + h.forward * (h.reach_m() + 0.3);
        let out = synthesize_keypoints(&h, &hand, 0.0);
        assert!(out.clamped);
        let wrist = out.keypoints.wrist();
        assert!((wrist - s).norm() <= h.reach_m());
        // elbow stays consistent: both links keep their lengths
        let e = out.keypoints.elbow();
        assert_relative_eq!((e - s).norm(), h.upper_arm_m, epsilon = 1e-12);
        assert_relative_eq!((wrist - e).norm(), h.forearm_m, epsilon = 1e-12);
    }

    #[test]
    fn link_lengths_hold_everywhere() {
        let h = human();
        let s = h.shoulder(0.1);
        for k in 0..50 {
            let t = k as f64 / 49.0;
            let hand = s + Vec3::new(-0.5 + t, 0.3 * (6.0 * t).sin(), -0.4 + 0.5 * t).normalize()
                * (0.2 + 0.37 * t);
            let out = synthesize_keypoints(&h, &hand, 0.1);
            let kp = out.keypoints;
            assert_relative_eq!(
                (kp.elbow() - kp.shoulder()).norm(),
                h.upper_arm_m,
                epsilon = 1e-12
            );
            assert_relative_eq!(
                (kp.wrist() - kp.elbow()).norm(),
                h.forearm_m,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn trunk_bend_is_recovered_by_the_scorer() {
        let h = human();
        let s = h.shoulder(0.25);
        let hand = s + h.forward * 0.4 - Vec3::z() * 0.2;
        let out = synthesize_keypoints(&h, &hand, 0.25);
        let (angles, _) = compute_joint_angles(&out.keypoints, &JointAngles::neutral());
        assert_relative_eq!(angles.bending, 0.25, epsilon = 1e-9);
    }
}
