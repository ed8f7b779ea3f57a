//! Null-space base repulsion from a 2D point cloud around the platform.
//!
//! Points in the annulus around the inflated capsule are split into the
//! human-side region `O_h` and the opposite region `O_o`. Any occupancy of
//! `O_o` deactivates the repulsion (obstacle safety); otherwise the
//! weighted average of the nearby points is projected onto the capsule
//! perimeter and the base is pushed from that contact point toward the
//! axis, i.e. away from the human.

use super::capsule::{capsule_closest, Capsule2, Vec2};
use super::KinematicsError;
use crate::math::smooth_step;
use serde::{Deserialize, Serialize};

/// Repulsion tuning and the human-side half plane.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct RepulsionConfig {
    /// Inflation radius drawn around every cloud point (m).
    pub r_s_m: f64,
    /// Proximity threshold: clearance beyond which points are ignored (m).
    pub d_0_m: f64,
    /// Repulsive velocity gain (m/s at zero clearance).
    pub a_k: f64,
    /// Normal of the human-side half plane, expressed in the base frame;
    /// a point belongs to `O_h` when its base-frame offset from the
    /// capsule center has a non-negative component along this normal.
    pub human_side_normal_base: [f64; 2],
}

impl Default for RepulsionConfig {
    fn default() -> Self {
        Self {
            r_s_m: 0.02,
            d_0_m: 0.10,
            a_k: 0.11,
            human_side_normal_base: [1.0, 0.0],
        }
    }
}

impl RepulsionConfig {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        if !(self.r_s_m > 0.0 && self.d_0_m > 0.0 && self.a_k > 0.0) {
            return Err(KinematicsError::InvalidModel(
                "repulsion radii and gain must be positive".into(),
            ));
        }
        let n = Vec2::new(
            self.human_side_normal_base[0],
            self.human_side_normal_base[1],
        );
        if n.norm() < 1e-9 {
            return Err(KinematicsError::InvalidModel(
                "human side normal must be nonzero".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one repulsion evaluation.
#[derive(Debug, Clone, Copy)]
pub struct RepulsionOutcome {
    /// Repulsive base velocity, expressed in the base frame (m/s).
    pub v_xy: Vec2,
    /// Smallest clearance among human-side points in the annulus.
    pub min_clearance: Option<f64>,
    /// True when obstacle-side occupancy forced deactivation.
    pub deactivated_by_obstacle: bool,
    /// Cloud points skipped because they sat on the capsule axis.
    pub skipped_on_axis: usize,
}

impl RepulsionOutcome {
    fn zero() -> Self {
        Self {
            v_xy: Vec2::zeros(),
            min_clearance: None,
            deactivated_by_obstacle: false,
            skipped_on_axis: 0,
        }
    }
}

fn rotate(v: &Vec2, angle: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// Evaluate the repulsive base velocity for a world-frame point cloud.
///
/// `capsule` is the platform capsule posed in the world; `base_yaw` is the
/// platform heading used both for the half-plane test and to express the
/// output in the base frame.
pub fn repulsive_velocity(
    capsule: &Capsule2,
    cloud: &[Vec2],
    config: &RepulsionConfig,
    base_yaw: f64,
) -> RepulsionOutcome {
    let mut out = RepulsionOutcome::zero();
    let side_normal = Vec2::new(
        config.human_side_normal_base[0],
        config.human_side_normal_base[1],
    )
    .normalize();
    let center = capsule.center();

    // classify annulus occupancy
    let mut human_side: Vec<(Vec2, f64)> = Vec::new(); // (perimeter point, clearance)
    let mut obstacle_side = false;
    for p in cloud {
        let q = match capsule_closest(capsule, p, config.r_s_m) {
            Ok(q) => q,
            Err(KinematicsError::OnAxis) => {
                out.skipped_on_axis += 1;
                continue;
            }
            Err(_) => unreachable!("capsule_closest only fails on-axis"),
        };
        if q.clearance < 0.0 || q.clearance >= config.d_0_m {
            continue;
        }
        let rel_base = rotate(&(p - center), -base_yaw);
        if rel_base.dot(&side_normal) >= 0.0 {
            human_side.push((q.perimeter_point, q.clearance));
        } else {
            obstacle_side = true;
        }
    }

    if obstacle_side {
        out.deactivated_by_obstacle = true;
        return out;
    }
    if human_side.is_empty() {
        return out;
    }

    let mut weighted = Vec2::zeros();
    let mut weight_sum = 0.0;
    let mut min_clearance = f64::INFINITY;
    for (perimeter, clearance) in &human_side {
        let w = smooth_step(*clearance, 0.0, config.d_0_m);
        weighted += perimeter * w;
        weight_sum += w;
        min_clearance = min_clearance.min(*clearance);
    }
    out.min_clearance = Some(min_clearance);
    if weight_sum <= 1e-12 {
        return out;
    }
    let p_bar = weighted / weight_sum;

    // project the average onto the perimeter, then push toward the axis
    let p_c = match capsule_closest(capsule, &p_bar, config.r_s_m) {
        Ok(q) => q.perimeter_point,
        // averaged point collapsed onto the axis: direction undefined
        Err(_) => return out,
    };
    let contact = match capsule_closest(capsule, &p_c, config.r_s_m) {
        Ok(q) => q,
        Err(_) => return out,
    };
    let away = contact.axis_point - p_c;
    if away.norm() <= 1e-12 {
        return out;
    }
    let k_v = config.a_k * smooth_step(min_clearance, 0.0, config.d_0_m);
    out.v_xy = rotate(&(away / away.norm()), -base_yaw) * k_v;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn capsule() -> Capsule2 {
        // centered at the origin, front cap toward +x
        Capsule2::from_center(Vec2::zeros(), Vec2::new(1.0, 0.0), 0.31, 0.375).unwrap()
    }

    fn config() -> RepulsionConfig {
        RepulsionConfig {
            human_side_normal_base: [0.0, 1.0],
            ..Default::default()
        }
    }

    #[test]
    fn empty_annulus_gives_zero() {
        let out = repulsive_velocity(&capsule(), &[Vec2::new(2.0, 2.0)], &config(), 0.0);
        assert_eq!(out.v_xy, Vec2::zeros());
        assert!(out.min_clearance.is_none());
        assert!(!out.deactivated_by_obstacle);
    }

    #[test]
    fn obstacle_side_occupancy_deactivates() {
        let c = capsule();
        let near_human = Vec2::new(0.0, c.radius + 0.03);
        let near_obstacle = Vec2::new(0.0, -(c.radius + 0.04));
        let out = repulsive_velocity(&c, &[near_human, near_obstacle], &config(), 0.0);
        assert!(out.deactivated_by_obstacle);
        assert_eq!(out.v_xy, Vec2::zeros());
    }

    #[test]
    fn single_contact_point_pushes_away_at_full_gain() {
        let c = capsule();
        let cfg = config();
        // clearance exactly zero beside the segment middle on the +y side
        let p = Vec2::new(0.0, c.radius + cfg.r_s_m);
        let out = repulsive_velocity(&c, &[p], &cfg, 0.0);
        assert!((out.v_xy.norm() - cfg.a_k).abs() < 1e-12);
        // direction: away from the point, i.e. toward -y (base frame = world here)
        assert!(out.v_xy.y < 0.0);
        assert!(out.v_xy.x.abs() < 1e-12);
        assert_eq!(out.min_clearance, Some(0.0));
    }

    #[test]
    fn gain_decays_with_clearance() {
        let c = capsule();
        let cfg = config();
        let near = repulsive_velocity(
            &c,
            &[Vec2::new(0.0, c.radius + cfg.r_s_m + 0.01)],
            &cfg,
            0.0,
        );
        let far = repulsive_velocity(
            &c,
            &[Vec2::new(0.0, c.radius + cfg.r_s_m + 0.08)],
            &cfg,
            0.0,
        );
        assert!(near.v_xy.norm() > far.v_xy.norm());
        assert!(far.v_xy.norm() > 0.0);
        assert!(near.v_xy.norm() <= cfg.a_k + 1e-12);
    }

    #[test]
    fn output_is_expressed_in_base_frame() {
        let c = capsule();
        let cfg = config();
        let yaw = 0.0;
        let base_out = repulsive_velocity(&c, &[Vec2::new(0.0, c.radius + cfg.r_s_m)], &cfg, yaw);

        // rotate the whole scene by 90°: same base-frame result
        let yaw = std::f64::consts::FRAC_PI_2;
        let c_rot = Capsule2::from_center(Vec2::zeros(), Vec2::new(0.0, 1.0), 0.31, 0.375).unwrap();
        let p_rot = rotate(&Vec2::new(0.0, c.radius + cfg.r_s_m), yaw);
        let rot_out = repulsive_velocity(&c_rot, &[p_rot], &cfg, yaw);
        assert!((base_out.v_xy - rot_out.v_xy).norm() < 1e-12);
    }

    #[test]
    fn on_axis_points_are_skipped_not_fatal() {
        let c = capsule();
        let cfg = config();
        let out = repulsive_velocity(
            &c,
            &[c.center(), Vec2::new(0.0, c.radius + cfg.r_s_m + 0.02)],
            &cfg,
            0.0,
        );
        assert_eq!(out.skipped_on_axis, 1);
        assert!(out.v_xy.norm() > 0.0);
    }
}
