//! Closest-point queries on a 2D capsule (the platform's collision proxy).

use super::KinematicsError;
use nalgebra::Vector2;

pub type Vec2 = Vector2<f64>;

/// 2D capsule: the segment from `front` along `dir` of length `length`,
/// swept by a disc of `radius`.
#[derive(Debug, Clone, Copy)]
pub struct Capsule2 {
    pub front: Vec2,
    pub dir: Vec2,
    pub length: f64,
    pub radius: f64,
}

impl Capsule2 {
    pub fn new(front: Vec2, dir: Vec2, length: f64, radius: f64) -> Result<Self, KinematicsError> {
        if !(length > 0.0 && radius > 0.0 && length.is_finite() && radius.is_finite()) {
            return Err(KinematicsError::InvalidModel(
                "capsule length and radius must be positive".into(),
            ));
        }
        if (dir.norm() - 1.0).abs() > 1e-9 {
            return Err(KinematicsError::InvalidModel(
                "capsule direction must be unit".into(),
            ));
        }
        Ok(Self {
            front,
            dir,
            length,
            radius,
        })
    }

    /// Capsule centered on `center` with its front cap toward `heading`
    /// (unit); the axis direction points rearward per the axis
    /// parameterization `p(σ) = front + dir·L·σ`.
    pub fn from_center(
        center: Vec2,
        heading: Vec2,
        length: f64,
        radius: f64,
    ) -> Result<Self, KinematicsError> {
        Self::new(center + heading * (0.5 * length), -heading, length, radius)
    }

    pub fn center(&self) -> Vec2 {
        self.front + self.dir * (0.5 * self.length)
    }
}

/// Result of a capsule closest-point query.
#[derive(Debug, Clone, Copy)]
pub struct CapsuleQuery {
    /// Nearest point on the capsule axis segment.
    pub axis_point: Vec2,
    /// Nearest point on the capsule perimeter.
    pub perimeter_point: Vec2,
    /// Signed clearance `d = ‖p − p*‖ − (r_c + r_s)` beyond the inflated
    /// surface (negative inside).
    pub clearance: f64,
}

/// Closest axis and perimeter points for `point`, with the clearance after
/// inflating the capsule by `r_s`.
///
/// Errors with [`KinematicsError::OnAxis`] when the point lies on the axis
/// segment itself (the perimeter direction is undefined there).
pub fn capsule_closest(
    capsule: &Capsule2,
    point: &Vec2,
    r_s: f64,
) -> Result<CapsuleQuery, KinematicsError> {
    let zeta = capsule.dir.dot(&(point - capsule.front)) / capsule.length;
    let sigma = zeta.clamp(0.0, 1.0);
    let axis_point = capsule.front + capsule.dir * (capsule.length * sigma);
    let offset = point - axis_point;
    let dist = offset.norm();
    if dist <= 1e-9 {
        return Err(KinematicsError::OnAxis);
    }
    Ok(CapsuleQuery {
        axis_point,
        perimeter_point: axis_point + offset * (capsule.radius / dist),
        clearance: dist - (capsule.radius + r_s),
    })
}
