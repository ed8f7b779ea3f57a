//! Joint angle extraction from skeleton keypoints.
//!
//! Shoulder angles are measured against the trunk planes, the elbow angle
//! is the interior angle of the upper-arm/forearm pair, and trunk bending
//! is the knee–pelvis–neck angle. Whenever a vector norm involved in a
//! division is (near-)zero the corresponding component keeps its previous
//! value and a degeneracy flag is raised.

use super::{BodyPlanes, JointAngles, Side, SkeletonKeypoints};

/// Norm below which an intermediate vector counts as degenerate.
const DEGENERATE_NORM: f64 = 1e-9;

/// Minimum neck-to-shoulder distance for a valid trunk frame.
const MIN_SHOULDER_OFFSET: f64 = 1e-6;

/// Per-component degeneracy diagnostics for one sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DegeneracyFlags {
    /// Trunk frame (planes) could not be computed from this sample.
    pub frame: bool,
    pub abduction: bool,
    pub flexion: bool,
    pub rotation: bool,
    pub elbow: bool,
    pub bending: bool,
}

impl DegeneracyFlags {
    pub fn any(&self) -> bool {
        self.frame || self.abduction || self.flexion || self.rotation || self.elbow || self.bending
    }

    fn merge(&mut self, other: &DegeneracyFlags) {
        self.frame |= other.frame;
        self.abduction |= other.abduction;
        self.flexion |= other.flexion;
        self.rotation |= other.rotation;
        self.elbow |= other.elbow;
        self.bending |= other.bending;
    }
}

/// Sign convention used by the branch selectors: zero maps to +1.
fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn acos_clamped(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).acos()
}

/// Trunk plane normals from the tracked-side shoulder, neck and thorax:
/// `frontal = normalize((Ne→S) × (Ne→Th))`, `sagittal = normalize(Ne→S)`.
///
/// Returns `None` when the shoulder offset or the cross product degenerate
/// (collinear neck/shoulder/thorax); callers keep the previous planes.
pub fn compute_planes(kp: &SkeletonKeypoints) -> Option<BodyPlanes> {
    let ne_s = kp.shoulder() - kp.neck;
    if ne_s.norm() <= MIN_SHOULDER_OFFSET {
        return None;
    }
    let ne_th = kp.thorax - kp.neck;
    let cross = ne_s.cross(&ne_th);
    if cross.norm() <= DEGENERATE_NORM {
        return None;
    }
    Some(BodyPlanes {
        frontal: cross.normalize(),
        sagittal: ne_s.normalize(),
    })
}

/// Compute all five joint angles against the supplied trunk planes,
/// falling back component-wise to `prev` on degenerate geometry.
pub fn compute_joint_angles_with_planes(
    kp: &SkeletonKeypoints,
    planes: &BodyPlanes,
    prev: &JointAngles,
) -> (JointAngles, DegeneracyFlags) {
    let mut out = *prev;
    let mut flags = DegeneracyFlags::default();
    let f = planes.frontal;
    let s = planes.sagittal;

    let shoulder = kp.shoulder();
    let se = kp.elbow() - shoulder;

    // Shoulder abduction/adduction: angle of S→E projected into the
    // coronal plane, measured from the trunk-down direction.
    let se_proj = se - f * f.dot(&se);
    if se_proj.norm() <= DEGENERATE_NORM {
        flags.abduction = true;
    } else {
        let cos_term = acos_clamped(-se_proj.dot(&s) / se_proj.norm());
        let r_a = sign(f.dot(&s.cross(&se_proj)));
        out.abduction = if r_a < 0.0 && se_proj.dot(&s) > 0.0 {
            -cos_term + 1.5 * std::f64::consts::PI
        } else {
            r_a * cos_term - std::f64::consts::FRAC_PI_2
        };
    }

    // Shoulder flexion/extension: angle between the frontal normal and the
    // normal of the neck/shoulder/elbow triangle.
    let ne_s = shoulder - kp.neck;
    let ne_e = kp.elbow() - kp.neck;
    let u_raw = ne_s.cross(&ne_e);
    let u = if u_raw.norm() <= DEGENERATE_NORM {
        flags.flexion = true;
        // rotation needs u as well
        flags.rotation = true;
        None
    } else {
        Some(u_raw.normalize())
    };
    if let Some(u) = u {
        let r_f = match kp.side {
            Side::Right => sign(s.dot(&f.cross(&u))),
            Side::Left => sign(-s.dot(&f.cross(&u))),
        };
        out.flexion = r_f * acos_clamped(f.dot(&u));
    }

    // Shoulder internal/external rotation: angle between the arm-triangle
    // normals u and v.
    let es = shoulder - kp.elbow();
    let ew = kp.wrist() - kp.elbow();
    if let Some(u) = u {
        let v_raw = es.cross(&ew);
        if v_raw.norm() <= DEGENERATE_NORM {
            flags.rotation = true;
        } else {
            let v = v_raw.normalize();
            let uv = u.dot(&v).clamp(-1.0, 1.0);
            let r_l = match kp.side {
                Side::Right => sign(es.dot(&u.cross(&v))),
                Side::Left => sign(es.dot(&v.cross(&u))),
            };
            out.rotation = if r_l < 0.0 && uv < 0.0 {
                -uv.acos() + 1.5 * std::f64::consts::PI
            } else {
                r_l * uv.acos() - std::f64::consts::FRAC_PI_2
            };
        }
    }

    // Elbow flexion/extension: interior angle between forearm and upper arm.
    if ew.norm() <= DEGENERATE_NORM || es.norm() <= DEGENERATE_NORM {
        flags.elbow = true;
    } else {
        out.elbow = acos_clamped(ew.dot(&es) / (ew.norm() * es.norm()));
    }

    // Sagittal bending: knee–pelvis–neck angle, signed by the right
    // shoulder side of the trunk plane.
    let kn_pl = kp.pelvis - kp.knee;
    let pl_ne = kp.neck - kp.pelvis;
    if kn_pl.norm() <= DEGENERATE_NORM || pl_ne.norm() <= DEGENERATE_NORM {
        flags.bending = true;
    } else {
        let r_b = sign((kp.shoulder_r - kp.neck).dot(&pl_ne.cross(&kn_pl)));
        out.bending = r_b * acos_clamped(kn_pl.dot(&pl_ne) / (kn_pl.norm() * pl_ne.norm()));
    }

    (out, flags)
}

/// One-shot angle computation: derives the trunk planes from the sample
/// itself and falls back to `prev` wherever the geometry degenerates.
pub fn compute_joint_angles(
    kp: &SkeletonKeypoints,
    prev: &JointAngles,
) -> (JointAngles, DegeneracyFlags) {
    match compute_planes(kp) {
        Some(planes) => compute_joint_angles_with_planes(kp, &planes, prev),
        None => {
            // Without a trunk frame only the frame-free angles can update.
            let mut flags = DegeneracyFlags {
                frame: true,
                abduction: true,
                flexion: true,
                rotation: true,
                ..Default::default()
            };
            let mut out = *prev;
            let es = kp.shoulder() - kp.elbow();
            let ew = kp.wrist() - kp.elbow();
            if ew.norm() <= DEGENERATE_NORM || es.norm() <= DEGENERATE_NORM {
                flags.elbow = true;
            } else {
                out.elbow = acos_clamped(ew.dot(&es) / (ew.norm() * es.norm()));
            }
            let kn_pl = kp.pelvis - kp.knee;
            let pl_ne = kp.neck - kp.pelvis;
            if kn_pl.norm() <= DEGENERATE_NORM || pl_ne.norm() <= DEGENERATE_NORM {
                flags.bending = true;
            } else {
                let r_b = sign((kp.shoulder_r - kp.neck).dot(&pl_ne.cross(&kn_pl)));
                out.bending = r_b * acos_clamped(kn_pl.dot(&pl_ne) / (kn_pl.norm() * pl_ne.norm()));
            }
            (out, flags)
        }
    }
}

/// Caller-owned tracking state: remembers the last valid trunk planes and
/// the last angle vector so degenerate samples degrade gracefully.
///
/// Starts from [`JointAngles::neutral`]; the first sample is flagged if it
/// cannot be fully measured.
#[derive(Debug, Clone)]
pub struct AngleTracker {
    planes: Option<BodyPlanes>,
    angles: JointAngles,
}

impl Default for AngleTracker {
    fn default() -> Self {
        Self::new()
    }
}

impl AngleTracker {
    pub fn new() -> Self {
        Self {
            planes: None,
            angles: JointAngles::neutral(),
        }
    }

    /// Last angle vector (neutral before the first update).
    pub fn angles(&self) -> JointAngles {
        self.angles
    }

    /// Ingest one keypoint sample and return the updated angles plus the
    /// degeneracy diagnostics for this sample.
    pub fn update(&mut self, kp: &SkeletonKeypoints) -> (JointAngles, DegeneracyFlags) {
        let mut flags = DegeneracyFlags::default();
        match compute_planes(kp) {
            Some(p) => self.planes = Some(p),
            None => flags.frame = true,
        }
        let (angles, comp_flags) = match &self.planes {
            // Degenerate frames reuse the previously computed planes.
            Some(planes) => compute_joint_angles_with_planes(kp, planes, &self.angles),
            None => compute_joint_angles(kp, &self.angles),
        };
        flags.merge(&comp_flags);
        self.angles = angles;
        (angles, flags)
    }
}
