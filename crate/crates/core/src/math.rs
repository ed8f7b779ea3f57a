//! Rotation and interpolation primitives shared by the controller stack.
//!
//! Everything here is plain value math: unit quaternions with the scalar
//! part first, exponential maps for integrating angular velocities, the
//! quintic smoothstep used by every soft threshold in the framework, and
//! the sign-canonicalized pose deviation between two poses.

use nalgebra::Vector3;

/// 3-vector of `f64`, units contextual (m, m/s, rad/s, N, Nm).
pub type Vec3 = Vector3<f64>;

/// Below this norm the exponential maps use their series limit to avoid 0/0.
const EXP_SERIES_EPS: f64 = 1e-8;

/// Unit-norm tolerance enforced on inputs that are contractually unit vectors.
const UNIT_INPUT_TOL: f64 = 1e-6;

/// Unit quaternion `(eta, eps)`, scalar part first.
///
/// State quaternions are renormalized on every integration step but are
/// deliberately *not* sign-canonicalized, so trajectories stay continuous.
/// Deviations computed by [`pose_deviation`] are canonicalized instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuat {
    eta: f64,
    eps: Vec3,
}

impl UnitQuat {
    /// Identity rotation.
    pub fn identity() -> Self {
        Self {
            eta: 1.0,
            eps: Vec3::zeros(),
        }
    }

    /// Build from raw parts, renormalizing to unit length.
    ///
    /// Panics if the parts are not finite or have (near-)zero norm.
    pub fn from_parts(eta: f64, eps: Vec3) -> Self {
        let norm = (eta * eta + eps.norm_squared()).sqrt();
        assert!(
            norm.is_finite() && norm > 1e-12,
            "quaternion parts must be finite with nonzero norm (got norm {norm})"
        );
        Self {
            eta: eta / norm,
            eps: eps / norm,
        }
    }

    /// Rebuild from parts that are already unit-norm (trace deserialization);
    /// skips renormalization so written values round-trip bit-exactly.
    pub(crate) fn from_parts_raw(eta: f64, eps: Vec3) -> Self {
        Self { eta, eps }
    }

    /// Rotation of `angle` radians about `axis` (normalized internally).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let n = axis.norm();
        if n < EXP_SERIES_EPS {
            return Self::identity();
        }
        let (s, c) = (0.5 * angle).sin_cos();
        Self {
            eta: c,
            eps: axis * (s / n),
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eps(&self) -> Vec3 {
        self.eps
    }

    /// Quaternion product `self ⊗ rhs`.
    pub fn mul(&self, rhs: &UnitQuat) -> UnitQuat {
        UnitQuat {
            eta: self.eta * rhs.eta - self.eps.dot(&rhs.eps),
            eps: rhs.eps * self.eta + self.eps * rhs.eta + self.eps.cross(&rhs.eps),
        }
    }

    /// Inverse rotation (conjugate for unit quaternions).
    pub fn inverse(&self) -> UnitQuat {
        UnitQuat {
            eta: self.eta,
            eps: -self.eps,
        }
    }

    /// Rotate a vector: `R(q) v`.
    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        // v' = v + 2 eps × (eps × v + eta v)
        let t = self.eps.cross(&(self.eps.cross(v) + v * self.eta));
        v + t * 2.0
    }

    /// Rotation angle in `[0, π]` ignoring quaternion sign.
    pub fn angle(&self) -> f64 {
        2.0 * self.eps.norm().atan2(self.eta.abs())
    }

    /// Rescale to unit norm (drift repair after integration).
    pub fn renormalized(&self) -> UnitQuat {
        Self::from_parts(self.eta, self.eps)
    }

    /// `|‖q‖ − 1|`, for invariant checks.
    pub fn norm_error(&self) -> f64 {
        ((self.eta * self.eta + self.eps.norm_squared()).sqrt() - 1.0).abs()
    }
}

/// Position and orientation deviation between a goal pose and a current pose.
///
/// The quaternion deviation `Q_e = Q_g ⊗ Q⁻¹` is sign-canonicalized so that
/// `eta_e ≥ 0`, which keeps the equivalent deviation angle in `(−π, π)`.
#[derive(Debug, Clone, Copy)]
pub struct PoseDeviation {
    /// Position deviation `p_g − p` (m).
    pub p_e: Vec3,
    /// Canonicalized orientation deviation `Q_g ⊗ Q⁻¹`.
    pub q_e: UnitQuat,
}

impl PoseDeviation {
    /// Identity deviation (coincident poses).
    pub fn zero() -> Self {
        Self {
            p_e: Vec3::zeros(),
            q_e: UnitQuat::identity(),
        }
    }

    /// Scalar part of the deviation quaternion, `cos(φ_e/2) ≥ 0`.
    pub fn eta_e(&self) -> f64 {
        self.q_e.eta()
    }

    /// Vector part of the deviation quaternion, `sin(φ_e/2)·axis`.
    pub fn eps_e(&self) -> Vec3 {
        self.q_e.eps()
    }

    /// `Ψ_e = 1 − η_e ∈ [0, 1]`, the orientation mismatch used by the
    /// storage function.
    pub fn psi_e(&self) -> f64 {
        1.0 - self.q_e.eta()
    }

    /// `R_eᵀ ε_e`, the deviation vector part seen from the current frame.
    ///
    /// Since `ε_e` lies along the rotation axis of `R_e` this equals `ε_e`
    /// up to rounding; it is kept literal so the stiffness term reads the
    /// same as its definition.
    pub fn eps_body(&self) -> Vec3 {
        self.q_e.inverse().rotate(&self.q_e.eps())
    }
}

/// Quintic smoothstep `h(w; lo, hi)`: 1 below `lo`, 0 above `hi`, and the
/// C² interpolant `1 − 6c⁵ + 15c⁴ − 10c³` with `c = (w−lo)/(hi−lo)` between.
///
/// Panics if `lo ≥ hi`.
pub fn smooth_step(w: f64, lo: f64, hi: f64) -> f64 {
    assert!(
        lo < hi,
        "smooth_step requires lo < hi (got lo={lo}, hi={hi})"
    );
    if w < lo {
        1.0
    } else if w > hi {
        0.0
    } else {
        let c = (w - lo) / (hi - lo);
        let c3 = c * c * c;
        1.0 - 6.0 * c3 * c * c + 15.0 * c3 * c - 10.0 * c3
    }
}

/// Angle between two vectors in `[0, π]`, defined as 0 when both the dot
/// product and the cross-product norm vanish (covers zero arguments).
pub fn angle_between(n: &Vec3, nd: &Vec3) -> f64 {
    let dot = n.dot(nd);
    let cross = n.cross(nd).norm();
    if dot == 0.0 && cross == 0.0 {
        0.0
    } else {
        cross.atan2(dot)
    }
}

/// Exponential map ℝ³ → 𝕊³: `v ↦ (cos‖v‖, sin‖v‖ · v/‖v‖)`.
pub fn quat_exp(v: Vec3) -> UnitQuat {
    let theta = v.norm();
    if theta < EXP_SERIES_EPS {
        // sin θ / θ → 1; the constructor renormalizes.
        UnitQuat::from_parts(1.0, v)
    } else {
        UnitQuat {
            eta: theta.cos(),
            eps: v * (theta.sin() / theta),
        }
    }
}

/// One integration step of a unit quaternion under angular velocity `omega`
/// (rad/s, same frame as the quaternion): `exp_Q(½ ω T_c) ⊗ Q`, renormalized.
///
/// Panics if `tc ≤ 0`.
pub fn quat_integrate(q: &UnitQuat, omega: &Vec3, tc: f64) -> UnitQuat {
    assert!(
        tc > 0.0,
        "quat_integrate requires a positive step (got {tc})"
    );
    quat_exp(omega * (0.5 * tc)).mul(q).renormalized()
}

/// Rodrigues rotation of `v` by the axis-angle vector `phi` (exp_R(phi) v).
pub fn rotate_vector(phi: &Vec3, v: &Vec3) -> Vec3 {
    let theta = phi.norm();
    if theta < EXP_SERIES_EPS {
        return v + phi.cross(v);
    }
    let k = phi / theta;
    let (s, c) = theta.sin_cos();
    v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c))
}

/// Rotate a unit vector by the axis-angle vector `phi` and renormalize.
///
/// Panics if the input is not unit length within 1e-6.
pub fn unit_vector_rotate(n: &Vec3, phi: &Vec3) -> Vec3 {
    assert!(
        (n.norm() - 1.0).abs() <= UNIT_INPUT_TOL,
        "unit_vector_rotate requires a unit input (norm {})",
        n.norm()
    );
    rotate_vector(phi, n).normalize()
}

/// Deviation of the pose `(p, Q)` from the goal pose `(p_g, Q_g)`:
/// `p_e = p_g − p` and `Q_e = Q_g ⊗ Q⁻¹` with `η_e` forced non-negative.
pub fn pose_deviation(p_g: &Vec3, q_g: &UnitQuat, p: &Vec3, q: &UnitQuat) -> PoseDeviation {
    let mut q_e = q_g.mul(&q.inverse());
    if q_e.eta < 0.0 {
        q_e.eta = -q_e.eta;
        q_e.eps = -q_e.eps;
    }
    PoseDeviation { p_e: p_g - p, q_e }
}
