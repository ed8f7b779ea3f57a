//! Damped least-squares inversion with task and joint weighting.

use super::KinematicsError;
use nalgebra::{DMatrix, DVector, Vector6};

/// Task weights, joint damping and pose-error gain for the DLS solve.
#[derive(Debug, Clone)]
pub struct IkWeights {
    /// Task-space weight diagonal `W_x` (6).
    pub w_x: Vector6<f64>,
    /// Joint damping diagonal `W_q` (3 + n).
    pub w_q: DVector<f64>,
    /// Pose-error feedback gain diagonal `K_x` (6).
    pub k_x: Vector6<f64>,
}

impl IkWeights {
    fn defaults(w_base: f64, arm_dof: usize) -> Self {
        let mut w_q = DVector::from_element(3 + arm_dof, 1.0);
        for i in 0..3 {
            w_q[i] = w_base;
        }
        Self {
            w_x: Vector6::from_element(1e3),
            w_q,
            k_x: Vector6::new(0.01, 0.01, 0.01, 0.004, 0.004, 0.004),
        }
    }

    /// Manipulation profile: heavy damping on the base joints suppresses
    /// platform motion in favor of the arm.
    pub fn arm_priority(arm_dof: usize) -> Self {
        Self::defaults(1e4, arm_dof)
    }

    /// Locomotion profile: uniform damping lets the base carry the motion.
    pub fn base_priority(arm_dof: usize) -> Self {
        Self::defaults(1.0, arm_dof)
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        if self.w_x.iter().any(|&w| !(w.is_finite() && w > 0.0))
            || self.w_q.iter().any(|&w| !(w.is_finite() && w > 0.0))
        {
            return Err(KinematicsError::InvalidModel(
                "IK weights must be positive and finite".into(),
            ));
        }
        if self.k_x.iter().any(|&k| !(k.is_finite() && k >= 0.0)) {
            return Err(KinematicsError::InvalidModel(
                "pose-error gains must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Result of one DLS solve: joint velocities and the singularity-robust
/// inverse used to build the null-space projector.
#[derive(Debug, Clone)]
pub struct DlsSolution {
    pub q_dot: DVector<f64>,
    /// `J* = (JᵀW_x J + W_q)⁻¹ JᵀW_x`, shape (3+n) × 6.
    pub j_star: DMatrix<f64>,
}

/// Solve `q̇_p = J* (v − K_x x_e)` via a symmetric positive-definite
/// factorization of the weighted normal matrix.
pub fn dls_solve(
    j: &DMatrix<f64>,
    weights: &IkWeights,
    v: &Vector6<f64>,
    x_e: &Vector6<f64>,
) -> Result<DlsSolution, KinematicsError> {
    let dof = j.ncols();
    if j.iter().any(|x| !x.is_finite())
        || v.iter().any(|x| !x.is_finite())
        || x_e.iter().any(|x| !x.is_finite())
    {
        return Err(KinematicsError::NonFinite("dls_solve input"));
    }
    weights.validate()?;
    if weights.w_q.len() != dof {
        return Err(KinematicsError::InvalidModel(format!(
            "W_q has {} entries for a {dof}-dof chain",
            weights.w_q.len()
        )));
    }

    // JᵀW_x as a scaled transpose (W_x diagonal)
    let mut jt_wx = j.transpose();
    for col in 0..6 {
        let w = weights.w_x[col];
        for row in 0..dof {
            jt_wx[(row, col)] *= w;
        }
    }
    let mut normal = &jt_wx * j;
    for i in 0..dof {
        normal[(i, i)] += weights.w_q[i];
    }
    let chol = normal.cholesky().ok_or(KinematicsError::Singular)?;
    let j_star = chol.solve(&jt_wx);
    let cmd = v - weights.k_x.component_mul(x_e);
    let q_dot = &j_star * cmd;
    Ok(DlsSolution { q_dot, j_star })
}

/// Total commanded joint velocity `q̇_c = q̇_p + (I − J*J) v_r`.
pub fn null_space_command(
    q_dot_p: &DVector<f64>,
    j_star: &DMatrix<f64>,
    j: &DMatrix<f64>,
    v_r: &DVector<f64>,
) -> DVector<f64> {
    q_dot_p + v_r - j_star * (j * v_r)
}
