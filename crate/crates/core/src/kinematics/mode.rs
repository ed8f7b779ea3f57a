//! Arm/base prioritization modes and the ergonomic switching gate.

use super::dls::IkWeights;
use crate::fixture::FixtureParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    ArmPriority,
    BasePriority,
}

/// Mode bookkeeping: switching into base prioritization is granted only
/// while the posture score is at or above `a_th`; the request stays
/// pending and is retried every tick until then. Switching back to arm
/// prioritization is always granted. The baseline variant bypasses the
/// gate entirely.
#[derive(Debug, Clone, Copy)]
pub struct ModeState {
    pub mode: Mode,
    pub a_th: f64,
    pub pending_switch: bool,
    pub bypass_gate: bool,
}

impl ModeState {
    pub fn new(a_th: f64) -> Self {
        Self {
            mode: Mode::ArmPriority,
            a_th,
            pending_switch: false,
            bypass_gate: false,
        }
    }
}

/// Apply the requested mode for this tick. Returns true when the active
/// mode changed.
pub fn mode_update(state: &mut ModeState, requested: Mode, a: f64) -> bool {
    if requested == state.mode {
        state.pending_switch = false;
        return false;
    }
    match requested {
        Mode::ArmPriority => {
            state.mode = Mode::ArmPriority;
            state.pending_switch = false;
            true
        }
        Mode::BasePriority => {
            if state.bypass_gate || a >= state.a_th {
                state.mode = Mode::BasePriority;
                state.pending_switch = false;
                true
            } else {
                state.pending_switch = true;
                false
            }
        }
    }
}

/// The two parameter profiles selected by the active mode.
#[derive(Debug, Clone)]
pub struct ModeProfiles {
    pub arm_fixture: FixtureParams,
    pub base_fixture: FixtureParams,
    pub arm_weights: IkWeights,
    pub base_weights: IkWeights,
}

impl ModeProfiles {
    pub fn defaults(arm_dof: usize) -> Self {
        Self {
            arm_fixture: FixtureParams::arm(),
            base_fixture: FixtureParams::base(),
            arm_weights: IkWeights::arm_priority(arm_dof),
            base_weights: IkWeights::base_priority(arm_dof),
        }
    }

    pub fn fixture_for(&self, mode: Mode) -> &FixtureParams {
        match mode {
            Mode::ArmPriority => &self.arm_fixture,
            Mode::BasePriority => &self.base_fixture,
        }
    }

    pub fn weights_for(&self, mode: Mode) -> &IkWeights {
        match mode {
            Mode::ArmPriority => &self.arm_weights,
            Mode::BasePriority => &self.base_weights,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_request_below_threshold_stays_pending() {
        let mut st = ModeState::new(0.5);
        assert!(!mode_update(&mut st, Mode::BasePriority, 0.3));
        assert_eq!(st.mode, Mode::ArmPriority);
        assert!(st.pending_switch);
        // retried and granted once the score clears the gate
        assert!(mode_update(&mut st, Mode::BasePriority, 0.7));
        assert_eq!(st.mode, Mode::BasePriority);
        assert!(!st.pending_switch);
    }

    #[test]
    fn threshold_is_inclusive() {
        let mut st = ModeState::new(0.5);
        assert!(mode_update(&mut st, Mode::BasePriority, 0.5));
        assert_eq!(st.mode, Mode::BasePriority);
    }

    #[test]
    fn arm_request_always_granted() {
        let mut st = ModeState::new(0.5);
        mode_update(&mut st, Mode::BasePriority, 1.0);
        assert_eq!(st.mode, Mode::BasePriority);
        assert!(mode_update(&mut st, Mode::ArmPriority, 0.0));
        assert_eq!(st.mode, Mode::ArmPriority);
    }

    #[test]
    fn bypass_ignores_the_gate() {
        let mut st = ModeState::new(0.5);
        st.bypass_gate = true;
        assert!(mode_update(&mut st, Mode::BasePriority, 0.0));
        assert_eq!(st.mode, Mode::BasePriority);
    }

    #[test]
    fn base_profile_disables_posture_stiffness() {
        let profiles = ModeProfiles::defaults(6);
        let base = profiles.fixture_for(Mode::BasePriority);
        assert_eq!(base.k_p_n_per_m, 0.0);
        assert_eq!(base.k_o_nm, 0.0);
        assert_eq!(base.c_p, 0.0);
        assert_eq!(base.c_o, 0.0);
        assert_eq!(base.inertia_lin_kg, 15.0);
        assert_eq!(base.damping_lin_ns_per_m, 40.0);
        let arm_w = profiles.weights_for(Mode::ArmPriority);
        assert_eq!(arm_w.w_q[0], 1e4);
        assert_eq!(arm_w.w_q[3], 1.0);
        let base_w = profiles.weights_for(Mode::BasePriority);
        assert_eq!(base_w.w_q[0], 1.0);
    }
}
