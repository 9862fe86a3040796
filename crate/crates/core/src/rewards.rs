//! Motivational gate and the per-agent reward model.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::gridworld::{Action, Cell, GridMap, TransitionOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotivationParams {
    /// Battery-deficit weight.
    pub xi1: f64,
    /// Elapsed-time weight.
    pub xi2: f64,
    pub b_max: f64,
    pub t_max: f64,
    /// Strength of the motivational cost in the TD errors.
    pub phi: f64,
    /// Battery drained by a move action.
    pub move_cost: f64,
    /// Battery drained by hovering.
    pub hover_cost: f64,
}

impl MotivationParams {
    /// Table defaults with both normalizers set to the episode step budget.
    pub fn for_budget(n_steps: usize) -> Self {
        MotivationParams {
            xi1: 0.4,
            xi2: 0.4,
            b_max: n_steps as f64,
            t_max: n_steps as f64,
            phi: 0.6,
            move_cost: 1.0,
            hover_cost: 0.5,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.xi1 >= 0.0 && self.xi2 >= 0.0 && self.phi >= 0.0) {
            return Err(ConfigError::Invalid(
                "motivation: xi1, xi2 and phi must be non-negative".into(),
            ));
        }
        if !(self.b_max > 0.0 && self.t_max > 0.0) {
            return Err(ConfigError::Invalid(
                "motivation: b_max and t_max must be positive".into(),
            ));
        }
        if !(self.move_cost >= 0.0 && self.hover_cost >= 0.0) {
            return Err(ConfigError::Invalid(
                "motivation: energy costs must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn energy_cost(&self, a: Action) -> f64 {
        if a.is_move() {
            self.move_cost
        } else {
            self.hover_cost
        }
    }
}

/// `xi1 (1 - b/b_max) + xi2 (tau/t_max)`, with both ratios clamped to [0, 1].
pub fn motivation(params: &MotivationParams, battery: f64, elapsed: f64) -> f64 {
    let b = (battery / params.b_max).clamp(0.0, 1.0);
    let tau = (elapsed / params.t_max).clamp(0.0, 1.0);
    params.xi1 * (1.0 - b) + params.xi2 * tau
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateRewardMode {
    /// Every NLOS-to-gate transition pays the cue reward.
    PerTransition,
    /// Only the first NLOS-to-gate transition of each agent per episode pays.
    OncePerEpisode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    pub lambda_col: f64,
    pub r_goal: f64,
    /// Magnitude of the Pavlovian cue rewards.
    pub r_cue: f64,
    /// Minimum agent-target separation, meters.
    pub d_safe: f64,
    pub gate_mode: GateRewardMode,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            lambda_col: 1.2,
            r_goal: 100.0,
            r_cue: 8.0,
            d_safe: 1.0,
            gate_mode: GateRewardMode::OncePerEpisode,
        }
    }
}

impl RewardParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.lambda_col >= 0.0
            && self.r_goal >= 0.0
            && self.r_cue >= 0.0
            && self.d_safe >= 0.0)
        {
            return Err(ConfigError::Invalid(
                "rewards: all constants must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub rssi: f64,
    pub risk: f64,
    pub gate: f64,
    pub gps_denied: f64,
    pub goal: f64,
    pub total: f64,
}

impl RewardBreakdown {
    pub fn new(rssi: f64, risk: f64, gate: f64, gps_denied: f64, goal: f64) -> Self {
        RewardBreakdown {
            rssi,
            risk,
            gate,
            gps_denied,
            goal,
            total: rssi + risk + gate + gps_denied + goal,
        }
    }

    pub fn instrumental(&self) -> f64 {
        self.rssi + self.risk
    }

    pub fn pavlovian(&self) -> f64 {
        self.gate + self.gps_denied
    }

    /// Largest deviation of `total` from the sum of its parts.
    pub fn sum_residual(&self) -> f64 {
        (self.total - (self.rssi + self.risk + self.gate + self.gps_denied + self.goal)).abs()
    }
}

impl AddAssign for RewardBreakdown {
    fn add_assign(&mut self, o: RewardBreakdown) {
        self.rssi += o.rssi;
        self.risk += o.risk;
        self.gate += o.gate;
        self.gps_denied += o.gps_denied;
        self.goal += o.goal;
        self.total += o.total;
    }
}

pub fn risk_reward(params: &RewardParams, outcome: &TransitionOutcome) -> f64 {
    if outcome.collided {
        -params.lambda_col
    } else {
        0.0
    }
}

/// Cue rewards `(r_gate, r_gd)` for the transition `s -> s_next`.
pub fn pavlovian_reward(params: &RewardParams, s: Cell, s_next: Cell, map: &GridMap) -> (f64, f64) {
    let gate = if !map.is_los(s) && map.is_gate(s_next) {
        params.r_cue.abs()
    } else {
        0.0
    };
    let gd = if map.is_gps_denied(s_next) {
        -params.r_cue.abs()
    } else {
        0.0
    };
    (gate, gd)
}

pub fn total_reward(
    r_rssi: f64,
    outcome: &TransitionOutcome,
    (r_gate, r_gd): (f64, f64),
    goal_hit: bool,
    params: &RewardParams,
) -> RewardBreakdown {
    let goal = if goal_hit { params.r_goal } else { 0.0 };
    RewardBreakdown::new(r_rssi, risk_reward(params, outcome), r_gate, r_gd, goal)
}

/// Reward fed to every TD error: `r - phi * M`.
pub fn effective_reward(r_total: f64, m: f64, phi: f64) -> f64 {
    r_total - phi * m
}
