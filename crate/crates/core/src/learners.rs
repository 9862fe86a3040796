//! Tabular instrumental Q-learning, Pavlovian state values, cue modulation
//! and the temperature-modulated softmax policy.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::gridworld::{Action, Cell, GridMap};

pub type ActionValues = [f64; Action::COUNT];

/// `|S| x |A|` action values, zero-initialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    n_states: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(n_states: usize) -> Self {
        QTable {
            n_states,
            values: vec![0.0; n_states * Action::COUNT],
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn get(&self, s: usize, a: Action) -> f64 {
        self.values[s * Action::COUNT + a.index()]
    }

    pub fn set(&mut self, s: usize, a: Action, v: f64) {
        self.values[s * Action::COUNT + a.index()] = v;
    }

    pub fn row(&self, s: usize) -> ActionValues {
        let start = s * Action::COUNT;
        self.values[start..start + Action::COUNT]
            .try_into()
            .expect("row has one value per action")
    }

    pub fn max(&self, s: usize) -> f64 {
        self.row(s).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Pavlovian state values, zero-initialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VTable {
    values: Vec<f64>,
}

impl VTable {
    pub fn new(n_states: usize) -> Self {
        VTable {
            values: vec![0.0; n_states],
        }
    }

    pub fn get(&self, s: usize) -> f64 {
        self.values[s]
    }

    pub fn set(&mut self, s: usize, v: f64) {
        self.values[s] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Exponentially decaying per-episode value with a floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub initial: f64,
    pub decay: f64,
    pub floor: f64,
}

impl Schedule {
    pub fn at(&self, episode: usize) -> f64 {
        schedule_value(self.initial, self.decay, self.floor, episode)
    }

    pub fn constant(v: f64) -> Self {
        Schedule {
            initial: v,
            decay: 1.0,
            floor: v,
        }
    }
}

pub fn schedule_value(initial: f64, decay: f64, floor: f64, episode: usize) -> f64 {
    let exp = i32::try_from(episode).unwrap_or(i32::MAX);
    (initial * decay.powi(exp)).max(floor)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnParams {
    /// Shared by the MF, MB and Pavlovian learners.
    pub alpha: Schedule,
    pub gamma: f64,
    /// Base softmax temperature.
    pub kappa: Schedule,
    /// Weight of the Pavlovian modulation in the action scores.
    pub beta: f64,
}

impl Default for LearnParams {
    fn default() -> Self {
        LearnParams {
            alpha: Schedule {
                initial: 0.55,
                decay: 0.9985,
                floor: 0.09,
            },
            gamma: 0.98,
            kappa: Schedule {
                initial: 1.2,
                decay: 0.996,
                floor: 0.03,
            },
            beta: 1.0,
        }
    }
}

impl LearnParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let a = self.alpha;
        if !(a.initial > 0.0 && a.initial <= 1.0 && a.floor > 0.0 && a.floor <= 1.0) {
            return Err(ConfigError::Invalid(
                "learn: alpha must lie in (0, 1]".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(ConfigError::Invalid(
                "learn: gamma must lie in [0, 1]".into(),
            ));
        }
        if !(self.kappa.initial > 0.0 && self.kappa.floor > 0.0) {
            return Err(ConfigError::Invalid("learn: kappa must be positive".into()));
        }
        if !(self.beta >= 0.0) {
            return Err(ConfigError::Invalid(
                "learn: beta must be non-negative".into(),
            ));
        }
        if !(a.decay > 0.0 && self.kappa.decay > 0.0) {
            return Err(ConfigError::Invalid(
                "learn: decay rates must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Index of the largest value, ties broken towards the lowest index.
pub fn argmax(values: &ActionValues) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// `r_eff + gamma * max_a' q(s_next, a') - q(s, a)`; a `None` successor is
/// terminal and does not bootstrap.
pub fn td_error_q(
    q: &QTable,
    s: usize,
    a: Action,
    s_next: Option<usize>,
    r_eff: f64,
    gamma: f64,
) -> f64 {
    let future = s_next.map_or(0.0, |n| gamma * q.max(n));
    r_eff + future - q.get(s, a)
}

pub fn q_update(q: &mut QTable, s: usize, a: Action, delta: f64, alpha: f64) {
    let v = q.get(s, a);
    q.set(s, a, v + alpha * delta);
}

/// Pavlovian TD step. Returns the TD error that was applied.
pub fn v_update(
    v: &mut VTable,
    s: usize,
    s_next: Option<usize>,
    r_eff: f64,
    alpha: f64,
    gamma: f64,
) -> f64 {
    let future = s_next.map_or(0.0, |n| gamma * v.get(n));
    let delta = r_eff + future - v.get(s);
    v.set(s, v.get(s) + alpha * delta);
    delta
}

/// Action-dependent cue bias: `+|V(s)|` for an NLOS state stepping into a
/// gate, `-|V(s)|` for a step into GPS-denied ground, zero otherwise.
pub fn g_a(v: &VTable, map: &GridMap, s: Cell, a: Action) -> f64 {
    let next = map.predicted_next(s, a);
    let mag = v.get(map.index(s)).abs();
    if !map.is_los(s) && map.is_gate(next) {
        mag
    } else if map.is_gps_denied(next) {
        -mag
    } else {
        0.0
    }
}

/// Action scores `q_eff(s, a) + beta * g_a(V, s, a)`.
pub fn policy_logits(
    q_eff: &ActionValues,
    v: &VTable,
    map: &GridMap,
    s: Cell,
    beta: f64,
) -> ActionValues {
    let mut out = *q_eff;
    for a in Action::ALL {
        out[a.index()] += beta * g_a(v, map, s, a);
    }
    out
}

/// Softmax temperature after motivational sharpening.
pub fn temperature(kappa0: f64, m: f64) -> f64 {
    kappa0 / (1.0 + m)
}

/// Boltzmann probabilities with a max shift.
pub fn softmax_probs(scores: &ActionValues, kappa: f64) -> ActionValues {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p = [0.0; Action::COUNT];
    let mut sum = 0.0;
    for (pi, &w) in p.iter_mut().zip(scores) {
        *pi = ((w - max) / kappa).exp();
        sum += *pi;
    }
    for pi in &mut p {
        *pi /= sum;
    }
    p
}

pub fn softmax_select<R: Rng + ?Sized>(
    scores: &ActionValues,
    kappa0: f64,
    m: f64,
    rng: &mut R,
) -> Action {
    let p = softmax_probs(scores, temperature(kappa0, m));
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return Action::ALL[i];
        }
    }
    // rounding left u above the final cumulative sum
    Action::ALL[p.iter().rposition(|&pi| pi > 0.0).unwrap_or(0)]
}
