//! Dyna-Q transition memory and planning, prediction errors, Dirichlet
//! reliability tracking and the MB/MF arbitration blend.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::gridworld::{manhattan, Action, Cell};
use crate::learners::{q_update, td_error_q, ActionValues, QTable};

/// Last observed outcome of a state-action pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub next_state: usize,
    pub next_cell: Cell,
    pub reward: f64,
    /// Global step at which the transition was last seen.
    pub last_seen: u64,
    /// The transition ended the episode.
    pub terminal: bool,
}

/// Deterministic tabular model plus the per-episode list of visited pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionModel {
    entries: Vec<Option<ModelEntry>>,
    visited: Vec<(usize, Action)>,
    in_visited: Vec<bool>,
}

impl TransitionModel {
    pub fn new(n_states: usize) -> Self {
        TransitionModel {
            entries: vec![None; n_states * Action::COUNT],
            visited: Vec::new(),
            in_visited: vec![false; n_states * Action::COUNT],
        }
    }

    fn slot(s: usize, a: Action) -> usize {
        s * Action::COUNT + a.index()
    }

    pub fn entry(&self, s: usize, a: Action) -> Option<&ModelEntry> {
        self.entries[Self::slot(s, a)].as_ref()
    }

    pub fn visited(&self) -> &[(usize, Action)] {
        &self.visited
    }

    pub fn n_entries(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    /// Clears the visited list; stored transitions are kept.
    pub fn start_episode(&mut self) {
        for &(s, a) in &self.visited {
            self.in_visited[Self::slot(s, a)] = false;
        }
        self.visited.clear();
    }

    pub fn record_transition(&mut self, s: usize, a: Action, entry: ModelEntry) {
        let i = Self::slot(s, a);
        self.entries[i] = Some(entry);
        if !self.in_visited[i] {
            self.in_visited[i] = true;
            self.visited.push((s, a));
        }
    }
}

/// Runs `k` Dyna-Q planning updates on `q_mb`, each replaying a pair drawn
/// uniformly from the visited list. Returns the number of updates applied.
pub fn plan<R: Rng + ?Sized>(
    model: &TransitionModel,
    q_mb: &mut QTable,
    k: usize,
    alpha: f64,
    gamma: f64,
    rng: &mut R,
) -> usize {
    let visited = model.visited();
    if visited.is_empty() {
        return 0;
    }
    let mut applied = 0;
    for _ in 0..k {
        let (s, a) = visited[rng.random_range(0..visited.len())];
        let Some(e) = model.entry(s, a) else { continue };
        let next = (!e.terminal).then_some(e.next_state);
        let delta = td_error_q(q_mb, s, a, next, e.reward, gamma);
        q_update(q_mb, s, a, delta, alpha);
        applied += 1;
    }
    applied
}

/// State prediction error: 1 without a model entry, otherwise the Manhattan
/// distance between predicted and actual successor over `d_max`.
pub fn spe(model: &TransitionModel, s: usize, a: Action, actual: Cell, d_max: u32) -> f64 {
    match model.entry(s, a) {
        None => 1.0,
        Some(e) => (manhattan(e.next_cell, actual) as f64 / d_max as f64).min(1.0),
    }
}

/// Reward prediction error of the MF system: its TD error.
pub fn rpe(delta_q: f64) -> f64 {
    delta_q
}

/// Prediction-error category: 0 small, 1 negative, 2 positive.
pub fn categorize(pe: f64, zeta: f64) -> usize {
    if pe < -zeta {
        1
    } else if pe > zeta {
        2
    } else {
        0
    }
}

/// Cap applied when a system has never produced a non-zero error.
pub const RELIABILITY_CAP: f64 = 1e12;

/// `E[theta_0]^2 / Var[theta_0] = l0 (L + 1) / (L - l0)`.
pub fn reliability_score(lam: &[f64; 3]) -> f64 {
    let total: f64 = lam.iter().sum();
    let denom = total - lam[0];
    if denom <= 0.0 {
        return RELIABILITY_CAP;
    }
    (lam[0] * (total + 1.0) / denom).min(RELIABILITY_CAP)
}

pub fn arbitration_probability(chi_mb: f64, chi_mf: f64, epsilon: f64) -> f64 {
    (chi_mb / (chi_mb + chi_mf + epsilon)).clamp(0.0, 1.0)
}

/// `(1 - p_mb) q_mf + p_mb q_mb`, row-wise.
pub fn hybrid_q(q_mf: &ActionValues, q_mb: &ActionValues, p_mb: f64) -> ActionValues {
    let mut out = [0.0; Action::COUNT];
    for i in 0..Action::COUNT {
        out[i] = (1.0 - p_mb) * q_mf[i] + p_mb * q_mb[i];
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum System {
    ModelBased,
    ModelFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArbitrationParams {
    /// Threshold on the normalized SPE.
    pub zeta_spe: f64,
    /// Threshold on the raw RPE.
    pub zeta_rpe: f64,
    pub epsilon: f64,
    /// Symmetric Dirichlet prior count.
    pub prior: f64,
}

impl Default for ArbitrationParams {
    fn default() -> Self {
        ArbitrationParams {
            zeta_spe: 0.1,
            zeta_rpe: 0.1,
            epsilon: 1e-6,
            prior: 1.0,
        }
    }
}

impl ArbitrationParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.zeta_spe > 0.0 && self.zeta_rpe > 0.0) {
            return Err(ConfigError::Invalid(
                "arbitration: zeta must be positive".into(),
            ));
        }
        if !(self.epsilon > 0.0 && self.prior > 0.0) {
            return Err(ConfigError::Invalid(
                "arbitration: epsilon and prior must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityState {
    pub lam_mb: [f64; 3],
    pub lam_mf: [f64; 3],
    pub params: ArbitrationParams,
    pub p_mb: f64,
}

impl ReliabilityState {
    pub fn new(params: ArbitrationParams) -> Self {
        let prior = [params.prior; 3];
        let mut rel = ReliabilityState {
            lam_mb: prior,
            lam_mf: prior,
            params,
            p_mb: 0.0,
        };
        rel.refresh();
        rel
    }

    pub fn counts(&self, system: System) -> &[f64; 3] {
        match system {
            System::ModelBased => &self.lam_mb,
            System::ModelFree => &self.lam_mf,
        }
    }

    /// Adds one observation of `category` to `system` and recomputes `p_mb`.
    pub fn update(&mut self, system: System, category: usize) {
        let lam = match system {
            System::ModelBased => &mut self.lam_mb,
            System::ModelFree => &mut self.lam_mf,
        };
        lam[category] += 1.0;
        self.refresh();
    }

    /// Categorizes both prediction errors and updates both systems.
    pub fn observe(&mut self, spe: f64, rpe: f64) {
        let mb = categorize(spe, self.params.zeta_spe);
        let mf = categorize(rpe, self.params.zeta_rpe);
        self.lam_mb[mb] += 1.0;
        self.lam_mf[mf] += 1.0;
        self.refresh();
    }

    fn refresh(&mut self) {
        self.p_mb = arbitration_probability(
            reliability_score(&self.lam_mb),
            reliability_score(&self.lam_mf),
            self.params.epsilon,
        );
    }

    pub fn chi(&self, system: System) -> f64 {
        reliability_score(self.counts(system))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn entry(next_state: usize, reward: f64) -> ModelEntry {
        ModelEntry {
            next_state,
            next_cell: Cell::new(next_state as i32, 0),
            reward,
            last_seen: 0,
            terminal: false,
        }
    }

    #[test]
    fn record_transition_visited_set() {
        let mut m = TransitionModel::new(4);
        m.record_transition(0, Action::Right, entry(1, 0.0));
        assert_eq!(m.visited().len(), 1);
        m.record_transition(0, Action::Right, entry(2, 5.0));
        assert_eq!(m.visited().len(), 1);
        assert_eq!(m.entry(0, Action::Right).unwrap().reward, 5.0);
        m.record_transition(1, Action::Right, entry(2, 0.0));
        assert_eq!(m.visited().len(), 2);

        m.start_episode();
        assert!(m.visited().is_empty());
        assert_eq!(m.n_entries(), 2);
        m.record_transition(1, Action::Right, entry(2, 0.0));
        assert_eq!(m.visited(), &[(1, Action::Right)]);
    }

    #[test]
    fn plan_on_empty_model_is_noop() {
        let m = TransitionModel::new(3);
        let mut q = QTable::new(3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(plan(&m, &mut q, 2, 0.5, 0.9, &mut rng), 0);
        assert_eq!(q, QTable::new(3));
    }

    #[test]
    fn plan_single_pair() {
        let mut m = TransitionModel::new(2);
        m.record_transition(0, Action::Up, entry(1, 1.0));
        let mut q = QTable::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(plan(&m, &mut q, 1, 0.5, 0.0, &mut rng), 1);
        assert_eq!(q.get(0, Action::Up), 0.5);
    }

    #[test]
    fn plan_with_zero_budget_is_bit_identical() {
        let mut m = TransitionModel::new(2);
        m.record_transition(0, Action::Up, entry(1, 1.0));
        let mut q = QTable::new(2);
        q.set(1, Action::Down, 0.123);
        let before = q.clone();
        plan(&m, &mut q, 0, 0.5, 0.9, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(q, before);
    }

    #[test]
    fn spe_examples() {
        let mut m = TransitionModel::new(10);
        assert_eq!(spe(&m, 3, Action::Up, Cell::new(0, 0), 58), 1.0);
        m.record_transition(
            3,
            Action::Up,
            ModelEntry {
                next_cell: Cell::new(4, 5),
                ..entry(0, 0.0)
            },
        );
        assert_eq!(spe(&m, 3, Action::Up, Cell::new(4, 5), 58), 0.0);
        assert_eq!(spe(&m, 3, Action::Up, Cell::new(24, 14), 58), 0.5);
    }

    #[test]
    fn categorize_examples() {
        assert_eq!(categorize(0.0, 0.1), 0);
        assert_eq!(categorize(-0.5, 0.1), 1);
        assert_eq!(categorize(0.2, 0.1), 2);
        assert_eq!(categorize(0.1, 0.1), 0);
        assert_eq!(categorize(-0.1, 0.1), 0);
        assert_eq!(rpe(-2.3), -2.3);
    }

    #[test]
    fn reliability_examples() {
        assert_eq!(reliability_score(&[1.0, 1.0, 1.0]), 2.0);
        assert_eq!(reliability_score(&[101.0, 1.0, 1.0]), 5252.0);
        assert_eq!(reliability_score(&[5.0, 0.0, 0.0]), RELIABILITY_CAP);
        assert!(reliability_score(&[1e6, 1.0, 1.0]) > reliability_score(&[1e3, 1.0, 1.0]));

        let mut rel = ReliabilityState::new(ArbitrationParams::default());
        assert_relative_eq!(rel.p_mb, 0.5, max_relative = 1e-6);
        rel.update(System::ModelBased, 0);
        assert_eq!(rel.lam_mb, [2.0, 1.0, 1.0]);
        assert_eq!(rel.lam_mf, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn arbitration_examples() {
        assert_relative_eq!(
            arbitration_probability(3.0, 3.0, 1e-9),
            0.5,
            max_relative = 1e-8
        );
        assert_relative_eq!(
            arbitration_probability(5252.0, 2.0, 1e-6),
            0.9996193374572478,
            max_relative = 1e-12
        );
        assert!(arbitration_probability(0.0, 2.0, 1e-6) < 1e-12);
    }

    #[test]
    fn hybrid_examples() {
        let mf = [1.0, 0.0, 0.2, -1.0, 3.0];
        let mb = [0.0, 1.0, 0.4, 1.0, -3.0];
        assert_eq!(hybrid_q(&mf, &mb, 0.0), mf);
        assert_eq!(hybrid_q(&mf, &mb, 1.0), mb);
        let h = hybrid_q(&mf, &mb, 0.5);
        assert_eq!(&h[..2], &[0.5, 0.5]);
    }
}
