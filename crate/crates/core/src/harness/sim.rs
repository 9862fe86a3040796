//! Multi-agent episode loop.
//!
//! Within a step the agents move one after another in index order, then the
//! radio links, per-agent FIMs and the global PEB are evaluated, and only
//! then does each agent compute its rewards, run its updates and pick its
//! next action.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{ConfigError, Result};
use crate::gridworld::{Action, AgentState, Cell, GridMap, TransitionOutcome};
use crate::learners::{
    argmax, policy_logits, q_update, softmax_select, td_error_q, temperature, v_update,
    ActionValues, QTable, VTable,
};
use crate::localization::{
    bearing, mission_success, noisy_agent_position, peb, total_variance, FisherInfo,
};
use crate::planner::{hybrid_q, plan, spe, ModelEntry, ReliabilityState, TransitionModel};
use crate::radio::{gps_covariance, measure, rssi_reward, Measurement};
use crate::rewards::{
    effective_reward, motivation, pavlovian_reward, total_reward, GateRewardMode, RewardBreakdown,
};

/// Independent random streams of one run. Each consumer draws only from its
/// own stream, so e.g. enabling shadowing does not shift action sampling.
#[derive(Debug, Clone)]
pub struct RngStreams {
    pub policy: ChaCha8Rng,
    pub shadowing: ChaCha8Rng,
    pub gps: ChaCha8Rng,
    pub planning: ChaCha8Rng,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(id);
            r
        };
        RngStreams {
            policy: stream(1),
            shadowing: stream(2),
            gps: stream(3),
            planning: stream(4),
        }
    }
}

/// Everything one agent learns. Persists across episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentLearner {
    pub q_mf: QTable,
    pub q_mb: QTable,
    pub v: VTable,
    pub model: TransitionModel,
    pub reliability: ReliabilityState,
}

impl AgentLearner {
    pub fn new(n_states: usize, cfg: &ExperimentConfig) -> Self {
        AgentLearner {
            q_mf: QTable::new(n_states),
            q_mb: QTable::new(n_states),
            v: VTable::new(n_states),
            model: TransitionModel::new(n_states),
            reliability: ReliabilityState::new(cfg.arbitration),
        }
    }

    /// Action values the policy acts on: `Q_MF`, or the arbitrated blend.
    pub fn q_eff(&self, s: usize, model_based: bool) -> ActionValues {
        if model_based {
            hybrid_q(&self.q_mf.row(s), &self.q_mb.row(s), self.reliability.p_mb)
        } else {
            self.q_mf.row(s)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerState {
    pub agents: Vec<AgentLearner>,
    pub global_step: u64,
    pub episodes_done: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodeMode {
    /// Softmax exploration with all learning updates.
    Train,
    /// Argmax policy, tables left untouched.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    /// Steps executed; equals the step budget when the goal was not reached.
    pub steps: usize,
    pub success: bool,
    /// `+inf` when the last step was ill-conditioned; written as `"inf"` in
    /// JSON.
    #[serde(with = "peb_json")]
    pub final_peb: f64,
    pub alpha: f64,
    pub kappa0: f64,
    /// Per-agent positions from the start cell on, when recorded.
    pub trajectories: Option<Vec<Vec<Cell>>>,
    /// Per-agent P_MB after every step, when recorded (model-based only).
    pub pmb_trace: Option<Vec<Vec<f64>>>,
    /// Per-agent mean P_MB over the episode; empty for model-free variants.
    pub mean_pmb: Vec<f64>,
    pub rewards: Vec<RewardBreakdown>,
    pub collisions: u32,
    /// Agent-steps spent in GPS-denied cells.
    pub gps_denied_steps: u32,
    pub gate_rewards: u32,
    pub g_a_evaluations: u64,
}

/// JSON has no infinity; an unbounded PEB travels as the string `"inf"`.
mod peb_json {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(if *v > 0.0 {
                "inf"
            } else if *v < 0.0 {
                "-inf"
            } else {
                "nan"
            })
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Per-agent view of one step, handed to a [`StepObserver`].
#[derive(Debug, Clone)]
pub struct StepEvent<'a> {
    pub episode: usize,
    pub step: usize,
    pub agent: usize,
    pub state: Cell,
    pub action: Action,
    pub outcome: TransitionOutcome,
    pub measurement: Measurement,
    pub fim: FisherInfo,
    pub peb: f64,
    pub goal: bool,
    pub motivation: f64,
    pub reward: RewardBreakdown,
    pub r_eff: f64,
    pub delta_v: f64,
    pub delta_q: f64,
    pub spe: Option<f64>,
    pub p_mb: Option<f64>,
    pub planning_updates: usize,
    /// Next action and the scores and temperature it was drawn from; `None`
    /// on the final step.
    pub next: Option<(Action, ActionValues, f64)>,
    pub learner: &'a AgentLearner,
}

pub trait StepObserver {
    fn on_step(&mut self, event: &StepEvent<'_>);
}

impl StepObserver for () {
    fn on_step(&mut self, _: &StepEvent<'_>) {}
}

impl<F: FnMut(&StepEvent<'_>)> StepObserver for F {
    fn on_step(&mut self, event: &StepEvent<'_>) {
        self(event)
    }
}

/// A map, a configuration, persistent learner state and the run's RNG
/// streams. Each call to [`Simulation::run_episode`] plays one episode.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: ExperimentConfig,
    map: GridMap,
    state: LearnerState,
    rng: RngStreams,
}

impl Simulation {
    pub fn new(cfg: ExperimentConfig, map: GridMap) -> Result<Self> {
        cfg.validate(&map)?;
        let n_states = map.n_cells();
        let agents = (0..cfg.n_agents)
            .map(|_| AgentLearner::new(n_states, &cfg))
            .collect();
        let rng = RngStreams::new(cfg.seed);
        Ok(Simulation {
            cfg,
            map,
            state: LearnerState {
                agents,
                global_step: 0,
                episodes_done: 0,
            },
            rng,
        })
    }

    /// Resumes from a saved learner state.
    pub fn with_state(cfg: ExperimentConfig, map: GridMap, state: LearnerState) -> Result<Self> {
        let mut sim = Simulation::new(cfg, map)?;
        if state.agents.len() != sim.cfg.n_agents
            || state
                .agents
                .iter()
                .any(|a| a.q_mf.n_states() != sim.map.n_cells())
        {
            return Err(ConfigError::Invalid(
                "saved learner state does not match the map and agent count".into(),
            )
            .into());
        }
        sim.state = state;
        Ok(sim)
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn state(&self) -> &LearnerState {
        &self.state
    }

    pub fn into_state(self) -> LearnerState {
        self.state
    }

    fn keep_trajectory(&self, episode: usize) -> bool {
        let every = self.cfg.trajectory_every;
        every > 0 && (episode.is_multiple_of(every) || episode + 1 == self.cfg.n_episodes)
    }

    pub fn run_episode(&mut self, mode: EpisodeMode) -> Result<EpisodeRecord> {
        self.run_episode_observed(mode, &mut ())
    }

    pub fn run_episode_observed(
        &mut self,
        mode: EpisodeMode,
        observer: &mut dyn StepObserver,
    ) -> Result<EpisodeRecord> {
        let keep = self.keep_trajectory(self.state.episodes_done);
        let Simulation {
            cfg,
            map,
            state,
            rng,
        } = self;
        let episode = state.episodes_done;
        let train = mode == EpisodeMode::Train;
        let n = cfg.n_agents;
        let model_based = cfg.variant.model_based();
        let pavlovian = cfg.variant.pavlovian();
        let alpha = cfg.learn.alpha.at(episode);
        let kappa0 = cfg.learn.kappa.at(episode);
        let gamma = cfg.learn.gamma;
        let mp = &cfg.motivation;
        let phi = if cfg.motivation_enabled { mp.phi } else { 0.0 };
        let motiv = |a: &AgentState| {
            if cfg.motivation_enabled {
                motivation(mp, a.battery, a.elapsed as f64)
            } else {
                0.0
            }
        };
        let shadow = (cfg.radio.sigma_s_db > 0.0)
            .then(|| Normal::new(0.0, cfg.radio.sigma_s_db).expect("validated sigma"));
        let target = map.position(map.target());
        let d_max = map.d_max();

        let mut agents: Vec<AgentState> = map
            .agent_starts()
            .iter()
            .map(|&p| AgentState::new(p, mp.b_max))
            .collect();
        if train {
            for l in &mut state.agents {
                l.model.start_episode();
            }
        }

        let mut trajectories = keep.then(|| agents.iter().map(|a| vec![a.pos]).collect::<Vec<_>>());
        let mut pmb_trace = (keep && model_based).then(|| vec![Vec::new(); n]);
        let mut pmb_sum = vec![0.0; n];
        let mut rewards = vec![RewardBreakdown::default(); n];
        let mut gate_paid = vec![false; n];
        let mut collisions = 0;
        let mut gps_denied_steps = 0;
        let mut gate_rewards = 0;
        let mut g_a_evaluations = 0u64;

        let choose = |l: &AgentLearner,
                      pos: Cell,
                      m: f64,
                      rng: &mut ChaCha8Rng,
                      g_evals: &mut u64|
         -> (Action, ActionValues, f64) {
            let s = map.index(pos);
            let q = l.q_eff(s, model_based);
            let scores = if pavlovian {
                *g_evals += Action::COUNT as u64;
                policy_logits(&q, &l.v, map, pos, cfg.learn.beta)
            } else {
                q
            };
            let a = if train {
                softmax_select(&scores, kappa0, m, rng)
            } else {
                Action::ALL[argmax(&scores)]
            };
            (a, scores, temperature(kappa0, m))
        };

        let mut actions: Vec<Action> = (0..n)
            .map(|i| {
                let m = motiv(&agents[i]);
                choose(
                    &state.agents[i],
                    agents[i].pos,
                    m,
                    &mut rng.policy,
                    &mut g_a_evaluations,
                )
                .0
            })
            .collect();

        let mut steps = 0;
        let mut success = false;
        let mut final_peb = f64::INFINITY;

        for t in 0..cfg.n_steps {
            steps = t + 1;
            let prev: Vec<AgentState> = agents.clone();

            let mut outcomes = Vec::with_capacity(n);
            for i in 0..n {
                let occupied: Vec<Cell> = agents
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, a)| a.pos)
                    .collect();
                let o = map.step_agent(&occupied, &agents[i], actions[i], cfg.rewards.d_safe);
                agents[i].pos = o.next_pos;
                if o.collided {
                    collisions += 1;
                }
                outcomes.push(o);
            }

            let mut meas = Vec::with_capacity(n);
            let mut fims = Vec::with_capacity(n);
            for a in &agents {
                let denied = map.is_gps_denied(a.pos);
                gps_denied_steps += u32::from(denied);
                let cov = gps_covariance(&cfg.gps, denied);
                let est = noisy_agent_position(map.position(a.pos), &cov, &mut rng.gps);
                let s_db = shadow.map_or(0.0, |d| d.sample(&mut rng.shadowing));
                let d = map.distance_m(a.pos, map.target());
                let mut m = measure(&cfg.radio, d, map.is_los(a.pos), s_db)?;
                // an estimate landing exactly on the target carries no bearing
                let j = match bearing(target, est) {
                    Ok(u) => {
                        m.var_total = total_variance(m.var_range, &u, &cov);
                        FisherInfo(u * u.transpose() / m.var_total)
                    }
                    Err(_) => FisherInfo::zero(),
                };
                meas.push(m);
                fims.push(j);
            }
            let total: FisherInfo = fims.iter().copied().sum();
            let p = peb(&total, cfg.cond_threshold);
            final_peb = p.peb;
            let goal = mission_success(p.peb, cfg.peb_star);

            for i in 0..n {
                let a = actions[i];
                let s_cell = prev[i].pos;
                let s_next_cell = agents[i].pos;
                let s = map.index(s_cell);
                let s_next = map.index(s_next_cell);
                let m = motiv(&prev[i]);
                let r_rssi = rssi_reward(&cfg.radio, meas[i].p_r_dbm);
                let (mut r_gate, r_gd) = if pavlovian {
                    pavlovian_reward(&cfg.rewards, s_cell, s_next_cell, map)
                } else {
                    (0.0, 0.0)
                };
                if r_gate != 0.0 {
                    if cfg.rewards.gate_mode == GateRewardMode::OncePerEpisode && gate_paid[i] {
                        r_gate = 0.0;
                    } else {
                        gate_paid[i] = true;
                        gate_rewards += 1;
                    }
                }
                let r = total_reward(r_rssi, &outcomes[i], (r_gate, r_gd), goal, &cfg.rewards);
                let r_eff = effective_reward(r.total, m, phi);
                rewards[i] += r;

                let boot = (!goal).then_some(s_next);
                let l = &mut state.agents[i];
                let mut delta_v = 0.0;
                let mut delta_q = td_error_q(&l.q_mf, s, a, boot, r_eff, gamma);
                let mut spe_val = None;
                let mut planning_updates = 0;
                if train {
                    delta_v = v_update(&mut l.v, s, boot, r_eff, alpha, gamma);
                    if model_based {
                        let e = spe(&l.model, s, a, s_next_cell, d_max);
                        l.reliability.observe(e, delta_q);
                        spe_val = Some(e);
                    }
                    q_update(&mut l.q_mf, s, a, delta_q, alpha);
                    if model_based {
                        // Dyna-Q: real experience first, then K simulated replays
                        let d_mb = td_error_q(&l.q_mb, s, a, boot, r_eff, gamma);
                        q_update(&mut l.q_mb, s, a, d_mb, alpha);
                        state.global_step += 1;
                        l.model.record_transition(
                            s,
                            a,
                            ModelEntry {
                                next_state: s_next,
                                next_cell: s_next_cell,
                                reward: r_eff,
                                last_seen: state.global_step,
                                terminal: goal,
                            },
                        );
                        planning_updates = plan(
                            &l.model,
                            &mut l.q_mb,
                            cfg.planning_steps,
                            alpha,
                            gamma,
                            &mut rng.planning,
                        );
                    }
                } else {
                    delta_q = 0.0;
                }

                agents[i].battery -= mp.energy_cost(a);
                agents[i].elapsed += 1;

                let p_mb = model_based.then_some(l.reliability.p_mb);
                if let Some(pm) = p_mb {
                    pmb_sum[i] += pm;
                    if let Some(tr) = &mut pmb_trace {
                        tr[i].push(pm);
                    }
                }
                let next = (!goal).then(|| {
                    let m_next = motiv(&agents[i]);
                    choose(
                        &*l,
                        s_next_cell,
                        m_next,
                        &mut rng.policy,
                        &mut g_a_evaluations,
                    )
                });
                if let Some((na, _, _)) = next {
                    actions[i] = na;
                }
                observer.on_step(&StepEvent {
                    episode,
                    step: t,
                    agent: i,
                    state: s_cell,
                    action: a,
                    outcome: outcomes[i],
                    measurement: meas[i],
                    fim: fims[i],
                    peb: p.peb,
                    goal,
                    motivation: m,
                    reward: r,
                    r_eff,
                    delta_v,
                    delta_q,
                    spe: spe_val,
                    p_mb,
                    planning_updates,
                    next,
                    learner: &state.agents[i],
                });
            }

            if let Some(tr) = &mut trajectories {
                for (t, a) in tr.iter_mut().zip(&agents) {
                    t.push(a.pos);
                }
            }
            if goal {
                success = true;
                break;
            }
        }

        if train {
            state.episodes_done += 1;
        }
        let mean_pmb = if model_based {
            pmb_sum.iter().map(|s| s / steps as f64).collect()
        } else {
            Vec::new()
        };
        Ok(EpisodeRecord {
            episode,
            steps,
            success,
            final_peb,
            alpha,
            kappa0,
            trajectories,
            pmb_trace,
            mean_pmb,
            rewards,
            collisions,
            gps_denied_steps,
            gate_rewards,
            g_a_evaluations,
        })
    }
}

/// Output of a complete training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRun {
    pub records: Vec<EpisodeRecord>,
    pub state: LearnerState,
}

/// Trains for `cfg.n_episodes` episodes on the configured map.
pub fn run_training(cfg: &ExperimentConfig) -> Result<TrainingRun> {
    let map = cfg.load_map()?;
    run_training_on(cfg, map, &mut ())
}

pub fn run_training_on(
    cfg: &ExperimentConfig,
    map: GridMap,
    observer: &mut dyn StepObserver,
) -> Result<TrainingRun> {
    let mut sim = Simulation::new(cfg.clone(), map)?;
    let records = (0..cfg.n_episodes)
        .map(|_| sim.run_episode_observed(EpisodeMode::Train, observer))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainingRun {
        records,
        state: sim.into_state(),
    })
}
