//! Experiment configuration and its flat `section.key=value` text format.
//!
//! Blank lines and lines starting with `#` are ignored. Every key has a
//! default, so an empty file reproduces the reference setup.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Error};
use crate::gridworld::GridMap;
use crate::learners::LearnParams;
use crate::localization::DEFAULT_COND_THRESHOLD;
use crate::planner::ArbitrationParams;
use crate::radio::{GpsModel, RadioConfig, RssiNormalization};
use crate::rewards::{GateRewardMode, MotivationParams, RewardParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Q-learning on `Q_MF` only.
    InstrumentalMf,
    /// `Q_MF` plus Pavlovian cue modulation.
    PitMf,
    /// Arbitrated MF/MB blend, no cue modulation.
    InstrumentalMfMb,
    /// Arbitrated MF/MB blend with cue modulation.
    PitMfMb,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::InstrumentalMf,
        Variant::PitMf,
        Variant::InstrumentalMfMb,
        Variant::PitMfMb,
    ];

    pub fn pavlovian(self) -> bool {
        matches!(self, Variant::PitMf | Variant::PitMfMb)
    }

    pub fn model_based(self) -> bool {
        matches!(self, Variant::InstrumentalMfMb | Variant::PitMfMb)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::InstrumentalMf => "instrumental-mf",
            Variant::PitMf => "pit-mf",
            Variant::InstrumentalMfMb => "instrumental-mfmb",
            Variant::PitMfMb => "pit-mfmb",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match key.as_str() {
            "instrumentalmf" => Ok(Variant::InstrumentalMf),
            "pitmf" => Ok(Variant::PitMf),
            "instrumentalmfmb" => Ok(Variant::InstrumentalMfMb),
            "pitmfmb" | "hybrid" => Ok(Variant::PitMfMb),
            _ => Err(ConfigError::UnknownVariant(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// `None` selects the bundled map.
    pub map_path: Option<PathBuf>,
    pub n_agents: usize,
    pub n_episodes: usize,
    pub n_steps: usize,
    pub peb_star: f64,
    pub cond_threshold: f64,
    pub variant: Variant,
    pub motivation_enabled: bool,
    pub planning_steps: usize,
    pub seed: u64,
    pub monte_carlo_runs: usize,
    /// Keep trajectories and per-step P_MB for every n-th episode and the
    /// last one; 0 keeps none.
    pub trajectory_every: usize,
    pub learn: LearnParams,
    pub motivation: MotivationParams,
    pub rewards: RewardParams,
    pub radio: RadioConfig,
    pub gps: GpsModel,
    pub arbitration: ArbitrationParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let n_steps = 800;
        ExperimentConfig {
            map_path: None,
            n_agents: 4,
            n_episodes: 1200,
            n_steps,
            peb_star: 0.5,
            cond_threshold: DEFAULT_COND_THRESHOLD,
            variant: Variant::PitMfMb,
            motivation_enabled: true,
            planning_steps: 2,
            seed: 0,
            monte_carlo_runs: 40,
            trajectory_every: 1,
            learn: LearnParams::default(),
            motivation: MotivationParams::for_budget(n_steps),
            rewards: RewardParams::default(),
            radio: RadioConfig::default(),
            gps: GpsModel::default(),
            arbitration: ArbitrationParams::default(),
        }
    }
}

/// Keys applied before the others because they reset derived defaults.
const LEADING_KEYS: [&str; 2] = ["harness.n_steps", "radio.bandwidth_hz"];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        }),
    }
}

impl ExperimentConfig {
    /// Sets the step budget together with the battery and time normalizers.
    pub fn set_n_steps(&mut self, n_steps: usize) {
        self.n_steps = n_steps;
        self.motivation.b_max = n_steps as f64;
        self.motivation.t_max = n_steps as f64;
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        pairs.sort_by_key(|(k, _)| !LEADING_KEYS.contains(&k.as_str()));
        let mut cfg = ExperimentConfig::default();
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(ExperimentConfig::parse(&text)?)
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let k = key;
        let v = value;
        match key {
            "harness.map" => {
                self.map_path = match v {
                    "" | "bundled" => None,
                    p => Some(PathBuf::from(p)),
                }
            }
            "harness.n_agents" => self.n_agents = parse_value(k, v)?,
            "harness.n_episodes" => self.n_episodes = parse_value(k, v)?,
            "harness.n_steps" => self.set_n_steps(parse_value(k, v)?),
            "harness.peb_star" => self.peb_star = parse_value(k, v)?,
            "harness.cond_threshold" => self.cond_threshold = parse_value(k, v)?,
            "harness.variant" => self.variant = v.parse()?,
            "harness.motivation" => self.motivation_enabled = parse_bool(k, v)?,
            "harness.planning_steps" => self.planning_steps = parse_value(k, v)?,
            "harness.seed" => self.seed = parse_value(k, v)?,
            "harness.monte_carlo_runs" => self.monte_carlo_runs = parse_value(k, v)?,
            "harness.trajectory_every" => self.trajectory_every = parse_value(k, v)?,

            "learn.alpha_initial" => self.learn.alpha.initial = parse_value(k, v)?,
            "learn.alpha_decay" => self.learn.alpha.decay = parse_value(k, v)?,
            "learn.alpha_floor" => self.learn.alpha.floor = parse_value(k, v)?,
            "learn.gamma" => self.learn.gamma = parse_value(k, v)?,
            "learn.kappa_initial" => self.learn.kappa.initial = parse_value(k, v)?,
            "learn.kappa_decay" => self.learn.kappa.decay = parse_value(k, v)?,
            "learn.kappa_floor" => self.learn.kappa.floor = parse_value(k, v)?,
            "learn.beta" => self.learn.beta = parse_value(k, v)?,

            "motivation.xi1" => self.motivation.xi1 = parse_value(k, v)?,
            "motivation.xi2" => self.motivation.xi2 = parse_value(k, v)?,
            "motivation.phi" => self.motivation.phi = parse_value(k, v)?,
            "motivation.b_max" => self.motivation.b_max = parse_value(k, v)?,
            "motivation.t_max" => self.motivation.t_max = parse_value(k, v)?,
            "motivation.move_cost" => self.motivation.move_cost = parse_value(k, v)?,
            "motivation.hover_cost" => self.motivation.hover_cost = parse_value(k, v)?,

            "rewards.lambda_col" => self.rewards.lambda_col = parse_value(k, v)?,
            "rewards.r_goal" => self.rewards.r_goal = parse_value(k, v)?,
            "rewards.r_cue" => self.rewards.r_cue = parse_value(k, v)?,
            "rewards.d_safe" => self.rewards.d_safe = parse_value(k, v)?,
            "rewards.gate_mode" => {
                self.rewards.gate_mode = match v {
                    "per_transition" => GateRewardMode::PerTransition,
                    "once_per_episode" => GateRewardMode::OncePerEpisode,
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: k.into(),
                            value: v.into(),
                        })
                    }
                }
            }

            "radio.p_t_dbm" => self.radio.p_t_dbm = parse_value(k, v)?,
            "radio.g_t_dbi" => self.radio.g_t_dbi = parse_value(k, v)?,
            "radio.g_r_dbi" => self.radio.g_r_dbi = parse_value(k, v)?,
            "radio.carrier_hz" => self.radio.carrier_hz = parse_value(k, v)?,
            "radio.bandwidth_hz" => {
                self.radio.bandwidth_hz = parse_value(k, v)?;
                self.radio.beta_eff_hz = self.radio.bandwidth_hz / 12f64.sqrt();
            }
            "radio.noise_figure_db" => self.radio.noise_figure_db = parse_value(k, v)?,
            "radio.eta_los" => self.radio.eta_los = parse_value(k, v)?,
            "radio.eta_nlos" => self.radio.eta_nlos = parse_value(k, v)?,
            "radio.wall_loss_db" => self.radio.wall_loss_db = parse_value(k, v)?,
            "radio.sigma_s_db" => self.radio.sigma_s_db = parse_value(k, v)?,
            "radio.beta_eff_hz" => self.radio.beta_eff_hz = parse_value(k, v)?,
            "radio.rssi_normalization" => {
                self.radio.rssi_normalization = match v {
                    "linear" => RssiNormalization::Linear,
                    "dbm" => RssiNormalization::Dbm,
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: k.into(),
                            value: v.into(),
                        })
                    }
                }
            }

            "gps.sigma2_denied" => self.gps.sigma2_denied = parse_value(k, v)?,
            "gps.sigma2_normal" => self.gps.sigma2_normal = parse_value(k, v)?,

            "arbitration.zeta_spe" => self.arbitration.zeta_spe = parse_value(k, v)?,
            "arbitration.zeta_rpe" => self.arbitration.zeta_rpe = parse_value(k, v)?,
            "arbitration.epsilon" => self.arbitration.epsilon = parse_value(k, v)?,
            "arbitration.prior" => self.arbitration.prior = parse_value(k, v)?,

            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Serializes every key. `parse(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: &dyn fmt::Display| {
            let _ = writeln!(s, "{k}={v}");
        };
        let map = self
            .map_path
            .as_ref()
            .map_or("bundled".to_string(), |p| p.display().to_string());
        kv("harness.map", &map);
        kv("harness.n_agents", &self.n_agents);
        kv("harness.n_episodes", &self.n_episodes);
        kv("harness.n_steps", &self.n_steps);
        kv("harness.peb_star", &self.peb_star);
        kv("harness.cond_threshold", &self.cond_threshold);
        kv("harness.variant", &self.variant);
        kv("harness.motivation", &self.motivation_enabled);
        kv("harness.planning_steps", &self.planning_steps);
        kv("harness.seed", &self.seed);
        kv("harness.monte_carlo_runs", &self.monte_carlo_runs);
        kv("harness.trajectory_every", &self.trajectory_every);
        let l = &self.learn;
        kv("learn.alpha_initial", &l.alpha.initial);
        kv("learn.alpha_decay", &l.alpha.decay);
        kv("learn.alpha_floor", &l.alpha.floor);
        kv("learn.gamma", &l.gamma);
        kv("learn.kappa_initial", &l.kappa.initial);
        kv("learn.kappa_decay", &l.kappa.decay);
        kv("learn.kappa_floor", &l.kappa.floor);
        kv("learn.beta", &l.beta);
        let m = &self.motivation;
        kv("motivation.xi1", &m.xi1);
        kv("motivation.xi2", &m.xi2);
        kv("motivation.phi", &m.phi);
        kv("motivation.b_max", &m.b_max);
        kv("motivation.t_max", &m.t_max);
        kv("motivation.move_cost", &m.move_cost);
        kv("motivation.hover_cost", &m.hover_cost);
        let r = &self.rewards;
        kv("rewards.lambda_col", &r.lambda_col);
        kv("rewards.r_goal", &r.r_goal);
        kv("rewards.r_cue", &r.r_cue);
        kv("rewards.d_safe", &r.d_safe);
        let gate = match r.gate_mode {
            GateRewardMode::PerTransition => "per_transition",
            GateRewardMode::OncePerEpisode => "once_per_episode",
        };
        kv("rewards.gate_mode", &gate);
        let rc = &self.radio;
        kv("radio.p_t_dbm", &rc.p_t_dbm);
        kv("radio.g_t_dbi", &rc.g_t_dbi);
        kv("radio.g_r_dbi", &rc.g_r_dbi);
        kv("radio.carrier_hz", &rc.carrier_hz);
        kv("radio.bandwidth_hz", &rc.bandwidth_hz);
        kv("radio.noise_figure_db", &rc.noise_figure_db);
        kv("radio.eta_los", &rc.eta_los);
        kv("radio.eta_nlos", &rc.eta_nlos);
        kv("radio.wall_loss_db", &rc.wall_loss_db);
        kv("radio.sigma_s_db", &rc.sigma_s_db);
        kv("radio.beta_eff_hz", &rc.beta_eff_hz);
        let norm = match rc.rssi_normalization {
            RssiNormalization::Linear => "linear",
            RssiNormalization::Dbm => "dbm",
        };
        kv("radio.rssi_normalization", &norm);
        kv("gps.sigma2_denied", &self.gps.sigma2_denied);
        kv("gps.sigma2_normal", &self.gps.sigma2_normal);
        let a = &self.arbitration;
        kv("arbitration.zeta_spe", &a.zeta_spe);
        kv("arbitration.zeta_rpe", &a.zeta_rpe);
        kv("arbitration.epsilon", &a.epsilon);
        kv("arbitration.prior", &a.prior);
        s
    }

    pub fn load_map(&self) -> Result<GridMap, Error> {
        match &self.map_path {
            None => Ok(GridMap::bundled()),
            Some(p) => GridMap::load(p),
        }
    }

    /// Checks every sub-config and the agent count against `map`.
    pub fn validate(&self, map: &GridMap) -> Result<(), ConfigError> {
        if self.n_agents != map.agent_starts().len() {
            return Err(ConfigError::Invalid(format!(
                "harness: n_agents = {} but the map has {} agent starts",
                self.n_agents,
                map.agent_starts().len()
            )));
        }
        if self.n_agents == 0 || self.n_steps == 0 {
            return Err(ConfigError::Invalid(
                "harness: n_agents and n_steps must be positive".into(),
            ));
        }
        if !(self.peb_star > 0.0) {
            return Err(ConfigError::Invalid(
                "harness: peb_star must be positive".into(),
            ));
        }
        if self.monte_carlo_runs == 0 {
            return Err(ConfigError::Invalid(
                "harness: monte_carlo_runs must be at least 1".into(),
            ));
        }
        self.learn.validate()?;
        self.motivation.validate()?;
        self.rewards.validate()?;
        self.radio.validate()?;
        self.gps.validate()?;
        self.arbitration.validate()?;
        Ok(())
    }
}
