//! Single-agent goal-reaching mazes for checking the tabular learners in
//! isolation: deterministic moves, walls block, entering the target ends the
//! episode with a terminal reward.
//!
//! Mazes use the map text format with agent `1` as the start and `T` as the
//! goal.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::MapError;
use crate::gridworld::{Action, Cell, GridMap};
use crate::learners::{q_update, softmax_select, td_error_q, QTable};
use crate::planner::{plan, ModelEntry, TransitionModel};

/// 8 x 8 maze with a 35-step shortest path from `1` to `T`.
pub const MAZE_8X8: &str = "\
........
.######.
.#....#.
.#.##.#.
.#.#T.#.
.#.####.
.#......
1#######
";

#[derive(Debug, Clone)]
pub struct Maze {
    map: GridMap,
}

impl Maze {
    pub fn parse(text: &str) -> Result<Self, MapError> {
        let map = GridMap::parse(text)?;
        if map.agent_starts().len() != 1 {
            return Err(MapError::MissingAgent(1));
        }
        Ok(Maze { map })
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn start(&self) -> Cell {
        self.map.agent_starts()[0]
    }

    pub fn goal(&self) -> Cell {
        self.map.target()
    }

    pub fn n_states(&self) -> usize {
        self.map.n_cells()
    }

    /// Non-wall, non-goal cells.
    pub fn open_cells(&self) -> Vec<Cell> {
        self.map
            .cells()
            .filter(|&c| !self.map.is_wall(c) && c != self.goal())
            .collect()
    }

    pub fn step(&self, pos: Cell, a: Action) -> Cell {
        let (dx, dy) = a.delta();
        let next = Cell::new(pos.x + dx, pos.y + dy);
        if self.map.in_bounds(next) && !self.map.is_wall(next) {
            next
        } else {
            pos
        }
    }

    /// BFS distance in moves from `from` to the goal.
    pub fn shortest_path(&self, from: Cell) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.n_states()];
        dist[self.map.index(from)] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(c) = queue.pop_front() {
            let d = dist[self.map.index(c)];
            if c == self.goal() {
                return Some(d);
            }
            for a in &Action::ALL[..4] {
                let n = self.step(c, *a);
                let i = self.map.index(n);
                if dist[i] == usize::MAX {
                    dist[i] = d + 1;
                    queue.push_back(n);
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MazeParams {
    pub alpha: f64,
    pub gamma: f64,
    /// Softmax temperature of the behaviour policy.
    pub kappa: f64,
    pub planning_steps: usize,
    pub max_steps: usize,
    pub goal_reward: f64,
    pub step_reward: f64,
    /// Start every episode from a uniformly drawn open cell.
    pub random_starts: bool,
}

impl Default for MazeParams {
    fn default() -> Self {
        MazeParams {
            alpha: 0.5,
            gamma: 0.95,
            kappa: 0.05,
            planning_steps: 0,
            max_steps: 2000,
            goal_reward: 1.0,
            step_reward: 0.0,
            random_starts: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MazeLearner {
    pub q: QTable,
    pub model: TransitionModel,
}

impl MazeLearner {
    pub fn new(maze: &Maze) -> Self {
        MazeLearner {
            q: QTable::new(maze.n_states()),
            model: TransitionModel::new(maze.n_states()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MazeEpisode {
    pub steps: usize,
    pub reached: bool,
}

/// One episode of Q-learning, with Dyna-Q planning when
/// `params.planning_steps > 0`.
pub fn run_episode<R: Rng + ?Sized>(
    maze: &Maze,
    learner: &mut MazeLearner,
    params: &MazeParams,
    start: Cell,
    rng: &mut R,
) -> MazeEpisode {
    let map = maze.map();
    learner.model.start_episode();
    let mut pos = start;
    for t in 0..params.max_steps {
        let s = map.index(pos);
        let a = softmax_select(&learner.q.row(s), params.kappa, 0.0, rng);
        let next = maze.step(pos, a);
        let done = next == maze.goal();
        let r = params.step_reward + if done { params.goal_reward } else { 0.0 };
        let s_next = map.index(next);
        let boot = (!done).then_some(s_next);
        let delta = td_error_q(&learner.q, s, a, boot, r, params.gamma);
        q_update(&mut learner.q, s, a, delta, params.alpha);
        if params.planning_steps > 0 {
            learner.model.record_transition(
                s,
                a,
                ModelEntry {
                    next_state: s_next,
                    next_cell: next,
                    reward: r,
                    last_seen: t as u64,
                    terminal: done,
                },
            );
            plan(
                &learner.model,
                &mut learner.q,
                params.planning_steps,
                params.alpha,
                params.gamma,
                rng,
            );
        }
        pos = next;
        if done {
            return MazeEpisode {
                steps: t + 1,
                reached: true,
            };
        }
    }
    MazeEpisode {
        steps: params.max_steps,
        reached: false,
    }
}

/// Trains a fresh learner for `n_episodes` and returns it with the episode
/// log.
pub fn train(
    maze: &Maze,
    params: &MazeParams,
    n_episodes: usize,
    seed: u64,
) -> (MazeLearner, Vec<MazeEpisode>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut learner = MazeLearner::new(maze);
    let open = maze.open_cells();
    let log = (0..n_episodes)
        .map(|_| {
            let start = if params.random_starts {
                open[rng.random_range(0..open.len())]
            } else {
                maze.start()
            };
            run_episode(maze, &mut learner, params, start, &mut rng)
        })
        .collect();
    (learner, log)
}

/// 1-based index of the first episode that reached the goal within
/// `max_steps` steps.
pub fn first_success(log: &[MazeEpisode], max_steps: usize) -> Option<usize> {
    log.iter()
        .position(|e| e.reached && e.steps <= max_steps)
        .map(|i| i + 1)
}
