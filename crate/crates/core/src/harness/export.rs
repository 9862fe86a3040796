//! CSV and JSON writers for run records and learned tables.
//!
//! | file           | columns                                                   |
//! |----------------|-----------------------------------------------------------|
//! | `episodes.csv` | run, episode, steps, success, final_peb, collisions, gps_denied_steps |
//! | `pmb.csv`      | run, episode, agent, mean_pmb                             |
//! | `traj.csv`     | run, episode, agent, step, x, y                           |
//! | `tables.csv`   | agent, x, y, action, q_mf, q_mb, v                        |
//! | `aggregate.csv`| episode, steps_{mean,median,min,max}, pmb_{...}, success_rate |
//!
//! Headers are written even when there are no rows.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::monte_carlo::{AggregateRow, RunResult};
use super::sim::LearnerState;
use crate::error::{Error, Result};
use crate::gridworld::{Action, GridMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub run: usize,
    pub episode: usize,
    pub steps: usize,
    pub success: bool,
    pub final_peb: f64,
    pub collisions: u32,
    pub gps_denied_steps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmbRow {
    pub run: usize,
    pub episode: usize,
    pub agent: usize,
    pub mean_pmb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajRow {
    pub run: usize,
    pub episode: usize,
    pub agent: usize,
    pub step: usize,
    pub x: i32,
    pub y: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub agent: usize,
    pub x: i32,
    pub y: i32,
    pub action: String,
    pub q_mf: f64,
    pub q_mb: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCsvRow {
    pub episode: usize,
    pub steps_mean: f64,
    pub steps_median: f64,
    pub steps_min: f64,
    pub steps_max: f64,
    pub pmb_mean: Option<f64>,
    pub pmb_median: Option<f64>,
    pub pmb_min: Option<f64>,
    pub pmb_max: Option<f64>,
    pub success_rate: f64,
}

pub const EPISODES_HEADER: [&str; 7] = [
    "run",
    "episode",
    "steps",
    "success",
    "final_peb",
    "collisions",
    "gps_denied_steps",
];
pub const PMB_HEADER: [&str; 4] = ["run", "episode", "agent", "mean_pmb"];
pub const TRAJ_HEADER: [&str; 6] = ["run", "episode", "agent", "step", "x", "y"];
pub const TABLES_HEADER: [&str; 7] = ["agent", "x", "y", "action", "q_mf", "q_mb", "v"];
pub const AGGREGATE_HEADER: [&str; 10] = [
    "episode",
    "steps_mean",
    "steps_median",
    "steps_min",
    "steps_max",
    "pmb_mean",
    "pmb_median",
    "pmb_min",
    "pmb_max",
    "success_rate",
];

fn csv_err(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(file));
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| csv_err(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer(BufWriter::new(file), value).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn episode_rows(runs: &[RunResult]) -> Vec<EpisodeRow> {
    runs.iter()
        .flat_map(|r| {
            r.records.iter().map(move |e| EpisodeRow {
                run: r.run,
                episode: e.episode,
                steps: e.steps,
                success: e.success,
                final_peb: e.final_peb,
                collisions: e.collisions,
                gps_denied_steps: e.gps_denied_steps,
            })
        })
        .collect()
}

pub fn pmb_rows(runs: &[RunResult]) -> Vec<PmbRow> {
    let mut out = Vec::new();
    for r in runs {
        for e in &r.records {
            for (agent, &mean_pmb) in e.mean_pmb.iter().enumerate() {
                out.push(PmbRow {
                    run: r.run,
                    episode: e.episode,
                    agent,
                    mean_pmb,
                });
            }
        }
    }
    out
}

pub fn traj_rows(runs: &[RunResult]) -> Vec<TrajRow> {
    let mut out = Vec::new();
    for r in runs {
        for e in &r.records {
            let Some(trajs) = &e.trajectories else {
                continue;
            };
            for (agent, t) in trajs.iter().enumerate() {
                for (step, c) in t.iter().enumerate() {
                    out.push(TrajRow {
                        run: r.run,
                        episode: e.episode,
                        agent,
                        step,
                        x: c.x,
                        y: c.y,
                    });
                }
            }
        }
    }
    out
}

/// One row per agent, non-wall cell and action.
pub fn table_rows(map: &GridMap, state: &LearnerState) -> Vec<TableRow> {
    let mut out = Vec::new();
    for (agent, l) in state.agents.iter().enumerate() {
        for c in map.cells().filter(|&c| !map.is_wall(c)) {
            let s = map.index(c);
            for a in Action::ALL {
                out.push(TableRow {
                    agent,
                    x: c.x,
                    y: c.y,
                    action: a.name().to_string(),
                    q_mf: l.q_mf.get(s, a),
                    q_mb: l.q_mb.get(s, a),
                    v: l.v.get(s),
                });
            }
        }
    }
    out
}

pub fn aggregate_rows(agg: &[AggregateRow]) -> Vec<AggregateCsvRow> {
    agg.iter()
        .map(|a| AggregateCsvRow {
            episode: a.episode,
            steps_mean: a.steps.mean,
            steps_median: a.steps.median,
            steps_min: a.steps.min,
            steps_max: a.steps.max,
            pmb_mean: a.pmb.map(|p| p.mean),
            pmb_median: a.pmb.map(|p| p.median),
            pmb_min: a.pmb.map(|p| p.min),
            pmb_max: a.pmb.map(|p| p.max),
            success_rate: a.success_rate,
        })
        .collect()
}

/// Writes the per-episode records of `runs` into `dir` and returns the files
/// written. CSV output always includes `episodes.csv` and `pmb.csv`, plus
/// `traj.csv` when any trajectory was recorded; JSON output is a single
/// `episodes.json` holding the full records.
pub fn export(runs: &[RunResult], format: ExportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    match format {
        ExportFormat::Csv => {
            let p = dir.join("episodes.csv");
            write_csv(&p, &EPISODES_HEADER, &episode_rows(runs))?;
            written.push(p);
            let p = dir.join("pmb.csv");
            write_csv(&p, &PMB_HEADER, &pmb_rows(runs))?;
            written.push(p);
            let traj = traj_rows(runs);
            if !traj.is_empty() {
                let p = dir.join("traj.csv");
                write_csv(&p, &TRAJ_HEADER, &traj)?;
                written.push(p);
            }
        }
        ExportFormat::Json => {
            let p = dir.join("episodes.json");
            write_json(&p, runs)?;
            written.push(p);
        }
    }
    Ok(written)
}
