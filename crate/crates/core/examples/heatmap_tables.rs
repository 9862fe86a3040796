//! Trains briefly and prints ASCII heatmaps of the Pavlovian value V and of
//! max_a Q_MF for agent 0, then writes tables.csv.
//!
//!     cargo run --release --example heatmap_tables [out_dir]

use std::path::PathBuf;

use pitnav::harness::export::{table_rows, write_csv, TABLES_HEADER};
use pitnav::harness::run_training;
use pitnav::{Cell, ExperimentConfig, GridMap, Variant};

const SHADES: &[u8] = b" .:-=+*#%@";

fn heatmap(map: &GridMap, value: impl Fn(usize) -> f64) -> String {
    let vals: Vec<f64> = map
        .cells()
        .filter(|&c| !map.is_wall(c))
        .map(|c| value(map.index(c)))
        .collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = format!("range [{lo:.2}, {hi:.2}]\n");
    for y in (0..map.height() as i32).rev() {
        for x in 0..map.width() as i32 {
            let c = Cell::new(x, y);
            let ch = if map.is_wall(c) {
                '|'
            } else if c == map.target() {
                'T'
            } else {
                let t = if hi > lo {
                    (value(map.index(c)) - lo) / (hi - lo)
                } else {
                    0.0
                };
                SHADES[((t * (SHADES.len() - 1) as f64).round() as usize).min(SHADES.len() - 1)]
                    as char
            };
            out.push(ch);
        }
        out.push('\n');
    }
    out
}

fn main() -> pitnav::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from("out"), PathBuf::from);
    let cfg = ExperimentConfig {
        variant: Variant::PitMf,
        n_episodes: 300,
        trajectory_every: 0,
        ..ExperimentConfig::default()
    };
    let map = cfg.load_map()?;
    let run = run_training(&cfg)?;
    let a = &run.state.agents[0];
    println!("V (Pavlovian), agent 0, {}", heatmap(&map, |s| a.v.get(s)));
    println!("max_a Q_MF, agent 0, {}", heatmap(&map, |s| a.q_mf.max(s)));
    std::fs::create_dir_all(&out).map_err(|e| pitnav::Error::Io {
        path: out.clone(),
        source: e,
    })?;
    let path = out.join("tables.csv");
    write_csv(&path, &TABLES_HEADER, &table_rows(&map, &run.state))?;
    println!("wrote {}", path.display());
    Ok(())
}
