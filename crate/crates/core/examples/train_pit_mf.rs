//! Trains the PIT model-free variant on the bundled map, then plays one
//! greedy episode and draws the agents' paths.
//!
//!     cargo run --release --example train_pit_mf [episodes] [seed]

use pitnav::harness::{run_training_on, EpisodeMode, Simulation};
use pitnav::{ExperimentConfig, GridMap, Variant};

fn draw(map: &GridMap, paths: &[Vec<pitnav::Cell>]) -> String {
    let mut rows: Vec<Vec<char>> = map.to_text().lines().map(|l| l.chars().collect()).collect();
    let h = map.height() as i32;
    for (i, p) in paths.iter().enumerate() {
        let mark = char::from(b'a' + i as u8);
        for c in &p[1..] {
            let ch = &mut rows[(h - 1 - c.y) as usize][c.x as usize];
            if *ch == '.' {
                *ch = mark;
            }
        }
    }
    rows.into_iter()
        .map(|r| r.into_iter().collect::<String>() + "\n")
        .collect()
}

fn main() -> pitnav::Result<()> {
    let mut args = std::env::args().skip(1);
    let episodes = args.next().and_then(|a| a.parse().ok()).unwrap_or(1200);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(0);
    let cfg = ExperimentConfig {
        variant: Variant::PitMf,
        n_episodes: episodes,
        seed,
        trajectory_every: 0,
        ..ExperimentConfig::default()
    };
    let map = cfg.load_map()?;
    let run = run_training_on(&cfg, map.clone(), &mut ())?;
    for chunk in run.records.chunks(100) {
        let mean = chunk.iter().map(|r| r.steps).sum::<usize>() as f64 / chunk.len() as f64;
        let ok = chunk.iter().filter(|r| r.success).count();
        println!(
            "episodes {:>4}-{:<4} mean steps {mean:>6.1}  solved {ok}/{}",
            chunk[0].episode + 1,
            chunk[chunk.len() - 1].episode + 1,
            chunk.len()
        );
    }
    let mut sim = Simulation::with_state(
        ExperimentConfig {
            trajectory_every: 1,
            ..cfg
        },
        map.clone(),
        run.state,
    )?;
    let greedy = sim.run_episode(EpisodeMode::Greedy)?;
    println!(
        "greedy rollout: {} steps, success {}, PEB {:.3} m",
        greedy.steps, greedy.success, greedy.final_peb
    );
    if let Some(paths) = &greedy.trajectories {
        print!("{}", draw(&map, paths));
    }
    Ok(())
}
