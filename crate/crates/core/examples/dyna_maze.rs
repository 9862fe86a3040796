//! Dyna-Q on the 8x8 maze: episodes until the first near-optimal run, for
//! several planning budgets.
//!
//!     cargo run --release --example dyna_maze

use pitnav::maze::{first_success, train, Maze, MazeParams, MAZE_8X8};

fn main() {
    let maze = Maze::parse(MAZE_8X8).unwrap();
    let shortest = maze.shortest_path(maze.start()).unwrap();
    println!("{MAZE_8X8}shortest path {shortest} steps");
    for k in [0, 2, 5, 10, 50] {
        let params = MazeParams {
            planning_steps: k,
            ..MazeParams::default()
        };
        let mut firsts: Vec<usize> = (0..20)
            .map(|seed| {
                let (_, log) = train(&maze, &params, 300, seed);
                first_success(&log, 2 * shortest).unwrap_or(301)
            })
            .collect();
        firsts.sort();
        let (_, log) = train(&maze, &params, 50, 0);
        let curve: Vec<String> = log.iter().step_by(5).map(|e| e.steps.to_string()).collect();
        println!(
            "K={k:<3} median first run within {} steps: episode {:>5.1}  | seed 0 steps: {}",
            2 * shortest,
            (firsts[9] + firsts[10]) as f64 / 2.0,
            curve.join(" ")
        );
    }
}
