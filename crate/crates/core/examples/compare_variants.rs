//! Monte Carlo comparison of the four variants, with and without the
//! motivational signal. Prints mean steps per 50-episode window.
//!
//!     cargo run --release --example compare_variants [runs] [episodes]

use pitnav::harness::run_monte_carlo;
use pitnav::{ExperimentConfig, Variant};

fn main() -> pitnav::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs = args.next().and_then(|a| a.parse().ok()).unwrap_or(10);
    let episodes: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(400);
    let windows: Vec<usize> = (0..episodes).step_by(50).collect();
    print!("{:<28}", "variant");
    for w in &windows {
        print!("{:>8}", format!("{}+", w + 1));
    }
    println!("{:>8}", "GD/ep");
    for v in Variant::ALL {
        for motivated in [true, false] {
            let cfg = ExperimentConfig {
                variant: v,
                motivation_enabled: motivated,
                n_episodes: episodes,
                monte_carlo_runs: runs,
                ..ExperimentConfig::default()
            };
            let mc = run_monte_carlo(&cfg)?;
            let label = format!("{v}{}", if motivated { "" } else { " (no M)" });
            print!("{label:<28}");
            for &w in &windows {
                let rows = &mc.aggregate[w..(w + 50).min(episodes)];
                let mean = rows.iter().map(|r| r.steps.mean).sum::<f64>() / rows.len() as f64;
                print!("{mean:>8.1}");
            }
            let tail = episodes.saturating_sub(100);
            let gd: f64 = mc
                .runs
                .iter()
                .flat_map(|r| &r.records[tail..])
                .map(|e| e.gps_denied_steps as f64)
                .sum::<f64>()
                / (runs * (episodes - tail)) as f64;
            println!("{gd:>8.2}");
        }
    }
    Ok(())
}
