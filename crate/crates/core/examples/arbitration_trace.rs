//! Per-step P_MB of agent 0 in the hybrid variant, plus how the reliability
//! counts evolve over training.
//!
//!     cargo run --release --example arbitration_trace

use pitnav::harness::{run_training_on, StepEvent};
use pitnav::planner::System;
use pitnav::{ExperimentConfig, Variant};

fn main() -> pitnav::Result<()> {
    let cfg = ExperimentConfig {
        variant: Variant::PitMfMb,
        n_episodes: 300,
        seed: 1,
        trajectory_every: 0,
        ..ExperimentConfig::default()
    };
    let map = cfg.load_map()?;
    let mut last = None;
    let mut obs = |e: &StepEvent<'_>| {
        if e.agent != 0 {
            return;
        }
        if e.step == 0 && e.episode.is_multiple_of(50) {
            let r = &e.learner.reliability;
            println!(
                "episode {:>3}: P_MB {:.4}  chi_MB {:>10.2}  chi_MF {:>6.3}  MB counts {:?}  MF counts {:?}",
                e.episode,
                r.p_mb,
                r.chi(System::ModelBased),
                r.chi(System::ModelFree),
                r.lam_mb,
                r.lam_mf
            );
        }
        last = Some((e.episode, e.step, e.spe, e.delta_q, e.p_mb));
    };
    let run = run_training_on(&cfg, map, &mut obs)?;
    if let Some((ep, step, spe, dq, p)) = last {
        println!("last step: episode {ep} step {step} spe {spe:?} rpe {dq:.4} P_MB {p:?}");
    }
    let means: Vec<String> = run
        .records
        .iter()
        .step_by(25)
        .map(|r| {
            format!(
                "{:.3}",
                r.mean_pmb.iter().sum::<f64>() / r.mean_pmb.len() as f64
            )
        })
        .collect();
    println!("episode-mean P_MB every 25 episodes: {}", means.join(" "));
    Ok(())
}
