//! Experiment configuration, the training loop, Monte Carlo runs and export.

pub mod config;
pub mod export;
pub mod monte_carlo;
pub mod sim;

pub use config::{ExperimentConfig, Variant};
pub use export::ExportFormat;
pub use monte_carlo::{aggregate, run_monte_carlo, AggregateRow, MonteCarloResult, RunResult};
pub use sim::{
    run_training, run_training_on, EpisodeMode, EpisodeRecord, LearnerState, Simulation, StepEvent,
    StepObserver, TrainingRun,
};
