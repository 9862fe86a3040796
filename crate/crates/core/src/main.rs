use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pitnav::harness::export::{
    self, read_json, write_csv, write_json, AGGREGATE_HEADER, TABLES_HEADER, TRAJ_HEADER,
};
use pitnav::harness::{
    run_monte_carlo, run_training, ExperimentConfig, ExportFormat, LearnerState, RunResult, Variant,
};
use pitnav::{Error, Result};

#[derive(Parser)]
#[command(
    name = "pitnav",
    version,
    about = "Multi-agent PIT / Dyna-Q target localization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one run and write its records, config and learned tables.
    Train(Common),
    /// Monte Carlo runs per variant, with per-episode aggregates.
    Sweep(Common),
    /// Emit traj.csv from a saved training run.
    Replay {
        #[command(flatten)]
        io: SavedRun,
        /// Only this episode.
        #[arg(long)]
        episode: Option<usize>,
    },
    /// Emit tables.csv (Q_MF, Q_MB, V per agent, cell and action).
    DumpTables {
        #[command(flatten)]
        io: SavedRun,
    },
}

#[derive(Args)]
struct Common {
    /// key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// instrumental-mf, pit-mf, instrumental-mfmb or pit-mfmb.
    #[arg(long)]
    variant: Option<Variant>,
    /// Drop the motivation signal from rewards and temperature.
    #[arg(long)]
    no_motivation: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Monte Carlo run count.
    #[arg(long)]
    runs: Option<usize>,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct SavedRun {
    /// Directory written by `train`.
    #[arg(long)]
    run: PathBuf,
    /// Defaults to the run directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| pitnav::ConfigError::Syntax {
                    line: 0,
                    text: kv.clone(),
                })?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(v) = self.variant {
            cfg.variant = v;
        }
        if self.no_motivation {
            cfg.motivation_enabled = false;
        }
        if let Some(n) = self.runs {
            cfg.monte_carlo_runs = n;
        }
        Ok(cfg)
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn train(c: &Common) -> Result<()> {
    let cfg = c.config()?;
    let t = run_training(&cfg)?;
    create_dir(&c.out)?;
    let runs = [RunResult {
        run: 0,
        seed: cfg.seed,
        records: t.records,
    }];
    export::export(&runs, ExportFormat::Csv, &c.out)?;
    write_text(&c.out.join("config.cfg"), &cfg.to_text())?;
    write_json(&c.out.join("run.json"), &runs[..])?;
    write_json(&c.out.join("state.json"), &t.state)?;
    let solved = runs[0].records.iter().filter(|r| r.success).count();
    println!(
        "{}: {} episodes, {} reached the PEB goal, output in {}",
        cfg.variant,
        runs[0].records.len(),
        solved,
        c.out.display()
    );
    Ok(())
}

fn sweep(c: &Common) -> Result<()> {
    let base = c.config()?;
    let variants: Vec<Variant> = match c.variant {
        Some(v) => vec![v],
        None => Variant::ALL.to_vec(),
    };
    for v in variants {
        let cfg = ExperimentConfig {
            variant: v,
            ..base.clone()
        };
        let dir = c.out.join(v.name());
        let mc = run_monte_carlo(&cfg)?;
        export::export(&mc.runs, ExportFormat::Csv, &dir)?;
        write_csv(
            &dir.join("aggregate.csv"),
            &AGGREGATE_HEADER,
            &export::aggregate_rows(&mc.aggregate),
        )?;
        write_text(&dir.join("config.cfg"), &cfg.to_text())?;
        let last = mc.aggregate.last();
        println!(
            "{v}: {} runs, final mean steps {:.1}, output in {}",
            mc.runs.len(),
            last.map_or(f64::NAN, |a| a.steps.mean),
            dir.display()
        );
    }
    Ok(())
}

fn replay(io: &SavedRun, episode: Option<usize>) -> Result<()> {
    let mut runs: Vec<RunResult> = read_json(&io.run.join("run.json"))?;
    if let Some(e) = episode {
        for r in &mut runs {
            r.records.retain(|rec| rec.episode == e);
        }
    }
    let out = io.out.clone().unwrap_or_else(|| io.run.clone());
    create_dir(&out)?;
    let rows = export::traj_rows(&runs);
    let path = out.join("traj.csv");
    write_csv(&path, &TRAJ_HEADER, &rows)?;
    println!(
        "{} trajectory points written to {}",
        rows.len(),
        path.display()
    );
    Ok(())
}

fn dump_tables(io: &SavedRun) -> Result<()> {
    let cfg = ExperimentConfig::load(io.run.join("config.cfg"))?;
    let map = cfg.load_map()?;
    let state: LearnerState = read_json(&io.run.join("state.json"))?;
    let out = io.out.clone().unwrap_or_else(|| io.run.clone());
    create_dir(&out)?;
    let path = out.join("tables.csv");
    write_csv(&path, &TABLES_HEADER, &export::table_rows(&map, &state))?;
    println!("tables written to {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Train(c) => train(c),
        Command::Sweep(c) => sweep(c),
        Command::Replay { io, episode } => replay(io, *episode),
        Command::DumpTables { io } => dump_tables(io),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
