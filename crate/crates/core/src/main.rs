use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use cachelink::sim::{self, SchedulerKind, SimConfig, SweepParam};

#[derive(Parser)]
#[command(name = "cachelink", version, about = "Link scheduling and power allocation for wireless caching networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// bp-matching, bp-raw, approx-bp-matching, exhaustive, cluster1 or cluster2.
    #[arg(long)]
    scheduler: Option<SchedulerKind>,
    /// Horizon in slots.
    #[arg(long)]
    slots: Option<u64>,
    /// Dotted-key override in TOML syntax, e.g. `phy.bandwidth_hz=4e6`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Common {
    fn load(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => SimConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            None => SimConfig::default(),
        };
        for o in &self.overrides {
            cfg.set(o)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(kind) = self.scheduler {
            cfg.scheduler = kind;
        }
        if let Some(slots) = self.slots {
            cfg.slots = slots;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scheduler and write metrics.csv and summary.json.
    Run(Common),
    /// Repeat a run over parameter values (and seeds) and write sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// v, a_max or delay-threshold.
        #[arg(long)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Seeds to average over; defaults to the configured seed.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
    },
    /// Run two schedulers on a shared topology and seed.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        against: SchedulerKind,
    },
    /// Write the scenario JSON for the configured topology.
    GenTopology(Common),
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run(common) => {
            let cfg = common.load()?;
            let out = sim::run_simulation(&cfg)?;
            sim::write_outputs(&out, &common.out)?;
            println!("{}", serde_json::to_string_pretty(&out.summary)?);
        }
        Command::Sweep { common, param, values, seeds } => {
            let cfg = common.load()?;
            let seeds = if seeds.is_empty() { vec![cfg.seed] } else { seeds };
            let rows = sim::sweep(&cfg, param, &values, &seeds)?;
            std::fs::create_dir_all(&common.out)?;
            sim::write_sweep_csv(&rows, BufWriter::new(File::create(common.out.join("sweep.csv"))?))?;
            std::fs::write(common.out.join("sweep.json"), serde_json::to_string_pretty(&rows)?)?;
            for r in &rows {
                println!(
                    "{:>10} avg_queue {:>10.3} avg_power {:>8.4} stable {}/{}",
                    r.value, r.avg_queue, r.avg_power, r.stable_runs, r.runs
                );
            }
        }
        Command::Compare { common, against } => {
            let cfg = common.load()?;
            let [a, b] = sim::compare(&cfg, cfg.scheduler, against)?;
            for out in [&a, &b] {
                sim::write_outputs(out, &common.out.join(out.summary.scheduler.name()))?;
            }
            let both = serde_json::json!({ "first": a.summary, "second": b.summary });
            std::fs::write(common.out.join("compare.json"), serde_json::to_string_pretty(&both)?)?;
            for s in [&a.summary, &b.summary] {
                println!(
                    "{:<20} avg_queue {:>10.3} avg_power {:>8.4} stable {}",
                    s.scheduler.name(),
                    s.avg_queue,
                    s.avg_power,
                    s.stability.stable
                );
            }
        }
        Command::GenTopology(common) => {
            let cfg = common.load()?;
            let topology = sim::build_topology(&cfg)?;
            let path = if common.out.extension().is_some_and(|e| e == "json") {
                common.out.clone()
            } else {
                std::fs::create_dir_all(&common.out)?;
                common.out.join("topology.json")
            };
            std::fs::write(&path, topology.to_json()? + "\n")?;
            eprintln!(
                "{} nodes, {} users, {} edges -> {}",
                topology.node_count(),
                topology.user_count(),
                topology.edge_count(),
                path.display()
            );
        }
    }
    Ok(())
}
