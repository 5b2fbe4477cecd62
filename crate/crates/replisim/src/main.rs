use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Parser;

use replisim::cli::{
    parse_policy_label, run_single, run_sweep, ExperimentConfig, PolicyConfig, RlConfig,
    SweepSpec,
};
use replisim::sim::BalancingMode;

/// Trace-driven simulator of DAG workflow replication on a multi-use
/// cluster: single runs or (φ × policy × seed) sweeps.
#[derive(Parser, Debug)]
#[command(name = "replisim", version, about)]
struct Args {
    /// Experiment config JSON; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,

    /// Policy override: single, fixed:N, rl, or rl:N.
    #[arg(long)]
    policy: Option<String>,

    /// Contingency proportion φ override.
    #[arg(long)]
    phi: Option<f64>,

    /// Contingency mode override: balanced (φ′) or current (φ″).
    #[arg(long)]
    balancing: Option<String>,

    /// Replica cap override for the rl policy.
    #[arg(long = "max-replicas")]
    max_replicas: Option<u8>,

    /// Sweep spec JSON; presence switches to sweep mode.
    #[arg(long)]
    sweep: Option<PathBuf>,

    /// Parallel workers for sweeps.
    #[arg(long, default_value_t = 4)]
    workers: usize,

    /// Output directory (REPLISIM_OUT overrides this flag).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn apply_overrides(cfg: &mut ExperimentConfig, args: &Args) -> Result<()> {
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(phi) = args.phi {
        cfg.phi = phi;
    }
    if let Some(balancing) = &args.balancing {
        cfg.balancing = match balancing.as_str() {
            "balanced" => BalancingMode::Balanced,
            "current" => BalancingMode::Current,
            other => bail!("unknown balancing mode `{other}` (expected balanced or current)"),
        };
    }
    if let Some(label) = &args.policy {
        let base_rl = match &cfg.policy {
            PolicyConfig::Rl(rl) => rl.clone(),
            _ => RlConfig::default(),
        };
        cfg.policy = parse_policy_label(label, &base_rl)?;
    }
    if let Some(max) = args.max_replicas {
        match &mut cfg.policy {
            PolicyConfig::Rl(rl) => rl.max_replicas = max,
            _ => bail!("--max-replicas applies to the rl policy; use --policy fixed:N instead"),
        }
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if let Ok(out) = std::env::var("REPLISIM_OUT") {
        if !out.is_empty() {
            cfg.out_dir = PathBuf::from(out);
        }
    }
    cfg.validate()
}

fn main() -> Result<()> {
    let args = Args::parse();
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    apply_overrides(&mut cfg, &args)?;

    match &args.sweep {
        Some(path) => {
            let spec = SweepSpec::load(path)?;
            let summary = run_sweep(&cfg, &spec, args.workers)?;
            println!(
                "sweep: {} runs ({} failed), {} rows -> {}",
                summary.runs,
                summary.failures,
                summary.rows,
                cfg.out_dir.join("sweep.csv").display()
            );
        }
        None => {
            let summary = run_single(&cfg)?;
            println!("{} out={}", summary.one_line(), cfg.out_dir.display());
        }
    }
    Ok(())
}
