//! Experiment configuration (JSON) and sweep specifications.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::policy::{EpsilonSchedule, PolicyKind, QTable, RlPolicy};
use crate::sim::{BalancingMode, ClusterConfig};
use crate::workload::WorkloadConfig;

/// Hard cap on the replica count, fixed or learned.
pub const MAX_REPLICA_CAP: u8 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonConfig {
    Constant { value: f64 },
    InitialHigh { eps1: f64, eps2: f64, switch_after: u64 },
    DriftWindow { window: usize, deviation: f64, eps_hi: f64, eps_lo: f64 },
}

impl Default for EpsilonConfig {
    fn default() -> Self {
        EpsilonConfig::InitialHigh { eps1: 0.5, eps2: 0.05, switch_after: 1000 }
    }
}

impl EpsilonConfig {
    pub fn build(&self, actions: u8) -> EpsilonSchedule {
        match *self {
            EpsilonConfig::Constant { value } => EpsilonSchedule::constant(value),
            EpsilonConfig::InitialHigh { eps1, eps2, switch_after } => {
                EpsilonSchedule::initial_high(eps1, eps2, switch_after)
            }
            EpsilonConfig::DriftWindow { window, deviation, eps_hi, eps_lo } => {
                EpsilonSchedule::drift_window(window, deviation, eps_hi, eps_lo, actions)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&v) {
                bail!("epsilon parameter {name} = {v} outside [0, 1]");
            }
            Ok(())
        };
        match *self {
            EpsilonConfig::Constant { value } => check("value", value),
            EpsilonConfig::InitialHigh { eps1, eps2, .. } => {
                check("eps1", eps1)?;
                check("eps2", eps2)
            }
            EpsilonConfig::DriftWindow { window, eps_hi, eps_lo, deviation } => {
                if window == 0 {
                    bail!("drift window must be at least 1");
                }
                if !deviation.is_finite() || deviation < 0.0 {
                    bail!("drift deviation must be a non-negative number");
                }
                check("eps_hi", eps_hi)?;
                check("eps_lo", eps_lo)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RlConfig {
    pub max_replicas: u8,
    /// Interior contingency bins; the state space is 24·(n+2).
    pub n: u32,
    /// Upper edge P of the contingency discretisation.
    pub p_max: f64,
    pub epsilon: EpsilonConfig,
    /// Warm-start table, as exported by a previous run.
    pub qtable_init: Option<PathBuf>,
    /// Extra full passes over the workload before the measured run,
    /// carrying the learned table forward.
    pub train_epochs: u32,
}

impl Default for RlConfig {
    fn default() -> Self {
        RlConfig {
            max_replicas: MAX_REPLICA_CAP,
            n: 10,
            p_max: 1.0,
            epsilon: EpsilonConfig::default(),
            qtable_init: None,
            train_epochs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyConfig {
    Single,
    Fixed { replicas: u8 },
    Rl(RlConfig),
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig::Single
    }
}

impl PolicyConfig {
    pub fn label(&self) -> String {
        match self {
            PolicyConfig::Single => "single".into(),
            PolicyConfig::Fixed { replicas } => format!("fixed:{replicas}"),
            PolicyConfig::Rl(rl) => format!("rl:{}", rl.max_replicas),
        }
    }

    /// Builds the runtime policy, loading any warm-start table.
    pub fn build(&self) -> Result<PolicyKind> {
        Ok(match self {
            PolicyConfig::Single => PolicyKind::Single,
            PolicyConfig::Fixed { replicas } => PolicyKind::Fixed(*replicas),
            PolicyConfig::Rl(rl) => {
                let table = match &rl.qtable_init {
                    Some(path) => {
                        let file = std::fs::File::open(path)
                            .with_context(|| format!("opening qtable {}", path.display()))?;
                        crate::policy::qtable_io::import_csv(file, rl.n, rl.p_max, rl.max_replicas)
                            .with_context(|| format!("loading qtable {}", path.display()))?
                    }
                    None => QTable::new(rl.n, rl.p_max, rl.max_replicas),
                };
                let schedule = rl.epsilon.build(rl.max_replicas);
                PolicyKind::Rl(Box::new(RlPolicy::new(table, schedule)))
            }
        })
    }

    fn validate(&self) -> Result<()> {
        match self {
            PolicyConfig::Single => Ok(()),
            PolicyConfig::Fixed { replicas } => {
                if *replicas < 1 || *replicas > MAX_REPLICA_CAP {
                    bail!("fixed replica count must be 1..={MAX_REPLICA_CAP}");
                }
                Ok(())
            }
            PolicyConfig::Rl(rl) => {
                if rl.max_replicas < 1 || rl.max_replicas > MAX_REPLICA_CAP {
                    bail!("max_replicas must be 1..={MAX_REPLICA_CAP}");
                }
                if rl.n == 0 {
                    bail!("n must be at least 1");
                }
                if !(rl.p_max.is_finite() && rl.p_max > 0.0) {
                    bail!("p_max must be positive");
                }
                rl.epsilon.validate()
            }
        }
    }
}

/// Where the workload comes from: generated on the fly (the generator's
/// cluster-shape fields are overwritten from the cluster config) or read
/// from files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkloadSource {
    Generate(WorkloadConfig),
    Files { workload: PathBuf, interactive: PathBuf },
}

impl Default for WorkloadSource {
    fn default() -> Self {
        WorkloadSource::Generate(WorkloadConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// The user contingency proportion φ applied to every workflow.
    pub phi: f64,
    /// Grid of P thresholds for the success summary.
    pub p_grid: Vec<f64>,
    pub balancing: BalancingMode,
    pub policy: PolicyConfig,
    pub cluster: ClusterConfig,
    pub workload: WorkloadSource,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 42,
            phi: 0.5,
            p_grid: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 2.0],
            balancing: BalancingMode::Balanced,
            policy: PolicyConfig::Single,
            cluster: ClusterConfig::default(),
            workload: WorkloadSource::default(),
            out_dir: PathBuf::from("replisim-out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).context("parsing experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json_str(&text)
            .with_context(|| format!("in config file {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi.is_finite() && self.phi >= 0.0) {
            bail!("phi must be a non-negative number, got {}", self.phi);
        }
        if self.p_grid.is_empty() {
            bail!("p_grid must not be empty");
        }
        if self.p_grid.iter().any(|p| !p.is_finite()) {
            bail!("p_grid entries must be finite");
        }
        self.policy.validate()?;
        if let WorkloadSource::Generate(gen) = &self.workload {
            if !(0.0..=1.0).contains(&gen.workflow_fraction) {
                bail!("workflow_fraction must lie in [0, 1]");
            }
        }
        Ok(())
    }

    /// Stable fingerprint of the resolved run configuration.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serialises");
        format!("{:016x}", fnv1a64(canonical.as_bytes()))
    }
}

/// Axes of a sweep. Empty axes fall back to the base config's value, so
/// an empty spec degenerates to a single run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub phi: Vec<f64>,
    /// Policy labels: `single`, `fixed:N`, `rl`, `rl:N`.
    pub policies: Vec<String>,
    pub seeds: Vec<u64>,
}

impl SweepSpec {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("parsing sweep spec")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading sweep spec {}", path.display()))?;
        Self::from_json_str(&text)
            .with_context(|| format!("in sweep file {}", path.display()))
    }
}

/// Parses a policy label against a base RL configuration (which supplies
/// the bandit parameters for `rl` labels).
pub fn parse_policy_label(label: &str, base_rl: &RlConfig) -> Result<PolicyConfig> {
    let cfg = if label == "single" {
        PolicyConfig::Single
    } else if let Some(n) = label.strip_prefix("fixed:") {
        let replicas: u8 = n.parse().with_context(|| format!("bad replica count in `{label}`"))?;
        PolicyConfig::Fixed { replicas }
    } else if label == "rl" {
        PolicyConfig::Rl(base_rl.clone())
    } else if let Some(n) = label.strip_prefix("rl:") {
        let max: u8 = n.parse().with_context(|| format!("bad replica cap in `{label}`"))?;
        PolicyConfig::Rl(RlConfig { max_replicas: max, ..base_rl.clone() })
    } else {
        bail!("unknown policy `{label}` (expected single, fixed:N, rl, or rl:N)");
    };
    cfg.validate()?;
    Ok(cfg)
}

pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Seed for one grid point: workload and engine randomness depend on the
/// base seed, φ and the sweep seed, but not on the policy, so policies
/// compete on an identical trace.
pub fn derive_point_seed(base_seed: u64, phi: f64, sweep_seed: u64) -> u64 {
    let mut bytes = Vec::with_capacity(24);
    bytes.extend_from_slice(&base_seed.to_le_bytes());
    bytes.extend_from_slice(&phi.to_bits().to_le_bytes());
    bytes.extend_from_slice(&sweep_seed.to_le_bytes());
    fnv1a64(&bytes)
}
