//! Experiment configuration, shared by the command line and `run --config`.
//!
//! ```json
//! {"command": "el-estimate", "group": "u4", "seed": 7, "format": "json"}
//! ```

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use lielength::explength::SearchBudget;
use lielength::matrix::LieNorm;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum NormChoice {
    OperatorL1,
    Spectral,
}

impl From<NormChoice> for LieNorm {
    fn from(n: NormChoice) -> Self {
        match n {
            NormChoice::OperatorL1 => LieNorm::OperatorL1,
            NormChoice::Spectral => LieNorm::Spectral,
        }
    }
}

/// A group element to estimate: a random sample named by `group`
/// (`u<n>`, `gl<n>`, `sl<n>`, `en<n>`, `dplus`) or a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct GroupTarget {
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub norm: Option<NormChoice>,
    #[arg(skip)]
    pub budget: SearchBudget,
}

impl Default for GroupTarget {
    fn default() -> Self {
        Self {
            group: Some("u4".into()),
            input: None,
            norm: None,
            budget: SearchBudget::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct TrotterParams {
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub samples: usize,
    /// Upper bound on `||X||` and `||Y||`.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [16u64, 32, 64, 128, 256, 512])]
    pub ns: Vec<u64>,
}

impl Default for TrotterParams {
    fn default() -> Self {
        Self {
            dim: 3,
            samples: 5,
            radius: 1.0,
            ns: vec![16, 32, 64, 128, 256, 512],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct InputParams {
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct SandwichParams {
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 8, 16])]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0])]
    pub ps: Vec<f64>,
    /// Random self-adjoint samples per dimension.
    #[arg(long, default_value_t = 25)]
    pub samples: usize,
}

impl Default for SandwichParams {
    fn default() -> Self {
        Self {
            dims: vec![2, 4, 8, 16],
            ps: vec![1.0, 2.0, 4.0],
            samples: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct ChainParams {
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8])]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0])]
    pub ps: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// `Delta` is `d(u, 1)` plus this margin.
    #[arg(long, default_value_t = 0.5)]
    pub margin: f64,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            dims: vec![4, 8],
            ps: vec![1.0, 2.0],
            samples: 10,
            delta: 0.5,
            margin: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct WitnessParams {
    #[arg(long, default_value_t = 6)]
    pub dim: usize,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 10])]
    pub ns: Vec<u32>,
}

impl Default for WitnessParams {
    fn default() -> Self {
        Self {
            dim: 6,
            p: 2.0,
            samples: 50,
            ns: vec![1, 10],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct IdentityParams {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
}

impl Default for IdentityParams {
    fn default() -> Self {
        Self { n: 3, samples: 100 }
    }
}

/// A traceless matrix from a JSON file, or a random one of size `n` over C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct DecomposeParams {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
}

impl Default for DecomposeParams {
    fn default() -> Self {
        Self { input: None, n: 3 }
    }
}

/// An elementary word over C (one-based indices) from a JSON file, or
/// `samples` random words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct HsdetParams {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
}

impl Default for HsdetParams {
    fn default() -> Self {
        Self {
            input: None,
            n: 2,
            samples: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct UnboundedParams {
    #[arg(long, value_delimiter = ',', default_values_t = [1u64, 10, 100, 1_000_000])]
    pub ms: Vec<u64>,
}

impl Default for UnboundedParams {
    fn default() -> Self {
        Self {
            ms: vec![1, 10, 100, 1_000_000],
        }
    }
}

/// A sampled metric space (CSV `id,id,distance` or JSON) and the radii of
/// the maximality checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct CoarseParams {
    #[arg(long)]
    pub input: PathBuf,
    /// Origin point id; defaults to the first point.
    #[arg(long)]
    pub origin: Option<String>,
    #[arg(long = "big-delta", default_value_t = 2.0)]
    #[serde(default = "two")]
    pub big_delta: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub delta: f64,
    #[arg(long = "k-limit")]
    #[serde(default)]
    pub k_limit: Option<usize>,
    /// Constant of the large-scale geodesic check.
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "two")]
    pub k: f64,
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Experiment {
    ElEstimate(GroupTarget),
    ElBracket(GroupTarget),
    RelEstimate(GroupTarget),
    Trotter(TrotterParams),
    CelCompute(InputParams),
    SchattenSandwich(SandwichParams),
    SchattenChain(ChainParams),
    SchattenWitness(WitnessParams),
    EnIdentities(IdentityParams),
    EnDecompose(DecomposeParams),
    EnHsdet(HsdetParams),
    EnWitness(UnboundedParams),
    Coarse(CoarseParams),
    SuiteAcceptance,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::ElEstimate(_) => "el estimate",
            Experiment::ElBracket(_) => "el bracket",
            Experiment::RelEstimate(_) => "rel estimate",
            Experiment::Trotter(_) => "trotter",
            Experiment::CelCompute(_) => "cel compute",
            Experiment::SchattenSandwich(_) => "schatten sandwich",
            Experiment::SchattenChain(_) => "schatten chain",
            Experiment::SchattenWitness(_) => "schatten witness",
            Experiment::EnIdentities(_) => "en identities",
            Experiment::EnDecompose(_) => "en decompose",
            Experiment::EnHsdet(_) => "en hsdet",
            Experiment::EnWitness(_) => "en witness",
            Experiment::Coarse(_) => "coarse",
            Experiment::SuiteAcceptance => "suite acceptance",
        }
    }
}

fn default_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    /// Absolute and relative residual tolerance for certificates.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            seed: 0,
            tol: default_tol(),
            out: None,
            format: OutputFormat::Json,
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("malformed config: {e}")))?;
        if !(cfg.tol > 0.0) {
            return Err(CliError::Usage("tol must be positive".into()));
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"command":"el-estimate","group":"gl3","seed":7}"#).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.tol, 1e-8);
        let Experiment::ElEstimate(t) = &cfg.experiment else { panic!() };
        assert_eq!(t.group.as_deref(), Some("gl3"));
        assert_eq!(t.budget, SearchBudget::default());
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        let suite = ExperimentConfig::from_json(r#"{"command":"suite-acceptance","format":"csv"}"#).unwrap();
        assert_eq!(suite.experiment, Experiment::SuiteAcceptance);
        assert_eq!(suite.format, OutputFormat::Csv);
    }

    #[test]
    fn malformed_configs_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"command":"nope"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"command":"coarse"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"command":"trotter","tol":0}"#).is_err());
    }
}
