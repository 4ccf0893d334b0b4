//! Experiment configuration: JSON with sections {field, params, channel,
//! experiment}, validated against the module preconditions before any run.

use rankpir_core::channel::{ChannelConfig, ChannelMode};
use rankpir_core::ff::{FfError, FieldSpec};
use rankpir_core::storage::{SchemeVariant, SystemParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Field(#[from] FfError),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FieldConfig {
    pub p: u64,
    pub b: usize,
    pub s: usize,
    /// Coefficients c_0..c_s of the irreducible modulus, low-to-high.
    pub modulus: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_modulus: Option<Vec<u64>>,
}

impl FieldConfig {
    pub fn build(&self) -> Result<FieldSpec, ConfigError> {
        Ok(FieldSpec::with_base_modulus(
            self.p,
            self.b,
            self.s,
            &self.modulus,
            self.base_modulus.as_deref(),
        )?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VariantConfig {
    Errorfree,
    Errored { eps: usize, tau: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ParamsConfig {
    pub m: usize,
    pub l: usize,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub variant: VariantConfig,
}

impl ParamsConfig {
    pub fn build(&self) -> SystemParams {
        let variant = match self.variant {
            VariantConfig::Errorfree => SchemeVariant::ErrorFree,
            VariantConfig::Errored { eps, tau } => SchemeVariant::Errored { eps, tau },
        };
        SystemParams { m: self.m, l: self.l, n: self.n, k: self.k, t: self.t, variant }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ChannelModeConfig {
    Identity,
    Uniform,
    RankProfile { uplink_ranks: Vec<usize>, downlink_ranks: Vec<usize> },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ChannelConfigSection {
    #[serde(flatten)]
    pub mode: ChannelModeConfig,
    #[serde(default)]
    pub eps_up: usize,
    #[serde(default)]
    pub eps_down: usize,
    #[serde(default)]
    pub tau: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ChannelConfigSection {
    pub fn build(&self) -> ChannelConfig {
        let mode = match &self.mode {
            ChannelModeConfig::Identity => ChannelMode::Identity,
            ChannelModeConfig::Uniform => ChannelMode::Uniform,
            ChannelModeConfig::RankProfile { uplink_ranks, downlink_ranks } => {
                ChannelMode::RankProfile {
                    uplink_ranks: uplink_ranks.clone(),
                    downlink_ranks: downlink_ranks.clone(),
                }
            }
        };
        ChannelConfig {
            mode,
            eps_up: self.eps_up,
            eps_down: self.eps_down,
            tau: self.tau,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Roundtrip,
    SuccessProbability,
    RateSweep,
    PrivacyTest,
    DecoderRegion,
}

/// Where the stored file set comes from: deterministic generation from the
/// experiment seed, or a binary blob on disk.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FilesConfig {
    #[default]
    Random,
    Blob {
        path: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_file_index")]
    pub file_index: usize,
    #[serde(default)]
    pub files: FilesConfig,
}

fn default_trials() -> u64 {
    100
}

fn default_file_index() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub field: FieldConfig,
    pub params: ParamsConfig,
    pub channel: ChannelConfigSection,
    pub experiment: ExperimentSection,
}

impl ExperimentConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Validate every section against the module preconditions.
    pub fn validate(&self) -> Result<(FieldSpec, SystemParams, ChannelConfig), ConfigError> {
        let field = self.field.build()?;
        let params = self.params.build();
        params.validate(&field).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let channel = self.channel.build();
        channel.validate(&params).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.experiment.trials == 0 {
            return Err(ConfigError::Invalid("trials must be >= 1".into()));
        }
        if self.experiment.file_index == 0 || self.experiment.file_index > params.m {
            return Err(ConfigError::Invalid(format!(
                "file_index {} out of range 1..={}",
                self.experiment.file_index, params.m
            )));
        }
        Ok((field, params, channel))
    }

    /// SHA-256 over the canonical JSON rendering; carried in every result row.
    pub fn digest(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(canon.as_bytes());
        hex::encode(&h.finalize()[..8])
    }
}
