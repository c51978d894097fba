use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::frames::FramePattern;
use crate::encoding::NormalizationConfig;
use crate::error::{Error, Result};
use crate::flow::FlowParams;
use crate::gate::GateParams;
use crate::stimulus::DotParams;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EncodeConfig {
    /// Attenuate the value channel by the coherence gate.
    pub gated: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IoConfig {
    /// Source frame file names, a single `%0Nd` placeholder.
    pub frame_pattern: String,
    /// Worker threads for per-video parallelism; 0 uses all cores.
    pub workers: usize,
}

impl Default for IoConfig {
    fn default() -> Self {
        IoConfig {
            frame_pattern: "frame_%06d.png".into(),
            workers: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Provenance {
    /// Free text; record where any non-default hyperparameter came from.
    pub notes: String,
}

/// Everything a run depends on. Serialised as TOML; unknown keys are
/// rejected so that misspelt hyperparameters fail loudly.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub flow: FlowParams,
    pub normalization: NormalizationConfig,
    pub gate: GateParams,
    pub encode: EncodeConfig,
    pub dots: DotParams,
    pub noise: NoiseConfig,
    pub io: IoConfig,
    pub provenance: Provenance,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.flow.validate()?;
        self.normalization.validate()?;
        self.gate.validate()?;
        if self.dots.lifetime == 0 {
            return Err(Error::Parameter("dots.lifetime must be >= 1".into()));
        }
        if !(self.dots.radius >= 0.0) {
            return Err(Error::Parameter("dots.radius must be >= 0".into()));
        }
        FramePattern::parse(&self.io.frame_pattern)?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Validation(format!("config: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Validation(m) => Error::Validation(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}
