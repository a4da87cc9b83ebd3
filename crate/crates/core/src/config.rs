//! One JSON file configuring every stage. Unknown keys are rejected and
//! missing sections take their defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SplitSpec;
use crate::embed::WalkConfig;
use crate::granger::TestKind;
use crate::models::{EmotionConfig, GruConfig, YunConfig};
use crate::series::Bin;
use crate::synth::SynthConfig;
use crate::textproc::{ActivityMode, KeywordSet};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: at `{field}`: {message}")]
    Parse { path: String, field: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphSection {
    /// Only mentions made in activity posts create edges.
    pub restrict_to_activity_posts: bool,
}

impl Default for GraphSection {
    fn default() -> Self {
        Self { restrict_to_activity_posts: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesSection {
    pub mode: ActivityMode,
    pub bin: Bin,
    pub normalize: bool,
}

impl Default for SeriesSection {
    fn default() -> Self {
        Self { mode: ActivityMode::FirstHandOnly, bin: Bin::Day, normalize: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrangerSection {
    pub lags: Vec<usize>,
    pub alpha: f64,
    pub headline_lag: usize,
    pub test: TestKind,
    pub bonferroni: bool,
}

impl Default for GrangerSection {
    fn default() -> Self {
        Self { lags: vec![1, 2, 3, 4, 5], alpha: 0.05, headline_lag: 5, test: TestKind::F, bonferroni: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Overrides every per-stage seed when set.
    pub seed: Option<u64>,
    pub keywords: KeywordSet,
    pub split: SplitSpec,
    pub graph: GraphSection,
    pub node_embedding: WalkConfig,
    pub word_embedding: WalkConfig,
    pub yun: YunConfig,
    pub emotion: EmotionConfig,
    pub gru: GruConfig,
    pub series: SeriesSection,
    pub granger: GrangerSection,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let yun = YunConfig::default();
        Self {
            seed: None,
            keywords: KeywordSet::default(),
            split: SplitSpec::default(),
            graph: GraphSection::default(),
            node_embedding: WalkConfig { dim: yun.node_dim, ..WalkConfig::default() },
            word_embedding: WalkConfig { dim: yun.word_dim, window: 5, ..WalkConfig::default() },
            yun,
            emotion: EmotionConfig::default(),
            gru: GruConfig::default(),
            series: SeriesSection::default(),
            granger: GrangerSection::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Narrow models and short walks for laptop-scale runs.
    pub fn desk() -> Self {
        let yun = YunConfig::desk();
        Self {
            node_embedding: WalkConfig { dim: yun.node_dim, walks_per_node: 5, walk_length: 40, ..WalkConfig::default() },
            word_embedding: WalkConfig { dim: yun.word_dim, window: 5, epochs: 3, ..WalkConfig::default() },
            yun,
            emotion: EmotionConfig::desk(),
            gru: GruConfig::desk(),
            ..Self::default()
        }
    }

    pub fn from_json(text: &str, path: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
            path: path.to_string(),
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg.seeded())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: shown.clone(), source })?;
        Self::from_json(&text, &shown)
    }

    /// Pushes `seed` into every stage.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self.seeded()
    }

    fn seeded(mut self) -> Self {
        if let Some(s) = self.seed {
            self.split.seed = s;
            self.node_embedding.seed = s;
            self.word_embedding.seed = s;
            self.yun.seed = s;
            self.emotion.seed = s;
            self.gru.seed = s;
            self.synth.seed = s;
        }
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        let wrap = |r: Result<(), String>| r.map_err(ConfigError::Invalid);
        wrap(self.keywords.validate().map_err(|e| e.to_string()))?;
        wrap(self.split.validate().map_err(|e| e.to_string()))?;
        wrap(self.node_embedding.validate().map_err(|e| format!("node_embedding: {e}")))?;
        wrap(self.word_embedding.validate().map_err(|e| format!("word_embedding: {e}")))?;
        wrap(self.yun.validate().map_err(|e| format!("yun: {e}")))?;
        wrap(self.emotion.validate().map_err(|e| format!("emotion: {e}")))?;
        wrap(self.gru.validate().map_err(|e| format!("gru: {e}")))?;
        wrap(self.synth.validate().map_err(|e| format!("synth: {e}")))?;
        if self.word_embedding.dim != self.yun.word_dim {
            return invalid(format!(
                "word_embedding.dim ({}) must equal yun.word_dim ({})",
                self.word_embedding.dim, self.yun.word_dim
            ));
        }
        if self.node_embedding.dim != self.yun.node_dim {
            return invalid(format!(
                "node_embedding.dim ({}) must equal yun.node_dim ({})",
                self.node_embedding.dim, self.yun.node_dim
            ));
        }
        let g = &self.granger;
        if g.lags.is_empty() || g.lags.contains(&0) {
            return invalid("granger.lags must be non-empty and positive".into());
        }
        if !g.lags.contains(&g.headline_lag) {
            return invalid(format!("granger.headline_lag {} is not among the lags", g.headline_lag));
        }
        if !(g.alpha > 0.0 && g.alpha < 1.0) {
            return invalid("granger.alpha must lie in (0, 1)".into());
        }
        Ok(())
    }
}
