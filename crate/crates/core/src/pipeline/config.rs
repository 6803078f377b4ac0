use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::refactor::{Arm, ModelConfig};
use crate::similarity::CodeBleuWeights;
use crate::stats::DatasetTag;
use crate::verify::SandboxPolicy;

use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub tag: DatasetTag,
    pub path: PathBuf,
    /// Number of (problem, solution) pairs drawn from APPS; ignored for MBPP.
    #[serde(default)]
    pub sample_size: Option<usize>,
    /// Only the first `limit` records are run, after sampling.
    #[serde(default)]
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Needed by `bench` only.
    #[serde(default)]
    pub dataset: Option<DatasetConfig>,
    #[serde(default = "all_arms")]
    pub arms: Vec<Arm>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub sandbox: SandboxPolicy,
    #[serde(default)]
    pub weights: CodeBleuWeights,
    #[serde(default = "one")]
    pub workers: usize,
    /// Concurrent interpreter processes; defaults to `workers`.
    #[serde(default)]
    pub max_children: Option<usize>,
    #[serde(default)]
    pub replay: bool,
    /// Append live responses to `fixtures` as they arrive.
    #[serde(default)]
    pub record: bool,
    #[serde(default)]
    pub fixtures: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Run each reference against its own tests first and skip the ones that fail.
    #[serde(default)]
    pub check_references: bool,
}

fn all_arms() -> Vec<Arm> {
    Arm::ALL.to_vec()
}

fn one() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("run")
}

impl RunConfig {
    pub fn new(tag: DatasetTag, path: impl Into<PathBuf>) -> Self {
        RunConfig {
            dataset: Some(DatasetConfig { tag, path: path.into(), sample_size: None, limit: None }),
            arms: all_arms(),
            model: ModelConfig::default(),
            sandbox: SandboxPolicy::default(),
            weights: CodeBleuWeights::default(),
            workers: 1,
            max_children: None,
            replay: false,
            record: false,
            fixtures: None,
            output_dir: default_output(),
            seed: 0,
            check_references: false,
        }
    }

    /// Parses TOML; relative paths are taken relative to `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut c: RunConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(d) = c.dataset.as_mut() {
            rebase(&mut d.path);
        }
        rebase(&mut c.output_dir);
        if let Some(f) = c.fixtures.as_mut() {
            rebase(f);
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        if self.workers == 0 {
            return bad("workers must be >= 1");
        }
        if self.max_children == Some(0) {
            return bad("max_children must be >= 1");
        }
        if self.arms.is_empty() {
            return bad("no arms selected");
        }
        if self.replay && self.record {
            return bad("replay and record are mutually exclusive");
        }
        if (self.replay || self.record) && self.fixtures.is_none() {
            return bad("replay and record modes need a fixtures path");
        }
        self.model.validate().map_err(PipelineError::Config)?;
        self.sandbox.validate().map_err(PipelineError::Config)?;
        self.weights.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_rebasing() {
        let c = RunConfig::from_toml(
            "fixtures = \"r.jsonl\"\nreplay = true\n[dataset]\ntag = \"mbpp\"\npath = \"d.jsonl\"\n",
            Path::new("/cfg"),
        )
        .unwrap();
        assert_eq!(c.dataset.as_ref().unwrap().path, PathBuf::from("/cfg/d.jsonl"));
        assert_eq!(c.fixtures.as_deref(), Some(Path::new("/cfg/r.jsonl")));
        assert_eq!(c.arms, vec![Arm::Baseline, Arm::Cdd]);
        assert_eq!(c.workers, 1);
        c.validate().unwrap();
    }

    #[test]
    fn invariants() {
        let mut c = RunConfig::new(DatasetTag::Mbpp, "x");
        c.replay = true;
        assert!(c.validate().is_err());
        c.fixtures = Some("f".into());
        c.validate().unwrap();
        c.workers = 0;
        assert!(c.validate().is_err());
        c.workers = 2;
        c.sandbox.network_allowed = true;
        assert!(c.validate().is_err());
        assert!(RunConfig::from_toml("bogus = 1\n[dataset]\ntag = \"mbpp\"\npath = \"p\"\n", Path::new(".")).is_err());
    }
}
