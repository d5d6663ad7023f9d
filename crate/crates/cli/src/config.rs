//! Run configuration: a JSON file merged with command-line overrides.

use std::path::{Path, PathBuf};

use paraboost_core::depth::ExternalScorer;
use paraboost_core::paraboost::{FoldPolicy, ParaboostConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    /// Bundle read by `predict`; `train` always writes `<out>/model`.
    pub model: Option<PathBuf>,
    pub out: PathBuf,
    pub folds: usize,
    pub fold_policy: FoldPolicy,
    /// Drives fold assignment and every grid-search split; overrides
    /// `pipeline.seed`.
    pub seed: u64,
    /// Scorer order for the progressive-fusion table of `crossval`.
    pub progressive: Option<Vec<u8>>,
    /// Feature names for `features`; all features when neither this nor
    /// `pipeline.scorers` is set.
    pub feature_names: Option<Vec<String>>,
    pub jobs: Option<usize>,
    /// Feature, camera, SVR grid, scorer set and external command settings.
    pub pipeline: ParaboostConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            manifest: None,
            model: None,
            out: PathBuf::from("paraboost-out"),
            folds: 10,
            fold_policy: FoldPolicy::Random,
            seed: 0,
            progressive: None,
            feature_names: None,
            jobs: None,
            pipeline: ParaboostConfig::default(),
        }
    }
}

/// Flag values; `None` leaves the config file (or default) in place.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub manifest: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub folds: Option<usize>,
    pub fold_policy: Option<String>,
    pub seed: Option<u64>,
    pub scorers: Option<String>,
    pub external_scorer: Option<String>,
    pub jobs: Option<usize>,
    pub progressive: Option<String>,
    pub feature_names: Option<String>,
}

pub fn parse_ids(list: &str) -> Result<Vec<u8>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<u8>()
                .ok()
                .filter(|id| (1..=9).contains(id))
                .ok_or_else(|| CliError::config(format!("scorer id '{s}' is not in 1..=9")))
        })
        .collect()
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("config {}: {e}", path.display())))
    }

    /// Flags win over the file.
    pub fn apply(mut self, o: Overrides) -> Result<Self, CliError> {
        if let Some(v) = o.manifest {
            self.manifest = Some(v);
        }
        if let Some(v) = o.model {
            self.model = Some(v);
        }
        if let Some(v) = o.out {
            self.out = v;
        }
        if let Some(v) = o.folds {
            self.folds = v;
        }
        if let Some(v) = o.fold_policy {
            self.fold_policy = v.parse().map_err(|e: paraboost_core::Error| CliError::config(e.to_string()))?;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.scorers {
            self.pipeline.scorers = Some(parse_ids(&v)?);
        }
        if let Some(v) = o.external_scorer {
            self.pipeline.external =
                Some(ExternalScorer::from_command_line(&v).map_err(|e| CliError::config(e.to_string()))?);
        }
        if let Some(v) = o.jobs {
            self.jobs = Some(v);
        }
        if let Some(v) = o.progressive {
            self.progressive = Some(parse_ids(&v)?);
        }
        if let Some(v) = o.feature_names {
            self.feature_names = Some(v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect());
        }
        self.pipeline.seed = self.seed;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.folds < 2 {
            return Err(CliError::config(format!("fold count must be at least 2, got {}", self.folds)));
        }
        if let Some(ids) = &self.pipeline.scorers {
            if ids.is_empty() || ids.iter().any(|id| !(1..=9).contains(id)) {
                return Err(CliError::config(format!("scorer set {ids:?} must be a non-empty subset of 1..=9")));
            }
        }
        if self.jobs == Some(0) {
            return Err(CliError::config("--jobs must be at least 1"));
        }
        self.pipeline.features.camera.validate().map_err(|e| CliError::config(e.to_string()))?;
        Ok(())
    }

    pub fn manifest(&self) -> Result<&Path, CliError> {
        self.manifest
            .as_deref()
            .ok_or_else(|| CliError::config("--manifest is required"))
    }
}
