//! Trained two-stage model and its on-disk bundle.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scorer::{clamp_score, extract_scorer_features, score_features, ScorerSpec, EXTERNAL_SCORER_ID};
use crate::dataset::Sample;
use crate::depth::ExternalScorer;
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureExtractor};
use crate::svr::SvrModel;

pub const BUNDLE_FORMAT_VERSION: u32 = 1;
pub const BUNDLE_MANIFEST: &str = "manifest.json";
pub const FUSER_FILE: &str = "fuser.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetProfile {
    pub view_count: usize,
    pub has_depth: bool,
}

impl DatasetProfile {
    pub fn of(sample: &Sample) -> Self {
        DatasetProfile {
            view_count: sample.view_count(),
            has_depth: sample.has_depth(),
        }
    }

    /// Common profile of all samples.
    pub fn of_dataset(samples: &[Sample]) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::InsufficientData("empty dataset".into()))?;
        let p = Self::of(first);
        if let Some(s) = samples.iter().find(|s| Self::of(s) != p) {
            return Err(Error::ProfileMismatch(format!(
                "sample '{}' has {} views (depth: {}), expected {} views (depth: {})",
                s.id,
                s.view_count(),
                s.has_depth(),
                p.view_count,
                p.has_depth
            )));
        }
        Ok(p)
    }
}

/// Affine map of MOS onto `[0, 1]` from the training range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MosNormalization {
    pub min: f64,
    pub max: f64,
}

impl MosNormalization {
    pub fn fit(mos: &[f64]) -> Result<Self> {
        let min = mos.iter().copied().fold(f64::INFINITY, f64::min);
        let max = mos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(max > min) {
            return Err(Error::InsufficientData(
                "MOS values are all equal; nothing to regress".into(),
            ));
        }
        Ok(MosNormalization { min, max })
    }

    pub fn to_unit(&self, mos: f64) -> f64 {
        (mos - self.min) / (self.max - self.min)
    }

    pub fn from_unit(&self, v: f64) -> f64 {
        self.min + v * (self.max - self.min)
    }
}

/// Stage-I outputs for one sample, in ascending scorer-id order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub sample_id: String,
    pub scorer_ids: Vec<u8>,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParaboostModel {
    pub profile: DatasetProfile,
    /// Active scorers in ascending id order; the fuser input follows it.
    pub scorers: Vec<ScorerSpec>,
    pub scorer_models: BTreeMap<u8, SvrModel>,
    pub fuser: SvrModel,
    pub mos_normalization: MosNormalization,
    pub features: FeatureConfig,
    pub external: Option<ExternalScorer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BundleManifest {
    format_version: u32,
    profile: DatasetProfile,
    scorers: Vec<ScorerSpec>,
    mos_normalization: MosNormalization,
    features: FeatureConfig,
    external: Option<ExternalScorer>,
    scorer_files: BTreeMap<u8, String>,
    fuser_file: String,
}

fn scorer_file(id: u8) -> String {
    format!("scorer_{id}.json")
}

impl ParaboostModel {
    pub fn scorer_ids(&self) -> Vec<u8> {
        self.scorers.iter().map(|s| s.id).collect()
    }

    pub fn check_profile(&self, sample: &Sample) -> Result<()> {
        let p = DatasetProfile::of(sample);
        if p != self.profile {
            return Err(Error::ProfileMismatch(format!(
                "model expects {} views (depth: {}), sample '{}' has {} views (depth: {})",
                self.profile.view_count, self.profile.has_depth, sample.id, p.view_count, p.has_depth
            )));
        }
        Ok(())
    }

    pub fn extractor(&self) -> Result<FeatureExtractor> {
        FeatureExtractor::new(self.features.clone())
    }

    pub fn assemble_score_vector(&self, sample: &Sample, extractor: &FeatureExtractor) -> Result<ScoreVector> {
        self.check_profile(sample)?;
        let mut scores = Vec::with_capacity(self.scorers.len());
        for spec in &self.scorers {
            let s = if spec.is_learned() {
                let model = self.scorer_models.get(&spec.id).ok_or_else(|| {
                    Error::ProfileMismatch(format!("bundle lacks a model for scorer {}", spec.id))
                })?;
                score_features(model, spec, &extract_scorer_features(spec, sample, extractor)?)?
            } else {
                let ext = self.external.as_ref().ok_or_else(|| Error::ScorerUnavailable {
                    scorer: EXTERNAL_SCORER_ID,
                    sample: sample.id.clone(),
                    reason: "no external command configured".into(),
                })?;
                clamp_score(ext.score(sample)?)
            };
            scores.push(s);
        }
        Ok(ScoreVector {
            sample_id: sample.id.clone(),
            scorer_ids: self.scorer_ids(),
            scores,
        })
    }

    /// Fused prediction in normalized units.
    pub fn fuse(&self, scores: &ScoreVector) -> Result<f64> {
        self.fuser.predict(&scores.scores)
    }

    /// Predicted MOS for one sample.
    pub fn predict(&self, sample: &Sample, extractor: &FeatureExtractor) -> Result<f64> {
        let v = self.assemble_score_vector(sample, extractor)?;
        Ok(self.mos_normalization.from_unit(self.fuse(&v)?))
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut scorer_files = BTreeMap::new();
        for (&id, model) in &self.scorer_models {
            let name = scorer_file(id);
            model.save(dir.join(&name))?;
            scorer_files.insert(id, name);
        }
        self.fuser.save(dir.join(FUSER_FILE))?;
        let manifest = BundleManifest {
            format_version: BUNDLE_FORMAT_VERSION,
            profile: self.profile,
            scorers: self.scorers.clone(),
            mos_normalization: self.mos_normalization,
            features: self.features.clone(),
            external: self.external.clone(),
            scorer_files,
            fuser_file: FUSER_FILE.to_string(),
        };
        let path = dir.join(BUNDLE_MANIFEST);
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join(BUNDLE_MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let m: BundleManifest = serde_json::from_str(&text)?;
        if m.format_version != BUNDLE_FORMAT_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported bundle version {}",
                m.format_version
            )));
        }
        let mut scorer_models = BTreeMap::new();
        for spec in m.scorers.iter().filter(|s| s.is_learned()) {
            let file = m.scorer_files.get(&spec.id).ok_or_else(|| {
                Error::ProfileMismatch(format!("bundle manifest lists no file for scorer {}", spec.id))
            })?;
            scorer_models.insert(spec.id, SvrModel::load(dir.join(file))?);
        }
        let fuser = SvrModel::load(dir.join(&m.fuser_file))?;
        if fuser.dim != m.scorers.len() {
            return Err(Error::ProfileMismatch(format!(
                "fuser expects {} inputs but {} scorers are listed",
                fuser.dim,
                m.scorers.len()
            )));
        }
        Ok(ParaboostModel {
            profile: m.profile,
            scorers: m.scorers,
            scorer_models,
            fuser,
            mos_normalization: m.mos_normalization,
            features: m.features,
            external: m.external,
        })
    }
}
