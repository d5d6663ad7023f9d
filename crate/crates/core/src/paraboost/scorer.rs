//! Stage-I scorer definitions and per-sample feature routing.

use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::features::{FeatureExtractor, FeatureId};
use crate::svr::SvrModel;

pub const EXTERNAL_SCORER_ID: u8 = 9;
pub const DEPTH_SCORER_ID: u8 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSource {
    Texture,
    Depth,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScorerSpec {
    pub id: u8,
    pub name: String,
    pub features: Vec<FeatureId>,
    pub source: InputSource,
}

impl ScorerSpec {
    /// The nine standard scorers, ids 1 to 9.
    pub fn standard(id: u8) -> Result<Self> {
        use FeatureId::*;
        let (name, features, source) = match id {
            1 => ("edge", vec![Esmse, Pratt], InputSource::Texture),
            2 => ("spectral", vec![HvsMse, Zcr], InputSource::Texture),
            3 => ("pixel", vec![Psnr, Md, Min], InputSource::Texture),
            4 => ("structural", vec![SsimL, SsimC, SsimS], InputSource::Texture),
            5 => ("phase_gradient", vec![Pc, Gm], InputSource::Texture),
            6 => ("svd", vec![Sv, Svec], InputSource::Texture),
            7 => ("uqi_color", vec![Uqi, Mas], InputSource::Texture),
            8 => ("depth", vec![Ndse], InputSource::Depth),
            9 => ("external", vec![], InputSource::External),
            other => return Err(Error::InvalidParameter(format!("scorer id {other} outside 1..=9"))),
        };
        Ok(ScorerSpec {
            id,
            name: name.to_string(),
            features,
            source,
        })
    }

    /// Feature vector length for `views` views.
    pub fn dimension(&self, views: usize) -> usize {
        views * self.features.len()
    }

    pub fn is_learned(&self) -> bool {
        self.source != InputSource::External
    }
}

/// Per-view feature values concatenated view-major: `V1: f1..fm, V2: ...`.
pub fn extract_scorer_features(spec: &ScorerSpec, sample: &Sample, extractor: &FeatureExtractor) -> Result<Vec<f64>> {
    let wrap = |e: Error| Error::Feature {
        scorer: spec.id,
        sample: sample.id.clone(),
        source: Box::new(e),
    };
    match spec.source {
        InputSource::External => {
            return Err(Error::InvalidParameter(format!(
                "scorer {} has no features; it is evaluated by an external command",
                spec.id
            )))
        }
        InputSource::Depth if !sample.has_depth() => {
            return Err(Error::ScorerUnavailable {
                scorer: spec.id,
                sample: sample.id.clone(),
                reason: "sample has no depth maps".into(),
            })
        }
        _ => {}
    }
    let views = sample.views().map_err(wrap)?;
    let mut out = Vec::with_capacity(spec.dimension(views.view_count()));
    for v in 0..views.view_count() {
        out.extend(extractor.compute_view(&spec.features, &views, v).map_err(wrap)?);
    }
    Ok(out)
}

/// Scorer outputs live in `[0, 1]`.
pub fn clamp_score(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Clamped prediction of a trained scorer on precomputed features.
pub fn score_features(model: &SvrModel, spec: &ScorerSpec, features: &[f64]) -> Result<f64> {
    if features.len() != model.dim {
        return Err(Error::ProfileMismatch(format!(
            "scorer {} expects {} features, got {}",
            spec.id,
            model.dim,
            features.len()
        )));
    }
    Ok(clamp_score(model.predict(features)?))
}

pub fn score(model: &SvrModel, spec: &ScorerSpec, sample: &Sample, extractor: &FeatureExtractor) -> Result<f64> {
    score_features(model, spec, &extract_scorer_features(spec, sample, extractor)?)
}
