//! Full-reference texture and depth features.
//!
//! Each feature is a pure function of a reference/distorted pair. The
//! [`FeatureId`] registry names them for scorer layouts and the debug dump.

pub mod color;
pub mod edge;
pub mod filter;
pub mod gradient;
pub mod phase;
pub mod pixel;
pub mod spectral;
pub mod structural;
pub mod svd;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Sample, ViewSet};
use crate::depth::{ndse, CameraConfig, DnoseProfile};
use crate::error::{Error, Result};

pub use color::{mas, MasNormalization};
pub use edge::{esmse, pratt, EdgeConfig, EdgeStabilityMap, ThresholdRule};
pub use gradient::gradient_similarity;
pub use phase::{phase_congruency, phase_congruency_similarity, PhaseCongruencyConfig};
pub use pixel::{mae, max_difference, min_norm, mse, psnr};
pub use spectral::{hvs_mse, zcr, DctBandpassFilter};
pub use structural::{ssim_components, ssim_index, uqi, SsimComponents, SsimConfig};
pub use svd::{svd_features, SvdBlockFeatures, SvdDistortion};

/// A feature value with a flag for inputs where the defining formula has
/// no natural value and a documented convention was applied instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub value: f64,
    pub degenerate: bool,
}

impl Measurement {
    pub fn ok(value: f64) -> Self {
        Measurement {
            value,
            degenerate: false,
        }
    }

    pub fn degenerate(value: f64) -> Self {
        Measurement {
            value,
            degenerate: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureId {
    Esmse,
    Pratt,
    HvsMse,
    Zcr,
    Psnr,
    Md,
    Mae,
    Min,
    SsimL,
    SsimC,
    SsimS,
    Ssim,
    Uqi,
    Mas,
    Pc,
    Gm,
    Sv,
    Svec,
    Ndse,
}

impl FeatureId {
    pub const ALL: [FeatureId; 19] = [
        FeatureId::Esmse,
        FeatureId::Pratt,
        FeatureId::HvsMse,
        FeatureId::Zcr,
        FeatureId::Psnr,
        FeatureId::Md,
        FeatureId::Mae,
        FeatureId::Min,
        FeatureId::SsimL,
        FeatureId::SsimC,
        FeatureId::SsimS,
        FeatureId::Ssim,
        FeatureId::Uqi,
        FeatureId::Mas,
        FeatureId::Pc,
        FeatureId::Gm,
        FeatureId::Sv,
        FeatureId::Svec,
        FeatureId::Ndse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureId::Esmse => "esmse",
            FeatureId::Pratt => "pratt",
            FeatureId::HvsMse => "hvs_mse",
            FeatureId::Zcr => "zcr",
            FeatureId::Psnr => "psnr",
            FeatureId::Md => "md",
            FeatureId::Mae => "mae",
            FeatureId::Min => "min",
            FeatureId::SsimL => "ssim_l",
            FeatureId::SsimC => "ssim_c",
            FeatureId::SsimS => "ssim_s",
            FeatureId::Ssim => "ssim",
            FeatureId::Uqi => "uqi",
            FeatureId::Mas => "mas",
            FeatureId::Pc => "pc",
            FeatureId::Gm => "gm",
            FeatureId::Sv => "sv",
            FeatureId::Svec => "svec",
            FeatureId::Ndse => "ndse",
        }
    }

    pub fn needs_depth(self) -> bool {
        self == FeatureId::Ndse
    }

    /// Smallest image side the feature accepts.
    pub fn min_side(self) -> usize {
        match self {
            FeatureId::Pc => phase::MIN_PC_SIDE,
            _ => crate::image::MIN_FEATURE_SIDE,
        }
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureId::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFeature {
                name: s.to_string(),
                valid: FeatureId::ALL.map(|f| f.name()).join(", "),
            })
    }
}

/// Parameters for every feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub edge: EdgeConfig,
    pub hvs_filter: DctBandpassFilter,
    pub psnr_cap: f64,
    pub min_fraction: f64,
    pub ssim: SsimConfig,
    pub uqi_window: usize,
    pub mas_normalization: MasNormalization,
    pub phase: PhaseCongruencyConfig,
    pub svd_block: usize,
    pub camera: CameraConfig,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            edge: EdgeConfig::default(),
            hvs_filter: DctBandpassFilter::default(),
            psnr_cap: pixel::DEFAULT_PSNR_CAP,
            min_fraction: 0.25,
            ssim: SsimConfig::default(),
            uqi_window: 8,
            mas_normalization: MasNormalization::default(),
            phase: PhaseCongruencyConfig::default(),
            svd_block: 8,
            camera: CameraConfig::default(),
        }
    }
}

/// Validated configuration plus the depth profile derived from its camera.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    config: FeatureConfig,
    profile: DnoseProfile,
}

impl FeatureExtractor {
    pub fn new(config: FeatureConfig) -> Result<Self> {
        config.edge.validate()?;
        config.hvs_filter.validate()?;
        let profile = DnoseProfile::build(&config.camera)?;
        Ok(FeatureExtractor { config, profile })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn profile(&self) -> &DnoseProfile {
        &self.profile
    }

    /// Values of `ids` for view `view` (0-based), in the order given.
    pub fn compute_view(&self, ids: &[FeatureId], views: &ViewSet, view: usize) -> Result<Vec<f64>> {
        let cfg = &self.config;
        let pair = views.views().get(view).ok_or_else(|| {
            Error::InvalidParameter(format!("view {view} out of range"))
        })?;
        let (r, d) = (&pair.reference.luma, &pair.distorted.luma);
        let min_side = ids.iter().map(|f| f.min_side()).max().unwrap_or(1);
        if r.width() < min_side || r.height() < min_side {
            return Err(Error::TooSmall {
                what: "feature extraction",
                width: r.width(),
                height: r.height(),
                min: min_side,
            });
        }
        let mut ssim: Option<SsimComponents> = None;
        let mut svd: Option<SvdDistortion> = None;
        let mut out = Vec::with_capacity(ids.len());
        for &id in ids {
            let v = match id {
                FeatureId::Esmse => esmse(r, d, &cfg.edge)?.value,
                FeatureId::Pratt => pratt(r, d, &cfg.edge)?.value,
                FeatureId::HvsMse => hvs_mse(r, d, &cfg.hvs_filter)?,
                FeatureId::Zcr => zcr(d)?,
                FeatureId::Psnr => psnr(r, d, cfg.psnr_cap)?.value,
                FeatureId::Md => max_difference(r, d)?,
                FeatureId::Mae => mae(r, d)?,
                FeatureId::Min => min_norm(r, d, cfg.min_fraction)?,
                FeatureId::SsimL | FeatureId::SsimC | FeatureId::SsimS | FeatureId::Ssim => {
                    let s = match ssim {
                        Some(s) => s,
                        None => *ssim.insert(ssim_components(r, d, &cfg.ssim)?),
                    };
                    match id {
                        FeatureId::SsimL => s.luminance,
                        FeatureId::SsimC => s.contrast,
                        FeatureId::SsimS => s.structure,
                        _ => s.index,
                    }
                }
                FeatureId::Uqi => uqi(r, d, cfg.uqi_window)?.value,
                FeatureId::Mas => {
                    let a = pair.reference.color_or_promoted();
                    let b = pair.distorted.color_or_promoted();
                    mas(&a, &b, cfg.mas_normalization)?.value
                }
                FeatureId::Pc => phase_congruency_similarity(r, d, &cfg.phase)?.value,
                FeatureId::Gm => gradient_similarity(r, d)?,
                FeatureId::Sv | FeatureId::Svec => {
                    let s = match svd {
                        Some(s) => s,
                        None => *svd.insert(svd_features(r, d, cfg.svd_block)?),
                    };
                    if id == FeatureId::Sv {
                        s.sv_dist
                    } else {
                        s.svec_dist
                    }
                }
                FeatureId::Ndse => {
                    let depths = views.depths().ok_or_else(|| {
                        Error::InvalidParameter("ndse requires depth maps".into())
                    })?;
                    let dp = &depths[view];
                    ndse(&dp.reference, &dp.distorted, &self.profile)?
                }
            };
            out.push(v);
        }
        Ok(out)
    }
}

/// One line of the feature dump.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub sample_id: String,
    /// 1-based view index.
    pub view_index: usize,
    pub feature: FeatureId,
    pub value: f64,
}

/// Feature values for every sample and view, sample-major then view then
/// feature order.
pub fn dump_features(extractor: &FeatureExtractor, samples: &[Sample], ids: &[FeatureId]) -> Result<Vec<FeatureRecord>> {
    use rayon::prelude::*;
    let per_sample: Vec<Result<Vec<FeatureRecord>>> = samples
        .par_iter()
        .map(|s| {
            let views = s.views()?;
            let mut rows = Vec::new();
            for v in 0..views.view_count() {
                let values = extractor.compute_view(ids, &views, v)?;
                rows.extend(ids.iter().zip(values).map(|(&feature, value)| FeatureRecord {
                    sample_id: s.id.clone(),
                    view_index: v + 1,
                    feature,
                    value,
                }));
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for rows in per_sample {
        out.extend(rows?);
    }
    Ok(out)
}

pub const FEATURE_DUMP_HEADER: &str = "sample_id,view_index,feature_name,value";

pub fn write_feature_dump(mut w: impl Write, records: &[FeatureRecord]) -> std::io::Result<()> {
    writeln!(w, "{FEATURE_DUMP_HEADER}")?;
    for r in records {
        writeln!(w, "{},{},{},{}", r.sample_id, r.view_index, r.feature, r.value)?;
    }
    Ok(())
}

pub fn write_feature_dump_file(path: impl AsRef<Path>, records: &[FeatureRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_feature_dump(&mut w, records)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}
