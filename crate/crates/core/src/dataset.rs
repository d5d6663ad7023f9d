//! Samples, view sets and the dataset manifest CSV.
//!
//! Manifest header: `id,source_tag,distortion_tag,mos,ref_tex_1..k,dist_tex_1..k`
//! optionally followed by `ref_depth_1..k,dist_depth_1..k`. Relative paths
//! resolve against the manifest's directory. `#` lines are comments.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::image::{load_depth, load_texture, DepthMap, Texture};

#[derive(Debug, Clone, PartialEq)]
pub struct ViewPair {
    pub reference: Texture,
    pub distorted: Texture,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthPair {
    pub reference: DepthMap,
    pub distorted: DepthMap,
}

/// Two or three texture views (and optionally their depth maps) of one
/// stereoscopic stimulus.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewSet {
    views: Vec<ViewPair>,
    depths: Option<Vec<DepthPair>>,
}

impl ViewSet {
    pub fn new(views: Vec<ViewPair>, depths: Option<Vec<DepthPair>>) -> Result<Self> {
        if !(2..=3).contains(&views.len()) {
            return Err(Error::InvalidParameter(format!(
                "view count must be 2 or 3, got {}",
                views.len()
            )));
        }
        let (w, h) = (views[0].reference.width(), views[0].reference.height());
        for v in &views {
            for t in [&v.reference, &v.distorted] {
                if t.width() != w || t.height() != h {
                    return Err(Error::SizeMismatch {
                        ref_w: w,
                        ref_h: h,
                        dist_w: t.width(),
                        dist_h: t.height(),
                    });
                }
            }
        }
        if let Some(depths) = &depths {
            if depths.len() != views.len() {
                return Err(Error::InvalidParameter(format!(
                    "{} depth pairs for {} views",
                    depths.len(),
                    views.len()
                )));
            }
            for d in depths {
                for m in [&d.reference, &d.distorted] {
                    if m.width() != w || m.height() != h {
                        return Err(Error::SizeMismatch {
                            ref_w: w,
                            ref_h: h,
                            dist_w: m.width(),
                            dist_h: m.height(),
                        });
                    }
                }
            }
        }
        Ok(ViewSet { views, depths })
    }

    pub fn views(&self) -> &[ViewPair] {
        &self.views
    }

    pub fn depths(&self) -> Option<&[DepthPair]> {
        self.depths.as_deref()
    }

    pub fn view_count(&self) -> usize {
        self.views.len()
    }
}

/// File locations of one sample's rasters, one entry per view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewPaths {
    pub ref_textures: Vec<PathBuf>,
    pub dist_textures: Vec<PathBuf>,
    pub depths: Option<(Vec<PathBuf>, Vec<PathBuf>)>,
}

impl ViewPaths {
    pub fn load(&self) -> Result<ViewSet> {
        let views = self
            .ref_textures
            .iter()
            .zip(&self.dist_textures)
            .map(|(r, d)| {
                Ok(ViewPair {
                    reference: load_texture(r)?,
                    distorted: load_texture(d)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let depths = match &self.depths {
            Some((refs, dists)) => Some(
                refs.iter()
                    .zip(dists)
                    .map(|(r, d)| {
                        Ok(DepthPair {
                            reference: load_depth(r)?,
                            distorted: load_depth(d)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        ViewSet::new(views, depths)
    }

    /// Arguments handed to an external scorer: reference textures, distorted
    /// textures, then reference and distorted depths when present.
    pub fn as_args(&self) -> Vec<PathBuf> {
        let mut args: Vec<PathBuf> = self.ref_textures.clone();
        args.extend(self.dist_textures.iter().cloned());
        if let Some((r, d)) = &self.depths {
            args.extend(r.iter().cloned());
            args.extend(d.iter().cloned());
        }
        args
    }
}

#[derive(Debug, Clone)]
pub enum ViewSource {
    Files(ViewPaths),
    Memory(Arc<ViewSet>),
}

/// One rated stimulus: its views, subjective score and tags.
#[derive(Debug, Clone)]
pub struct Sample {
    pub id: String,
    pub source_tag: String,
    pub distortion_tag: String,
    pub mos: f64,
    pub source: ViewSource,
}

impl Sample {
    pub fn in_memory(
        id: impl Into<String>,
        source_tag: impl Into<String>,
        distortion_tag: impl Into<String>,
        mos: f64,
        views: ViewSet,
    ) -> Result<Self> {
        let id = id.into();
        if !mos.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sample '{id}': non-finite MOS"
            )));
        }
        Ok(Sample {
            id,
            source_tag: source_tag.into(),
            distortion_tag: distortion_tag.into(),
            mos,
            source: ViewSource::Memory(Arc::new(views)),
        })
    }

    pub fn view_count(&self) -> usize {
        match &self.source {
            ViewSource::Files(p) => p.ref_textures.len(),
            ViewSource::Memory(v) => v.view_count(),
        }
    }

    pub fn has_depth(&self) -> bool {
        match &self.source {
            ViewSource::Files(p) => p.depths.is_some(),
            ViewSource::Memory(v) => v.depths().is_some(),
        }
    }

    pub fn paths(&self) -> Option<&ViewPaths> {
        match &self.source {
            ViewSource::Files(p) => Some(p),
            ViewSource::Memory(_) => None,
        }
    }

    /// Rasters for this sample; file-backed samples are decoded on each call.
    pub fn views(&self) -> Result<Arc<ViewSet>> {
        match &self.source {
            ViewSource::Files(p) => p.load().map(Arc::new),
            ViewSource::Memory(v) => Ok(Arc::clone(v)),
        }
    }
}

/// Column layout detected from a manifest header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ManifestLayout {
    pub view_count: usize,
    pub has_depth: bool,
}

impl ManifestLayout {
    pub fn header(&self) -> Vec<String> {
        let k = self.view_count;
        let mut cols: Vec<String> = ["id", "source_tag", "distortion_tag", "mos"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut prefixes = vec!["ref_tex", "dist_tex"];
        if self.has_depth {
            prefixes.extend(["ref_depth", "dist_depth"]);
        }
        for p in prefixes {
            cols.extend((1..=k).map(|i| format!("{p}_{i}")));
        }
        cols
    }

    fn from_header(header: &[&str]) -> std::result::Result<Self, String> {
        let k = header.iter().filter(|c| c.starts_with("ref_tex_")).count();
        let has_depth = header.iter().any(|c| c.starts_with("ref_depth_"));
        if !(2..=3).contains(&k) {
            return Err(format!("expected 2 or 3 ref_tex_* columns, found {k}"));
        }
        let layout = ManifestLayout {
            view_count: k,
            has_depth,
        };
        let expected = layout.header();
        if header.len() != expected.len() || header.iter().zip(&expected).any(|(a, b)| a != b) {
            return Err(format!(
                "header mismatch: expected `{}`, found `{}`",
                expected.join(","),
                header.join(",")
            ));
        }
        Ok(layout)
    }
}

/// Parses a manifest, checking that every referenced raster exists. Rows are
/// returned in file order; row numbers in errors are file line numbers.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<Sample>> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Load {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    let manifest_err = |row: usize, reason: String| Error::Manifest {
        path: path.to_path_buf(),
        row,
        reason,
    };
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| manifest_err(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let layout = ManifestLayout::from_header(&header_refs).map_err(|r| manifest_err(1, r))?;
    let k = layout.view_count;

    let mut samples = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
            manifest_err(row, e.to_string())
        })?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != header.len() {
            return Err(manifest_err(
                row,
                format!(
                    "expected {} columns, found {}",
                    header.len(),
                    record.len()
                ),
            ));
        }
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(manifest_err(row, "empty id".into()));
        }
        if !seen.insert(id.clone()) {
            return Err(manifest_err(row, format!("duplicate id '{id}'")));
        }
        let mos: f64 = record[3]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| manifest_err(row, format!("mos '{}' is not a finite number", &record[3])))?;
        let resolve = |col: usize| -> Result<PathBuf> {
            let p = base.join(&record[col]);
            if !p.is_file() {
                return Err(manifest_err(
                    row,
                    format!("{} '{}' does not exist", header[col], p.display()),
                ));
            }
            Ok(p)
        };
        let cols = |start: usize| -> Result<Vec<PathBuf>> { (start..start + k).map(resolve).collect() };
        let ref_textures = cols(4)?;
        let dist_textures = cols(4 + k)?;
        let depths = if layout.has_depth {
            Some((cols(4 + 2 * k)?, cols(4 + 3 * k)?))
        } else {
            None
        };
        samples.push(Sample {
            id,
            source_tag: record[1].to_string(),
            distortion_tag: record[2].to_string(),
            mos,
            source: ViewSource::Files(ViewPaths {
                ref_textures,
                dist_textures,
                depths,
            }),
        });
    }
    Ok(samples)
}

/// Writes a manifest for file-backed samples. Paths are written as given.
pub fn write_manifest(path: impl AsRef<Path>, layout: ManifestLayout, samples: &[Sample]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Load {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    w.write_record(layout.header())?;
    for s in samples {
        let p = s.paths().ok_or_else(|| {
            Error::InvalidParameter(format!("sample '{}' is not file-backed", s.id))
        })?;
        let mut rec = vec![
            s.id.clone(),
            s.source_tag.clone(),
            s.distortion_tag.clone(),
            format!("{}", s.mos),
        ];
        rec.extend(p.as_args().iter().map(|p| p.display().to_string()));
        w.write_record(rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
