//! Procedural stimuli and distortion ladders for tests, demos and smoke runs.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{write_manifest, DepthPair, ManifestLayout, Sample, ViewPair, ViewPaths, ViewSet, ViewSource};
use crate::error::{Error, Result};
use crate::features::filter::gaussian_blur;
use crate::image::{DepthMap, Image, Texture};

/// Smooth shading, oriented gratings and a few flat rectangles, in `[16, 240]`.
pub fn test_pattern(width: usize, height: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.random_range(0.02..0.35),
                rng.random_range(0.0..std::f64::consts::PI),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(8.0..30.0),
            )
        })
        .collect();
    // rectangle sides in [4, max(5, 0.4 * side))
    let side = |n: usize| rng_side(n);
    let rects: Vec<(f64, f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            let x0 = rng.random_range(0.0..width as f64 * 0.7);
            let y0 = rng.random_range(0.0..height as f64 * 0.7);
            (
                x0,
                y0,
                x0 + rng.random_range(4.0..side(width)),
                y0 + rng.random_range(4.0..side(height)),
                rng.random_range(-60.0..60.0),
            )
        })
        .collect();
    let tilt = rng.random_range(-1.0..1.0);
    Image::from_fn(width, height, |r, c| {
        let (x, y) = (c as f64, r as f64);
        let mut v = 128.0 + 30.0 * tilt * (x / width as f64 - y / height as f64);
        for &(freq, angle, phase, amp) in &waves {
            v += amp * (freq * (x * angle.cos() + y * angle.sin()) + phase).sin();
        }
        for &(x0, y0, x1, y1, step) in &rects {
            if (x0..x1).contains(&x) && (y0..y1).contains(&y) {
                v += step;
            }
        }
        v.clamp(16.0, 240.0)
    })
}

fn rng_side(n: usize) -> f64 {
    (n as f64 * 0.4).max(5.0)
}

/// Uniform random image in `[0, 255]`.
pub fn random_image(width: usize, height: usize, rng: &mut impl Rng) -> Image {
    Image::from_fn(width, height, |_, _| rng.random_range(0.0..=255.0))
}

pub fn add_noise(image: &Image, sigma: f64, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma.max(0.0)).expect("non-negative sigma");
    image.map(|v| v + normal.sample(&mut rng))
}

/// Blends each pixel with the mean of its `block x block` tile.
pub fn blocking(image: &Image, block: usize, strength: f64) -> Image {
    let (w, h) = (image.width(), image.height());
    let mut means = vec![0.0; w * h];
    for by in (0..h).step_by(block) {
        for bx in (0..w).step_by(block) {
            let (y1, x1) = ((by + block).min(h), (bx + block).min(w));
            let mut sum = 0.0;
            for r in by..y1 {
                for c in bx..x1 {
                    sum += image.get(r, c);
                }
            }
            let mean = sum / ((y1 - by) * (x1 - bx)) as f64;
            for r in by..y1 {
                for c in bx..x1 {
                    means[r * w + c] = mean;
                }
            }
        }
    }
    Image::from_fn(w, h, |r, c| (1.0 - strength) * image.get(r, c) + strength * means[r * w + c])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distortion {
    Blur { sigma: f64 },
    Noise { sigma: f64 },
    Blocking { block: usize, strength: f64 },
}

impl Distortion {
    pub fn apply(&self, image: &Image, seed: u64) -> Image {
        match *self {
            Distortion::Blur { sigma } => gaussian_blur(image, sigma),
            Distortion::Noise { sigma } => add_noise(image, sigma, seed),
            Distortion::Blocking { block, strength } => blocking(image, block, strength),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Distortion::Blur { .. } => "blur",
            Distortion::Noise { .. } => "noise",
            Distortion::Blocking { .. } => "blocking",
        }
    }

    /// Ladder step `level` of `levels` (1-based) for a distortion family.
    pub fn ladder(tag: &str, level: usize, levels: usize) -> Result<Self> {
        let t = level as f64 / levels as f64;
        match tag {
            "blur" => Ok(Distortion::Blur { sigma: 0.4 + 3.6 * t }),
            "noise" => Ok(Distortion::Noise { sigma: 3.0 + 37.0 * t }),
            "blocking" => Ok(Distortion::Blocking {
                block: 8,
                strength: 0.15 + 0.85 * t,
            }),
            other => Err(Error::InvalidParameter(format!("unknown distortion family '{other}'"))),
        }
    }
}

/// Layout of a synthetic ladder dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub sources: usize,
    pub levels: usize,
    pub families: Vec<String>,
    pub size: usize,
    pub views: usize,
    pub depth: bool,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// 6 contents x 5 levels x 3 families = 90 stereo samples of 32x32.
    fn default() -> Self {
        SyntheticSpec {
            sources: 6,
            levels: 5,
            families: vec!["blur".into(), "noise".into(), "blocking".into()],
            size: 32,
            views: 2,
            depth: false,
            seed: 1,
        }
    }
}

fn depth_ramp(size: usize, seed: u64) -> DepthMap {
    let phase = (seed % 97) as f64 * 0.1;
    DepthMap::from_fn(size, size, |r, c| {
        let v = 128.0 + 90.0 * ((r as f64 / size as f64) - 0.5) + 20.0 * ((c as f64 * 0.2) + phase).sin();
        v.clamp(0.0, 255.0) as u8
    })
}

/// MOS in `[1, 5]` that falls linearly with the ladder step.
pub fn ladder_mos(level: usize, levels: usize) -> f64 {
    5.0 - 4.0 * level as f64 / (levels as f64 + 1.0)
}

/// In-memory ladder dataset. Views are horizontally shifted crops of one
/// pattern; depth (when requested) is degraded only by the noise family.
pub fn synthetic_dataset(spec: &SyntheticSpec) -> Result<Vec<Sample>> {
    if spec.views < 2 || spec.views > 3 {
        return Err(Error::InvalidParameter(format!("view count must be 2 or 3, got {}", spec.views)));
    }
    let mut samples = Vec::new();
    for s in 0..spec.sources {
        let src_seed = spec.seed.wrapping_mul(1_000_003).wrapping_add(s as u64);
        let wide = test_pattern(spec.size + 2 * spec.views, spec.size, src_seed);
        let refs: Vec<Image> = (0..spec.views)
            .map(|v| Image::from_fn(spec.size, spec.size, |r, c| wide.get(r, c + 2 * v)))
            .collect();
        let ref_depth = depth_ramp(spec.size, src_seed);
        for family in &spec.families {
            for level in 1..=spec.levels {
                let d = Distortion::ladder(family, level, spec.levels)?;
                let dist_seed = src_seed ^ ((level as u64) << 32) ^ (family.len() as u64) << 48;
                let views = refs
                    .iter()
                    .enumerate()
                    .map(|(v, r)| ViewPair {
                        reference: Texture::from_gray(r.clone()),
                        distorted: Texture::from_gray(d.apply(r, dist_seed + v as u64)),
                    })
                    .collect();
                let depths = spec.depth.then(|| {
                    (0..spec.views)
                        .map(|v| {
                            let distorted = if family == "noise" {
                                let mut rng = ChaCha8Rng::seed_from_u64(dist_seed + 100 + v as u64);
                                let amp = 2.0 + 10.0 * level as f64 / spec.levels as f64;
                                let levels = ref_depth
                                    .levels()
                                    .iter()
                                    .map(|&x| (x as f64 + rng.random_range(-amp..=amp)).round().clamp(0.0, 255.0) as u8)
                                    .collect();
                                DepthMap::new(spec.size, spec.size, levels).expect("same size")
                            } else {
                                ref_depth.clone()
                            };
                            DepthPair {
                                reference: ref_depth.clone(),
                                distorted,
                            }
                        })
                        .collect()
                });
                let id = format!("s{s}_{family}_{level}");
                samples.push(Sample::in_memory(
                    id,
                    format!("src{s}"),
                    family.clone(),
                    ladder_mos(level, spec.levels),
                    ViewSet::new(views, depths)?,
                )?);
            }
        }
    }
    Ok(samples)
}

/// Writes in-memory samples as PGM files plus `manifest.csv` under `dir`,
/// returning the file-backed samples.
pub fn write_dataset(dir: impl AsRef<Path>, samples: &[Sample]) -> Result<Vec<Sample>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let first = samples
        .first()
        .ok_or_else(|| Error::InsufficientData("no samples to write".into()))?;
    let layout = ManifestLayout {
        view_count: first.view_count(),
        has_depth: first.has_depth(),
    };
    let mut out = Vec::with_capacity(samples.len());
    for s in samples {
        let views = s.views()?;
        let mut paths = ViewPaths {
            ref_textures: Vec::new(),
            dist_textures: Vec::new(),
            depths: views.depths().map(|_| (Vec::new(), Vec::new())),
        };
        for (v, pair) in views.views().iter().enumerate() {
            let r = dir.join(format!("{}_ref_{}.pgm", s.id, v + 1));
            let d = dir.join(format!("{}_dist_{}.pgm", s.id, v + 1));
            pair.reference.luma.write_pgm(&r)?;
            pair.distorted.luma.write_pgm(&d)?;
            paths.ref_textures.push(r);
            paths.dist_textures.push(d);
        }
        if let (Some(depths), Some((rp, dp))) = (views.depths(), paths.depths.as_mut()) {
            for (v, pair) in depths.iter().enumerate() {
                let r = dir.join(format!("{}_refdepth_{}.pgm", s.id, v + 1));
                let d = dir.join(format!("{}_distdepth_{}.pgm", s.id, v + 1));
                pair.reference.write_pgm(&r)?;
                pair.distorted.write_pgm(&d)?;
                rp.push(r);
                dp.push(d);
            }
        }
        out.push(Sample {
            id: s.id.clone(),
            source_tag: s.source_tag.clone(),
            distortion_tag: s.distortion_tag.clone(),
            mos: s.mos,
            source: ViewSource::Files(paths),
        });
    }
    write_manifest(dir.join("manifest.csv"), layout, &out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_is_deterministic_and_in_range() {
        let a = test_pattern(40, 30, 5);
        assert_eq!(a, test_pattern(40, 30, 5));
        assert!(a.pixels().iter().all(|&v| (16.0..=240.0).contains(&v)));
    }

    #[test]
    fn dataset_shape() {
        let spec = SyntheticSpec {
            sources: 2,
            levels: 2,
            depth: true,
            views: 3,
            ..SyntheticSpec::default()
        };
        let samples = synthetic_dataset(&spec).unwrap();
        assert_eq!(samples.len(), 12);
        assert!(samples.iter().all(|s| s.view_count() == 3 && s.has_depth()));
    }

    #[test]
    fn blocking_full_strength_is_piecewise_constant() {
        let img = test_pattern(16, 16, 2);
        let b = blocking(&img, 8, 1.0);
        assert_eq!(b.get(0, 0), b.get(7, 7));
    }
}
