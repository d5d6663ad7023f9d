//! Depth no-synthesis-error profile and the noticeable depth error it induces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::DepthMap;

/// Rendering camera used by the linear inverse-depth disparity model
/// `DP(v) = f B ((v/255)(1/z_near - 1/z_far) + 1/z_far)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraConfig {
    /// Focal length in pixels.
    pub focal_length: f64,
    pub baseline: f64,
    pub z_near: f64,
    pub z_far: f64,
    /// Disparities are rendered to `1/precision` of a pixel.
    pub precision: u32,
    /// Rounding offset, in `[0, 1)`.
    pub rounding_offset: f64,
}

impl Default for CameraConfig {
    /// Disparity span of 64 pixels over the 256 depth levels, quarter-pixel
    /// rendering, round-half offset.
    fn default() -> Self {
        CameraConfig {
            focal_length: 800.0,
            baseline: 0.1,
            z_near: 1.0,
            z_far: 5.0,
            precision: 4,
            rounding_offset: 0.5,
        }
    }
}

impl CameraConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.focal_length, self.baseline, self.z_near, self.z_far, self.rounding_offset]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Camera("parameters must be finite".into()));
        }
        if self.focal_length <= 0.0 || self.baseline <= 0.0 {
            return Err(Error::Camera("focal length and baseline must be positive".into()));
        }
        if !(0.0 < self.z_near && self.z_near < self.z_far) {
            return Err(Error::Camera(format!(
                "need 0 < z_near < z_far, got z_near={}, z_far={}",
                self.z_near, self.z_far
            )));
        }
        if self.precision == 0 {
            return Err(Error::Camera("precision must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.rounding_offset) {
            return Err(Error::Camera(format!(
                "rounding offset {} outside [0, 1)",
                self.rounding_offset
            )));
        }
        Ok(())
    }

    fn span(&self) -> f64 {
        self.focal_length * self.baseline * (1.0 / self.z_near - 1.0 / self.z_far)
    }

    fn floor_disparity(&self) -> f64 {
        self.focal_length * self.baseline / self.z_far
    }

    /// Disparity in pixels of depth level `v`.
    pub fn disparity(&self, v: f64) -> f64 {
        v / 255.0 * self.span() + self.floor_disparity()
    }

    /// Depth level whose disparity is `d`.
    pub fn inverse_disparity(&self, d: f64) -> f64 {
        (d - self.floor_disparity()) * 255.0 / self.span()
    }

    /// Index `m` of the rendered disparity `m / K` for level `v`.
    pub fn quantized_disparity_index(&self, v: f64) -> f64 {
        ((self.disparity(v) - self.rounding_offset) * self.precision as f64).ceil()
    }
}

/// For each depth level `v`, the inclusive range of levels that render to
/// the same quantized disparity as `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DnoseProfile {
    lower: Vec<u8>,
    upper: Vec<u8>,
}

impl DnoseProfile {
    pub fn build(cam: &CameraConfig) -> Result<Self> {
        cam.validate()?;
        let k = cam.precision as f64;
        let q = |v: i64| cam.quantized_disparity_index(v as f64);
        let mut prev = f64::NEG_INFINITY;
        for v in 0..=255 {
            let d = cam.disparity(v as f64);
            if !(d > prev) || !d.is_finite() {
                return Err(Error::Camera("disparity is not strictly increasing in depth".into()));
            }
            prev = d;
        }
        let mut lower = Vec::with_capacity(256);
        let mut upper = Vec::with_capacity(256);
        for v in 0..=255i64 {
            let m = q(v);
            // Levels rendering to index m satisfy (m-1)/K < DP(u) - offset <= m/K.
            let mut lo = cam
                .inverse_disparity((m - 1.0) / k + cam.rounding_offset)
                .ceil()
                .clamp(0.0, v as f64) as i64;
            let mut hi = cam
                .inverse_disparity(m / k + cam.rounding_offset)
                .floor()
                .clamp(v as f64, 255.0) as i64;
            // Guard the rounding of DP^-1 at the interval ends.
            while q(lo) != m {
                lo += 1;
            }
            while lo > 0 && q(lo - 1) == m {
                lo -= 1;
            }
            while q(hi) != m {
                hi -= 1;
            }
            while hi < 255 && q(hi + 1) == m {
                hi += 1;
            }
            lower.push(lo as u8);
            upper.push(hi as u8);
        }
        Ok(DnoseProfile { lower, upper })
    }

    /// `[v + delta_minus(v), v + delta_plus(v)]`.
    pub fn interval(&self, v: u8) -> (u8, u8) {
        (self.lower[v as usize], self.upper[v as usize])
    }

    pub fn delta_minus(&self, v: u8) -> i32 {
        self.lower[v as usize] as i32 - v as i32
    }

    pub fn delta_plus(&self, v: u8) -> i32 {
        self.upper[v as usize] as i32 - v as i32
    }

    pub fn contains(&self, v: u8, candidate: u8) -> bool {
        let (lo, hi) = self.interval(v);
        (lo..=hi).contains(&candidate)
    }
}

/// Mean over pixels of `|D - D^|`, counting only pixels where the distorted
/// level falls outside the reference level's profile interval.
pub fn ndse(reference: &DepthMap, distorted: &DepthMap, profile: &DnoseProfile) -> Result<f64> {
    reference.check_same_size(distorted)?;
    let sum: u64 = reference
        .levels()
        .iter()
        .zip(distorted.levels())
        .filter(|(&r, &d)| !profile.contains(r, d))
        .map(|(&r, &d)| r.abs_diff(d) as u64)
        .sum();
    Ok(sum as f64 / reference.levels().len() as f64)
}
