//! Raster types and binary PGM/PPM (P5/P6, maxval 255) ingestion.
//!
//! Rasters are row-major. Luma and color samples are `f64` in `[0, 255]`;
//! depth maps keep their 8-bit quantized levels.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Minimum side length every feature window supports. Constructors accept
/// smaller rasters; feature extraction for a scorer rejects them.
pub const MIN_FEATURE_SIDE: usize = 8;

/// Single-channel luminance raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    luma: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, luma: Vec<f64>) -> Result<Self> {
        check_plane(width, height, &luma)?;
        Ok(Image {
            width,
            height,
            luma,
        })
    }

    /// Builds an image from `f(row, col)`, clamping into `[0, 255]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut luma = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                luma.push(clamp_sample(f(r, c)));
            }
        }
        Image {
            width,
            height,
            luma,
        }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Image::from_fn(width, height, |_, _| value)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.luma.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.luma.is_empty()
    }

    #[inline]
    pub fn pixels(&self) -> &[f64] {
        &self.luma
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.luma[row * self.width + col]
    }

    /// Same-size check used by every full-reference feature.
    pub fn check_same_size(&self, other: &Image) -> Result<()> {
        check_dims(self.width, self.height, other.width, other.height)
    }

    /// Applies `f` per pixel, clamping back into range.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Image {
        Image {
            width: self.width,
            height: self.height,
            luma: self.luma.iter().map(|&v| clamp_sample(f(v))).collect(),
        }
    }

    /// Writes binary PGM (P5). Samples are rounded to the nearest integer.
    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let bytes: Vec<u8> = self.luma.iter().map(|&v| v.round() as u8).collect();
        write_pnm(path.as_ref(), "P5", self.width, self.height, &bytes)
    }
}

/// Three-plane color raster (R, G, B).
#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    planes: [Vec<f64>; 3],
}

impl ColorImage {
    pub fn new(width: usize, height: usize, planes: [Vec<f64>; 3]) -> Result<Self> {
        for plane in &planes {
            check_plane(width, height, plane)?;
        }
        Ok(ColorImage {
            width,
            height,
            planes,
        })
    }

    /// Gray promoted to three identical channels.
    pub fn from_gray(image: &Image) -> Self {
        let p = image.pixels().to_vec();
        ColorImage {
            width: image.width(),
            height: image.height(),
            planes: [p.clone(), p.clone(), p],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn plane(&self, channel: usize) -> &[f64] {
        &self.planes[channel]
    }

    #[inline]
    pub fn pixel(&self, index: usize) -> [f64; 3] {
        [
            self.planes[0][index],
            self.planes[1][index],
            self.planes[2][index],
        ]
    }

    pub fn check_same_size(&self, other: &ColorImage) -> Result<()> {
        check_dims(self.width, self.height, other.width, other.height)
    }

    /// Rec.601 luma: 0.299 R + 0.587 G + 0.114 B.
    pub fn to_luma(&self) -> Image {
        let luma = (0..self.width * self.height)
            .map(|i| {
                let [r, g, b] = self.pixel(i);
                clamp_sample(0.299 * r + 0.587 * g + 0.114 * b)
            })
            .collect();
        Image {
            width: self.width,
            height: self.height,
            luma,
        }
    }

    pub fn write_ppm(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut bytes = Vec::with_capacity(self.width * self.height * 3);
        for i in 0..self.width * self.height {
            for v in self.pixel(i) {
                bytes.push(v.round() as u8);
            }
        }
        write_pnm(path.as_ref(), "P6", self.width, self.height, &bytes)
    }
}

/// 8-bit quantized depth map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    depth: Vec<u8>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, depth: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || depth.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "depth map of {width}x{height} needs {} samples, got {}",
                width * height,
                depth.len()
            )));
        }
        Ok(DepthMap {
            width,
            height,
            depth,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut depth = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                depth.push(f(r, c));
            }
        }
        DepthMap {
            width,
            height,
            depth,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn levels(&self) -> &[u8] {
        &self.depth
    }

    pub fn check_same_size(&self, other: &DepthMap) -> Result<()> {
        check_dims(self.width, self.height, other.width, other.height)
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        write_pnm(path.as_ref(), "P5", self.width, self.height, &self.depth)
    }
}

/// A texture view as loaded from disk: luma always, color planes when the
/// source was a PPM.
#[derive(Debug, Clone, PartialEq)]
pub struct Texture {
    pub luma: Image,
    pub color: Option<ColorImage>,
}

impl Texture {
    pub fn from_gray(luma: Image) -> Self {
        Texture { luma, color: None }
    }

    pub fn from_color(color: ColorImage) -> Self {
        Texture {
            luma: color.to_luma(),
            color: Some(color),
        }
    }

    /// Color view for color-vector features; gray sources are promoted.
    pub fn color_or_promoted(&self) -> std::borrow::Cow<'_, ColorImage> {
        match &self.color {
            Some(c) => std::borrow::Cow::Borrowed(c),
            None => std::borrow::Cow::Owned(ColorImage::from_gray(&self.luma)),
        }
    }

    pub fn width(&self) -> usize {
        self.luma.width()
    }

    pub fn height(&self) -> usize {
        self.luma.height()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadMode {
    Gray,
    Color,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Loaded {
    Gray(Image),
    Color(ColorImage),
}

/// Loads a P5 or P6 file. In gray mode color input is converted with
/// Rec.601 weights; in color mode gray input is promoted.
pub fn load_image(path: impl AsRef<Path>, mode: LoadMode) -> Result<Loaded> {
    let texture = load_texture(path)?;
    Ok(match mode {
        LoadMode::Gray => Loaded::Gray(texture.luma),
        LoadMode::Color => Loaded::Color(texture.color_or_promoted().into_owned()),
    })
}

/// Loads a texture keeping both luma and (when present) color planes.
pub fn load_texture(path: impl AsRef<Path>) -> Result<Texture> {
    let path = path.as_ref();
    let raw = read_pnm(path)?;
    if raw.channels == 1 {
        return Ok(Texture::from_gray(Image {
            width: raw.width,
            height: raw.height,
            luma: raw.data.iter().map(|&b| b as f64).collect(),
        }));
    }
    let mut planes: [Vec<f64>; 3] = Default::default();
    for px in raw.data.chunks_exact(3) {
        for ch in 0..3 {
            planes[ch].push(px[ch] as f64);
        }
    }
    Ok(Texture::from_color(ColorImage {
        width: raw.width,
        height: raw.height,
        planes,
    }))
}

/// Loads a depth map from a P5 file (P6 input is reduced to its first channel).
pub fn load_depth(path: impl AsRef<Path>) -> Result<DepthMap> {
    let raw = read_pnm(path.as_ref())?;
    let depth = if raw.channels == 1 {
        raw.data
    } else {
        raw.data.chunks_exact(3).map(|px| px[0]).collect()
    };
    DepthMap::new(raw.width, raw.height, depth)
}

struct RawPnm {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

fn read_pnm(path: &Path) -> Result<RawPnm> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pnm(&bytes).map_err(|reason| Error::Load {
        path: path.to_path_buf(),
        reason,
    })
}

fn parse_pnm(bytes: &[u8]) -> std::result::Result<RawPnm, String> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err("not a PNM file (missing 'P' magic)".into());
    }
    let channels = match bytes[1] {
        b'5' => 1,
        b'6' => 3,
        other => {
            return Err(format!(
                "unsupported format P{}; only binary P5 and P6 are accepted",
                other as char
            ))
        }
    };
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for (k, field) in fields.iter_mut().enumerate() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                Some(_) => break,
                None => return Err("truncated header".into()),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            let name = ["width", "height", "maxval"][k];
            return Err(format!("malformed header: expected {name}"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or("malformed header: numeric field overflow")?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err("malformed header: missing separator before payload".into()),
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(format!(
            "unsupported bit depth: maxval {maxval}, only 255 is accepted"
        ));
    }
    if width == 0 || height == 0 {
        return Err("zero-sized raster".into());
    }
    let needed = width * height * channels;
    let payload = &bytes[pos..];
    if payload.len() < needed {
        return Err(format!(
            "truncated payload: expected {needed} bytes, found {}",
            payload.len()
        ));
    }
    Ok(RawPnm {
        width,
        height,
        channels,
        data: payload[..needed].to_vec(),
    })
}

fn write_pnm(path: &Path, magic: &str, width: usize, height: usize, data: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write!(file, "{magic}\n{width} {height}\n255\n")
        .and_then(|_| file.write_all(data))
        .map_err(|e| Error::io(path, e))
}

fn check_plane(width: usize, height: usize, plane: &[f64]) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidRaster("zero-sized raster".into()));
    }
    if plane.len() != width * height {
        return Err(Error::InvalidRaster(format!(
            "{width}x{height} raster needs {} samples, got {}",
            width * height,
            plane.len()
        )));
    }
    if let Some(bad) = plane.iter().find(|v| !(0.0..=255.0).contains(*v)) {
        return Err(Error::InvalidRaster(format!(
            "sample {bad} outside [0, 255]"
        )));
    }
    Ok(())
}

fn check_dims(w0: usize, h0: usize, w1: usize, h1: usize) -> Result<()> {
    if w0 != w1 || h0 != h1 {
        return Err(Error::SizeMismatch {
            ref_w: w0,
            ref_h: h0,
            dist_w: w1,
            dist_h: h1,
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn clamp_sample(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 255.0)
    }
}
