//! Seeded random reference/distorted pairs.

use paraboost_core::dataset::{DepthPair, ViewPair, ViewSet};
use paraboost_core::image::{ColorImage, DepthMap, Image, Texture};
use paraboost_core::synth::{add_noise, blocking, test_pattern};
use paraboost_core::features::filter::gaussian_blur;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Textured reference (pattern plus mild noise so no two neighbours tie).
pub fn reference(w: usize, h: usize, seed: u64) -> Image {
    add_noise(&test_pattern(w, h, seed), 4.0, seed ^ 0x5eed)
}

pub fn distort(img: &Image, rng: &mut ChaCha8Rng) -> Image {
    match rng.random_range(0..4) {
        0 => add_noise(img, rng.random_range(2.0..30.0), rng.random()),
        1 => gaussian_blur(img, rng.random_range(0.5..3.0)),
        2 => blocking(img, 4, rng.random_range(0.2..1.0)),
        _ => {
            let (gain, off) = (rng.random_range(0.5..1.2), rng.random_range(-20.0..20.0));
            add_noise(&img.map(|v| gain * v + off), 1.0, rng.random())
        }
    }
}

fn color_pair(w: usize, h: usize, seed: u64, rng: &mut ChaCha8Rng) -> ViewPair {
    let planes: Vec<Image> = (0..3).map(|k| reference(w, h, seed * 3 + k)).collect();
    let dist: Vec<Image> = planes.iter().map(|p| distort(p, rng)).collect();
    let to_color = |p: &[Image]| {
        ColorImage::new(w, h, [p[0].pixels().to_vec(), p[1].pixels().to_vec(), p[2].pixels().to_vec()]).unwrap()
    };
    ViewPair {
        reference: Texture::from_color(to_color(&planes)),
        distorted: Texture::from_color(to_color(&dist)),
    }
}

fn depth_pair(w: usize, h: usize, rng: &mut ChaCha8Rng) -> DepthPair {
    let reference = DepthMap::from_fn(w, h, |_, _| rng.random());
    let levels = reference
        .levels()
        .iter()
        .map(|&v| (v as i32 + rng.random_range(-12..=12)).clamp(0, 255) as u8)
        .collect();
    DepthPair {
        distorted: DepthMap::new(w, h, levels).unwrap(),
        reference,
    }
}

/// Random stereo stimulus with color planes and depth maps, sides in
/// `[min_side, 32]`. Oracles look at view 0.
pub fn random_view_set(seed: u64, min_side: usize) -> ViewSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.random_range(min_side..=32);
    let h = rng.random_range(min_side..=32);
    let views = vec![color_pair(w, h, seed, &mut rng), color_pair(w, h, seed + 7_919, &mut rng)];
    let depths = vec![depth_pair(w, h, &mut rng), depth_pair(w, h, &mut rng)];
    ViewSet::new(views, Some(depths)).unwrap()
}

/// `views` with every distorted texture and depth map replaced by its reference.
pub fn identical(views: &ViewSet) -> ViewSet {
    let pairs = views
        .views()
        .iter()
        .map(|p| ViewPair {
            reference: p.reference.clone(),
            distorted: p.reference.clone(),
        })
        .collect();
    let depths = views.depths().map(|ds| {
        ds.iter()
            .map(|d| DepthPair {
                reference: d.reference.clone(),
                distorted: d.reference.clone(),
            })
            .collect()
    });
    ViewSet::new(pairs, depths).unwrap()
}
