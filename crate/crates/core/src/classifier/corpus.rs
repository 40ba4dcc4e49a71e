//! Seeded synthetic corpora: uniform noise for the not-art class and smooth
//! gradients with a few hard-edged shapes for the art class.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{CentroidModel, ClassifierError, FeatureExtractor, HandcraftedExtractor};
use crate::techniques::{Canvas, Rgb, BLACK};
use crate::util::derive_seed;

/// Side length of the images behind [`reference_model`].
pub const REFERENCE_SIZE: u32 = 128;
/// Images per class behind [`reference_model`].
pub const REFERENCE_COUNT: usize = 50;
/// Seed of the reference model used when a run names no model file.
pub const REFERENCE_SEED: u64 = 0;

fn image_rng(seed: u64, kind: &str, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(&[&seed.to_le_bytes(), kind.as_bytes(), &(index as u64).to_le_bytes()]))
}

/// Independent uniform RGB pixels.
pub fn noise_image(width: u32, height: u32, seed: u64, index: usize) -> Canvas {
    let mut rng = image_rng(seed, "noise", index);
    let mut canvas = Canvas::new(width, height, BLACK);
    for y in 0..height as i64 {
        for x in 0..width as i64 {
            let c: Rgb = [rng.random(), rng.random(), rng.random()];
            canvas.plot(x, y, c);
        }
    }
    canvas
}

fn random_color(rng: &mut ChaCha8Rng) -> Rgb {
    [rng.random(), rng.random(), rng.random()]
}

/// A smooth linear gradient between two colours, or a black field, overlaid
/// with one to six filled circles and thick lines.
pub fn structured_image(width: u32, height: u32, seed: u64, index: usize) -> Canvas {
    let mut rng = image_rng(seed, "structured", index);
    let mut canvas = Canvas::new(width, height, BLACK);
    if rng.random_bool(0.5) {
        let (a, b) = (random_color(&mut rng), random_color(&mut rng));
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let (dx, dy) = (angle.cos(), angle.sin());
        let span = dx.abs() * width as f64 + dy.abs() * height as f64;
        let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
        for y in 0..height {
            for x in 0..width {
                let t = (((x as f64 - cx) * dx + (y as f64 - cy) * dy) / span + 0.5).clamp(0.0, 1.0);
                let c = std::array::from_fn(|k| (a[k] as f64 + (b[k] as f64 - a[k] as f64) * t).round() as u8);
                canvas.plot(x as i64, y as i64, c);
            }
        }
    }
    let (w, h) = (width as f64, height as f64);
    for _ in 0..rng.random_range(1..=6) {
        let color = random_color(&mut rng);
        if rng.random_bool(0.5) {
            let r = rng.random_range(0.05..0.25) * w.min(h);
            canvas.fill_circle(rng.random_range(0.0..w), rng.random_range(0.0..h), r, color);
        } else {
            let from = (rng.random_range(0.0..w), rng.random_range(0.0..h));
            let to = (rng.random_range(0.0..w), rng.random_range(0.0..h));
            canvas.line(from, to, rng.random_range(1..=6), color);
        }
    }
    canvas
}

/// Writes `noise_0000.png`, `noise_0001.png`, ... into `out_dir`.
pub fn generate_noise_corpus(
    count: usize,
    width: u32,
    height: u32,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ClassifierError> {
    if count == 0 {
        return Err(ClassifierError::InvalidCount(1));
    }
    fs::create_dir_all(out_dir).map_err(|source| ClassifierError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let path = out_dir.join(format!("noise_{i:04}.png"));
            noise_image(width, height, seed, i)
                .save_png(&path)
                .map_err(|source| ClassifierError::Io { path: path.clone(), source })?;
            Ok(path)
        })
        .collect()
}

/// Model trained in memory on 50 structured and 50 noise images at 128×128.
/// Used when no model file is supplied.
pub fn reference_model(seed: u64) -> CentroidModel {
    let extractor = HandcraftedExtractor::new();
    let features = |f: fn(u32, u32, u64, usize) -> Canvas| -> Vec<_> {
        (0..REFERENCE_COUNT)
            .into_par_iter()
            .map(|i| extractor.extract(&f(REFERENCE_SIZE, REFERENCE_SIZE, seed, i)))
            .collect()
    };
    let art = features(structured_image);
    let not_art = features(noise_image);
    CentroidModel::fit(extractor.id(), &art, &not_art).expect("non-empty corpora of equal dimension")
}
