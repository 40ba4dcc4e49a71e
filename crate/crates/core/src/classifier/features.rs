//! Hand-crafted image descriptor used in place of a learned convolutional
//! feature extractor.
//!
//! Layout of the 58 values:
//!
//! | range   | feature                                                     |
//! |---------|-------------------------------------------------------------|
//! | 0..24   | 8-bin histograms of R, G and B (fractions)                  |
//! | 24..30  | mean and variance of R, G, B on a [0, 1] scale              |
//! | 30..38  | 8-bin histogram of Sobel gradient magnitude on grayscale    |
//! | 38      | variance of the 4-neighbour Laplacian (blur measure)        |
//! | 39      | grayscale entropy, bits / 8                                 |
//! | 40..56  | log10 radially averaged power in 16 log-spaced bands        |
//! | 56      | fraction of edge pixels (gradient magnitude > threshold)    |
//! | 57      | fraction of near-background pixels                          |

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::techniques::Canvas;

pub const FEATURE_DIM: usize = 58;
pub const SPECTRUM_SIZE: usize = 128;
pub const SPECTRUM_BANDS: usize = 16;
pub const GRADIENT_BIN_EDGES: [f64; 7] = [0.02, 0.1, 0.25, 0.5, 1.0, 2.0, 3.0];
pub const EDGE_THRESHOLD: f64 = 0.5;
pub const BACKGROUND_TOLERANCE: u8 = 8;

pub const LAPLACIAN_VARIANCE_INDEX: usize = 38;
pub const SPECTRUM_OFFSET: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Image to fixed-length feature vector.
pub trait FeatureExtractor: Send + Sync {
    /// Identifier plus version, stored in model files.
    fn id(&self) -> &str;
    fn dimension(&self) -> usize;
    fn extract(&self, canvas: &Canvas) -> FeatureVector;
}

pub struct HandcraftedExtractor {
    fft: Arc<dyn Fft<f64>>,
}

impl HandcraftedExtractor {
    pub const ID: &'static str = "handcrafted-v1";

    pub fn new() -> Self {
        HandcraftedExtractor {
            fft: FftPlanner::new().plan_fft_forward(SPECTRUM_SIZE),
        }
    }

    /// Sum of power per radial band on the resampled grayscale, DC excluded.
    pub fn band_power(&self, canvas: &Canvas) -> [f64; SPECTRUM_BANDS] {
        let (w, h) = canvas.dimensions();
        let gray = resample(&grayscale(canvas), w as usize, h as usize, SPECTRUM_SIZE, SPECTRUM_SIZE);
        radial_band_power(&gray, self.fft.as_ref())
    }
}

impl Default for HandcraftedExtractor {
    fn default() -> Self {
        Self::new()
    }
}

impl FeatureExtractor for HandcraftedExtractor {
    fn id(&self) -> &str {
        Self::ID
    }

    fn dimension(&self) -> usize {
        FEATURE_DIM
    }

    fn extract(&self, canvas: &Canvas) -> FeatureVector {
        let (w, h) = canvas.dimensions();
        let (w, h) = (w as usize, h as usize);
        let n = (w * h) as f64;
        let mut out = Vec::with_capacity(FEATURE_DIM);

        let mut hist = [[0usize; 8]; 3];
        let mut sum = [0u64; 3];
        for p in canvas.pixels() {
            for c in 0..3 {
                hist[c][(p[c] >> 5) as usize] += 1;
                sum[c] += p[c] as u64;
            }
        }
        for channel in &hist {
            out.extend(channel.iter().map(|&k| k as f64 / n));
        }
        // Integer sums keep constant channels at exactly zero variance.
        let pixels = (w * h) as u64;
        let mut sq = [0u128; 3];
        for p in canvas.pixels() {
            for c in 0..3 {
                let d = p[c] as i128 * pixels as i128 - sum[c] as i128;
                sq[c] += (d * d) as u128;
            }
        }
        for c in 0..3 {
            out.push(sum[c] as f64 / n / 255.0);
            out.push(sq[c] as f64 / (n * n * n) / (255.0 * 255.0));
        }

        let gray = grayscale(canvas);
        let magnitude = sobel_magnitude(&gray, w, h);
        let mut grad_hist = [0usize; 8];
        for &m in &magnitude {
            grad_hist[GRADIENT_BIN_EDGES.iter().take_while(|&&e| m >= e).count()] += 1;
        }
        out.extend(grad_hist.iter().map(|&k| k as f64 / n));

        out.push(laplacian_variance(&gray, w, h));
        out.push(entropy(&gray));

        let bands = radial_band_power(&resample(&gray, w, h, SPECTRUM_SIZE, SPECTRUM_SIZE), self.fft.as_ref());
        out.extend(bands.iter().map(|&p| (p + 1e-10).log10()));

        out.push(magnitude.iter().filter(|&&m| m > EDGE_THRESHOLD).count() as f64 / n);
        out.push(canvas.near_background_count(BACKGROUND_TOLERANCE) as f64 / n);

        debug_assert_eq!(out.len(), FEATURE_DIM);
        FeatureVector(out)
    }
}

/// Luma on a [0, 1] scale, row-major.
pub fn grayscale(canvas: &Canvas) -> Vec<f64> {
    canvas
        .pixels()
        .map(|p| (0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64) / 255.0)
        .collect()
}

/// Sobel gradient magnitude with clamp-to-edge borders.
pub fn sobel_magnitude(gray: &[f64], w: usize, h: usize) -> Vec<f64> {
    let at = |x: isize, y: isize| {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        gray[y * w + x]
    };
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)
                - at(x - 1, y - 1)
                - 2.0 * at(x - 1, y)
                - at(x - 1, y + 1);
            let gy = at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)
                - at(x - 1, y - 1)
                - 2.0 * at(x, y - 1)
                - at(x + 1, y - 1);
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    out
}

/// Variance of the 4-neighbour Laplacian with periodic borders.
///
/// The periodic Laplacian is a circular convolution, so any circular
/// averaging filter (whose frequency response has magnitude at most 1) can
/// only lower it.
pub fn laplacian_variance(gray: &[f64], w: usize, h: usize) -> f64 {
    let n = (w * h) as f64;
    let mut values = Vec::with_capacity(w * h);
    for y in 0..h {
        let (up, down) = ((y + h - 1) % h, (y + 1) % h);
        for x in 0..w {
            let (left, right) = ((x + w - 1) % w, (x + 1) % w);
            values.push(
                gray[y * w + left] + gray[y * w + right] + gray[up * w + x] + gray[down * w + x]
                    - 4.0 * gray[y * w + x],
            );
        }
    }
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Shannon entropy of the 256-level grayscale histogram, divided by 8 bits.
pub fn entropy(gray: &[f64]) -> f64 {
    let mut hist = [0usize; 256];
    for &g in gray {
        hist[(g * 255.0).round().clamp(0.0, 255.0) as usize] += 1;
    }
    let n = gray.len() as f64;
    let bits: f64 = hist
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k| {
            let p = k as f64 / n;
            -p * p.log2()
        })
        .sum();
    bits / 8.0
}

/// Box-area resampling; each target pixel averages the source pixels under
/// its footprint (at least one).
pub fn resample(src: &[f64], w: usize, h: usize, tw: usize, th: usize) -> Vec<f64> {
    let span = |t: usize, target: usize, source: usize| {
        let lo = t * source / target;
        let hi = ((t + 1) * source).div_ceil(target).max(lo + 1).min(source);
        lo..hi
    };
    let mut out = Vec::with_capacity(tw * th);
    for ty in 0..th {
        let ys = span(ty, th, h);
        for tx in 0..tw {
            let xs = span(tx, tw, w);
            let mut s = 0.0;
            for y in ys.clone() {
                for x in xs.clone() {
                    s += src[y * w + x];
                }
            }
            out.push(s / (ys.len() * xs.len()) as f64);
        }
    }
    out
}

/// Power of the mean-removed square image summed over 16 log-spaced radial
/// bands from 1 to the corner frequency. Power is normalized so that the
/// total over all frequencies equals the pixel variance.
pub fn radial_band_power(gray: &[f64], fft: &dyn Fft<f64>) -> [f64; SPECTRUM_BANDS] {
    let n = fft.len();
    assert_eq!(gray.len(), n * n);
    let mean = gray.iter().sum::<f64>() / (n * n) as f64;
    let mut data: Vec<Complex<f64>> = gray.iter().map(|&g| Complex::new(g - mean, 0.0)).collect();
    for row in data.chunks_exact_mut(n) {
        fft.process(row);
    }
    let mut column = vec![Complex::new(0.0, 0.0); n];
    for x in 0..n {
        for y in 0..n {
            column[y] = data[y * n + x];
        }
        fft.process(&mut column);
        for y in 0..n {
            data[y * n + x] = column[y];
        }
    }
    let r_max = (n as f64 / 2.0) * std::f64::consts::SQRT_2;
    let norm = ((n * n) as f64).powi(2);
    let signed = |i: usize| if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
    let mut bands = [0.0; SPECTRUM_BANDS];
    for v in 0..n {
        for u in 0..n {
            let r = signed(u).hypot(signed(v));
            if r < 1.0 {
                continue;
            }
            let k = ((r.ln() / r_max.ln()) * SPECTRUM_BANDS as f64).floor() as usize;
            bands[k.min(SPECTRUM_BANDS - 1)] += data[v * n + u].norm_sqr() / norm;
        }
    }
    bands
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::techniques::BLACK;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(w: u32, h: u32, seed: u64) -> Canvas {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Canvas::new(w, h, BLACK);
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                c.plot(x, y, [rng.random(), rng.random(), rng.random()]);
            }
        }
        c
    }

    fn linear_gradient(w: u32, h: u32) -> Canvas {
        let mut c = Canvas::new(w, h, BLACK);
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let v = (255 * x / (w as i64 - 1)) as u8;
                c.plot(x, y, [v, v / 2, 255 - v]);
            }
        }
        c
    }

    #[test]
    fn dimension_and_finiteness() {
        let e = HandcraftedExtractor::new();
        for c in [noise(37, 23, 1), linear_gradient(300, 200), Canvas::new(1, 1, BLACK)] {
            let f = e.extract(&c);
            assert_eq!(f.len(), FEATURE_DIM);
            assert!(f.values().iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn uniform_gray_image() {
        let c = Canvas::new(64, 64, [128, 128, 128]);
        let f = HandcraftedExtractor::new().extract(&c);
        for c in 0..3 {
            assert_eq!(f.0[24 + 2 * c + 1], 0.0, "channel variance");
        }
        assert_eq!(f.0[30], 1.0);
        assert!(f.0[31..38].iter().all(|&v| v == 0.0));
        assert_eq!(f.0[LAPLACIAN_VARIANCE_INDEX], 0.0);
        assert_eq!(f.0[39], 0.0);
        assert_eq!(f.0[56], 0.0);
    }

    #[test]
    fn extraction_is_deterministic() {
        let e = HandcraftedExtractor::new();
        let c = noise(50, 40, 9);
        assert_eq!(e.extract(&c), e.extract(&c));
    }

    #[test]
    fn noise_has_more_high_band_energy_than_gradient() {
        let e = HandcraftedExtractor::new();
        let high = |c: &Canvas| e.band_power(c)[8..].iter().sum::<f64>();
        let (n, g) = (high(&noise(128, 128, 4)), high(&linear_gradient(128, 128)));
        assert!(n > g, "noise {n} vs gradient {g}");
    }

    #[test]
    fn band_power_sums_to_variance() {
        let c = noise(128, 128, 5);
        let e = HandcraftedExtractor::new();
        let gray = grayscale(&c);
        let mean = gray.iter().sum::<f64>() / gray.len() as f64;
        let var = gray.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / gray.len() as f64;
        let total: f64 = e.band_power(&c).iter().sum();
        assert!((total - var).abs() < 1e-9 * var.max(1.0), "{total} vs {var}");
    }

    #[test]
    fn resample_identity_and_average() {
        let src: Vec<f64> = (0..16).map(|v| v as f64).collect();
        assert_eq!(resample(&src, 4, 4, 4, 4), src);
        assert_eq!(resample(&src, 4, 4, 2, 2), vec![2.5, 4.5, 10.5, 12.5]);
        assert_eq!(resample(&[3.0], 1, 1, 3, 2), vec![3.0; 6]);
    }
}
