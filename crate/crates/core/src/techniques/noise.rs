use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::TechniqueError;

/// Fractal 2-D gradient (Perlin) noise over a seed-shuffled 256-entry
/// permutation table.
#[derive(Debug, Clone)]
pub struct NoiseField {
    seed: u64,
    octaves: u32,
    falloff: f64,
    scale: f64,
    perm: [u8; 512],
    amplitude_sum: f64,
}

// Improved-noise gradient set for two dimensions.
const GRADIENTS: [(f64, f64); 8] = [
    (1.0, 1.0),
    (-1.0, 1.0),
    (1.0, -1.0),
    (-1.0, -1.0),
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
];

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

fn lerp(t: f64, a: f64, b: f64) -> f64 {
    a + t * (b - a)
}

impl NoiseField {
    pub fn new(seed: u64, octaves: u32, falloff: f64, scale: f64) -> Result<Self, TechniqueError> {
        if octaves == 0 {
            return Err(TechniqueError::InvalidParameter("octaves must be >= 1".into()));
        }
        if !(falloff > 0.0 && falloff <= 1.0) {
            return Err(TechniqueError::InvalidParameter(format!(
                "falloff {falloff} outside (0, 1]"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(TechniqueError::InvalidParameter(format!("scale {scale} must be > 0")));
        }
        let mut table: Vec<u8> = (0..=255).collect();
        table.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut perm = [0u8; 512];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = table[i & 255];
        }
        let amplitude_sum = (0..octaves).map(|k| falloff.powi(k as i32)).sum();
        Ok(NoiseField {
            seed,
            octaves,
            falloff,
            scale,
            perm,
            amplitude_sum,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn octaves(&self) -> u32 {
        self.octaves
    }

    pub fn falloff(&self) -> f64 {
        self.falloff
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn gradient(&self, xi: usize, yi: usize, dx: f64, dy: f64) -> f64 {
        let h = self.perm[self.perm[xi] as usize + yi] as usize & 7;
        let (gx, gy) = GRADIENTS[h];
        gx * dx + gy * dy
    }

    /// Single-octave noise in lattice coordinates; zero at every lattice point.
    pub fn perlin(&self, x: f64, y: f64) -> f64 {
        let (fx, fy) = (x.floor(), y.floor());
        let xi = (fx as i64 & 255) as usize;
        let yi = (fy as i64 & 255) as usize;
        let (dx, dy) = (x - fx, y - fy);
        let (u, v) = (fade(dx), fade(dy));
        let n00 = self.gradient(xi, yi, dx, dy);
        let n10 = self.gradient(xi + 1, yi, dx - 1.0, dy);
        let n01 = self.gradient(xi, yi + 1, dx, dy - 1.0);
        let n11 = self.gradient(xi + 1, yi + 1, dx - 1.0, dy - 1.0);
        lerp(v, lerp(u, n00, n10), lerp(u, n01, n11))
    }

    /// Octave sum at canvas coordinates, renormalized to [-1, 1].
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let (x, y) = (x * self.scale, y * self.scale);
        let mut sum = 0.0;
        let mut amplitude = 1.0;
        let mut frequency = 1.0;
        for _ in 0..self.octaves {
            sum += amplitude * self.perlin(x * frequency, y * frequency);
            amplitude *= self.falloff;
            frequency *= 2.0;
        }
        (sum / self.amplitude_sum).clamp(-1.0, 1.0)
    }

    pub fn angle_at(&self, x: f64, y: f64) -> f64 {
        noise_to_angle(self.value(x, y))
    }
}

/// Linear map of a noise value in [-1, 1] onto [-2π, 2π].
pub fn noise_to_angle(n: f64) -> f64 {
    n * TAU
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::f64::consts::PI;

    #[test]
    fn zero_at_lattice_points() {
        for seed in [0, 1, 99] {
            let f = NoiseField::new(seed, 1, 0.5, 0.25).unwrap();
            for i in -3..10 {
                for j in -3..10 {
                    // scale 0.25: every multiple of 4 lands on the lattice
                    assert_eq!(f.value(4.0 * i as f64, 4.0 * j as f64), 0.0);
                }
            }
        }
    }

    #[test]
    fn deterministic() {
        let a = NoiseField::new(7, 4, 0.6, 0.013).unwrap();
        let b = NoiseField::new(7, 4, 0.6, 0.013).unwrap();
        for k in 0..100 {
            let (x, y) = (k as f64 * 3.7, k as f64 * 1.3);
            assert_eq!(a.value(x, y), a.value(x, y));
            assert_eq!(a.value(x, y), b.value(x, y));
        }
    }

    #[test]
    fn samples_stay_in_range_and_spread() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = NoiseField::new(3, 1, 1.0, 0.05).unwrap();
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        for _ in 0..10_000 {
            let v = f.value(rng.random_range(0.0..500.0), rng.random_range(0.0..500.0));
            assert!((-1.0..=1.0).contains(&v));
            lo = lo.min(v);
            hi = hi.max(v);
        }
        assert!(lo < -0.2 && hi > 0.2, "range [{lo}, {hi}]");
    }

    #[test]
    fn angle_map() {
        assert_eq!(noise_to_angle(0.0), 0.0);
        assert_eq!(noise_to_angle(1.0), 2.0 * PI);
        assert_eq!(noise_to_angle(-1.0), -2.0 * PI);
        assert_eq!(noise_to_angle(0.5), PI);
    }

    #[test]
    fn rejects_invalid_settings() {
        assert!(NoiseField::new(0, 0, 0.5, 1.0).is_err());
        assert!(NoiseField::new(0, 1, 0.0, 1.0).is_err());
        assert!(NoiseField::new(0, 1, 1.5, 1.0).is_err());
        assert!(NoiseField::new(0, 1, 0.5, 0.0).is_err());
    }
}
