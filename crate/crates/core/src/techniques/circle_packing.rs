use rand::Rng;

use super::canvas::Canvas;
use super::palette::palette;
use super::{int_arg, TechniqueError};
use crate::genome::{ParamDomain, ParamValue};

/// Minimum gap between accepted circles, in pixels.
pub const SEPARATION: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirclePackingParams {
    pub palette: usize,
    pub attempts: u32,
    pub min_radius: u32,
    pub max_radius: u32,
}

impl CirclePackingParams {
    pub fn domains() -> Vec<ParamDomain> {
        vec![
            ParamDomain::integer("palette", 0, 7),
            ParamDomain::integer("attempts", 10, 2_000),
            ParamDomain::integer("min_radius", 1, 10),
            ParamDomain::integer("max_radius", 5, 100),
        ]
    }

    pub fn from_args(args: &[ParamValue]) -> Result<Self, TechniqueError> {
        Ok(CirclePackingParams {
            palette: int_arg(args, 0)? as usize,
            attempts: int_arg(args, 1)? as u32,
            min_radius: int_arg(args, 2)? as u32,
            max_radius: int_arg(args, 3)? as u32,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

impl Circle {
    fn clears(&self, other: &Circle, margin: f64) -> bool {
        let d = ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt();
        d >= self.r + other.r + margin
    }

    fn inside(&self, width: f64, height: f64) -> bool {
        self.x - self.r >= 0.0
            && self.y - self.r >= 0.0
            && self.x + self.r <= width
            && self.y + self.r <= height
    }
}

/// Rejection sampling followed by growth. Each trial proposes a uniform centre
/// at `min_radius`; an accepted circle then grows one pixel at a time while it
/// stays clear of every other circle, inside the canvas and within
/// `max_radius`.
pub fn pack_circles<R: Rng + ?Sized>(
    width: u32,
    height: u32,
    params: &CirclePackingParams,
    rng: &mut R,
) -> Vec<Circle> {
    let (w, h) = (width as f64, height as f64);
    let min_r = params.min_radius as f64;
    let max_r = params.max_radius.max(params.min_radius) as f64;
    let mut accepted: Vec<Circle> = Vec::new();
    for _ in 0..params.attempts {
        let mut c = Circle {
            x: rng.random_range(0.0..w),
            y: rng.random_range(0.0..h),
            r: min_r,
        };
        if !accepted.iter().all(|o| c.clears(o, SEPARATION)) {
            continue;
        }
        while c.r + 1.0 <= max_r {
            let grown = Circle { r: c.r + 1.0, ..c };
            if !grown.inside(w, h) || !accepted.iter().all(|o| grown.clears(o, SEPARATION)) {
                break;
            }
            c = grown;
        }
        accepted.push(c);
    }
    accepted
}

pub fn draw_circle_packing<R: Rng + ?Sized>(
    canvas: &mut Canvas,
    params: &CirclePackingParams,
    rng: &mut R,
) -> Result<(), TechniqueError> {
    let colors = palette(params.palette).colors;
    let circles = pack_circles(canvas.width(), canvas.height(), params, rng);
    for c in circles {
        let color = colors[rng.random_range(0..colors.len())];
        canvas.fill_circle(c.x, c.y, c.r, color);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::techniques::canvas::BLACK;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_attempts_draws_nothing() {
        let mut c = Canvas::new(32, 32, BLACK);
        let p = CirclePackingParams {
            palette: 0,
            attempts: 0,
            min_radius: 2,
            max_radius: 10,
        };
        draw_circle_packing(&mut c, &p, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(c, Canvas::new(32, 32, BLACK));
    }

    #[test]
    fn oversized_radius_accepts_at_most_one() {
        let p = CirclePackingParams {
            palette: 0,
            attempts: 200,
            min_radius: 60,
            max_radius: 80,
        };
        for seed in 0..20 {
            let circles = pack_circles(64, 64, &p, &mut ChaCha8Rng::seed_from_u64(seed));
            assert!(circles.len() <= 1);
        }
    }

    #[test]
    fn accepted_circles_never_overlap() {
        let p = CirclePackingParams {
            palette: 3,
            attempts: 800,
            min_radius: 1,
            max_radius: 30,
        };
        for seed in 0..10 {
            let circles = pack_circles(128, 128, &p, &mut ChaCha8Rng::seed_from_u64(seed));
            assert!(circles.len() > 10);
            for (i, a) in circles.iter().enumerate() {
                for b in &circles[i + 1..] {
                    let d = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
                    assert!(d >= a.r + b.r);
                }
            }
        }
    }

    #[test]
    fn growth_respects_max_radius() {
        let p = CirclePackingParams {
            palette: 0,
            attempts: 50,
            min_radius: 3,
            max_radius: 7,
        };
        let circles = pack_circles(200, 200, &p, &mut ChaCha8Rng::seed_from_u64(4));
        assert!(circles.iter().all(|c| c.r >= 3.0 && c.r <= 7.0));
    }
}
