use std::f64::consts::TAU;

use rand::Rng;

use super::canvas::Canvas;
use super::palette::palette;
use super::{int_arg, real_arg, TechniqueError};
use crate::genome::{ParamDomain, ParamValue};

/// Half-width of the per-curve phase jitter, in radians.
pub const PHASE_JITTER: f64 = 0.5;

/// Stacked sine curves. `amplitude` and `offset` are fractions of the canvas height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasicTrigParams {
    pub palette: usize,
    pub curves: u32,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub offset: f64,
    pub thickness: u32,
}

impl BasicTrigParams {
    pub fn domains() -> Vec<ParamDomain> {
        vec![
            ParamDomain::integer("palette", 0, 7),
            ParamDomain::integer("curves", 1, 12),
            ParamDomain::real("amplitude", 0.0, 0.5),
            ParamDomain::real("frequency", 0.5, 8.0),
            ParamDomain::real("phase", 0.0, TAU),
            ParamDomain::real("offset", 0.0, 1.0),
            ParamDomain::integer("thickness", 1, 6),
        ]
    }

    pub fn from_args(args: &[ParamValue]) -> Result<Self, TechniqueError> {
        Ok(BasicTrigParams {
            palette: int_arg(args, 0)? as usize,
            curves: int_arg(args, 1)? as u32,
            amplitude: real_arg(args, 2)?,
            frequency: real_arg(args, 3)?,
            phase: real_arg(args, 4)?,
            offset: real_arg(args, 5)?,
            thickness: int_arg(args, 6)? as u32,
        })
    }
}

pub fn draw_basic_trig<R: Rng + ?Sized>(
    canvas: &mut Canvas,
    params: &BasicTrigParams,
    rng: &mut R,
) -> Result<(), TechniqueError> {
    let colors = palette(params.palette).colors;
    let (w, h) = (canvas.width() as f64, canvas.height() as f64);
    for i in 0..params.curves as usize {
        let color = colors[i % colors.len()];
        let phase = params.phase + rng.random_range(-PHASE_JITTER..=PHASE_JITTER);
        let curve_y =
            |x: f64| (params.offset + params.amplitude * (params.frequency * x / w * TAU + phase).sin()) * h;
        let mut prev = (0.0, curve_y(0.0));
        for xi in 1..canvas.width() {
            let p = (xi as f64, curve_y(xi as f64));
            canvas.line(prev, p, params.thickness, color);
            prev = p;
        }
        if canvas.width() == 1 {
            canvas.line(prev, prev, params.thickness, color);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::techniques::canvas::BLACK;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> BasicTrigParams {
        BasicTrigParams {
            palette: 5,
            curves: 4,
            amplitude: 0.3,
            frequency: 2.0,
            phase: 1.0,
            offset: 0.5,
            thickness: 2,
        }
    }

    #[test]
    fn zero_amplitude_is_one_horizontal_line() {
        let mut c = Canvas::new(50, 40, BLACK);
        let p = BasicTrigParams {
            amplitude: 0.0,
            thickness: 1,
            ..params()
        };
        draw_basic_trig(&mut c, &p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for y in 0..40 {
            for x in 0..50 {
                assert_eq!(c.pixel(x, y) != BLACK, y == 20, "({x},{y})");
            }
        }
    }

    #[test]
    fn zero_curves_draws_nothing() {
        let mut c = Canvas::new(20, 20, BLACK);
        let p = BasicTrigParams {
            curves: 0,
            ..params()
        };
        draw_basic_trig(&mut c, &p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(c, Canvas::new(20, 20, BLACK));
    }

    #[test]
    fn deterministic() {
        let render = || {
            let mut c = Canvas::new(80, 60, BLACK);
            draw_basic_trig(&mut c, &params(), &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
            c
        };
        assert_eq!(render(), render());
    }
}
