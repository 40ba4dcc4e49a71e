use rand::Rng;

use super::canvas::Canvas;
use super::noise::NoiseField;
use super::palette::palette;
use super::{int_arg, real_arg, TechniqueError};
use crate::genome::{ParamDomain, ParamValue};

/// Fixed advance per streamline step of `flow-field-2`, in pixels.
pub const STREAMLINE_STEP: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub seed: u64,
    pub octaves: u32,
    pub falloff: f64,
    pub scale: f64,
}

impl NoiseParams {
    pub fn field(&self) -> Result<NoiseField, TechniqueError> {
        NoiseField::new(self.seed, self.octaves, self.falloff, self.scale)
    }

    fn domains() -> Vec<ParamDomain> {
        vec![
            ParamDomain::integer("noise_seed", 0, 65_535),
            ParamDomain::integer("octaves", 1, 6),
            ParamDomain::real("falloff", 0.1, 1.0),
            ParamDomain::real("scale", 0.001, 0.02),
        ]
    }

    fn from_args(args: &[ParamValue], at: usize) -> Result<Self, TechniqueError> {
        Ok(NoiseParams {
            seed: int_arg(args, at)? as u64,
            octaves: int_arg(args, at + 1)? as u32,
            falloff: real_arg(args, at + 2)?,
            scale: real_arg(args, at + 3)?,
        })
    }
}

/// Particle flow field: free particles advected along the noise angle field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowFieldParams {
    pub palette: usize,
    pub particles: u32,
    pub steps: u32,
    pub step_size: f64,
    pub noise: NoiseParams,
}

impl FlowFieldParams {
    pub fn domains() -> Vec<ParamDomain> {
        let mut d = vec![
            ParamDomain::integer("palette", 0, 7),
            ParamDomain::integer("particles", 100, 5_000),
            ParamDomain::integer("steps", 50, 1_000),
            ParamDomain::real("step_size", 0.5, 3.0),
        ];
        d.extend(NoiseParams::domains());
        d
    }

    pub fn from_args(args: &[ParamValue]) -> Result<Self, TechniqueError> {
        Ok(FlowFieldParams {
            palette: int_arg(args, 0)? as usize,
            particles: int_arg(args, 1)? as u32,
            steps: int_arg(args, 2)? as u32,
            step_size: real_arg(args, 3)?,
            noise: NoiseParams::from_args(args, 4)?,
        })
    }
}

pub fn draw_flow_field<R: Rng + ?Sized>(
    canvas: &mut Canvas,
    params: &FlowFieldParams,
    rng: &mut R,
) -> Result<(), TechniqueError> {
    let field = params.noise.field()?;
    let colors = palette(params.palette).colors;
    let (w, h) = (canvas.width() as f64, canvas.height() as f64);
    for _ in 0..params.particles {
        let (mut x, mut y) = (rng.random_range(0.0..w), rng.random_range(0.0..h));
        let color = colors[rng.random_range(0..colors.len())];
        for _ in 0..params.steps {
            // Particles that leave the canvas are terminated, never wrapped.
            if !(0.0..w).contains(&x) || !(0.0..h).contains(&y) {
                break;
            }
            canvas.plot(x.floor() as i64, y.floor() as i64, color);
            let theta = field.angle_at(x, y);
            x += params.step_size * theta.cos();
            y += params.step_size * theta.sin();
        }
    }
    Ok(())
}

/// Streamline flow field: connected polylines seeded on a regular grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowField2Params {
    pub palette: usize,
    pub spacing: u32,
    pub length: u32,
    pub thickness: u32,
    pub noise: NoiseParams,
}

impl FlowField2Params {
    pub fn domains() -> Vec<ParamDomain> {
        let mut d = vec![
            ParamDomain::integer("palette", 0, 7),
            ParamDomain::integer("spacing", 8, 64),
            ParamDomain::integer("length", 10, 100),
            ParamDomain::integer("thickness", 1, 4),
        ];
        d.extend(NoiseParams::domains());
        d
    }

    pub fn from_args(args: &[ParamValue]) -> Result<Self, TechniqueError> {
        Ok(FlowField2Params {
            palette: int_arg(args, 0)? as usize,
            spacing: int_arg(args, 1)? as u32,
            length: int_arg(args, 2)? as u32,
            thickness: int_arg(args, 3)? as u32,
            noise: NoiseParams::from_args(args, 4)?,
        })
    }
}

/// Grid seed positions: `spacing / 2 + k * spacing` along each axis.
pub fn streamline_seeds(width: u32, height: u32, spacing: u32) -> Vec<(f64, f64)> {
    let spacing = spacing.max(1) as f64;
    let axis = |len: u32| {
        let mut v = Vec::new();
        let mut p = spacing / 2.0;
        while p < len as f64 {
            v.push(p);
            p += spacing;
        }
        v
    };
    let xs = axis(width);
    axis(height)
        .into_iter()
        .flat_map(|y| xs.iter().map(move |&x| (x, y)))
        .collect()
}

pub fn draw_flow_field_2<R: Rng + ?Sized>(
    canvas: &mut Canvas,
    params: &FlowField2Params,
    rng: &mut R,
) -> Result<(), TechniqueError> {
    let field = params.noise.field()?;
    let colors = palette(params.palette).colors;
    let (w, h) = (canvas.width() as f64, canvas.height() as f64);
    for (sx, sy) in streamline_seeds(canvas.width(), canvas.height(), params.spacing) {
        let color = colors[rng.random_range(0..colors.len())];
        let (mut x, mut y) = (sx, sy);
        for _ in 0..params.length {
            let theta = field.angle_at(x, y);
            let (nx, ny) = (x + STREAMLINE_STEP * theta.cos(), y + STREAMLINE_STEP * theta.sin());
            canvas.line((x, y), (nx, ny), params.thickness, color);
            if !(0.0..w).contains(&nx) || !(0.0..h).contains(&ny) {
                break;
            }
            (x, y) = (nx, ny);
        }
    }
    Ok(())
}
