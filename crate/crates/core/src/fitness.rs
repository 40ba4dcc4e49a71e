//! The six objectives: pairwise pixel difference (pc), duplicate genes (gc),
//! unique techniques (ut), Chebyshev difference (cd), negative space (ns) and
//! art-classifier distance (ac).

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

use crate::classifier::{CentroidModel, ClassifierError};
use crate::genome::{duplicate_gene_count, Genome, Registry};
use crate::techniques::{express, Canvas, Clock, ExpressionReport, RenderSettings, Rgb};

/// Fraction of background pixels that `ns` aims for.
pub const NEGATIVE_SPACE_TARGET: f64 = 0.7;
pub const DEFAULT_NS_TOLERANCE: u8 = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("image dimensions differ: {0:?} vs {1:?}")]
    DimensionMismatch((u32, u32), (u32, u32)),
    #[error("unknown objective `{0}`")]
    UnknownObjective(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

/// Objective identifiers. The declaration order is the column order of every
/// log and the bit order of objective masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectiveId {
    Pc,
    Gc,
    Ut,
    Cd,
    Ns,
    Ac,
}

impl ObjectiveId {
    pub const ALL: [ObjectiveId; 6] = [
        ObjectiveId::Pc,
        ObjectiveId::Gc,
        ObjectiveId::Ut,
        ObjectiveId::Cd,
        ObjectiveId::Ns,
        ObjectiveId::Ac,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveId::Pc => "pc",
            ObjectiveId::Gc => "gc",
            ObjectiveId::Ut => "ut",
            ObjectiveId::Cd => "cd",
            ObjectiveId::Ns => "ns",
            ObjectiveId::Ac => "ac",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            ObjectiveId::Pc | ObjectiveId::Ut | ObjectiveId::Cd => Direction::Maximize,
            ObjectiveId::Gc | ObjectiveId::Ns | ObjectiveId::Ac => Direction::Minimize,
        }
    }
}

impl fmt::Display for ObjectiveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveId {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ObjectiveId::ALL
            .into_iter()
            .find(|o| o.name() == s.trim())
            .ok_or_else(|| MetricError::UnknownObjective(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitnessVector(pub [f64; 6]);

impl FitnessVector {
    pub fn get(&self, id: ObjectiveId) -> f64 {
        self.0[id.index()]
    }

    /// The value flipped where needed so that larger is always fitter.
    pub fn oriented(&self, id: ObjectiveId) -> f64 {
        match id.direction() {
            Direction::Maximize => self.get(id),
            Direction::Minimize => -self.get(id),
        }
    }
}

fn check_dims(a: &Canvas, b: &Canvas) -> Result<(), MetricError> {
    if a.dimensions() != b.dimensions() {
        return Err(MetricError::DimensionMismatch(a.dimensions(), b.dimensions()));
    }
    Ok(())
}

/// Root-mean-square difference over all pixel channels on 8-bit values.
pub fn rms_difference(a: &Canvas, b: &Canvas) -> Result<f64, MetricError> {
    check_dims(a, b)?;
    let sum: u64 = a
        .as_raw()
        .iter()
        .zip(b.as_raw())
        .map(|(&x, &y)| {
            let d = x.abs_diff(y) as u64;
            d * d
        })
        .sum();
    Ok((sum as f64 / a.as_raw().len() as f64).sqrt())
}

/// Largest absolute difference over all pixel channels.
pub fn chebyshev_difference(a: &Canvas, b: &Canvas) -> Result<f64, MetricError> {
    check_dims(a, b)?;
    Ok(a.as_raw()
        .iter()
        .zip(b.as_raw())
        .map(|(&x, &y)| x.abs_diff(y))
        .max()
        .unwrap_or(0) as f64)
}

fn mean_to_others(
    index: usize,
    images: &[Canvas],
    metric: fn(&Canvas, &Canvas) -> Result<f64, MetricError>,
) -> Result<f64, MetricError> {
    if images.len() < 2 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (j, other) in images.iter().enumerate() {
        if j != index {
            total += metric(&images[index], other)?;
        }
    }
    Ok(total / (images.len() - 1) as f64)
}

/// Mean RMS difference from `images[index]` to every other image; 0 with no peers.
pub fn ff_pc(index: usize, images: &[Canvas]) -> Result<f64, MetricError> {
    mean_to_others(index, images, rms_difference)
}

/// Mean Chebyshev difference from `images[index]` to every other image; 0 with no peers.
pub fn ff_cd(index: usize, images: &[Canvas]) -> Result<f64, MetricError> {
    mean_to_others(index, images, chebyshev_difference)
}

pub fn ff_gc(genome: &Genome) -> f64 {
    duplicate_gene_count(genome) as f64
}

/// Distinct techniques over active techniques, capped at 1.
pub fn ff_ut(genome: &Genome, registry: &Registry) -> f64 {
    let active = registry.active_count().max(1);
    genome.distinct_techniques().min(active) as f64 / active as f64
}

pub fn ff_ns(canvas: &Canvas, background: Rgb, tolerance: u8) -> f64 {
    let near = canvas
        .pixels()
        .filter(|p| p.iter().zip(background).all(|(&c, b)| c.abs_diff(b) <= tolerance))
        .count();
    (near as f64 / canvas.pixel_count() as f64 - NEGATIVE_SPACE_TARGET).abs()
}

pub fn ff_ac(canvas: &Canvas, model: &CentroidModel) -> Result<f64, ClassifierError> {
    model.score(canvas)
}

/// Worst value of every objective for a genome of `len` genes.
pub fn worst_fitness(len: usize, registry: &Registry) -> FitnessVector {
    FitnessVector([
        0.0,
        len.saturating_sub(1) as f64,
        1.0 / registry.active_count().max(1) as f64,
        0.0,
        NEGATIVE_SPACE_TARGET,
        1.0,
    ])
}

/// Everything evaluation needs besides the genomes.
pub struct EvalContext<'a> {
    pub registry: &'a Registry,
    pub model: &'a CentroidModel,
    pub settings: RenderSettings,
    pub budget: Duration,
    pub ns_tolerance: u8,
    pub clock: &'a dyn Clock,
    pub parallel: bool,
}

#[derive(Debug, Clone)]
pub struct Evaluated {
    pub canvas: Canvas,
    pub fitness: FitnessVector,
    pub report: ExpressionReport,
    /// Reason the individual failed to express or score, if it did.
    pub failure: Option<String>,
}

fn maybe_par<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, parallel: bool, f: F) -> Vec<T> {
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Expresses every genome and then scores all six objectives. Failed
/// individuals keep a blank canvas (which still counts as a peer for pc and
/// cd) and receive the worst value on every objective.
pub fn evaluate_population(genomes: &[Genome], ctx: &EvalContext<'_>) -> Vec<Evaluated> {
    let expressed = maybe_par(genomes.len(), ctx.parallel, |i| {
        express(&genomes[i], &ctx.settings, ctx.budget, ctx.clock)
    });
    let mut canvases = Vec::with_capacity(genomes.len());
    let mut reports = Vec::with_capacity(genomes.len());
    let mut failures: Vec<Option<String>> = Vec::with_capacity(genomes.len());
    for result in expressed {
        match result {
            Ok((canvas, report)) => {
                canvases.push(canvas);
                reports.push(report);
                failures.push(None);
            }
            Err(e) => {
                canvases.push(Canvas::new(ctx.settings.width, ctx.settings.height, ctx.settings.background));
                reports.push(ExpressionReport {
                    genes_expressed: 0,
                    per_gene_time: Vec::new(),
                    truncated: true,
                });
                failures.push(Some(e.to_string()));
            }
        }
    }
    let scored = maybe_par(genomes.len(), ctx.parallel, |i| -> Result<FitnessVector, String> {
        if let Some(reason) = &failures[i] {
            return Err(reason.clone());
        }
        let canvas = &canvases[i];
        Ok(FitnessVector([
            ff_pc(i, &canvases).map_err(|e| e.to_string())?,
            ff_gc(&genomes[i]),
            ff_ut(&genomes[i], ctx.registry),
            ff_cd(i, &canvases).map_err(|e| e.to_string())?,
            ff_ns(canvas, ctx.settings.background, ctx.ns_tolerance),
            ff_ac(canvas, ctx.model).map_err(|e| e.to_string())?,
        ]))
    });
    canvases
        .into_iter()
        .zip(reports)
        .zip(scored)
        .enumerate()
        .map(|(i, ((canvas, report), scored))| {
            let (fitness, failure) = match scored {
                Ok(f) => (f, None),
                Err(reason) => (worst_fitness(genomes[i].len(), ctx.registry), Some(reason)),
            };
            Evaluated {
                canvas,
                fitness,
                report,
                failure,
            }
        })
        .collect()
}

pub const FITNESS_CSV_HEADER: [&str; 11] = [
    "generation",
    "individual",
    "pc",
    "gc",
    "ut",
    "cd",
    "ns",
    "ac",
    "genes_expressed",
    "truncated",
    "genome",
];

/// One fitness-log record. The genome column holds the serialized genome,
/// quoted by the CSV writer.
pub fn fitness_record(generation: usize, individual: usize, genome: &Genome, e: &Evaluated) -> Vec<String> {
    let mut row = vec![generation.to_string(), individual.to_string()];
    row.extend(e.fitness.0.iter().map(f64::to_string));
    row.push(e.report.genes_expressed.to_string());
    row.push(e.report.truncated.to_string());
    row.push(genome.serialize());
    row
}
