//! Canvas, noise field and drawing techniques, plus genome expression under a
//! time budget.

pub mod basic_trig;
pub mod canvas;
pub mod circle_packing;
pub mod flow_field;
pub mod noise;
pub mod palette;

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use basic_trig::{draw_basic_trig, BasicTrigParams};
pub use canvas::{Canvas, Rgb, BLACK};
pub use circle_packing::{draw_circle_packing, pack_circles, Circle, CirclePackingParams};
pub use flow_field::{draw_flow_field, draw_flow_field_2, FlowField2Params, FlowFieldParams, NoiseParams};
pub use noise::{noise_to_angle, NoiseField};
pub use palette::{palette, Palette, PALETTES};

use crate::genome::{Genome, ParamValue, Registry, TechniqueDescriptor, TechniqueGene};
use crate::util::derive_seed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TechniqueError {
    #[error("no renderer for technique `{0}`")]
    UnknownTechnique(String),
    #[error("argument {0} missing or of the wrong kind")]
    BadArgument(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("evaluation budget must be positive")]
    ZeroBudget,
    #[error("timing needs at least one invocation")]
    NoInvocations,
}

pub(crate) fn int_arg(args: &[ParamValue], i: usize) -> Result<i64, TechniqueError> {
    args.get(i)
        .and_then(ParamValue::as_int)
        .ok_or(TechniqueError::BadArgument(i))
}

pub(crate) fn real_arg(args: &[ParamValue], i: usize) -> Result<f64, TechniqueError> {
    args.get(i)
        .and_then(ParamValue::as_real)
        .ok_or(TechniqueError::BadArgument(i))
}

/// The built-in drawing techniques.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Technique {
    FlowField,
    FlowField2,
    CirclePacking,
    BasicTrig,
}

impl Technique {
    pub const ALL: [Technique; 4] = [
        Technique::FlowField,
        Technique::FlowField2,
        Technique::CirclePacking,
        Technique::BasicTrig,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Technique::FlowField => "flow-field",
            Technique::FlowField2 => "flow-field-2",
            Technique::CirclePacking => "circle-packing",
            Technique::BasicTrig => "basic-trig",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Technique::ALL.into_iter().find(|t| t.name() == name)
    }

    pub fn descriptor(self) -> TechniqueDescriptor {
        let params = match self {
            Technique::FlowField => FlowFieldParams::domains(),
            Technique::FlowField2 => FlowField2Params::domains(),
            Technique::CirclePacking => CirclePackingParams::domains(),
            Technique::BasicTrig => BasicTrigParams::domains(),
        };
        TechniqueDescriptor::new(self.name(), params)
    }

    pub fn draw<R: rand::Rng + ?Sized>(
        self,
        canvas: &mut Canvas,
        args: &[ParamValue],
        rng: &mut R,
    ) -> Result<(), TechniqueError> {
        match self {
            Technique::FlowField => draw_flow_field(canvas, &FlowFieldParams::from_args(args)?, rng),
            Technique::FlowField2 => {
                draw_flow_field_2(canvas, &FlowField2Params::from_args(args)?, rng)
            }
            Technique::CirclePacking => {
                draw_circle_packing(canvas, &CirclePackingParams::from_args(args)?, rng)
            }
            Technique::BasicTrig => draw_basic_trig(canvas, &BasicTrigParams::from_args(args)?, rng),
        }
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::new(Technique::ALL.iter().map(|t| t.descriptor()).collect())
            .expect("built-in technique table is well formed")
    }
}

/// Draws one gene. Its random stream depends only on the gene text and the
/// run seed, so a gene renders the same wherever it sits in a genome.
pub fn render_gene(canvas: &mut Canvas, gene: &TechniqueGene, run_seed: u64) -> Result<(), TechniqueError> {
    let technique = Technique::from_name(&gene.technique)
        .ok_or_else(|| TechniqueError::UnknownTechnique(gene.technique.clone()))?;
    let seed = derive_seed(&[&run_seed.to_le_bytes(), gene.to_string().as_bytes()]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    technique.draw(canvas, &gene.args, &mut rng)
}

/// Monotonic time source, injectable so budget behaviour can be tested.
pub trait Clock: Send + Sync {
    fn now(&self) -> Duration;
}

#[derive(Debug, Clone, Copy)]
pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock {
            origin: Instant::now(),
        }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }
}

/// Synthetic clock that advances by a fixed tick on every reading.
#[derive(Debug, Default)]
pub struct TickClock {
    tick: Duration,
    readings: AtomicU64,
}

impl TickClock {
    pub fn new(tick: Duration) -> Self {
        TickClock {
            tick,
            readings: AtomicU64::new(0),
        }
    }
}

impl Clock for TickClock {
    fn now(&self) -> Duration {
        let n = self.readings.fetch_add(1, Ordering::SeqCst);
        self.tick * n as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderSettings {
    pub width: u32,
    pub height: u32,
    pub background: Rgb,
    pub seed: u64,
}

impl RenderSettings {
    pub fn new(width: u32, height: u32, seed: u64) -> Self {
        RenderSettings {
            width,
            height,
            background: BLACK,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpressionReport {
    pub genes_expressed: usize,
    pub per_gene_time: Vec<Duration>,
    pub truncated: bool,
}

/// Renders the genes in order on a fresh canvas. Before each gene the elapsed
/// time is compared against `budget`; once it is used up the remaining genes
/// are skipped. A gene that has started always runs to completion.
pub fn express(
    genome: &Genome,
    settings: &RenderSettings,
    budget: Duration,
    clock: &dyn Clock,
) -> Result<(Canvas, ExpressionReport), TechniqueError> {
    if budget.is_zero() {
        return Err(TechniqueError::ZeroBudget);
    }
    let mut canvas = Canvas::new(settings.width, settings.height, settings.background);
    let mut per_gene_time = Vec::with_capacity(genome.len());
    let start = clock.now();
    let mut now = start;
    for gene in genome.genes() {
        if now.saturating_sub(start) >= budget {
            break;
        }
        render_gene(&mut canvas, gene, settings.seed)?;
        let end = clock.now();
        per_gene_time.push(end.saturating_sub(now));
        now = end;
    }
    let genes_expressed = per_gene_time.len();
    Ok((
        canvas,
        ExpressionReport {
            genes_expressed,
            per_gene_time,
            truncated: genes_expressed < genome.len(),
        },
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub technique: String,
    pub invocations: usize,
    pub total: Duration,
    pub mean: Duration,
}

/// Random genes to be timed, per technique in registry order.
pub fn timing_plan(
    registry: &Registry,
    invocations: usize,
    seed: u64,
    include_excluded: bool,
) -> Vec<(String, Vec<TechniqueGene>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    registry
        .techniques()
        .iter()
        .filter(|t| include_excluded || !t.excluded)
        .map(|t| {
            let genes = (0..invocations).map(|_| t.random_gene(&mut rng)).collect();
            (t.name.clone(), genes)
        })
        .collect()
}

/// Wall time of `invocations` randomly parameterized calls per technique, each
/// on a fresh canvas.
pub fn time_techniques(
    registry: &Registry,
    invocations: usize,
    width: u32,
    height: u32,
    seed: u64,
    include_excluded: bool,
) -> Result<Vec<TimingRow>, TechniqueError> {
    if invocations == 0 {
        return Err(TechniqueError::NoInvocations);
    }
    let mut rows = Vec::new();
    for (technique, genes) in timing_plan(registry, invocations, seed, include_excluded) {
        let mut total = Duration::ZERO;
        for gene in &genes {
            let mut canvas = Canvas::new(width, height, BLACK);
            let t0 = Instant::now();
            render_gene(&mut canvas, gene, seed)?;
            total += t0.elapsed();
        }
        rows.push(TimingRow {
            technique,
            invocations,
            total,
            mean: total / invocations as u32,
        });
    }
    Ok(rows)
}

pub fn timing_csv(rows: &[TimingRow]) -> String {
    let mut out = String::from("technique,invocations,total_ms,mean_ms\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.3},{:.3}\n",
            r.technique,
            r.invocations,
            r.total.as_secs_f64() * 1e3,
            r.mean.as_secs_f64() * 1e3
        ));
    }
    out
}
