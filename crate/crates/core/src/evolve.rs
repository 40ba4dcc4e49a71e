//! ε-lexicase selection, run configuration and the generational loop.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classifier::CentroidModel;
use crate::fitness::{evaluate_population, fitness_record, EvalContext, FitnessVector, ObjectiveId, FITNESS_CSV_HEADER};
use crate::genome::{crossover, mutate, random_genome, Genome, GenomeError, Registry, RegistryError};
use crate::techniques::{RenderSettings, SystemClock};
use crate::util::{derive_seed, sha256_hex};

pub const FITNESS_CSV: &str = "fitness.csv";
pub const CENSUS_CSV: &str = "technique_census.csv";
pub const FINAL_DIR: &str = "final";
pub const MANIFEST: &str = "run_manifest.txt";

/// Non-empty set of objectives used for selection, stored as a bitset where
/// bit i is `ObjectiveId::ALL[i]`. The bit pattern is the configuration number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectiveMask(u8);

impl ObjectiveMask {
    pub const ALL: ObjectiveMask = ObjectiveMask(0b11_1111);

    pub fn from_number(n: u8) -> Option<Self> {
        (1..=63).contains(&n).then_some(ObjectiveMask(n))
    }

    pub fn from_objectives(ids: &[ObjectiveId]) -> Option<Self> {
        Self::from_number(ids.iter().fold(0u8, |m, id| m | 1 << id.index()))
    }

    pub fn number(self) -> u8 {
        self.0
    }

    pub fn contains(self, id: ObjectiveId) -> bool {
        self.0 & (1 << id.index()) != 0
    }

    pub fn objectives(self) -> Vec<ObjectiveId> {
        ObjectiveId::ALL.into_iter().filter(|&o| self.contains(o)).collect()
    }
}

impl fmt::Display for ObjectiveMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.objectives().iter().map(|o| o.name()).collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for ObjectiveMask {
    type Err = ConfigError;

    /// Accepts `all`, a configuration number 1..=63, or comma-separated
    /// objective names such as `ut,ac`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = |reason: &str| ConfigError::InvalidValue {
            key: "mask".into(),
            value: s.to_string(),
            reason: reason.to_string(),
        };
        if s.eq_ignore_ascii_case("all") {
            return Ok(Self::ALL);
        }
        if let Ok(n) = s.parse::<u8>() {
            return Self::from_number(n).ok_or_else(|| bad("configuration number must be in 1..=63"));
        }
        let ids = s
            .split(',')
            .map(|t| t.parse::<ObjectiveId>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(&e.to_string()))?;
        Self::from_objectives(&ids).ok_or_else(|| bad("at least one objective must be active"))
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Genome(#[from] GenomeError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EvolveError + '_ {
    move |source| EvolveError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Where the art classifier comes from: the built-in synthetic reference
/// model or a model file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSource {
    Reference,
    File(PathBuf),
}

impl fmt::Display for ModelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSource::Reference => f.write_str("reference"),
            ModelSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub epsilon: f64,
    pub budget: Duration,
    pub width: u32,
    pub height: u32,
    pub seed: u64,
    pub mask: ObjectiveMask,
    pub min_genes: usize,
    pub max_genes: usize,
    pub ns_tolerance: u8,
    pub exclude: Vec<String>,
    pub model: ModelSource,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population_size: 100,
            generations: 100,
            crossover_rate: 0.5,
            mutation_rate: 0.4,
            epsilon: 0.85,
            budget: Duration::from_secs(180),
            width: 500,
            height: 500,
            seed: 0,
            mask: ObjectiveMask::ALL,
            min_genes: 1,
            max_genes: 5,
            ns_tolerance: 8,
            exclude: Vec::new(),
            model: ModelSource::Reference,
        }
    }
}

const CONFIG_KEYS: [&str; 15] = [
    "population_size",
    "generations",
    "crossover_rate",
    "mutation_rate",
    "epsilon",
    "budget_ms",
    "width",
    "height",
    "seed",
    "mask",
    "min_genes",
    "max_genes",
    "ns_tolerance",
    "exclude",
    "model",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

impl EvolutionConfig {
    /// 128×128 canvases, 20 individuals, 10 generations, 5 s budget.
    pub fn desk(seed: u64) -> Self {
        EvolutionConfig {
            population_size: 20,
            generations: 10,
            budget: Duration::from_secs(5),
            width: 128,
            height: 128,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.population_size < 2 {
            return fail("population_size must be at least 2");
        }
        for (name, v) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
            ("epsilon", self.epsilon),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::Invalid(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.budget.is_zero() {
            return fail("budget_ms must be positive");
        }
        if self.width == 0 || self.height == 0 {
            return fail("canvas dimensions must be positive");
        }
        if self.min_genes == 0 || self.min_genes > self.max_genes {
            return fail("need 1 <= min_genes <= max_genes");
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "population_size" => self.population_size = parse_value(key, value)?,
            "generations" => self.generations = parse_value(key, value)?,
            "crossover_rate" => self.crossover_rate = parse_value(key, value)?,
            "mutation_rate" => self.mutation_rate = parse_value(key, value)?,
            "epsilon" => self.epsilon = parse_value(key, value)?,
            "budget_ms" => self.budget = Duration::from_millis(parse_value(key, value)?),
            "width" => self.width = parse_value(key, value)?,
            "height" => self.height = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "mask" => self.mask = value.parse()?,
            "min_genes" => self.min_genes = parse_value(key, value)?,
            "max_genes" => self.max_genes = parse_value(key, value)?,
            "ns_tolerance" => self.ns_tolerance = parse_value(key, value)?,
            "exclude" => {
                self.exclude = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            }
            "model" => {
                self.model = match value {
                    "reference" => ModelSource::Reference,
                    path => ModelSource::File(PathBuf::from(path)),
                }
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    /// The `status` and `digest.*` keys written into run manifests are
    /// accepted and ignored, so a manifest doubles as a config file.
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                text: content.to_string(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key == "status" || key.starts_with("digest.") {
                continue;
            }
            if !CONFIG_KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
            config.set(key, value)?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, EvolveError> {
        Ok(Self::from_text(&fs::read_to_string(path).map_err(io_err(path))?)?)
    }

    pub fn to_text(&self) -> String {
        format!(
            "population_size = {}\ngenerations = {}\ncrossover_rate = {}\nmutation_rate = {}\nepsilon = {}\n\
             budget_ms = {}\nwidth = {}\nheight = {}\nseed = {}\nmask = {}\nmin_genes = {}\nmax_genes = {}\n\
             ns_tolerance = {}\nexclude = {}\nmodel = {}\n",
            self.population_size,
            self.generations,
            self.crossover_rate,
            self.mutation_rate,
            self.epsilon,
            self.budget.as_millis(),
            self.width,
            self.height,
            self.seed,
            self.mask,
            self.min_genes,
            self.max_genes,
            self.ns_tolerance,
            self.exclude.join(","),
            self.model,
        )
    }
}

/// Candidates left after filtering on each objective of `order` in turn.
/// Values are oriented so larger is fitter; a candidate survives an objective
/// when it lies within `epsilon` of the pool's best after min-max scaling over
/// the current pool. A pool with no spread on an objective is kept whole, and
/// filtering stops as soon as one candidate remains.
pub fn lexicase_filter(fitness: &[FitnessVector], order: &[ObjectiveId], epsilon: f64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..fitness.len()).collect();
    for &objective in order {
        if pool.len() <= 1 {
            break;
        }
        let value = |i: usize| fitness[i].oriented(objective);
        let best = pool.iter().map(|&i| value(i)).fold(f64::NEG_INFINITY, f64::max);
        let worst = pool.iter().map(|&i| value(i)).fold(f64::INFINITY, f64::min);
        let range = best - worst;
        if range == 0.0 {
            continue;
        }
        pool.retain(|&i| best - value(i) <= epsilon * range);
    }
    pool
}

/// One ε-lexicase draw: shuffle the active objectives, filter, then pick
/// uniformly among the survivors.
pub fn lexicase_select<R: Rng + ?Sized>(
    fitness: &[FitnessVector],
    mask: ObjectiveMask,
    epsilon: f64,
    rng: &mut R,
) -> usize {
    let mut order = mask.objectives();
    order.shuffle(rng);
    let pool = lexicase_filter(fitness, &order, epsilon);
    if pool.len() == 1 {
        pool[0]
    } else {
        pool[rng.random_range(0..pool.len())]
    }
}

/// Children for the next generation: two independently selected parents,
/// crossover, then mutation. No individual survives unchanged by right.
pub fn next_generation<R: Rng + ?Sized>(
    population: &[Genome],
    fitness: &[FitnessVector],
    config: &EvolutionConfig,
    registry: &Registry,
    rng: &mut R,
) -> Vec<Genome> {
    (0..population.len())
        .map(|_| {
            let a = lexicase_select(fitness, config.mask, config.epsilon, rng);
            let b = lexicase_select(fitness, config.mask, config.epsilon, rng);
            let child = crossover(&population[a], &population[b], config.crossover_rate, rng);
            mutate(&child, registry, config.mutation_rate, rng)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub genomes: Vec<Genome>,
    pub fitness: Vec<FitnessVector>,
    pub genes_expressed: Vec<usize>,
    pub truncated: Vec<bool>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub dir: PathBuf,
    pub generations: Vec<GenerationRecord>,
    pub final_images: Vec<PathBuf>,
}

impl RunLog {
    pub fn last(&self) -> &GenerationRecord {
        self.generations.last().expect("a run always has generation 0")
    }
}

/// `technique,gene_count,individuals_using` per registry technique.
pub fn technique_census(genomes: &[Genome], registry: &Registry) -> Vec<(String, usize, usize)> {
    registry
        .techniques()
        .iter()
        .map(|t| {
            let count = |g: &Genome| g.genes().iter().filter(|gene| gene.technique == t.name).count();
            let genes = genomes.iter().map(count).sum();
            let users = genomes.iter().filter(|g| count(g) > 0).count();
            (t.name.clone(), genes, users)
        })
        .collect()
}

/// True when `dir` holds a manifest ending in `status = complete`.
pub fn is_complete(dir: &Path) -> bool {
    fs::read_to_string(dir.join(MANIFEST))
        .map(|t| t.lines().any(|l| l.replace(' ', "") == "status=complete"))
        .unwrap_or(false)
}

fn digest_file(path: &Path) -> Result<String, EvolveError> {
    Ok(sha256_hex(&fs::read(path).map_err(io_err(path))?))
}

/// Runs one evolution into `out_dir`: `fitness.csv`, `technique_census.csv`,
/// the final population as `final/gen<G>_ind<I>.png`, and last of all
/// `run_manifest.txt` holding the config, file digests and `status = complete`.
pub fn run_evolution(
    config: &EvolutionConfig,
    registry: &Registry,
    model: &CentroidModel,
    out_dir: &Path,
) -> Result<RunLog, EvolveError> {
    config.validate()?;
    let registry = registry
        .clone()
        .with_exclusions(&config.exclude)
        .map_err(ConfigError::from)?;
    if registry.active_count() == 0 {
        return Err(GenomeError::AllExcluded.into());
    }
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let manifest = out_dir.join(MANIFEST);
    if manifest.exists() {
        fs::remove_file(&manifest).map_err(io_err(&manifest))?;
    }
    let final_dir = out_dir.join(FINAL_DIR);
    if final_dir.exists() {
        fs::remove_dir_all(&final_dir).map_err(io_err(&final_dir))?;
    }
    fs::create_dir_all(&final_dir).map_err(io_err(&final_dir))?;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[b"evolve", &config.seed.to_le_bytes()]));
    let clock = SystemClock::default();
    let ctx = EvalContext {
        registry: &registry,
        model,
        settings: RenderSettings::new(config.width, config.height, config.seed),
        budget: config.budget,
        ns_tolerance: config.ns_tolerance,
        clock: &clock,
        parallel: true,
    };

    let fitness_path = out_dir.join(FITNESS_CSV);
    let census_path = out_dir.join(CENSUS_CSV);
    let mut fitness_csv = csv::Writer::from_path(&fitness_path)?;
    let mut census_csv = csv::Writer::from_path(&census_path)?;
    fitness_csv.write_record(FITNESS_CSV_HEADER)?;
    census_csv.write_record(["generation", "technique", "gene_count", "individuals_using"])?;

    let mut population = (0..config.population_size)
        .map(|_| random_genome(&registry, &mut rng, config.min_genes, config.max_genes))
        .collect::<Result<Vec<_>, _>>()?;
    let mut generations = Vec::with_capacity(config.generations + 1);
    let mut final_images = Vec::new();
    for generation in 0..=config.generations {
        let evaluated = evaluate_population(&population, &ctx);
        for (i, (genome, e)) in population.iter().zip(&evaluated).enumerate() {
            fitness_csv.write_record(fitness_record(generation, i, genome, e))?;
        }
        for (technique, genes, users) in technique_census(&population, &registry) {
            census_csv.write_record([generation.to_string(), technique, genes.to_string(), users.to_string()])?;
        }
        let fitness: Vec<FitnessVector> = evaluated.iter().map(|e| e.fitness).collect();
        if generation == config.generations {
            for (i, e) in evaluated.iter().enumerate() {
                let path = final_dir.join(format!("gen{generation:03}_ind{i:03}.png"));
                e.canvas.save_png(&path).map_err(io_err(&path))?;
                final_images.push(path);
            }
        }
        let next = (generation < config.generations)
            .then(|| next_generation(&population, &fitness, config, &registry, &mut rng));
        generations.push(GenerationRecord {
            genes_expressed: evaluated.iter().map(|e| e.report.genes_expressed).collect(),
            truncated: evaluated.iter().map(|e| e.report.truncated).collect(),
            failures: evaluated.iter().filter(|e| e.failure.is_some()).count(),
            genomes: population,
            fitness,
        });
        population = next.unwrap_or_default();
    }
    fitness_csv.flush().map_err(io_err(&fitness_path))?;
    census_csv.flush().map_err(io_err(&census_path))?;
    drop((fitness_csv, census_csv));

    let mut text = config.to_text();
    text.push_str(&format!("digest.model = {}\n", sha256_hex(model.to_text().as_bytes())));
    text.push_str(&format!("digest.{FITNESS_CSV} = {}\n", digest_file(&fitness_path)?));
    text.push_str(&format!("digest.{CENSUS_CSV} = {}\n", digest_file(&census_path)?));
    for path in &final_images {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        text.push_str(&format!("digest.{FINAL_DIR}/{name} = {}\n", digest_file(path)?));
    }
    text.push_str("status = complete\n");
    fs::write(&manifest, text).map_err(io_err(&manifest))?;

    Ok(RunLog {
        dir: out_dir.to_path_buf(),
        generations,
        final_images,
    })
}
