//! Leave-x-out sweeps: every (objective mask, replicate) cell is one seeded
//! evolution run under `ec<NN>/rep<RR>/`, followed by heatmap aggregation and
//! per-generation technique sweep statistics.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::classifier::CentroidModel;
use crate::evolve::{is_complete, run_evolution, EvolutionConfig, ObjectiveMask, CENSUS_CSV, FITNESS_CSV};
use crate::fitness::{Direction, ObjectiveId};
use crate::genome::Registry;

pub const HEATMAP_CSV: &str = "heatmap.csv";
pub const SWEEPS_CSV: &str = "sweeps.csv";
pub const FAILURES_LOG: &str = "failures.log";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("`{0}` already holds a completed run; pass resume to skip finished cells")]
    AlreadyComplete(PathBuf),
    #[error("no completed runs under `{0}`")]
    NoCompletedCells(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: malformed log: {reason}")]
    MalformedLog { path: PathBuf, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// All non-empty subsets of the first `objective_count` objectives in
/// truth-table order, so mask k has configuration number k.
pub fn enumerate_masks(objective_count: usize) -> Vec<ObjectiveMask> {
    let n = objective_count.min(ObjectiveId::ALL.len());
    (1..(1u16 << n))
        .filter_map(|k| ObjectiveMask::from_number(k as u8))
        .collect()
}

/// Parses `all` or a `;`-separated list of masks such as `gc;ns;gc,ns`.
pub fn parse_mask_list(s: &str) -> Result<Vec<ObjectiveMask>, ExperimentError> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(enumerate_masks(ObjectiveId::ALL.len()));
    }
    let masks = s
        .split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<ObjectiveMask>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ExperimentError::InvalidPlan(e.to_string()))?;
    if masks.is_empty() {
        return Err(ExperimentError::InvalidPlan("mask list is empty".into()));
    }
    Ok(masks)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub masks: Vec<ObjectiveMask>,
    pub replicates: usize,
    /// Shared settings; its `seed` is the base seed and its `mask` is ignored.
    pub base: EvolutionConfig,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.masks.is_empty() {
            return Err(ExperimentError::InvalidPlan("no masks".into()));
        }
        if self.replicates == 0 || self.replicates > 999 {
            return Err(ExperimentError::InvalidPlan("replicates must be in 1..=999".into()));
        }
        self.base
            .validate()
            .map_err(|e| ExperimentError::InvalidPlan(e.to_string()))
    }

    /// `base_seed · 10⁶ + mask · 10³ + replicate`, wrapping on overflow.
    pub fn cell_seed(&self, mask: ObjectiveMask, replicate: usize) -> u64 {
        self.base
            .seed
            .wrapping_mul(1_000_000)
            .wrapping_add(mask.number() as u64 * 1_000)
            .wrapping_add(replicate as u64)
    }

    pub fn cell_config(&self, mask: ObjectiveMask, replicate: usize) -> EvolutionConfig {
        EvolutionConfig {
            mask,
            seed: self.cell_seed(mask, replicate),
            ..self.base.clone()
        }
    }

    /// Every (mask, replicate) pair in plan order.
    pub fn cells(&self) -> Vec<(ObjectiveMask, usize)> {
        self.masks
            .iter()
            .flat_map(|&m| (0..self.replicates).map(move |r| (m, r)))
            .collect()
    }
}

pub fn cell_dir(root: &Path, mask: ObjectiveMask, replicate: usize) -> PathBuf {
    root.join(format!("ec{:02}", mask.number()))
        .join(format!("rep{replicate:02}"))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResults {
    pub completed: Vec<PathBuf>,
    pub skipped: Vec<PathBuf>,
    pub failed: Vec<(PathBuf, String)>,
}

/// Runs every cell of `plan` under `root`. With `resume`, cells whose manifest
/// is complete are skipped; without it, any such cell is an error raised
/// before work starts. A failing cell is appended to `failures.log` and the
/// sweep moves on.
pub fn run_experiment(
    plan: &ExperimentPlan,
    registry: &Registry,
    model: &CentroidModel,
    root: &Path,
    resume: bool,
) -> Result<ExperimentResults, ExperimentError> {
    plan.validate()?;
    let cells = plan.cells();
    if !resume {
        if let Some(&(m, r)) = cells.iter().find(|&&(m, r)| is_complete(&cell_dir(root, m, r))) {
            return Err(ExperimentError::AlreadyComplete(cell_dir(root, m, r)));
        }
    }
    fs::create_dir_all(root).map_err(io_err(root))?;
    let mut results = ExperimentResults::default();
    for (mask, replicate) in cells {
        let dir = cell_dir(root, mask, replicate);
        if is_complete(&dir) {
            results.skipped.push(dir);
            continue;
        }
        match run_evolution(&plan.cell_config(mask, replicate), registry, model, &dir) {
            Ok(_) => results.completed.push(dir),
            Err(e) => {
                let log = root.join(FAILURES_LOG);
                let mut f = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(&log)
                    .map_err(io_err(&log))?;
                let rel = dir.strip_prefix(root).unwrap_or(&dir);
                writeln!(f, "{}: {e}", rel.display()).map_err(io_err(&log))?;
                results.failed.push((dir, e.to_string()));
            }
        }
    }
    Ok(results)
}

/// Completed cell directories under `root`, grouped by mask in ascending
/// configuration number.
pub fn completed_cells(root: &Path) -> Result<BTreeMap<ObjectiveMask, Vec<PathBuf>>, ExperimentError> {
    let mut cells: BTreeMap<ObjectiveMask, Vec<PathBuf>> = BTreeMap::new();
    if !root.is_dir() {
        return Ok(cells);
    }
    for entry in fs::read_dir(root).map_err(io_err(root))? {
        let ec = entry.map_err(io_err(root))?.path();
        let Some(mask) = ec
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_prefix("ec"))
            .and_then(|n| n.parse::<u8>().ok())
            .and_then(ObjectiveMask::from_number)
        else {
            continue;
        };
        if !ec.is_dir() {
            continue;
        }
        for rep in fs::read_dir(&ec).map_err(io_err(&ec))? {
            let rep = rep.map_err(io_err(&ec))?.path();
            let is_rep = rep.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("rep"));
            if is_rep && is_complete(&rep) {
                cells.entry(mask).or_default().push(rep);
            }
        }
    }
    for dirs in cells.values_mut() {
        dirs.sort();
    }
    Ok(cells)
}

/// Objective values of the last generation in a fitness log.
pub fn final_generation_fitness(run_dir: &Path) -> Result<Vec<[f64; 6]>, ExperimentError> {
    let path = run_dir.join(FITNESS_CSV);
    let mut reader = csv::Reader::from_path(&path).map_err(csv_err(&path))?;
    let malformed = |reason: String| ExperimentError::MalformedLog {
        path: path.clone(),
        reason,
    };
    let mut last = 0usize;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err(&path))?;
        let generation: usize = record
            .get(0)
            .and_then(|g| g.parse().ok())
            .ok_or_else(|| malformed("bad generation column".into()))?;
        let mut values = [0.0; 6];
        for (k, v) in values.iter_mut().enumerate() {
            *v = record
                .get(2 + k)
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| malformed(format!("bad objective column {}", 2 + k)))?;
        }
        if generation > last {
            last = generation;
            rows.clear();
        }
        if generation == last {
            rows.push(values);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapRow {
    pub mask: ObjectiveMask,
    /// Mean raw value per objective over all final individuals of all replicates.
    pub mean: [f64; 6],
    /// Oriented and min-max scaled across masks; 1 is fittest.
    pub normalized: [f64; 6],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub rows: Vec<HeatmapRow>,
}

impl Heatmap {
    pub fn row(&self, mask: ObjectiveMask) -> Option<&HeatmapRow> {
        self.rows.iter().find(|r| r.mask == mask)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["config".to_string()];
        header.extend(ObjectiveId::ALL.iter().map(|o| o.name().to_string()));
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![r.mask.number().to_string()];
            rec.extend(r.normalized.iter().map(f64::to_string));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Min-max normalization of one objective across masks after orienting so
/// larger is fitter. A row without spread maps to 1 everywhere.
pub fn normalize_row(means: &[f64], direction: Direction) -> Vec<f64> {
    let oriented: Vec<f64> = means
        .iter()
        .map(|&m| if direction == Direction::Minimize { -m } else { m })
        .collect();
    let lo = oriented.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = oriented.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    oriented
        .iter()
        .map(|&v| if range > 0.0 { (v - lo) / range } else { 1.0 })
        .collect()
}

pub fn heatmap_from_means(means: Vec<(ObjectiveMask, [f64; 6])>) -> Heatmap {
    let mut normalized = vec![[0.0; 6]; means.len()];
    for objective in ObjectiveId::ALL {
        let k = objective.index();
        let column: Vec<f64> = means.iter().map(|(_, m)| m[k]).collect();
        for (row, v) in normalize_row(&column, objective.direction()).into_iter().enumerate() {
            normalized[row][k] = v;
        }
    }
    Heatmap {
        rows: means
            .into_iter()
            .zip(normalized)
            .map(|((mask, mean), normalized)| HeatmapRow { mask, mean, normalized })
            .collect(),
    }
}

/// Builds the heatmap from every completed cell under `root`. Pure function of
/// the persisted logs.
pub fn aggregate(root: &Path) -> Result<Heatmap, ExperimentError> {
    let cells = completed_cells(root)?;
    if cells.is_empty() {
        return Err(ExperimentError::NoCompletedCells(root.to_path_buf()));
    }
    let mut means = Vec::new();
    for (mask, dirs) in cells {
        let mut sum = [0.0; 6];
        let mut n = 0usize;
        for dir in &dirs {
            for values in final_generation_fitness(dir)? {
                for k in 0..6 {
                    sum[k] += values[k];
                }
                n += 1;
            }
        }
        if n > 0 {
            means.push((mask, sum.map(|s| s / n as f64)));
        }
    }
    if means.is_empty() {
        return Err(ExperimentError::NoCompletedCells(root.to_path_buf()));
    }
    Ok(heatmap_from_means(means))
}

/// Runs [`aggregate`] and writes `heatmap.csv` to `out`.
pub fn write_heatmap(root: &Path, out: &Path) -> Result<Heatmap, ExperimentError> {
    let heatmap = aggregate(root)?;
    fs::write(out, heatmap.to_csv()).map_err(io_err(out))?;
    Ok(heatmap)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub generation: usize,
    pub technique: String,
    /// Share of all genes in the generation that use this technique.
    pub gene_fraction: f64,
    /// Share of individuals whose most frequent technique is this one.
    pub modal_fraction: f64,
    /// Largest `modal_fraction` of the generation.
    pub dominance: f64,
}

/// The technique an individual uses most; ties go to the earliest technique
/// in `order`. Genes are the serialized lines of a genome.
pub fn modal_technique<'a>(genome_text: &str, order: &'a [String]) -> Option<&'a str> {
    let mut counts = vec![0usize; order.len()];
    for line in genome_text.lines() {
        let name = line.split(':').next().unwrap_or("").trim();
        if let Some(k) = order.iter().position(|t| t == name) {
            counts[k] += 1;
        }
    }
    let best = *counts.iter().max()?;
    (best > 0).then(|| order[counts.iter().position(|&c| c == best).unwrap()].as_str())
}

/// Per-generation technique distribution and dominance index of one run,
/// read from its census and fitness logs.
pub fn sweep_statistics(run_dir: &Path) -> Result<Vec<SweepRow>, ExperimentError> {
    let census_path = run_dir.join(CENSUS_CSV);
    let mut census: BTreeMap<usize, Vec<(String, usize)>> = BTreeMap::new();
    let mut reader = csv::Reader::from_path(&census_path).map_err(csv_err(&census_path))?;
    for record in reader.records() {
        let r = record.map_err(csv_err(&census_path))?;
        let parsed = (|| Some((r.get(0)?.parse().ok()?, r.get(1)?.to_string(), r.get(2)?.parse().ok()?)))();
        let (g, t, n): (usize, String, usize) = parsed.ok_or_else(|| ExperimentError::MalformedLog {
            path: census_path.clone(),
            reason: "bad census row".into(),
        })?;
        census.entry(g).or_default().push((t, n));
    }

    let fitness_path = run_dir.join(FITNESS_CSV);
    let mut genomes: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut reader = csv::Reader::from_path(&fitness_path).map_err(csv_err(&fitness_path))?;
    for record in reader.records() {
        let r = record.map_err(csv_err(&fitness_path))?;
        let g: usize = r.get(0).and_then(|g| g.parse().ok()).ok_or_else(|| ExperimentError::MalformedLog {
            path: fitness_path.clone(),
            reason: "bad generation column".into(),
        })?;
        genomes.entry(g).or_default().push(r.get(10).unwrap_or("").to_string());
    }

    let mut rows = Vec::new();
    for (generation, techniques) in census {
        let order: Vec<String> = techniques.iter().map(|(t, _)| t.clone()).collect();
        let total_genes: usize = techniques.iter().map(|(_, n)| n).sum();
        let individuals = genomes.get(&generation).map(Vec::as_slice).unwrap_or(&[]);
        let mut modal = vec![0usize; order.len()];
        for text in individuals {
            if let Some(t) = modal_technique(text, &order) {
                modal[order.iter().position(|o| o == t).unwrap()] += 1;
            }
        }
        let share = |k: usize| {
            if individuals.is_empty() {
                0.0
            } else {
                k as f64 / individuals.len() as f64
            }
        };
        let dominance = modal.iter().map(|&k| share(k)).fold(0.0, f64::max);
        for (k, (technique, genes)) in techniques.into_iter().enumerate() {
            rows.push(SweepRow {
                generation,
                technique,
                gene_fraction: if total_genes == 0 {
                    0.0
                } else {
                    genes as f64 / total_genes as f64
                },
                modal_fraction: share(modal[k]),
                dominance,
            });
        }
    }
    Ok(rows)
}

/// Dominance index per generation, in generation order.
pub fn dominance_by_generation(rows: &[SweepRow]) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for r in rows {
        if out.last().map(|&(g, _)| g) != Some(r.generation) {
            out.push((r.generation, r.dominance));
        }
    }
    out
}

pub fn sweeps_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["generation", "technique", "gene_fraction", "modal_fraction", "dominance"])
        .expect("in-memory write");
    for r in rows {
        w.write_record([
            r.generation.to_string(),
            r.technique.clone(),
            r.gene_fraction.to_string(),
            r.modal_fraction.to_string(),
            r.dominance.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Computes [`sweep_statistics`] and writes `sweeps.csv` into the run directory.
pub fn write_sweeps(run_dir: &Path) -> Result<Vec<SweepRow>, ExperimentError> {
    let rows = sweep_statistics(run_dir)?;
    let out = run_dir.join(SWEEPS_CSV);
    fs::write(&out, sweeps_csv(&rows)).map_err(io_err(&out))?;
    Ok(rows)
}
