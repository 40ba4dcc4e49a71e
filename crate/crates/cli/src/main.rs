use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use artevo::classifier::{
    classify_batch, generate_noise_corpus, reference_model, CentroidModel, HandcraftedExtractor, Label,
    REFERENCE_SEED,
};
use artevo::evolve::{run_evolution, EvolutionConfig, ModelSource};
use artevo::experiment::{parse_mask_list, run_experiment, write_heatmap, write_sweeps, ExperimentPlan};
use artevo::genome::Registry;
use artevo::report::{collage, render_genome};
use artevo::techniques::{time_techniques, timing_csv, Canvas, RenderSettings, SystemClock};

/// Evolve generative-art programs under many-objective lexicase selection.
#[derive(Parser)]
#[command(name = "artevo", version)]
struct Cli {
    /// Worker threads for evaluation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one evolution.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a leave-x-out sweep over objective masks.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// `all`, or masks separated by `;` such as `gc;ns;gc,ns`.
        #[arg(long, default_value = "all")]
        masks: String,
        #[arg(long, default_value_t = 15)]
        replicates: usize,
        #[arg(long)]
        out: PathBuf,
        /// Skip cells that already finished.
        #[arg(long)]
        resume: bool,
    },
    /// Build heatmap.csv from a sweep's results.
    Aggregate {
        #[arg(long)]
        results: PathBuf,
        /// Defaults to `<results>/heatmap.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write sweeps.csv for one run directory.
    Sweeps {
        #[arg(long)]
        run: PathBuf,
    },
    /// Time randomly parameterized calls of every technique.
    Timing {
        #[arg(long, default_value_t = 100)]
        invocations: usize,
        /// Square canvas side, or WxH.
        #[arg(long, default_value = "500")]
        size: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train, apply or feed the art classifier.
    #[command(subcommand)]
    Classifier(ClassifierCommand),
    /// Express a genome and write the image.
    Render {
        /// Genome file, or `-` for standard input.
        #[arg(long)]
        genome: String,
        #[arg(long, default_value = "500x500")]
        size: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 180_000)]
        budget_ms: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tile a directory of images into one PNG.
    Collage {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        columns: u32,
        #[arg(long, default_value = "64x64")]
        cell_size: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ClassifierCommand {
    /// Fit a centroid model from two image directories.
    Train {
        #[arg(long)]
        art: PathBuf,
        #[arg(long)]
        not_art: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print `path,score,label` for each image.
    Score {
        #[command(flatten)]
        model: ModelArg,
        #[arg(required = true)]
        images: Vec<PathBuf>,
    },
    /// Classify every image in a directory.
    Batch {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        dir: PathBuf,
        /// Write the CSV report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write uniform-noise PNGs.
    GenNoise {
        #[arg(long)]
        count: usize,
        #[arg(long, default_value = "128x128")]
        size: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ModelArg {
    /// Model file; the built-in reference model when omitted.
    #[arg(long)]
    model: Option<PathBuf>,
}

/// Failure split by exit code.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.into())
    }
}

trait UsageContext<T> {
    fn usage(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> UsageContext<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into()))
    }
}

fn parse_size(s: &str) -> anyhow::Result<(u32, u32)> {
    let (w, h) = match s.split_once(['x', 'X']) {
        Some((w, h)) => (w.trim().parse::<u32>(), h.trim().parse::<u32>()),
        None => (s.trim().parse::<u32>(), s.trim().parse::<u32>()),
    };
    match (w, h) {
        (Ok(w), Ok(h)) if w > 0 && h > 0 => Ok((w, h)),
        _ => bail!("invalid size `{s}`, expected WxH with positive integers"),
    }
}

fn load_model(source: &ModelSource) -> anyhow::Result<CentroidModel> {
    match source {
        ModelSource::Reference => Ok(reference_model(REFERENCE_SEED)),
        ModelSource::File(path) => {
            let model = CentroidModel::load(path)?;
            model.check_compatible(&HandcraftedExtractor::new())?;
            Ok(model)
        }
    }
}

fn model_arg(arg: &ModelArg) -> anyhow::Result<CentroidModel> {
    load_model(&arg.model.clone().map_or(ModelSource::Reference, ModelSource::File))
}

fn load_config(path: &Path) -> anyhow::Result<(EvolutionConfig, CentroidModel)> {
    let config = EvolutionConfig::load(path).with_context(|| format!("config `{}`", path.display()))?;
    let model = load_model(&config.model).context("loading classifier model")?;
    Ok((config, model))
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage(anyhow!("--jobs must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| anyhow!("thread pool: {e}"))?;
    }
    let registry = Registry::default();
    match cli.command {
        Command::Evolve { config, out } => {
            let (config, model) = load_config(&config).usage()?;
            let log = run_evolution(&config, &registry, &model, &out)?;
            println!(
                "{} generation(s) written to {} ({} final images)",
                log.generations.len(),
                out.display(),
                log.final_images.len()
            );
        }
        Command::Experiment {
            config,
            masks,
            replicates,
            out,
            resume,
        } => {
            let (base, model) = load_config(&config).usage()?;
            let plan = ExperimentPlan {
                masks: parse_mask_list(&masks).usage()?,
                replicates,
                base,
            };
            plan.validate().usage()?;
            let results = match run_experiment(&plan, &registry, &model, &out, resume) {
                Err(e @ artevo::experiment::ExperimentError::AlreadyComplete(_)) => return Err(Failure::Usage(e.into())),
                other => other?,
            };
            println!(
                "completed {}, skipped {}, failed {}",
                results.completed.len(),
                results.skipped.len(),
                results.failed.len()
            );
            if !results.failed.is_empty() {
                return Err(Failure::Runtime(anyhow!(
                    "{} cell(s) failed, see {}",
                    results.failed.len(),
                    out.join(artevo::experiment::FAILURES_LOG).display()
                )));
            }
        }
        Command::Aggregate { results, out } => {
            let out = out.unwrap_or_else(|| results.join(artevo::experiment::HEATMAP_CSV));
            let heatmap = write_heatmap(&results, &out)?;
            println!("{} configuration(s) written to {}", heatmap.rows.len(), out.display());
        }
        Command::Sweeps { run } => {
            let rows = write_sweeps(&run)?;
            println!("{} row(s) written to {}", rows.len(), run.join(artevo::experiment::SWEEPS_CSV).display());
        }
        Command::Timing {
            invocations,
            size,
            seed,
            out,
        } => {
            let (w, h) = parse_size(&size).usage()?;
            if invocations == 0 {
                return Err(Failure::Usage(anyhow!("--invocations must be at least 1")));
            }
            let csv = timing_csv(&time_techniques(&registry, invocations, w, h, seed, true)?);
            match out {
                Some(path) => fs::write(&path, &csv).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
        }
        Command::Classifier(cmd) => classifier(cmd)?,
        Command::Render {
            genome,
            size,
            seed,
            budget_ms,
            out,
        } => {
            let (w, h) = parse_size(&size).usage()?;
            if budget_ms == 0 {
                return Err(Failure::Usage(anyhow!("--budget-ms must be positive")));
            }
            let text = if genome == "-" {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s)?;
                s
            } else {
                fs::read_to_string(&genome).with_context(|| format!("reading genome `{genome}`"))?
            };
            let report = render_genome(
                &text,
                &registry,
                &RenderSettings::new(w, h, seed),
                Duration::from_millis(budget_ms),
                &SystemClock::default(),
                &out,
            )
            .map_err(|e| match e {
                artevo::report::ReportError::Parse(_) => Failure::Usage(e.into()),
                e => Failure::Runtime(e.into()),
            })?;
            let ms: Vec<String> = report
                .per_gene_time
                .iter()
                .map(|d| format!("{:.3}", d.as_secs_f64() * 1e3))
                .collect();
            println!("genes_expressed = {}", report.genes_expressed);
            println!("per_gene_ms = {}", ms.join(","));
            println!("truncated = {}", report.truncated);
        }
        Command::Collage {
            dir,
            columns,
            cell_size,
            out,
        } => {
            let cell = parse_size(&cell_size).usage()?;
            if columns == 0 {
                return Err(Failure::Usage(anyhow!("--columns must be at least 1")));
            }
            let sheet = collage(&dir, columns, cell, &out)?;
            println!("{}x{} collage written to {}", sheet.width(), sheet.height(), out.display());
        }
    }
    Ok(())
}

fn classifier(cmd: ClassifierCommand) -> Result<(), Failure> {
    match cmd {
        ClassifierCommand::Train { art, not_art, out } => {
            let model = CentroidModel::train(&art, &not_art, &HandcraftedExtractor::new())?;
            model.save(&out)?;
            println!("model written to {}", out.display());
        }
        ClassifierCommand::Score { model, images } => {
            let model = model_arg(&model).usage()?;
            println!("path,score,label");
            for path in images {
                let canvas = Canvas::load(&path).with_context(|| format!("decoding {}", path.display()))?;
                let score = model.score(&canvas)?;
                println!("{},{score},{}", path.display(), Label::from_score(score));
            }
        }
        ClassifierCommand::Batch { model, dir, out } => {
            let model = model_arg(&model).usage()?;
            let report = classify_batch(&dir, &model)?;
            match out {
                Some(path) => fs::write(&path, report.to_csv()).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{}", report.to_csv()),
            }
            for (path, reason) in &report.failures {
                eprintln!("skipped {}: {reason}", path.display());
            }
            eprintln!("art = {}, not-art = {}", report.art_count(), report.not_art_count());
        }
        ClassifierCommand::GenNoise { count, size, seed, out } => {
            let (w, h) = parse_size(&size).usage()?;
            if count == 0 {
                return Err(Failure::Usage(anyhow!("--count must be at least 1")));
            }
            let files = generate_noise_corpus(count, w, h, seed, &out)?;
            println!("{} image(s) written to {}", files.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
