//! Nearest-centroid "art" / "not art" classifier over image feature vectors.
//!
//! Feature vectors are standardized by the pooled per-dimension standard
//! deviation of the training set; each class is summarized by the mean of its
//! standardized vectors. An image scores `d_art / (d_art + d_not_art)`, so 0
//! sits on the art centroid, 1 on the not-art centroid and 0.5 on the boundary.

pub mod corpus;
pub mod features;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

pub use corpus::{generate_noise_corpus, noise_image, reference_model, structured_image, REFERENCE_SEED};
pub use features::{FeatureExtractor, FeatureVector, HandcraftedExtractor, FEATURE_DIM};

use crate::techniques::Canvas;

/// Smallest per-dimension scale; keeps constant dimensions from dividing by zero.
pub const SCALE_FLOOR: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("corpus `{dir}` has {found} decodable image(s), at least 2 are required")]
    InsufficientCorpus { dir: PathBuf, found: usize },
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("model was built with extractor `{model}` ({model_dim} dims), running `{running}` ({running_dim} dims)")]
    IncompatibleModel {
        model: String,
        model_dim: usize,
        running: String,
        running_dim: usize,
    },
    #[error("malformed model file: {0}")]
    MalformedModel(String),
    #[error("need at least {0} image(s)")]
    InvalidCount(usize),
    #[error("cannot encode image: {0}")]
    Image(#[from] image::ImageError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ClassifierError + '_ {
    move |source| ClassifierError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Art,
    NotArt,
}

impl Label {
    /// Art strictly below 0.5; the boundary itself is not-art.
    pub fn from_score(score: f64) -> Self {
        if score < 0.5 {
            Label::Art
        } else {
            Label::NotArt
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Art => "art",
            Label::NotArt => "not-art",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentroidModel {
    pub extractor_id: String,
    pub dimension: usize,
    pub scale: Vec<f64>,
    pub art: Vec<f64>,
    pub not_art: Vec<f64>,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Ratio score from the two centroid distances; 0.5 when both are zero.
pub fn distance_ratio(d_art: f64, d_not_art: f64) -> f64 {
    let total = d_art + d_not_art;
    if total == 0.0 {
        0.5
    } else {
        d_art / total
    }
}

impl CentroidModel {
    /// Builds the model from per-class feature vectors. The pooled statistics
    /// are accumulated per class and then combined, so swapping the classes
    /// swaps the centroids bit for bit.
    pub fn fit(
        extractor_id: &str,
        art: &[FeatureVector],
        not_art: &[FeatureVector],
    ) -> Result<Self, ClassifierError> {
        let dimension = art
            .first()
            .or(not_art.first())
            .map(FeatureVector::len)
            .ok_or_else(|| ClassifierError::MalformedModel("no training vectors".into()))?;
        if art.iter().chain(not_art).any(|v| v.len() != dimension) {
            return Err(ClassifierError::MalformedModel("feature lengths differ".into()));
        }
        let n = (art.len() + not_art.len()) as f64;
        let sum = |set: &[FeatureVector], d: usize| set.iter().map(|v| v.0[d]).sum::<f64>();
        let mut scale = Vec::with_capacity(dimension);
        for d in 0..dimension {
            let mean = (sum(art, d) + sum(not_art, d)) / n;
            let ss = |set: &[FeatureVector]| set.iter().map(|v| (v.0[d] - mean).powi(2)).sum::<f64>();
            scale.push(((ss(art) + ss(not_art)) / n).sqrt().max(SCALE_FLOOR));
        }
        let centroid = |set: &[FeatureVector]| -> Vec<f64> {
            (0..dimension)
                .map(|d| set.iter().map(|v| v.0[d] / scale[d]).sum::<f64>() / set.len() as f64)
                .collect()
        };
        Ok(CentroidModel {
            extractor_id: extractor_id.to_string(),
            dimension,
            art: centroid(art),
            not_art: centroid(not_art),
            scale,
        })
    }

    /// Extracts features for every image in both directories and fits a model.
    pub fn train(
        art_dir: &Path,
        not_art_dir: &Path,
        extractor: &dyn FeatureExtractor,
    ) -> Result<Self, ClassifierError> {
        let load = |dir: &Path| -> Result<Vec<FeatureVector>, ClassifierError> {
            let canvases: Vec<Canvas> = image_files(dir)?
                .par_iter()
                .filter_map(|p| Canvas::load(p).ok())
                .collect();
            if canvases.len() < 2 {
                return Err(ClassifierError::InsufficientCorpus {
                    dir: dir.to_path_buf(),
                    found: canvases.len(),
                });
            }
            Ok(canvases.par_iter().map(|c| extractor.extract(c)).collect())
        };
        let art = load(art_dir)?;
        let not_art = load(not_art_dir)?;
        Self::fit(extractor.id(), &art, &not_art)
    }

    pub fn check_compatible(&self, extractor: &dyn FeatureExtractor) -> Result<(), ClassifierError> {
        if self.extractor_id != extractor.id() || self.dimension != extractor.dimension() {
            return Err(ClassifierError::IncompatibleModel {
                model: self.extractor_id.clone(),
                model_dim: self.dimension,
                running: extractor.id().to_string(),
                running_dim: extractor.dimension(),
            });
        }
        Ok(())
    }

    pub fn standardize(&self, features: &FeatureVector) -> Vec<f64> {
        features.0.iter().zip(&self.scale).map(|(v, s)| v / s).collect()
    }

    pub fn score_features(&self, features: &FeatureVector) -> f64 {
        let v = self.standardize(features);
        distance_ratio(euclidean(&v, &self.art), euclidean(&v, &self.not_art))
    }

    pub fn score_with(&self, extractor: &dyn FeatureExtractor, canvas: &Canvas) -> Result<f64, ClassifierError> {
        self.check_compatible(extractor)?;
        Ok(self.score_features(&extractor.extract(canvas)))
    }

    /// Score with the built-in hand-crafted extractor.
    pub fn score(&self, canvas: &Canvas) -> Result<f64, ClassifierError> {
        self.score_with(&HandcraftedExtractor::new(), canvas)
    }

    pub fn label(&self, canvas: &Canvas) -> Result<Label, ClassifierError> {
        self.score(canvas).map(Label::from_score)
    }

    pub fn to_text(&self) -> String {
        let row = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ");
        format!(
            "extractor_id {}\ndimension {}\n{}\n{}\n{}\n",
            self.extractor_id,
            self.dimension,
            row(&self.scale),
            row(&self.art),
            row(&self.not_art)
        )
    }

    pub fn from_text(text: &str) -> Result<Self, ClassifierError> {
        let bad = |m: &str| ClassifierError::MalformedModel(m.to_string());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = |line: Option<&str>, key: &str| -> Result<String, ClassifierError> {
            let line = line.ok_or_else(|| bad(&format!("missing `{key}` line")))?;
            match line.split_once(char::is_whitespace) {
                Some((k, v)) if k == key => Ok(v.trim().to_string()),
                _ => Err(bad(&format!("expected `{key}` line"))),
            }
        };
        let extractor_id = header(lines.next(), "extractor_id")?;
        let dimension: usize = header(lines.next(), "dimension")?
            .parse()
            .map_err(|_| bad("dimension is not an integer"))?;
        let mut vector = |name: &str| -> Result<Vec<f64>, ClassifierError> {
            let line = lines.next().ok_or_else(|| bad(&format!("missing {name} vector")))?;
            let v = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad(&format!("non-numeric value in {name} vector")))?;
            if v.len() != dimension || v.iter().any(|x| !x.is_finite()) {
                return Err(bad(&format!("{name} vector must hold {dimension} finite values")));
            }
            Ok(v)
        };
        let scale = vector("scale")?;
        let art = vector("art")?;
        let not_art = vector("not-art")?;
        if scale.iter().any(|&s| s <= 0.0) {
            return Err(bad("scale values must be positive"));
        }
        Ok(CentroidModel {
            extractor_id,
            dimension,
            scale,
            art,
            not_art,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ClassifierError> {
        fs::write(path, self.to_text()).map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<Self, ClassifierError> {
        Self::from_text(&fs::read_to_string(path).map_err(io_err(path))?)
    }
}

/// Files with a PNG or JPEG extension directly inside `dir`, sorted by name.
pub fn image_files(dir: &Path) -> Result<Vec<PathBuf>, ClassifierError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"));
        if is_image && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchEntry {
    pub path: PathBuf,
    pub score: f64,
    pub label: Label,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchReport {
    pub entries: Vec<BatchEntry>,
    pub failures: Vec<(PathBuf, String)>,
}

impl BatchReport {
    pub fn art_count(&self) -> usize {
        self.entries.iter().filter(|e| e.label == Label::Art).count()
    }

    pub fn not_art_count(&self) -> usize {
        self.entries.len() - self.art_count()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["path", "score", "label"]).expect("in-memory write");
        for e in &self.entries {
            w.write_record([
                e.path.display().to_string(),
                e.score.to_string(),
                e.label.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

/// Scores every image in `dir`. Files that fail to decode are listed in
/// `failures` rather than aborting the batch.
pub fn classify_batch(dir: &Path, model: &CentroidModel) -> Result<BatchReport, ClassifierError> {
    let extractor = HandcraftedExtractor::new();
    model.check_compatible(&extractor)?;
    let results: Vec<_> = image_files(dir)?
        .into_par_iter()
        .map(|path| match Canvas::load(&path) {
            Ok(c) => {
                let score = model.score_features(&extractor.extract(&c));
                Ok(BatchEntry {
                    path,
                    score,
                    label: Label::from_score(score),
                })
            }
            Err(e) => Err((path, e.to_string())),
        })
        .collect();
    let mut report = BatchReport::default();
    for r in results {
        match r {
            Ok(e) => report.entries.push(e),
            Err(f) => report.failures.push(f),
        }
    }
    Ok(report)
}
