//! Collages of image directories and direct rendering of genome text.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use image::imageops::{self, FilterType};
use image::RgbImage;
use thiserror::Error;

use crate::classifier::image_files;
use crate::genome::{Genome, ParseError, Registry};
use crate::techniques::{express, Clock, ExpressionReport, RenderSettings, TechniqueError, BLACK};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no decodable images in `{0}`")]
    NoImages(PathBuf),
    #[error("columns and cell size must be positive")]
    InvalidLayout,
    #[error("genome {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Technique(#[from] TechniqueError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("listing images: {0}")]
    Listing(String),
}

/// Tiles the images of `dir`, sorted by file name, row-major into `columns`
/// columns. Each image is resized to `cell` with nearest-neighbour sampling;
/// unused trailing cells stay black. Undecodable files are skipped.
pub fn collage(dir: &Path, columns: u32, cell: (u32, u32), out: &Path) -> Result<RgbImage, ReportError> {
    if columns == 0 || cell.0 == 0 || cell.1 == 0 {
        return Err(ReportError::InvalidLayout);
    }
    let images: Vec<RgbImage> = image_files(dir)
        .map_err(|e| ReportError::Listing(e.to_string()))?
        .iter()
        .filter_map(|p| image::open(p).ok())
        .map(|img| img.to_rgb8())
        .collect();
    if images.is_empty() {
        return Err(ReportError::NoImages(dir.to_path_buf()));
    }
    let rows = (images.len() as u32).div_ceil(columns);
    let mut sheet = RgbImage::from_pixel(columns * cell.0, rows * cell.1, image::Rgb(BLACK));
    for (i, img) in images.iter().enumerate() {
        let (col, row) = (i as u32 % columns, i as u32 / columns);
        let tile = imageops::resize(img, cell.0, cell.1, FilterType::Nearest);
        imageops::replace(&mut sheet, &tile, (col * cell.0) as i64, (row * cell.1) as i64);
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| ReportError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    sheet
        .save_with_format(out, image::ImageFormat::Png)
        .map_err(|e| ReportError::Io {
            path: out.to_path_buf(),
            source: std::io::Error::other(e),
        })?;
    Ok(sheet)
}

/// Parses `text`, expresses it on a fresh canvas and writes the PNG.
pub fn render_genome(
    text: &str,
    registry: &Registry,
    settings: &RenderSettings,
    budget: Duration,
    clock: &dyn Clock,
    out: &Path,
) -> Result<ExpressionReport, ReportError> {
    let genome = Genome::parse(text, registry)?;
    let (canvas, report) = express(&genome, settings, budget, clock)?;
    canvas.save_png(out).map_err(|source| ReportError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::techniques::{Canvas, SystemClock};

    fn write_images(dir: &Path, n: usize) {
        for i in 0..n {
            let mut c = Canvas::new(10, 6, BLACK);
            c.plot(i as i64 % 10, 0, [255, (i * 20) as u8, 0]);
            c.save_png(&dir.join(format!("img{i:03}.png"))).unwrap();
        }
    }

    #[test]
    fn layout_arithmetic() {
        let dir = tempfile::tempdir().unwrap();
        write_images(dir.path(), 1);
        let out = dir.path().join("out/c.png");
        assert_eq!(collage(dir.path(), 1, (32, 16), &out).unwrap().dimensions(), (32, 16));

        let many = tempfile::tempdir().unwrap();
        write_images(many.path(), 23);
        let sheet = collage(many.path(), 10, (8, 8), &dir.path().join("sheet.png")).unwrap();
        assert_eq!(sheet.dimensions(), (80, 24));
        assert_eq!(sheet.get_pixel(79, 23).0, BLACK);
    }

    #[test]
    fn collage_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        write_images(dir.path(), 5);
        let out = tempfile::tempdir().unwrap();
        let (a, b) = (out.path().join("a.png"), out.path().join("b.png"));
        collage(dir.path(), 2, (20, 12), &a).unwrap();
        collage(dir.path(), 2, (20, 12), &b).unwrap();
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }

    #[test]
    fn empty_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            collage(dir.path(), 3, (8, 8), &dir.path().join("x.png")),
            Err(ReportError::NoImages(_))
        ));
    }

    #[test]
    fn flat_sine_renders_one_horizontal_line() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("line.png");
        let report = render_genome(
            "basic-trig:0,1,0,1,0,0.5,1",
            &Registry::default(),
            &RenderSettings::new(40, 30, 1),
            Duration::from_secs(10),
            &SystemClock::default(),
            &out,
        )
        .unwrap();
        assert_eq!(report.genes_expressed, 1);
        let c = Canvas::load(&out).unwrap();
        let lit_rows: Vec<u32> = (0..30).filter(|&y| (0..40).any(|x| c.pixel(x, y) != BLACK)).collect();
        assert_eq!(lit_rows, [15]);
        assert!((0..40).all(|x| c.pixel(x, 15) != BLACK));
    }

    #[test]
    fn malformed_genome_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let err = render_genome(
            "basic-trig:0,1,0,1,0,0.5,1\nwat:1",
            &Registry::default(),
            &RenderSettings::new(8, 8, 1),
            Duration::from_secs(1),
            &SystemClock::default(),
            &dir.path().join("x.png"),
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("genome line 2:"), "{err}");
    }
}
