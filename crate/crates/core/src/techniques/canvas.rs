use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, RgbImage};

pub type Rgb = [u8; 3];

pub const BLACK: Rgb = [0, 0, 0];

/// Fixed-size 8-bit RGB raster. Every write is clipped to the bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canvas {
    width: u32,
    height: u32,
    background: Rgb,
    pixels: Vec<u8>,
}

impl Canvas {
    /// Panics when either dimension is zero.
    pub fn new(width: u32, height: u32, background: Rgb) -> Self {
        assert!(width > 0 && height > 0, "canvas dimensions must be non-zero");
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            pixels.extend_from_slice(&background);
        }
        Canvas {
            width,
            height,
            background,
            pixels,
        }
    }

    pub fn from_image(img: RgbImage, background: Rgb) -> Self {
        let (width, height) = img.dimensions();
        assert!(width > 0 && height > 0, "canvas dimensions must be non-zero");
        Canvas {
            width,
            height,
            background,
            pixels: img.into_raw(),
        }
    }

    /// Decodes any supported image file; the background is taken as black.
    pub fn load(path: &Path) -> Result<Self, image::ImageError> {
        let img = image::open(path)?.to_rgb8();
        if img.width() == 0 || img.height() == 0 {
            return Err(image::ImageError::Parameter(image::error::ParameterError::from_kind(
                image::error::ParameterErrorKind::DimensionMismatch,
            )));
        }
        Ok(Canvas::from_image(img, BLACK))
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn background(&self) -> Rgb {
        self.background
    }

    /// Row-major RGB bytes.
    pub fn as_raw(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn pixels(&self) -> impl Iterator<Item = Rgb> + '_ {
        self.pixels.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }

    pub fn in_bounds(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64
    }

    /// Writes one pixel; returns false (and writes nothing) when out of bounds.
    pub fn plot(&mut self, x: i64, y: i64, color: Rgb) -> bool {
        if !self.in_bounds(x, y) {
            return false;
        }
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&color);
        true
    }

    /// Square stamp of side `thickness` centred on (x, y).
    pub fn stamp(&mut self, x: i64, y: i64, thickness: u32, color: Rgb) {
        let t = thickness.max(1) as i64;
        let lo = -(t - 1) / 2;
        for dy in lo..lo + t {
            for dx in lo..lo + t {
                self.plot(x + dx, y + dy, color);
            }
        }
    }

    /// Bresenham segment between the pixel cells containing both endpoints.
    pub fn line(&mut self, from: (f64, f64), to: (f64, f64), thickness: u32, color: Rgb) {
        let (mut x0, mut y0) = (from.0.floor() as i64, from.1.floor() as i64);
        let (x1, y1) = (to.0.floor() as i64, to.1.floor() as i64);
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.stamp(x0, y0, thickness, color);
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }

    /// Fills every pixel whose centre lies within `r` of (cx, cy).
    pub fn fill_circle(&mut self, cx: f64, cy: f64, r: f64, color: Rgb) {
        let x_lo = ((cx - r).floor() as i64).max(0);
        let x_hi = ((cx + r).ceil() as i64).min(self.width as i64 - 1);
        let y_lo = ((cy - r).floor() as i64).max(0);
        let y_hi = ((cy + r).ceil() as i64).min(self.height as i64 - 1);
        let r2 = r * r;
        for y in y_lo..=y_hi {
            for x in x_lo..=x_hi {
                let ddx = x as f64 + 0.5 - cx;
                let ddy = y as f64 + 0.5 - cy;
                if ddx * ddx + ddy * ddy <= r2 {
                    self.plot(x, y, color);
                }
            }
        }
    }

    /// Pixels whose every channel lies within `tolerance` of the background.
    pub fn near_background_count(&self, tolerance: u8) -> usize {
        let bg = self.background;
        self.pixels()
            .filter(|p| p.iter().zip(bg).all(|(&c, b)| c.abs_diff(b) <= tolerance))
            .count()
    }

    pub fn to_image(&self) -> RgbImage {
        RgbImage::from_raw(self.width, self.height, self.pixels.clone())
            .expect("buffer length matches dimensions")
    }

    pub fn encode_png(&self) -> Result<Vec<u8>, image::ImageError> {
        let mut buf = Cursor::new(Vec::new());
        self.to_image().write_to(&mut buf, ImageFormat::Png)?;
        Ok(buf.into_inner())
    }

    pub fn save_png(&self, path: &Path) -> std::io::Result<()> {
        let bytes = self.encode_png().map_err(std::io::Error::other)?;
        std::fs::write(path, bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_canvas_is_background() {
        let c = Canvas::new(7, 5, [10, 20, 30]);
        assert!(c.pixels().all(|p| p == [10, 20, 30]));
        assert_eq!(c.near_background_count(0), 35);
    }

    #[test]
    fn writes_are_clipped() {
        let mut c = Canvas::new(4, 4, BLACK);
        assert!(!c.plot(-1, 0, [255; 3]));
        assert!(!c.plot(0, 4, [255; 3]));
        c.stamp(0, 0, 9, [255; 3]);
        c.line((-100.0, -100.0), (100.0, 100.0), 3, [1, 2, 3]);
        c.fill_circle(2.0, 2.0, 1e6, [9; 3]);
        assert_eq!(c.as_raw().len(), 48);
        assert!(c.pixels().all(|p| p == [9; 3]));
    }

    #[test]
    fn horizontal_line_touches_one_row() {
        let mut c = Canvas::new(10, 10, BLACK);
        c.line((0.0, 4.2), (9.9, 4.7), 1, [255; 3]);
        for y in 0..10 {
            for x in 0..10 {
                assert_eq!(c.pixel(x, y) != BLACK, y == 4);
            }
        }
    }

    #[test]
    fn png_round_trip() {
        let mut c = Canvas::new(3, 2, BLACK);
        c.plot(1, 1, [200, 100, 50]);
        let bytes = c.encode_png().unwrap();
        let back = image::load_from_memory(&bytes).unwrap().to_rgb8();
        assert_eq!(Canvas::from_image(back, BLACK), c);
    }
}
