//! Equirectangular PPM images of snapshot real parts.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

use crate::snapshot::SnapshotFile;

const BLUE: [f64; 3] = [0.230, 0.299, 0.754];
const WHITE: [f64; 3] = [0.865, 0.865, 0.865];
const RED: [f64; 3] = [0.706, 0.016, 0.150];

/// Diverging blue-white-red map of `s ∈ [-1, 1]`.
pub fn colormap(s: f64) -> [u8; 3] {
    let s = if s.is_finite() {
        s.clamp(-1.0, 1.0)
    } else {
        0.0
    };
    let (from, to, w) = if s < 0.0 {
        (WHITE, BLUE, -s)
    } else {
        (WHITE, RED, s)
    };
    let mut px = [0u8; 3];
    for k in 0..3 {
        px[k] = ((from[k] + (to[k] - from[k]) * w) * 255.0).round() as u8;
    }
    px
}

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB.
    pub pixels: Vec<[u8; 3]>,
}

impl Image {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn write_ppm(&self, w: &mut impl Write) -> Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        for p in &self.pixels {
            w.write_all(p)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        );
        self.write_ppm(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// Longitude wraps around, colatitude is clamped at the poles.
fn bilinear(s: &SnapshotFile, y: f64, x: f64) -> f64 {
    let y = y.clamp(0.0, (s.rows - 1) as f64);
    let (y0, x0) = (y.floor() as usize, x.floor());
    let (fy, fx) = (y - y0 as f64, x - x0);
    let y1 = (y0 + 1).min(s.rows - 1);
    let c0 = (x0 as i64).rem_euclid(s.cols as i64) as usize;
    let c1 = (c0 + 1) % s.cols;
    let top = s.get(y0, c0).re * (1.0 - fx) + s.get(y0, c1).re * fx;
    let bottom = s.get(y1, c0).re * (1.0 - fx) + s.get(y1, c1).re * fx;
    top * (1.0 - fy) + bottom * fy
}

/// North pole on top, longitude `-π` on the left. `scale > 1` upsamples
/// bilinearly. The colour range is symmetric about zero.
pub fn render(s: &SnapshotFile, scale: usize) -> Image {
    let scale = scale.max(1);
    let max = s.values.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let norm = if max > 0.0 { 1.0 / max } else { 0.0 };
    let (width, height) = (s.cols * scale, (s.rows - 1) * scale + 1);
    let mut pixels = Vec::with_capacity(width * height);
    for py in 0..height {
        for px in 0..width {
            let v = if scale == 1 {
                s.get(py, px).re
            } else {
                bilinear(s, py as f64 / scale as f64, px as f64 / scale as f64)
            };
            pixels.push(colormap(v * norm));
        }
    }
    Image {
        width,
        height,
        pixels,
    }
}
