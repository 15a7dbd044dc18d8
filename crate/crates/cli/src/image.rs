//! Binary PGM (`P5`) output.

use std::path::Path;

use anyhow::{bail, Context, Result};

/// Grayscale raster, row-major, one byte per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Gray {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Gray {
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_pgm())
            .with_context(|| format!("cannot write {}", path.display()))
    }
}

/// Map values linearly from `[lo, hi]` to `0..=255` (clamped; NaN → 0).
pub fn scaled(width: usize, height: usize, values: &[f64], lo: f64, hi: f64) -> Result<Gray> {
    if values.is_empty() || values.len() != width * height {
        bail!("image data must be nonempty and match {width}×{height}");
    }
    let pixels = values
        .iter()
        .map(|v| {
            if v.is_nan() {
                0
            } else {
                (255.0 * ((v - lo) / (hi - lo)).clamp(0.0, 1.0)).round() as u8
            }
        })
        .collect();
    Ok(Gray {
        width,
        height,
        pixels,
    })
}

/// Fixed scale of `log10` slice diameters: `[10⁻⁶, 2]`.
pub fn log_diameter_image(width: usize, height: usize, diam: &[f64]) -> Result<Gray> {
    let logs: Vec<f64> = diam.iter().map(|d| d.max(1e-300).log10()).collect();
    scaled(width, height, &logs, -6.0, 2f64.log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_constant_image() {
        let g = log_diameter_image(3, 2, &[0.5; 6]).unwrap();
        assert!(g.pixels.iter().all(|&p| p == g.pixels[0]));
        let bytes = g.to_pgm();
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(bytes.len(), 11 + 6);
    }

    #[test]
    fn clamping_and_validation() {
        let g = scaled(2, 1, &[-10.0, 10.0], 0.0, 1.0).unwrap();
        assert_eq!(g.pixels, vec![0, 255]);
        assert!(scaled(2, 2, &[0.0], 0.0, 1.0).is_err());
        assert!(scaled(0, 0, &[], 0.0, 1.0).is_err());
    }
}
