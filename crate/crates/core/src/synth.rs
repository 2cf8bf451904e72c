//! Synthetic test images with known high-frequency structure.

use crate::error::Result;
use crate::imageio::Image;

/// Grayscale composite: checkerboard in the top-left quadrant, a horizontal
/// linear ramp top-right, a bright disk bottom-left and flat mid-gray
/// bottom-right.
pub fn composite(size: usize) -> Result<Image> {
    let half = (size / 2).max(1);
    let cell = (size / 16).max(2);
    let radius = half as f64 * 0.35;
    Image::from_fn(size, size, 1, |i, j, _| {
        let top = i < half;
        let left = j < half;
        match (top, left) {
            (true, true) => {
                if (i / cell + j / cell) % 2 == 0 {
                    0.9
                } else {
                    0.1
                }
            }
            (true, false) => {
                let span = (size - half).max(2) - 1;
                0.1 + 0.8 * (j - half) as f64 / span as f64
            }
            (false, true) => {
                let cy = half as f64 + half as f64 / 2.0 - 0.5;
                let cx = half as f64 / 2.0 - 0.5;
                let d = ((i as f64 - cy).powi(2) + (j as f64 - cx).powi(2)).sqrt();
                if d <= radius {
                    0.85
                } else {
                    0.15
                }
            }
            (false, false) => 0.5,
        }
    })
}

/// RGB variant of [`composite`] with a different tint per channel.
pub fn composite_rgb(size: usize) -> Result<Image> {
    let gray = composite(size)?;
    let tint = [1.0, 0.8, 0.6];
    Image::from_fn(size, size, 3, |i, j, c| {
        let v = gray.get(i, j, 0);
        if c == 2 {
            // Blue carries an extra vertical ramp.
            (0.5 * v + 0.5 * i as f64 / size as f64).min(1.0)
        } else {
            v * tint[c]
        }
    })
}
