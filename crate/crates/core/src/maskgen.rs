//! Neighbor-aware soft masks.
//!
//! For every pixel and channel the largest absolute difference to a fixed set
//! of neighbors is taken (out-of-bounds neighbors come from a padded copy of
//! the image), then mapped through `sigmoid(alpha * (diff - tau))`. Pixels on
//! edges and textures get weights near 1, flat regions near
//! `sigmoid(-alpha * tau)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageio::Image;

/// How out-of-bounds neighbors are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    /// Mirror including the border: index `-d` reads `d - 1`.
    #[default]
    Symmetric,
    /// Repeat the border sample: index `-d` reads `0`.
    Replicate,
    /// Mirror excluding the border: index `-d` reads `d`.
    Reflect,
}

impl Padding {
    /// Maps a possibly out-of-range index into `0..len`.
    #[inline]
    fn resolve(self, idx: isize, len: usize) -> usize {
        let n = len as isize;
        let r = if idx < 0 {
            match self {
                Padding::Symmetric => -idx - 1,
                Padding::Replicate => 0,
                Padding::Reflect => -idx,
            }
        } else if idx >= n {
            let over = idx - n; // 0 for the first pad row
            match self {
                Padding::Symmetric => n - 1 - over,
                Padding::Replicate => n - 1,
                Padding::Reflect => n - 2 - over,
            }
        } else {
            idx
        };
        r as usize
    }

    fn min_extent(self, pad: usize) -> usize {
        match self {
            Padding::Reflect => pad + 1,
            _ => pad,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaskConfig {
    pub tau: f64,
    pub alpha: f64,
    pub n: usize,
    pub padding: Padding,
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self {
            tau: 0.3,
            alpha: 50.0,
            n: 8,
            padding: Padding::Symmetric,
        }
    }
}

impl MaskConfig {
    pub fn new(tau: f64, alpha: f64, n: usize) -> Result<Self> {
        let cfg = Self {
            tau,
            alpha,
            n,
            padding: Padding::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "tau must lie in (0, 1), got {}",
                self.tau
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        neighborhood_offsets(self.n).map(|_| ())
    }
}

/// Per-pixel, per-channel maximum absolute neighbor difference.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMap {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

/// Per-pixel, per-channel sigmoid weights, shaped like the source image.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMask {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl SoftMask {
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    /// Collapses channels by max into a grayscale image for visualization.
    pub fn heatmap(&self) -> Image {
        let data = self
            .data
            .chunks_exact(self.channels)
            .map(|px| px.iter().copied().fold(0.0, f64::max));
        Image::from_clamped(self.height, self.width, 1, data)
            .expect("mask shape is a valid image shape")
    }
}

/// Neighbor offsets `(row, col)` for `n` in {4, 8, 12}.
///
/// 12 extends the 8-neighborhood with the four axial offsets at distance 2.
pub fn neighborhood_offsets(n: usize) -> Result<Vec<(isize, isize)>> {
    const AXIAL: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
    const DIAGONAL: [(isize, isize); 4] = [(-1, -1), (-1, 1), (1, -1), (1, 1)];
    const AXIAL2: [(isize, isize); 4] = [(-2, 0), (2, 0), (0, -2), (0, 2)];
    let offsets = match n {
        4 => AXIAL.to_vec(),
        8 => [AXIAL, DIAGONAL].concat(),
        12 => [AXIAL, DIAGONAL, AXIAL2].concat(),
        _ => {
            return Err(Error::InvalidConfig(format!(
                "neighborhood size must be 4, 8 or 12, got {n}"
            )))
        }
    };
    Ok(offsets)
}

pub fn max_neighbor_diff(img: &Image, n: usize) -> Result<DiffMap> {
    max_neighbor_diff_padded(img, n, Padding::default())
}

pub fn max_neighbor_diff_padded(img: &Image, n: usize, padding: Padding) -> Result<DiffMap> {
    let offsets = neighborhood_offsets(n)?;
    let pad = offsets
        .iter()
        .map(|&(dy, dx)| dy.unsigned_abs().max(dx.unsigned_abs()))
        .max()
        .unwrap_or(0);
    let (h, w, ch) = img.shape();
    let needed = padding.min_extent(pad);
    if h < needed || w < needed {
        return Err(Error::ImageTooSmall {
            height: h,
            width: w,
            needed,
        });
    }

    let src = img.data();
    let mut data = vec![0.0; src.len()];
    for i in 0..h {
        for j in 0..w {
            let center = (i * w + j) * ch;
            for &(dy, dx) in &offsets {
                let ni = padding.resolve(i as isize + dy, h);
                let nj = padding.resolve(j as isize + dx, w);
                let neighbor = (ni * w + nj) * ch;
                for c in 0..ch {
                    let d = (src[neighbor + c] - src[center + c]).abs();
                    if d > data[center + c] {
                        data[center + c] = d;
                    }
                }
            }
        }
    }
    Ok(DiffMap {
        height: h,
        width: w,
        channels: ch,
        data,
    })
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn soft_mask(diff: &DiffMap, tau: f64, alpha: f64) -> SoftMask {
    SoftMask {
        height: diff.height,
        width: diff.width,
        channels: diff.channels,
        data: diff
            .data
            .iter()
            .map(|&d| sigmoid(alpha * (d - tau)))
            .collect(),
    }
}

/// Soft mask of `img` under `cfg`.
pub fn compute_mask(img: &Image, cfg: &MaskConfig) -> Result<SoftMask> {
    cfg.validate()?;
    let diff = max_neighbor_diff_padded(img, cfg.n, cfg.padding)?;
    Ok(soft_mask(&diff, cfg.tau, cfg.alpha))
}
