//! Reconstruction quality: MSE, PSNR, SSIM and region-wise PSNR.

use std::fmt;

use crate::error::{Error, Result};
use crate::imageio::Image;
use crate::maskgen::SoftMask;

/// A PSNR value in dB. Identical inputs have no finite PSNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Finite(f64),
    Infinite,
}

impl Psnr {
    pub fn from_mse(mse: f64, max_value: f64) -> Psnr {
        if mse == 0.0 {
            Psnr::Infinite
        } else {
            Psnr::Finite(10.0 * (max_value * max_value / mse).log10())
        }
    }

    /// The value as `f64`, with `Infinite` mapped to `f64::INFINITY`.
    pub fn value(self) -> f64 {
        match self {
            Psnr::Finite(v) => v,
            Psnr::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Psnr::Infinite)
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Finite(v) => write!(f, "{v}"),
            Psnr::Infinite => f.write_str("inf"),
        }
    }
}

fn check_same_shape(p: &Image, q: &Image) -> Result<()> {
    if p.shape() != q.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            p.shape(),
            q.shape()
        )));
    }
    Ok(())
}

pub fn mse(p: &Image, q: &Image) -> Result<f64> {
    check_same_shape(p, q)?;
    let sum: f64 = p
        .data()
        .iter()
        .zip(q.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / p.len() as f64)
}

pub fn psnr(p: &Image, q: &Image, max_value: f64) -> Result<Psnr> {
    if !(max_value > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "max_value must be positive, got {max_value}"
        )));
    }
    Ok(Psnr::from_mse(mse(p, q)?, max_value))
}

/// Single-scale Gaussian-window SSIM settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SsimConfig {
    pub window_size: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        Self {
            window_size: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
        }
    }
}

impl SsimConfig {
    pub fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }

    /// The structure constant; collapses the three-factor form into the
    /// two-factor one.
    pub fn c3(&self) -> f64 {
        self.c2() / 2.0
    }

    /// Normalized 1-D Gaussian taps. The 2-D window is their outer product.
    pub fn kernel(&self) -> Vec<f64> {
        let r = (self.window_size / 2) as f64;
        let raw: Vec<f64> = (0..self.window_size)
            .map(|k| {
                let x = k as f64 - r;
                (-(x * x) / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / total).collect()
    }
}

/// Separable Gaussian filter of one channel with edge-replicated borders.
fn blur(plane: &[f64], h: usize, w: usize, taps: &[f64]) -> Vec<f64> {
    let r = (taps.len() / 2) as isize;
    let clamp = |k: isize, n: usize| k.clamp(0, n as isize - 1) as usize;
    let mut rows = vec![0.0; h * w];
    for i in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            for (t, &tap) in taps.iter().enumerate() {
                acc += tap * plane[i * w + clamp(j as isize + t as isize - r, w)];
            }
            rows[i * w + j] = acc;
        }
    }
    let mut out = vec![0.0; h * w];
    for i in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            for (t, &tap) in taps.iter().enumerate() {
                acc += tap * rows[clamp(i as isize + t as isize - r, h) * w + j];
            }
            out[i * w + j] = acc;
        }
    }
    out
}

/// Mean SSIM over all pixels and channels.
pub fn ssim(p: &Image, q: &Image, cfg: &SsimConfig) -> Result<f64> {
    check_same_shape(p, q)?;
    let (h, w, ch) = p.shape();
    if h < cfg.window_size || w < cfg.window_size {
        return Err(Error::ImageTooSmall {
            height: h,
            width: w,
            needed: cfg.window_size,
        });
    }
    let taps = cfg.kernel();
    let (c1, c2) = (cfg.c1(), cfg.c2());
    let mut total = 0.0;
    for c in 0..ch {
        let plane = |img: &Image, f: &dyn Fn(f64, f64) -> f64, other: &Image| -> Vec<f64> {
            img.data()
                .iter()
                .skip(c)
                .step_by(ch)
                .zip(other.data().iter().skip(c).step_by(ch))
                .map(|(&a, &b)| f(a, b))
                .collect()
        };
        let mu_p = blur(&plane(p, &|a, _| a, q), h, w, &taps);
        let mu_q = blur(&plane(p, &|_, b| b, q), h, w, &taps);
        let pp = blur(&plane(p, &|a, _| a * a, q), h, w, &taps);
        let qq = blur(&plane(p, &|_, b| b * b, q), h, w, &taps);
        let pq = blur(&plane(p, &|a, b| a * b, q), h, w, &taps);
        for k in 0..h * w {
            let (mp, mq) = (mu_p[k], mu_q[k]);
            let var_p = pp[k] - mp * mp;
            let var_q = qq[k] - mq * mq;
            let cov = pq[k] - mp * mq;
            total += ((2.0 * mp * mq + c1) * (2.0 * cov + c2))
                / ((mp * mp + mq * mq + c1) * (var_p + var_q + c2));
        }
    }
    Ok(total / (h * w * ch) as f64)
}

/// PSNR split into high- and low-frequency regions of a soft mask.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    pub overall_psnr: Psnr,
    /// `None` when no element reaches the threshold.
    pub hf_psnr: Option<Psnr>,
    /// `None` when every element reaches the threshold.
    pub lf_psnr: Option<Psnr>,
    pub hf_pixel_count: usize,
    pub lf_pixel_count: usize,
}

/// Elements with `mask >= threshold` form the high-frequency region; the
/// rest form the low-frequency region. Counts are per element (pixel x channel).
pub fn region_psnr(p: &Image, q: &Image, mask: &SoftMask, threshold: f64) -> Result<RegionReport> {
    check_same_shape(p, q)?;
    if mask.shape() != p.shape() {
        return Err(Error::ShapeMismatch(format!(
            "mask {:?} vs image {:?}",
            mask.shape(),
            p.shape()
        )));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "region threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let (mut hf_sum, mut lf_sum) = (0.0, 0.0);
    let (mut hf_n, mut lf_n) = (0usize, 0usize);
    for ((a, b), &m) in p.data().iter().zip(q.data()).zip(&mask.data) {
        let e = (a - b) * (a - b);
        if m >= threshold {
            hf_sum += e;
            hf_n += 1;
        } else {
            lf_sum += e;
            lf_n += 1;
        }
    }
    let region = |sum: f64, n: usize| (n > 0).then(|| Psnr::from_mse(sum / n as f64, 1.0));
    Ok(RegionReport {
        overall_psnr: psnr(p, q, 1.0)?,
        hf_psnr: region(hf_sum, hf_n),
        lf_psnr: region(lf_sum, lf_n),
        hf_pixel_count: hf_n,
        lf_pixel_count: lf_n,
    })
}
