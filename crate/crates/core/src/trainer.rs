//! Two-stage fitting.
//!
//! Stage one ("hf") minimizes the mask-weighted loss for `stage1_epochs`
//! full-batch epochs, stage two ("full") minimizes plain MSE for
//! `stage2_epochs`. Architecture and (by default) Adam state carry over the
//! stage boundary unchanged; only the loss switches.

use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageio::Image;
use crate::maskgen::{compute_mask, MaskConfig, SoftMask};
use crate::metrics::{psnr, region_psnr, ssim, Psnr, RegionReport, SsimConfig};
use crate::net::{
    forward, init_mlp_with_bias_scale, loss_and_grad, Activation, AdamConfig, AdamState,
    CoordBatch, MlpParams, DEFAULT_FINER_BIAS_SCALE, DEFAULT_OMEGA0,
};

/// Stage-one weights below this everywhere make the mask unusable.
pub const DEGENERATE_MASK_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backbone {
    #[default]
    Siren,
    Finer,
}

impl Backbone {
    pub fn activation(self, omega0: f64) -> Activation {
        match self {
            Backbone::Siren => Activation::Sine { omega0 },
            Backbone::Finer => Activation::Finer { omega0 },
        }
    }
}

impl fmt::Display for Backbone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backbone::Siren => "siren",
            Backbone::Finer => "finer",
        })
    }
}

impl std::str::FromStr for Backbone {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "siren" => Ok(Backbone::Siren),
            "finer" => Ok(Backbone::Finer),
            other => Err(Error::InvalidConfig(format!("unknown backbone '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Hf,
    Full,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Hf => "hf",
            Stage::Full => "full",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub stage1_epochs: usize,
    pub stage2_epochs: usize,
    pub learning_rate: f64,
    pub hidden_layers: usize,
    pub width: usize,
    pub backbone: Backbone,
    pub omega0: f64,
    pub finer_bias_scale: f64,
    pub mask: MaskConfig,
    pub seed: u64,
    /// Epochs between history snapshots; 0 records only the final epoch.
    pub eval_every: usize,
    /// Start stage two with fresh Adam moments.
    pub reset_optimizer: bool,
    /// Mask level separating HF from LF elements in the final region report.
    pub region_threshold: f64,
    /// Print a line per snapshot to stderr.
    pub progress: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            stage1_epochs: 200,
            stage2_epochs: 300,
            learning_rate: 1e-4,
            hidden_layers: 3,
            width: 256,
            backbone: Backbone::Siren,
            omega0: DEFAULT_OMEGA0,
            finer_bias_scale: DEFAULT_FINER_BIAS_SCALE,
            mask: MaskConfig::default(),
            seed: 0,
            eval_every: 50,
            reset_optimizer: false,
            region_threshold: 0.5,
            progress: false,
        }
    }
}

impl TrainConfig {
    /// Reduced profile for quick CPU runs: width 64, 100 + 150 epochs.
    pub fn desk() -> Self {
        Self {
            stage1_epochs: 100,
            stage2_epochs: 150,
            width: 64,
            ..Self::default()
        }
    }

    pub fn total_epochs(&self) -> usize {
        self.stage1_epochs + self.stage2_epochs
    }

    pub fn activation(&self) -> Activation {
        self.backbone.activation(self.omega0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_epochs() == 0 {
            return Err(Error::InvalidConfig("at least one epoch is required".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.region_threshold > 0.0 && self.region_threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "region threshold must lie in (0, 1), got {}",
                self.region_threshold
            )));
        }
        self.mask.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub epoch: usize,
    pub stage: Stage,
    /// Training loss evaluated at this epoch (before its update).
    pub loss: f64,
    /// Full-image metrics after this epoch's update.
    pub psnr: Psnr,
    /// `None` when the image is smaller than the SSIM window.
    pub ssim: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinalMetrics {
    pub psnr: Psnr,
    pub ssim: Option<f64>,
    pub region: RegionReport,
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub final_params: MlpParams,
    pub reconstruction: Image,
    pub metrics: FinalMetrics,
    pub history: Vec<Snapshot>,
    /// The stage-one mask; `None` when stage one was skipped.
    pub training_mask: Option<SoftMask>,
}

/// Pixel coordinates as rows `(x, y)` in row-major pixel order.
///
/// Pixel `(i, j)` maps to `x = 2j/(w-1) - 1`, `y = 2i/(h-1) - 1`; a
/// dimension of length 1 maps to 0.
pub fn coord_grid(h: usize, w: usize) -> Array2<f64> {
    let axis = |k: usize, n: usize| {
        if n <= 1 {
            0.0
        } else {
            2.0 * k as f64 / (n - 1) as f64 - 1.0
        }
    };
    let mut grid = Array2::zeros((h * w, 2));
    for i in 0..h {
        for j in 0..w {
            let row = i * w + j;
            grid[[row, 0]] = axis(j, w);
            grid[[row, 1]] = axis(i, h);
        }
    }
    grid
}

fn image_targets(img: &Image) -> Array2<f64> {
    Array2::from_shape_vec(
        (img.height() * img.width(), img.channels()),
        img.data().to_vec(),
    )
    .expect("image data length matches its shape")
}

/// Evaluates the network on an `h x w` grid, clamped to `[0, 1]`.
pub fn reconstruct(params: &MlpParams, h: usize, w: usize) -> Result<Image> {
    let out = forward(params, coord_grid(h, w).view())?;
    Image::from_clamped(h, w, params.out_dim(), out.into_iter())
}

fn evaluate(params: &MlpParams, truth: &Image) -> Result<(Image, Psnr, Option<f64>)> {
    let recon = reconstruct(params, truth.height(), truth.width())?;
    let p = psnr(&recon, truth, 1.0)?;
    let s = ssim(&recon, truth, &SsimConfig::default()).ok();
    Ok((recon, p, s))
}

/// Fits `img` with the two-stage schedule in `cfg`.
pub fn fit(img: &Image, cfg: &TrainConfig) -> Result<TrainResult> {
    fit_with_observer(img, cfg, |_, _, _, _| {})
}

/// As [`fit`], calling `observer(epoch, stage, loss, params)` after every
/// parameter update.
pub fn fit_with_observer(
    img: &Image,
    cfg: &TrainConfig,
    mut observer: impl FnMut(usize, Stage, f64, &MlpParams),
) -> Result<TrainResult> {
    cfg.validate()?;
    let (h, w, channels) = img.shape();
    let coords = coord_grid(h, w);
    let targets = image_targets(img);

    let training_mask = if cfg.stage1_epochs > 0 {
        let mask = compute_mask(img, &cfg.mask)?;
        if mask.data.iter().all(|&m| m < DEGENERATE_MASK_THRESHOLD) {
            return Err(Error::DegenerateWeights(mask.data.iter().sum()));
        }
        Some(mask)
    } else {
        None
    };
    let batch = match &training_mask {
        Some(mask) => {
            let weights = Array2::from_shape_vec((h * w, channels), mask.data.clone())
                .expect("mask shape matches image");
            CoordBatch::with_weights(coords, targets, weights)?
        }
        None => CoordBatch::new(coords, targets)?,
    };

    let mut params = init_mlp_with_bias_scale(
        cfg.hidden_layers,
        cfg.width,
        channels,
        cfg.activation(),
        cfg.seed,
        cfg.finer_bias_scale,
    )?;
    let adam_cfg = AdamConfig::with_learning_rate(cfg.learning_rate);
    let mut adam = AdamState::new(&params, adam_cfg)?;

    let total = cfg.total_epochs();
    let mut history = Vec::new();
    for epoch in 1..=total {
        let stage = if epoch <= cfg.stage1_epochs {
            Stage::Hf
        } else {
            Stage::Full
        };
        if cfg.reset_optimizer && cfg.stage1_epochs > 0 && epoch == cfg.stage1_epochs + 1 {
            adam = AdamState::new(&params, adam_cfg)?;
        }
        let (loss, grads) = loss_and_grad(&params, &batch, stage == Stage::Hf)?;
        adam.step(&mut params, &grads)?;
        observer(epoch, stage, loss, &params);

        let snapshot_due = epoch == total || (cfg.eval_every > 0 && epoch % cfg.eval_every == 0);
        if snapshot_due {
            let (_, p, s) = evaluate(&params, img)?;
            if cfg.progress {
                eprintln!("epoch={epoch} stage={stage} loss={loss} psnr={p}");
            }
            history.push(Snapshot {
                epoch,
                stage,
                loss,
                psnr: p,
                ssim: s,
            });
        }
    }

    let (reconstruction, final_psnr, final_ssim) = evaluate(&params, img)?;
    let region_mask = match &training_mask {
        Some(m) => m.clone(),
        None => compute_mask(img, &cfg.mask)?,
    };
    let region = region_psnr(&reconstruction, img, &region_mask, cfg.region_threshold)?;

    Ok(TrainResult {
        final_params: params,
        reconstruction,
        metrics: FinalMetrics {
            psnr: final_psnr,
            ssim: final_ssim,
            region,
        },
        history,
        training_mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::init_mlp;

    fn tiny_cfg(stage1: usize, stage2: usize) -> TrainConfig {
        TrainConfig {
            stage1_epochs: stage1,
            stage2_epochs: stage2,
            width: 16,
            hidden_layers: 2,
            eval_every: 5,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn coord_grid_corners_center_and_degenerate() {
        let g = coord_grid(2, 2);
        let rows: Vec<(f64, f64)> = g.rows().into_iter().map(|r| (r[0], r[1])).collect();
        assert_eq!(rows, vec![(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)]);

        let g = coord_grid(3, 3);
        assert_eq!((g[[4, 0]], g[[4, 1]]), (0.0, 0.0));

        let g = coord_grid(1, 5);
        let xs: Vec<f64> = g.column(0).to_vec();
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(g.column(1).iter().all(|&y| y == 0.0));
    }

    #[test]
    fn reconstruct_contracts() {
        let mut p = init_mlp(2, 8, 3, Activation::Sine { omega0: 30.0 }, 0).unwrap();
        let img = reconstruct(&p, 6, 7).unwrap();
        assert_eq!(img.shape(), (6, 7, 3));
        let raw = forward(&p, coord_grid(6, 7).view()).unwrap();
        for (a, b) in img.data().iter().zip(raw.iter()) {
            assert_eq!(*a, b.clamp(0.0, 1.0));
        }
        assert_eq!(reconstruct(&p, 12, 14).unwrap().shape(), (12, 14, 3));

        for l in &mut p.layers {
            l.weight.fill(0.0);
            l.bias.fill(0.0);
        }
        assert!(reconstruct(&p, 3, 3).unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn baseline_skips_mask() {
        let img = Image::from_fn(8, 8, 1, |i, j, _| ((i + j) % 2) as f64).unwrap();
        let res = fit(&img, &tiny_cfg(0, 3)).unwrap();
        assert!(res.training_mask.is_none());
        assert!(res.history.iter().all(|s| s.stage == Stage::Full));
    }

    #[test]
    fn history_is_ordered_by_stage() {
        let img = Image::from_fn(8, 8, 1, |i, _, _| i as f64 / 7.0).unwrap();
        let res = fit(&img, &tiny_cfg(7, 6)).unwrap();
        let epochs: Vec<usize> = res.history.iter().map(|s| s.epoch).collect();
        assert_eq!(epochs, vec![5, 10, 13]);
        let stages: Vec<Stage> = res.history.iter().map(|s| s.stage).collect();
        assert_eq!(stages, vec![Stage::Hf, Stage::Full, Stage::Full]);
        assert!(res.training_mask.is_some());
    }

    #[test]
    fn degenerate_mask_aborts() {
        // Flat image with a huge alpha: every weight underflows.
        let img = Image::filled(8, 8, 1, 0.4).unwrap();
        let mut cfg = tiny_cfg(2, 2);
        cfg.mask.alpha = 1e4;
        cfg.mask.tau = 0.9;
        assert!(matches!(fit(&img, &cfg), Err(Error::DegenerateWeights(_))));
    }

    #[test]
    fn uniform_mask_matches_plain_mse_trajectory() {
        let img = Image::filled(8, 8, 1, 0.3).unwrap();
        let hf = fit(&img, &tiny_cfg(10, 0)).unwrap();
        let plain = fit(&img, &tiny_cfg(0, 10)).unwrap();
        for (a, b) in hf.final_params.iter().zip(plain.final_params.iter()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn reset_optimizer_changes_trajectory() {
        let img = crate::synth::composite(12).unwrap();
        let keep = fit(&img, &tiny_cfg(3, 3)).unwrap();
        let mut cfg = tiny_cfg(3, 3);
        cfg.reset_optimizer = true;
        let reset = fit(&img, &cfg).unwrap();
        assert_ne!(keep.final_params, reset.final_params);
    }

    #[test]
    fn mask_is_fixed_across_stage_one() {
        let img = crate::synth::composite(16).unwrap();
        let res = fit(&img, &tiny_cfg(4, 1)).unwrap();
        assert_eq!(
            res.training_mask.unwrap(),
            compute_mask(&img, &MaskConfig::default()).unwrap()
        );
    }

    #[test]
    fn rejects_empty_schedule() {
        let img = Image::filled(4, 4, 1, 0.5).unwrap();
        assert!(fit(&img, &tiny_cfg(0, 0)).is_err());
    }

    #[test]
    fn backbone_parsing() {
        assert_eq!("SIREN".parse::<Backbone>().unwrap(), Backbone::Siren);
        assert_eq!("finer".parse::<Backbone>().unwrap(), Backbone::Finer);
        assert!("wire".parse::<Backbone>().is_err());
    }
}
