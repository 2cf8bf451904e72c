//! Experiment drivers: batch fitting, hyperparameter grids, evaluation of
//! saved reconstructions, and mask export.
//!
//! Every driver writes `report.csv` into the output directory with the
//! columns in [`report::HEADER`]. Rows are emitted in input order (then grid
//! order) no matter how many workers run in parallel.

pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageio::{load_image, resize, save_image, to_grayscale, Image};
use crate::maskgen::{compute_mask, MaskConfig, SoftMask};
use crate::metrics::{psnr, region_psnr, ssim, Psnr, RegionReport, SsimConfig};
use crate::net::save_checkpoint;
use crate::trainer::{fit, TrainConfig, TrainResult};

pub use report::{mean_rows, write_report, ReportRow, HEADER, MEAN_ID};

pub const REPORT_FILE: &str = "report.csv";

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "pgm", "ppm", "pnm"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    /// Image files, directories (scanned for PNG/PGM/PPM), or glob patterns.
    pub inputs: Vec<PathBuf>,
    /// Optional `[height, width]` every input is resized to.
    pub resize: Option<[usize; 2]>,
    pub grayscale: bool,
    pub train: TrainConfig,
    pub tau_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub stage1_epoch_list: Vec<usize>,
    /// Total epochs held fixed across the stage-one grid; defaults to
    /// `train.stage1_epochs + train.stage2_epochs`.
    pub total_epochs: Option<usize>,
    pub out_dir: PathBuf,
    /// Also run a `stage1_epochs = 0` twin with the same seed.
    pub baseline: bool,
    /// Simultaneous fits; 0 uses all cores.
    pub workers: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            resize: None,
            grayscale: false,
            train: TrainConfig::default(),
            tau_list: Vec::new(),
            n_list: Vec::new(),
            stage1_epoch_list: Vec::new(),
            total_epochs: None,
            out_dir: PathBuf::from("out"),
            baseline: false,
            workers: 0,
        }
    }
}

impl ExperimentSpec {
    /// Full-size setup: 256x256 inputs, width 256, 200 + 300 epochs.
    pub fn full() -> Self {
        Self {
            resize: Some([256, 256]),
            ..Self::default()
        }
    }

    /// Quick CPU setup: 64x64 inputs, width 64, 100 + 150 epochs.
    pub fn desk() -> Self {
        Self {
            resize: Some([64, 64]),
            train: TrainConfig::desk(),
            ..Self::default()
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    fn run_in_pool<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        if self.workers == 0 {
            return Ok(job());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        Ok(pool.install(job))
    }
}

#[derive(Debug)]
pub struct RunSummary {
    /// Per-run rows followed by any `MEAN` rows.
    pub rows: Vec<ReportRow>,
    pub report_path: PathBuf,
    /// Inputs that could not be processed, with the reason.
    pub failures: Vec<(PathBuf, String)>,
}

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Expands files, directories and glob patterns into a sorted-per-entry list.
pub fn resolve_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in inputs {
        let text = entry.to_string_lossy();
        if entry.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(entry)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && has_image_extension(p))
                .collect();
            files.sort();
            out.extend(files);
        } else if text.contains(['*', '?', '[']) {
            let pattern = glob::glob(&text)
                .map_err(|e| Error::InvalidConfig(format!("bad glob '{text}': {e}")))?;
            let mut files: Vec<PathBuf> = pattern.filter_map(|p| p.ok()).collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(entry.clone());
        }
    }
    if out.is_empty() {
        return Err(Error::NoInputs(format!("nothing matched {inputs:?}")));
    }
    Ok(out)
}

/// Loads an image and applies the optional resize and grayscale conversion.
pub fn prepare_image(path: &Path, size: Option<[usize; 2]>, grayscale: bool) -> Result<Image> {
    let mut img = load_image(path)?;
    if grayscale {
        img = to_grayscale(&img);
    }
    if let Some([h, w]) = size {
        img = resize(&img, h, w)?;
    }
    Ok(img)
}

/// File stem used to name artifacts and report rows.
pub fn image_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".to_string())
}

/// Report row for one finished fit.
pub fn row_from_result(id: &str, cfg: &TrainConfig, res: &TrainResult, seconds: f64) -> ReportRow {
    ReportRow {
        image_id: id.to_string(),
        backbone: Some(cfg.backbone.to_string()),
        tau: Some(cfg.mask.tau),
        alpha: Some(cfg.mask.alpha),
        n: Some(cfg.mask.n),
        stage1_epochs: Some(cfg.stage1_epochs),
        stage2_epochs: Some(cfg.stage2_epochs),
        seed: Some(cfg.seed),
        psnr: res.metrics.psnr,
        ssim: res.metrics.ssim,
        hf_psnr: res.metrics.region.hf_psnr,
        lf_psnr: res.metrics.region.lf_psnr,
        wall_seconds: seconds,
    }
}

fn timed_fit(img: &Image, cfg: &TrainConfig) -> Result<(TrainResult, f64)> {
    let start = Instant::now();
    let res = fit(img, cfg)?;
    Ok((res, start.elapsed().as_secs_f64()))
}

fn baseline_twin(cfg: &TrainConfig) -> TrainConfig {
    TrainConfig {
        stage1_epochs: 0,
        ..cfg.clone()
    }
}

fn fit_one_image(spec: &ExperimentSpec, index: usize, path: &Path) -> Result<Vec<ReportRow>> {
    let img = prepare_image(path, spec.resize, spec.grayscale)?;
    let id = image_id(path);
    let out = &spec.out_dir;
    let cfg = TrainConfig {
        seed: spec.train.seed + index as u64,
        ..spec.train.clone()
    };

    let mask = compute_mask(&img, &cfg.mask)?;
    save_image(&mask.heatmap(), out.join(format!("{id}_mask.png")))?;

    let (res, secs) = timed_fit(&img, &cfg)?;
    save_image(&res.reconstruction, out.join(format!("{id}_recon.png")))?;
    save_checkpoint(&res.final_params, out.join(format!("{id}.ckpt")))?;
    let mut rows = vec![row_from_result(&id, &cfg, &res, secs)];

    if spec.baseline {
        let twin = baseline_twin(&cfg);
        let (res, secs) = timed_fit(&img, &twin)?;
        save_image(
            &res.reconstruction,
            out.join(format!("{id}_baseline_recon.png")),
        )?;
        save_checkpoint(&res.final_params, out.join(format!("{id}_baseline.ckpt")))?;
        rows.push(row_from_result(&id, &twin, &res, secs));
    }
    Ok(rows)
}

/// Fits every input with `spec.train`, writing reconstructions, mask
/// heatmaps, checkpoints and `report.csv`. Per-image seeds are
/// `train.seed + input index`. A `MEAN` row per configuration is appended
/// when more than one image succeeds.
pub fn run_fit(spec: &ExperimentSpec) -> Result<RunSummary> {
    spec.train.validate()?;
    let inputs = resolve_inputs(&spec.inputs)?;
    std::fs::create_dir_all(&spec.out_dir)?;

    let results: Vec<Result<Vec<ReportRow>>> = spec.run_in_pool(|| {
        inputs
            .par_iter()
            .enumerate()
            .map(|(k, path)| fit_one_image(spec, k, path))
            .collect()
    })?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut succeeded = 0;
    for (path, result) in inputs.iter().zip(results) {
        match result {
            Ok(r) => {
                succeeded += 1;
                rows.extend(r);
            }
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                failures.push((path.clone(), e.to_string()));
            }
        }
    }
    if succeeded == 0 {
        return Err(Error::NoInputs(format!(
            "all {} inputs failed",
            failures.len()
        )));
    }
    if succeeded > 1 {
        let means = mean_rows(&rows);
        rows.extend(means);
    }
    let report_path = spec.out_dir.join(REPORT_FILE);
    write_report(&rows, &report_path)?;
    Ok(RunSummary {
        rows,
        report_path,
        failures,
    })
}

/// Training configurations of an ablation grid, in `tau`-major, then `n`,
/// then stage-one order. Empty lists fall back to the base configuration's
/// value. Total epochs stay fixed: `stage2 = total - stage1`.
pub fn ablation_cells(spec: &ExperimentSpec) -> Result<Vec<TrainConfig>> {
    let base = &spec.train;
    let taus = if spec.tau_list.is_empty() {
        vec![base.mask.tau]
    } else {
        spec.tau_list.clone()
    };
    let ns = if spec.n_list.is_empty() {
        vec![base.mask.n]
    } else {
        spec.n_list.clone()
    };
    let stage1s = if spec.stage1_epoch_list.is_empty() {
        vec![base.stage1_epochs]
    } else {
        spec.stage1_epoch_list.clone()
    };
    let total = spec.total_epochs.unwrap_or(base.total_epochs());

    let mut cells = Vec::with_capacity(taus.len() * ns.len() * stage1s.len());
    for &tau in &taus {
        for &n in &ns {
            for &stage1 in &stage1s {
                if stage1 > total {
                    return Err(Error::InvalidConfig(format!(
                        "stage-one epochs {stage1} exceed the total {total}"
                    )));
                }
                let cfg = TrainConfig {
                    mask: MaskConfig { tau, n, ..base.mask },
                    stage1_epochs: stage1,
                    stage2_epochs: total - stage1,
                    ..base.clone()
                };
                cfg.validate()?;
                cells.push(cfg);
            }
        }
    }
    Ok(cells)
}

/// Runs every grid cell on every input and writes `report.csv`: one row
/// per (image, cell), plus a baseline twin per cell when requested,
/// followed by one `MEAN` row per cell.
pub fn run_ablation(spec: &ExperimentSpec) -> Result<RunSummary> {
    let cells = ablation_cells(spec)?;
    let inputs = resolve_inputs(&spec.inputs)?;
    std::fs::create_dir_all(&spec.out_dir)?;

    let mut failures = Vec::new();
    let mut images = Vec::new();
    for (k, path) in inputs.iter().enumerate() {
        match prepare_image(path, spec.resize, spec.grayscale) {
            Ok(img) => images.push((k, image_id(path), img)),
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                failures.push((path.clone(), e.to_string()));
            }
        }
    }
    if images.is_empty() {
        return Err(Error::NoInputs(format!(
            "all {} inputs failed",
            failures.len()
        )));
    }

    let jobs: Vec<(usize, usize)> = (0..images.len())
        .flat_map(|i| (0..cells.len()).map(move |c| (i, c)))
        .collect();
    let results: Vec<Result<Vec<ReportRow>>> = spec.run_in_pool(|| {
        jobs.par_iter()
            .map(|&(i, c)| {
                let (index, id, img) = &images[i];
                let cfg = TrainConfig {
                    seed: cells[c].seed + *index as u64,
                    ..cells[c].clone()
                };
                let (res, secs) = timed_fit(img, &cfg)?;
                let mut rows = vec![row_from_result(id, &cfg, &res, secs)];
                if spec.baseline {
                    let twin = baseline_twin(&cfg);
                    let (res, secs) = timed_fit(img, &twin)?;
                    rows.push(row_from_result(id, &twin, &res, secs));
                }
                Ok(rows)
            })
            .collect()
    })?;

    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    let means = mean_rows(&rows);
    rows.extend(means);
    let report_path = spec.out_dir.join(REPORT_FILE);
    write_report(&rows, &report_path)?;
    Ok(RunSummary {
        rows,
        report_path,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub resize: Option<[usize; 2]>,
    pub grayscale: bool,
    /// When set, a soft mask of the ground truth splits the region report.
    pub mask: Option<MaskConfig>,
    pub region_threshold: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            resize: None,
            grayscale: false,
            mask: None,
            region_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub row: ReportRow,
    pub psnr: Psnr,
    pub ssim: Option<f64>,
    pub region: Option<RegionReport>,
}

/// Compares a reconstruction against ground truth.
pub fn run_eval(recon_path: &Path, truth_path: &Path, opts: &EvalOptions) -> Result<EvalOutcome> {
    let recon = prepare_image(recon_path, opts.resize, opts.grayscale)?;
    let truth = prepare_image(truth_path, opts.resize, opts.grayscale)?;
    evaluate_images(&image_id(recon_path), &recon, &truth, opts)
}

pub fn evaluate_images(
    id: &str,
    recon: &Image,
    truth: &Image,
    opts: &EvalOptions,
) -> Result<EvalOutcome> {
    let start = Instant::now();
    let p = psnr(recon, truth, 1.0)?;
    let s = match ssim(recon, truth, &SsimConfig::default()) {
        Ok(v) => Some(v),
        Err(Error::ImageTooSmall { .. }) => None,
        Err(e) => return Err(e),
    };
    let region = match &opts.mask {
        Some(cfg) => {
            let mask = compute_mask(truth, cfg)?;
            Some(region_psnr(recon, truth, &mask, opts.region_threshold)?)
        }
        None => None,
    };
    let row = ReportRow {
        image_id: id.to_string(),
        backbone: None,
        tau: opts.mask.map(|m| m.tau),
        alpha: opts.mask.map(|m| m.alpha),
        n: opts.mask.map(|m| m.n),
        stage1_epochs: None,
        stage2_epochs: None,
        seed: None,
        psnr: p,
        ssim: s,
        hf_psnr: region.as_ref().and_then(|r| r.hf_psnr),
        lf_psnr: region.as_ref().and_then(|r| r.lf_psnr),
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(EvalOutcome {
        row,
        psnr: p,
        ssim: s,
        region,
    })
}

/// Computes the soft mask of one image and writes its heatmap PNG to
/// `out_dir/<image>_mask.png`.
pub fn run_mask(
    input: &Path,
    cfg: &MaskConfig,
    size: Option<[usize; 2]>,
    grayscale: bool,
    out_dir: &Path,
) -> Result<(SoftMask, PathBuf)> {
    let img = prepare_image(input, size, grayscale)?;
    let mask = compute_mask(&img, cfg)?;
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{}_mask.png", image_id(input)));
    save_image(&mask.heatmap(), &path)?;
    Ok((mask, path))
}
