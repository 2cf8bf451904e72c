use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hf_inr::harness::{self, EvalOptions, ExperimentSpec};
use hf_inr::trainer::Backbone;

#[derive(Parser)]
#[command(name = "hf-inr", version, about = "High-frequency-first INR fitting for images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit every input image and write reconstructions, masks, checkpoints and a report.
    Fit {
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a hyperparameter grid over every input.
    Ablate {
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
        /// Comma-separated thresholds, e.g. 0.1,0.2,0.3,0.4,0.5
        #[arg(long, value_delimiter = ',')]
        tau_list: Vec<f64>,
        /// Comma-separated neighborhood sizes, e.g. 4,8,12
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        /// Comma-separated stage-one epoch counts
        #[arg(long, value_delimiter = ',')]
        stage1_list: Vec<usize>,
        /// Total epochs held fixed across the stage-one grid
        #[arg(long)]
        total_epochs: Option<usize>,
    },
    /// Compare a reconstruction against ground truth.
    Eval {
        recon: PathBuf,
        truth: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Also report HF/LF region PSNR using a soft mask of the ground truth.
        #[arg(long)]
        regions: bool,
    },
    /// Write the soft-mask heatmap of an image.
    Mask {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Full,
    Desk,
}

#[derive(Args)]
struct Common {
    /// JSON experiment spec; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Starting point when no config file is given.
    #[arg(long, value_enum, default_value = "full")]
    profile: Profile,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    backbone: Option<Backbone>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    stage1: Option<usize>,
    #[arg(long)]
    stage2: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    /// Target size as HxW, e.g. 256x256
    #[arg(long, value_parser = parse_size)]
    resize: Option<[usize; 2]>,
    #[arg(long)]
    grayscale: bool,
    #[arg(long)]
    baseline: bool,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    region_threshold: Option<f64>,
    #[arg(long)]
    eval_every: Option<usize>,
    /// Print per-snapshot progress lines to stderr.
    #[arg(long)]
    progress: bool,
}

fn parse_size(s: &str) -> Result<[usize; 2], String> {
    let (h, w) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected HxW, got '{s}'"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("bad dimension '{v}'"))
    };
    Ok([parse(h)?, parse(w)?])
}

impl Common {
    fn spec(&self, inputs: Vec<PathBuf>) -> hf_inr::Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::from_json_file(path)?,
            None => match self.profile {
                Profile::Full => ExperimentSpec::full(),
                Profile::Desk => ExperimentSpec::desk(),
            },
        };
        if !inputs.is_empty() {
            spec.inputs = inputs;
        }
        let t = &mut spec.train;
        macro_rules! set {
            ($flag:expr => $field:expr) => {
                if let Some(v) = $flag {
                    $field = v;
                }
            };
        }
        set!(self.seed => t.seed);
        set!(self.backbone => t.backbone);
        set!(self.tau => t.mask.tau);
        set!(self.alpha => t.mask.alpha);
        set!(self.n => t.mask.n);
        set!(self.stage1 => t.stage1_epochs);
        set!(self.stage2 => t.stage2_epochs);
        set!(self.lr => t.learning_rate);
        set!(self.width => t.width);
        set!(self.layers => t.hidden_layers);
        set!(self.region_threshold => t.region_threshold);
        set!(self.eval_every => t.eval_every);
        t.progress |= self.progress;
        set!(self.out.clone() => spec.out_dir);
        set!(self.workers => spec.workers);
        if self.resize.is_some() {
            spec.resize = self.resize;
        }
        spec.grayscale |= self.grayscale;
        spec.baseline |= self.baseline;
        Ok(spec)
    }
}

fn print_summary(summary: &harness::RunSummary) {
    for (path, reason) in &summary.failures {
        eprintln!("failed: {}: {reason}", path.display());
    }
    for row in &summary.rows {
        println!("{}", row.record().join(","));
    }
    println!("report: {}", summary.report_path.display());
}

fn run(cli: Cli) -> hf_inr::Result<()> {
    match cli.command {
        Command::Fit { inputs, common } => {
            let spec = common.spec(inputs)?;
            print_summary(&harness::run_fit(&spec)?);
        }
        Command::Ablate {
            inputs,
            common,
            tau_list,
            n_list,
            stage1_list,
            total_epochs,
        } => {
            let mut spec = common.spec(inputs)?;
            if !tau_list.is_empty() {
                spec.tau_list = tau_list;
            }
            if !n_list.is_empty() {
                spec.n_list = n_list;
            }
            if !stage1_list.is_empty() {
                spec.stage1_epoch_list = stage1_list;
            }
            if total_epochs.is_some() {
                spec.total_epochs = total_epochs;
            }
            print_summary(&harness::run_ablation(&spec)?);
        }
        Command::Eval {
            recon,
            truth,
            common,
            regions,
        } => {
            let spec = common.spec(Vec::new())?;
            let opts = EvalOptions {
                resize: spec.resize.filter(|_| common.resize.is_some() || common.config.is_some()),
                grayscale: spec.grayscale,
                mask: regions.then_some(spec.train.mask),
                region_threshold: spec.train.region_threshold,
            };
            let outcome = harness::run_eval(&recon, &truth, &opts)?;
            println!("psnr={}", outcome.psnr);
            match outcome.ssim {
                Some(s) => println!("ssim={s}"),
                None => println!("ssim=na"),
            }
            if let Some(r) = &outcome.region {
                let show = |v: Option<hf_inr::Psnr>| v.map_or("na".to_string(), |p| p.to_string());
                println!("hf_psnr={} ({} elements)", show(r.hf_psnr), r.hf_pixel_count);
                println!("lf_psnr={} ({} elements)", show(r.lf_psnr), r.lf_pixel_count);
            }
            std::fs::create_dir_all(&spec.out_dir)?;
            let path = spec.out_dir.join(harness::REPORT_FILE);
            harness::write_report(&[outcome.row], &path)?;
            println!("report: {}", path.display());
        }
        Command::Mask { input, common } => {
            let spec = common.spec(Vec::new())?;
            let size = spec.resize.filter(|_| common.resize.is_some() || common.config.is_some());
            let (_, path) =
                harness::run_mask(&input, &spec.train.mask, size, spec.grayscale, &spec.out_dir)?;
            println!("mask: {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
