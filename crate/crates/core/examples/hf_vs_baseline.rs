// Two-stage training against plain MSE training on a synthetic composite
// (checkerboard, ramp, disk), averaged over three seeds.
//
// Defaults to the desk setting: 64x64 image, width-64 SIREN, 250 epochs with
// 100 mask-weighted epochs first. Optional positional arguments override
// width, total epochs and stage-one epochs.
//
// ```bash
// cargo run --release -p hf-inr --example hf_vs_baseline
// cargo run --release -p hf-inr --example hf_vs_baseline -- 256 500 200
// ```

use hf_inr::synth::composite;
use hf_inr::trainer::{fit, TrainConfig};

fn arg(i: usize, default: usize) -> usize {
    std::env::args()
        .nth(i)
        .map(|s| s.parse().expect("expected an integer argument"))
        .unwrap_or(default)
}

fn main() -> hf_inr::Result<()> {
    let (width, total, stage1) = (arg(1, 64), arg(2, 250), arg(3, 100));
    let img = composite(64)?;
    let seeds = [1u64, 2, 3];
    let (mut hf, mut base) = (0.0, 0.0);
    for &seed in &seeds {
        for s1 in [stage1, 0] {
            let cfg = TrainConfig {
                stage1_epochs: s1,
                stage2_epochs: total - s1,
                width,
                seed,
                ..TrainConfig::desk()
            };
            let r = fit(&img, &cfg)?;
            let label = if s1 > 0 { "hf-first" } else { "baseline" };
            let hf_region = r.metrics.region.hf_psnr.map_or(f64::NAN, |p| p.value());
            println!(
                "seed {seed} {label:>8}: psnr {:.3} dB  ssim {:.4}  hf-region {:.3} dB",
                r.metrics.psnr.value(),
                r.metrics.ssim.unwrap_or(f64::NAN),
                hf_region
            );
            if s1 > 0 {
                hf += r.metrics.psnr.value();
            } else {
                base += r.metrics.psnr.value();
            }
        }
    }
    let n = seeds.len() as f64;
    println!(
        "mean hf-first {:.3} dB, baseline {:.3} dB, gain {:+.3} dB",
        hf / n,
        base / n,
        (hf - base) / n
    );
    Ok(())
}
