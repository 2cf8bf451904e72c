// Two-stage fit of a single image: mask-weighted epochs, then plain MSE.
// Writes the reconstruction and a checkpoint to the system temp directory.
//
// ```bash
// cargo run --release -p hf-inr --example fit_image -- photo.png
// ```
//
// Without arguments the 64x64 synthetic composite is fitted at desk scale.

use hf_inr::harness::prepare_image;
use hf_inr::imageio::save_image;
use hf_inr::net::save_checkpoint;
use hf_inr::synth::composite;
use hf_inr::trainer::{fit, TrainConfig};

fn main() -> hf_inr::Result<()> {
    let img = match std::env::args().nth(1) {
        Some(path) => prepare_image(path.as_ref(), Some([64, 64]), false)?,
        None => composite(64)?,
    };
    let cfg = TrainConfig {
        eval_every: 25,
        seed: 1,
        ..TrainConfig::desk()
    };
    let res = fit(&img, &cfg)?;
    for s in &res.history {
        println!("epoch {:>4} [{}] loss {:.3e} psnr {:.2} dB", s.epoch, s.stage, s.loss, s.psnr.value());
    }
    let m = &res.metrics;
    let show = |p: Option<hf_inr::Psnr>| p.map_or("na".to_string(), |p| format!("{:.2}", p.value()));
    println!(
        "final psnr {} ssim {} hf {} lf {}",
        m.psnr,
        m.ssim.map_or("na".to_string(), |s| format!("{s:.4}")),
        show(m.region.hf_psnr),
        show(m.region.lf_psnr)
    );

    let dir = std::env::temp_dir();
    save_image(&res.reconstruction, dir.join("hf_inr_recon.png"))?;
    save_checkpoint(&res.final_params, dir.join("hf_inr.ckpt"))?;
    println!("wrote {}", dir.join("hf_inr_recon.png").display());
    Ok(())
}
