// PSNR, SSIM and HF/LF region PSNR of a reconstruction against ground truth.
//
// ```bash
// cargo run --release -p hf-inr --example evaluate -- recon.png truth.png
// ```
//
// Without arguments a noisy copy of the synthetic composite is scored.

use hf_inr::imageio::load_image;
use hf_inr::maskgen::{compute_mask, MaskConfig};
use hf_inr::metrics::{psnr, region_psnr, ssim, SsimConfig};
use hf_inr::synth::composite;
use hf_inr::Image;
use rand::{Rng, SeedableRng};

fn main() -> hf_inr::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (recon, truth) = match args.as_slice() {
        [r, t, ..] => (load_image(r)?, load_image(t)?),
        _ => {
            let truth = composite(64)?;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
            let noisy: Vec<f64> = truth.data().iter().map(|v| v + rng.random_range(-0.05..0.05)).collect();
            (Image::from_clamped(64, 64, 1, noisy.into_iter())?, truth)
        }
    };

    let p = psnr(&recon, &truth, 1.0)?;
    let s = ssim(&recon, &truth, &SsimConfig::default())?;
    let mask = compute_mask(&truth, &MaskConfig::default())?;
    let r = region_psnr(&recon, &truth, &mask, 0.5)?;
    println!("psnr {p} dB, ssim {s:.4}");
    println!(
        "hf region {} elements: {:?}\nlf region {} elements: {:?}",
        r.hf_pixel_count, r.hf_psnr, r.lf_pixel_count, r.lf_psnr
    );
    Ok(())
}
