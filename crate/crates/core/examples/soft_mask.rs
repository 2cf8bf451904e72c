// Neighbor-aware soft mask of an image, written as a grayscale heatmap.
//
// ```bash
// cargo run --release -p hf-inr --example soft_mask -- photo.png 0.3 8
// ```
//
// Without arguments the 64x64 synthetic composite is used.

use hf_inr::imageio::{load_image, save_image};
use hf_inr::maskgen::{compute_mask, max_neighbor_diff, MaskConfig};
use hf_inr::synth::composite;

fn main() -> hf_inr::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let img = match args.first() {
        Some(path) => load_image(path)?,
        None => composite(64)?,
    };
    let tau = args.get(1).map_or(0.3, |s| s.parse().expect("tau"));
    let n = args.get(2).map_or(8, |s| s.parse().expect("n"));
    let cfg = MaskConfig::new(tau, 50.0, n)?;

    let diff = max_neighbor_diff(&img, n)?;
    let mask = compute_mask(&img, &cfg)?;
    let above = mask.data.iter().filter(|&&m| m >= 0.5).count();
    let peak = diff.data.iter().cloned().fold(0.0, f64::max);
    println!(
        "{}x{}x{}: max neighbor difference {peak:.3}, {above} of {} elements at or above 0.5",
        img.height(),
        img.width(),
        img.channels(),
        mask.data.len()
    );

    let out = std::env::temp_dir().join("hf_inr_mask.png");
    save_image(&mask.heatmap(), &out)?;
    println!("heatmap: {}", out.display());
    Ok(())
}
