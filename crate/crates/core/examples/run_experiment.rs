// Batch fitting from a JSON experiment spec, with a plain-MSE twin per image.
//
// ```bash
// cargo run --release -p hf-inr --example run_experiment -- spec.json
// ```
//
// Without arguments two synthetic images are fitted at a reduced scale.
// A spec file only needs the fields it changes, e.g.
// `{"inputs": ["images/"], "resize": [64, 64], "train": {"width": 64}}`.

use hf_inr::harness::{run_fit, ExperimentSpec};
use hf_inr::imageio::save_image;
use hf_inr::synth::{composite, composite_rgb};

fn main() -> hf_inr::Result<()> {
    let spec = match std::env::args().nth(1) {
        Some(path) => ExperimentSpec::from_json_file(path)?,
        None => {
            let dir = std::env::temp_dir().join("hf_inr_experiment");
            std::fs::create_dir_all(dir.join("images"))?;
            save_image(&composite(32)?, dir.join("images/gray.png"))?;
            save_image(&composite_rgb(32)?, dir.join("images/color.png"))?;
            let mut spec = ExperimentSpec::desk();
            spec.inputs = vec![dir.join("images")];
            spec.resize = None;
            spec.out_dir = dir.join("out");
            spec.baseline = true;
            spec.train.stage1_epochs = 40;
            spec.train.stage2_epochs = 60;
            spec
        }
    };
    let summary = run_fit(&spec)?;
    for (path, reason) in &summary.failures {
        eprintln!("failed: {}: {reason}", path.display());
    }
    for row in &summary.rows {
        println!("{}", row.record().join(","));
    }
    println!("report: {}", summary.report_path.display());
    Ok(())
}
