// A small tau x n grid on one 32x32 image, written to `report.csv`.
//
// ```bash
// cargo run --release -p hf-inr --example ablation_grid
// ```

use hf_inr::harness::{run_ablation, ExperimentSpec};
use hf_inr::imageio::save_image;
use hf_inr::synth::composite;
use hf_inr::trainer::TrainConfig;

fn main() -> hf_inr::Result<()> {
    let dir = std::env::temp_dir().join("hf_inr_ablation");
    std::fs::create_dir_all(&dir)?;
    let input = dir.join("composite.png");
    save_image(&composite(32)?, &input)?;

    let spec = ExperimentSpec {
        inputs: vec![input],
        train: TrainConfig {
            stage1_epochs: 40,
            stage2_epochs: 60,
            eval_every: 0,
            ..TrainConfig::desk()
        },
        tau_list: vec![0.1, 0.3, 0.5],
        n_list: vec![4, 8],
        out_dir: dir.join("out"),
        baseline: true,
        ..ExperimentSpec::default()
    };
    let summary = run_ablation(&spec)?;
    for row in &summary.rows {
        println!("{}", row.record().join(","));
    }
    println!("report: {}", summary.report_path.display());
    Ok(())
}
