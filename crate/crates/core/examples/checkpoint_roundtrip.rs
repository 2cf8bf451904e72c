// Saves a network to the binary checkpoint format, reloads it and confirms
// the reloaded network reproduces the same outputs.
//
// ```bash
// cargo run --release -p hf-inr --example checkpoint_roundtrip
// ```

use hf_inr::net::{forward, init_mlp, load_checkpoint, save_checkpoint, Activation};
use hf_inr::trainer::coord_grid;

fn main() -> hf_inr::Result<()> {
    let params = init_mlp(3, 32, 3, Activation::Finer { omega0: 30.0 }, 9)?;
    let path = std::env::temp_dir().join("hf_inr_roundtrip.ckpt");
    save_checkpoint(&params, &path)?;
    let loaded = load_checkpoint(&path)?;

    let grid = coord_grid(16, 16);
    let a = forward(&params, grid.view())?;
    let b = forward(&loaded, grid.view())?;
    println!(
        "{} parameters, dims {:?}, {} bytes, identical outputs: {}",
        loaded.num_params(),
        loaded.dims(),
        std::fs::metadata(&path)?.len(),
        a == b
    );
    assert_eq!(params, loaded);
    Ok(())
}
