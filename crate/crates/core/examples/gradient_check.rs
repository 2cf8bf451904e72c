// Central-difference check of the hand-written backward pass for SIREN and
// FINER networks, with and without mask weights.
//
// ```bash
// cargo run --release -p hf-inr --example gradient_check
// ```

use hf_inr::net::{init_mlp, loss_and_grad, Activation, CoordBatch};
use ndarray::Array2;
use rand::{Rng, SeedableRng};

fn main() -> hf_inr::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let coords = Array2::from_shape_simple_fn((12, 2), || rng.random_range(-1.0..1.0));
    let targets = Array2::from_shape_simple_fn((12, 3), || rng.random::<f64>());
    let weights = Array2::from_shape_simple_fn((12, 3), || rng.random_range(0.1..1.0));
    let batch = CoordBatch::with_weights(coords, targets, weights)?;
    let h = 1e-5;

    for act in [Activation::Sine { omega0: 30.0 }, Activation::Finer { omega0: 30.0 }] {
        let params = init_mlp(2, 6, 3, act, 5)?;
        for weighted in [false, true] {
            let (_, grads) = loss_and_grad(&params, &batch, weighted)?;
            let (mut diff, mut norm) = (0.0f64, 0.0f64);
            for (k, layer) in params.layers.iter().enumerate() {
                for (idx, &g) in grads.layers[k].weight.indexed_iter() {
                    let mut plus = params.clone();
                    plus.layers[k].weight[idx] = layer.weight[idx] + h;
                    let mut minus = params.clone();
                    minus.layers[k].weight[idx] = layer.weight[idx] - h;
                    let fd = (loss_and_grad(&plus, &batch, weighted)?.0
                        - loss_and_grad(&minus, &batch, weighted)?.0)
                        / (2.0 * h);
                    diff += (g - fd).powi(2);
                    norm += g * g;
                }
            }
            println!(
                "{act:?} weighted={weighted}: relative error {:.2e} over {} weights",
                (diff / norm).sqrt(),
                params.layers.iter().map(|l| l.weight.len()).sum::<usize>()
            );
        }
    }
    Ok(())
}
