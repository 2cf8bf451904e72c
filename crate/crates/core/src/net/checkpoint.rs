//! Flat binary parameter checkpoints.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic        8 bytes  "HFINRCK1"
//! layers       u32      L
//! dims         u32 x (L + 1)   input width, then each layer's output width
//! activation   u32      0 = sine, 1 = finer
//! omega0       f64
//! per layer    f64 x (out * in) weights, row-major; then f64 x out biases
//! ```

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{Activation, Layer, MlpParams};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"HFINRCK1";

pub fn write_checkpoint<W: Write>(params: &MlpParams, mut w: W) -> Result<()> {
    params.validate()?;
    w.write_all(MAGIC)?;
    w.write_all(&(params.layers.len() as u32).to_le_bytes())?;
    for d in params.dims() {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    w.write_all(&params.activation.id().to_le_bytes())?;
    w.write_all(&params.activation.omega0().to_le_bytes())?;
    for layer in &params.layers {
        for v in layer.weight.iter().chain(layer.bias.iter()) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Checkpoint(format!("truncated header: {e}")))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Checkpoint(format!("truncated parameters: {e}")))?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<MlpParams> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|e| Error::Checkpoint(format!("truncated magic: {e}")))?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let layer_count = read_u32(&mut r)? as usize;
    if layer_count == 0 || layer_count > 1024 {
        return Err(Error::Checkpoint(format!("implausible layer count {layer_count}")));
    }
    let dims = (0..=layer_count)
        .map(|_| read_u32(&mut r).map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    if dims.iter().any(|&d| d == 0 || d > 1 << 16) {
        return Err(Error::Checkpoint(format!("implausible dims {dims:?}")));
    }
    let id = read_u32(&mut r)?;
    let omega0 = read_f64s(&mut r, 1)?[0];
    let activation = Activation::from_id(id, omega0)
        .ok_or_else(|| Error::Checkpoint(format!("unknown activation id {id}")))?;

    let mut layers = Vec::with_capacity(layer_count);
    for pair in dims.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let weight = Array2::from_shape_vec((fan_out, fan_in), read_f64s(&mut r, fan_in * fan_out)?)
            .expect("length matches shape");
        let bias = Array1::from_vec(read_f64s(&mut r, fan_out)?);
        layers.push(Layer { weight, bias });
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Checkpoint("trailing bytes after parameters".into()));
    }
    let params = MlpParams { layers, activation };
    params
        .validate()
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
    Ok(params)
}

pub fn save_checkpoint(params: &MlpParams, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_checkpoint(params, std::io::BufWriter::new(file))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<MlpParams> {
    let file = std::fs::File::open(path)?;
    read_checkpoint(std::io::BufReader::new(file))
}
