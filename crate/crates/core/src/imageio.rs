//! Images as normalized `f64` grids, and the conversions to and from disk.
//!
//! Every [`Image`] stores intensities in `[0, 1]`, row-major and
//! channel-last, so element `(i, j, c)` lives at `(i * width + j) * channels + c`.

use std::path::Path;

use image::{DynamicImage, ExtendedColorType, ImageFormat, ImageReader};

use crate::error::{Error, Result};

/// Luma weights (ITU-R BT.601) used by [`to_grayscale`].
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    /// Builds an image, checking the shape and that every sample is in `[0, 1]`.
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {height}x{width}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::InvalidImage(format!(
                "data length {} does not match {height}x{width}x{channels}",
                data.len()
            )));
        }
        if let Some((k, v)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::InvalidImage(format!(
                "sample {k} = {v} lies outside [0, 1]"
            )));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    /// Builds an image from arbitrary reals, clamping each to `[0, 1]`.
    /// NaN maps to 0.
    pub fn from_clamped(
        height: usize,
        width: usize,
        channels: usize,
        data: impl IntoIterator<Item = f64>,
    ) -> Result<Self> {
        let data = data.into_iter().map(clamp_unit).collect();
        Self::new(height, width, channels, data)
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * channels);
        for i in 0..height {
            for j in 0..width {
                for c in 0..channels {
                    data.push(f(i, j, c));
                }
            }
        }
        Self::new(height, width, channels, data)
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(height, width, channels, vec![value; height * width * channels])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, c: usize) -> usize {
        (i * self.width + j) * self.channels + c
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, c: usize) -> f64 {
        self.data[self.index(i, j, c)]
    }

    /// Swaps rows and columns.
    pub fn transpose(&self) -> Image {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.width {
            for i in 0..self.height {
                for c in 0..self.channels {
                    data.push(self.get(i, j, c));
                }
            }
        }
        Image {
            height: self.width,
            width: self.height,
            channels: self.channels,
            data,
        }
    }
}

#[inline]
pub(crate) fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// Loads a PNG or binary PGM/PPM file. 8-bit samples are divided by 255,
/// 16-bit samples by 65535, and any alpha channel is dropped.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let decode_err = |source| Error::Decode {
        path: path.to_path_buf(),
        source,
    };
    let reader = ImageReader::open(path)?
        .with_guessed_format()
        .map_err(Error::Io)?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        Some(other) => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: {other:?}",
                path.display()
            )))
        }
        None => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: unrecognized file signature",
                path.display()
            )))
        }
    }
    let decoded = reader.decode().map_err(decode_err)?;
    from_dynamic(decoded)
}

fn from_dynamic(img: DynamicImage) -> Result<Image> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    const U8: f64 = 255.0;
    const U16: f64 = 65535.0;
    let (channels, data): (usize, Vec<f64>) = match img {
        DynamicImage::ImageLuma8(b) => (1, b.into_raw().iter().map(|&v| v as f64 / U8).collect()),
        DynamicImage::ImageLumaA8(b) => (
            1,
            b.into_raw().chunks_exact(2).map(|p| p[0] as f64 / U8).collect(),
        ),
        DynamicImage::ImageRgb8(b) => (3, b.into_raw().iter().map(|&v| v as f64 / U8).collect()),
        DynamicImage::ImageRgba8(b) => (
            3,
            b.into_raw()
                .chunks_exact(4)
                .flat_map(|p| p[..3].iter().map(|&v| v as f64 / U8).collect::<Vec<_>>())
                .collect(),
        ),
        DynamicImage::ImageLuma16(b) => {
            (1, b.into_raw().iter().map(|&v| v as f64 / U16).collect())
        }
        DynamicImage::ImageLumaA16(b) => (
            1,
            b.into_raw().chunks_exact(2).map(|p| p[0] as f64 / U16).collect(),
        ),
        DynamicImage::ImageRgb16(b) => (3, b.into_raw().iter().map(|&v| v as f64 / U16).collect()),
        DynamicImage::ImageRgba16(b) => (
            3,
            b.into_raw()
                .chunks_exact(4)
                .flat_map(|p| p[..3].iter().map(|&v| v as f64 / U16).collect::<Vec<_>>())
                .collect(),
        ),
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "color model {:?}",
                other.color()
            )))
        }
    };
    Image::new(h, w, channels, data)
}

/// Quantizes an image to 8 bits (`round(v * 255)` after clamping).
pub fn quantize_u8(img: &Image) -> Vec<u8> {
    img.data
        .iter()
        .map(|&v| (clamp_unit(v) * 255.0).round() as u8)
        .collect()
}

/// Writes an 8-bit grayscale or RGB PNG.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let color = match img.channels {
        1 => ExtendedColorType::L8,
        _ => ExtendedColorType::Rgb8,
    };
    let bytes = quantize_u8(img);
    let file = std::fs::File::create(path.as_ref())?;
    let mut writer = std::io::BufWriter::new(file);
    let encoder = image::codecs::png::PngEncoder::new(&mut writer);
    image::ImageEncoder::write_image(
        encoder,
        &bytes,
        img.width as u32,
        img.height as u32,
        color,
    )
    .map_err(Error::Encode)?;
    std::io::Write::flush(&mut writer)?;
    Ok(())
}

/// BT.601 luma. Single-channel input passes through unchanged.
pub fn to_grayscale(img: &Image) -> Image {
    if img.channels == 1 {
        return img.clone();
    }
    let data = img
        .data
        .chunks_exact(3)
        .map(|px| {
            let y = LUMA_WEIGHTS[0] * px[0] + LUMA_WEIGHTS[1] * px[1] + LUMA_WEIGHTS[2] * px[2];
            clamp_unit(y)
        })
        .collect();
    Image {
        height: img.height,
        width: img.width,
        channels: 1,
        data,
    }
}

/// Source sample position and blend weight for one output coordinate under
/// half-pixel-centered bilinear resampling.
#[inline]
fn source_span(dst: usize, src_len: usize, dst_len: usize) -> (usize, usize, f64) {
    let scale = src_len as f64 / dst_len as f64;
    let pos = ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (src_len - 1) as f64);
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(src_len - 1);
    (lo, hi, pos - lo as f64)
}

/// Bilinear resize with half-pixel-centered sample coordinates.
pub fn resize(img: &Image, new_h: usize, new_w: usize) -> Result<Image> {
    if new_h == 0 || new_w == 0 {
        return Err(Error::InvalidConfig(format!(
            "resize target must be positive, got {new_h}x{new_w}"
        )));
    }
    if (new_h, new_w) == (img.height, img.width) {
        return Ok(img.clone());
    }
    let cols: Vec<_> = (0..new_w)
        .map(|j| source_span(j, img.width, new_w))
        .collect();
    let mut data = Vec::with_capacity(new_h * new_w * img.channels);
    for i in 0..new_h {
        let (r0, r1, fy) = source_span(i, img.height, new_h);
        for &(c0, c1, fx) in &cols {
            for c in 0..img.channels {
                let top = img.get(r0, c0, c) * (1.0 - fx) + img.get(r0, c1, c) * fx;
                let bottom = img.get(r1, c0, c) * (1.0 - fx) + img.get(r1, c1, c) * fx;
                data.push(clamp_unit(top * (1.0 - fy) + bottom * fy));
            }
        }
    }
    Image::new(new_h, new_w, img.channels, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(h: usize, w: usize, c: usize, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::from_fn(h, w, c, |_, _, _| rng.random::<f64>()).unwrap()
    }

    #[test]
    fn rejects_out_of_range_and_bad_shapes() {
        assert!(Image::new(1, 1, 1, vec![1.5]).is_err());
        assert!(Image::new(1, 1, 1, vec![f64::NAN]).is_err());
        assert!(Image::new(1, 2, 1, vec![0.5]).is_err());
        assert!(Image::new(1, 1, 2, vec![0.5, 0.5]).is_err());
        assert!(Image::new(0, 1, 1, vec![]).is_err());
    }

    #[test]
    fn load_extreme_gray_pixels() {
        let dir = tempfile::tempdir().unwrap();
        for (byte, expected) in [(255u8, 1.0), (0u8, 0.0)] {
            let path = dir.path().join(format!("p{byte}.png"));
            image::save_buffer(&path, &[byte], 1, 1, ExtendedColorType::L8).unwrap();
            let img = load_image(&path).unwrap();
            assert_eq!(img.shape(), (1, 1, 1));
            assert_eq!(img.data(), &[expected]);
        }
    }

    #[test]
    fn load_rgb_png_matches_reference_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        let bytes: Vec<u8> = (0..12).map(|k| (k * 21 + 3) as u8).collect();
        image::save_buffer(&path, &bytes, 2, 2, ExtendedColorType::Rgb8).unwrap();
        // Reference decoder output.
        let reference = image::open(&path).unwrap().to_rgb8().into_raw();
        let img = load_image(&path).unwrap();
        assert_eq!(img.shape(), (2, 2, 3));
        for (k, (&v, &b)) in img.data().iter().zip(&reference).enumerate() {
            assert_eq!(v, b as f64 / 255.0, "element {k}");
        }
    }

    #[test]
    fn load_drops_alpha_and_handles_16_bit() {
        let dir = tempfile::tempdir().unwrap();
        let rgba = dir.path().join("rgba.png");
        image::save_buffer(&rgba, &[10, 20, 30, 40], 1, 1, ExtendedColorType::Rgba8).unwrap();
        let img = load_image(&rgba).unwrap();
        assert_eq!(img.shape(), (1, 1, 3));
        assert_eq!(img.data(), &[10.0 / 255.0, 20.0 / 255.0, 30.0 / 255.0]);

        let deep = dir.path().join("deep.png");
        let buf = image::ImageBuffer::<image::Luma<u16>, _>::from_raw(2, 1, vec![65535u16, 1000])
            .unwrap();
        buf.save(&deep).unwrap();
        let img = load_image(&deep).unwrap();
        assert_eq!(img.data(), &[1.0, 1000.0 / 65535.0]);
    }

    #[test]
    fn load_binary_pgm_and_ppm() {
        let dir = tempfile::tempdir().unwrap();
        let pgm = dir.path().join("a.pgm");
        let mut bytes = b"P5\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 51]);
        std::fs::write(&pgm, bytes).unwrap();
        let img = load_image(&pgm).unwrap();
        assert_eq!(img.shape(), (1, 2, 1));
        assert_eq!(img.data(), &[0.0, 0.2]);

        let ppm = dir.path().join("a.ppm");
        let mut bytes = b"P6\n1 1\n255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 102]);
        std::fs::write(&ppm, bytes).unwrap();
        let img = load_image(&ppm).unwrap();
        assert_eq!(img.data(), &[1.0, 0.0, 0.4]);
    }

    #[test]
    fn load_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_image(dir.path().join("missing.png")).is_err());
        let junk = dir.path().join("junk.png");
        std::fs::write(&junk, b"not an image at all").unwrap();
        assert!(load_image(&junk).is_err());
    }

    #[test]
    fn save_all_ones_gives_255() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ones.png");
        save_image(&Image::filled(3, 4, 3, 1.0).unwrap(), &path).unwrap();
        let raw = image::open(&path).unwrap().to_rgb8().into_raw();
        assert!(raw.iter().all(|&b| b == 255));
    }

    #[test]
    fn round_trip_on_quantization_grid_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.png");
        let img = Image::from_fn(5, 7, 3, |i, j, c| ((i * 31 + j * 7 + c * 50) % 256) as f64 / 255.0)
            .unwrap();
        save_image(&img, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }

    #[test]
    fn quantization_error_bound_is_half_step() {
        // Dense sweep over [0,1]: |round(v*255)/255 - v| <= 1/510.
        let steps = 255 * 1000;
        for k in 0..=steps {
            let v = k as f64 / steps as f64;
            let q = (v * 255.0).round() / 255.0;
            assert!((q - v).abs() <= 1.0 / 510.0 + 1e-15, "v = {v}");
        }
    }

    #[test]
    fn random_round_trip_within_bound() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rand.png");
        let img = random_image(9, 11, 3, 7);
        save_image(&img, &path).unwrap();
        let back = load_image(&path).unwrap();
        let worst = img
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1.0 / 510.0 + 1e-15, "worst error {worst}");
    }

    #[test]
    fn save_to_unwritable_path_fails() {
        let img = Image::filled(1, 1, 1, 0.5).unwrap();
        assert!(save_image(&img, "/nonexistent-dir/x/y.png").is_err());
    }

    #[test]
    fn grayscale_anchors() {
        let white = Image::filled(1, 1, 3, 1.0).unwrap();
        assert!((to_grayscale(&white).data()[0] - 1.0).abs() < 1e-15);
        let red = Image::new(1, 1, 3, vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(to_grayscale(&red).data(), &[0.299]);
        let gray = Image::filled(2, 2, 1, 0.3).unwrap();
        assert_eq!(to_grayscale(&gray), gray);
    }

    #[test]
    fn grayscale_matches_scalar_dot_products() {
        let img = random_image(6, 5, 3, 11);
        let gray = to_grayscale(&img);
        assert_eq!(gray.shape(), (6, 5, 1));
        for i in 0..6 {
            for j in 0..5 {
                let mut expected = 0.0;
                for c in 0..3 {
                    expected += LUMA_WEIGHTS[c] * img.get(i, j, c);
                }
                assert!((gray.get(i, j, 0) - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn resize_identity_and_symmetric_average() {
        let img = random_image(4, 6, 3, 3);
        assert_eq!(resize(&img, 4, 6).unwrap(), img);

        let two = Image::new(2, 2, 1, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(resize(&two, 1, 1).unwrap().data(), &[0.5]);
        assert!(resize(&two, 0, 1).is_err());
    }

    /// Direct per-output-pixel bilinear evaluation.
    fn bilinear_oracle(img: &Image, new_h: usize, new_w: usize) -> Vec<f64> {
        let (h, w, ch) = img.shape();
        let mut out = Vec::new();
        for i in 0..new_h {
            let sy = ((i as f64 + 0.5) * h as f64 / new_h as f64 - 0.5).max(0.0).min((h - 1) as f64);
            for j in 0..new_w {
                let sx =
                    ((j as f64 + 0.5) * w as f64 / new_w as f64 - 0.5).max(0.0).min((w - 1) as f64);
                for c in 0..ch {
                    let mut acc = 0.0;
                    for yi in 0..h {
                        for xi in 0..w {
                            let wy = (1.0 - (sy - yi as f64).abs()).max(0.0);
                            let wx = (1.0 - (sx - xi as f64).abs()).max(0.0);
                            acc += wy * wx * img.get(yi, xi, c);
                        }
                    }
                    out.push(acc);
                }
            }
        }
        out
    }

    #[test]
    fn ramp_downsample_matches_oracle() {
        let ramp = Image::from_fn(4, 4, 1, |i, j, _| (i * 4 + j) as f64 / 15.0).unwrap();
        let small = resize(&ramp, 2, 2).unwrap();
        for (a, b) in small.data().iter().zip(bilinear_oracle(&ramp, 2, 2)) {
            assert!((a - b).abs() < 1e-12);
        }
        let img = random_image(7, 5, 3, 9);
        for (nh, nw) in [(3, 11), (14, 2), (1, 1), (9, 9)] {
            let out = resize(&img, nh, nw).unwrap();
            for (a, b) in out.data().iter().zip(bilinear_oracle(&img, nh, nw)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transpose_twice_is_identity() {
        let img = random_image(3, 5, 3, 1);
        let t = img.transpose();
        assert_eq!(t.shape(), (5, 3, 3));
        assert_eq!(t.get(4, 2, 1), img.get(2, 4, 1));
        assert_eq!(t.transpose(), img);
    }
}
