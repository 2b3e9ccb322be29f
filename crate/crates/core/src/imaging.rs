//! 8-bit raster images: binary PPM/PGM I/O, conversion to and from tensors,
//! and the PSNR / SSIM quality metrics.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

/// Interleaved, row-major 8-bit image with 1 (gray) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub samples: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::domain(format!(
                "unsupported channel count {channels}"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::domain("image dimensions must be positive"));
        }
        if samples.len() != width * height * channels {
            return Err(Error::domain(format!(
                "{} samples for a {width}x{height}x{channels} image",
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            samples,
        })
    }

    #[inline]
    pub fn sample(&self, row: usize, col: usize, channel: usize) -> u8 {
        self.samples[(row * self.width + col) * self.channels + channel]
    }

    fn same_shape(&self, other: &ImageBuffer) -> Result<()> {
        if (self.width, self.height, self.channels) != (other.width, other.height, other.channels) {
            return Err(Error::domain(format!(
                "image shapes differ: {}x{}x{} vs {}x{}x{}",
                self.width, self.height, self.channels, other.width, other.height, other.channels
            )));
        }
        Ok(())
    }
}

struct HeaderScanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderScanner<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::format(start, format!("{what} out of range")))
    }
}

/// Parses a binary PGM (`P5`) or PPM (`P6`) image with maxval 255.
pub fn load_ppm(bytes: &[u8]) -> Result<ImageBuffer> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(Error::format(0, "expected P5 or P6 magic")),
    };
    let mut s = HeaderScanner { bytes, pos: 2 };
    let width = s.number("width")?;
    let height = s.number("height")?;
    let maxval_at = s.pos;
    let maxval = s.number("maxval")?;
    if maxval != 255 {
        return Err(Error::format(
            maxval_at,
            format!("maxval {maxval} unsupported, only 255"),
        ));
    }
    match bytes.get(s.pos) {
        Some(b) if b.is_ascii_whitespace() => s.pos += 1,
        _ => return Err(Error::format(s.pos, "expected whitespace after maxval")),
    }
    if width == 0 || height == 0 {
        return Err(Error::format(2, "image dimensions must be positive"));
    }
    let len = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(channels))
        .ok_or_else(|| Error::format(2, "image dimensions overflow"))?;
    let payload = &bytes[s.pos..];
    if payload.len() < len {
        return Err(Error::format(
            bytes.len(),
            format!("short payload: need {len} samples, found {}", payload.len()),
        ));
    }
    ImageBuffer::new(width, height, channels, payload[..len].to_vec())
}

/// Writes `P5` or `P6` with the canonical header `"P6\n<w> <h>\n255\n"`.
pub fn save_ppm(img: &ImageBuffer) -> Vec<u8> {
    let magic = if img.channels == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.samples);
    out
}

/// `A(i, j, k)` = sample at row `i`, column `j`, channel `k`.
pub fn image_to_tensor(img: &ImageBuffer) -> Tensor3 {
    Tensor3::from_fn(img.height, img.width, img.channels, |i, j, k| {
        Complex64::new(f64::from(img.sample(i, j, k)), 0.0)
    })
}

/// Imaginary parts above this magnitude are flagged when rasterizing.
pub const IMAG_WARN_THRESHOLD: f64 = 1e-6;

/// Output of [`tensor_to_image`].
#[derive(Debug, Clone, PartialEq)]
pub struct Rasterized {
    pub image: ImageBuffer,
    /// Largest imaginary magnitude that was discarded.
    pub max_imag: f64,
    /// Set when `max_imag` exceeds [`IMAG_WARN_THRESHOLD`].
    pub imag_warning: bool,
}

/// Clamps real parts to `[0, 255]` and rounds half away from zero.
pub fn tensor_to_image(a: &Tensor3) -> Result<Rasterized> {
    let (h, w, c) = a.dims();
    if c != 1 && c != 3 {
        return Err(Error::domain(format!(
            "cannot rasterize a tensor with {c} slices"
        )));
    }
    let mut samples = vec![0u8; h * w * c];
    let mut max_imag = 0.0f64;
    for k in 0..c {
        for j in 0..w {
            for i in 0..h {
                let z = a.get(i, j, k);
                max_imag = max_imag.max(z.im.abs());
                samples[(i * w + j) * c + k] = z.re.clamp(0.0, 255.0).round() as u8;
            }
        }
    }
    Ok(Rasterized {
        image: ImageBuffer::new(w, h, c, samples)?,
        max_imag,
        imag_warning: max_imag > IMAG_WARN_THRESHOLD,
    })
}

fn squared_error(a: &ImageBuffer, b: &ImageBuffer) -> f64 {
    a.samples
        .iter()
        .zip(&b.samples)
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum()
}

pub fn mse(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64> {
    reference.same_shape(test)?;
    Ok(squared_error(reference, test) / reference.samples.len() as f64)
}

/// `10·log10(255² / MSE)`; `+∞` for identical images.
pub fn psnr(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64> {
    let mse = mse(reference, test)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

/// `‖ref − test‖_F / ‖ref‖_F` over all samples.
pub fn relative_error(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64> {
    reference.same_shape(test)?;
    let num = squared_error(reference, test).sqrt();
    let den = reference
        .samples
        .iter()
        .map(|&x| f64::from(x) * f64::from(x))
        .sum::<f64>()
        .sqrt();
    Ok(if num == 0.0 { 0.0 } else { num / den })
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
pub const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

/// 1-D Gaussian taps, normalized to unit sum. The 2-D window is their outer
/// product.
pub fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let mut g = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, v) in g.iter_mut().enumerate() {
        let d = i as f64 - half;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = g.iter().sum();
    g.iter_mut().for_each(|v| *v /= sum);
    g
}

/// Valid-region separable filtering of an `h × w` plane.
fn filter_valid(plane: &[f64], h: usize, w: usize, taps: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let mut horiz = vec![0.0; h * ow];
    for r in 0..h {
        let row = &plane[r * w..(r + 1) * w];
        for c in 0..ow {
            horiz[r * ow + c] = taps.iter().zip(&row[c..]).map(|(t, x)| t * x).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = taps
                .iter()
                .enumerate()
                .map(|(t, g)| g * horiz[(r + t) * ow + c])
                .sum();
        }
    }
    out
}

/// Local SSIM from window statistics.
#[inline]
pub(crate) fn ssim_formula(mx: f64, my: f64, sxx: f64, syy: f64, sxy: f64) -> f64 {
    let num = (2.0 * (mx * my) + SSIM_C1) * (2.0 * sxy + SSIM_C2);
    let den = (mx * mx + my * my + SSIM_C1) * (sxx + syy + SSIM_C2);
    num / den
}

/// Mean SSIM with an 11×11 Gaussian window (σ = 1.5) over the valid region,
/// averaged over channels.
pub fn ssim(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64> {
    reference.same_shape(test)?;
    let (w, h, ch) = (reference.width, reference.height, reference.channels);
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::domain(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {w}x{h}"
        )));
    }
    let taps = gaussian_taps();
    let mut total = 0.0;
    let mut count = 0usize;
    for k in 0..ch {
        let plane = |img: &ImageBuffer| -> Vec<f64> {
            (0..h * w)
                .map(|p| f64::from(img.samples[p * ch + k]))
                .collect()
        };
        let x = plane(reference);
        let y = plane(test);
        let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
        let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
        let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a * b).collect();
        let mx = filter_valid(&x, h, w, &taps);
        let my = filter_valid(&y, h, w, &taps);
        let exx = filter_valid(&xx, h, w, &taps);
        let eyy = filter_valid(&yy, h, w, &taps);
        let exy = filter_valid(&xy, h, w, &taps);
        for p in 0..mx.len() {
            let (a, b) = (mx[p], my[p]);
            total += ssim_formula(a, b, exx[p] - a * a, eyy[p] - b * b, exy[p] - a * b);
        }
        count += mx.len();
    }
    Ok(total / count as f64)
}
