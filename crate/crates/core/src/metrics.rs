//! Image quality and capacity metrics.

use crate::error::{Error, Result};
use crate::image_io::GrayImage;

/// SSIM window side.
pub const SSIM_WINDOW: usize = 8;
const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsReport {
    pub mse: f64,
    pub ssim: f64,
    /// Embedding rate in bits per pixel.
    pub er: f64,
}

fn check_shape(a: &GrayImage, b: &GrayImage) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::Size(format!(
            "images differ in size: {}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    check_shape(a, b)?;
    let sum: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / a.len() as f64)
}

/// Summed-area table with one row and column of zero padding.
struct Integral {
    cols: usize,
    sums: Vec<f64>,
}

impl Integral {
    fn new(rows: usize, cols: usize, f: impl Fn(usize) -> f64) -> Self {
        let w = cols + 1;
        let mut sums = vec![0.0; (rows + 1) * w];
        for i in 0..rows {
            let mut row = 0.0;
            for j in 0..cols {
                row += f(i * cols + j);
                sums[(i + 1) * w + j + 1] = sums[i * w + j + 1] + row;
            }
        }
        Integral { cols: w, sums }
    }

    fn window(&self, i: usize, j: usize, s: usize) -> f64 {
        let w = self.cols;
        self.sums[(i + s) * w + j + s] - self.sums[i * w + j + s] - self.sums[(i + s) * w + j]
            + self.sums[i * w + j]
    }
}

/// Mean SSIM over all 8x8 windows at stride 1, uniform weights, population statistics.
pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    check_shape(a, b)?;
    let (rows, cols) = (a.rows(), a.cols());
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return Err(Error::Size(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {rows}x{cols}"
        )));
    }
    let (pa, pb) = (a.pixels(), b.pixels());
    let sa = Integral::new(rows, cols, |k| pa[k] as f64);
    let sb = Integral::new(rows, cols, |k| pb[k] as f64);
    let saa = Integral::new(rows, cols, |k| (pa[k] as f64).powi(2));
    let sbb = Integral::new(rows, cols, |k| (pb[k] as f64).powi(2));
    let sab = Integral::new(rows, cols, |k| pa[k] as f64 * pb[k] as f64);

    let s = SSIM_WINDOW;
    let n = (s * s) as f64;
    let mut total = 0.0;
    let mut windows = 0usize;
    for i in 0..=rows - s {
        for j in 0..=cols - s {
            let mu_a = sa.window(i, j, s) / n;
            let mu_b = sb.window(i, j, s) / n;
            let var_a = (saa.window(i, j, s) / n - mu_a * mu_a).max(0.0);
            let var_b = (sbb.window(i, j, s) / n - mu_b * mu_b).max(0.0);
            let cov = sab.window(i, j, s) / n - mu_a * mu_b;
            total += ((2.0 * mu_a * mu_b + C1) * (2.0 * cov + C2))
                / ((mu_a * mu_a + mu_b * mu_b + C1) * (var_a + var_b + C2));
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}

pub fn embedding_rate(capacity_bits: usize, rows: usize, cols: usize) -> f64 {
    capacity_bits as f64 / (rows * cols) as f64
}

pub fn report(
    original: &GrayImage,
    recovered: &GrayImage,
    capacity_bits: usize,
) -> Result<MetricsReport> {
    Ok(MetricsReport {
        mse: mse(original, recovered)?,
        ssim: ssim(original, recovered)?,
        er: embedding_rate(capacity_bits, original.rows(), original.cols()),
    })
}
