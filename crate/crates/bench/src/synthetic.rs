//! Generated test images.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdhei::GrayImage;

/// Smooth image: a tilted ramp plus low-frequency ripples, lightly dithered.
pub fn gradient(rows: usize, cols: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let (dx, dy) = (angle.cos(), angle.sin());
    let amp = rng.random_range(10.0..40.0);
    let fx = rng.random_range(20.0..80.0);
    let fy = rng.random_range(20.0..80.0);
    let span = (rows + cols) as f64;
    GrayImage::from_fn(rows, cols, |i, j| {
        let (y, x) = (i as f64, j as f64);
        let ramp = 128.0 + 80.0 * (x * dx + y * dy) / span;
        let ripple = amp * (x / fx).sin() * (y / fy).cos();
        (ramp + ripple + rng.random_range(-1.0..1.0))
            .round()
            .clamp(0.0, 255.0) as u8
    })
    .expect("generated dimensions are valid")
}

/// Adds uniform noise in `-amplitude..=amplitude`, saturating at the ends.
pub fn overlay_noise(img: &GrayImage, amplitude: u8, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = amplitude as i16;
    let pixels = img
        .pixels()
        .iter()
        .map(|&p| (p as i16 + rng.random_range(-a..=a)).clamp(0, 255) as u8)
        .collect();
    GrayImage::new(img.rows(), img.cols(), pixels).expect("same shape")
}

/// I.i.d. uniform pixels.
pub fn noise(rows: usize, cols: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(rows, cols, |_, _| rng.random()).expect("generated dimensions are valid")
}
