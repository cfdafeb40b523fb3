//! Median edge detector prediction and the sign-magnitude error image.

use crate::error::{corrupt, Result};
use crate::image_io::GrayImage;

/// Largest prediction error magnitude representable in seven bits.
pub const MAX_ERROR: i32 = 127;

const SIGN_BIT: u8 = 0x80;

/// Median edge detector. `up_left`, `left`, `up` are the causal neighbours.
///
/// No clamping is applied. The gradient branch `left + up - up_left` is only
/// taken when `up_left` lies strictly between the other two, so the result
/// always stays within the neighbours' range.
pub fn med_predict(up_left: u8, left: u8, up: u8) -> i32 {
    let (a, b, c) = (up_left as i32, left as i32, up as i32);
    let lo = b.min(c);
    let hi = b.max(c);
    if a <= lo {
        hi
    } else if a >= hi {
        lo
    } else {
        b + c - a
    }
}

fn predict_at(pixels: &[u8], cols: usize, idx: usize) -> i32 {
    med_predict(pixels[idx - cols - 1], pixels[idx - 1], pixels[idx - cols])
}

/// Processed prediction errors of a whole image.
///
/// `eprime` carries the reference pixels (row 0 and column 0) and overflow
/// pixels verbatim; every other entry is a sign-magnitude error with the sign
/// in bit 8.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorImage {
    rows: usize,
    cols: usize,
    eprime: Vec<u8>,
    overflow: Vec<usize>,
}

impl ErrorImage {
    /// Assembles an error image from decoded parts, checking the structural invariants.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        eprime: Vec<u8>,
        overflow: Vec<usize>,
    ) -> Result<Self> {
        if eprime.len() != rows * cols {
            return corrupt(format!(
                "error image has {} values for {rows}x{cols}",
                eprime.len()
            ));
        }
        let mut prev = None;
        for &p in &overflow {
            if p >= rows * cols || p / cols == 0 || p % cols == 0 {
                return corrupt(format!("overflow position {p} is not a predicted pixel"));
            }
            if prev.is_some_and(|q| q >= p) {
                return corrupt("overflow positions not strictly ascending");
            }
            prev = Some(p);
        }
        Ok(ErrorImage {
            rows,
            cols,
            eprime,
            overflow,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn eprime(&self) -> &[u8] {
        &self.eprime
    }

    pub fn overflow_positions(&self) -> &[usize] {
        &self.overflow
    }
}

fn sign_magnitude(e: i32) -> u8 {
    debug_assert!(e.abs() <= MAX_ERROR);
    if e < 0 {
        SIGN_BIT | (-e) as u8
    } else {
        e as u8
    }
}

pub fn compute_error_image(img: &GrayImage) -> ErrorImage {
    let (rows, cols) = (img.rows(), img.cols());
    let px = img.pixels();
    let mut eprime = px.to_vec();
    let mut overflow = Vec::new();
    for i in 1..rows {
        for j in 1..cols {
            let idx = i * cols + j;
            let e = px[idx] as i32 - predict_at(px, cols, idx);
            if e.abs() > MAX_ERROR {
                overflow.push(idx);
            } else {
                eprime[idx] = sign_magnitude(e);
            }
        }
    }
    ErrorImage {
        rows,
        cols,
        eprime,
        overflow,
    }
}

/// Rebuilds the image by raster-order prediction from already recovered pixels.
///
/// Fails when any decoded value is inconsistent with how the error image was
/// produced: a "negative zero" code, a pixel outside `[0, 255]`, or an overflow
/// mark on a pixel whose error actually fits in seven bits.
pub fn invert_error_image(err: &ErrorImage) -> Result<GrayImage> {
    let (rows, cols) = (err.rows, err.cols);
    let mut px = err.eprime.clone();
    let mut overflow = err.overflow.iter().copied().peekable();
    for i in 1..rows {
        for j in 1..cols {
            let idx = i * cols + j;
            let pred = predict_at(&px, cols, idx);
            let code = err.eprime[idx];
            if overflow.peek() == Some(&idx) {
                overflow.next();
                if (code as i32 - pred).abs() <= MAX_ERROR {
                    return corrupt(format!("overflow mark at {idx} on an in-range error"));
                }
                continue;
            }
            if code == SIGN_BIT {
                return corrupt(format!("negative-zero error code at {idx}"));
            }
            let mag = (code & !SIGN_BIT) as i32;
            let e = if code & SIGN_BIT != 0 { -mag } else { mag };
            let x = pred + e;
            if !(0..=255).contains(&x) {
                return corrupt(format!("recovered pixel {x} at {idx} out of range"));
            }
            px[idx] = x as u8;
        }
    }
    GrayImage::new(rows, cols, px)
}
