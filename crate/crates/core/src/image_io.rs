//! Grayscale rasters, binary PGM I/O, and the plane-major bit buffer.
//!
//! The canonical image-to-bits mapping puts plane 8 (the MSB of every pixel)
//! first and plane 1 (the LSB) last, each plane in raster order. Bit `k` of
//! pixel `p` therefore lives at buffer position `(8 - k) * m * n + p`, and the
//! tail of the buffer is made of the LSBs of the last pixels.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::error::{corrupt, Error, Result};

/// An 8-bit grayscale image, `rows x cols`, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    rows: usize,
    cols: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(rows: usize, cols: usize, pixels: Vec<u8>) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::Size(format!(
                "image must be at least 2x2, got {rows}x{cols}"
            )));
        }
        if pixels.len() != rows * cols {
            return Err(Error::Size(format!(
                "{} pixels supplied for a {rows}x{cols} image",
                pixels.len()
            )));
        }
        Ok(GrayImage { rows, cols, pixels })
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                pixels.push(f(i, j));
            }
        }
        GrayImage::new(rows, cols, pixels)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.cols + col]
    }

    pub fn same_shape(&self, other: &GrayImage) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

impl std::fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GrayImage")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish_non_exhaustive()
    }
}

/// Width in bits of every length field for an image of `pixel_count` pixels:
/// `ceil(log2(pixel_count))`.
pub fn length_field_bits(pixel_count: usize) -> usize {
    assert!(pixel_count >= 2);
    (usize::BITS - (pixel_count - 1).leading_zeros()) as usize
}

/// An ordered sequence of bits.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct BitBuffer {
    bits: Vec<bool>,
}

impl BitBuffer {
    pub fn new() -> Self {
        BitBuffer { bits: Vec::new() }
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitBuffer {
            bits: Vec::with_capacity(bits),
        }
    }

    pub fn zeros(len: usize) -> Self {
        BitBuffer {
            bits: vec![false; len],
        }
    }

    /// Parses a string of `'0'`/`'1'` characters; whitespace is ignored.
    pub fn from_bit_str(s: &str) -> Self {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => false,
                '1' => true,
                other => panic!("invalid bit character {other:?}"),
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn as_mut_slice(&mut self) -> &mut [bool] {
        &mut self.bits
    }

    pub fn into_vec(self) -> Vec<bool> {
        self.bits
    }

    pub fn get(&self, pos: usize) -> bool {
        self.bits[pos]
    }

    pub fn set(&mut self, pos: usize, bit: bool) {
        self.bits[pos] = bit;
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn extend_from_slice(&mut self, bits: &[bool]) {
        self.bits.extend_from_slice(bits);
    }

    /// Appends `value` as a `width`-bit field, most significant first. Fields
    /// wider than 64 bits are zero-extended.
    pub fn push_bits(&mut self, value: u64, width: usize) {
        debug_assert!(fits(value, width), "{value} does not fit {width} bits");
        for shift in (0..width).rev() {
            self.bits.push(bit_of(value, shift));
        }
    }

    /// Overwrites the `width`-bit field at `pos` with `value`, MSB first.
    pub fn write_bits_at(&mut self, pos: usize, value: u64, width: usize) {
        debug_assert!(fits(value, width));
        for (i, shift) in (0..width).rev().enumerate() {
            self.bits[pos + i] = bit_of(value, shift);
        }
    }

    /// Reads a `width`-bit field; `None` if its value does not fit in a `u64`.
    pub fn read_field_at(&self, pos: usize, width: usize) -> Option<u64> {
        pack_bits(&self.bits[pos..pos + width])
    }

    /// Like [`BitBuffer::read_field_at`] for fields known to be at most 64 bits wide.
    pub fn read_bits_at(&self, pos: usize, width: usize) -> u64 {
        assert!(width <= 64);
        pack_bits(&self.bits[pos..pos + width]).expect("field fits")
    }

    pub fn to_bit_string(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }
}

impl std::fmt::Debug for BitBuffer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.bits.len() <= 128 {
            write!(f, "BitBuffer({})", self.to_bit_string())
        } else {
            write!(f, "BitBuffer({} bits)", self.bits.len())
        }
    }
}

impl From<Vec<bool>> for BitBuffer {
    fn from(bits: Vec<bool>) -> Self {
        BitBuffer { bits }
    }
}

impl FromIterator<bool> for BitBuffer {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitBuffer {
            bits: iter.into_iter().collect(),
        }
    }
}

fn fits(value: u64, width: usize) -> bool {
    width >= 64 || value >> width == 0
}

fn bit_of(value: u64, shift: usize) -> bool {
    shift < 64 && (value >> shift) & 1 == 1
}

/// MSB-first value of `bits`, or `None` if it overflows a `u64`.
pub fn pack_bits(bits: &[bool]) -> Option<u64> {
    let lead = bits.len().saturating_sub(64);
    if bits[..lead].iter().any(|&b| b) {
        return None;
    }
    Some(
        bits[lead..]
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | b as u64),
    )
}

/// Sequential reader over a bit slice. Reading past the end is a corruption error.
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a [bool]) -> Self {
        BitReader { bits, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        match self.bits.get(self.pos) {
            Some(&b) => {
                self.pos += 1;
                Ok(b)
            }
            None => corrupt("unexpected end of bit stream"),
        }
    }

    pub fn read_bits(&mut self, width: usize) -> Result<u64> {
        let chunk = self.take(width)?;
        match pack_bits(chunk) {
            Some(v) => Ok(v),
            None => corrupt(format!("{width}-bit field overflows")),
        }
    }

    pub fn take(&mut self, len: usize) -> Result<&'a [bool]> {
        if len > self.remaining() {
            return corrupt(format!(
                "needed {len} bits at offset {}, only {} remain",
                self.pos,
                self.remaining()
            ));
        }
        let chunk = &self.bits[self.pos..self.pos + len];
        self.pos += len;
        Ok(chunk)
    }
}

/// Plane-major, MSB-plane-first expansion of an image into `8 * m * n` bits.
pub fn to_bit_buffer(img: &GrayImage) -> BitBuffer {
    let mut bits = Vec::with_capacity(8 * img.len());
    for k in (1..=8u32).rev() {
        bits.extend(img.pixels().iter().map(|&p| (p >> (k - 1)) & 1 == 1));
    }
    BitBuffer { bits }
}

pub fn from_bit_buffer(buf: &BitBuffer, rows: usize, cols: usize) -> Result<GrayImage> {
    let count = rows * cols;
    if buf.len() != 8 * count {
        return Err(Error::Size(format!(
            "bit buffer holds {} bits, a {rows}x{cols} image needs {}",
            buf.len(),
            8 * count
        )));
    }
    let mut pixels = vec![0u8; count];
    for (plane_idx, plane) in buf.as_slice().chunks_exact(count).enumerate() {
        let shift = 7 - plane_idx;
        for (px, &bit) in pixels.iter_mut().zip(plane) {
            *px |= (bit as u8) << shift;
        }
    }
    GrayImage::new(rows, cols, pixels)
}

/// Decodes a binary (P5) PGM with maxval 255. Comment lines are accepted in the header.
pub fn decode_pgm(data: &[u8]) -> Result<GrayImage> {
    let mut cursor = HeaderCursor { data, pos: 0 };
    if data.len() < 2 || &data[..2] != b"P5" {
        return Err(Error::Format("missing P5 magic".into()));
    }
    cursor.pos = 2;
    let width = cursor.next_number()?;
    let height = cursor.next_number()?;
    let maxval = cursor.next_number()?;
    if maxval != 255 {
        return Err(Error::UnsupportedDepth(maxval));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match data.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(Error::Format("no whitespace after maxval".into())),
    }
    let count = (width as usize)
        .checked_mul(height as usize)
        .ok_or_else(|| Error::Format("image dimensions overflow".into()))?;
    let raster = &data[cursor.pos..];
    if raster.len() < count {
        return Err(Error::Io(io::Error::new(
            io::ErrorKind::UnexpectedEof,
            format!("pixel data truncated: {} of {count} bytes", raster.len()),
        )));
    }
    GrayImage::new(height as usize, width as usize, raster[..count].to_vec())
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.cols(), img.rows());
    let mut out = Vec::with_capacity(header.len() + img.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.pixels());
    out
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let mut file = io::BufWriter::new(fs::File::create(path)?);
    file.write_all(&encode_pgm(img))?;
    file.flush()?;
    Ok(())
}

struct HeaderCursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn next_number(&mut self) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format(format!("expected a number at byte {start}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format("header number out of range".into()))
    }
}
