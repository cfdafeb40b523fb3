//! The three protocol roles: the content owner reserves room and encrypts, the
//! data hider embeds into the room, and the receiver extracts and/or recovers.
//!
//! Everything a hider needs is in plaintext in the encrypted image: the
//! capacity `c` in the LSBs of the last `8 * L_len` pixels, and a payload byte
//! count in the first `8 * L_len` bits of the room (zero until something is
//! embedded). The payload itself is XOR-encrypted with the hiding key.
//!
//! Extraction uses only a [`HidingKey`] and recovery only an [`ImageKey`]. They
//! sit behind the `extract` and `recover` features so either can be built alone.

use std::ops::Range;

use crate::codec::CodecParams;
use crate::container::Container;
use crate::crypto::{encrypt_image, xor_in_place, HidingKey, ImageKey};
use crate::error::{corrupt, Error, Result};
use crate::image_io::{from_bit_buffer, length_field_bits, to_bit_buffer, BitBuffer, GrayImage};
use crate::predictor::compute_error_image;

/// An encrypted image that may carry an embedded payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedImage(GrayImage);

impl MarkedImage {
    pub fn as_image(&self) -> &GrayImage {
        &self.0
    }

    pub fn into_image(self) -> GrayImage {
        self.0
    }
}

impl From<GrayImage> for MarkedImage {
    fn from(img: GrayImage) -> Self {
        MarkedImage(img)
    }
}

impl AsRef<GrayImage> for MarkedImage {
    fn as_ref(&self) -> &GrayImage {
        &self.0
    }
}

/// Result of [`owner_encode`].
#[derive(Clone, Debug)]
pub struct EncryptedImage {
    pub image: GrayImage,
    /// Net embedding capacity in bits, including the payload length prefix.
    pub capacity: usize,
}

impl EncryptedImage {
    pub fn into_marked(self) -> MarkedImage {
        MarkedImage(self.image)
    }
}

/// Where things live in the canonical bit buffer of an `rows x cols` image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoomLayout {
    pub capacity: usize,
    pub room: Range<usize>,
    pub length_field_bits: usize,
}

impl RoomLayout {
    fn new(pixel_count: usize, capacity: usize) -> Self {
        let l_len = length_field_bits(pixel_count);
        let end = 8 * pixel_count - 8 * l_len;
        RoomLayout {
            capacity,
            room: end - capacity..end,
            length_field_bits: l_len,
        }
    }

    /// Width of the payload byte-count prefix at the start of the room.
    pub fn prefix_bits(&self) -> usize {
        8 * self.length_field_bits
    }

    /// Largest payload, in whole bytes, that fits after the prefix.
    pub fn max_payload_bytes(&self) -> usize {
        self.capacity.saturating_sub(self.prefix_bits()) / 8
    }
}

/// Reserves room in `img`, encrypts it with the image key, then writes the
/// plaintext capacity field and an empty payload prefix.
pub fn owner_encode(
    img: &GrayImage,
    key: &ImageKey,
    params: &CodecParams,
) -> Result<EncryptedImage> {
    let err = compute_error_image(img);
    let container = Container::build(&err, params)?;
    let compressed = from_bit_buffer(&container.to_bits(), img.rows(), img.cols())?;
    let encrypted = encrypt_image(&compressed, &key.0);

    let layout = RoomLayout::new(img.len(), container.capacity());
    let mut bits = to_bit_buffer(&encrypted);
    let tail = bits.len() - layout.prefix_bits();
    bits.write_bits_at(tail, layout.capacity as u64, layout.prefix_bits());
    if layout.capacity >= layout.prefix_bits() {
        bits.write_bits_at(layout.room.start, 0, layout.prefix_bits());
    }
    Ok(EncryptedImage {
        image: from_bit_buffer(&bits, img.rows(), img.cols())?,
        capacity: layout.capacity,
    })
}

/// Reads the plaintext capacity field and derives the room position.
pub fn room_layout(img: &GrayImage) -> Result<RoomLayout> {
    let mn = img.len();
    let l_len = length_field_bits(mn);
    let field = 8 * l_len;
    let lsbs: Vec<bool> = img.pixels()[mn - field..]
        .iter()
        .map(|&p| p & 1 == 1)
        .collect();
    let max = (8 * mn).saturating_sub(17 * l_len) as u64;
    let capacity = crate::image_io::pack_bits(&lsbs).unwrap_or(u64::MAX);
    if capacity > max {
        return corrupt(format!(
            "capacity field {capacity} exceeds the {max} bits an image can offer"
        ));
    }
    Ok(RoomLayout::new(mn, capacity as usize))
}

pub fn read_capacity(img: &GrayImage) -> Result<usize> {
    room_layout(img).map(|l| l.capacity)
}

/// Encrypts `payload` with the hiding key and substitutes it into the room.
pub fn embed(encrypted: &GrayImage, payload: &[u8], key: &HidingKey) -> Result<MarkedImage> {
    let layout = room_layout(encrypted)?;
    let payload_bits = 8 * payload.len() as u64;
    let available = layout.capacity.saturating_sub(layout.prefix_bits()) as u64;
    if payload_bits > available || (layout.capacity < layout.prefix_bits() && !payload.is_empty()) {
        return Err(Error::Capacity {
            payload_bits,
            capacity_bits: available,
        });
    }
    if layout.capacity < layout.prefix_bits() {
        return Ok(MarkedImage(encrypted.clone()));
    }

    let mut cipher = payload.to_vec();
    xor_in_place(&mut cipher, &key.0);
    let mut bits = to_bit_buffer(encrypted);
    let mut pos = layout.room.start;
    bits.write_bits_at(pos, payload.len() as u64, layout.prefix_bits());
    pos += layout.prefix_bits();
    for &byte in &cipher {
        bits.write_bits_at(pos, byte as u64, 8);
        pos += 8;
    }
    debug_assert!(pos <= layout.room.end);
    Ok(MarkedImage(from_bit_buffer(
        &bits,
        encrypted.rows(),
        encrypted.cols(),
    )?))
}

/// Reads and decrypts the payload. Needs no image key and decodes nothing.
#[cfg(feature = "extract")]
pub fn extract(marked: &MarkedImage, key: &HidingKey) -> Result<Vec<u8>> {
    let img = marked.as_image();
    let layout = room_layout(img)?;
    if layout.capacity < layout.prefix_bits() {
        return Ok(Vec::new());
    }
    let bits = to_bit_buffer(img);
    let len = bits
        .read_field_at(layout.room.start, layout.prefix_bits())
        .unwrap_or(u64::MAX);
    let room_bytes = (layout.capacity - layout.prefix_bits()) as u64 / 8;
    if len > room_bytes {
        return corrupt(format!(
            "payload length {len} bytes exceeds the {room_bytes}-byte room"
        ));
    }
    let start = layout.room.start + layout.prefix_bits();
    let mut payload: Vec<u8> = (0..len as usize)
        .map(|i| bits.read_bits_at(start + 8 * i, 8) as u8)
        .collect();
    xor_in_place(&mut payload, &key.0);
    Ok(payload)
}

/// Decrypts the container region, decompresses it and rebuilds the cover image.
/// Payload and room contents are ignored.
#[cfg(feature = "recover")]
pub fn recover(marked: &MarkedImage, key: &ImageKey) -> Result<GrayImage> {
    let img = marked.as_image();
    let layout = room_layout(img)?;
    let decrypted = encrypt_image(img, &key.0);
    let bits: BitBuffer = to_bit_buffer(&decrypted);
    let container = Container::from_bits(&bits, img.rows(), img.cols())?;
    if container.capacity() != layout.capacity {
        return corrupt(format!(
            "container leaves {} bits of room but the capacity field says {}",
            container.capacity(),
            layout.capacity
        ));
    }
    let err = container.error_image()?;
    crate::predictor::invert_error_image(&err)
}

#[cfg(all(feature = "extract", feature = "recover"))]
pub fn recover_and_extract(
    marked: &MarkedImage,
    image_key: &ImageKey,
    hiding_key: &HidingKey,
) -> Result<(GrayImage, Vec<u8>)> {
    let payload = extract(marked, hiding_key)?;
    let image = recover(marked, image_key)?;
    Ok((image, payload))
}
