//! Keyed XOR stream encryption.
//!
//! A key is any byte string; its SHA-256 digest keys ChaCha20 (RFC 8439) with
//! an all-zero nonce and the block counter starting at 0. Byte `i` of the
//! keystream masks byte `i` of the data, so for images keystream byte `p`
//! masks all eight bits of pixel `p`. Each key must encrypt only one message.

use chacha20::cipher::{KeyIvInit, StreamCipher};
use chacha20::ChaCha20;
use sha2::{Digest, Sha256};

use crate::image_io::GrayImage;

#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    derived: [u8; 32],
}

impl SecretKey {
    pub fn from_bytes(raw: &[u8]) -> Self {
        SecretKey {
            derived: Sha256::digest(raw).into(),
        }
    }

    pub fn derived(&self) -> &[u8; 32] {
        &self.derived
    }
}

impl From<&str> for SecretKey {
    fn from(s: &str) -> Self {
        SecretKey::from_bytes(s.as_bytes())
    }
}

impl std::fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

/// Key used by the content owner to encrypt the image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageKey(pub SecretKey);

/// Key used by the data hider to encrypt the payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HidingKey(pub SecretKey);

impl ImageKey {
    pub fn new(raw: impl AsRef<[u8]>) -> Self {
        ImageKey(SecretKey::from_bytes(raw.as_ref()))
    }
}

impl HidingKey {
    pub fn new(raw: impl AsRef<[u8]>) -> Self {
        HidingKey(SecretKey::from_bytes(raw.as_ref()))
    }
}

fn cipher(key: &SecretKey) -> ChaCha20 {
    ChaCha20::new(&key.derived.into(), &[0u8; 12].into())
}

pub fn keystream(key: &SecretKey, len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    cipher(key).apply_keystream(&mut out);
    out
}

/// XORs `data` with the keystream in place. Applying it twice restores the input.
pub fn xor_in_place(data: &mut [u8], key: &SecretKey) {
    cipher(key).apply_keystream(data);
}

pub fn xor_encrypt(data: &[u8], key: &SecretKey) -> Vec<u8> {
    let mut out = data.to_vec();
    xor_in_place(&mut out, key);
    out
}

pub fn encrypt_image(img: &GrayImage, key: &SecretKey) -> GrayImage {
    let pixels = xor_encrypt(img.pixels(), key);
    GrayImage::new(img.rows(), img.cols(), pixels).expect("same shape")
}
