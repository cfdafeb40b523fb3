use std::io;

use thiserror::Error;

/// Errors produced anywhere in the hiding pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed image file: {0}")]
    Format(String),

    #[error("unsupported sample depth: maxval {0} (only 255 is supported)")]
    UnsupportedDepth(u32),

    #[error("size mismatch: {0}")]
    Size(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The compressed planes plus overhead do not leave any reserved room.
    #[error("image is incompressible: {0}")]
    Incompressible(String),

    #[error("payload of {payload_bits} bits exceeds capacity of {capacity_bits} bits")]
    Capacity {
        payload_bits: u64,
        capacity_bits: u64,
    },

    /// The container failed to parse or decode. Signals tampering or a wrong key.
    #[error("corrupted container: {0}")]
    Corruption(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn corrupt<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Corruption(msg.into()))
}
