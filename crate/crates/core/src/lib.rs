//! Reversible data hiding in encrypted grayscale images.
//!
//! The content owner predicts every pixel with the median edge detector,
//! slices the sign-magnitude prediction errors into eight bit-planes and
//! compresses each plane with a hybrid Huffman / run-length code. The freed
//! space becomes a reserved room, and the whole compressed image is encrypted
//! with a stream cipher. A data hider who only sees ciphertext can then write
//! an encrypted payload into the room. A receiver holding the hiding key can
//! extract the payload; one holding the image key can recover the original
//! image bit for bit; one holding both can do both.
//!
//! ```no_run
//! use rdhei::{owner_encode, embed, extract, recover, CodecParams, HidingKey, ImageKey, MarkedImage};
//!
//! # fn main() -> rdhei::Result<()> {
//! let cover = rdhei::read_pgm("lena.pgm")?;
//! let ke = ImageKey::new("image key");
//! let kh = HidingKey::new("hiding key");
//! let encrypted = owner_encode(&cover, &ke, &CodecParams::default())?;
//! let marked = embed(&encrypted.image, b"secret", &kh)?;
//! assert_eq!(extract(&marked, &kh)?, b"secret");
//! assert_eq!(recover(&marked, &ke)?, cover);
//! # Ok(())
//! # }
//! ```

pub mod bitplane;
pub mod codec;
pub mod container;
pub mod crypto;
pub mod embedder;
mod error;
pub mod image_io;
pub mod metrics;
pub mod predictor;

pub use codec::CodecParams;
pub use container::{assemble, compute_capacity, disassemble, Container};
pub use crypto::{HidingKey, ImageKey, SecretKey};
#[cfg(feature = "extract")]
pub use embedder::extract;
#[cfg(feature = "recover")]
pub use embedder::recover;
#[cfg(all(feature = "extract", feature = "recover"))]
pub use embedder::recover_and_extract;
pub use embedder::{
    embed, owner_encode, read_capacity, room_layout, EncryptedImage, MarkedImage, RoomLayout,
};
pub use error::{Error, Result};
pub use image_io::{read_pgm, write_pgm, BitBuffer, GrayImage};
pub use metrics::{embedding_rate, mse, ssim, MetricsReport};
