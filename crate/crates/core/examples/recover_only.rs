//! Recover a cover image using a build without payload extraction.
//!
//!     cargo run -p rdhei --no-default-features --features recover --example recover_only

use rdhei::{embed, owner_encode, recover, CodecParams, GrayImage, HidingKey, ImageKey};

fn main() -> rdhei::Result<()> {
    let cover = GrayImage::from_fn(128, 128, |i, j| (64 + i / 2 + j / 3) as u8)?;
    let image_key = ImageKey::new("owner");
    let encrypted = owner_encode(&cover, &image_key, &CodecParams::default())?;
    let marked = embed(
        &encrypted.image,
        b"recovery ignores this",
        &HidingKey::new("hider"),
    )?;
    let recovered = recover(&marked, &image_key)?;
    assert_eq!(recovered, cover);
    println!(
        "recover_only ok: {}x{} image restored",
        recovered.rows(),
        recovered.cols()
    );
    Ok(())
}
