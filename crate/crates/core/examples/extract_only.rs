//! Hide and extract a payload using a build without image recovery.
//!
//!     cargo run -p rdhei --no-default-features --features extract --example extract_only

use rdhei::{
    embed, extract, owner_encode, CodecParams, GrayImage, HidingKey, ImageKey, MarkedImage,
};

fn main() -> rdhei::Result<()> {
    let cover = GrayImage::from_fn(128, 128, |i, j| (64 + i / 2 + j / 3) as u8)?;
    let encrypted = owner_encode(&cover, &ImageKey::new("owner"), &CodecParams::default())?;
    let hiding_key = HidingKey::new("hider");
    let payload = b"extraction needs only the hiding key".to_vec();
    let marked: MarkedImage = embed(&encrypted.image, &payload, &hiding_key)?;
    let got = extract(&marked, &hiding_key)?;
    assert_eq!(got, payload);
    println!(
        "extract_only ok: {} bytes, capacity {} bits",
        got.len(),
        encrypted.capacity
    );
    Ok(())
}
