//! Shared helpers for the criterion benchmarks in `benches/`.

use std::path::PathBuf;

use wsm_core::imageio::load_image;
use wsm_core::RawImage;

pub fn fixture(name: &str) -> RawImage {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../testdata/images").join(name);
    load_image(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display())).image
}

/// Top-left `side`×`side` corner of an image.
pub fn corner(img: &RawImage, side: usize) -> RawImage {
    let side = side.min(img.width()).min(img.height());
    let px = (0..side).flat_map(|r| (0..side).map(move |c| img.pixel(r, c))).collect();
    RawImage::new(side, side, px).unwrap()
}
