//! Raster and palette file I/O.
//!
//! Two raster formats are supported, both restricted to 8 bits per channel:
//! binary PPM (`P6`, maxval 255) and PNG (truecolor, with or without alpha).
//! The format of an input file is sniffed from its magic bytes; the format of
//! an output file follows its extension (`.ppm`/`.pnm` or `.png`).

use std::fs;
use std::io::{Cursor, Write};
use std::path::Path;

use crate::color::{Palette, Rgb8};
use crate::error::{Error, Result};

/// A row-major 8-bit RGB image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb8>,
}

impl RawImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb8>) -> Result<Self> {
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::InvalidParameter(format!("{width}x{height} overflows")))?;
        if pixels.len() != expected {
            return Err(Error::PixelCount {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(RawImage {
            width,
            height,
            pixels,
        })
    }

    /// An image filled with one color.
    pub fn filled(width: usize, height: usize, color: Rgb8) -> Self {
        RawImage {
            width,
            height,
            pixels: vec![color; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb8] {
        &self.pixels
    }

    pub fn pixel(&self, row: usize, col: usize) -> Rgb8 {
        self.pixels[row * self.width + col]
    }

    pub fn into_pixels(self) -> Vec<Rgb8> {
        self.pixels
    }
}

/// Non-fatal conditions noticed while decoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadWarning {
    /// The source carried an alpha channel, which was dropped.
    AlphaDiscarded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadedImage {
    pub image: RawImage,
    pub warnings: Vec<LoadWarning>,
}

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

pub fn load_image(path: impl AsRef<Path>) -> Result<LoadedImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let loaded = decode_image(&bytes).map_err(|e| match e {
        Error::UnknownFormat(_) => Error::UnknownFormat(path.to_path_buf()),
        other => other,
    })?;
    for w in &loaded.warnings {
        if *w == LoadWarning::AlphaDiscarded {
            log::warn!("{}: alpha channel discarded", path.display());
        }
    }
    Ok(loaded)
}

/// Decodes an in-memory PNG or P6 PPM.
pub fn decode_image(bytes: &[u8]) -> Result<LoadedImage> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P6") {
        decode_ppm(bytes).map(|image| LoadedImage {
            image,
            warnings: Vec::new(),
        })
    } else {
        Err(Error::UnknownFormat("<memory>".into()))
    }
}

fn decode_ppm(bytes: &[u8]) -> Result<RawImage> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for (i, field) in fields.iter_mut().enumerate() {
        // whitespace and comments may precede each header field
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(Error::Truncated("PPM header ends early".into())),
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Malformed(format!("PPM header field {} is not a number", i + 1)));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
        *field = text
            .parse()
            .map_err(|_| Error::Malformed(format!("PPM header value {text} out of range")))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::UnsupportedBitDepth(format!("PPM maxval {maxval}")));
    }
    match bytes.get(pos) {
        Some(c) if c.is_ascii_whitespace() => pos += 1,
        Some(_) => return Err(Error::Malformed("missing whitespace after PPM maxval".into())),
        None => return Err(Error::Truncated("PPM header ends early".into())),
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::Malformed(format!("{width}x{height} overflows")))?;
    let data = &bytes[pos..];
    if data.len() < count * 3 {
        return Err(Error::Truncated(format!(
            "PPM raster holds {} bytes, expected {}",
            data.len(),
            count * 3
        )));
    }
    let pixels = data[..count * 3]
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    RawImage::new(width, height, pixels)
}

fn decode_png(bytes: &[u8]) -> Result<LoadedImage> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(png_error)?;
    let info = reader.info();
    let (width, height) = (info.width as usize, info.height as usize);
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedBitDepth(format!(
            "PNG bit depth {}",
            info.bit_depth as u8
        )));
    }
    let channels = match info.color_type {
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        other => return Err(Error::UnsupportedColorType(format!("PNG {other:?}"))),
    };
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Malformed("PNG dimensions overflow".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(png_error)?;
    let mut pixels = Vec::with_capacity(width * height);
    for row in buf.chunks(frame.line_size).take(height) {
        pixels.extend(
            row[..width * channels]
                .chunks_exact(channels)
                .map(|c| [c[0], c[1], c[2]]),
        );
    }
    let warnings = if channels == 4 {
        vec![LoadWarning::AlphaDiscarded]
    } else {
        Vec::new()
    };
    Ok(LoadedImage {
        image: RawImage::new(width, height, pixels)?,
        warnings,
    })
}

fn png_error(e: png::DecodingError) -> Error {
    match e {
        png::DecodingError::IoError(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::Truncated(format!("PNG stream: {io}"))
        }
        png::DecodingError::IoError(io) => Error::Truncated(format!("PNG stream: {io}")),
        other => Error::Malformed(format!("PNG: {other}")),
    }
}

/// Encodes `img` as binary PPM.
pub fn encode_ppm(img: &RawImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.reserve(img.pixels.len() * 3);
    for p in &img.pixels {
        out.extend_from_slice(p);
    }
    out
}

pub fn encode_png(img: &RawImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.width as u32, img.height as u32);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::Malformed(format!("PNG encode: {e}")))?;
        let data: Vec<u8> = img.pixels.iter().flatten().copied().collect();
        writer
            .write_image_data(&data)
            .map_err(|e| Error::Malformed(format!("PNG encode: {e}")))?;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    Ppm,
    Png,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "ppm" | "pnm" => Some(ImageFormat::Ppm),
            "png" => Some(ImageFormat::Png),
            _ => None,
        }
    }
}

pub fn save_image(img: &RawImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = match ImageFormat::from_path(path) {
        Some(ImageFormat::Ppm) => encode_ppm(img),
        Some(ImageFormat::Png) => encode_png(img)?,
        None => return Err(Error::UnknownFormat(path.to_path_buf())),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Renders a palette as one `R G B` line per entry.
pub fn format_palette(palette: &Palette) -> Result<String> {
    if palette.is_empty() {
        return Err(Error::EmptyInput("palette"));
    }
    let mut s = String::with_capacity(palette.len() * 12);
    for [r, g, b] in palette.to_rgb8() {
        s.push_str(&format!("{r} {g} {b}\n"));
    }
    Ok(s)
}

pub fn write_palette(palette: &Palette, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = format_palette(palette)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
