//! Pixel mapping and quality metrics.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::color::{ColorPoint, Palette, Rgb8};
use crate::error::{Error, Result};
use crate::hashtable::ColorTable;
use crate::histogram::{HashParams, SamplingMode};
use crate::imageio::RawImage;
use crate::kmeans::build_center_distance_table;

/// Result of mapping an image onto a palette.
#[derive(Clone, Debug, PartialEq)]
pub struct Mapped {
    /// Palette index per pixel, row-major.
    pub indices: Vec<u32>,
    /// The image with every pixel replaced by its rounded palette color.
    pub image: RawImage,
    /// Mean squared distance from each pixel to its (unrounded) palette color.
    pub mse: f64,
}

/// Nearest palette entry for every distinct color in `colors`, ties to the
/// lower palette index. Each search starts from the previous color's answer
/// and skips centers ruled out by the triangle inequality.
pub fn nearest_indices(colors: &[Rgb8], palette: &[ColorPoint]) -> Result<Vec<(u32, f64)>> {
    if palette.is_empty() {
        return Err(Error::EmptyInput("palette"));
    }
    let table = build_center_distance_table(palette);
    let mut out = Vec::with_capacity(colors.len());
    let mut prev = 0usize;
    for &c in colors {
        let x = ColorPoint::from_rgb8(c);
        let d_prev = x.dist2(&palette[prev]);
        let (mut best, mut min) = (prev, d_prev);
        let bound = 4.0 * d_prev;
        for &t in &table.order(prev)[1..] {
            let t = t as usize;
            if table.dist2(prev, t) > bound {
                break;
            }
            let d = x.dist2(&palette[t]);
            if d < min || (d == min && t < best) {
                best = t;
                min = d;
            }
        }
        out.push((best as u32, min));
        prev = best;
    }
    Ok(out)
}

/// Maps every pixel to its exact nearest palette color. Distinct colors are
/// resolved once and pixels then go through a hash lookup.
pub fn map_pixels(img: &RawImage, palette: &Palette) -> Result<Mapped> {
    if palette.is_empty() {
        return Err(Error::EmptyInput("palette"));
    }
    let pixels = img.pixels();
    // fixed coefficients: the mapping never depends on them
    let m = HashParams::modulus_for(pixels.len());
    let params = HashParams::new(m, [1 % m, 256 % m, 65536 % m])?;
    let mut colors = ColorTable::new(params);
    let slots: Vec<usize> = pixels.iter().map(|&p| colors.insert(p)).collect();
    let nearest = nearest_indices(colors.keys(), &palette.colors)?;
    let rgb = palette.to_rgb8();
    let mut total = 0.0;
    let mut indices = Vec::with_capacity(pixels.len());
    let mut out = Vec::with_capacity(pixels.len());
    for &s in &slots {
        let (i, d) = nearest[s];
        total += d;
        indices.push(i);
        out.push(rgb[i as usize]);
    }
    let mse = if pixels.is_empty() { 0.0 } else { total / pixels.len() as f64 };
    Ok(Mapped {
        indices,
        image: RawImage::new(img.width(), img.height(), out)?,
        mse,
    })
}

/// Mean over pixels of the squared RGB distance.
pub fn mse(orig: &RawImage, quant: &RawImage) -> Result<f64> {
    if orig.width() != quant.width() || orig.height() != quant.height() {
        return Err(Error::DimensionMismatch(orig.width(), orig.height(), quant.width(), quant.height()));
    }
    let n = orig.pixels().len();
    if n == 0 {
        return Ok(0.0);
    }
    let sum: u64 = orig
        .pixels()
        .iter()
        .zip(quant.pixels())
        .map(|(a, b)| (0..3).map(|c| (a[c] as i64 - b[c] as i64).pow(2) as u64).sum::<u64>())
        .sum();
    Ok(sum as f64 / n as f64)
}

/// Peak signal-to-noise ratio in dB; `+∞` for a zero error.
pub fn psnr(mse_value: f64) -> Result<f64> {
    if !(mse_value >= 0.0) {
        return Err(Error::InvalidParameter(format!("mse must be non-negative, got {mse_value}")));
    }
    if mse_value == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (255.0 / mse_value.sqrt()).log10())
}

/// Outcome of one quantization run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantReport {
    pub image: String,
    pub method: String,
    pub k: usize,
    pub run: usize,
    pub seed: u64,
    pub sampling: SamplingMode,
    pub mse: f64,
    #[serde(serialize_with = "ser_db", deserialize_with = "de_db")]
    pub psnr: f64,
    pub iterations: usize,
    pub ndc_per_point_iter: f64,
    pub time_ms: f64,
    pub actual_k: usize,
    /// `;`-separated notes such as `short` or `repairs=2`.
    pub flags: String,
}

pub const CSV_HEADER: [&str; 13] = [
    "image",
    "method",
    "k",
    "run",
    "seed",
    "sampling",
    "mse",
    "psnr",
    "iterations",
    "ndc_per_point_iter",
    "time_ms",
    "actual_k",
    "flags",
];

pub(crate) fn format_db(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_owned()
    } else {
        v.to_string()
    }
}

fn ser_db<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn de_db<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Db {
        Num(f64),
        Text(String),
    }
    match Db::deserialize(d)? {
        Db::Num(v) => Ok(v),
        Db::Text(s) if s == "inf" => Ok(f64::INFINITY),
        Db::Text(s) => s.parse().map_err(serde::de::Error::custom),
    }
}

impl QuantReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fields in [`CSV_HEADER`] order.
    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.image.clone(),
            self.method.clone(),
            self.k.to_string(),
            self.run.to_string(),
            self.seed.to_string(),
            self.sampling.token().to_owned(),
            self.mse.to_string(),
            format_db(self.psnr),
            self.iterations.to_string(),
            self.ndc_per_point_iter.to_string(),
            self.time_ms.to_string(),
            self.actual_k.to_string(),
            self.flags.clone(),
        ]
    }

    /// Header plus this report as a single CSV row.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        w.write_record(self.csv_record())?;
        let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
