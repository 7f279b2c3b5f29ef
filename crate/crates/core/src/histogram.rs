//! Reduction of image data to the clustering substrate.
//!
//! Pixels can be thinned by 2:1 subsampling in both directions and collapsed
//! into their unique colors, each weighted by its relative frequency. Because
//! a weighted unique color stands in for every pixel that shares it, k-means
//! over the histogram reproduces k-means over the raw pixels exactly while
//! touching far fewer points.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::color::{ColorPoint, Rgb8};
use crate::error::{Error, Result};
use crate::hashtable::ColorTable;
use crate::imageio::RawImage;

/// Points with non-negative weights; the input to every clustering routine.
pub trait WeightedData {
    fn points(&self) -> &[ColorPoint];
    fn weights(&self) -> &[f64];

    fn len(&self) -> usize {
        self.points().len()
    }

    fn is_empty(&self) -> bool {
        self.points().is_empty()
    }

    fn total_weight(&self) -> f64 {
        self.weights().iter().sum()
    }

    fn centroid(&self) -> ColorPoint {
        let mut acc = [0.0; 3];
        let mut total = 0.0;
        for (p, &w) in self.points().iter().zip(self.weights()) {
            for c in 0..3 {
                acc[c] += w * p[c];
            }
            total += w;
        }
        ColorPoint(acc.map(|v| v / total))
    }
}

/// Distinct colors with normalized frequency weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedHistogram {
    colors: Vec<ColorPoint>,
    rgb: Vec<Rgb8>,
    counts: Vec<u64>,
    weights: Vec<f64>,
    source_pixel_count: usize,
}

impl WeightedHistogram {
    /// Builds a histogram from `(color, count)` pairs. Colors must be distinct
    /// and counts positive.
    pub fn from_counts(entries: impl IntoIterator<Item = (Rgb8, u64)>) -> Result<Self> {
        let (rgb, counts): (Vec<Rgb8>, Vec<u64>) = entries.into_iter().unzip();
        if rgb.is_empty() {
            return Err(Error::EmptyInput("histogram entries"));
        }
        if counts.contains(&0) {
            return Err(Error::InvalidParameter("histogram counts must be positive".into()));
        }
        let mut seen = std::collections::HashSet::with_capacity(rgb.len());
        if !rgb.iter().all(|c| seen.insert(*c)) {
            return Err(Error::InvalidParameter("histogram colors must be distinct".into()));
        }
        Ok(Self::from_parts(rgb, counts))
    }

    fn from_parts(rgb: Vec<Rgb8>, counts: Vec<u64>) -> Self {
        let total: u64 = counts.iter().sum();
        let weights = counts.iter().map(|&c| c as f64 / total as f64).collect();
        WeightedHistogram {
            colors: rgb.iter().copied().map(ColorPoint::from_rgb8).collect(),
            rgb,
            counts,
            weights,
            source_pixel_count: total as usize,
        }
    }

    pub fn colors(&self) -> &[ColorPoint] {
        &self.colors
    }

    pub fn rgb(&self) -> &[Rgb8] {
        &self.rgb
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn source_pixel_count(&self) -> usize {
        self.source_pixel_count
    }

    /// Writes `r,g,b,count,weight` rows with a header line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "g", "b", "count", "weight"])?;
        for ((c, n), wt) in self.rgb.iter().zip(&self.counts).zip(&self.weights) {
            w.write_record([
                c[0].to_string(),
                c[1].to_string(),
                c[2].to_string(),
                n.to_string(),
                format!("{wt:e}"),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<histogram csv>", e))?;
        Ok(())
    }
}

impl WeightedData for WeightedHistogram {
    fn points(&self) -> &[ColorPoint] {
        &self.colors
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Raw sampled pixels, each carrying weight `1/n`. Duplicates are kept.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    points: Vec<ColorPoint>,
    weights: Vec<f64>,
}

impl PointSet {
    pub fn from_pixels(pixels: &[Rgb8]) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::EmptyInput("pixel sequence"));
        }
        let w = 1.0 / pixels.len() as f64;
        Ok(PointSet {
            points: pixels.iter().copied().map(ColorPoint::from_rgb8).collect(),
            weights: vec![w; pixels.len()],
        })
    }

    /// Arbitrary points and weights, for tests and synthetic data.
    pub fn new(points: Vec<ColorPoint>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("point set"));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidParameter("points and weights differ in length".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidParameter("weights must be positive".into()));
        }
        Ok(PointSet { points, weights })
    }
}

impl WeightedData for PointSet {
    fn points(&self) -> &[ColorPoint] {
        &self.points
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Parameters of the universal hash `h(x) = (a·x) mod m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashParams {
    m: u64,
    a: [u64; 3],
}

/// Keeps `a·x` well inside `u64` for 8-bit channels.
const MAX_MODULUS: u64 = 1 << 48;

impl HashParams {
    pub fn new(m: u64, a: [u64; 3]) -> Result<Self> {
        if !is_prime(m) || m > MAX_MODULUS {
            return Err(Error::InvalidParameter(format!("hash modulus {m} is not a usable prime")));
        }
        if a.iter().any(|&ai| ai >= m) {
            return Err(Error::InvalidParameter(format!(
                "hash coefficients {a:?} must be below {m}"
            )));
        }
        Ok(HashParams { m, a })
    }

    /// Draws coefficients uniformly from `0..m`, rejecting the all-zero triple.
    pub fn random<R: Rng>(m: u64, rng: &mut R) -> Result<Self> {
        HashParams::new(m, [0, 0, 0])?;
        loop {
            let a = [rng.gen_range(0..m), rng.gen_range(0..m), rng.gen_range(0..m)];
            if a != [0, 0, 0] {
                return HashParams::new(m, a);
            }
        }
    }

    /// Table size for `pixel_count` keys: the smallest prime at least twice the count.
    pub fn modulus_for(pixel_count: usize) -> u64 {
        next_prime((2 * pixel_count as u64).max(2))
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn coefficients(&self) -> [u64; 3] {
        self.a
    }
}

pub fn hash_color(x: Rgb8, p: &HashParams) -> u64 {
    let s: u64 = x
        .iter()
        .zip(&p.a)
        .map(|(&xi, &ai)| ai * xi as u64)
        .sum();
    s % p.m
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub(crate) fn next_prime(mut n: u64) -> u64 {
    while !is_prime(n) {
        n += 1;
    }
    n
}

/// Pixels at even row and even column indices, row-major.
pub fn subsample_2to1(img: &RawImage) -> Vec<Rgb8> {
    let mut out = Vec::with_capacity(img.width().div_ceil(2) * img.height().div_ceil(2));
    for row in (0..img.height()).step_by(2) {
        for col in (0..img.width()).step_by(2) {
            out.push(img.pixel(row, col));
        }
    }
    out
}

/// Collapses `pixels` into their distinct colors, in first-occurrence order.
pub fn build_histogram(pixels: &[Rgb8], seed: u64) -> Result<WeightedHistogram> {
    if pixels.is_empty() {
        return Err(Error::EmptyInput("pixel sequence"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = HashParams::random(HashParams::modulus_for(pixels.len()), &mut rng)?;
    let mut table = ColorTable::new(params);
    for &p in pixels {
        table.insert(p);
    }
    let (rgb, counts) = table.into_parts();
    Ok(WeightedHistogram::from_parts(rgb, counts))
}

/// How pixels are reduced before clustering.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SamplingMode {
    /// Every pixel, duplicates kept.
    #[serde(rename = "none")]
    None,
    /// Every second pixel in both directions, duplicates kept.
    #[serde(rename = "2to1")]
    TwoToOne,
    /// Unique colors of the full image, frequency-weighted.
    #[default]
    #[serde(rename = "unique")]
    Unique,
    /// Unique colors of the 2:1 subsample.
    #[serde(rename = "both")]
    Both,
}

impl SamplingMode {
    pub fn token(self) -> &'static str {
        match self {
            SamplingMode::None => "none",
            SamplingMode::TwoToOne => "2to1",
            SamplingMode::Unique => "unique",
            SamplingMode::Both => "both",
        }
    }

    pub fn subsamples(self) -> bool {
        matches!(self, SamplingMode::TwoToOne | SamplingMode::Both)
    }

    pub fn deduplicates(self) -> bool {
        matches!(self, SamplingMode::Unique | SamplingMode::Both)
    }

    /// The pixels this mode clusters over.
    pub fn sample(self, img: &RawImage) -> Vec<Rgb8> {
        if self.subsamples() {
            subsample_2to1(img)
        } else {
            img.pixels().to_vec()
        }
    }
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(SamplingMode::None),
            "2to1" => Ok(SamplingMode::TwoToOne),
            "unique" => Ok(SamplingMode::Unique),
            "both" => Ok(SamplingMode::Both),
            _ => Err(Error::InvalidToken {
                what: "sampling mode",
                token: s.to_owned(),
            }),
        }
    }
}

/// The clustering substrate produced by a sampling mode.
#[derive(Clone, Debug)]
pub enum Substrate {
    Histogram(WeightedHistogram),
    Points(PointSet),
}

impl Substrate {
    pub fn build(pixels: &[Rgb8], mode: SamplingMode, seed: u64) -> Result<Self> {
        if mode.deduplicates() {
            build_histogram(pixels, seed).map(Substrate::Histogram)
        } else {
            PointSet::from_pixels(pixels).map(Substrate::Points)
        }
    }
}

impl WeightedData for Substrate {
    fn points(&self) -> &[ColorPoint] {
        match self {
            Substrate::Histogram(h) => h.points(),
            Substrate::Points(p) => p.points(),
        }
    }

    fn weights(&self) -> &[f64] {
        match self {
            Substrate::Histogram(h) => h.weights(),
            Substrate::Points(p) => p.weights(),
        }
    }
}
