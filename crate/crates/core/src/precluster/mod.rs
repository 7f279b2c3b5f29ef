//! One-pass preclustering quantizers.
//!
//! Median-cut, Wan and Wu work on the 32³ [`CoarseHistogram`]; Otto and
//! binary splitting work on exact colors; the octree works on raw pixels.
//! Each returns a palette that may be used directly or as WSM seeds. When
//! the input cannot yield `k` distinct boxes the palette comes back shorter
//! with [`PreclusterResult::short`] set.

use std::fmt;
use std::str::FromStr;

use crate::color::{ColorPoint, Palette, Rgb8};
use crate::error::{Error, Result};
use crate::histogram::WeightedData;

pub mod binary_split;
pub mod coarse;
pub mod mediancut;
pub mod moments;
pub mod octree;
pub mod otto;
pub mod wan;
pub mod wu;

pub use binary_split::binary_split;
pub use coarse::{build_coarse_histogram, CoarseHistogram, ColorBox};
pub use mediancut::mediancut;
pub use octree::octree_quantize;
pub use otto::otto;
pub use wan::wan;
pub use wu::{wu, wu_traced, WuSplit};

#[derive(Clone, Debug, PartialEq)]
pub struct PreclusterResult {
    pub palette: Palette,
    /// Fewer than the requested number of colors could be produced.
    pub short: bool,
}

impl PreclusterResult {
    pub(crate) fn from_centroids(colors: impl IntoIterator<Item = ColorPoint>, k: usize) -> Self {
        let palette = Palette::new(colors.into_iter().collect());
        let short = palette.len() < k;
        PreclusterResult { palette, short }
    }
}

pub(crate) fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PreclusterMethod {
    MedianCut,
    Otto,
    Octree,
    Wan,
    Wu,
    BinarySplit,
}

impl PreclusterMethod {
    pub const ALL: [PreclusterMethod; 6] = [
        PreclusterMethod::MedianCut,
        PreclusterMethod::Otto,
        PreclusterMethod::Octree,
        PreclusterMethod::Wan,
        PreclusterMethod::Wu,
        PreclusterMethod::BinarySplit,
    ];

    pub fn token(self) -> &'static str {
        match self {
            PreclusterMethod::MedianCut => "mc",
            PreclusterMethod::Otto => "ott",
            PreclusterMethod::Octree => "oct",
            PreclusterMethod::Wan => "wan",
            PreclusterMethod::Wu => "wu",
            PreclusterMethod::BinarySplit => "bs",
        }
    }

    /// Whether the method needs `k` distinct input colors.
    pub fn needs_k_points(self) -> bool {
        matches!(self, PreclusterMethod::Otto | PreclusterMethod::BinarySplit)
    }

    /// Runs the method. `pixels` feeds the grid-based methods and the octree,
    /// `data` the exact-color ones.
    pub fn run<D: WeightedData + ?Sized>(self, pixels: &[Rgb8], data: &D, k: usize) -> Result<PreclusterResult> {
        match self {
            PreclusterMethod::MedianCut => mediancut(&build_coarse_histogram(pixels)?, k),
            PreclusterMethod::Wan => wan(&build_coarse_histogram(pixels)?, k),
            PreclusterMethod::Wu => wu(&build_coarse_histogram(pixels)?, k),
            PreclusterMethod::Octree => octree_quantize(pixels, k),
            PreclusterMethod::Otto => otto(data, k),
            PreclusterMethod::BinarySplit => binary_split(data, k),
        }
    }
}

impl fmt::Display for PreclusterMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for PreclusterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PreclusterMethod::ALL
            .into_iter()
            .find(|m| m.token() == s)
            .ok_or_else(|| Error::InvalidToken {
                what: "preclustering method",
                token: s.to_owned(),
            })
    }
}

/// Extends `centers` to `k` entries by farthest-first selection over `data`.
pub fn pad_with_maximin<D: WeightedData + ?Sized>(mut centers: Vec<ColorPoint>, data: &D, k: usize) -> Vec<ColorPoint> {
    let points = data.points();
    let mut mind: Vec<f64> = points
        .iter()
        .map(|x| centers.iter().map(|c| x.dist2(c)).fold(f64::INFINITY, f64::min))
        .collect();
    while centers.len() < k {
        let mut best: Option<usize> = None;
        for (i, &d) in mind.iter().enumerate() {
            if d > 0.0 && best.map_or(true, |b| d > mind[b]) {
                best = Some(i);
            }
        }
        let Some(b) = best else { break };
        let c = points[b];
        centers.push(c);
        for (m, x) in mind.iter_mut().zip(points) {
            *m = m.min(x.dist2(&c));
        }
    }
    centers
}
