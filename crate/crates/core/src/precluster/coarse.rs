//! The 32×32×32 color histogram shared by median-cut, Wan and Wu.

use crate::color::Rgb8;
use crate::error::{Error, Result};

use super::moments::Moments;

pub const SIDE: usize = 32;

/// Statistics of one 5-bit-per-channel bin, in original color units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BinStats {
    pub count: u64,
    pub sum: [u64; 3],
    pub sumsq: [u64; 3],
}

impl BinStats {
    pub fn moments(&self) -> Moments {
        Moments {
            weight: self.count as f64,
            sum: self.sum.map(|v| v as f64),
            sumsq: self.sumsq.map(|v| v as f64),
        }
    }

    /// Sum of squared norms of the member colors.
    pub fn sum_squared_norms(&self) -> u64 {
        self.sumsq.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoarseHistogram {
    bins: Vec<BinStats>,
    total: u64,
}

/// The bin holding `c`: the top five bits of each channel.
pub fn bin_of(c: Rgb8) -> [usize; 3] {
    c.map(|v| (v >> 3) as usize)
}

#[inline]
pub(crate) fn flat(b: [usize; 3]) -> usize {
    (b[0] * SIDE + b[1]) * SIDE + b[2]
}

impl CoarseHistogram {
    pub fn from_counts(entries: impl IntoIterator<Item = (Rgb8, u64)>) -> Result<Self> {
        let mut bins = vec![BinStats::default(); SIDE * SIDE * SIDE];
        let mut total = 0;
        for (c, n) in entries {
            let b = &mut bins[flat(bin_of(c))];
            b.count += n;
            for ch in 0..3 {
                let v = c[ch] as u64;
                b.sum[ch] += n * v;
                b.sumsq[ch] += n * v * v;
            }
            total += n;
        }
        if total == 0 {
            return Err(Error::EmptyInput("coarse histogram"));
        }
        Ok(CoarseHistogram { bins, total })
    }

    pub fn bin(&self, b: [usize; 3]) -> &BinStats {
        &self.bins[flat(b)]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn nonempty_bins(&self) -> usize {
        self.bins.iter().filter(|b| b.count > 0).count()
    }

    /// Moments of the inclusive bin box `[lo, hi]`.
    pub fn box_moments(&self, lo: [usize; 3], hi: [usize; 3]) -> Moments {
        let mut m = Moments::default();
        self.for_each_bin(lo, hi, |_, b| m.add(&b.moments()));
        m
    }

    /// Per-slice moments along `axis`, indexed from `lo[axis]`.
    pub fn projection(&self, lo: [usize; 3], hi: [usize; 3], axis: usize) -> Vec<Moments> {
        let mut out = vec![Moments::default(); hi[axis] - lo[axis] + 1];
        self.for_each_bin(lo, hi, |pos, b| out[pos[axis] - lo[axis]].add(&b.moments()));
        out
    }

    /// Smallest box inside `[lo, hi]` holding all of its nonempty bins, with
    /// the number of nonempty bins. `None` if the box is empty.
    pub fn shrink(&self, lo: [usize; 3], hi: [usize; 3]) -> Option<([usize; 3], [usize; 3], usize)> {
        let mut nlo = [usize::MAX; 3];
        let mut nhi = [0usize; 3];
        let mut n = 0;
        self.for_each_bin(lo, hi, |pos, _| {
            n += 1;
            for c in 0..3 {
                nlo[c] = nlo[c].min(pos[c]);
                nhi[c] = nhi[c].max(pos[c]);
            }
        });
        (n > 0).then_some((nlo, nhi, n))
    }

    /// Visits nonempty bins of `[lo, hi]`.
    fn for_each_bin(&self, lo: [usize; 3], hi: [usize; 3], mut f: impl FnMut([usize; 3], &BinStats)) {
        for r in lo[0]..=hi[0] {
            for g in lo[1]..=hi[1] {
                let base = (r * SIDE + g) * SIDE;
                for b in lo[2]..=hi[2] {
                    let s = &self.bins[base + b];
                    if s.count > 0 {
                        f([r, g, b], s);
                    }
                }
            }
        }
    }
}

pub fn build_coarse_histogram(pixels: &[Rgb8]) -> Result<CoarseHistogram> {
    CoarseHistogram::from_counts(pixels.iter().map(|&p| (p, 1)))
}

/// An axis-aligned box of bins with cached moments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColorBox {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
    pub moments: Moments,
    pub nonempty_bins: usize,
}

impl ColorBox {
    pub(crate) fn tight(ch: &CoarseHistogram, lo: [usize; 3], hi: [usize; 3]) -> Option<Self> {
        let (lo, hi, n) = ch.shrink(lo, hi)?;
        Some(ColorBox {
            lo,
            hi,
            moments: ch.box_moments(lo, hi),
            nonempty_bins: n,
        })
    }

    pub fn splittable(&self) -> bool {
        self.nonempty_bins >= 2
    }

    /// Splits after slice `cut` (absolute bin coordinate) on `axis`.
    pub(crate) fn split(&self, ch: &CoarseHistogram, axis: usize, cut: usize) -> (ColorBox, ColorBox) {
        let mut left_hi = self.hi;
        left_hi[axis] = cut;
        let mut right_lo = self.lo;
        right_lo[axis] = cut + 1;
        let left = ColorBox::tight(ch, self.lo, left_hi).expect("cut leaves the left side nonempty");
        let right = ColorBox::tight(ch, right_lo, self.hi).expect("cut leaves the right side nonempty");
        (left, right)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_by_bit_shift() {
        assert_eq!(bin_of([0, 0, 0]), [0, 0, 0]);
        assert_eq!(bin_of([255, 255, 255]), [31, 31, 31]);
        assert_eq!(bin_of([7, 8, 15]), [0, 1, 1]);
    }

    #[test]
    fn single_color_has_one_bin() {
        let ch = build_coarse_histogram(&[[9, 9, 9]; 10]).unwrap();
        assert_eq!(ch.nonempty_bins(), 1);
        assert_eq!(ch.total(), 10);
        let b = ch.bin([1, 1, 1]);
        assert_eq!(b.count, 10);
        assert_eq!(b.sum, [90; 3]);
        assert_eq!(b.sum_squared_norms(), 10 * 3 * 81);
        assert!(build_coarse_histogram(&[]).is_err());
    }

    #[test]
    fn shrink_and_moments() {
        let ch = build_coarse_histogram(&[[16, 0, 0], [64, 8, 0], [64, 8, 0]]).unwrap();
        let (lo, hi, n) = ch.shrink([0; 3], [31; 3]).unwrap();
        assert_eq!((lo, hi, n), ([2, 0, 0], [8, 1, 0], 2));
        let m = ch.box_moments(lo, hi);
        assert_eq!(m.weight, 3.0);
        assert_eq!(m.centroid().0, [48.0, 16.0 / 3.0, 0.0]);
        let proj = ch.projection(lo, hi, 0);
        assert_eq!(proj.len(), 7);
        assert_eq!(proj[0].weight, 1.0);
        assert_eq!(proj[6].weight, 2.0);
    }
}
