//! Color points and palettes.

use std::ops::{Add, Index, Mul, Sub};

/// An 8-bit RGB triple.
pub type Rgb8 = [u8; 3];

/// A real-valued RGB color on the 0..=255 scale.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ColorPoint(pub [f64; 3]);

impl ColorPoint {
    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        ColorPoint([r, g, b])
    }

    pub fn from_rgb8(c: Rgb8) -> Self {
        ColorPoint([c[0] as f64, c[1] as f64, c[2] as f64])
    }

    /// Squared Euclidean distance.
    #[inline]
    pub fn dist2(&self, other: &ColorPoint) -> f64 {
        let dr = self.0[0] - other.0[0];
        let dg = self.0[1] - other.0[1];
        let db = self.0[2] - other.0[2];
        dr * dr + dg * dg + db * db
    }

    #[inline]
    pub fn dot(&self, other: &ColorPoint) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm2(&self) -> f64 {
        self.dot(self)
    }

    /// Round half up, then clamp to `[0, 255]`.
    pub fn to_rgb8(&self) -> Rgb8 {
        self.0.map(round_channel)
    }
}

pub(crate) fn round_channel(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

impl Index<usize> for ColorPoint {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for ColorPoint {
    type Output = ColorPoint;

    fn add(self, rhs: ColorPoint) -> ColorPoint {
        ColorPoint([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl Sub for ColorPoint {
    type Output = ColorPoint;

    fn sub(self, rhs: ColorPoint) -> ColorPoint {
        ColorPoint([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1], self.0[2] - rhs.0[2]])
    }
}

impl Mul<f64> for ColorPoint {
    type Output = ColorPoint;

    fn mul(self, s: f64) -> ColorPoint {
        ColorPoint(self.0.map(|v| v * s))
    }
}

impl From<Rgb8> for ColorPoint {
    fn from(c: Rgb8) -> Self {
        ColorPoint::from_rgb8(c)
    }
}

/// An ordered list of representative colors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Palette {
    pub colors: Vec<ColorPoint>,
}

impl Palette {
    pub fn new(colors: Vec<ColorPoint>) -> Self {
        Palette { colors }
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// The 8-bit render form of every entry.
    pub fn to_rgb8(&self) -> Vec<Rgb8> {
        self.colors.iter().map(ColorPoint::to_rgb8).collect()
    }
}

impl From<Vec<ColorPoint>> for Palette {
    fn from(colors: Vec<ColorPoint>) -> Self {
        Palette { colors }
    }
}
