use crate::color::ColorPoint;

/// Zeroth, first and per-channel second moments of a weighted point set.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub weight: f64,
    pub sum: [f64; 3],
    pub sumsq: [f64; 3],
}

impl Moments {
    pub fn of_point(x: &ColorPoint, w: f64) -> Self {
        Moments {
            weight: w,
            sum: [w * x[0], w * x[1], w * x[2]],
            sumsq: [w * x[0] * x[0], w * x[1] * x[1], w * x[2] * x[2]],
        }
    }

    pub fn add(&mut self, o: &Moments) {
        self.weight += o.weight;
        for c in 0..3 {
            self.sum[c] += o.sum[c];
            self.sumsq[c] += o.sumsq[c];
        }
    }

    pub fn minus(&self, o: &Moments) -> Moments {
        Moments {
            weight: self.weight - o.weight,
            sum: [0, 1, 2].map(|c| self.sum[c] - o.sum[c]),
            sumsq: [0, 1, 2].map(|c| self.sumsq[c] - o.sumsq[c]),
        }
    }

    /// Squared deviation from the centroid along one channel.
    pub fn channel_sse(&self, c: usize) -> f64 {
        if self.weight <= 0.0 {
            return 0.0;
        }
        (self.sumsq[c] - self.sum[c] * self.sum[c] / self.weight).max(0.0)
    }

    /// Total squared deviation from the centroid.
    pub fn sse(&self) -> f64 {
        (0..3).map(|c| self.channel_sse(c)).sum()
    }

    pub fn variance(&self, c: usize) -> f64 {
        if self.weight <= 0.0 {
            0.0
        } else {
            self.channel_sse(c) / self.weight
        }
    }

    pub fn centroid(&self) -> ColorPoint {
        ColorPoint(self.sum.map(|s| s / self.weight))
    }
}

/// Channels ordered by decreasing variance, ties to the lower channel.
pub(crate) fn axes_by_variance(m: &Moments) -> [usize; 3] {
    let mut axes = [0, 1, 2];
    axes.sort_by(|&a, &b| m.variance(b).total_cmp(&m.variance(a)).then(a.cmp(&b)));
    axes
}
