//! Wan's variance-based quantizer: split the box with the largest squared
//! error along its highest-variance channel, at the cut minimizing the
//! marginal squared error on that channel.

use crate::error::Result;

use super::coarse::{CoarseHistogram, ColorBox, SIDE};
use super::moments::{axes_by_variance, Moments};
use super::{check_k, PreclusterResult};

pub fn wan(ch: &CoarseHistogram, k: usize) -> Result<PreclusterResult> {
    check_k(k)?;
    let root = ColorBox::tight(ch, [0; 3], [SIDE - 1; 3]).expect("histogram is nonempty");
    let mut boxes = vec![root];
    while boxes.len() < k {
        let mut best: Option<usize> = None;
        for (i, b) in boxes.iter().enumerate() {
            if b.splittable() && best.map_or(true, |j| b.moments.sse() > boxes[j].moments.sse()) {
                best = Some(i);
            }
        }
        let Some(i) = best else { break };
        let b = boxes[i];
        let (axis, cut) = wan_cut(ch, &b).expect("a tight box with two bins spans some axis");
        let (left, right) = b.split(ch, axis, cut);
        boxes[i] = left;
        boxes.push(right);
    }
    Ok(PreclusterResult::from_centroids(boxes.iter().map(|b| b.moments.centroid()), k))
}

/// Picks the highest-variance channel with at least two populated slices and
/// the cut on it minimizing the one-dimensional squared error of both sides.
pub(crate) fn wan_cut(ch: &CoarseHistogram, b: &ColorBox) -> Option<(usize, usize)> {
    for axis in axes_by_variance(&b.moments) {
        let proj = ch.projection(b.lo, b.hi, axis);
        if proj.iter().filter(|m| m.weight > 0.0).count() < 2 {
            continue;
        }
        if let Some(off) = best_marginal_cut(&proj, axis) {
            return Some((axis, b.lo[axis] + off));
        }
    }
    None
}

/// Index of the last slice of the left side, minimizing the summed
/// one-dimensional squared error along `axis`. Ties go to the lower cut.
pub(crate) fn best_marginal_cut(proj: &[Moments], axis: usize) -> Option<usize> {
    let mut total = Moments::default();
    for m in proj {
        total.add(m);
    }
    let mut left = Moments::default();
    let mut best: Option<(usize, f64)> = None;
    for (t, m) in proj.iter().enumerate().take(proj.len().saturating_sub(1)) {
        left.add(m);
        let right = total.minus(&left);
        if left.weight <= 0.0 || right.weight <= 0.0 {
            continue;
        }
        let err = left.channel_sse(axis) + right.channel_sse(axis);
        if best.map_or(true, |(_, e)| err < e) {
            best = Some((t, err));
        }
    }
    best.map(|(t, _)| t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::ColorPoint;
    use crate::precluster::coarse::build_coarse_histogram;

    #[test]
    fn splits_on_the_varying_channel() {
        let px: Vec<_> = (0..10u8).map(|i| [i * 20, 77, 77]).collect();
        let ch = build_coarse_histogram(&px).unwrap();
        let root = ColorBox::tight(&ch, [0; 3], [31; 3]).unwrap();
        let (axis, _) = wan_cut(&ch, &root).unwrap();
        assert_eq!(axis, 0);
    }

    #[test]
    fn bimodal_cut_falls_in_the_gap() {
        // two symmetric modes around R = 40 and R = 200
        let mut px = Vec::new();
        for (v, n) in [(32u8, 3), (40, 5), (48, 3), (192, 3), (200, 5), (208, 3)] {
            px.extend(std::iter::repeat([v, 0, 0]).take(n));
        }
        let ch = build_coarse_histogram(&px).unwrap();
        let root = ColorBox::tight(&ch, [0; 3], [31; 3]).unwrap();
        let proj = ch.projection(root.lo, root.hi, 0);
        // brute force over every cut
        let mut errs = Vec::new();
        for t in 0..proj.len() - 1 {
            let (mut l, mut r) = (Moments::default(), Moments::default());
            for (i, m) in proj.iter().enumerate() {
                if i <= t { l.add(m) } else { r.add(m) }
            }
            if l.weight > 0.0 && r.weight > 0.0 {
                errs.push((l.channel_sse(0) + r.channel_sse(0), t));
            }
        }
        let best = errs.iter().fold((f64::INFINITY, 0), |a, &b| if b.0 < a.0 { b } else { a });
        let (axis, cut) = wan_cut(&ch, &root).unwrap();
        assert_eq!((axis, cut), (0, root.lo[0] + best.1));
        assert!(cut >= 6 && cut < 24, "cut {cut} is not in the gap");
        let r = wan(&ch, 2).unwrap();
        assert_eq!(r.palette.colors, vec![ColorPoint::new(40., 0., 0.), ColorPoint::new(200., 0., 0.)]);
    }

    #[test]
    fn k1_is_centroid() {
        let ch = build_coarse_histogram(&[[10, 20, 30], [30, 40, 50]]).unwrap();
        assert_eq!(wan(&ch, 1).unwrap().palette.colors, vec![ColorPoint::new(20., 30., 40.)]);
    }
}
