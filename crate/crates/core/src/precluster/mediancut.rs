//! Median-cut: repeatedly halve the most populated box along its longest side.

use crate::error::Result;

use super::coarse::{CoarseHistogram, ColorBox, SIDE};
use super::{check_k, PreclusterResult};

pub fn mediancut(ch: &CoarseHistogram, k: usize) -> Result<PreclusterResult> {
    check_k(k)?;
    let root = ColorBox::tight(ch, [0; 3], [SIDE - 1; 3]).expect("histogram is nonempty");
    let mut boxes = vec![root];
    while boxes.len() < k {
        let Some(i) = most_populated(&boxes) else { break };
        let b = boxes[i];
        let axis = longest_axis(&b);
        let proj = ch.projection(b.lo, b.hi, axis);
        let total = b.moments.weight;
        let mut acc = 0.0;
        let mut cut = b.lo[axis];
        for (off, m) in proj.iter().enumerate() {
            acc += m.weight;
            if 2.0 * acc >= total {
                cut = b.lo[axis] + off;
                break;
            }
        }
        // the top slice is nonempty in a tight box, so cutting below it keeps both sides populated
        let cut = cut.min(b.hi[axis] - 1);
        let (left, right) = b.split(ch, axis, cut);
        boxes[i] = left;
        boxes.push(right);
    }
    Ok(PreclusterResult::from_centroids(boxes.iter().map(|b| b.moments.centroid()), k))
}

fn most_populated(boxes: &[ColorBox]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, b) in boxes.iter().enumerate() {
        if b.splittable() && best.map_or(true, |j| b.moments.weight > boxes[j].moments.weight) {
            best = Some(i);
        }
    }
    best
}

/// Longest side in bins; ties prefer R, then G.
fn longest_axis(b: &ColorBox) -> usize {
    (0..3).fold(0, |best, a| if b.hi[a] - b.lo[a] > b.hi[best] - b.lo[best] { a } else { best })
}
