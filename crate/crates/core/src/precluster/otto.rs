//! Otto's method: divisive splitting on exact colors. Each step performs the
//! single split, over all boxes, axes and cut positions, that most reduces
//! the total squared deviation.

use crate::color::ColorPoint;
use crate::error::{Error, Result};
use crate::histogram::WeightedData;

use super::moments::Moments;
use super::{check_k, PreclusterResult};

#[derive(Clone, Copy, Debug)]
struct Split {
    decrease: f64,
    axis: usize,
    /// Members with a coordinate at or below this go left.
    threshold: f64,
}

struct Cell {
    members: Vec<usize>,
    moments: Moments,
    best: Option<Split>,
}

impl Cell {
    fn new(members: Vec<usize>, points: &[ColorPoint], weights: &[f64]) -> Self {
        let mut moments = Moments::default();
        for &i in &members {
            moments.add(&Moments::of_point(&points[i], weights[i]));
        }
        let best = best_split(&members, &moments, points, weights);
        Cell {
            members,
            moments,
            best,
        }
    }
}

/// Exhaustive search over axes and distinct cut positions using sorted
/// projections and prefix moments. Ties go to the lower axis, then the lower cut.
fn best_split(members: &[usize], total: &Moments, points: &[ColorPoint], weights: &[f64]) -> Option<Split> {
    if members.len() < 2 {
        return None;
    }
    let parent = total.sse();
    let mut best: Option<(f64, usize, f64)> = None;
    let mut sorted = members.to_vec();
    for axis in 0..3 {
        sorted.sort_by(|&a, &b| points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b)));
        let mut left = Moments::default();
        for j in 0..sorted.len() - 1 {
            let i = sorted[j];
            left.add(&Moments::of_point(&points[i], weights[i]));
            let v = points[i][axis];
            if v == points[sorted[j + 1]][axis] {
                continue;
            }
            let cost = left.sse() + total.minus(&left).sse();
            if best.map_or(true, |(c, _, _)| cost < c) {
                best = Some((cost, axis, v));
            }
        }
    }
    best.map(|(cost, axis, threshold)| Split {
        decrease: parent - cost,
        axis,
        threshold,
    })
}

pub fn otto<D: WeightedData + ?Sized>(data: &D, k: usize) -> Result<PreclusterResult> {
    check_k(k)?;
    if k > data.len() {
        return Err(Error::TooManyClusters {
            k,
            available: data.len(),
        });
    }
    let (points, weights) = (data.points(), data.weights());
    let mut cells = vec![Cell::new((0..data.len()).collect(), points, weights)];
    while cells.len() < k {
        let mut pick: Option<usize> = None;
        for (i, c) in cells.iter().enumerate() {
            let Some(s) = c.best else { continue };
            if pick.map_or(true, |j| s.decrease > cells[j].best.unwrap().decrease) {
                pick = Some(i);
            }
        }
        let Some(i) = pick else { break };
        let split = cells[i].best.unwrap();
        let (left, right): (Vec<usize>, Vec<usize>) = cells[i]
            .members
            .iter()
            .partition(|&&m| points[m][split.axis] <= split.threshold);
        cells[i] = Cell::new(left, points, weights);
        cells.push(Cell::new(right, points, weights));
    }
    Ok(PreclusterResult::from_centroids(cells.iter().map(|c| c.moments.centroid()), k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::{build_histogram, PointSet};
    use crate::kmeans::compute_sse;

    #[test]
    fn exhaustion_reaches_zero_error() {
        let h = build_histogram(&[[1, 2, 3], [1, 2, 3], [9, 9, 9], [200, 0, 7], [5, 250, 5]], 0).unwrap();
        let r = otto(&h, h.len()).unwrap();
        let mut got = r.palette.colors.clone();
        let mut want = h.colors().to_vec();
        let key = |a: &ColorPoint, b: &ColorPoint| a.0.partial_cmp(&b.0).unwrap();
        got.sort_by(key);
        want.sort_by(key);
        for (g, w) in got.iter().zip(&want) {
            assert!(g.dist2(w) < 1e-18, "{g:?} vs {w:?}");
        }
        assert_eq!(got.len(), want.len());
        assert!(matches!(otto(&h, 5), Err(Error::TooManyClusters { .. })));
    }

    #[test]
    fn cuts_between_separated_clusters() {
        let mut pts = Vec::new();
        for i in 0..5 {
            pts.push(ColorPoint::new(10.0 + i as f64, 100.0, 100.0));
            pts.push(ColorPoint::new(60.0 + i as f64, 100.0 + i as f64, 100.0));
        }
        let data = PointSet::new(pts.clone(), vec![0.1; 10]).unwrap();
        let r = otto(&data, 2).unwrap();

        // brute force: best axis-aligned threshold over all axes and values
        let mut best = f64::INFINITY;
        for axis in 0..3 {
            for t in pts.iter().map(|p| p[axis]) {
                let (l, rr): (Vec<_>, Vec<_>) = (0..10).partition(|&i| pts[i][axis] <= t);
                if l.is_empty() || rr.is_empty() {
                    continue;
                }
                let cost = |ix: &[usize]| {
                    let c = ix.iter().fold(ColorPoint::default(), |a, &i| a + pts[i]) * (1.0 / ix.len() as f64);
                    ix.iter().map(|&i| 0.1 * pts[i].dist2(&c)).sum::<f64>()
                };
                best = best.min(cost(&l) + cost(&rr));
            }
        }
        let mut ndc = 0;
        let m: Vec<_> = pts
            .iter()
            .map(|x| crate::kmeans::assign_point_full(x, &r.palette.colors, &mut ndc).0)
            .collect();
        let got = compute_sse(&data, &r.palette.colors, &m);
        assert!((got - best).abs() < 1e-9, "{got} vs {best}");
        assert!(r.palette.colors[0][0] < 20.0 && r.palette.colors[1][0] > 55.0);
    }

    #[test]
    fn k1_is_weighted_centroid() {
        let data = PointSet::new(
            vec![ColorPoint::new(0., 0., 0.), ColorPoint::new(8., 4., 0.)],
            vec![0.75, 0.25],
        )
        .unwrap();
        assert_eq!(otto(&data, 1).unwrap().palette.colors, vec![ColorPoint::new(2., 1., 0.)]);
    }
}
