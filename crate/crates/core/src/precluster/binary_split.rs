//! Orchard–Bouman binary splitting on exact colors.
//!
//! The cluster whose weighted covariance has the largest principal
//! eigenvalue is divided by the plane through its mean orthogonal to the
//! principal eigenvector.

use crate::color::ColorPoint;
use crate::error::{Error, Result};
use crate::histogram::WeightedData;

use super::moments::{axes_by_variance, Moments};
use super::{check_k, PreclusterResult};

const POWER_MAX_ITERS: usize = 100;
const POWER_TOL: f64 = 1e-9;

pub type Mat3 = [[f64; 3]; 3];

/// Principal eigenpair of a symmetric positive semidefinite matrix by power
/// iteration from `(1,1,1)/√3`. `None` if the iteration does not settle
/// within the budget or collapses to the zero vector.
pub fn power_iteration(m: &Mat3) -> Option<(f64, [f64; 3])> {
    let mut v = [1.0 / 3f64.sqrt(); 3];
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let w = mat_vec(m, &v);
        let norm = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        if !(norm > f64::MIN_POSITIVE) {
            return None;
        }
        let next = w.map(|x| x / norm);
        let rayleigh = dot(&next, &mat_vec(m, &next));
        let settled = (rayleigh - lambda).abs() <= POWER_TOL * rayleigh.abs();
        v = next;
        lambda = rayleigh;
        if settled {
            return Some((lambda, v));
        }
    }
    None
}

fn mat_vec(m: &Mat3, v: &[f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Weighted covariance of a point subset.
pub fn covariance(points: &[ColorPoint], weights: &[f64], members: &[usize]) -> (Mat3, ColorPoint, f64) {
    let mut m = Moments::default();
    for &i in members {
        m.add(&Moments::of_point(&points[i], weights[i]));
    }
    let mean = m.centroid();
    let mut cov = [[0.0; 3]; 3];
    for &i in members {
        let d = points[i] - mean;
        for a in 0..3 {
            for b in 0..3 {
                cov[a][b] += weights[i] * d[a] * d[b];
            }
        }
    }
    for row in cov.iter_mut() {
        for v in row.iter_mut() {
            *v /= m.weight;
        }
    }
    (cov, mean, m.weight)
}

struct Cluster {
    members: Vec<usize>,
    mean: ColorPoint,
    /// Principal eigenvalue (or the largest channel variance on fallback).
    lambda: f64,
    direction: [f64; 3],
    moments: Moments,
}

impl Cluster {
    fn new(members: Vec<usize>, points: &[ColorPoint], weights: &[f64]) -> Self {
        let (cov, mean, _) = covariance(points, weights, &members);
        let mut moments = Moments::default();
        for &i in &members {
            moments.add(&Moments::of_point(&points[i], weights[i]));
        }
        let (lambda, direction) = power_iteration(&cov).unwrap_or_else(|| {
            let axis = axes_by_variance(&moments)[0];
            let mut e = [0.0; 3];
            e[axis] = 1.0;
            (cov[axis][axis], e)
        });
        Cluster {
            members,
            mean,
            lambda,
            direction,
            moments,
        }
    }
}

/// Median split on the highest-variance channel that has two distinct values.
fn fallback_split(members: &[usize], moments: &Moments, points: &[ColorPoint], weights: &[f64]) -> Option<(Vec<usize>, Vec<usize>)> {
    for axis in axes_by_variance(moments) {
        let mut sorted = members.to_vec();
        sorted.sort_by(|&a, &b| points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b)));
        let (lo, hi) = (points[sorted[0]][axis], points[*sorted.last().unwrap()][axis]);
        if lo == hi {
            continue;
        }
        let half = moments.weight / 2.0;
        let mut acc = 0.0;
        let mut median = lo;
        for &i in &sorted {
            acc += weights[i];
            if acc >= half {
                median = points[i][axis];
                break;
            }
        }
        let threshold = if median < hi { median } else { prev_distinct(&sorted, points, axis, hi) };
        return Some(members.iter().partition(|&&i| points[i][axis] <= threshold));
    }
    None
}

/// Largest value strictly below `hi` on `axis`.
fn prev_distinct(sorted: &[usize], points: &[ColorPoint], axis: usize, hi: f64) -> f64 {
    sorted
        .iter()
        .rev()
        .map(|&i| points[i][axis])
        .find(|&v| v < hi)
        .unwrap_or(hi)
}

pub fn binary_split<D: WeightedData + ?Sized>(data: &D, k: usize) -> Result<PreclusterResult> {
    check_k(k)?;
    if k > data.len() {
        return Err(Error::TooManyClusters {
            k,
            available: data.len(),
        });
    }
    let (points, weights) = (data.points(), data.weights());
    let mut clusters = vec![Cluster::new((0..data.len()).collect(), points, weights)];
    let mut frozen = vec![false];
    while clusters.len() < k {
        let mut pick: Option<usize> = None;
        for (i, c) in clusters.iter().enumerate() {
            if frozen[i] || c.members.len() < 2 {
                continue;
            }
            if pick.map_or(true, |j| c.lambda > clusters[j].lambda) {
                pick = Some(i);
            }
        }
        let Some(i) = pick else { break };
        let c = &clusters[i];
        let (mut left, mut right): (Vec<usize>, Vec<usize>) = c
            .members
            .iter()
            .partition(|&&m| dot(&(points[m] - c.mean).0, &c.direction) <= 0.0);
        if left.is_empty() || right.is_empty() {
            match fallback_split(&c.members, &c.moments, points, weights) {
                Some((l, r)) => (left, right) = (l, r),
                None => {
                    frozen[i] = true;
                    continue;
                }
            }
        }
        clusters[i] = Cluster::new(left, points, weights);
        frozen[i] = false;
        clusters.push(Cluster::new(right, points, weights));
        frozen.push(false);
    }
    Ok(PreclusterResult::from_centroids(clusters.iter().map(|c| c.mean), k))
}
