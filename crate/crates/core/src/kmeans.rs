//! Batch k-means: the conventional full-search iteration and Weighted Sort-Means.
//!
//! Both share one driver. Each iteration assigns every point to its nearest
//! center, repairs empty clusters, recomputes centers as weighted means and
//! records the SSE. They differ only in how the nearest center is found:
//! [`kmeans_full`] scans every center, while [`wsm`] walks the centers in
//! increasing distance from the point's previous center and stops once the
//! triangle inequality rules out every remaining one.

use serde::{Deserialize, Serialize};

use crate::color::ColorPoint;
use crate::error::{Error, Result};
use crate::histogram::WeightedData;

/// When to stop iterating.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Termination {
    /// Stop once `(sse_prev - sse_cur) / sse_cur <= epsilon`.
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Run exactly this many iterations, ignoring `epsilon`.
    pub fixed_iterations: Option<usize>,
}

impl Default for Termination {
    fn default() -> Self {
        Termination {
            epsilon: 0.001,
            max_iterations: 100,
            fixed_iterations: None,
        }
    }
}

impl Termination {
    pub fn new(epsilon: f64, max_iterations: usize) -> Result<Self> {
        let t = Termination {
            epsilon,
            max_iterations,
            fixed_iterations: None,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn fixed(iterations: usize) -> Self {
        Termination {
            epsilon: 0.0,
            max_iterations: iterations.max(1),
            fixed_iterations: Some(iterations.max(1)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be non-negative, got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 || self.fixed_iterations == Some(0) {
            return Err(Error::InvalidParameter("iteration cap must be at least 1".into()));
        }
        Ok(())
    }

    fn cap(&self) -> usize {
        self.fixed_iterations.unwrap_or(self.max_iterations)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convergence {
    Continue,
    Stop,
}

/// Relative-decrease stopping rule. A zero SSE always stops.
pub fn check_convergence(sse_prev: f64, sse_cur: f64, epsilon: f64) -> Convergence {
    if sse_cur <= 0.0 || (sse_prev - sse_cur) / sse_cur <= epsilon {
        Convergence::Stop
    } else {
        Convergence::Continue
    }
}

/// Result of a clustering run.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterState {
    pub centers: Vec<ColorPoint>,
    /// Center index of each input point.
    pub memberships: Vec<usize>,
    /// SSE after each iteration's center update.
    pub sse_trace: Vec<f64>,
    pub iterations: usize,
    /// Point-to-center distance evaluations over all assignment phases.
    pub ndc_total: u64,
    /// Distance evaluations per iteration.
    pub ndc_trace: Vec<u64>,
    /// Empty clusters re-seeded over the run.
    pub repairs: usize,
}

impl ClusterState {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn final_sse(&self) -> f64 {
        self.sse_trace.last().copied().unwrap_or(f64::NAN)
    }

    /// Mean number of distance evaluations per point per iteration.
    pub fn ndc_per_point_iteration(&self) -> f64 {
        if self.iterations == 0 || self.memberships.is_empty() {
            return 0.0;
        }
        self.ndc_total as f64 / (self.memberships.len() as f64 * self.iterations as f64)
    }
}

/// Pairwise squared center distances, plus each row's centers sorted by
/// increasing distance (self first, ties to the lower index).
#[derive(Clone, Debug, PartialEq)]
pub struct CenterDistanceTable {
    k: usize,
    dist2: Vec<f64>,
    order: Vec<u32>,
}

impl CenterDistanceTable {
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn dist2(&self, i: usize, j: usize) -> f64 {
        self.dist2[i * self.k + j]
    }

    #[inline]
    pub fn order(&self, i: usize) -> &[u32] {
        &self.order[i * self.k..(i + 1) * self.k]
    }
}

pub fn build_center_distance_table(centers: &[ColorPoint]) -> CenterDistanceTable {
    let k = centers.len();
    let mut dist2 = vec![0.0; k * k];
    for i in 0..k {
        for j in i + 1..k {
            let d = centers[i].dist2(&centers[j]);
            dist2[i * k + j] = d;
            dist2[j * k + i] = d;
        }
    }
    let mut order = Vec::with_capacity(k * k);
    let mut row: Vec<u32> = Vec::with_capacity(k);
    for i in 0..k {
        row.clear();
        row.extend(0..k as u32);
        let d = &dist2[i * k..(i + 1) * k];
        row.sort_by(|&a, &b| {
            let (a, b) = (a as usize, b as usize);
            d[a].total_cmp(&d[b])
                .then_with(|| (a != i).cmp(&(b != i)))
                .then_with(|| a.cmp(&b))
        });
        order.extend_from_slice(&row);
    }
    CenterDistanceTable { k, dist2, order }
}

/// Full search; ties go to the lower index.
#[inline]
pub fn assign_point_full(x: &ColorPoint, centers: &[ColorPoint], counter: &mut u64) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = x.dist2(&centers[0]);
    for (j, c) in centers.iter().enumerate().skip(1) {
        let d = x.dist2(c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    *counter += centers.len() as u64;
    (best, best_d)
}

/// Sort-means search starting from the previous center `prev`.
///
/// Candidates are visited in increasing distance from `centers[prev]`; once a
/// candidate `t` satisfies `d²(c_prev, c_t) >= 4·d²(x, c_prev)` no remaining
/// center can be closer than `c_prev`. A candidate replaces the incumbent only
/// on strict improvement.
#[inline]
pub fn assign_point_sortmeans(
    x: &ColorPoint,
    prev: usize,
    table: &CenterDistanceTable,
    centers: &[ColorPoint],
    counter: &mut u64,
) -> (usize, f64) {
    let prev_dist = x.dist2(&centers[prev]);
    *counter += 1;
    let cutoff = 4.0 * prev_dist;
    let mut best = prev;
    let mut min_dist = prev_dist;
    for &t in &table.order(prev)[1..] {
        let t = t as usize;
        if table.dist2(prev, t) >= cutoff {
            break;
        }
        let d = x.dist2(&centers[t]);
        *counter += 1;
        if d < min_dist {
            min_dist = d;
            best = t;
        }
    }
    (best, min_dist)
}

/// Σ wᵢ·‖xᵢ − c_{m[i]}‖².
pub fn compute_sse<D: WeightedData + ?Sized>(
    data: &D,
    centers: &[ColorPoint],
    memberships: &[usize],
) -> f64 {
    data.points()
        .iter()
        .zip(data.weights())
        .zip(memberships)
        .map(|((x, &w), &m)| w * x.dist2(&centers[m]))
        .sum()
}

/// Re-seeds every empty cluster with the point contributing most to the SSE
/// (largest `w·d²` to its current center), taken from a cluster that keeps at
/// least one member. Returns the number of clusters repaired.
pub fn repair_empty_clusters<D: WeightedData + ?Sized>(state: &mut ClusterState, data: &D) -> usize {
    let k = state.centers.len();
    let mut sizes = vec![0usize; k];
    for &m in &state.memberships {
        sizes[m] += 1;
    }
    if sizes.iter().all(|&s| s > 0) {
        return 0;
    }
    let points = data.points();
    let mut contrib: Vec<f64> = points
        .iter()
        .zip(data.weights())
        .zip(&state.memberships)
        .map(|((x, &w), &m)| w * x.dist2(&state.centers[m]))
        .collect();
    let mut repaired = 0;
    for e in 0..k {
        if sizes[e] > 0 {
            continue;
        }
        let mut donor: Option<usize> = None;
        for (i, &c) in contrib.iter().enumerate() {
            if sizes[state.memberships[i]] < 2 {
                continue;
            }
            if donor.map_or(true, |d| c > contrib[d]) {
                donor = Some(i);
            }
        }
        let Some(i) = donor else {
            log::warn!("cannot repair empty cluster {e}: no cluster has a spare member");
            break;
        };
        sizes[state.memberships[i]] -= 1;
        sizes[e] = 1;
        state.memberships[i] = e;
        state.centers[e] = points[i];
        contrib[i] = 0.0;
        repaired += 1;
    }
    state.repairs += repaired;
    repaired
}

/// Snapshot handed to observers right after each assignment phase.
pub struct AssignmentView<'a> {
    pub iteration: usize,
    /// Centers the points were assigned against.
    pub centers: &'a [ColorPoint],
    pub memberships: &'a [usize],
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Search {
    Full,
    SortMeans,
}

fn recompute_centers(points: &[ColorPoint], weights: &[f64], state: &mut ClusterState) {
    let k = state.centers.len();
    let mut sums = vec![[0.0f64; 3]; k];
    let mut totals = vec![0.0f64; k];
    for ((x, &w), &m) in points.iter().zip(weights).zip(&state.memberships) {
        let s = &mut sums[m];
        s[0] += w * x[0];
        s[1] += w * x[1];
        s[2] += w * x[2];
        totals[m] += w;
    }
    for (c, (s, t)) in state.centers.iter_mut().zip(sums.iter().zip(&totals)) {
        if *t > 0.0 {
            *c = ColorPoint(s.map(|v| v / t));
        }
    }
}

fn run<D, F>(
    data: &D,
    init: &[ColorPoint],
    term: &Termination,
    search: Search,
    sse_scale: f64,
    mut observer: F,
) -> Result<ClusterState>
where
    D: WeightedData + ?Sized,
    F: FnMut(&AssignmentView<'_>),
{
    term.validate()?;
    let n = data.len();
    let k = init.len();
    if k == 0 {
        return Err(Error::InvalidParameter("at least one initial center is required".into()));
    }
    if k > n {
        return Err(Error::TooManyClusters { k, available: n });
    }
    let points = data.points();
    let weights = data.weights();
    let mut state = ClusterState {
        centers: init.to_vec(),
        memberships: vec![0; n],
        sse_trace: Vec::new(),
        iterations: 0,
        ndc_total: 0,
        ndc_trace: Vec::new(),
        repairs: 0,
    };
    for iteration in 1..=term.cap() {
        let mut ndc = 0u64;
        if iteration == 1 || search == Search::Full {
            for (x, m) in points.iter().zip(state.memberships.iter_mut()) {
                *m = assign_point_full(x, &state.centers, &mut ndc).0;
            }
        } else {
            let table = build_center_distance_table(&state.centers);
            for (x, m) in points.iter().zip(state.memberships.iter_mut()) {
                *m = assign_point_sortmeans(x, *m, &table, &state.centers, &mut ndc).0;
            }
        }
        observer(&AssignmentView {
            iteration,
            centers: &state.centers,
            memberships: &state.memberships,
        });
        repair_empty_clusters(&mut state, data);
        recompute_centers(points, weights, &mut state);
        let sse = compute_sse(data, &state.centers, &state.memberships) * sse_scale;
        state.ndc_total += ndc;
        state.ndc_trace.push(ndc);
        state.iterations = iteration;
        let prev = state.sse_trace.last().copied();
        state.sse_trace.push(sse);
        if term.fixed_iterations.is_some() {
            continue;
        }
        let stop = match prev {
            Some(prev) => check_convergence(prev, sse, term.epsilon) == Convergence::Stop,
            None => sse <= 0.0,
        };
        if stop {
            break;
        }
    }
    Ok(state)
}

struct UnitWeights<'a> {
    points: &'a [ColorPoint],
    ones: Vec<f64>,
}

impl WeightedData for UnitWeights<'_> {
    fn points(&self) -> &[ColorPoint] {
        self.points
    }

    fn weights(&self) -> &[f64] {
        &self.ones
    }
}

/// Conventional k-means over unweighted points. Every assignment is a full
/// search. The recorded SSE is divided by the point count, so it is directly
/// comparable with [`wsm`] on a normalized histogram.
pub fn kmeans_full(points: &[ColorPoint], init: &[ColorPoint], term: &Termination) -> Result<ClusterState> {
    kmeans_full_observed(points, init, term, |_| {})
}

pub fn kmeans_full_observed<F>(
    points: &[ColorPoint],
    init: &[ColorPoint],
    term: &Termination,
    observer: F,
) -> Result<ClusterState>
where
    F: FnMut(&AssignmentView<'_>),
{
    let data = UnitWeights {
        points,
        ones: vec![1.0; points.len()],
    };
    let scale = 1.0 / points.len().max(1) as f64;
    run(&data, init, term, Search::Full, scale, observer)
}

/// Weighted Sort-Means. The first iteration uses full search because no
/// previous membership exists yet.
pub fn wsm<D: WeightedData + ?Sized>(data: &D, init: &[ColorPoint], term: &Termination) -> Result<ClusterState> {
    wsm_observed(data, init, term, |_| {})
}

/// [`wsm`] with a callback after every assignment phase.
pub fn wsm_observed<D, F>(data: &D, init: &[ColorPoint], term: &Termination, observer: F) -> Result<ClusterState>
where
    D: WeightedData + ?Sized,
    F: FnMut(&AssignmentView<'_>),
{
    run(data, init, term, Search::SortMeans, 1.0, observer)
}
