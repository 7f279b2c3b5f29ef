//! Generic seeding schemes for k-means.
//!
//! Every scheme takes weighted data (usually a [`WeightedHistogram`](crate::WeightedHistogram))
//! and returns exactly `k` initial centers. Randomness comes from a ChaCha
//! generator seeded by [`SeedConfig::seed`], so results are reproducible across
//! runs and platforms. Where a scheme draws "a random point of the data set",
//! the draw is weighted by frequency, since a histogram entry stands for all
//! the pixels sharing its color. Forgy and the within-cell draws of the
//! density scheme pick uniformly among distinct colors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::color::ColorPoint;
use crate::error::{Error, Result};
use crate::histogram::WeightedData;
use crate::kmeans::{wsm, Termination};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InitScheme {
    Forgy,
    Lbg,
    Maximin,
    Density,
    MaxVariance,
    SubsetFarthestFirst,
    KMeansPlusPlus,
}

impl InitScheme {
    pub const ALL: [InitScheme; 7] = [
        InitScheme::Forgy,
        InitScheme::Lbg,
        InitScheme::Maximin,
        InitScheme::Density,
        InitScheme::MaxVariance,
        InitScheme::SubsetFarthestFirst,
        InitScheme::KMeansPlusPlus,
    ];

    pub fn token(self) -> &'static str {
        match self {
            InitScheme::Forgy => "fgy",
            InitScheme::Lbg => "lbg",
            InitScheme::Maximin => "mmx",
            InitScheme::Density => "den",
            InitScheme::MaxVariance => "var",
            InitScheme::SubsetFarthestFirst => "sff",
            InitScheme::KMeansPlusPlus => "kpp",
        }
    }
}

impl fmt::Display for InitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for InitScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InitScheme::ALL
            .into_iter()
            .find(|m| m.token() == s)
            .ok_or_else(|| Error::InvalidToken {
                what: "initialization scheme",
                token: s.to_owned(),
            })
    }
}

/// How the first center of maximin-style schemes is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FirstCenter {
    /// Proportional to weight.
    #[default]
    Weighted,
    /// Uniform over distinct points.
    Uniform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeedConfig {
    pub k: usize,
    pub seed: u64,
    /// Split offset for LBG.
    pub lbg_perturbation: [f64; 3],
    /// Cells per channel for the density scheme.
    pub density_grid: usize,
    pub first_center: FirstCenter,
    /// Refinement used between LBG splits.
    pub refine: Termination,
}

impl SeedConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        SeedConfig {
            k,
            seed,
            lbg_perturbation: [0.255; 3],
            density_grid: 8,
            first_center: FirstCenter::Weighted,
            refine: Termination::default(),
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

pub fn initialize<D: WeightedData + ?Sized>(
    scheme: InitScheme,
    data: &D,
    cfg: &SeedConfig,
) -> Result<Vec<ColorPoint>> {
    match scheme {
        InitScheme::Forgy => init_forgy(data, cfg),
        InitScheme::Lbg => init_lbg(data, cfg),
        InitScheme::Maximin => init_maximin(data, cfg),
        InitScheme::Density => init_density(data, cfg),
        InitScheme::MaxVariance => init_maxvar(data, cfg),
        InitScheme::SubsetFarthestFirst => init_sff(data, cfg),
        InitScheme::KMeansPlusPlus => init_kmeanspp(data, cfg),
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::TooManyClusters { k, available: n });
    }
    Ok(())
}

fn gather(points: &[ColorPoint], idx: impl IntoIterator<Item = usize>) -> Vec<ColorPoint> {
    idx.into_iter().map(|i| points[i]).collect()
}

/// Draws an index with probability proportional to `weights`.
fn weighted_index<R: Rng>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        if target < acc {
            return Some(i);
        }
        last = Some(i);
    }
    last
}

fn pick_first<D: WeightedData + ?Sized, R: Rng>(data: &D, how: FirstCenter, rng: &mut R) -> usize {
    match how {
        FirstCenter::Weighted => weighted_index(data.weights(), rng).unwrap_or(0),
        FirstCenter::Uniform => rng.gen_range(0..data.len()),
    }
}

/// `k` distinct points chosen uniformly without replacement.
pub fn init_forgy<D: WeightedData + ?Sized>(data: &D, cfg: &SeedConfig) -> Result<Vec<ColorPoint>> {
    check_k(cfg.k, data.len())?;
    let mut rng = cfg.rng();
    Ok(gather(data.points(), index::sample(&mut rng, data.len(), cfg.k)))
}

/// Binary splitting from the centroid, refining with WSM after every round.
pub fn init_lbg<D: WeightedData + ?Sized>(data: &D, cfg: &SeedConfig) -> Result<Vec<ColorPoint>> {
    check_k(cfg.k, data.len())?;
    let eps = ColorPoint(cfg.lbg_perturbation);
    let mut centers = vec![data.centroid()];
    let mut memberships = Vec::new();
    while centers.len() * 2 <= cfg.k {
        let split: Vec<_> = centers.iter().flat_map(|&c| [c - eps, c + eps]).collect();
        let state = wsm(data, &split, &cfg.refine)?;
        centers = state.centers;
        memberships = state.memberships;
    }
    if centers.len() < cfg.k {
        let extra = cfg.k - centers.len();
        let mut sse = vec![0.0; centers.len()];
        for ((x, &w), &m) in data.points().iter().zip(data.weights()).zip(&memberships) {
            sse[m] += w * x.dist2(&centers[m]);
        }
        let mut by_sse: Vec<usize> = (0..centers.len()).collect();
        by_sse.sort_by(|&a, &b| sse[b].total_cmp(&sse[a]).then(a.cmp(&b)));
        let mut chosen = vec![false; centers.len()];
        for &j in &by_sse[..extra] {
            chosen[j] = true;
        }
        let split: Vec<_> = centers
            .iter()
            .zip(&chosen)
            .flat_map(|(&c, &s)| if s { vec![c - eps, c + eps] } else { vec![c] })
            .collect();
        centers = wsm(data, &split, &cfg.refine)?.centers;
    }
    Ok(centers)
}

/// Farthest-first traversal from `first`; returns the chosen indices.
/// Ties go to the lower index.
pub fn maximin_indices(points: &[ColorPoint], first: usize, k: usize) -> Vec<usize> {
    let mut chosen = vec![false; points.len()];
    let mut mind: Vec<f64> = points.iter().map(|x| x.dist2(&points[first])).collect();
    chosen[first] = true;
    let mut out = Vec::with_capacity(k);
    out.push(first);
    while out.len() < k {
        let mut best: Option<usize> = None;
        for (i, &d) in mind.iter().enumerate() {
            if !chosen[i] && best.map_or(true, |b| d > mind[b]) {
                best = Some(i);
            }
        }
        let Some(b) = best else { break };
        chosen[b] = true;
        out.push(b);
        let c = points[b];
        for (m, x) in mind.iter_mut().zip(points) {
            *m = m.min(x.dist2(&c));
        }
    }
    out
}

pub fn init_maximin<D: WeightedData + ?Sized>(data: &D, cfg: &SeedConfig) -> Result<Vec<ColorPoint>> {
    check_k(cfg.k, data.len())?;
    let mut rng = cfg.rng();
    let first = pick_first(data, cfg.first_center, &mut rng);
    Ok(gather(data.points(), maximin_indices(data.points(), first, cfg.k)))
}

/// Distributes `k` units over cells proportionally to `weights` by the
/// largest-remainder rule, never giving a cell more than `caps[i]`.
/// Ties go to the lower cell index.
pub fn apportion(weights: &[f64], caps: &[usize], k: usize) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let quota: Vec<f64> = weights.iter().map(|w| k as f64 * w / total).collect();
    let mut out: Vec<usize> = quota
        .iter()
        .zip(caps)
        .map(|(q, &cap)| (q.floor() as usize).min(cap))
        .collect();
    let mut assigned: usize = out.iter().sum();
    while assigned < k {
        let mut best: Option<usize> = None;
        for i in 0..out.len() {
            if out[i] >= caps[i] {
                continue;
            }
            let rem = quota[i] - out[i] as f64;
            if best.map_or(true, |b| rem > quota[b] - out[b] as f64) {
                best = Some(i);
            }
        }
        let Some(b) = best else { break };
        out[b] += 1;
        assigned += 1;
    }
    out
}

fn cell_of(x: &ColorPoint, g: usize) -> usize {
    let bin = |v: f64| ((v.clamp(0.0, 255.0) * g as f64 / 256.0).floor() as usize).min(g - 1);
    (bin(x[0]) * g + bin(x[1])) * g + bin(x[2])
}

/// Uniform grid over the RGB cube; each cell contributes centers in
/// proportion to its weight.
pub fn init_density<D: WeightedData + ?Sized>(data: &D, cfg: &SeedConfig) -> Result<Vec<ColorPoint>> {
    check_k(cfg.k, data.len())?;
    let g = cfg.density_grid;
    if !(1..=256).contains(&g) {
        return Err(Error::InvalidParameter(format!("density grid {g} outside 1..=256")));
    }
    let mut cells: BTreeMap<usize, (Vec<usize>, f64)> = BTreeMap::new();
    for (i, (x, &w)) in data.points().iter().zip(data.weights()).enumerate() {
        let e = cells.entry(cell_of(x, g)).or_default();
        e.0.push(i);
        e.1 += w;
    }
    let weights: Vec<f64> = cells.values().map(|c| c.1).collect();
    let caps: Vec<usize> = cells.values().map(|c| c.0.len()).collect();
    let quotas = apportion(&weights, &caps, cfg.k);
    let mut rng = cfg.rng();
    let mut out = Vec::with_capacity(cfg.k);
    for ((members, _), &q) in cells.values().zip(&quotas) {
        if q == 0 {
            continue;
        }
        out.extend(index::sample(&mut rng, members.len(), q).into_iter().map(|j| data.points()[members[j]]));
    }
    Ok(out)
}

/// Sorts on the channel of largest weighted variance, cuts the order into
/// `k` runs of near-equal weight and takes each run's weighted median.
pub fn init_maxvar<D: WeightedData + ?Sized>(data: &D, cfg: &SeedConfig) -> Result<Vec<ColorPoint>> {
    let (n, k) = (data.len(), cfg.k);
    check_k(k, n)?;
    let (points, weights) = (data.points(), data.weights());
    let mean = data.centroid();
    let total = data.total_weight();
    let mut var = [0.0f64; 3];
    for (x, &w) in points.iter().zip(weights) {
        for c in 0..3 {
            var[c] += w * (x[c] - mean[c]).powi(2);
        }
    }
    let axis = (0..3).fold(0, |best, c| if var[c] > var[best] { c } else { best });

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b)));
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &i in &order {
        prefix.push(prefix.last().unwrap() + weights[i]);
    }

    let mut bounds = vec![0usize; k + 1];
    bounds[k] = n;
    for g in 1..k {
        let target = total * g as f64 / k as f64;
        // first prefix position at or beyond the target, or the one just before if nearer
        let j = prefix.partition_point(|&p| p < target);
        let j = if j > 0 && (target - prefix[j - 1]) <= (prefix[j.min(n)] - target) { j - 1 } else { j };
        bounds[g] = j.clamp(bounds[g - 1] + 1, n - (k - g));
    }

    let mut out = Vec::with_capacity(k);
    for g in 0..k {
        let (lo, hi) = (bounds[g], bounds[g + 1]);
        let group_weight = prefix[hi] - prefix[lo];
        let mut pick = order[hi - 1];
        for pos in lo..hi {
            if 2.0 * (prefix[pos + 1] - prefix[lo]) >= group_weight {
                pick = order[pos];
                break;
            }
        }
        out.push(points[pick]);
    }
    Ok(out)
}

/// Size of the farthest-first subset, `⌈2k ln k⌉`.
pub fn sff_subset_size(k: usize) -> usize {
    (2.0 * k as f64 * (k as f64).ln()).ceil() as usize
}

/// Weighted sampling of `s` distinct indices (exponential-key method).
fn weighted_sample_without_replacement<R: Rng>(weights: &[f64], s: usize, rng: &mut R) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            (u.ln() / w, i)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.truncate(s);
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Maximin restricted to a weighted random subset of size `⌈2k ln k⌉`.
pub fn init_sff<D: WeightedData + ?Sized>(data: &D, cfg: &SeedConfig) -> Result<Vec<ColorPoint>> {
    check_k(cfg.k, data.len())?;
    if cfg.k == 1 {
        return init_forgy(data, cfg);
    }
    let s = sff_subset_size(cfg.k);
    if s >= data.len() {
        return init_maximin(data, cfg);
    }
    let mut rng = cfg.rng();
    let subset = weighted_sample_without_replacement(data.weights(), s, &mut rng);
    let sub_points = gather(data.points(), subset.iter().copied());
    let sub_weights: Vec<f64> = subset.iter().map(|&i| data.weights()[i]).collect();
    let first = match cfg.first_center {
        FirstCenter::Weighted => weighted_index(&sub_weights, &mut rng).unwrap_or(0),
        FirstCenter::Uniform => rng.gen_range(0..s),
    };
    Ok(gather(&sub_points, maximin_indices(&sub_points, first, cfg.k)))
}

/// k-means++ continuation from a fixed first index: each further center is
/// drawn with probability proportional to `w·D²`.
pub fn kmeanspp_indices<D: WeightedData + ?Sized, R: Rng>(
    data: &D,
    first: usize,
    k: usize,
    rng: &mut R,
) -> Vec<usize> {
    let (points, weights) = (data.points(), data.weights());
    let mut d2: Vec<f64> = points.iter().map(|x| x.dist2(&points[first])).collect();
    let mut chosen = vec![false; points.len()];
    chosen[first] = true;
    let mut out = vec![first];
    let mut probs = vec![0.0; points.len()];
    while out.len() < k {
        for i in 0..points.len() {
            probs[i] = if chosen[i] { 0.0 } else { weights[i] * d2[i] };
        }
        let next = match weighted_index(&probs, rng) {
            Some(i) => i,
            None => match chosen.iter().position(|&c| !c) {
                Some(i) => i,
                None => break,
            },
        };
        chosen[next] = true;
        out.push(next);
        let c = points[next];
        for (d, x) in d2.iter_mut().zip(points) {
            *d = d.min(x.dist2(&c));
        }
    }
    out
}

pub fn init_kmeanspp<D: WeightedData + ?Sized>(data: &D, cfg: &SeedConfig) -> Result<Vec<ColorPoint>> {
    check_k(cfg.k, data.len())?;
    let mut rng = cfg.rng();
    let first = weighted_index(data.weights(), &mut rng).unwrap_or(0);
    Ok(gather(data.points(), kmeanspp_indices(data, first, cfg.k, &mut rng)))
}
