//! Wu's greedy orthogonal bipartitioning.
//!
//! Cumulative moment tables over the 32³ grid make the moments of any box,
//! and therefore the squared error of any candidate cut, an O(1) query.
//! Each step splits the box with the largest squared error at the
//! (axis, cut) pair minimizing the summed squared error of the two halves.

use crate::error::Result;

use super::coarse::{CoarseHistogram, SIDE};
use super::moments::Moments;
use super::{check_k, PreclusterResult};

const N: usize = SIDE + 1;

/// Inclusive bin box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinBox {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

/// One greedy step, for inspection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WuSplit {
    pub parent: BinBox,
    pub axis: usize,
    /// Last bin coordinate of the lower half.
    pub cut: usize,
    /// Squared error of both halves after the cut.
    pub cost: f64,
}

/// Prefix sums `M[r][g][b] = Σ bins with coordinates below (r, g, b)`.
struct MomentTable {
    cells: Vec<Moments>,
}

impl MomentTable {
    fn new(ch: &CoarseHistogram) -> Self {
        let mut cells = vec![Moments::default(); N * N * N];
        let at = |r: usize, g: usize, b: usize| (r * N + g) * N + b;
        for r in 1..N {
            for g in 1..N {
                let mut line = Moments::default();
                for b in 1..N {
                    line.add(&ch.bin([r - 1, g - 1, b - 1]).moments());
                    let mut v = cells[at(r - 1, g, b)];
                    let up = cells[at(r, g - 1, b)];
                    let diag = cells[at(r - 1, g - 1, b)];
                    v.add(&up);
                    v = v.minus(&diag);
                    v.add(&line);
                    cells[at(r, g, b)] = v;
                }
            }
        }
        MomentTable { cells }
    }

    #[inline]
    fn get(&self, r: usize, g: usize, b: usize) -> &Moments {
        &self.cells[(r * N + g) * N + b]
    }

    fn query(&self, bx: &BinBox) -> Moments {
        let (r0, g0, b0) = (bx.lo[0], bx.lo[1], bx.lo[2]);
        let (r1, g1, b1) = (bx.hi[0] + 1, bx.hi[1] + 1, bx.hi[2] + 1);
        let mut pos = *self.get(r1, g1, b1);
        pos.add(self.get(r1, g0, b0));
        pos.add(self.get(r0, g1, b0));
        pos.add(self.get(r0, g0, b1));
        let mut neg = *self.get(r0, g0, b0);
        neg.add(self.get(r0, g1, b1));
        neg.add(self.get(r1, g0, b1));
        neg.add(self.get(r1, g1, b0));
        pos.minus(&neg)
    }
}

fn halves(bx: &BinBox, axis: usize, cut: usize) -> (BinBox, BinBox) {
    let mut left = *bx;
    left.hi[axis] = cut;
    let mut right = *bx;
    right.lo[axis] = cut + 1;
    (left, right)
}

/// The cost-minimizing cut of `bx` with both halves populated, if any.
/// Ties go to the lower axis, then the lower cut.
fn best_cut(table: &MomentTable, bx: &BinBox) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for axis in 0..3 {
        for cut in bx.lo[axis]..bx.hi[axis] {
            let (l, r) = halves(bx, axis, cut);
            let (ml, mr) = (table.query(&l), table.query(&r));
            if ml.weight <= 0.0 || mr.weight <= 0.0 {
                continue;
            }
            let cost = ml.sse() + mr.sse();
            if best.map_or(true, |(_, _, c)| cost < c) {
                best = Some((axis, cut, cost));
            }
        }
    }
    best
}

pub fn wu(ch: &CoarseHistogram, k: usize) -> Result<PreclusterResult> {
    wu_traced(ch, k).map(|(r, _)| r)
}

/// [`wu`], also returning every split it made.
pub fn wu_traced(ch: &CoarseHistogram, k: usize) -> Result<(PreclusterResult, Vec<WuSplit>)> {
    check_k(k)?;
    let table = MomentTable::new(ch);
    let root = BinBox {
        lo: [0; 3],
        hi: [SIDE - 1; 3],
    };
    let mut boxes = vec![(root, table.query(&root))];
    let mut frozen = vec![false];
    let mut trace = Vec::new();
    while boxes.len() < k {
        let mut pick: Option<usize> = None;
        for (i, (_, m)) in boxes.iter().enumerate() {
            if !frozen[i] && pick.map_or(true, |j| m.sse() > boxes[j].1.sse()) {
                pick = Some(i);
            }
        }
        let Some(i) = pick else { break };
        let parent = boxes[i].0;
        let Some((axis, cut, cost)) = best_cut(&table, &parent) else {
            frozen[i] = true;
            continue;
        };
        let (l, r) = halves(&parent, axis, cut);
        boxes[i] = (l, table.query(&l));
        boxes.push((r, table.query(&r)));
        frozen.push(false);
        trace.push(WuSplit {
            parent,
            axis,
            cut,
            cost,
        });
    }
    let result = PreclusterResult::from_centroids(boxes.iter().map(|(_, m)| m.centroid()), k);
    Ok((result, trace))
}
