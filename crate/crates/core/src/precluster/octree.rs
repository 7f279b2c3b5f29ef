//! Octree quantization limited to depth 6.
//!
//! Colors are inserted along the path given by their top six bits per
//! channel. The tree is then reduced bottom-up: among the internal nodes on
//! the deepest level that still has any, the one with the fewest pixels has
//! its children folded into it, until at most `k` leaves remain.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::color::{ColorPoint, Rgb8};
use crate::error::Result;

use super::{check_k, PreclusterResult};

pub const MAX_DEPTH: usize = 6;
const NIL: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Node {
    count: u64,
    sum: [u64; 3],
    children: [u32; 8],
    depth: u8,
    /// Path from the root, three bits per level (Morton order within a level).
    code: u32,
}

impl Node {
    fn new(depth: u8, code: u32) -> Self {
        Node {
            count: 0,
            sum: [0; 3],
            children: [NIL; 8],
            depth,
            code,
        }
    }

    fn is_leaf(&self) -> bool {
        self.children.iter().all(|&c| c == NIL)
    }
}

/// Child slot of `c` at `level` (0 = root's children).
fn child_slot(c: Rgb8, level: usize) -> usize {
    let shift = 7 - level;
    (((c[0] >> shift) & 1) as usize) << 2 | (((c[1] >> shift) & 1) as usize) << 1 | ((c[2] >> shift) & 1) as usize
}

struct Octree {
    nodes: Vec<Node>,
    leaves: usize,
}

impl Octree {
    fn build(entries: impl IntoIterator<Item = (Rgb8, u64)>) -> Self {
        let mut nodes = vec![Node::new(0, 0)];
        let mut leaves = 0;
        for (c, n) in entries {
            let mut cur = 0usize;
            for level in 0..=MAX_DEPTH {
                let node = &mut nodes[cur];
                node.count += n;
                for ch in 0..3 {
                    node.sum[ch] += n * c[ch] as u64;
                }
                if level == MAX_DEPTH {
                    break;
                }
                let slot = child_slot(c, level);
                let next = node.children[slot];
                cur = if next == NIL {
                    let code = node.code << 3 | slot as u32;
                    let id = nodes.len();
                    nodes[cur].children[slot] = id as u32;
                    nodes.push(Node::new(level as u8 + 1, code));
                    if level + 1 == MAX_DEPTH {
                        leaves += 1;
                    }
                    id
                } else {
                    next as usize
                };
            }
        }
        Octree { nodes, leaves }
    }

    fn reduce(&mut self, k: usize) {
        for depth in (0..MAX_DEPTH).rev() {
            if self.leaves <= k {
                return;
            }
            let mut heap: BinaryHeap<Reverse<(u64, u32, usize)>> = self
                .nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| n.depth as usize == depth && !n.is_leaf())
                .map(|(i, n)| Reverse((n.count, n.code, i)))
                .collect();
            while self.leaves > k {
                let Some(Reverse((_, _, i))) = heap.pop() else { break };
                let kids = self.nodes[i].children.iter().filter(|&&c| c != NIL).count();
                self.nodes[i].children = [NIL; 8];
                self.leaves = self.leaves + 1 - kids;
            }
        }
    }

    /// Leaf centroids in depth-first (Morton) order.
    fn palette(&self) -> Vec<ColorPoint> {
        let mut out = Vec::with_capacity(self.leaves);
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let n = &self.nodes[i];
            if n.is_leaf() {
                if n.count > 0 {
                    out.push(ColorPoint(n.sum.map(|s| s as f64 / n.count as f64)));
                }
                continue;
            }
            stack.extend(n.children.iter().rev().filter(|&&c| c != NIL).map(|&c| c as usize));
        }
        out
    }
}

pub fn octree_quantize(pixels: &[Rgb8], k: usize) -> Result<PreclusterResult> {
    octree_quantize_counts(pixels.iter().map(|&p| (p, 1)), k)
}

/// Same as [`octree_quantize`] over `(color, count)` pairs.
pub fn octree_quantize_counts(entries: impl IntoIterator<Item = (Rgb8, u64)>, k: usize) -> Result<PreclusterResult> {
    check_k(k)?;
    let mut tree = Octree::build(entries);
    if tree.nodes[0].count == 0 {
        return Err(crate::Error::EmptyInput("pixel sequence"));
    }
    tree.reduce(k);
    Ok(PreclusterResult::from_centroids(tree.palette(), k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn black_and_white_survive() {
        let r = octree_quantize(&[[0, 0, 0], [255, 255, 255]], 2).unwrap();
        assert_eq!(
            r.palette.colors,
            vec![ColorPoint::new(0., 0., 0.), ColorPoint::new(255., 255., 255.)]
        );
        assert!(!r.short);
    }

    #[test]
    fn single_color_gives_short_palette() {
        let r = octree_quantize(&[[12, 34, 56]; 20], 8).unwrap();
        assert_eq!(r.palette.colors, vec![ColorPoint::new(12., 34., 56.)]);
        assert!(r.short);
    }

    #[test]
    fn depth_limit_merges_low_bits() {
        // identical in the top six bits of every channel
        let r = octree_quantize(&[[64, 128, 8], [67, 129, 10]], 2).unwrap();
        assert_eq!(r.palette.colors, vec![ColorPoint::new(65.5, 128.5, 9.0)]);
        assert!(r.short);
    }

    #[test]
    fn reduction_merges_smallest_deepest_node() {
        // three far-apart colors plus a light pair sharing a depth-5 ancestor
        let mut px = vec![[0u8, 0, 0]; 10];
        px.extend(vec![[255u8, 255, 255]; 10]);
        px.extend(vec![[0u8, 255, 0]; 10]);
        px.push([128, 128, 128]);
        px.push([132, 128, 128]);
        let r = octree_quantize(&px, 4).unwrap();
        assert_eq!(r.palette.len(), 4);
        assert!(r.palette.colors.contains(&ColorPoint::new(130., 128., 128.)));
    }

    #[test]
    fn never_more_than_k_leaves() {
        let px: Vec<_> = (0..4096u32)
            .map(|i| [(i * 37 % 256) as u8, (i * 11 % 256) as u8, (i * 97 % 256) as u8])
            .collect();
        for k in [1, 2, 7, 16, 64, 255] {
            let r = octree_quantize(&px, k).unwrap();
            assert!(r.palette.len() <= k && !r.palette.is_empty());
        }
    }
}
