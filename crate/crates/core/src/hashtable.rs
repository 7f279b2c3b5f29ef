//! Chained hash table keyed by 8-bit RGB triples.

use crate::color::Rgb8;
use crate::histogram::{hash_color, HashParams};

const NIL: u32 = u32::MAX;

/// Maps each distinct color to a dense index in first-insertion order.
pub(crate) struct ColorTable {
    params: HashParams,
    heads: Vec<u32>,
    next: Vec<u32>,
    keys: Vec<Rgb8>,
    counts: Vec<u64>,
}

impl ColorTable {
    pub(crate) fn new(params: HashParams) -> Self {
        let m = params.modulus() as usize;
        ColorTable {
            params,
            heads: vec![NIL; m],
            next: Vec::new(),
            keys: Vec::new(),
            counts: Vec::new(),
        }
    }

    fn find(&self, bucket: usize, color: Rgb8) -> Option<usize> {
        let mut cur = self.heads[bucket];
        while cur != NIL {
            if self.keys[cur as usize] == color {
                return Some(cur as usize);
            }
            cur = self.next[cur as usize];
        }
        None
    }

    /// Counts one occurrence of `color` and returns its index.
    pub(crate) fn insert(&mut self, color: Rgb8) -> usize {
        let bucket = hash_color(color, &self.params) as usize;
        if let Some(i) = self.find(bucket, color) {
            self.counts[i] += 1;
            return i;
        }
        let i = self.keys.len();
        self.keys.push(color);
        self.counts.push(1);
        self.next.push(self.heads[bucket]);
        self.heads[bucket] = i as u32;
        i
    }

    #[cfg(test)]
    pub(crate) fn get(&self, color: Rgb8) -> Option<usize> {
        self.find(hash_color(color, &self.params) as usize, color)
    }

    pub(crate) fn keys(&self) -> &[Rgb8] {
        &self.keys
    }

    pub(crate) fn into_parts(self) -> (Vec<Rgb8>, Vec<u64>) {
        (self.keys, self.counts)
    }

    #[cfg(test)]
    pub(crate) fn longest_chain(&self) -> usize {
        self.heads
            .iter()
            .map(|&h| {
                let mut n = 0;
                let mut cur = h;
                while cur != NIL {
                    n += 1;
                    cur = self.next[cur as usize];
                }
                n
            })
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colliding_keys_stay_distinct() {
        // a = (1,1,1), m = 7: (1,2,3) and (2,2,2) both hash to 6
        let params = HashParams::new(7, [1, 1, 1]).unwrap();
        let mut t = ColorTable::new(params);
        assert_eq!(t.insert([1, 2, 3]), 0);
        assert_eq!(t.insert([2, 2, 2]), 1);
        assert_eq!(t.insert([1, 2, 3]), 0);
        assert_eq!(t.get([2, 2, 2]), Some(1));
        assert_eq!(t.get([3, 2, 1]), None);
        assert_eq!(t.longest_chain(), 2);
        let (keys, counts) = t.into_parts();
        assert_eq!(keys, vec![[1, 2, 3], [2, 2, 2]]);
        assert_eq!(counts, vec![2, 1]);
    }
}
