//! Dense-index machinery for the enumeration engines: a precomputed addition
//! table over the whole group and a word-packed bitset of element indices
//! used to maintain subsequence-sum sets incrementally.

use std::sync::Arc;

use crate::group::{GroupElement, GroupSpec};

/// Largest group order the table-driven searches accept. Everything this
/// crate targets is far below it; bigger groups get a loud error instead of
/// an open-ended computation.
pub const MAX_TABLE_ORDER: u64 = 4096;

pub(crate) struct GroupTable {
    pub n: usize,
    pub elements: Vec<GroupElement>,
    add: Vec<u32>,
    neg: Vec<u32>,
}

impl GroupTable {
    pub fn new(group: &Arc<GroupSpec>) -> GroupTable {
        let order = group.order();
        assert!(
            order <= MAX_TABLE_ORDER,
            "group of order {order} exceeds the search limit of {MAX_TABLE_ORDER}"
        );
        let n = order as usize;
        let elements: Vec<GroupElement> = group.elements().collect();
        let mut add = vec![0u32; n * n];
        let mut neg = vec![0u32; n];
        for (i, a) in elements.iter().enumerate() {
            neg[i] = group.index_of(&a.neg()) as u32;
            for (j, b) in elements.iter().enumerate().skip(i) {
                let s = group.index_of(&a.add(b)) as u32;
                add[i * n + j] = s;
                add[j * n + i] = s;
            }
        }
        GroupTable { n, elements, add, neg }
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.add[a as usize * self.n + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.neg[a as usize]
    }
}

/// Fixed-capacity bitset over element indices.
#[derive(Clone, PartialEq, Eq)]
pub(crate) struct IndexBitSet {
    words: Vec<u64>,
    ones: u32,
}

impl IndexBitSet {
    pub fn new(len: usize) -> IndexBitSet {
        IndexBitSet { words: vec![0; len.div_ceil(64)], ones: 0 }
    }

    #[inline]
    pub fn contains(&self, i: u32) -> bool {
        self.words[(i >> 6) as usize] & (1u64 << (i & 63)) != 0
    }

    #[inline]
    pub fn insert(&mut self, i: u32) {
        let w = &mut self.words[(i >> 6) as usize];
        let bit = 1u64 << (i & 63);
        if *w & bit == 0 {
            *w |= bit;
            self.ones += 1;
        }
    }

    #[inline]
    pub fn len(&self) -> u32 {
        self.ones
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros();
                w &= w - 1;
                Some((wi as u32) * 64 + b)
            })
        })
    }

    /// `self ∪ (self + g) ∪ {g}`: the subsequence-sum set after appending one
    /// copy of the element with index `g`.
    pub fn with_added(&self, table: &GroupTable, g: u32) -> IndexBitSet {
        let mut out = self.clone();
        for b in self.iter_ones() {
            out.insert(table.add(b, g));
        }
        out.insert(g);
        out
    }
}
