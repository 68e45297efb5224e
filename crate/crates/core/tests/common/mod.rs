//! Shared helpers for the integration suites: naive reference oracles that
//! deliberately avoid the library's search machinery, and a tiny
//! deterministic RNG so sampled inputs are reproducible.
#![allow(dead_code)] // each test binary uses a different subset

use std::sync::Arc;

use zerosum::group::{GroupElement, GroupSpec};
use zerosum::sequence::Sequence;

/// splitmix64; deterministic across platforms.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// All multisets of size `1..=max_len` over `support`, as non-decreasing
/// index vectors fed to the callback.
pub fn for_each_multiset(
    support_len: usize,
    max_len: usize,
    f: &mut dyn FnMut(&[usize]),
) {
    fn rec(
        support_len: usize,
        max_len: usize,
        start: usize,
        prefix: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if !prefix.is_empty() {
            f(prefix);
        }
        if prefix.len() == max_len {
            return;
        }
        for i in start..support_len {
            prefix.push(i);
            rec(support_len, max_len, i, prefix, f);
            prefix.pop();
        }
    }
    rec(support_len, max_len, 0, &mut Vec::new(), f);
}

/// Definition-level atom test: zero sum and no proper nonempty sub-multiset
/// sums to zero, decided by enumerating all sub-multisets.
pub fn is_atom_by_definition(group: &Arc<GroupSpec>, terms: &[GroupElement]) -> bool {
    if terms.is_empty() {
        return false;
    }
    let mut total = group.zero();
    for t in terms {
        total = total.add(t);
    }
    if !total.is_zero() {
        return false;
    }
    // masks over expanded terms; proper nonempty subsets only
    let n = terms.len();
    assert!(n < 26, "oracle is exponential; keep inputs small");
    for mask in 1u32..((1 << n) - 1) {
        let mut acc = group.zero();
        for (i, t) in terms.iter().enumerate() {
            if mask & (1 << i) != 0 {
                acc = acc.add(t);
            }
        }
        if acc.is_zero() {
            return false;
        }
    }
    true
}

/// Reference atom enumeration: every multiset over the support up to
/// `max_len`, filtered by the definition-level atom test. Returns canonical
/// sorted sequences.
pub fn atoms_by_bruteforce(
    support: &[GroupElement],
    max_len: usize,
) -> Vec<Sequence> {
    assert!(!support.is_empty());
    let group = Arc::clone(support[0].group());
    let mut sorted: Vec<GroupElement> = support.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut out = Vec::new();
    for_each_multiset(sorted.len(), max_len, &mut |indices| {
        let terms: Vec<GroupElement> = indices.iter().map(|&i| sorted[i].clone()).collect();
        if is_atom_by_definition(&group, &terms) {
            out.push(Sequence::from_elements(&group, terms).expect("one group"));
        }
    });
    out.sort();
    out
}

/// All groups of order at most `n`, up to isomorphism (small n only).
pub fn small_groups(max_order: u64) -> Vec<Arc<GroupSpec>> {
    let mut out = Vec::new();
    for order in 2..=max_order {
        // enumerate invariant-factor chains with product = order
        fn rec(remaining: u64, min_factor: u64, chain: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
            if remaining == 1 {
                if !chain.is_empty() {
                    out.push(chain.clone());
                }
                return;
            }
            let mut f = min_factor;
            while f <= remaining {
                if remaining.is_multiple_of(f) {
                    // divisibility chain: every later factor is a multiple
                    if chain.last().is_none_or(|&prev| f.is_multiple_of(prev)) {
                        chain.push(f);
                        rec(remaining / f, f, chain, out);
                        chain.pop();
                    }
                }
                f += 1;
            }
        }
        let mut chains = Vec::new();
        rec(order, 2, &mut Vec::new(), &mut chains);
        for chain in chains {
            out.push(GroupSpec::new(&chain).expect("valid chain"));
        }
    }
    out
}
