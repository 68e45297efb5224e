//! Direct factorization engine: sets of lengths, distance sets and
//! elasticity, computed by recursive atom peeling with memoization.
//!
//! This module is the brute-force counterpart of the lattice kernel: the two
//! share nothing beyond the sequence type, so agreement between them is a
//! meaningful differential test rather than a tautology.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::Instant;

use num_rational::Ratio;
use thiserror::Error;

use crate::atoms::{enumerate_atoms, AtomSet, EnumerationBudget};
use crate::group::{GroupElement, GroupSpec};
use crate::sequence::Sequence;

#[derive(Debug, Error)]
pub enum LengthsError {
    #[error("sequence does not sum to zero; it has no factorization into atoms")]
    NotZeroSum,
    #[error("sequence support is not contained in the atom set support")]
    SupportNotCovered,
    #[error("sequence and atom set live over different groups")]
    GroupMismatch,
}

/// The set of factorization lengths of one zero-sum sequence.
#[derive(Debug, Clone)]
pub struct LengthSet {
    pub element: Sequence,
    pub lengths: BTreeSet<u64>,
    /// False when a budget cap interrupted the search (the set may then be
    /// missing lengths) or the atom set itself was incomplete.
    pub complete: bool,
}

/// Successive gaps of a length set; empty for singletons and the empty set.
pub fn delta_of(l: &LengthSet) -> BTreeSet<u64> {
    let sorted: Vec<u64> = l.lengths.iter().copied().collect();
    sorted.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Elasticity `max L / min L` as an exact rational; `{0}` has elasticity 1,
/// and an empty set has none.
pub fn rho_of(l: &LengthSet) -> Option<Ratio<u64>> {
    let min = *l.lengths.first()?;
    let max = *l.lengths.last()?;
    if min == 0 {
        // only the empty sequence has 0 in its length set, and then L = {0}
        debug_assert_eq!(max, 0);
        return Some(Ratio::from_integer(1));
    }
    Some(Ratio::new(max, min))
}

/// Peeling context over a fixed atom set: sequences are handled as
/// multiplicity vectors over the atom-set support.
struct Peeler<'a> {
    support: &'a [GroupElement],
    /// atom multiplicity vectors, aligned with the atom list
    atom_vecs: Vec<Vec<u64>>,
    atom_lens: Vec<u64>,
    memo: HashMap<(Vec<u64>, usize), BTreeSet<u64>>,
    states: usize,
    max_states: usize,
    deadline: Option<Instant>,
    capped: bool,
}

impl<'a> Peeler<'a> {
    fn new(atoms: &'a AtomSet, budget: &EnumerationBudget) -> Peeler<'a> {
        let atom_vecs: Vec<Vec<u64>> = atoms
            .atoms
            .iter()
            .map(|a| {
                let mut v = vec![0u64; atoms.support.len()];
                for (g, m) in a.terms() {
                    let i = atoms.support.binary_search(g).expect("atom stays in support");
                    v[i] = *m;
                }
                v
            })
            .collect();
        let atom_lens = atoms.atoms.iter().map(|a| a.len()).collect();
        Peeler {
            support: &atoms.support,
            atom_vecs,
            atom_lens,
            memo: HashMap::new(),
            states: 0,
            max_states: budget.max_nodes.map(|n| n as usize).unwrap_or(usize::MAX),
            deadline: budget.time_limit.map(|d| Instant::now() + d),
            capped: false,
        }
    }

    fn vec_of(&self, b: &Sequence) -> Result<Vec<u64>, LengthsError> {
        let mut v = vec![0u64; self.support.len()];
        for (g, m) in b.terms() {
            let i = self
                .support
                .binary_search(g)
                .map_err(|_| LengthsError::SupportNotCovered)?;
            v[i] = *m;
        }
        Ok(v)
    }

    /// Lengths of factorizations of `residual` into atoms with index at least
    /// `min_atom` (factorizations are multisets of atoms, peeled in
    /// non-decreasing index order).
    fn lengths(&mut self, residual: &[u64], min_atom: usize) -> BTreeSet<u64> {
        if residual.iter().all(|&m| m == 0) {
            return BTreeSet::from([0]);
        }
        let key = (residual.to_vec(), min_atom);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        self.states += 1;
        if self.states > self.max_states {
            self.capped = true;
            return BTreeSet::new();
        }
        if self.states & 1023 == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.capped = true;
                    return BTreeSet::new();
                }
            }
        }
        let mut out = BTreeSet::new();
        for j in min_atom..self.atom_vecs.len() {
            let atom = &self.atom_vecs[j];
            if atom.iter().zip(residual).all(|(a, r)| a <= r) {
                let rest: Vec<u64> = residual.iter().zip(atom).map(|(r, a)| r - a).collect();
                for l in self.lengths(&rest, j) {
                    out.insert(l + 1);
                }
            }
        }
        match self.memo.entry(key) {
            Entry::Vacant(e) => {
                e.insert(out.clone());
            }
            Entry::Occupied(_) => {}
        }
        out
    }

    /// One factorization of `residual` with exactly `target` factors, as a
    /// non-decreasing list of atom indices.
    fn factorization_with_length(
        &mut self,
        residual: &[u64],
        min_atom: usize,
        target: u64,
    ) -> Option<Vec<usize>> {
        if residual.iter().all(|&m| m == 0) {
            return (target == 0).then(Vec::new);
        }
        if target == 0 {
            return None;
        }
        // cheap reuse of the memoized length sets as a feasibility filter
        if !self.lengths(residual, min_atom).contains(&target) {
            return None;
        }
        for j in min_atom..self.atom_vecs.len() {
            let atom = &self.atom_vecs[j];
            if atom.iter().zip(residual).all(|(a, r)| a <= r) {
                let rest: Vec<u64> = residual.iter().zip(atom).map(|(r, a)| r - a).collect();
                if let Some(mut tail) = self.factorization_with_length(&rest, j, target - 1) {
                    tail.insert(0, j);
                    return Some(tail);
                }
            }
        }
        None
    }

    fn atom_len(&self, j: usize) -> u64 {
        self.atom_lens[j]
    }
}

/// Exact set of lengths of `b` over a complete atom set. The empty sequence
/// has `L = {0}`. Budget exhaustion degrades to `complete = false`.
pub fn set_of_lengths(
    b: &Sequence,
    atoms: &AtomSet,
    budget: &EnumerationBudget,
) -> Result<LengthSet, LengthsError> {
    if b.group().invariant_factors() != atoms.group.invariant_factors() {
        return Err(LengthsError::GroupMismatch);
    }
    if !b.sigma().is_zero() {
        return Err(LengthsError::NotZeroSum);
    }
    let mut peeler = Peeler::new(atoms, budget);
    let residual = peeler.vec_of(b)?;
    let lengths = peeler.lengths(&residual, 0);
    Ok(LengthSet { element: b.clone(), lengths, complete: atoms.complete && !peeler.capped })
}

/// One factorization of `b` with exactly `target_len` atoms, as atom indices
/// into `atoms`. Used to reconstruct explicit witnesses.
pub fn find_factorization(
    b: &Sequence,
    atoms: &AtomSet,
    target_len: u64,
    budget: &EnumerationBudget,
) -> Result<Option<Vec<usize>>, LengthsError> {
    if b.group().invariant_factors() != atoms.group.invariant_factors() {
        return Err(LengthsError::GroupMismatch);
    }
    if !b.sigma().is_zero() {
        return Err(LengthsError::NotZeroSum);
    }
    let mut peeler = Peeler::new(atoms, budget);
    let residual = peeler.vec_of(b)?;
    let found = peeler.factorization_with_length(&residual, 0, target_len);
    if let Some(indices) = &found {
        // sanity: the product of the chosen atoms is b and the count matches
        debug_assert_eq!(indices.len() as u64, target_len);
        let mut product = Sequence::empty(b.group());
        for &j in indices {
            product = product.concat(&atoms.atoms[j]).expect("same group");
        }
        assert_eq!(&product, b, "reconstructed factorization must multiply back to b");
        debug_assert_eq!(
            indices.iter().map(|&j| peeler.atom_len(j)).sum::<u64>(),
            b.len()
        );
    }
    Ok(found)
}

/// Walk every nonempty zero-sum sequence over `g0` of length at most `bound`
/// (DFS over non-decreasing term lists). The callback returns false to stop
/// early; the function returns false if it was stopped by a cap.
pub fn for_each_zero_sum(
    g0: &[GroupElement],
    bound: u64,
    budget: &EnumerationBudget,
    f: &mut dyn FnMut(&Sequence) -> bool,
) -> bool {
    assert!(!g0.is_empty(), "support must be nonempty");
    let group = Arc::clone(g0[0].group());
    let mut support: Vec<GroupElement> = g0.to_vec();
    support.sort();
    support.dedup();

    struct Walker<'a> {
        group: Arc<GroupSpec>,
        support: &'a [GroupElement],
        bound: u64,
        prefix: Vec<GroupElement>,
        nodes: u64,
        max_nodes: u64,
        deadline: Option<Instant>,
        capped: bool,
    }
    impl Walker<'_> {
        fn recurse(
            &mut self,
            start: usize,
            sum: GroupElement,
            f: &mut dyn FnMut(&Sequence) -> bool,
        ) -> bool {
            if self.prefix.len() as u64 >= self.bound {
                return true;
            }
            for pos in start..self.support.len() {
                self.nodes += 1;
                if self.nodes > self.max_nodes {
                    self.capped = true;
                    return false;
                }
                if self.nodes & 4095 == 0 {
                    if let Some(d) = self.deadline {
                        if Instant::now() >= d {
                            self.capped = true;
                            return false;
                        }
                    }
                }
                let g = &self.support[pos];
                let new_sum = sum.add(g);
                self.prefix.push(g.clone());
                if new_sum.is_zero() {
                    let seq = Sequence::from_elements(&self.group, self.prefix.iter().cloned())
                        .expect("one group");
                    if !f(&seq) {
                        self.prefix.pop();
                        return false;
                    }
                }
                let go_on = self.recurse(pos, new_sum, f);
                self.prefix.pop();
                if !go_on {
                    return false;
                }
            }
            true
        }
    }

    let mut walker = Walker {
        group: Arc::clone(&group),
        support: &support,
        bound,
        prefix: Vec::new(),
        nodes: 0,
        max_nodes: budget.max_nodes.unwrap_or(u64::MAX),
        deadline: budget.time_limit.map(|d| Instant::now() + d),
        capped: false,
    };
    walker.recurse(0, group.zero(), f);
    !walker.capped
}

/// Smallest realized distance over `g0` found by direct search, with a
/// sequence realizing it.
#[derive(Debug, Clone)]
pub struct DistanceSample {
    /// None = no length set with two lengths was seen within the bound. Only
    /// meaningful as "no distance" when `complete` is true, and even then the
    /// search is one-sided: a found value upper-bounds the true minimum, and
    /// finding nothing within a bound proves nothing.
    pub min_gap: Option<u64>,
    pub witness: Option<(Sequence, BTreeSet<u64>)>,
    pub complete: bool,
}

/// Direct search for the minimum distance realized by zero-sum sequences over
/// `g0` of length at most `length_bound`.
pub fn min_delta_bruteforce(
    g0: &[GroupElement],
    length_bound: u64,
    budget: &EnumerationBudget,
) -> DistanceSample {
    let atoms = enumerate_atoms(g0, budget);
    let mut peeler = Peeler::new(&atoms, budget);
    let mut best: Option<u64> = None;
    let mut witness = None;
    let walked = for_each_zero_sum(g0, length_bound, budget, &mut |b| {
        let residual = peeler.vec_of(b).expect("terms lie in the support");
        let lengths = peeler.lengths(&residual, 0);
        let sorted: Vec<u64> = lengths.iter().copied().collect();
        for gap in sorted.windows(2).map(|w| w[1] - w[0]) {
            if best.is_none_or(|b0| gap < b0) {
                best = Some(gap);
                witness = Some((b.clone(), lengths.clone()));
            }
        }
        best != Some(1) // nothing can beat a gap of 1
    });
    let complete = atoms.complete && !peeler.capped && (walked || best == Some(1));
    DistanceSample { min_gap: best, witness, complete }
}

/// Union of the distance sets of all zero-sum sequences over the whole group
/// with length at most `bound`; a lower approximation of the group's distance
/// set.
pub fn delta_of_group_sample(
    group: &Arc<GroupSpec>,
    bound: u64,
    budget: &EnumerationBudget,
) -> BTreeSet<u64> {
    let support: Vec<GroupElement> = group.elements().collect();
    let atoms = enumerate_atoms(&support, budget);
    let mut peeler = Peeler::new(&atoms, budget);
    let mut gaps = BTreeSet::new();
    for_each_zero_sum(&support, bound, budget, &mut |b| {
        let residual = peeler.vec_of(b).expect("terms lie in the support");
        let lengths = peeler.lengths(&residual, 0);
        let sorted: Vec<u64> = lengths.iter().copied().collect();
        for gap in sorted.windows(2).map(|w| w[1] - w[0]) {
            gaps.insert(gap);
        }
        true
    });
    gaps
}
