//! Multiset sequences over a finite abelian group: sums, subsequence sums,
//! zero-sum-freeness and minimality.
//!
//! A sequence is stored as a sorted association list from element to positive
//! multiplicity, keyed by the group's canonical element order. That gives a
//! canonical form, so equality, hashing and iteration order are all cheap and
//! deterministic. The empty sequence is a first-class value.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::group::{GroupElement, GroupSpec};

#[derive(Debug, Error)]
pub enum SequenceError {
    #[error("term of {got} cannot enter a sequence over {expected}")]
    GroupMismatch { expected: String, got: String },
    #[error("not a subsequence: {0} exceeds the available multiplicity")]
    NotASubsequence(String),
    #[error("cannot parse sequence literal {0:?}")]
    Parse(String),
    #[error("multiplicity overflow while building sequence")]
    Overflow,
}

/// A finite multiset of group elements.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Sequence {
    group: Arc<GroupSpec>,
    terms: Vec<(GroupElement, u64)>,
}

impl Sequence {
    /// The empty sequence (identity of the sequence monoid).
    pub fn empty(group: &Arc<GroupSpec>) -> Sequence {
        Sequence { group: Arc::clone(group), terms: Vec::new() }
    }

    /// Single term.
    pub fn single(g: GroupElement) -> Sequence {
        Sequence { group: Arc::clone(g.group()), terms: vec![(g, 1)] }
    }

    /// `g` repeated `k` times; the empty sequence for `k = 0`.
    pub fn power(g: GroupElement, k: u64) -> Sequence {
        let group = Arc::clone(g.group());
        if k == 0 {
            return Sequence::empty(&group);
        }
        Sequence { group, terms: vec![(g, k)] }
    }

    /// Build from individual terms, all of which must belong to one group.
    pub fn from_elements<I>(group: &Arc<GroupSpec>, elements: I) -> Result<Sequence, SequenceError>
    where
        I: IntoIterator<Item = GroupElement>,
    {
        let mut seq = Sequence::empty(group);
        for el in elements {
            seq.push(el, 1)?;
        }
        Ok(seq)
    }

    /// Build from (element, multiplicity) pairs; zero multiplicities are
    /// dropped.
    pub fn from_multiplicities<I>(group: &Arc<GroupSpec>, pairs: I) -> Result<Sequence, SequenceError>
    where
        I: IntoIterator<Item = (GroupElement, u64)>,
    {
        let mut seq = Sequence::empty(group);
        for (el, m) in pairs {
            seq.push(el, m)?;
        }
        Ok(seq)
    }

    fn push(&mut self, el: GroupElement, m: u64) -> Result<(), SequenceError> {
        if el.group().invariant_factors() != self.group.invariant_factors() {
            return Err(SequenceError::GroupMismatch {
                expected: self.group.canonical_name(),
                got: el.group().canonical_name(),
            });
        }
        if m == 0 {
            return Ok(());
        }
        match self.terms.binary_search_by(|(g, _)| g.cmp(&el)) {
            Ok(i) => {
                self.terms[i].1 = self.terms[i].1.checked_add(m).ok_or(SequenceError::Overflow)?;
            }
            Err(i) => self.terms.insert(i, (el, m)),
        }
        Ok(())
    }

    pub fn group(&self) -> &Arc<GroupSpec> {
        &self.group
    }

    /// Number of terms counted with multiplicity.
    pub fn len(&self) -> u64 {
        self.terms.iter().map(|(_, m)| m).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Multiplicity of `g` (0 if absent).
    pub fn multiplicity(&self, g: &GroupElement) -> u64 {
        self.terms
            .binary_search_by(|(h, _)| h.cmp(g))
            .map(|i| self.terms[i].1)
            .unwrap_or(0)
    }

    /// Sorted (element, multiplicity) pairs.
    pub fn terms(&self) -> &[(GroupElement, u64)] {
        &self.terms
    }

    /// Distinct elements, in canonical order.
    pub fn support(&self) -> impl Iterator<Item = &GroupElement> {
        self.terms.iter().map(|(g, _)| g)
    }

    /// Terms expanded with multiplicity, in canonical order.
    pub fn iter_elements(&self) -> impl Iterator<Item = &GroupElement> {
        self.terms.iter().flat_map(|(g, m)| std::iter::repeat_n(g, *m as usize))
    }

    /// Sum of all terms; zero for the empty sequence.
    pub fn sigma(&self) -> GroupElement {
        let mut acc = self.group.zero();
        for (g, m) in &self.terms {
            acc = acc.add(&g.scale(*m));
        }
        acc
    }

    /// Reachability table over the group: `table[i]` is true iff the element
    /// with canonical index `i` is a sum of some nonempty subsequence.
    fn reachable_sums(&self) -> Vec<bool> {
        let n = self.group.order() as usize;
        let mut reach = vec![false; n];
        for (g, m) in &self.terms {
            let g_idx_shift: Vec<usize> = (0..n)
                .map(|i| {
                    let el = self.group.element_at(i).add(g);
                    self.group.index_of(&el)
                })
                .collect();
            for _ in 0..*m {
                let mut next = reach.clone();
                for (i, &r) in reach.iter().enumerate() {
                    if r {
                        next[g_idx_shift[i]] = true;
                    }
                }
                next[self.group.index_of(g)] = true;
                if next == reach {
                    break; // saturated; further copies of g add nothing
                }
                reach = next;
            }
        }
        reach
    }

    /// The set of sums of nonempty subsequences.
    pub fn subsequence_sums(&self) -> BTreeSet<GroupElement> {
        self.reachable_sums()
            .iter()
            .enumerate()
            .filter(|(_, &r)| r)
            .map(|(i, _)| self.group.element_at(i))
            .collect()
    }

    /// True iff no nonempty subsequence sums to zero. The empty sequence is
    /// zero-sum free.
    pub fn is_zero_sum_free(&self) -> bool {
        let zero_idx = self.group.index_of(&self.group.zero());
        !self.reachable_sums()[zero_idx]
    }

    /// Minimal zero-sum test: the sequence is nonempty, sums to zero, and
    /// stays zero-sum free after removing one copy of an arbitrary term.
    /// (Removing any single term gives the same answer; a proper zero-sum
    /// subsequence either misses that term or has a complement that does.)
    pub fn is_atom(&self) -> bool {
        if self.is_empty() || !self.sigma().is_zero() {
            return false;
        }
        let first = self.terms[0].0.clone();
        self.remove_one(&first).expect("term is present").is_zero_sum_free()
    }

    /// Termwise negation.
    pub fn negate(&self) -> Sequence {
        let mut terms: Vec<(GroupElement, u64)> =
            self.terms.iter().map(|(g, m)| (g.neg(), *m)).collect();
        terms.sort_by(|(a, _), (b, _)| a.cmp(b));
        Sequence { group: Arc::clone(&self.group), terms }
    }

    /// Support of the sequence together with the negated support.
    pub fn pm_support(&self) -> BTreeSet<GroupElement> {
        let mut out = BTreeSet::new();
        for (g, _) in &self.terms {
            out.insert(g.clone());
            out.insert(g.neg());
        }
        out
    }

    /// Multiset union.
    pub fn concat(&self, other: &Sequence) -> Result<Sequence, SequenceError> {
        let mut out = self.clone();
        for (g, m) in &other.terms {
            out.push(g.clone(), *m)?;
        }
        Ok(out)
    }

    /// Multiset difference; fails unless `other` is a subsequence.
    pub fn remove(&self, other: &Sequence) -> Result<Sequence, SequenceError> {
        let mut out = self.clone();
        for (g, m) in &other.terms {
            let i = out
                .terms
                .binary_search_by(|(h, _)| h.cmp(g))
                .map_err(|_| SequenceError::NotASubsequence(g.to_string()))?;
            if out.terms[i].1 < *m {
                return Err(SequenceError::NotASubsequence(g.to_string()));
            }
            out.terms[i].1 -= m;
            if out.terms[i].1 == 0 {
                out.terms.remove(i);
            }
        }
        Ok(out)
    }

    /// Remove a single copy of `g`.
    pub fn remove_one(&self, g: &GroupElement) -> Result<Sequence, SequenceError> {
        self.remove(&Sequence::single(g.clone()))
    }

    /// True iff `self` is a sub-multiset of `other`.
    pub fn divides(&self, other: &Sequence) -> bool {
        self.terms.iter().all(|(g, m)| other.multiplicity(g) >= *m)
    }

    /// Parse the text form `"[(1,0)^2,(0,1)^3]"`; a missing `^k` means
    /// multiplicity 1, and `"[]"` is the empty sequence.
    pub fn parse(group: &Arc<GroupSpec>, s: &str) -> Result<Sequence, SequenceError> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|u| u.strip_suffix(']'))
            .ok_or_else(|| SequenceError::Parse(s.to_string()))?;
        let mut seq = Sequence::empty(group);
        let mut rest = inner.trim();
        while !rest.is_empty() {
            let close = rest.find(')').ok_or_else(|| SequenceError::Parse(s.to_string()))?;
            let element_str = &rest[..=close];
            let el = group
                .parse_element(element_str)
                .map_err(|_| SequenceError::Parse(s.to_string()))?;
            rest = rest[close + 1..].trim_start();
            let mult = if let Some(after) = rest.strip_prefix('^') {
                let end = after.find(',').unwrap_or(after.len());
                let m: u64 = after[..end]
                    .trim()
                    .parse()
                    .map_err(|_| SequenceError::Parse(s.to_string()))?;
                rest = &after[end..];
                m
            } else {
                1
            };
            rest = rest.trim_start();
            if let Some(after) = rest.strip_prefix(',') {
                rest = after.trim_start();
            } else if !rest.is_empty() {
                return Err(SequenceError::Parse(s.to_string()));
            }
            seq.push(el, mult)?;
        }
        Ok(seq)
    }
}

impl PartialOrd for Sequence {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Sequence {
    /// Lexicographic comparison of the expanded, canonically sorted term
    /// lists. This is the order atoms are enumerated and reported in.
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter_elements().cmp(other.iter_elements())
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (g, m)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{g}^{m}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    fn c(factors: &[u64]) -> Arc<GroupSpec> {
        GroupSpec::new(factors).unwrap()
    }

    #[test]
    fn sigma_basics() {
        let c24 = c(&[2, 4]);
        let g = c24.element(&[1, 0]).unwrap();
        let s = Sequence::power(g, 2);
        assert!(s.sigma().is_zero());
        assert!(Sequence::empty(&c24).sigma().is_zero());

        let c5 = c(&[5]);
        let h = c5.element(&[1]).unwrap();
        assert!(Sequence::power(h.clone(), 5).sigma().is_zero());
        assert!(!Sequence::power(h, 4).sigma().is_zero());
    }

    #[test]
    fn subsequence_sums_examples() {
        let c5 = c(&[5]);
        let g = c5.element(&[1]).unwrap();
        let sums = Sequence::single(g.clone()).subsequence_sums();
        assert_eq!(sums, [g.clone()].into_iter().collect());

        let c3 = c(&[3]);
        let h = c3.element(&[1]).unwrap();
        let sums = Sequence::power(h.clone(), 2).subsequence_sums();
        let expected: BTreeSet<_> =
            [c3.element(&[1]).unwrap(), c3.element(&[2]).unwrap()].into_iter().collect();
        assert_eq!(sums, expected);

        let c22 = c(&[2, 2]);
        let e1 = c22.element(&[1, 0]).unwrap();
        let e2 = c22.element(&[0, 1]).unwrap();
        let s = Sequence::from_elements(&c22, [e1.clone(), e2.clone()]).unwrap();
        let expected: BTreeSet<_> =
            [e1.clone(), e2.clone(), e1.add(&e2)].into_iter().collect();
        assert_eq!(s.subsequence_sums(), expected);
    }

    /// Brute-force oracle over all nonempty sub-multisets.
    fn sums_by_bruteforce(s: &Sequence) -> BTreeSet<GroupElement> {
        let expanded: Vec<GroupElement> = s.iter_elements().cloned().collect();
        let mut out = BTreeSet::new();
        for mask in 1u32..(1 << expanded.len()) {
            let mut acc = s.group().zero();
            for (i, el) in expanded.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    acc = acc.add(el);
                }
            }
            out.insert(acc);
        }
        out
    }

    #[test]
    fn subsequence_sums_match_bruteforce() {
        // exhaustive over short sequences in a couple of small groups
        for factors in [vec![4], vec![2, 2], vec![2, 4], vec![3, 3]] {
            let spec = c(&factors);
            let elements: Vec<GroupElement> = spec.elements().collect();
            let n = elements.len();
            for a in 0..n {
                for b in a..n {
                    for d in b..n {
                        let s = Sequence::from_elements(
                            &spec,
                            [elements[a].clone(), elements[b].clone(), elements[d].clone()],
                        )
                        .unwrap();
                        assert_eq!(s.subsequence_sums(), sums_by_bruteforce(&s), "s = {s}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_sum_freeness() {
        let c5 = c(&[5]);
        let g = c5.element(&[1]).unwrap();
        assert!(Sequence::power(g.clone(), 4).is_zero_sum_free());
        assert!(!Sequence::power(g.clone(), 5).is_zero_sum_free());
        assert!(Sequence::empty(&c5).is_zero_sum_free());

        // basis powers over an elementary p-group
        let c33 = c(&[3, 3]);
        let e1 = c33.element(&[1, 0]).unwrap();
        let e2 = c33.element(&[0, 1]).unwrap();
        let s = Sequence::from_multiplicities(&c33, [(e1, 2), (e2, 2)]).unwrap();
        assert!(s.is_zero_sum_free());
    }

    #[test]
    fn atom_examples() {
        let c5 = c(&[5]);
        let g = c5.element(&[1]).unwrap();
        assert!(Sequence::power(g.clone(), 5).is_atom());
        assert!(!Sequence::power(g.clone(), 4).is_atom());
        assert!(!Sequence::power(g, 6).is_atom());

        // the single zero term is an atom
        let zero_atom = Sequence::single(c5.zero());
        assert!(zero_atom.is_atom());
        assert!(!Sequence::power(c5.zero(), 2).is_atom());

        let c22 = c(&[2, 2]);
        let e1 = c22.element(&[1, 0]).unwrap();
        let e2 = c22.element(&[0, 1]).unwrap();
        let e3 = e1.add(&e2);
        let t = Sequence::from_elements(&c22, [e1.clone(), e2.clone(), e3]).unwrap();
        assert!(t.is_atom());
        let not_minimal =
            Sequence::from_multiplicities(&c22, [(e1.clone(), 2), (e2.clone(), 2)]).unwrap();
        assert!(!not_minimal.is_atom());
        assert!(Sequence::empty(&c22).is_zero_sum_free());
        assert!(!Sequence::empty(&c22).is_atom());
    }

    /// Definition-level minimality oracle: zero sum and no proper nonempty
    /// sub-multiset with zero sum.
    fn atom_by_bruteforce(s: &Sequence) -> bool {
        if s.is_empty() || !s.sigma().is_zero() {
            return false;
        }
        let expanded: Vec<GroupElement> = s.iter_elements().cloned().collect();
        for mask in 1u32..(1 << expanded.len()) - 1 {
            let mut acc = s.group().zero();
            for (i, el) in expanded.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    acc = acc.add(el);
                }
            }
            if acc.is_zero() {
                return false;
            }
        }
        true
    }

    #[test]
    fn is_atom_matches_bruteforce_and_any_removed_term() {
        for factors in [vec![6], vec![2, 4], vec![3, 3]] {
            let spec = c(&factors);
            let elements: Vec<GroupElement> = spec.elements().collect();
            let n = elements.len();
            // all multisets of length 4 (indices non-decreasing)
            for a in 0..n {
                for b in a..n {
                    for d in b..n {
                        for e in d..n {
                            let s = Sequence::from_elements(
                                &spec,
                                [
                                    elements[a].clone(),
                                    elements[b].clone(),
                                    elements[d].clone(),
                                    elements[e].clone(),
                                ],
                            )
                            .unwrap();
                            let want = atom_by_bruteforce(&s);
                            assert_eq!(s.is_atom(), want, "s = {s}");
                            if s.sigma().is_zero() && !s.is_empty() {
                                // single-removal verdict must not depend on the term
                                for (g, _) in s.terms() {
                                    let verdict =
                                        s.remove_one(g).unwrap().is_zero_sum_free();
                                    assert_eq!(verdict, want, "removing {g} from {s}");
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn negate_and_pm_support() {
        let c5 = c(&[5]);
        let g = c5.element(&[1]).unwrap();
        let s = Sequence::power(g.clone(), 3);
        assert_eq!(s.negate(), Sequence::power(g.neg(), 3));
        assert_eq!(s.pm_support().len(), 2);

        let c22 = c(&[2, 2]);
        let e1 = c22.element(&[1, 0]).unwrap();
        let e2 = c22.element(&[0, 1]).unwrap();
        let t = Sequence::from_elements(&c22, [e1.clone(), e2.clone()]).unwrap();
        // 2-torsion: elements are self-negative
        assert_eq!(t.pm_support(), [e1, e2].into_iter().collect());
    }

    #[test]
    fn atom_negation_preserved() {
        let c33 = c(&[3, 3]);
        let e1 = c33.element(&[1, 0]).unwrap();
        let e2 = c33.element(&[0, 1]).unwrap();
        let u = Sequence::from_multiplicities(
            &c33,
            [(e1.clone(), 2), (e2.clone(), 2), (e1.add(&e2), 1)],
        )
        .unwrap();
        assert!(u.is_atom());
        assert!(u.negate().is_atom());
    }

    #[test]
    fn concat_remove() {
        let c5 = c(&[5]);
        let g = c5.element(&[1]).unwrap();
        let h = c5.element(&[2]).unwrap();
        let s = Sequence::single(g.clone());
        assert_eq!(s.concat(&s).unwrap(), Sequence::power(g.clone(), 2));

        let gg_h = Sequence::from_multiplicities(&c5, [(g.clone(), 2), (h.clone(), 1)]).unwrap();
        let gh = Sequence::from_elements(&c5, [g.clone(), h.clone()]).unwrap();
        assert_eq!(gg_h.remove(&Sequence::single(g.clone())).unwrap(), gh);
        assert!(Sequence::single(g.clone()).remove(&Sequence::single(h)).is_err());

        let t = Sequence::power(g.clone(), 2);
        assert_eq!(s.concat(&t).unwrap().len(), 3);
        assert_eq!(
            s.concat(&t).unwrap().sigma(),
            s.sigma().add(&t.sigma())
        );
    }

    #[test]
    fn atoms_of_length_two_or_more_avoid_zero() {
        let c24 = c(&[2, 4]);
        let elements: Vec<GroupElement> = c24.elements().collect();
        for a in &elements {
            for b in &elements {
                let s = Sequence::from_elements(&c24, [a.clone(), b.clone()]).unwrap();
                if s.is_atom() && s.len() >= 2 {
                    assert!(s.multiplicity(&c24.zero()) == 0);
                }
            }
        }
    }

    #[test]
    fn display_and_parse() {
        let c24 = c(&[2, 4]);
        let e1 = c24.element(&[1, 0]).unwrap();
        let e2 = c24.element(&[0, 1]).unwrap();
        let s = Sequence::from_multiplicities(&c24, [(e1, 2), (e2, 3)]).unwrap();
        // display uses the canonical element order: (0,1) < (1,0)
        assert_eq!(s.to_string(), "[(0,1)^3,(1,0)^2]");
        assert_eq!(Sequence::parse(&c24, "[(1,0)^2,(0,1)^3]").unwrap(), s);
        assert_eq!(Sequence::parse(&c24, "[]").unwrap(), Sequence::empty(&c24));
        assert_eq!(
            Sequence::parse(&c24, "[(1,0),(0,1)^3,(1,0)]").unwrap(),
            Sequence::parse(&c24, "[(1,0)^2,(0,1)^3]").unwrap()
        );
        assert!(Sequence::parse(&c24, "(1,0)^2").is_err());
        assert!(Sequence::parse(&c24, "[(1,0)^a]").is_err());
    }

    #[test]
    fn canonical_order_is_expanded_lex() {
        let c24 = c(&[2, 4]);
        let e1 = c24.element(&[0, 1]).unwrap();
        let e2 = c24.element(&[0, 2]).unwrap();
        let a = Sequence::from_multiplicities(&c24, [(e1.clone(), 2), (e2.clone(), 1)]).unwrap();
        let b = Sequence::from_multiplicities(&c24, [(e1.clone(), 1), (e2.clone(), 1)]).unwrap();
        // expanded: [e1,e1,e2] vs [e1,e2]; position 1: e1 < e2
        assert!(a < b);
        let prefix = Sequence::power(e1.clone(), 1);
        assert!(prefix < a);
    }
}
