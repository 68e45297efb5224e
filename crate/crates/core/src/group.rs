//! Finite abelian groups presented by their invariant factors, with exact
//! element arithmetic and the elementary structure theory the rest of the
//! crate builds on.
//!
//! A group is always stored in canonical form `C_{n1} x ... x C_{nr}` with
//! `1 < n1 | n2 | ... | nr`; two groups are equal iff their factor lists are.
//! Elements carry a handle to their group, are stored reduced, and every
//! operation on mismatched groups is a hard error rather than silent garbage.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_integer::Integer;
use thiserror::Error;

use crate::arith::{is_prime, prime_factors};

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("cyclic orders must be >= 1, got {0}")]
    NonPositiveOrder(u64),
    #[error("element of {got} used where an element of {expected} was expected")]
    GroupMismatch { expected: String, got: String },
    #[error("coordinate vector of length {got} does not match rank {expected}")]
    CoordinateLength { expected: usize, got: usize },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("the given elements do not generate the whole group")]
    DoesNotGenerate,
    #[error("group is not of the shape p^s1-layer \u{2295} p^s2-layer with s1 < s2")]
    NotTwoLayered,
    #[error("cannot parse group literal {0:?}")]
    ParseGroup(String),
    #[error("cannot parse element literal {0:?}")]
    ParseElement(String),
}

/// A finite abelian group in invariant-factor form.
///
/// Constructed through [`GroupSpec::new`], which canonicalizes an arbitrary
/// direct sum of cyclic groups, so the factor list always satisfies the
/// divisibility chain. The empty list is the trivial group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    factors: Vec<u64>,
}

impl GroupSpec {
    /// Canonicalize `C_{m1} x ... x C_{mk}` to invariant factors.
    ///
    /// Factors of 1 are dropped (possibly leaving the trivial group); a zero
    /// entry is rejected. Canonicalization replaces non-dividing pairs by
    /// their (gcd, lcm) until the divisibility chain holds, which needs no
    /// prime factorization and is exact.
    pub fn new(cyclic_orders: &[u64]) -> Result<Arc<GroupSpec>, GroupError> {
        let mut factors = Vec::with_capacity(cyclic_orders.len());
        for &m in cyclic_orders {
            if m == 0 {
                return Err(GroupError::NonPositiveOrder(m));
            }
            if m > 1 {
                factors.push(m);
            }
        }
        loop {
            let mut changed = false;
            factors.sort_unstable();
            for i in 0..factors.len() {
                for j in i + 1..factors.len() {
                    if factors[j] % factors[i] != 0 {
                        let g = factors[i].gcd(&factors[j]);
                        let l = factors[i] / g * factors[j];
                        factors[i] = g;
                        factors[j] = l;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        factors.retain(|&f| f > 1);
        factors.sort_unstable();
        debug_assert!(factors.windows(2).all(|w| w[1] % w[0] == 0));
        Ok(Arc::new(GroupSpec { factors }))
    }

    /// The trivial group.
    pub fn trivial() -> Arc<GroupSpec> {
        Arc::new(GroupSpec { factors: Vec::new() })
    }

    /// Parse a group literal: either `"C2xC4"` / `"C2^2xC4"` or a plain
    /// comma-separated list of cyclic orders `"2,4"`.
    pub fn parse(s: &str) -> Result<Arc<GroupSpec>, GroupError> {
        let t = s.trim();
        if t.is_empty() {
            return Err(GroupError::ParseGroup(s.to_string()));
        }
        let mut orders = Vec::new();
        if t.chars().any(|c| c == 'C' || c == 'c') {
            for part in t.split(['x', 'X']) {
                let part = part.trim();
                let body = part
                    .strip_prefix('C')
                    .or_else(|| part.strip_prefix('c'))
                    .ok_or_else(|| GroupError::ParseGroup(part.to_string()))?;
                let (base, power) = match body.split_once('^') {
                    Some((b, p)) => {
                        let power: u32 =
                            p.trim().parse().map_err(|_| GroupError::ParseGroup(part.to_string()))?;
                        (b, power)
                    }
                    None => (body, 1),
                };
                let n: u64 =
                    base.trim().parse().map_err(|_| GroupError::ParseGroup(part.to_string()))?;
                for _ in 0..power {
                    orders.push(n);
                }
            }
        } else {
            for part in t.split(',') {
                let n: u64 =
                    part.trim().parse().map_err(|_| GroupError::ParseGroup(part.to_string()))?;
                orders.push(n);
            }
        }
        GroupSpec::new(&orders)
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    /// Number of elements.
    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    /// Largest order of an element; 1 for the trivial group.
    pub fn exponent(&self) -> u64 {
        self.factors.last().copied().unwrap_or(1)
    }

    /// Rank, the maximum of the p-ranks over all primes. With the factor list
    /// in invariant-factor form this is just its length, since every prime
    /// dividing the first factor divides all of them.
    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    /// Number of invariant factors divisible by the prime `p`.
    pub fn p_rank(&self, p: u64) -> Result<usize, GroupError> {
        if !is_prime(p) {
            return Err(GroupError::NotPrime(p));
        }
        Ok(self.factors.iter().filter(|&&f| f % p == 0).count())
    }

    /// The invariant-factor lower bound `1 + sum (n_i - 1)` for the Davenport
    /// constant.
    pub fn d_star(&self) -> u64 {
        1 + self.factors.iter().map(|&f| f - 1).sum::<u64>()
    }

    /// Canonical display name, e.g. `"C2xC4"`; `"C1"` for the trivial group.
    pub fn canonical_name(&self) -> String {
        if self.factors.is_empty() {
            return "C1".to_string();
        }
        self.factors.iter().map(|f| format!("C{f}")).collect::<Vec<_>>().join("x")
    }

    /// Zero element.
    pub fn zero(self: &Arc<Self>) -> GroupElement {
        GroupElement { group: Arc::clone(self), coords: vec![0; self.factors.len()] }
    }

    /// Build an element from (possibly unreduced, possibly negative)
    /// coordinates.
    pub fn element(self: &Arc<Self>, coords: &[i64]) -> Result<GroupElement, GroupError> {
        if coords.len() != self.factors.len() {
            return Err(GroupError::CoordinateLength {
                expected: self.factors.len(),
                got: coords.len(),
            });
        }
        let reduced = coords
            .iter()
            .zip(&self.factors)
            .map(|(&c, &n)| c.rem_euclid(n as i64) as u64)
            .collect();
        Ok(GroupElement { group: Arc::clone(self), coords: reduced })
    }

    /// The `i`-th standard generator (1 in coordinate `i`).
    pub fn standard_generator(self: &Arc<Self>, i: usize) -> GroupElement {
        assert!(i < self.factors.len(), "generator index out of range");
        let mut coords = vec![0; self.factors.len()];
        coords[i] = 1;
        GroupElement { group: Arc::clone(self), coords }
    }

    /// Parse an element literal of the form `"(1,0)"`. Entries may be
    /// negative; they are reduced.
    pub fn parse_element(self: &Arc<Self>, s: &str) -> Result<GroupElement, GroupError> {
        let t = s.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|u| u.strip_suffix(')'))
            .ok_or_else(|| GroupError::ParseElement(s.to_string()))?;
        let mut coords = Vec::new();
        if !inner.trim().is_empty() {
            for part in inner.split(',') {
                let c: i64 =
                    part.trim().parse().map_err(|_| GroupError::ParseElement(s.to_string()))?;
                coords.push(c);
            }
        }
        self.element(&coords)
    }

    /// All elements in the canonical (lexicographic) order.
    pub fn elements(self: &Arc<Self>) -> ElementIter {
        ElementIter { group: Arc::clone(self), next: Some(vec![0; self.factors.len()]) }
    }

    /// All nonzero elements in canonical order.
    pub fn nonzero_elements(self: &Arc<Self>) -> impl Iterator<Item = GroupElement> {
        self.elements().filter(|g| !g.is_zero())
    }

    /// Rank of an element in the canonical order (mixed-radix encoding of its
    /// coordinates). Used as a dense table index by the search engines.
    pub fn index_of(&self, g: &GroupElement) -> usize {
        debug_assert_eq!(g.group.factors, self.factors);
        let mut idx = 0usize;
        for (c, n) in g.coords.iter().zip(&self.factors) {
            idx = idx * (*n as usize) + *c as usize;
        }
        idx
    }

    /// Inverse of [`GroupSpec::index_of`].
    pub fn element_at(self: &Arc<Self>, mut idx: usize) -> GroupElement {
        let mut coords = vec![0u64; self.factors.len()];
        for i in (0..self.factors.len()).rev() {
            let n = self.factors[i] as usize;
            coords[i] = (idx % n) as u64;
            idx /= n;
        }
        debug_assert_eq!(idx, 0, "element index out of range");
        GroupElement { group: Arc::clone(self), coords }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_name())
    }
}

pub struct ElementIter {
    group: Arc<GroupSpec>,
    next: Option<Vec<u64>>,
}

impl Iterator for ElementIter {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        let coords = self.next.take()?;
        let item = GroupElement { group: Arc::clone(&self.group), coords: coords.clone() };
        let mut succ = coords;
        let factors = self.group.invariant_factors();
        let mut i = factors.len();
        loop {
            if i == 0 {
                self.next = None;
                break;
            }
            i -= 1;
            if succ[i] + 1 < factors[i] {
                succ[i] += 1;
                for c in succ[i + 1..].iter_mut() {
                    *c = 0;
                }
                self.next = Some(succ);
                break;
            }
        }
        Some(item)
    }
}

/// An element of a [`GroupSpec`], stored with reduced coordinates.
#[derive(Clone)]
pub struct GroupElement {
    group: Arc<GroupSpec>,
    coords: Vec<u64>,
}

impl GroupElement {
    pub fn group(&self) -> &Arc<GroupSpec> {
        &self.group
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    fn check_same_group(&self, other: &GroupElement) -> Result<(), GroupError> {
        if self.group.factors != other.group.factors {
            return Err(GroupError::GroupMismatch {
                expected: self.group.canonical_name(),
                got: other.group.canonical_name(),
            });
        }
        Ok(())
    }

    /// Componentwise modular sum. Panics on mismatched groups; use
    /// [`GroupElement::checked_add`] for the fallible variant.
    pub fn add(&self, other: &GroupElement) -> GroupElement {
        self.checked_add(other).expect("group mismatch in element addition")
    }

    pub fn checked_add(&self, other: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_same_group(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .zip(&self.group.factors)
            .map(|((&a, &b), &n)| (a + b) % n)
            .collect();
        Ok(GroupElement { group: Arc::clone(&self.group), coords })
    }

    /// Additive inverse.
    pub fn neg(&self) -> GroupElement {
        let coords = self
            .coords
            .iter()
            .zip(&self.group.factors)
            .map(|(&a, &n)| if a == 0 { 0 } else { n - a })
            .collect();
        GroupElement { group: Arc::clone(&self.group), coords }
    }

    /// `k`-fold sum of the element.
    pub fn scale(&self, k: u64) -> GroupElement {
        let coords = self
            .coords
            .iter()
            .zip(&self.group.factors)
            .map(|(&a, &n)| ((a as u128 * k as u128) % n as u128) as u64)
            .collect();
        GroupElement { group: Arc::clone(&self.group), coords }
    }

    /// Order of the element: the least `k >= 1` with `k * g = 0`, computed per
    /// component as `n_i / gcd(c_i, n_i)` and combined by lcm.
    pub fn order(&self) -> u64 {
        let mut ord = 1u64;
        for (&c, &n) in self.coords.iter().zip(&self.group.factors) {
            let component = n / c.gcd(&n);
            ord = ord.lcm(&component);
        }
        ord
    }
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.group.factors == other.group.factors && self.coords == other.coords
    }
}

impl Eq for GroupElement {}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupElement {
    /// Lexicographic on coordinates; this is the fixed total order every
    /// enumeration in the crate relies on.
    fn cmp(&self, other: &Self) -> Ordering {
        self.group
            .factors
            .cmp(&other.group.factors)
            .then_with(|| self.coords.cmp(&other.coords))
    }
}

impl Hash for GroupElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.group.factors.hash(state);
        self.coords.hash(state);
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Closure of a generating set: the full subgroup it generates, always
/// containing zero. Idempotent by construction.
pub fn subgroup_generated(group: &Arc<GroupSpec>, gens: &[GroupElement]) -> BTreeSet<GroupElement> {
    let mut closure = BTreeSet::new();
    closure.insert(group.zero());
    let mut frontier: Vec<GroupElement> = vec![group.zero()];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = x.add(g);
            if closure.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    closure
}

/// Independence test: no entry is zero and the subgroup generated by the
/// tuple has order equal to the product of the entry orders. This matches the
/// coefficient-vector definition (any vanishing combination vanishes
/// termwise) and is polynomial in the subgroup size.
pub fn is_independent(tuple: &[GroupElement]) -> bool {
    if tuple.is_empty() {
        return true;
    }
    if tuple.iter().any(|g| g.is_zero()) {
        return false;
    }
    let group = tuple[0].group();
    let expected: u128 = tuple.iter().map(|g| g.order() as u128).product();
    if expected > group.order() as u128 {
        return false;
    }
    subgroup_generated(group, tuple).len() as u128 == expected
}

/// A tuple is a basis when it is independent and generates all of `G`.
pub fn is_basis(tuple: &[GroupElement], group: &Arc<GroupSpec>) -> bool {
    is_independent(tuple) && subgroup_generated(group, tuple).len() as u64 == group.order()
}

/// For a group of the shape `C_{p^s1}^{r1} \u{2295} C_{p^s2}^{r2}` with
/// `s1 < s2` and a generating set `g0`, select a subset of `g0` of size `r2`
/// that is independent with every member of order `p^s2` (so it is a basis of
/// a subgroup isomorphic to the high-order layer).
///
/// The construction projects onto the high-order layer and greedily picks
/// preimages of a projected basis; existence is guaranteed whenever the
/// preconditions hold.
pub fn extract_high_order_basis(
    group: &Arc<GroupSpec>,
    g0: &[GroupElement],
) -> Result<Vec<GroupElement>, GroupError> {
    let factors = group.invariant_factors();
    if factors.is_empty() {
        return Err(GroupError::NotTwoLayered);
    }
    let mut distinct: Vec<u64> = factors.to_vec();
    distinct.dedup();
    if distinct.len() != 2 {
        return Err(GroupError::NotTwoLayered);
    }
    let (low, high) = (distinct[0], distinct[1]);
    let p = prime_factors(low)[0];
    let check_power = |mut v: u64| {
        while v.is_multiple_of(p) {
            v /= p;
        }
        v == 1
    };
    if !check_power(low) || !check_power(high) {
        return Err(GroupError::NotTwoLayered);
    }
    let sorted_g0: BTreeSet<GroupElement> = g0.iter().cloned().collect();
    let gens: Vec<GroupElement> = sorted_g0.into_iter().collect();
    if subgroup_generated(group, &gens).len() as u64 != group.order() {
        return Err(GroupError::DoesNotGenerate);
    }

    let r1 = factors.iter().filter(|&&f| f == low).count();
    let r2 = factors.len() - r1;
    let high_layer = GroupSpec::new(&vec![high; r2])?;
    let project = |g: &GroupElement| -> GroupElement {
        let coords: Vec<i64> = g.coords()[r1..].iter().map(|&c| c as i64).collect();
        high_layer.element(&coords).expect("projection has the right length")
    };

    let mut chosen: Vec<GroupElement> = Vec::new();
    let mut projections: Vec<GroupElement> = Vec::new();
    for g in &gens {
        if chosen.len() == r2 {
            break;
        }
        let v = project(g);
        if v.order() != high {
            continue;
        }
        projections.push(v);
        if is_independent(&projections) {
            chosen.push(g.clone());
        } else {
            projections.pop();
        }
    }
    if chosen.len() != r2 {
        // Unreachable when the preconditions hold: the projections of a
        // generating set contain a basis of the high-order layer.
        return Err(GroupError::DoesNotGenerate);
    }
    debug_assert!(chosen.iter().all(|g| g.order() == high));
    debug_assert!(is_independent(&chosen));
    Ok(chosen)
}
