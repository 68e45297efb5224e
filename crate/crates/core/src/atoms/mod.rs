//! Exhaustive enumeration of atoms (minimal zero-sum sequences) over a
//! support set, exact Davenport constants, and maximal-length atoms.
//!
//! All searches are depth-first over non-decreasing term lists in the
//! canonical element order, so permutation duplicates never arise and the
//! output order is deterministic. A partial sequence is extended only while
//! it is zero-sum free; a branch is emitted as an atom exactly when appending
//! one final term makes the sum zero (the prefix being zero-sum free is the
//! single-removal minimality criterion for the appended term).
//!
//! Each search runs on one thread and its output is independent of anything
//! else in the process; callers parallelize across supports or groups, never
//! inside a search, so results are bit-identical regardless of worker count.

mod cache;
mod search;

pub use cache::{enumerate_atoms_cached, AtomCache};
pub use search::MAX_TABLE_ORDER;

use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::group::{GroupElement, GroupSpec};
use crate::sequence::Sequence;
use search::{GroupTable, IndexBitSet};

/// Caps for the enumeration engines. Exceeding any cap degrades the result to
/// `complete = false`; it never silently truncates a "complete" answer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnumerationBudget {
    /// Longest atom length to enumerate; `None` lets the search run to its
    /// natural bound (atoms over a set generating a subgroup `H` never exceed
    /// `|H|` terms, so every search self-terminates).
    pub max_length: Option<u64>,
    /// Cap on the number of atoms collected.
    pub max_atoms: Option<usize>,
    /// Cap on visited search nodes.
    pub max_nodes: Option<u64>,
    /// Wall-clock cap.
    pub time_limit: Option<Duration>,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_length: None,
            max_atoms: None,
            max_nodes: Some(10_000_000),
            time_limit: None,
        }
    }
}

impl EnumerationBudget {
    /// No caps at all; the searches still terminate, only their natural
    /// exponential bound applies.
    pub fn unlimited() -> Self {
        EnumerationBudget { max_length: None, max_atoms: None, max_nodes: None, time_limit: None }
    }

    pub fn with_max_nodes(mut self, nodes: u64) -> Self {
        self.max_nodes = Some(nodes);
        self
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    fn tracker(&self) -> BudgetTracker {
        BudgetTracker {
            max_nodes: self.max_nodes,
            deadline: self.time_limit.map(|d| Instant::now() + d),
            nodes: 0,
            nodes_hit: false,
            time_hit: false,
        }
    }
}

/// Which caps were hit during a search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapsHit {
    pub nodes: bool,
    pub time: bool,
    pub atoms: bool,
    pub length: bool,
}

impl CapsHit {
    pub fn any(&self) -> bool {
        self.nodes || self.time || self.atoms || self.length
    }
}

/// Resource usage of a finished search. Wall-clock time is kept out of the
/// serialized form so that persisted results are deterministic.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    #[serde(skip)]
    pub elapsed_ms: u64,
    pub caps: CapsHit,
}

struct BudgetTracker {
    max_nodes: Option<u64>,
    deadline: Option<Instant>,
    nodes: u64,
    nodes_hit: bool,
    time_hit: bool,
}

impl BudgetTracker {
    #[inline]
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if let Some(m) = self.max_nodes {
            if self.nodes > m {
                self.nodes_hit = true;
                return false;
            }
        }
        if self.nodes & 63 == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.time_hit = true;
                    return false;
                }
            }
        }
        true
    }
}

/// The atoms found over a support set. `complete = true` asserts that every
/// atom over the support (within `max_length`, when one was given) is listed.
#[derive(Debug, Clone)]
pub struct AtomSet {
    pub group: Arc<GroupSpec>,
    pub support: Vec<GroupElement>,
    pub atoms: Vec<Sequence>,
    pub complete: bool,
    pub stats: SearchStats,
}

impl AtomSet {
    /// Lengths of the atoms, in enumeration order.
    pub fn lengths(&self) -> Vec<u64> {
        self.atoms.iter().map(|a| a.len()).collect()
    }
}

fn normalize_support(g0: &[GroupElement]) -> (Arc<GroupSpec>, Vec<GroupElement>) {
    assert!(!g0.is_empty(), "support set must be nonempty");
    let group = Arc::clone(g0[0].group());
    for g in g0 {
        assert_eq!(
            g.group().invariant_factors(),
            group.invariant_factors(),
            "support elements must share one group"
        );
    }
    let mut sorted: Vec<GroupElement> = g0.to_vec();
    sorted.sort();
    sorted.dedup();
    (group, sorted)
}

struct AtomDfs<'a> {
    table: &'a GroupTable,
    support: &'a [u32],
    zero: u32,
    max_length: Option<u64>,
    max_atoms: Option<usize>,
    tracker: BudgetTracker,
    prefix: Vec<u32>,
    atoms: Vec<Vec<u32>>,
    atoms_hit: bool,
    length_hit: bool,
}

impl AtomDfs<'_> {
    fn emit(&mut self, closing: u32) -> bool {
        if let Some(cap) = self.max_atoms {
            if self.atoms.len() >= cap {
                self.atoms_hit = true;
                return false;
            }
        }
        let mut atom = self.prefix.clone();
        atom.push(closing);
        self.atoms.push(atom);
        true
    }

    fn recurse(&mut self, start: usize, sum: u32, reach: &IndexBitSet) -> bool {
        for pos in start..self.support.len() {
            if !self.tracker.tick() {
                return false;
            }
            let g = self.support[pos];
            let new_sum = self.table.add(sum, g);
            let new_len = self.prefix.len() as u64 + 1;
            if new_sum == self.zero {
                if self.max_length.is_none_or(|m| new_len <= m) {
                    if !self.emit(g) {
                        return false;
                    }
                } else {
                    self.length_hit = true;
                }
                continue;
            }
            let new_reach = reach.with_added(self.table, g);
            if new_reach.contains(self.zero) {
                continue; // the extension has a proper zero subsum; no atom continues it
            }
            if self.max_length.is_none_or(|m| new_len < m) {
                self.prefix.push(g);
                let go_on = self.recurse(pos, new_sum, &new_reach);
                self.prefix.pop();
                if !go_on {
                    return false;
                }
            } else {
                // live zero-sum-free prefix at the cap: longer atoms may exist
                self.length_hit = true;
            }
        }
        true
    }
}

/// Enumerate every atom whose terms come from `g0`, subject to the budget.
pub fn enumerate_atoms(g0: &[GroupElement], budget: &EnumerationBudget) -> AtomSet {
    let started = Instant::now();
    let (group, support) = normalize_support(g0);
    let table = GroupTable::new(&group);
    let support_idx: Vec<u32> = support.iter().map(|g| group.index_of(g) as u32).collect();
    let zero = group.index_of(&group.zero()) as u32;

    let mut dfs = AtomDfs {
        table: &table,
        support: &support_idx,
        zero,
        max_length: budget.max_length,
        max_atoms: budget.max_atoms,
        tracker: budget.tracker(),
        prefix: Vec::new(),
        atoms: Vec::new(),
        atoms_hit: false,
        length_hit: false,
    };
    let reach = IndexBitSet::new(table.n);
    dfs.recurse(0, zero, &reach);

    let caps = CapsHit {
        nodes: dfs.tracker.nodes_hit,
        time: dfs.tracker.time_hit,
        atoms: dfs.atoms_hit,
        length: dfs.length_hit,
    };
    let atoms: Vec<Sequence> = dfs
        .atoms
        .iter()
        .map(|indices| indices_to_sequence(&group, &table, indices))
        .collect();
    debug_assert!(atoms.iter().all(|a| a.is_atom()));
    AtomSet {
        group,
        support,
        atoms,
        complete: !caps.any(),
        stats: SearchStats {
            nodes: dfs.tracker.nodes,
            elapsed_ms: started.elapsed().as_millis() as u64,
            caps,
        },
    }
}

fn indices_to_sequence(group: &Arc<GroupSpec>, table: &GroupTable, indices: &[u32]) -> Sequence {
    Sequence::from_elements(group, indices.iter().map(|&i| table.elements[i as usize].clone()))
        .expect("indices come from one group")
}

/// Result of the Davenport search. When `complete` is false the value is only
/// a lower bound, witnessed all the same.
#[derive(Debug, Clone)]
pub struct DavenportResult {
    pub value: u64,
    /// A zero-sum-free sequence of length `value - 1`.
    pub witness: Sequence,
    pub complete: bool,
    pub stats: SearchStats,
}

struct DavenportDfs<'a> {
    table: &'a GroupTable,
    support: &'a [u32],
    zero: u32,
    tracker: BudgetTracker,
    prefix: Vec<u32>,
    best_len: u64,
    best: Vec<u32>,
}

impl DavenportDfs<'_> {
    fn recurse(&mut self, start: usize, reach: &IndexBitSet) -> bool {
        for pos in start..self.support.len() {
            if !self.tracker.tick() {
                return false;
            }
            let g = self.support[pos];
            let new_reach = reach.with_added(self.table, g);
            if new_reach.contains(self.zero) {
                continue;
            }
            let new_len = self.prefix.len() as u64 + 1;
            self.prefix.push(g);
            if new_len > self.best_len {
                self.best_len = new_len;
                self.best = self.prefix.clone();
            }
            // Appending a term to a zero-sum-free sequence strictly grows its
            // subsequence-sum set, and that set avoids zero, so no extension
            // can get longer than new_len + (n - 1 - |sums|).
            let ceiling = new_len + (self.table.n as u64 - 1 - new_reach.len() as u64);
            let go_on = if ceiling > self.best_len { self.recurse(pos, &new_reach) } else { true };
            self.prefix.pop();
            if !go_on {
                return false;
            }
        }
        true
    }
}

/// Standard-basis zero-sum-free sequence of length `d_star - 1`; seeds the
/// Davenport search so weak branches are pruned from the start.
fn d_star_witness(group: &Arc<GroupSpec>) -> Sequence {
    let pairs = (0..group.rank())
        .map(|i| (group.standard_generator(i), group.invariant_factors()[i] - 1));
    Sequence::from_multiplicities(group, pairs).expect("basis elements live in the group")
}

/// Exact Davenport constant with a longest zero-sum-free witness.
pub fn davenport(group: &Arc<GroupSpec>, budget: &EnumerationBudget) -> DavenportResult {
    let started = Instant::now();
    if group.is_trivial() {
        return DavenportResult {
            value: 1,
            witness: Sequence::empty(group),
            complete: true,
            stats: SearchStats::default(),
        };
    }
    let table = GroupTable::new(group);
    let support_idx: Vec<u32> =
        group.nonzero_elements().map(|g| group.index_of(&g) as u32).collect();
    let zero = group.index_of(&group.zero()) as u32;

    let seed = d_star_witness(group);
    let seed_idx: Vec<u32> = seed.iter_elements().map(|g| group.index_of(g) as u32).collect();
    let mut dfs = DavenportDfs {
        table: &table,
        support: &support_idx,
        zero,
        tracker: budget.tracker(),
        prefix: Vec::new(),
        best_len: seed.len(),
        best: seed_idx,
    };
    let reach = IndexBitSet::new(table.n);
    dfs.recurse(0, &reach);

    let caps = CapsHit {
        nodes: dfs.tracker.nodes_hit,
        time: dfs.tracker.time_hit,
        ..CapsHit::default()
    };
    let witness = indices_to_sequence(group, &table, &dfs.best);
    debug_assert!(witness.is_zero_sum_free());
    DavenportResult {
        value: dfs.best_len + 1,
        witness,
        complete: !caps.any(),
        stats: SearchStats {
            nodes: dfs.tracker.nodes,
            elapsed_ms: started.elapsed().as_millis() as u64,
            caps,
        },
    }
}

/// Davenport value plus the full list of atoms of that maximal length.
#[derive(Debug, Clone)]
pub struct MaxAtoms {
    pub davenport: DavenportResult,
    pub atoms: AtomSet,
    /// When set, exactly one of each pair `{U, -U}` is kept (the property
    /// checks downstream are invariant under global negation).
    pub dedup_negation: bool,
}

struct MaxAtomDfs<'a> {
    table: &'a GroupTable,
    support: &'a [u32],
    zero: u32,
    target: u64,
    tracker: BudgetTracker,
    prefix: Vec<u32>,
    atoms: Vec<Vec<u32>>,
    max_atoms: Option<usize>,
    atoms_hit: bool,
}

impl MaxAtomDfs<'_> {
    fn recurse(&mut self, start: usize, sum: u32, reach: &IndexBitSet) -> bool {
        let len = self.prefix.len() as u64;
        if len == self.target - 1 {
            if !self.tracker.tick() {
                return false;
            }
            // only one element can close the atom; take it if it keeps the
            // term list non-decreasing
            let needed = self.table.neg(sum);
            if self.support[start..].binary_search(&needed).is_ok() {
                if let Some(cap) = self.max_atoms {
                    if self.atoms.len() >= cap {
                        self.atoms_hit = true;
                        return false;
                    }
                }
                let mut atom = self.prefix.clone();
                atom.push(needed);
                self.atoms.push(atom);
            }
            return true;
        }
        for pos in start..self.support.len() {
            if !self.tracker.tick() {
                return false;
            }
            let g = self.support[pos];
            let new_sum = self.table.add(sum, g);
            if new_sum == self.zero {
                continue; // closes an atom shorter than the target
            }
            let new_reach = reach.with_added(self.table, g);
            if new_reach.contains(self.zero) {
                continue;
            }
            // longest atom through this prefix
            let ceiling = (len + 1) + (self.table.n as u64 - 1 - new_reach.len() as u64) + 1;
            if ceiling < self.target {
                continue;
            }
            self.prefix.push(g);
            let go_on = self.recurse(pos, new_sum, &new_reach);
            self.prefix.pop();
            if !go_on {
                return false;
            }
        }
        true
    }
}

/// Enumerate every atom of length exactly `target` whose terms are nonzero
/// elements of the group. Used with `target = davenport(G)` for the
/// maximal-length atoms.
pub fn atoms_of_length(group: &Arc<GroupSpec>, target: u64, budget: &EnumerationBudget) -> AtomSet {
    assert!(target >= 2, "lengths below 2 have no atoms over nonzero elements");
    let started = Instant::now();
    let table = GroupTable::new(group);
    let support: Vec<GroupElement> = group.nonzero_elements().collect();
    let support_idx: Vec<u32> = support.iter().map(|g| group.index_of(g) as u32).collect();
    let zero = group.index_of(&group.zero()) as u32;
    let mut dfs = MaxAtomDfs {
        table: &table,
        support: &support_idx,
        zero,
        target,
        tracker: budget.tracker(),
        prefix: Vec::new(),
        atoms: Vec::new(),
        max_atoms: budget.max_atoms,
        atoms_hit: false,
    };
    let reach = IndexBitSet::new(table.n);
    dfs.recurse(0, zero, &reach);

    let caps = CapsHit {
        nodes: dfs.tracker.nodes_hit,
        time: dfs.tracker.time_hit,
        atoms: dfs.atoms_hit,
        ..CapsHit::default()
    };
    let atoms: Vec<Sequence> = dfs
        .atoms
        .iter()
        .map(|indices| indices_to_sequence(group, &table, indices))
        .collect();
    debug_assert!(atoms.iter().all(|a| a.is_atom() && a.len() == target));
    AtomSet {
        group: Arc::clone(group),
        support,
        atoms,
        complete: !caps.any(),
        stats: SearchStats {
            nodes: dfs.tracker.nodes,
            elapsed_ms: started.elapsed().as_millis() as u64,
            caps,
        },
    }
}

/// Enumerate every atom of length exactly `davenport(G)` over the whole
/// group. Runs the Davenport search first.
pub fn enumerate_max_atoms(
    group: &Arc<GroupSpec>,
    budget: &EnumerationBudget,
    dedup_negation: bool,
) -> MaxAtoms {
    let started = Instant::now();
    let dav = davenport(group, budget);
    if group.is_trivial() {
        let atoms = AtomSet {
            group: Arc::clone(group),
            support: vec![group.zero()],
            atoms: vec![Sequence::single(group.zero())],
            complete: true,
            stats: SearchStats::default(),
        };
        return MaxAtoms { davenport: dav, atoms, dedup_negation };
    }
    if !dav.complete {
        // Without the exact constant the notion "maximal length" is not
        // settled; report an empty, incomplete set.
        let atoms = AtomSet {
            group: Arc::clone(group),
            support: group.nonzero_elements().collect(),
            atoms: Vec::new(),
            complete: false,
            stats: dav.stats.clone(),
        };
        return MaxAtoms { davenport: dav, atoms, dedup_negation };
    }

    let mut atoms = atoms_of_length(group, dav.value, budget);
    if dedup_negation {
        atoms.atoms.retain(|u| *u <= u.negate());
    }
    atoms.stats.nodes += dav.stats.nodes;
    atoms.stats.elapsed_ms = started.elapsed().as_millis() as u64;
    MaxAtoms { davenport: dav, atoms, dedup_negation }
}
