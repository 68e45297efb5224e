//! On-disk cache for completed atom enumerations.
//!
//! Records are keyed by (canonical group string, sorted support, max length).
//! A hit is re-validated against the stored parameters and a checksum of the
//! key before being trusted; anything that does not match is treated as a
//! miss and recomputed. Only complete results are stored.

use std::fs;
use std::io;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arith::fnv1a64;
use crate::group::{GroupElement, GroupSpec};
use crate::sequence::Sequence;

use super::{enumerate_atoms, AtomSet, EnumerationBudget, SearchStats};

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    group: String,
    support: Vec<String>,
    max_length: Option<u64>,
    complete: bool,
    atoms: Vec<String>,
    checksum: String,
}

#[derive(Debug, Clone)]
pub struct AtomCache {
    dir: PathBuf,
}

impl AtomCache {
    pub fn new(dir: impl Into<PathBuf>) -> io::Result<AtomCache> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(AtomCache { dir })
    }

    fn key(group: &GroupSpec, support: &[GroupElement], max_length: Option<u64>) -> String {
        let supp: Vec<String> = support.iter().map(|g| g.to_string()).collect();
        format!("{}|{}|{:?}", group.canonical_name(), supp.join(""), max_length)
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("atoms-{:016x}.json", fnv1a64(key.as_bytes())))
    }

    pub fn load(
        &self,
        group: &Arc<GroupSpec>,
        support: &[GroupElement],
        max_length: Option<u64>,
    ) -> Option<AtomSet> {
        let key = Self::key(group, support, max_length);
        let text = fs::read_to_string(self.path_for(&key)).ok()?;
        let record: CacheRecord = serde_json::from_str(&text).ok()?;
        // cheap re-validation: parameters and key checksum must both match
        if record.checksum != format!("{:016x}", fnv1a64(key.as_bytes())) {
            return None;
        }
        if record.group != group.canonical_name() || record.max_length != max_length {
            return None;
        }
        let stored_support: Vec<String> = support.iter().map(|g| g.to_string()).collect();
        if record.support != stored_support || !record.complete {
            return None;
        }
        let atoms: Option<Vec<Sequence>> =
            record.atoms.iter().map(|s| Sequence::parse(group, s).ok()).collect();
        Some(AtomSet {
            group: Arc::clone(group),
            support: support.to_vec(),
            atoms: atoms?,
            complete: true,
            stats: SearchStats::default(),
        })
    }

    pub fn store(&self, set: &AtomSet, max_length: Option<u64>) -> io::Result<()> {
        if !set.complete {
            return Ok(());
        }
        let key = Self::key(&set.group, &set.support, max_length);
        let record = CacheRecord {
            group: set.group.canonical_name(),
            support: set.support.iter().map(|g| g.to_string()).collect(),
            max_length,
            complete: true,
            atoms: set.atoms.iter().map(|a| a.to_string()).collect(),
            checksum: format!("{:016x}", fnv1a64(key.as_bytes())),
        };
        let tmp = self.path_for(&key).with_extension("tmp");
        fs::write(&tmp, serde_json::to_string_pretty(&record)?)?;
        fs::rename(&tmp, self.path_for(&key))
    }
}

/// [`enumerate_atoms`] with an optional read-through cache.
pub fn enumerate_atoms_cached(
    g0: &[GroupElement],
    budget: &EnumerationBudget,
    cache: Option<&AtomCache>,
) -> AtomSet {
    let mut sorted: Vec<GroupElement> = g0.to_vec();
    sorted.sort();
    sorted.dedup();
    if let Some(cache) = cache {
        if !sorted.is_empty() {
            let group = Arc::clone(sorted[0].group());
            if let Some(hit) = cache.load(&group, &sorted, budget.max_length) {
                return hit;
            }
        }
    }
    let set = enumerate_atoms(&sorted, budget);
    if let Some(cache) = cache {
        let _ = cache.store(&set, budget.max_length);
    }
    set
}
