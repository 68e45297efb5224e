//! Report types for the verification pipeline, serializable as stable JSON,
//! plus the sweep summary CSV.

use serde::{Deserialize, Serialize};

use crate::atoms::EnumerationBudget;

/// Outcome of a verification, per atom and overall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    /// Conventional process exit code: 0 holds, 2 fails, 3 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Holds => 0,
            Verdict::Fails => 2,
            Verdict::Inconclusive => 3,
        }
    }
}

/// Which evidence settled an atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FastPath {
    /// gcd of the divisor constraints was already 1
    Divisor,
    /// an independent-tuple relation inside the support
    Relation,
    /// the kernel computation itself
    Kernel,
    /// direct length search (fallback mode)
    BruteForce,
}

/// Why a group is outside the scope of the verified property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exclusion {
    Trivial,
    Cyclic,
    ElementaryTwoGroup,
}

/// A structural condition under which the distance-one property is known to
/// hold, with the parameters that witness it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum KnownCase {
    /// p-group with gcd(exp(G) - 2, D(G) - 2) = 1
    PGroupCoprime { p: u64, davenport: u64 },
    /// `C_{p^s1}^{r1} + C_{p^s2}^{r2}` with s1 dividing s2
    TwoLayerHomocyclic { p: u64, s1: u32, s2: u32, r1: usize, r2: usize },
    /// exponent pq with gcd(pq - 2, D(G) - 2) = 1
    BiprimeCoprimeDavenport { p: u64, q: u64, davenport: u64 },
    /// exponent pq with gcd(pq - 2, p + q - 3) = 1
    BiprimeCoprimeSum { p: u64, q: u64 },
    /// exponent 2p with p - 1 a power of two
    BiprimeFermat { p: u64 },
    /// exponent 2p with p-rank 1
    BiprimeRankOne { p: u64 },
    /// exponent in [3, 11] other than 8
    SmallExponent { exponent: u64 },
}

impl KnownCase {
    pub fn label(&self) -> String {
        match self {
            KnownCase::PGroupCoprime { p, .. } => format!("p-group-coprime(p={p})"),
            KnownCase::TwoLayerHomocyclic { p, s1, s2, r1, r2 } => {
                format!("two-layer(p={p},s1={s1},s2={s2},r1={r1},r2={r2})")
            }
            KnownCase::BiprimeCoprimeDavenport { p, q, .. } => {
                format!("biprime-coprime-davenport(p={p},q={q})")
            }
            KnownCase::BiprimeCoprimeSum { p, q } => format!("biprime-coprime-sum(p={p},q={q})"),
            KnownCase::BiprimeFermat { p } => format!("biprime-fermat(p={p})"),
            KnownCase::BiprimeRankOne { p } => format!("biprime-rank-one(p={p})"),
            KnownCase::SmallExponent { exponent } => format!("small-exponent({exponent})"),
        }
    }
}

/// Structural classification of a group: either excluded from the property,
/// or the list of known sufficient conditions that apply.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseClassification {
    pub excluded: Option<Exclusion>,
    pub cases: Vec<KnownCase>,
    /// Conditions that could not be evaluated without the exact Davenport
    /// constant.
    pub pending: Vec<String>,
    /// Davenport constant the classification used, if any, and where it came
    /// from ("provided", "p-group formula").
    pub davenport: Option<u64>,
    pub davenport_source: Option<String>,
}

impl CaseClassification {
    pub fn label(&self) -> String {
        if let Some(excluded) = &self.excluded {
            return match excluded {
                Exclusion::Trivial => "excluded:trivial".to_string(),
                Exclusion::Cyclic => "excluded:cyclic".to_string(),
                Exclusion::ElementaryTwoGroup => "excluded:elementary-2-group".to_string(),
            };
        }
        if self.cases.is_empty() {
            return "no-known-case".to_string();
        }
        self.cases.iter().map(KnownCase::label).collect::<Vec<_>>().join("+")
    }
}

/// An explicit factorization pair: both sides multiply to the same sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub left: Vec<AtomCount>,
    pub right: Vec<AtomCount>,
    pub left_len: u64,
    pub right_len: u64,
    /// the common product, in sequence text form
    pub product: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomCount {
    pub atom: String,
    pub count: u64,
}

/// Serialized form of a relation certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationRecord {
    pub basis_shortcut: bool,
    pub tuple: Vec<String>,
    /// the element g with `scale * g = sum of coefficients[i] * tuple[i]`
    /// (absent for the basis shortcut)
    pub pivot: Option<String>,
    pub scale: Option<u64>,
    pub coefficients: Vec<u64>,
}

/// Verification outcome for one maximal-length atom.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomVerification {
    pub atom: String,
    pub length: u64,
    pub status: Verdict,
    pub fast_path: FastPath,
    /// Established minimum distance over the atom's plus-minus support; None
    /// when inconclusive or half-factorial.
    pub min_delta: Option<u64>,
    pub half_factorial: bool,
    /// gcd of the divisor constraints (0 = no constraint available)
    pub divisor_bound: u64,
    /// kernel gcd when the kernel ran (audit mode or full path)
    pub kernel_gcd: Option<u64>,
    pub support_size: usize,
    /// number of atoms over the plus-minus support when enumerated
    pub atom_count: Option<usize>,
    pub witness: Option<WitnessRecord>,
    pub relation: Option<RelationRecord>,
    pub note: Option<String>,
}

/// Deterministic resource counters; wall-clock time stays in memory only so
/// that report files are byte-stable across reruns.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ResourceUsage {
    pub davenport_nodes: u64,
    pub max_atom_nodes: u64,
    #[serde(skip)]
    pub elapsed_ms: u64,
}

/// Full per-group verification report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub group: String,
    pub invariant_factors: Vec<u64>,
    pub order: u64,
    pub exponent: u64,
    pub rank: usize,
    pub d_star: u64,
    pub davenport: u64,
    pub davenport_complete: bool,
    pub davenport_source: String,
    pub davenport_witness: String,
    pub classification: CaseClassification,
    pub audit: bool,
    pub dedup_negation: bool,
    pub brute_force: bool,
    pub budget: EnumerationBudget,
    /// true when the maximal-atom enumeration ran to completion
    pub enumeration_complete: bool,
    pub max_atom_count: usize,
    pub per_atom: Vec<AtomVerification>,
    pub overall: Verdict,
    /// largest established failing distance, when any atom fails
    pub worst_distance: Option<u64>,
    pub resources: ResourceUsage,
    pub note: Option<String>,
}

impl VerificationReport {
    /// One CSV row; see [`summary_csv`] for the header.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.group,
            self.davenport,
            self.d_star,
            self.classification.label(),
            match self.overall {
                Verdict::Holds => "holds",
                Verdict::Fails => "fails",
                Verdict::Inconclusive => "inconclusive",
            },
            self.worst_distance.map(|d| d.to_string()).unwrap_or_default(),
        )
    }
}

/// Sweep summary table.
pub fn summary_csv(reports: &[VerificationReport]) -> String {
    let mut out = String::from("group,davenport,d_star,classification,overall,worst_distance\n");
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
