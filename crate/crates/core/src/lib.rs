//! Exact zero-sum invariants of finite abelian groups.
//!
//! The crate enumerates minimal zero-sum sequences (atoms) over subsets of a
//! finite abelian group, computes Davenport constants by exhaustive pruned
//! search, derives sets of factorization lengths, distance sets and
//! elasticities, and decides the distance-one factorization property for
//! maximal-length atoms by an exact integer-kernel computation over the
//! atom-multiplicity matrix, cross-checked against an independent brute-force
//! factorization engine.

pub(crate) mod arith;

pub mod atoms;
pub mod group;
pub mod lattice;
pub mod lengths;
pub mod sequence;
pub mod verifier;

pub use atoms::{
    atoms_of_length, davenport, enumerate_atoms, enumerate_max_atoms, AtomSet, EnumerationBudget,
};
pub use group::{GroupElement, GroupError, GroupSpec};
pub use lattice::{build_atom_matrix, integer_kernel, kernel_sum_gcd, AtomMatrix, KernelBasis, Witness};
pub use lengths::{delta_of, min_delta_bruteforce, rho_of, set_of_lengths, LengthSet};
pub use sequence::{Sequence, SequenceError};
pub use verifier::{classify_group, verify_group, VerificationReport, Verdict, VerifyOptions};
