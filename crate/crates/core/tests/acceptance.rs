//! Acceptance suite: one test per criterion, each printing an explicit
//! PASS line after its assertions (run with `--nocapture` to see them).
//!
//! Criteria:
//!   1. davenport_reference_values: exact D for cyclic groups, elementary
//!      2-groups, small p-groups and a rank-2 group
//!   2. distance_one_positive_groups: property holds (audited, witnessed)
//!   3. negative_controls: cyclic / elementary-2 failures, exact distances
//!   4. elementary_group_atom_powers: standard-basis atom over C_5^2 and the
//!      length set of (-U)U
//!   5. kernel_gcd_matches_bruteforce: oracle equivalence over >= 200 sampled
//!      supports in groups of order at most 9
//!   6. divisor_observations_hold: the established distance divides |V| - 2
//!      and ord(g) - 2 throughout
//!   7. fast_paths_agree_with_kernel: audited divisor / relation claims
//!      coincide with kernel gcd 1
//!   8. distance_and_elasticity_bounds: distances in [1, D-2], elasticity at
//!      most D/2 and attained by (-U)U
//!   9. declared_out_of_scope: documents what is intentionally not computed
//!      at this scale

mod common;

use std::sync::{Arc, OnceLock};

use common::Rng;
use num_rational::Ratio;
use zerosum::atoms::{
    davenport, enumerate_atoms, enumerate_max_atoms, EnumerationBudget,
};
use zerosum::group::{GroupElement, GroupSpec};
use zerosum::lattice::{build_atom_matrix, integer_kernel, kernel_sum_gcd};
use zerosum::lengths::{
    delta_of, for_each_zero_sum, min_delta_bruteforce, rho_of, set_of_lengths,
};
use zerosum::sequence::Sequence;
use zerosum::verifier::{
    atom_power_lengths, verify_group, Verdict, VerificationReport, VerifyOptions,
};

fn spec(factors: &[u64]) -> Arc<GroupSpec> {
    GroupSpec::new(factors).unwrap()
}

fn budget() -> EnumerationBudget {
    // generous: the searches terminate on their own at this scale
    EnumerationBudget::unlimited()
}

/// The positive instances: each is covered by a known structural condition.
fn positive_groups() -> Vec<Arc<GroupSpec>> {
    [
        vec![3u64, 3],
        vec![2, 4],
        vec![2, 2, 4],
        vec![4, 4],
        vec![2, 6],
        vec![2, 2, 6],
    ]
    .iter()
    .map(|f| spec(f))
    .collect()
}

/// Audited verification reports for the positive instances, computed once
/// and shared by the criteria that inspect them.
fn audited_reports() -> &'static Vec<VerificationReport> {
    static REPORTS: OnceLock<Vec<VerificationReport>> = OnceLock::new();
    REPORTS.get_or_init(|| {
        let opts = VerifyOptions { budget: budget(), audit: true, ..VerifyOptions::default() };
        positive_groups().iter().map(|g| verify_group(g, &opts)).collect()
    })
}

#[test]
fn criterion_1_davenport_reference_values() {
    // cyclic groups
    for n in 2u64..=12 {
        let result = davenport(&spec(&[n]), &budget());
        assert!(result.complete);
        assert_eq!(result.value, n, "D(C_{n})");
        assert!(result.witness.is_zero_sum_free());
        assert_eq!(result.witness.len(), n - 1);
    }
    // elementary 2-groups
    for r in 2usize..=5 {
        let result = davenport(&spec(&vec![2; r]), &budget());
        assert!(result.complete);
        assert_eq!(result.value, r as u64 + 1, "D(C_2^{r})");
    }
    // p-groups and a rank-2 group: D = d_star
    for factors in [
        vec![3u64, 3],
        vec![2, 4],
        vec![2, 2, 4],
        vec![4, 4],
        vec![3, 9],
        vec![2, 6],
    ] {
        let g = spec(&factors);
        let result = davenport(&g, &budget());
        assert!(result.complete);
        assert_eq!(result.value, g.d_star(), "D({}) = d*", g);
    }
    println!("ACCEPTANCE PASS: criterion 1 (davenport reference values)");
}

#[test]
fn criterion_2_distance_one_positive_groups() {
    for report in audited_reports() {
        assert_eq!(
            report.overall,
            Verdict::Holds,
            "distance-one property must hold for {}",
            report.group
        );
        assert!(report.enumeration_complete);
        assert!(report.max_atom_count > 0);
        assert!(
            !report.classification.cases.is_empty(),
            "{} is covered by a known condition",
            report.group
        );
        for atom in &report.per_atom {
            assert_eq!(atom.status, Verdict::Holds, "{} / {}", report.group, atom.atom);
            assert_eq!(atom.min_delta, Some(1));
            let w = atom
                .witness
                .as_ref()
                .unwrap_or_else(|| panic!("verified witness for {} / {}", report.group, atom.atom));
            assert_eq!(w.right_len, w.left_len + 1, "adjacent lengths");
            assert!(w.left_len >= 1 && !w.left.is_empty() && !w.right.is_empty());
        }
    }
    println!("ACCEPTANCE PASS: criterion 2 (distance-one holds on the positive groups)");
}

#[test]
fn criterion_3_negative_controls() {
    let controls: &[(&[u64], u64)] = &[
        (&[5], 3),
        (&[7], 5),
        (&[2, 2, 2], 2),
        (&[2, 2, 2, 2], 3),
    ];
    for (factors, expected_distance) in controls {
        let g = spec(factors);
        let report = verify_group(&g, &VerifyOptions { budget: budget(), ..Default::default() });
        assert_eq!(report.overall, Verdict::Fails, "{}", g);
        assert_eq!(report.worst_distance, Some(*expected_distance), "{}", g);
        for atom in &report.per_atom {
            assert_eq!(atom.status, Verdict::Fails);
            assert_eq!(atom.min_delta, Some(*expected_distance), "{} / {}", g, atom.atom);
            let w = atom.witness.as_ref().expect("failing atoms carry distance witnesses");
            assert_eq!(w.right_len - w.left_len, *expected_distance);
        }
    }
    println!("ACCEPTANCE PASS: criterion 3 (cyclic and elementary-2 negative controls)");
}

#[test]
fn criterion_4_elementary_group_atom_powers() {
    let report = atom_power_lengths(5, 2, 1, &budget()).unwrap();
    assert_eq!(report.atom_length, 9, "|U| = 9");
    assert_eq!(report.davenport, 9, "D(C_5^2) = 9");
    assert_eq!(report.atom_length, 2 * (5 - 1) + 1, "r(p-1) + 1");
    assert!(report.complete);
    assert_eq!(report.min_length, 2, "min L = 2k at k = 1");
    assert!(report.gap_above_min, "2k + 1 = 3 is not a factorization length");
    assert!(!report.lengths.contains(&3));
    assert_eq!(report.max_length, 9, "max L = D");
    assert_eq!(report.rho, "9/2", "elasticity D/2");

    // every nonzero element extends to a basis, hence lies in the support of
    // some maximal-length atom of the same shape
    let c55 = spec(&[5, 5]);
    for g in c55.nonzero_elements() {
        let mut partner = None;
        for h in c55.nonzero_elements() {
            if zerosum::group::is_basis(&[g.clone(), h.clone()], &c55) {
                partner = Some(h);
                break;
            }
        }
        let h = partner.expect("every nonzero element extends to a basis");
        let u = Sequence::from_multiplicities(
            &c55,
            [(g.clone(), 4), (h.clone(), 4), (g.add(&h), 1)],
        )
        .unwrap();
        assert!(u.is_atom());
        assert_eq!(u.len(), 9);
        assert!(u.multiplicity(&g) > 0);
    }
    println!("ACCEPTANCE PASS: criterion 4 (standard-basis atom powers over C5^2)");
}

#[test]
fn criterion_5_kernel_gcd_matches_bruteforce() {
    let groups = common::small_groups(9);
    assert_eq!(groups.len(), 12, "isomorphism classes of order 2..=9");
    let mut rng = Rng::new(0xacce_5500);
    let mut tested = 0usize;
    let mut realized = 0usize;
    let mut half_factorial = 0usize;
    let budget = budget();

    for group in &groups {
        let elements: Vec<GroupElement> = group.elements().collect();
        let mut supports: Vec<Vec<GroupElement>> = Vec::new();
        // the full nonzero support and a plus-minus-closed one first
        supports.push(group.nonzero_elements().collect());
        let first = elements.iter().find(|e| !e.is_zero()).unwrap();
        supports.push({
            let mut s = vec![first.clone(), first.neg()];
            s.sort();
            s.dedup();
            s
        });
        // random supports, sizes 1..=6, possibly containing zero
        while supports.len() < 18 {
            let size = 1 + rng.below(elements.len().min(6));
            let mut s: Vec<GroupElement> = (0..size)
                .map(|_| elements[rng.below(elements.len())].clone())
                .collect();
            s.sort();
            s.dedup();
            supports.push(s);
        }

        for support in supports {
            tested += 1;
            let atoms = enumerate_atoms(&support, &budget);
            assert!(atoms.complete, "small supports always enumerate completely");
            let matrix = build_atom_matrix(&atoms, false).unwrap();
            let gcd = kernel_sum_gcd(&integer_kernel(&matrix));
            let sample = min_delta_bruteforce(&support, 12, &budget);
            assert!(sample.complete);
            match sample.min_gap {
                Some(m) => {
                    realized += 1;
                    assert_eq!(
                        m, gcd,
                        "brute-force min gap {m} != kernel gcd {gcd} on {support:?} in {group}"
                    );
                }
                None => {
                    if gcd == 0 {
                        half_factorial += 1;
                    }
                    // gcd != 0 with nothing realized within the bound proves
                    // nothing either way (the search is one-sided)
                }
            }
            if gcd == 0 {
                assert_eq!(
                    sample.min_gap, None,
                    "half-factorial support {support:?} in {group} must realize no distance"
                );
            }
        }
    }
    assert!(tested >= 200, "need at least 200 sampled supports, got {tested}");
    assert!(realized >= 50, "sampling should realize plenty of distances, got {realized}");
    assert!(half_factorial >= 10);
    println!(
        "ACCEPTANCE PASS: criterion 5 (kernel gcd vs brute force on {tested} supports, \
         {realized} with realized distances, 100% agreement)"
    );
}

#[test]
fn criterion_6_divisor_observations_hold() {
    // over every plus-minus support arising from maximal atoms of the tested
    // groups: the established distance divides |V| - 2 for every atom V over
    // the support and ord(g) - 2 for every support element
    let mut groups = positive_groups();
    for control in [vec![5u64], vec![7], vec![2, 2, 2], vec![2, 2, 2, 2]] {
        groups.push(spec(&control));
    }
    let budget = budget();
    let mut checked_atoms = 0usize;
    for group in groups {
        let max = enumerate_max_atoms(&group, &budget, true);
        assert!(max.atoms.complete);
        for u in &max.atoms.atoms {
            let support: Vec<GroupElement> = u.pm_support().into_iter().collect();
            let atoms = enumerate_atoms(&support, &budget);
            assert!(atoms.complete);
            let matrix = build_atom_matrix(&atoms, false).unwrap();
            let d = kernel_sum_gcd(&integer_kernel(&matrix));
            for v in &atoms.atoms {
                checked_atoms += 1;
                if d == 0 {
                    assert_eq!(v.len(), 2, "half-factorial support admits only length-2 atoms");
                } else {
                    assert_eq!((v.len() - 2) % d, 0, "d = {d} must divide |V| - 2 for {v}");
                }
            }
            if d != 0 {
                for g in &support {
                    assert_eq!((g.order() - 2) % d, 0, "d = {d} must divide ord({g}) - 2");
                }
                assert_eq!((u.len() - 2) % d, 0, "d divides D - 2");
            }
        }
    }
    assert!(checked_atoms > 1000);
    println!(
        "ACCEPTANCE PASS: criterion 6 (divisor observations re-derived on {checked_atoms} atoms)"
    );
}

#[test]
fn criterion_7_fast_paths_agree_with_kernel() {
    let mut divisor_hits = 0usize;
    let mut relation_hits = 0usize;
    for report in audited_reports() {
        for atom in &report.per_atom {
            let kernel_gcd = atom
                .kernel_gcd
                .unwrap_or_else(|| panic!("audit mode runs the kernel for {}", atom.atom));
            if atom.divisor_bound == 1 {
                divisor_hits += 1;
                assert_eq!(kernel_gcd, 1, "divisor bound 1 with kernel gcd != 1 on {}", atom.atom);
            }
            if atom.relation.is_some() {
                relation_hits += 1;
                assert_eq!(kernel_gcd, 1, "relation certificate with kernel gcd != 1 on {}", atom.atom);
            }
        }
    }
    assert!(divisor_hits > 0, "the divisor fast path must fire somewhere");
    assert!(relation_hits > 0, "the relation fast path must fire somewhere");
    println!(
        "ACCEPTANCE PASS: criterion 7 (audited fast paths: {divisor_hits} divisor and \
         {relation_hits} relation claims, all with kernel gcd 1)"
    );
}

#[test]
fn criterion_8_distance_and_elasticity_bounds() {
    let budget = budget();
    let mut sampled_sets = 0usize;
    for group in positive_groups() {
        let d = davenport(&group, &budget);
        assert!(d.complete);
        let dav = d.value;

        // sample length sets: group-wide for small orders, over the first
        // maximal atom's plus-minus support for the larger ones
        let (support, bound): (Vec<GroupElement>, u64) = if group.order() <= 12 {
            (group.elements().collect(), 8)
        } else {
            let max = enumerate_max_atoms(&group, &budget, true);
            let u = max.atoms.atoms.first().expect("maximal atom exists").clone();
            (u.pm_support().into_iter().collect(), 8)
        };
        let atoms = enumerate_atoms(&support, &budget);
        assert!(atoms.complete);
        for_each_zero_sum(&support, bound, &budget, &mut |b| {
            let l = set_of_lengths(b, &atoms, &budget).unwrap();
            assert!(l.complete);
            sampled_sets += 1;
            for gap in delta_of(&l) {
                assert!(
                    (1..=dav.saturating_sub(2)).contains(&gap),
                    "gap {gap} outside [1, D-2] for {b} over {group}"
                );
            }
            let rho = rho_of(&l).expect("nonempty length set");
            assert!(
                rho <= Ratio::new(dav, 2),
                "elasticity {rho} above D/2 for {b} over {group}"
            );
            true
        });

        // elasticity is attained by (-U)U for every maximal atom
        let max = enumerate_max_atoms(&group, &budget, true);
        for u in &max.atoms.atoms {
            let b = u.concat(&u.negate()).unwrap();
            let support: Vec<GroupElement> = u.pm_support().into_iter().collect();
            let atoms = enumerate_atoms(&support, &budget);
            let l = set_of_lengths(&b, &atoms, &budget).unwrap();
            assert!(l.complete);
            assert_eq!(*l.lengths.first().unwrap(), 2, "min L((-U)U) = 2");
            assert_eq!(*l.lengths.last().unwrap(), dav, "max L((-U)U) = D");
            assert_eq!(rho_of(&l).unwrap(), Ratio::new(dav, 2), "elasticity attained");
        }
    }
    assert!(sampled_sets > 500);
    println!(
        "ACCEPTANCE PASS: criterion 8 (bounds on {sampled_sets} sampled length sets; \
         elasticity D/2 attained by (-U)U)"
    );
}

#[test]
fn criterion_9_declared_out_of_scope() {
    // Documented, deliberate exclusions at desk scale (covered indirectly by
    // the property suites above):
    //   - exact Davenport constants beyond small orders, e.g. C_2^4 x C_6,
    //     where the d* lower bound is known to be strict;
    //   - the asymptotic length-set invariants that quantify over arbitrarily
    //     large powers (only the distance-one criterion is decided);
    //   - the global constants bounding the shape of large length sets.
    // The first is partially witnessed here: the tool itself reports d* as a
    // lower bound without claiming completeness under a tiny budget.
    let big = spec(&[2, 2, 2, 2, 6]);
    let capped = EnumerationBudget {
        max_nodes: Some(10_000),
        ..EnumerationBudget::default()
    };
    let result = davenport(&big, &capped);
    assert!(!result.complete, "the capped search must admit inconclusiveness");
    assert!(result.value >= big.d_star(), "witnessed lower bound");
    println!("ACCEPTANCE PASS: criterion 9 (out-of-scope computations declared, not faked)");
}
