//! Parsing of group-family specifications for the sweep command.
//!
//! Three forms are accepted:
//!   - `order<=N`: every abelian group of order at most N, up to isomorphism
//!   - a template with one range variable, e.g. `C2^r x C6 for r in 1..4`
//!     (the range is inclusive)
//!   - an explicit semicolon-separated list of group literals, e.g.
//!     `C5; C3xC3; 2,4`

use std::collections::BTreeSet;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use zerosum::group::GroupSpec;

pub fn parse_family(spec: &str) -> Result<Vec<Arc<GroupSpec>>> {
    let trimmed = spec.trim();
    if let Some(rest) = trimmed.strip_prefix("order<=") {
        let n: u64 = rest.trim().parse().context("order bound must be an integer")?;
        return Ok(groups_of_order_at_most(n));
    }
    if let Some((template, range)) = trimmed.split_once(" for ") {
        return parse_template(template.trim(), range.trim());
    }
    trimmed
        .split(';')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| GroupSpec::parse(s).with_context(|| format!("bad group literal {s:?}")))
        .collect()
}

fn parse_template(template: &str, range: &str) -> Result<Vec<Arc<GroupSpec>>> {
    // "<var> in <a>..<b>"
    let Some((var, bounds)) = range.split_once(" in ") else {
        bail!("range must look like `r in 1..4`");
    };
    let var = var.trim();
    let Some((lo, hi)) = bounds.trim().split_once("..") else {
        bail!("range must look like `r in 1..4`");
    };
    let lo: u32 = lo.trim().parse().context("range start")?;
    let hi: u32 = hi.trim().parse().context("range end")?;
    if lo > hi {
        bail!("empty range {lo}..{hi}");
    }
    let mut out = Vec::new();
    for value in lo..=hi {
        let concrete = template.replace(&format!("^{var}"), &format!("^{value}"));
        if concrete == template {
            bail!("template does not mention ^{var}");
        }
        out.push(
            GroupSpec::parse(&concrete)
                .with_context(|| format!("bad group literal {concrete:?}"))?,
        );
    }
    Ok(out)
}

/// All abelian groups of order at most `n`, up to isomorphism, in
/// (order, invariant factors) order. Built from per-prime partitions of the
/// exponent of each prime power.
pub fn groups_of_order_at_most(n: u64) -> Vec<Arc<GroupSpec>> {
    let mut out = Vec::new();
    for m in 1..=n {
        out.extend(groups_of_order(m));
    }
    out
}

fn partitions(n: u32) -> Vec<Vec<u32>> {
    // descending partitions of n
    fn rec(n: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        let top = max.min(n);
        for k in (1..=top).rev() {
            prefix.push(k);
            rec(n - k, k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

fn groups_of_order(m: u64) -> Vec<Arc<GroupSpec>> {
    if m == 1 {
        return vec![GroupSpec::trivial()];
    }
    // factor m
    let mut rest = m;
    let mut prime_powers: Vec<(u64, u32)> = Vec::new();
    let mut p = 2;
    while p * p <= rest {
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            prime_powers.push((p, e));
        }
        p += 1;
    }
    if rest > 1 {
        prime_powers.push((rest, 1));
    }

    // choose one partition per prime, then zip the descending prime-power
    // lists into invariant factors
    let per_prime: Vec<(u64, Vec<Vec<u32>>)> =
        prime_powers.iter().map(|&(p, e)| (p, partitions(e))).collect();
    let mut result: BTreeSet<Vec<u64>> = BTreeSet::new();
    let mut choice = vec![0usize; per_prime.len()];
    loop {
        let width = per_prime
            .iter()
            .zip(&choice)
            .map(|((_, parts), &c)| parts[c].len())
            .max()
            .unwrap_or(0);
        let mut factors = vec![1u64; width];
        for ((p, parts), &c) in per_prime.iter().zip(&choice) {
            for (j, &e) in parts[c].iter().enumerate() {
                factors[j] *= p.pow(e);
            }
        }
        factors.reverse(); // ascending divisibility chain
        result.insert(factors);

        // advance the mixed-radix choice vector
        let mut i = 0;
        loop {
            if i == per_prime.len() {
                let groups: Vec<Arc<GroupSpec>> = result
                    .iter()
                    .map(|f| GroupSpec::new(f).expect("valid factors"))
                    .collect();
                for g in &groups {
                    debug_assert_eq!(g.order(), m);
                }
                return groups;
            }
            choice[i] += 1;
            if choice[i] < per_prime[i].1.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_counts_by_order() {
        assert_eq!(groups_of_order(1).len(), 1);
        assert_eq!(groups_of_order(8).len(), 3, "C8, C2xC4, C2^3");
        assert_eq!(groups_of_order(12).len(), 2, "C12, C2xC6");
        assert_eq!(groups_of_order(16).len(), 5);
        assert_eq!(groups_of_order(36).len(), 4);
        for g in groups_of_order(16) {
            assert_eq!(g.order(), 16);
        }
    }

    #[test]
    fn order_bound_family() {
        let all = parse_family("order<=8").unwrap();
        // 1(trivial),2,3,4(x2),5,6,7,8(x3) = 11 groups
        assert_eq!(all.len(), 11);
        assert_eq!(all[0].canonical_name(), "C1");
    }

    #[test]
    fn template_family() {
        let fam = parse_family("C2^r x C6 for r in 1..4").unwrap();
        let names: Vec<String> = fam.iter().map(|g| g.canonical_name()).collect();
        assert_eq!(names, vec!["C2xC6", "C2xC2xC6", "C2xC2xC2xC6", "C2xC2xC2xC2xC6"]);
    }

    #[test]
    fn explicit_list() {
        let fam = parse_family("C5; C3xC3; 4,6").unwrap();
        let names: Vec<String> = fam.iter().map(|g| g.canonical_name()).collect();
        assert_eq!(names, vec!["C5", "C3xC3", "C2xC12"]);
        assert!(parse_family("Cfoo").is_err());
    }
}
