//! Command-line surface for the zerosum toolkit.
//!
//! Every command writes a machine-readable JSON report (named by group,
//! command and a hash of the configuration) and prints a console summary of
//! that same report. Re-running with an identical configuration reuses the
//! existing report file. Exit codes: 0 = holds / complete, 2 = fails (with
//! witness), 3 = inconclusive, 1 = usage or internal error.

mod family;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use zerosum::atoms::{davenport, enumerate_atoms_cached, AtomCache, EnumerationBudget};
use zerosum::group::{GroupElement, GroupSpec};
use zerosum::lattice::{build_atom_matrix, integer_kernel, kernel_sum_gcd};
use zerosum::lengths::min_delta_bruteforce;
use zerosum::verifier::{
    atom_power_lengths, classify_group, summary_csv, sweep, verify_group, Verdict,
    VerificationReport, VerifyOptions,
};

#[derive(Parser)]
#[command(
    name = "zerosum",
    about = "Zero-sum invariants of finite abelian groups: atoms, Davenport constants, sets of lengths, and distance-one verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Wall-clock budget in seconds for each search
    #[arg(long, global = true)]
    budget_seconds: Option<u64>,
    /// Node budget for each search (default 10^7)
    #[arg(long, global = true)]
    max_nodes: Option<u64>,
    /// Cap on the number of atoms per enumeration
    #[arg(long, global = true)]
    max_atoms: Option<usize>,
    /// Cap on atom length during enumeration
    #[arg(long, global = true)]
    max_length: Option<u64>,
    /// Always run the kernel and check fast-path claims against it
    #[arg(long, global = true)]
    audit: bool,
    /// Keep both U and -U in maximal-atom listings
    #[arg(long, global = true)]
    no_neg_dedup: bool,
    /// Decide per-atom status by direct length search instead of the kernel
    #[arg(long, global = true)]
    brute_force: bool,
    /// Directory for the atom enumeration cache
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Directory for report files (default: reports)
    #[arg(long, global = true, default_value = "reports")]
    out: PathBuf,
    /// Worker threads for per-atom verification (default: all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Console output format
    #[arg(long, global = true, default_value = "text", value_parser = ["text", "json", "csv"])]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Print the structure of a group: invariant factors, order, exponent,
    /// rank, p-ranks, the d* bound and its classification
    Info {
        #[arg(short, long)]
        group: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Exact Davenport constant with a longest zero-sum-free witness
    Davenport {
        #[arg(short, long)]
        group: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// List atoms: over a support set when --support is given, otherwise all
    /// maximal-length atoms of the group
    Atoms {
        #[arg(short, long)]
        group: String,
        /// Semicolon-separated element literals, e.g. "(1,0);(0,1)"
        #[arg(long)]
        support: Option<String>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Kernel-sum gcd over a support set, with a distance witness
    MinDelta {
        #[arg(short, long)]
        group: String,
        /// Semicolon-separated element literals, e.g. "(1,0);(0,1)"
        #[arg(long)]
        support: String,
        /// Also run the direct length search up to this bound and compare
        #[arg(long)]
        bruteforce_bound: Option<u64>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Verify the distance-one property for every maximal-length atom
    Verify {
        #[arg(short, long)]
        group: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Verify a family of groups and write a summary CSV
    Sweep {
        /// "order<=N", "C2^r x C6 for r in 1..4", or "C5; C3xC3; 2,4"
        #[arg(long)]
        family: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Build the standard-basis atom over an elementary p-group and measure
    /// the length set of (-U)^k U^k
    AtomPowers {
        #[arg(short)]
        p: u64,
        #[arg(short)]
        r: usize,
        #[arg(short, default_value = "1")]
        k: u64,
        #[command(flatten)]
        common: CommonOpts,
    },
}

/// The configuration echoed verbatim into every report file.
#[derive(Serialize, Clone)]
struct RunConfig {
    command: String,
    group: Option<String>,
    support: Option<String>,
    family: Option<String>,
    p: Option<u64>,
    r: Option<usize>,
    k: Option<u64>,
    budget_seconds: Option<u64>,
    max_nodes: Option<u64>,
    max_atoms: Option<usize>,
    max_length: Option<u64>,
    audit: bool,
    neg_dedup: bool,
    brute_force: bool,
    bruteforce_bound: Option<u64>,
    workers: Option<usize>,
    format: String,
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

impl RunConfig {
    fn new(command: &str, common: &CommonOpts) -> RunConfig {
        RunConfig {
            command: command.to_string(),
            group: None,
            support: None,
            family: None,
            p: None,
            r: None,
            k: None,
            budget_seconds: common.budget_seconds,
            max_nodes: common.max_nodes,
            max_atoms: common.max_atoms,
            max_length: common.max_length,
            audit: common.audit,
            neg_dedup: !common.no_neg_dedup,
            brute_force: common.brute_force,
            bruteforce_bound: None,
            workers: common.workers,
            format: common.format.clone(),
        }
    }

    fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("{:08x}", fnv1a64(json.as_bytes()) & 0xffff_ffff)
    }
}

/// Report file = configuration echo + timestamp + payload. Everything except
/// the timestamp is a pure function of the configuration and the caches.
#[derive(Serialize)]
struct ReportFile<'a, T: Serialize> {
    config: &'a RunConfig,
    timestamp_unix_ms: u128,
    report: &'a T,
}

fn budget_from(common: &CommonOpts) -> EnumerationBudget {
    EnumerationBudget {
        max_length: common.max_length,
        max_atoms: common.max_atoms,
        max_nodes: Some(common.max_nodes.unwrap_or(10_000_000)),
        time_limit: common.budget_seconds.map(Duration::from_secs),
    }
}

fn cache_from(common: &CommonOpts) -> Result<Option<AtomCache>> {
    Ok(match &common.cache_dir {
        Some(dir) => Some(AtomCache::new(dir).context("creating cache dir")?),
        None => None,
    })
}

fn verify_options(common: &CommonOpts) -> Result<VerifyOptions> {
    Ok(VerifyOptions {
        budget: budget_from(common),
        audit: common.audit,
        dedup_negation: !common.no_neg_dedup,
        brute_force_fallback: common.brute_force,
        brute_force_bound: None,
        cache: cache_from(common)?,
    })
}

fn parse_support(group: &Arc<GroupSpec>, text: &str) -> Result<Vec<GroupElement>> {
    let mut out = Vec::new();
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(
            group
                .parse_element(part)
                .with_context(|| format!("bad element literal {part:?}"))?,
        );
    }
    if out.is_empty() {
        anyhow::bail!("support set is empty");
    }
    Ok(out)
}

/// Write the report file unless an identical-config report already exists
/// (reports are append-only; the config hash in the name is the cache key).
/// Returns the path.
fn persist<T: Serialize>(
    common: &CommonOpts,
    config: &RunConfig,
    stem: &str,
    report: &T,
) -> Result<PathBuf> {
    std::fs::create_dir_all(&common.out).context("creating report dir")?;
    let path = common
        .out
        .join(format!("{stem}.{}.{}.json", config.command, config.hash()));
    if !path.exists() {
        let file = ReportFile {
            config,
            timestamp_unix_ms: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
            report,
        };
        std::fs::write(&path, serde_json::to_string_pretty(&file).context("serialize report")?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(path)
}

fn emit_json<T: Serialize>(common: &CommonOpts, payload: &T) -> Result<()> {
    if common.format == "json" {
        println!("{}", serde_json::to_string_pretty(payload)?);
    }
    Ok(())
}

#[derive(Serialize)]
struct GroupInfo {
    group: String,
    invariant_factors: Vec<u64>,
    order: u64,
    exponent: u64,
    rank: usize,
    p_ranks: Vec<(u64, usize)>,
    d_star: u64,
    classification: zerosum::verifier::CaseClassification,
}

fn cmd_info(group_str: &str, common: &CommonOpts) -> Result<i32> {
    let group = GroupSpec::parse(group_str)?;
    let primes = {
        let mut v = Vec::new();
        let mut n = group.order();
        let mut p = 2;
        while p * p <= n {
            if n % p == 0 {
                v.push(p);
                while n % p == 0 {
                    n /= p;
                }
            }
            p += 1;
        }
        if n > 1 {
            v.push(n);
        }
        v
    };
    let info = GroupInfo {
        group: group.canonical_name(),
        invariant_factors: group.invariant_factors().to_vec(),
        order: group.order(),
        exponent: group.exponent(),
        rank: group.rank(),
        p_ranks: primes.iter().map(|&p| (p, group.p_rank(p).expect("prime"))).collect(),
        d_star: group.d_star(),
        classification: classify_group(&group, None),
    };
    let mut config = RunConfig::new("info", common);
    config.group = Some(group_str.to_string());
    let path = persist(common, &config, &info.group, &info)?;
    emit_json(common, &info)?;
    if common.format != "json" {
        println!("group:             {}", info.group);
        println!("invariant factors: {:?}", info.invariant_factors);
        println!("order:             {}", info.order);
        println!("exponent:          {}", info.exponent);
        println!("rank:              {}", info.rank);
        for (p, r) in &info.p_ranks {
            println!("  {p}-rank:          {r}");
        }
        println!("d*:                {}", info.d_star);
        println!("classification:    {}", info.classification.label());
        println!("report: {}", path.display());
    }
    Ok(0)
}

#[derive(Serialize)]
struct DavenportReport {
    group: String,
    davenport: u64,
    d_star: u64,
    complete: bool,
    witness: String,
    nodes: u64,
}

fn cmd_davenport(group_str: &str, common: &CommonOpts) -> Result<i32> {
    let group = GroupSpec::parse(group_str)?;
    let result = davenport(&group, &budget_from(common));
    let report = DavenportReport {
        group: group.canonical_name(),
        davenport: result.value,
        d_star: group.d_star(),
        complete: result.complete,
        witness: result.witness.to_string(),
        nodes: result.stats.nodes,
    };
    let mut config = RunConfig::new("davenport", common);
    config.group = Some(group_str.to_string());
    let path = persist(common, &config, &report.group, &report)?;
    emit_json(common, &report)?;
    if common.format != "json" {
        if report.complete {
            println!("D({}) = {}   (d* = {})", report.group, report.davenport, report.d_star);
        } else {
            println!(
                "D({}) >= {} (budget exhausted; lower bound)   (d* = {})",
                report.group, report.davenport, report.d_star
            );
        }
        println!(
            "witness (zero-sum free, length {}): {}",
            report.davenport - 1,
            report.witness
        );
        println!("report: {}", path.display());
    }
    Ok(if report.complete { 0 } else { 3 })
}

#[derive(Serialize)]
struct AtomListing {
    group: String,
    support: Vec<String>,
    mode: String,
    davenport: Option<u64>,
    complete: bool,
    count: usize,
    atoms: Vec<String>,
}

fn cmd_atoms(group_str: &str, support: Option<&str>, common: &CommonOpts) -> Result<i32> {
    let group = GroupSpec::parse(group_str)?;
    let budget = budget_from(common);
    let cache = cache_from(common)?;
    let listing = match support {
        Some(text) => {
            let g0 = parse_support(&group, text)?;
            let set = enumerate_atoms_cached(&g0, &budget, cache.as_ref());
            AtomListing {
                group: group.canonical_name(),
                support: set.support.iter().map(|g| g.to_string()).collect(),
                mode: "support".to_string(),
                davenport: None,
                complete: set.complete,
                count: set.atoms.len(),
                atoms: set.atoms.iter().map(|a| a.to_string()).collect(),
            }
        }
        None => {
            let max = zerosum::atoms::enumerate_max_atoms(&group, &budget, !common.no_neg_dedup);
            AtomListing {
                group: group.canonical_name(),
                support: max.atoms.support.iter().map(|g| g.to_string()).collect(),
                mode: if max.dedup_negation {
                    "max-atoms (one per negation pair)".to_string()
                } else {
                    "max-atoms".to_string()
                },
                davenport: Some(max.davenport.value),
                complete: max.davenport.complete && max.atoms.complete,
                count: max.atoms.atoms.len(),
                atoms: max.atoms.atoms.iter().map(|a| a.to_string()).collect(),
            }
        }
    };
    let mut config = RunConfig::new("atoms", common);
    config.group = Some(group_str.to_string());
    config.support = support.map(str::to_string);
    let path = persist(common, &config, &listing.group, &listing)?;
    emit_json(common, &listing)?;
    if common.format != "json" {
        println!(
            "{} atoms over {} ({}{})",
            listing.count,
            listing.group,
            listing.mode,
            if listing.complete { "" } else { "; INCOMPLETE" }
        );
        if let Some(d) = listing.davenport {
            println!("D = {d}");
        }
        for a in &listing.atoms {
            println!("  {a}");
        }
        println!("report: {}", path.display());
    }
    Ok(if listing.complete { 0 } else { 3 })
}

#[derive(Serialize)]
struct MinDeltaReport {
    group: String,
    support: Vec<String>,
    atom_count: usize,
    atoms_complete: bool,
    kernel_gcd: u64,
    half_factorial: bool,
    witness: Option<zerosum::verifier::WitnessRecord>,
    bruteforce: Option<BruteforceSection>,
}

#[derive(Serialize)]
struct BruteforceSection {
    bound: u64,
    min_gap: Option<u64>,
    witness_element: Option<String>,
    witness_lengths: Vec<u64>,
    agrees_with_kernel: bool,
}

fn cmd_min_delta(
    group_str: &str,
    support_text: &str,
    bruteforce_bound: Option<u64>,
    common: &CommonOpts,
) -> Result<i32> {
    let group = GroupSpec::parse(group_str)?;
    let g0 = parse_support(&group, support_text)?;
    let budget = budget_from(common);
    let cache = cache_from(common)?;
    let atoms = enumerate_atoms_cached(&g0, &budget, cache.as_ref());
    let matrix = build_atom_matrix(&atoms, true).context("building atom matrix")?;
    let kernel = integer_kernel(&matrix);
    let gcd = kernel_sum_gcd(&kernel);
    let witness = if gcd == 1 {
        zerosum::lattice::distance_one_witness(&matrix, &kernel)
    } else if gcd > 1 && atoms.complete {
        zerosum::lattice::general_distance_witness(&matrix, &kernel, gcd).ok()
    } else {
        None
    };
    let witness_record = witness.map(|w| zerosum::verifier::witness_record(&matrix, &w));

    let bruteforce = bruteforce_bound.map(|bound| {
        let sample = min_delta_bruteforce(&g0, bound, &budget);
        let agrees = match sample.min_gap {
            Some(m) => m == gcd,
            None => true, // one-sided: absence within a bound contradicts nothing
        };
        BruteforceSection {
            bound,
            min_gap: sample.min_gap,
            witness_element: sample.witness.as_ref().map(|(b, _)| b.to_string()),
            witness_lengths: sample
                .witness
                .as_ref()
                .map(|(_, l)| l.iter().copied().collect())
                .unwrap_or_default(),
            agrees_with_kernel: agrees,
        }
    });

    let report = MinDeltaReport {
        group: group.canonical_name(),
        support: atoms.support.iter().map(|g| g.to_string()).collect(),
        atom_count: atoms.atoms.len(),
        atoms_complete: atoms.complete,
        kernel_gcd: gcd,
        half_factorial: gcd == 0 && atoms.complete,
        witness: witness_record,
        bruteforce,
    };
    let mut config = RunConfig::new("min-delta", common);
    config.group = Some(group_str.to_string());
    config.support = Some(support_text.to_string());
    config.bruteforce_bound = bruteforce_bound;
    let path = persist(common, &config, &report.group, &report)?;
    emit_json(common, &report)?;
    if common.format != "json" {
        println!(
            "support {{{}}} over {}: {} atoms{}",
            report.support.join(","),
            report.group,
            report.atom_count,
            if report.atoms_complete { "" } else { " (INCOMPLETE)" }
        );
        if report.half_factorial {
            println!("kernel gcd = 0: half-factorial (every element has a single length)");
        } else {
            println!("kernel gcd (= min distance when complete): {}", report.kernel_gcd);
        }
        if let Some(w) = &report.witness {
            println!("witness: lengths {} and {} of {}", w.left_len, w.right_len, w.product);
        }
        if let Some(bf) = &report.bruteforce {
            println!(
                "direct search (bound {}): min gap {:?}, agrees: {}",
                bf.bound, bf.min_gap, bf.agrees_with_kernel
            );
        }
        println!("report: {}", path.display());
    }
    Ok(if !report.atoms_complete && report.kernel_gcd != 1 {
        3
    } else if report.kernel_gcd == 1 {
        0
    } else {
        2
    })
}

fn print_verify_summary(report: &VerificationReport) {
    println!(
        "{}: D = {} (d* = {}), {} maximal atoms, classification {}",
        report.group,
        report.davenport,
        report.d_star,
        report.max_atom_count,
        report.classification.label()
    );
    for atom in &report.per_atom {
        let status = match atom.status {
            Verdict::Holds => "holds",
            Verdict::Fails => "FAILS",
            Verdict::Inconclusive => "inconclusive",
        };
        let detail = match (atom.min_delta, atom.half_factorial) {
            (_, true) => "half-factorial".to_string(),
            (Some(d), _) => format!("min distance {d}"),
            (None, _) => "undetermined".to_string(),
        };
        println!("  {} {:12} {} via {:?}", atom.atom, status, detail, atom.fast_path);
    }
    println!(
        "overall: {:?}{}",
        report.overall,
        report
            .worst_distance
            .map(|d| format!(" (worst distance {d})"))
            .unwrap_or_default()
    );
}

fn cmd_verify(group_str: &str, common: &CommonOpts) -> Result<i32> {
    let group = GroupSpec::parse(group_str)?;
    let opts = verify_options(common)?;
    let report = verify_group(&group, &opts);
    let mut config = RunConfig::new("verify", common);
    config.group = Some(group_str.to_string());
    let path = persist(common, &config, &report.group, &report)?;
    emit_json(common, &report)?;
    if common.format != "json" {
        print_verify_summary(&report);
        println!("report: {}", path.display());
    }
    Ok(report.overall.exit_code())
}

fn cmd_sweep(family_text: &str, common: &CommonOpts) -> Result<i32> {
    let groups = family::parse_family(family_text)?;
    let opts = verify_options(common)?;
    let mut config = RunConfig::new("sweep", common);
    config.family = Some(family_text.to_string());
    let sweep_dir = common.out.join(format!("sweep.{}", config.hash()));
    std::fs::create_dir_all(&sweep_dir)?;
    let reports = sweep(&groups, &opts, Some(&sweep_dir));
    let csv = summary_csv(&reports);
    let csv_path = sweep_dir.join("summary.csv");
    std::fs::write(&csv_path, &csv)?;
    match common.format.as_str() {
        "json" => println!("{}", serde_json::to_string_pretty(&reports)?),
        "csv" => print!("{csv}"),
        _ => {
            print!("{csv}");
            println!("per-group reports and summary.csv in {}", sweep_dir.display());
        }
    }
    let any_inconclusive = reports.iter().any(|r| r.overall == Verdict::Inconclusive);
    let any_fails = reports.iter().any(|r| r.overall == Verdict::Fails);
    Ok(if any_inconclusive {
        3
    } else if any_fails {
        2
    } else {
        0
    })
}

fn cmd_atom_powers(p: u64, r: usize, k: u64, common: &CommonOpts) -> Result<i32> {
    let budget = budget_from(common);
    let report = atom_power_lengths(p, r, k, &budget)?;
    let mut config = RunConfig::new("atom-powers", common);
    config.p = Some(p);
    config.r = Some(r);
    config.k = Some(k);
    let path = persist(common, &config, &report.group, &report)?;
    emit_json(common, &report)?;
    if common.format != "json" {
        println!(
            "group {}  atom U = {}  |U| = {} = D",
            report.group, report.atom, report.atom_length
        );
        println!(
            "L((-U)^{} U^{}): min {}, max {}, {} missing: {}, elasticity {}",
            report.k,
            report.k,
            report.min_length,
            report.max_length,
            2 * report.k + 1,
            report.gap_above_min,
            report.rho
        );
        println!("lengths: {:?}", report.lengths);
        println!("report: {}", path.display());
    }
    Ok(if report.complete { 0 } else { 3 })
}

fn run(cli: Cli) -> Result<i32> {
    let common = match &cli.command {
        Command::Info { common, .. }
        | Command::Davenport { common, .. }
        | Command::Atoms { common, .. }
        | Command::MinDelta { common, .. }
        | Command::Verify { common, .. }
        | Command::Sweep { common, .. }
        | Command::AtomPowers { common, .. } => common.clone(),
    };
    if let Some(workers) = common.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("building worker pool")?;
    }

    match &cli.command {
        Command::Info { group, common } => cmd_info(group, common),
        Command::Davenport { group, common } => cmd_davenport(group, common),
        Command::Atoms { group, support, common } => cmd_atoms(group, support.as_deref(), common),
        Command::MinDelta { group, support, bruteforce_bound, common } => {
            cmd_min_delta(group, support, *bruteforce_bound, common)
        }
        Command::Verify { group, common } => cmd_verify(group, common),
        Command::Sweep { family, common } => cmd_sweep(family, common),
        Command::AtomPowers { p, r, k, common } => cmd_atom_powers(*p, *r, *k, common),
    }
}

fn main() -> ExitCode {
    // clap's default exit code for usage errors is 2, which this tool
    // reserves for "fails"; remap usage errors to 1
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
