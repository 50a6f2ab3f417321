//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use mvm_core::graph::BipartiteGraph;
use mvm_core::instances::{gen_random_bipartite, gen_worst_case, WorstCaseSpec};
use mvm_core::kernel::{kernelize, KernelStats, Strategy};
use mvm_core::matching::{brute_force_max, maximum_matching, verify_matching};
use mvm_core::pipeline::{run_pipeline, write_reports, InputSource, ReportFormat, RunConfig, RunReport, RunStrategy};
use mvm_core::reconstruct::{reconstruct, KernelGraph};
use mvm_core::store::MergeGraph;

const STRATEGIES: [Strategy; 3] = [Strategy::Balanced, Strategy::Greedy, Strategy::Baseline];

/// Edge-touch constant, calibrated once on this suite and frozen.
const EDGE_TOUCH_C: f64 = 3.0;

const FUZZ_INSTANCES: u64 = 1200;
const FUZZ_BUDGET: Duration = Duration::from_secs(60);
const WORST_BUDGET: Duration = Duration::from_secs(600);
const WORST_EXPONENTS: std::ops::RangeInclusive<u32> = 10..=16;

struct Run {
    stats: KernelStats,
    size: usize,
    kernel_size: usize,
    valid: bool,
    min_kernel_degree: Option<u32>,
}

impl Run {
    fn identity_holds(&self) -> bool {
        self.size == self.kernel_size + (self.stats.r1_matches + self.stats.merged_count) as usize
    }
}

struct Instance {
    label: String,
    n: usize,
    m: usize,
    runs: Vec<Run>,
    /// Reference maximum: the oracle on the fuzz suite, direct matching on the family.
    reference: usize,
}

impl Instance {
    fn run(&self, s: Strategy) -> &Run {
        &self.runs[STRATEGIES.iter().position(|&x| x == s).unwrap()]
    }

    fn log_n(&self) -> f64 {
        (self.n.max(2) as f64).log2().ceil()
    }
}

fn solve(g: &BipartiteGraph, s: Strategy) -> Run {
    let mut r = kernelize(g, s, 0.0);
    let min_kernel_degree = r.kernel.live_vertices().map(|v| r.kernel.degree(v)).min();
    let kg = KernelGraph::from_store(&mut r.kernel);
    let km = maximum_matching(&kg);
    let (size, valid) = match reconstruct(&kg, &km, &r) {
        Ok(m) => (m.size(), verify_matching(g, &m).valid),
        Err(_) => (0, false),
    };
    Run { stats: r.stats, size, kernel_size: km.size(), valid, min_kernel_degree }
}

fn instance(label: String, g: &BipartiteGraph, reference: usize) -> Instance {
    Instance { label, n: g.n(), m: g.m(), runs: STRATEGIES.iter().map(|&s| solve(g, s)).collect(), reference }
}

/// Seeded graphs with both sides up to 40, from forests to complete.
fn fuzz_graph(seed: u64) -> BipartiteGraph {
    let n = 1 + (seed % 40) as usize;
    let m = match seed / 40 % 8 {
        0 => n - 1,
        1 => n,
        2 => 3 * n / 2,
        3 => 2 * n,
        4 => 3 * n,
        5 => n * n / 4,
        6 => n * n / 2,
        _ => n * n,
    };
    gen_random_bipartite(n, n, m.min(n * n), seed).unwrap()
}

fn fuzz_suite() -> (Vec<Instance>, Duration) {
    let t = Instant::now();
    let out = (0..FUZZ_INSTANCES)
        .map(|seed| {
            let g = fuzz_graph(seed);
            let best = brute_force_max(&g).unwrap();
            instance(format!("fuzz seed {seed}"), &g, best)
        })
        .collect();
    (out, t.elapsed())
}

fn worst_suite() -> (Vec<Instance>, Duration) {
    let t = Instant::now();
    let out = WORST_EXPONENTS
        .map(|e| {
            let spec = WorstCaseSpec::new(1 << e, u64::from(e));
            let g = gen_worst_case(&spec).unwrap();
            let best = maximum_matching(&g).size();
            instance(format!("worst-case n=2^{e}"), &g, best)
        })
        .collect();
    (out, t.elapsed())
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(failures: &[String], ok_detail: String) -> Verdict {
    match failures.first() {
        None => Verdict { pass: true, detail: ok_detail },
        Some(first) => Verdict { pass: false, detail: format!("{} failures, first: {first}", failures.len()) },
    }
}

fn criterion_1(fuzz: &[Instance], elapsed: Duration) -> Verdict {
    let mut failures = Vec::new();
    for inst in fuzz {
        for (s, r) in STRATEGIES.iter().zip(&inst.runs) {
            if !r.valid || r.size != inst.reference {
                failures.push(format!("{} {}: size {} vs oracle {}", inst.label, s.name(), r.size, inst.reference));
            }
        }
    }
    if fuzz.len() < 1000 {
        failures.push(format!("only {} instances", fuzz.len()));
    }
    if elapsed >= FUZZ_BUDGET {
        failures.push(format!("took {elapsed:.1?}"));
    }
    verdict(&failures, format!("{} graphs x 3 strategies equal the oracle in {elapsed:.2?}", fuzz.len()))
}

fn criterion_2(all: &[&Instance]) -> Verdict {
    let mut failures = Vec::new();
    for inst in all {
        for (s, r) in STRATEGIES.iter().zip(&inst.runs) {
            if let Some(d) = r.min_kernel_degree.filter(|&d| d <= 2) {
                failures.push(format!("{} {}: kernel vertex of degree {d}", inst.label, s.name()));
            }
        }
        let sizes: HashSet<_> = inst.runs.iter().map(|r| (r.stats.kernel_n, r.stats.kernel_m)).collect();
        if sizes.len() != 1 {
            failures.push(format!("{}: kernel sizes differ {sizes:?}", inst.label));
        }
    }
    verdict(&failures, format!("{} instances, min degree >= 3, equal kernels", all.len()))
}

fn criterion_3(all: &[&Instance]) -> Verdict {
    let mut failures = Vec::new();
    for inst in all {
        for (s, r) in STRATEGIES.iter().zip(&inst.runs) {
            if !r.identity_holds() {
                failures.push(format!(
                    "{} {}: {} != {} + {} + {}",
                    inst.label,
                    s.name(),
                    r.size,
                    r.kernel_size,
                    r.stats.r1_matches,
                    r.stats.merged_count
                ));
            }
            if !r.valid || r.size != inst.reference {
                failures.push(format!("{} {}: not a valid maximum matching", inst.label, s.name()));
            }
        }
    }
    verdict(&failures, format!("{} runs", all.len() * STRATEGIES.len()))
}

fn criterion_4(worst: &[Instance], elapsed: Duration) -> Verdict {
    let mut failures = Vec::new();
    let touched = |i: &Instance, s| i.run(s).stats.edges_touched as f64;
    let mut base_ratios = Vec::new();
    let mut mvm_ratios = Vec::new();
    for pair in worst.windows(2) {
        let b = touched(&pair[1], Strategy::Baseline) / touched(&pair[0], Strategy::Baseline);
        let m = touched(&pair[1], Strategy::Balanced) / touched(&pair[0], Strategy::Balanced);
        if b < 3.5 {
            failures.push(format!("{}: baseline doubling ratio {b:.2}", pair[1].label));
        }
        if m > 2.5 {
            failures.push(format!("{}: mvm doubling ratio {m:.2}", pair[1].label));
        }
        base_ratios.push(format!("{b:.2}"));
        mvm_ratios.push(format!("{m:.2}"));
    }
    let last = worst.last().unwrap();
    let gap = touched(last, Strategy::Baseline) / touched(last, Strategy::Balanced);
    if gap < 100.0 {
        failures.push(format!("{}: baseline/mvm {gap:.1}", last.label));
    }
    if elapsed >= WORST_BUDGET {
        failures.push(format!("took {elapsed:.1?}"));
    }
    verdict(
        &failures,
        format!(
            "baseline doubling [{}], mvm doubling [{}], baseline/mvm at {} = {gap:.1}, {elapsed:.1?}",
            base_ratios.join(", "),
            mvm_ratios.join(", "),
            last.label
        ),
    )
}

fn criterion_5(all: &[&Instance]) -> Verdict {
    let mut failures = Vec::new();
    let mut max_rounds = 0;
    for inst in all {
        for (s, r) in STRATEGIES.iter().zip(&inst.runs) {
            max_rounds = max_rounds.max(r.stats.rounds);
            if r.stats.rounds as f64 > inst.log_n() + 1.0 {
                failures.push(format!("{} {}: {} rounds", inst.label, s.name(), r.stats.rounds));
            }
        }
    }
    verdict(&failures, format!("max {max_rounds} rounds"))
}

fn criterion_6(all: &[&Instance]) -> Verdict {
    let mut failures = Vec::new();
    let mut worst = 0f64;
    for inst in all.iter().filter(|i| i.m > 0) {
        for s in [Strategy::Balanced, Strategy::Greedy] {
            let c = inst.run(s).stats.edges_touched as f64 / (inst.m as f64 * inst.log_n());
            worst = worst.max(c);
            if c > EDGE_TOUCH_C {
                failures.push(format!("{} {}: c = {c:.3}", inst.label, s.name()));
            }
        }
    }
    verdict(&failures, format!("max observed c = {worst:.3} <= {EDGE_TOUCH_C}"))
}

fn criterion_7(all: &[&Instance], worst: &[Instance]) -> Verdict {
    let mut failures = Vec::new();
    for inst in all {
        let base = inst.run(Strategy::Baseline).stats.merge_ops;
        for s in [Strategy::Balanced, Strategy::Greedy] {
            let ops = inst.run(s).stats.merge_ops;
            if ops > base {
                failures.push(format!("{} {}: {ops} merges vs baseline {base}", inst.label, s.name()));
            }
        }
    }
    let mut max_ratio = 0f64;
    for inst in worst {
        let r =
            inst.run(Strategy::Balanced).stats.merge_ops as f64 / inst.run(Strategy::Baseline).stats.merge_ops as f64;
        max_ratio = max_ratio.max(r);
        if r > 0.1 {
            failures.push(format!("{}: merge ratio {r:.4}", inst.label));
        }
    }
    verdict(&failures, format!("dominance on {} instances, worst-case ratio <= {max_ratio:.4}", all.len()))
}

/// Merges random right-vertex pairs and retargets the absorbed vertex's
/// externals to the survivor. Only the inserts are metered.
fn criterion_8() -> Verdict {
    const SIDE: usize = 40_000;
    const INSERTS: u64 = 100_000;
    let g = gen_random_bipartite(SIDE, SIDE, 8 * SIDE, 88).unwrap();
    let mut mg = MergeGraph::build_from_csr(&g, 0.5);
    let mut rng = SplitMix64::seed_from_u64(8);
    let mut alive: Vec<u32> = (0..SIDE as u32).map(|v| mg.right_id(v)).collect();
    let (mut inserts, mut reads) = (0u64, 0u64);
    while inserts < INSERTS && alive.len() > 1 {
        let i = (rng.next_u64() % alive.len() as u64) as usize;
        let b = alive.swap_remove(i);
        let c = alive[(rng.next_u64() % alive.len() as u64) as usize];
        let externals = mg.iterate_neighbors(b).unwrap();
        let near: HashSet<u32> = mg.neighbor_set(c).into_iter().collect();
        mg.connect_tables(c, &[b]).unwrap();
        for x in externals {
            let d = mg.degree(x.target);
            mg.set_degree(x.target, d - 1);
            if near.contains(&x.target) {
                continue;
            }
            let before = mg.cell_reads();
            mg.insert_external(x.target, c, x.orig).unwrap();
            reads += mg.cell_reads() - before;
            inserts += 1;
        }
    }
    let mut failures = Vec::new();
    if inserts < INSERTS {
        failures.push(format!("only {inserts} inserts"));
    }
    if reads > 8 * inserts {
        failures.push(format!("{reads} reads for {inserts} inserts"));
    }
    if let Err(e) = mg.check_invariants() {
        failures.push(format!("store invariant: {e}"));
    }
    verdict(&failures, format!("{reads} reads for {inserts} inserts ({:.3} per insert)", reads as f64 / inserts as f64))
}

fn reports_bytes(input: &InputSource) -> (Vec<u8>, Vec<u8>) {
    let reports: Vec<RunReport> = RunStrategy::ALL
        .iter()
        .map(|&s| {
            let mut cfg = RunConfig::new(input.clone(), s);
            cfg.permute_seed = Some(17);
            cfg.slack = 0.25;
            cfg.repeat = 2;
            run_pipeline(&cfg).unwrap().report.without_times()
        })
        .collect();
    let mut json = Vec::new();
    let mut csv = Vec::new();
    write_reports(&reports, ReportFormat::Json, &mut json).unwrap();
    write_reports(&reports, ReportFormat::Csv, &mut csv).unwrap();
    (json, csv)
}

fn criterion_9() -> Verdict {
    let mut failures = Vec::new();
    let inputs = [
        InputSource::Random { n_left: 300, n_right: 280, m: 700, seed: 5 },
        InputSource::WorstCase(WorstCaseSpec::new(1 << 10, 5)),
    ];
    for input in &inputs {
        if reports_bytes(input) != reports_bytes(input) {
            failures.push(format!("{}: reports differ between runs", input.describe()));
        }
    }
    verdict(
        &failures,
        format!("{} inputs x {} strategies, JSON and CSV byte-identical", inputs.len(), RunStrategy::ALL.len()),
    )
}

fn main() -> ExitCode {
    let (fuzz, fuzz_time) = fuzz_suite();
    let (worst, worst_time) = worst_suite();
    let all: Vec<&Instance> = fuzz.iter().chain(&worst).collect();

    let results = [
        ("oracle equivalence", criterion_1(&fuzz, fuzz_time)),
        ("kernel contract", criterion_2(&all)),
        ("size identity", criterion_3(&all)),
        ("worst-case scaling", criterion_4(&worst, worst_time)),
        ("round bound", criterion_5(&all)),
        ("edge-touch bound", criterion_6(&all)),
        ("merge ratio", criterion_7(&all, &worst)),
        ("amortized insertion", criterion_8()),
        ("determinism", criterion_9()),
    ];
    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        println!("criterion {} {name}: {} ({})", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
